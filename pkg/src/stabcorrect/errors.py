"""Domain exceptions shared across the package."""


class StabcorrectError(Exception):
    """Base class for all package-specific failures."""


class ResidualVanished(StabcorrectError):
    """Residual norm fell below tolerance; the running decomposition already
    reproduces the target state."""


class CollectionEmpty(StabcorrectError):
    """No candidate set reached the requested size; retry with fresh randomness."""


class PfrSubgroupNotFound(StabcorrectError):
    """Too few accepted pairwise sums to span a subgroup (the failure sentinel)."""


class SelfCorrectionFailed(StabcorrectError):
    """All pipeline attempts exhausted without producing a candidate."""


class NoCandidateFound(StabcorrectError):
    """No product-state candidate was collected within the round budget."""


class BlockWeightBelowTolerance(StabcorrectError):
    """Every sampled computational branch carries negligible weight."""


class CoefficientPrefixExhausted(StabcorrectError):
    """A coefficient prefix sum reached 1 within tolerance; tomography is
    essentially complete and the normalizing division is ill-posed."""
