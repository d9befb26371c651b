"""Exception types raised by the library."""

import numpy as np


class OffDomainError(ValueError):
    """A point does not lie on the domain of the basis."""


class IncompatibleWeightsError(ValueError):
    """The kernel series does not converge uniformly, so p = inf is undefined."""


class IllConditionedError(np.linalg.LinAlgError):
    """A Gram matrix is too ill-conditioned for the requested solve."""

    def __init__(self, cond: float, cond_max: float):
        super().__init__(f"condition estimate {cond:.3e} exceeds {cond_max:.1e}")
        self.cond = cond
        self.cond_max = cond_max


class RankDeficientError(np.linalg.LinAlgError):
    """A basis or Gram matrix has lower rank than the problem requires."""

    def __init__(self, rank: int, required: int):
        super().__init__(f"rank {rank} < required {required}")
        self.rank = rank
        self.required = required
