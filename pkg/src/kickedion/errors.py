"""Exception and warning types shared across the package."""


class KickedIonError(Exception):
    """Base class for all package errors."""


class TruncationLoss(KickedIonError):
    """A state does not fit into the truncated Fock basis."""


class DecompositionFailure(KickedIonError):
    """Floquet eigen-decomposition residual exceeded tolerance."""


class NonRotational(KickedIonError):
    """Orbit angle sequence is not monotonically unwrappable around the center."""


class EmptySelection(KickedIonError):
    """No Floquet mode passed the selection thresholds."""


class NullState(KickedIonError):
    """A projection removed the whole state."""


class ConfigError(KickedIonError):
    """Inconsistent or malformed scenario configuration."""


class DegeneracyWarning(UserWarning):
    """Quasi-energies closer than the degeneracy threshold were found."""
