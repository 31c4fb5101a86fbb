"""Exception types raised by kinegroup.

Every error carries a short machine-readable ``code`` used by the CLI when it
reports failures as JSON.
"""


class KinegroupError(ValueError):
    code = "kinegroup-error"


class InvalidRotationError(KinegroupError):
    code = "invalid-rotation"


class DegenerateMapError(KinegroupError):
    code = "degenerate-map"


class DegenerateWorldlineError(KinegroupError):
    code = "degenerate-worldline"


class NotAtRestError(KinegroupError):
    code = "not-at-rest"


class DomainError(KinegroupError):
    code = "domain"


class AsymmetricDomainError(DomainError):
    """Raised when v lies in the velocity interval but -v does not (or vice versa)."""

    code = "asymmetric-domain"


class InvalidParamsError(KinegroupError):
    code = "invalid-params"


class SuperluminalError(DomainError):
    code = "superluminal"


class NotInGroupError(KinegroupError):
    code = "not-in-group"


class InvalidSynchronyError(KinegroupError):
    code = "invalid-synchrony"


class InvalidPathError(KinegroupError):
    code = "invalid-path"


class ConsistencyError(KinegroupError):
    """Two independent evaluations of the same quantity disagree."""

    code = "consistency"


class AxiomViolationError(KinegroupError):
    code = "axiom-violation"
