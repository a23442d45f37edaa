"""Exception hierarchy shared by every shiftkit module."""


class ShiftkitError(Exception):
    """Base class for all errors raised by shiftkit."""


class ValidationError(ShiftkitError, ValueError):
    """A record violates one of its invariants."""


class DistributionError(ValidationError):
    """Confidences or weights do not form a probability distribution."""


class ShapeError(ValidationError):
    """Arrays that must agree in length or shape do not."""


class NegativeVarianceError(ValidationError):
    pass


class EmptyEnsembleError(ValidationError):
    pass


class EmptyReferenceError(ValidationError):
    pass


class EmptyDatasetError(ShiftkitError, ValueError):
    """A dataset-level metric was asked for on zero samples."""


class EmptyInputError(ShiftkitError, ValueError):
    pass


class SingleClassError(ShiftkitError, ValueError):
    """ROC-AUC needs both in-domain and shifted samples."""


class CovarianceError(ShiftkitError, ValueError):
    """A covariance matrix is not symmetric positive-definite."""


class ConfigError(ShiftkitError, ValueError):
    pass
