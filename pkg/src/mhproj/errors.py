"""Exception hierarchy.

Every error carries a ``category`` string so the command line front end can
report a machine-readable failure class.
"""


class MhprojError(Exception):
    category = "error"


class InvalidSpecError(MhprojError, ValueError):
    category = "invalid_spec"


class InvalidHorizonError(InvalidSpecError):
    category = "invalid_horizon"


class InvalidCovarianceError(InvalidSpecError):
    category = "invalid_covariance"


class InvalidBandwidthError(InvalidSpecError):
    category = "invalid_bandwidth"


class InvalidRestrictionError(InvalidSpecError):
    category = "invalid_restriction"


class IndexContractError(InvalidSpecError):
    category = "index_contract"


class ConfigError(InvalidSpecError):
    category = "config"


class ParseError(InvalidSpecError):
    category = "parse"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InsufficientDataError(MhprojError, ValueError):
    category = "insufficient_data"


class NumericError(MhprojError, ArithmeticError):
    category = "numeric"


class NumericOverflowError(NumericError):
    category = "numeric_overflow"

    def __init__(self, horizon):
        super().__init__(f"non-finite coefficients at horizon {horizon}")
        self.horizon = horizon


class StationarityError(NumericError):
    category = "stationarity_required"


class _ConditionError(NumericError):
    what = "matrix"

    def __init__(self, cond, detail=""):
        msg = f"{self.what} is singular or ill-conditioned (condition number {cond:.3g})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.cond = cond


class SingularMomentError(_ConditionError):
    category = "singular_moment"
    what = "moment matrix"


class CollinearityError(_ConditionError):
    category = "collinearity"
    what = "regressor matrix"


class WeakInstrumentError(_ConditionError):
    category = "weak_instrument"
    what = "instrument-regressor cross moment"


class SingularCovarianceError(_ConditionError):
    category = "singular_covariance"
    what = "covariance sub-block"


class UnstableBootstrapError(NumericError):
    category = "unstable_bootstrap"

    def __init__(self, n_failed, n_total):
        super().__init__(f"{n_failed} of {n_total} bootstrap draws failed")
        self.n_failed = n_failed
        self.n_total = n_total


class EmptyInversionError(NumericError):
    category = "empty_inversion"
