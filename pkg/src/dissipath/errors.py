"""Exception types raised across the package.

``NumericalError`` subclasses map to CLI exit code 3 and ``InputError``
subclasses to exit code 2.
"""


class DissipathError(Exception):
    pass


class InputError(DissipathError, ValueError):
    pass


class NumericalError(DissipathError, ArithmeticError):
    pass


class UnsupportedElementError(InputError):
    def __init__(self, element):
        super().__init__(f"unsupported element {element!r}: only hydrogen has a bundled STO-3G basis")
        self.element = element


class SingularGeometryError(InputError):
    pass


class UnsupportedSpinError(InputError):
    pass


class GaugeError(NumericalError):
    def __init__(self, max_deviation):
        super().__init__(f"coefficients are not S-orthonormal (max |C^T S C - I| = {max_deviation:.3e})")
        self.max_deviation = max_deviation


class FcidumpParseError(InputError):
    def __init__(self, message, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"FCIDUMP parse error{where}: {message}")
        self.line = line


class DomainError(InputError):
    pass


class ShapeError(InputError):
    pass


class IndexOrderError(InputError):
    pass


class ContractError(InputError):
    pass


class GapClosureError(NumericalError):
    pass


class GaugeDiscontinuityError(NumericalError):
    def __init__(self, k, sigma_min):
        super().__init__(
            f"occupied-space overlap between mesh points {k} and {k + 1} is rank deficient "
            f"(sigma_min = {sigma_min:.2e})"
        )
        self.pair = (k, k + 1)
        self.sigma_min = sigma_min


class NumericalOverlapError(NumericalError):
    pass


class ResolutionError(InputError):
    pass


class FrequencyRangeError(InputError):
    pass


class IntegratorFailure(NumericalError):
    pass


class ConfigError(InputError):
    def __init__(self, field, message):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field


class DivergenceError(InputError):
    pass
