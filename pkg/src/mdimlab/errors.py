"""Exception hierarchy shared by all mdimlab modules."""


class MdimError(Exception):
    """Base class for every error raised by mdimlab."""


class RangeMismatch(MdimError):
    pass


class RangeTooSmall(MdimError):
    pass


class CapExceeded(MdimError):
    pass


class EpsilonBelowResolution(MdimError):
    pass


class InsufficientData(MdimError):
    pass


class InvalidDistribution(MdimError):
    pass


class NoConvergence(MdimError):
    pass


class CoverInfeasible(MdimError):
    def __init__(self, msg, max_mass=None):
        super().__init__(msg)
        self.max_mass = max_mass


class EmptyFilter(MdimError):
    pass


class MixtureNotSupported(MdimError):
    pass


class BudgetExhausted(MdimError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class ConfigError(MdimError):
    pass
