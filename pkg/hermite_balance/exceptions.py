"""Error hierarchy shared by every criterion unit and the command line."""


class RegularityError(Exception):
    """Base class for all errors raised by hermite_balance."""


# gridfn / young_orlicz
class InvalidGrid(RegularityError):
    pass


class GridTooCoarse(RegularityError):
    pass


class NonIntegrable(RegularityError):
    pass


class NonPositiveData(RegularityError):
    pass


class InvalidYoungFunction(RegularityError):
    pass


# hermite / mollify
class LevelTooLarge(RegularityError):
    pass


class MarginTooSmall(RegularityError):
    pass


class SingularMomentSystem(RegularityError):
    pass


# balance / interp
class DimensionMismatch(RegularityError):
    pass


class CurveTooShort(RegularityError):
    pass


class Divergent(RegularityError):
    pass


# ibp
class SingularCovariance(RegularityError):
    pass


class WeightsMissing(RegularityError):
    pass


class SingularPoint(RegularityError):
    pass


class TooFewParticlesNearX(RegularityError):
    pass


class IbpIdentityFailed(RegularityError):
    """The empirical IBP identity misses by more than the z limit."""


# sde_lab / heat_lab
class DegenerateFreeze(RegularityError):
    pass


class UnstableGrid(RegularityError):
    pass


class PointsTooClose(RegularityError):
    pass


# config / commands
class ConfigError(RegularityError):
    """Invalid experiment configuration; ``line`` is 1-based or None."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceCapExceeded(RegularityError):
    pass
