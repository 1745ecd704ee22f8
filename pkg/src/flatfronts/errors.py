"""Exception types raised across the package."""


class FlatFrontError(Exception):
    """Base class for all package errors."""


class NonRegularCurve(FlatFrontError):
    pass


class FrameDriftExceeded(FlatFrontError):
    pass


class BadInitialFrame(FlatFrontError):
    pass


class NotBishopFrame(FlatFrontError):
    pass


class InflectionPoint(FlatFrontError):
    pass


class SingularSample(FlatFrontError):
    """Raised when a check needs an immersion but rank(df) < n at the point."""


class NotImmersed(FlatFrontError):
    pass


class DimensionTooSmall(FlatFrontError):
    pass


class WitnessFailed(FlatFrontError):
    pass


class DegenerateZero(FlatFrontError):
    """A zero of the density has multiplicity >= 2 within resolution.

    ``lower_bound`` carries the count of non-cuspidal-edge points that could
    still be certified.
    """

    def __init__(self, message, lower_bound=0, result=None):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.result = result


class ConfigError(FlatFrontError):
    pass


class CheckFailed(FlatFrontError):
    def __init__(self, failed):
        super().__init__("failed checks: " + ", ".join(failed))
        self.failed = list(failed)


class IoFailure(FlatFrontError):
    pass
