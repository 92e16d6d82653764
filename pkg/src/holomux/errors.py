"""Exception hierarchy. Every error is a ``ValueError`` so callers can catch broadly."""


class HoloError(ValueError):
    pass


class InvalidFieldError(HoloError):
    pass


class OracleSizeError(HoloError):
    pass


class UnsupportedSizeError(HoloError):
    pass


class InvalidTargetError(HoloError):
    pass


class InvalidPlanError(HoloError):
    pass


class ShapeMismatchError(HoloError):
    pass


class EmptyAccumulatorError(HoloError):
    pass


class DegenerateGainError(HoloError):
    pass


class InvalidParameterError(HoloError):
    pass


class ImageFormatError(HoloError):
    pass
