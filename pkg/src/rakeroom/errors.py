"""Exception types raised across the toolkit."""


class RakeRoomError(Exception):
    """Base class for all errors raised by rakeroom."""


class ConfigError(RakeRoomError):
    """Invalid scenario or experiment configuration."""


# geometry
class SourceOutsideRoom(ConfigError):
    pass


class TranslationLeavesRoom(RakeRoomError):
    pass


# numerics
class NotPositiveDefinite(RakeRoomError):
    pass


class NoConvergence(RakeRoomError):
    pass


# acoustics
class SourceOnMicrophone(RakeRoomError):
    pass


class NotEnoughImages(ConfigError):
    pass


class EmptySignal(RakeRoomError):
    pass


class WavFormatError(RakeRoomError):
    pass


class SampleRateMismatch(WavFormatError):
    pass


# stft / beamforming
class ShapeMismatch(RakeRoomError):
    pass


class ZeroSteeringVector(RakeRoomError):
    pass


class CancellingSteeringVectors(RakeRoomError):
    pass


class TooManyConstraints(ConfigError):
    pass


class IllConditionedConstraints(RakeRoomError):
    pass


# metrics
class ZeroDenominator(RakeRoomError):
    pass
