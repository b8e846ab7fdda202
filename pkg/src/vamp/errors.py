"""Exception hierarchy shared by every vamp module."""


class VampError(Exception):
    """Base class for all errors raised by vamp."""


class ConfigError(VampError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class MediaIOError(VampError, OSError):
    """Filesystem or codec failures (CLI exit code 3)."""


# media
class MissingDirectory(MediaIOError):
    pass


class TooFewFrames(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class DecodeFailure(MediaIOError):
    pass


class WriteFailure(MediaIOError):
    pass


class ZeroTargetDimension(ConfigError):
    pass


# sampling
class ZeroCount(ConfigError):
    pass


class FrameTooSmall(ConfigError):
    pass


class InvalidEps(ConfigError):
    pass


# regions
class ManifestMissing(MediaIOError):
    pass


class LabelMapDimMismatch(ConfigError):
    pass


class FrameCountMismatch(ConfigError):
    pass


class SeedOutOfBounds(ConfigError):
    pass


class EmptyInitialSet(ConfigError):
    pass


class MaskOutOfBounds(ConfigError):
    pass


# appearance
class EmptyMask(ConfigError):
    pass


class UnnormalizedInput(ConfigError):
    pass


class EmptySet(ConfigError):
    pass


class PatchTooSmall(ConfigError):
    pass


class DegenerateFeatureVector(ConfigError):
    pass


class InvalidWeights(ConfigError):
    pass


# motion
class TooShort(ConfigError):
    pass


class EmptySequence(ConfigError):
    pass


# scoring
class AllZero(ConfigError):
    pass


class InconsistentTracks(ConfigError):
    pass


class AlphaOutOfRange(ConfigError):
    pass


# corruption
class BadLevel(ConfigError):
    pass
