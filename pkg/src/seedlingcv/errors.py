"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError means a bad config or
flag combination (exit 2), everything else derived from SeedlingError
is a runtime/data failure (exit 1).
"""


class SeedlingError(Exception):
    pass


class ImageError(SeedlingError):
    """Problem reading or writing an image file; message includes the path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = str(path)


class UnsupportedFormatError(ImageError):
    pass


class CorruptImageError(ImageError):
    pass


class DatasetError(SeedlingError):
    pass


class CheckpointError(SeedlingError):
    pass


class ConfigError(SeedlingError):
    pass
