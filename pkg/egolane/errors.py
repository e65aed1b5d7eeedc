"""Exception hierarchy. The CLI maps these onto exit codes."""


class EgoLaneError(Exception):
    """Base for every error raised on purpose by this package."""


class CalibrationError(EgoLaneError, ValueError):
    """Homography is unusable or the frame does not match the calibration."""


class ConfigError(EgoLaneError, ValueError):
    """Pipeline configuration could not be read or validated."""


class TemplateError(EgoLaneError, ValueError):
    """Arrow template set is missing or malformed."""


class SceneSpecError(EgoLaneError, ValueError):
    """Synthetic scene cannot be rendered as described."""


class FrameReadError(EgoLaneError, OSError):
    """A frame could not be decoded."""
