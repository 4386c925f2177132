"""Exception types raised across the package."""


class NoContactError(RuntimeError):
    """Raised when a difference image has too few active pixels to fit a contact circle."""


class EmptyCloudError(RuntimeError):
    """Raised when a contact mask selects no pixels for point-cloud conversion."""


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss becomes NaN; carries the epoch and learning rate."""

    def __init__(self, epoch, lr):
        super().__init__(f"loss became NaN at epoch {epoch} (lr={lr})")
        self.epoch = epoch
        self.lr = lr


class TrackingLostError(RuntimeError):
    """Raised when ICP runs out of correspondences; carries the last usable estimate."""

    def __init__(self, message, last_estimate=None, frame_index=None):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.frame_index = frame_index


class CorruptWeightsError(RuntimeError):
    """Raised for weight files with bad magic, version, sizes, or truncation."""


class WeightsKindError(CorruptWeightsError):
    """Raised when a weights file holds a different model kind than requested."""


class PipelineStageError(RuntimeError):
    """Wraps an error raised inside a named reconstruction stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
