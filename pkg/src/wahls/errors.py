"""Exception types shared across the toolkit."""


class WahlsError(Exception):
    """Base class for all toolkit errors."""


class MissingField(WahlsError):
    """A required schema field is absent from a record."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing required field: {name!r}")


class MalformedArchitecture(WahlsError):
    """The layer list of a record cannot be reconstructed."""


class EmptyDataset(WahlsError):
    """Zero samples could be parsed from the given location."""


class TooDeep(WahlsError):
    """Architecture exceeds the maximum supported sequence depth."""

    def __init__(self, depth: int, limit: int):
        self.depth = depth
        self.limit = limit
        super().__init__(f"architecture has {depth} layers, limit is {limit}")


class UnknownCategory(WahlsError):
    """An ordinal code falls outside the model's embedding table."""


class Diverged(WahlsError):
    """Training loss became non-finite."""


class VersionMismatch(WahlsError):
    """Checkpoint was produced under an incompatible layout version."""


class CorruptCheckpoint(WahlsError):
    """Checkpoint bytes are truncated or structurally invalid."""


class LengthMismatch(WahlsError):
    """Paired metric vectors have different lengths."""

    def __init__(self, n_true: int, n_pred: int):
        super().__init__(f"length mismatch: {n_true} ground-truth vs {n_pred} predicted")
