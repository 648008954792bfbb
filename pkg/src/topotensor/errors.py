"""Exception types shared across the package."""


class TopoTensorError(Exception):
    """Base class for all package-specific errors."""


class IngestionError(TopoTensorError):
    """A dataset directory is missing a mandatory file or is unreadable."""


class FormatError(TopoTensorError):
    """A dataset file is present but malformed (carries the offending line)."""


class ResourceBudgetError(TopoTensorError):
    """A computation would exceed its configured resource budget."""


class ContractError(TopoTensorError):
    """An operation was called with arguments violating its contract."""


class ConfigError(TopoTensorError):
    """A run or model configuration is inconsistent or out of range."""


class StratificationError(TopoTensorError):
    """A cross-validation split cannot be formed for the given dataset."""


class CheckpointError(TopoTensorError):
    """A checkpoint file is corrupt or does not match the expected config."""
