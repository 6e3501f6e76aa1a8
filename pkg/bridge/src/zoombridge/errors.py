class BridgeError(Exception):
    """Base class for bridge failures."""


class JobError(BridgeError):
    """The job file is malformed or references broken inputs."""


class ModelError(BridgeError):
    """The requested model cannot be loaded or applied."""
