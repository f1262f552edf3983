# exceptions.py

"""
This module defines the exception hierarchy shared by every part of `degradekit`.

Classes:
    DegradeKitError: Root of all errors raised by the package.
    InvalidArgumentError: A precondition on an argument was violated.
    LevelOutOfRangeError: A severity level fell outside 1..10.
    UnknownKindError: A degradation kind name is not in the registry.
    UnsupportedArityError: A prompt was requested for an unsupported number of specs.
    UndefinedCosineError: Cosine similarity was requested for a zero-norm vector.
    PromptParseError: Free text did not match any template of the bank.
    ImageIOError: A PNG could not be read or written.
    DatasetWriteError: Dataset synthesis aborted while writing outputs.
"""


class DegradeKitError(Exception):
    """Base class for all degradekit errors."""


class InvalidArgumentError(DegradeKitError, ValueError):
    """Raised when an argument violates a documented precondition."""


class LevelOutOfRangeError(InvalidArgumentError):
    """Raised when a severity level is outside 1..10."""

    def __init__(self, level):
        super().__init__(f"Severity level must be in [1, 10]. Got: {level}")
        self.level = level


class UnknownKindError(InvalidArgumentError):
    """Raised when a degradation kind is not registered."""

    def __init__(self, kind):
        super().__init__(f"Unknown degradation kind: {kind!r}")
        self.kind = kind


class UnsupportedArityError(InvalidArgumentError):
    """Raised when a prompt would have to describe more specs than the grammar allows."""


class UndefinedCosineError(InvalidArgumentError):
    """Raised when cosine similarity involves a zero-norm vector."""


class PromptParseError(DegradeKitError):
    """
    Raised when a prompt does not match any template.

    Attributes:
        nearest_template (str): Pattern of the closest template, for diagnostics.
    """

    def __init__(self, message, nearest_template=None):
        super().__init__(message)
        self.nearest_template = nearest_template


class ImageIOError(DegradeKitError, OSError):
    """Raised when an image file cannot be decoded or written."""


class DatasetWriteError(DegradeKitError):
    """
    Raised when synthesis cannot write its outputs.

    Attributes:
        manifest: The partial manifest assembled before the failure, flagged as partial.
    """

    def __init__(self, message, manifest=None):
        super().__init__(message)
        self.manifest = manifest
