"""Exception hierarchy shared by all voicegate modules."""


class VoicegateError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VoicegateError):
    """A configuration document violates its schema.

    ``path`` names the offending location, e.g. ``signatures[2].slots[0].kind``.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ValidationError(VoicegateError):
    """Structurally valid input that violates a semantic invariant."""


class CommandSyntaxError(VoicegateError):
    """A command id string that does not parse as ``verb``, ``verb(a)`` or ``verb(a, b)``."""


class UnknownCommandError(VoicegateError):
    """A syntactically valid command id that is not in the catalog."""


class EmptyInputError(VoicegateError):
    """Text that normalizes to the empty string where content is required."""


class EmptyIndexError(VoicegateError):
    """An index built from, or queried over, zero entries."""


class IncompatibleIndexError(VoicegateError):
    """An index file written by an unsupported format version."""


class IndexIntegrityError(VoicegateError):
    """An index file that is truncated, corrupt, or fails its checksum."""


class TranscriptionError(VoicegateError):
    """A transcriber backend failed to produce text."""


class FixtureMissError(TranscriptionError):
    """Audio whose content hash is not present in the fixture manifest."""


class TranscriptionTimeout(TranscriptionError):
    """An external transcriber backend exceeded its timeout."""


class UndefinedReferenceError(VoicegateError):
    """A WER reference that normalizes to zero words."""


class UndefinedRateError(VoicegateError):
    """A success rate requested over an empty evaluation set."""


class EmptySceneError(VoicegateError):
    """A scene spawned with zero objects."""


class EmptySelectionError(VoicegateError):
    """An arrange or put command applied to an empty target set."""


class InvalidCountError(VoicegateError):
    """A pattern requested for zero points."""
