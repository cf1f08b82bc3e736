"""Exception types shared across the package."""


class AcgnError(Exception):
    """Base class for package errors."""


class VocabularyError(AcgnError):
    """A word is missing from (or duplicated in) a clause dictionary."""

    def __init__(self, clause, word, reason="not in dictionary"):
        self.clause = clause
        self.word = word
        super().__init__(f"clause {clause!r}: word {word!r} {reason}")


class PlacementError(AcgnError):
    """Scene placement rejection sampling exhausted its attempt budget."""


class PreconditionError(AcgnError):
    """An action command is not executable in the current scene."""


class ConflictError(AcgnError):
    """Concurrent commands touch overlapping object sets."""


class CapacityError(AcgnError):
    """A configured session or node limit was exceeded."""
