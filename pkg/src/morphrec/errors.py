"""Exception types shared across the library.

Every error that callers are expected to catch derives from MorphrecError.
InternalConsistencyError is reserved for "this cannot happen unless the
library itself is wrong" situations; the CLI maps it to exit code 2.
"""

from __future__ import annotations


class MorphrecError(Exception):
    """Base class for all library errors."""


class ParseError(MorphrecError):
    """Malformed system file. Carries 1-based line and column."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class AlphabetMismatch(MorphrecError):
    """Morphism composition/application over incompatible alphabets."""


class NotPrimitive(MorphrecError):
    """An operation requiring a primitive incidence matrix got a non-primitive one."""


class PreconditionViolated(MorphrecError):
    """A documented operation precondition does not hold for the input."""


class NormalizationUnsupported(MorphrecError):
    """The system cannot be brought to coding-over-non-erasing form here.

    Erasing images require a general elimination algorithm that is outside
    this library's scope; bounded blow-up search is the only reduction
    attempted.
    """


class BudgetExhausted(MorphrecError):
    """A scan budget ran out before the requested structure was witnessed."""

    def __init__(self, message: str, occurrences_found: int = 0):
        super().__init__(message)
        self.occurrences_found = occurrences_found


class NotEnoughOccurrences(MorphrecError):
    """Fewer occurrences than required in the scanned range.

    max_gap returns an instance of this as a signal value; the brute-force
    oracle raises it.
    """

    def __init__(self, count: int):
        super().__init__(f"only {count} occurrence(s) in the scanned range")
        self.count = count


class PrefixInvalid(MorphrecError):
    """The given word is not a prefix of the sequence it must prefix."""


class NoPrimitiveSubmorphism(MorphrecError):
    """No primitive sub-morphism found (defensive; growing systems always have one)."""


class NoOccurrence(MorphrecError):
    """An image word contains no element of the target occurrence set.

    Under uniform recurrence this cannot happen for long-enough images, so
    the decider converts it into a not-uniformly-recurrent witness.
    """

    def __init__(self, message: str, scanned_length: int = 0):
        super().__init__(message)
        self.scanned_length = scanned_length


class WitnessSearchExhausted(MorphrecError):
    """Neither branch of the non-growing dichotomy was established in budget."""


class InternalConsistencyError(MorphrecError):
    """An internal invariant failed; results cannot be trusted. CLI exit 2."""
