"""Alphabets and words.

Letters are opaque string tokens at the API boundary. Internally each
alphabet letter is one Python character starting at chr(33), so words are
plain str values and morphism application / occurrence scanning run at
C speed through str.translate and str.find. An Alphabet owns the two-way
mapping; all internal words are strings over its internal characters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AlphabetMismatch

_BASE = 33  # first internal code point; printable, keeps debug output readable


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of letter tokens with an internal char encoding."""

    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("alphabet tokens must be distinct")
        if not self.tokens:
            raise ValueError("alphabet must be non-empty")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise AlphabetMismatch(f"letter {token!r} not in alphabet {list(self.tokens)}") from None

    def char(self, token: str) -> str:
        """Internal character for a token."""
        return chr(_BASE + self.index(token))

    def token_of_char(self, ch: str) -> str:
        i = ord(ch) - _BASE
        if not 0 <= i < len(self.tokens):
            raise AlphabetMismatch(f"internal char {ch!r} outside alphabet")
        return self.tokens[i]

    @property
    def chars(self) -> str:
        """All internal characters in alphabet order."""
        return "".join(chr(_BASE + i) for i in range(len(self.tokens)))

    def encode(self, word: list[str] | tuple[str, ...]) -> str:
        """Token sequence -> internal word."""
        return "".join(chr(_BASE + self.index(t)) for t in word)

    def decode(self, internal: str) -> list[str]:
        """Internal word -> token sequence."""
        return [self.token_of_char(c) for c in internal]

    @staticmethod
    def indexed(n: int) -> "Alphabet":
        """Alphabet {"1", ..., "n"} used for return-word index letters."""
        if n < 1:
            raise ValueError("indexed alphabet needs at least one letter")
        return Alphabet(tuple(str(i) for i in range(1, n + 1)))


def factor_set(word: str, n: int) -> set[str]:
    """All length-n factors of an internal word."""
    if n == 0:
        return {""}
    return {word[i : i + n] for i in range(len(word) - n + 1)}


def occurrences_in_word(word: str, pattern: str) -> list[int]:
    """All (possibly overlapping) occurrence positions of pattern in word."""
    if not pattern:
        raise ValueError("pattern must be non-empty")
    out = []
    i = word.find(pattern)
    while i != -1:
        out.append(i)
        i = word.find(pattern, i + 1)
    return out
