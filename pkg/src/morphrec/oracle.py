"""Brute-force scanning checks, independent of the return-word machinery.

These exist so tests (and example generation) can compare structural
computations against direct observation of the sequences.  A finite scan
can refute a linear-recurrence bound but can never prove uniform
recurrence; every report says explicitly which of the two it is.  Nothing
here is consulted by the decision procedure itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotEnoughOccurrences
from .stream import FixedPointStream
from .system import ProlongableSystem


@dataclass(frozen=True)
class GapViolation:
    """A factor whose observed recurrence gap exceeds the supplied bound."""

    factor: tuple[str, ...]
    gap: int  # distance between successive occurrence starts, or tail window
    positions: tuple[int, int]  # (previous start, next start or scan end)
    kind: str  # "internal" (two occurrences) or "tail" (no further occurrence)


@dataclass(frozen=True)
class OracleReport:
    checked: str
    prefix_len: int
    factor_len_max: int
    factor_count: int
    # worst gap seen per factor length, with one witnessing factor each
    worst: dict
    violations: tuple[GapViolation, ...]
    conclusive: bool

    @property
    def ur_consistent(self) -> bool:
        """No violation found.  Explicitly NOT a proof of uniform recurrence."""
        return not self.violations


def window_ur_check(
    sys: ProlongableSystem,
    factor_len_max: int,
    prefix_len: int,
    linear_bound: int | None = None,
    which: str = "x",
) -> OracleReport:
    """Scan a prefix and measure recurrence gaps of every short factor.

    For each factor u with |u| <= factor_len_max occurring in the prefix,
    records the largest distance between successive occurrence starts.  When
    `linear_bound` C is given, a gap > C|u| is reported as a violation; a
    factor whose last occurrence leaves more than C|u| fully-scanned letters
    with no further occurrence is reported as a tail violation (both refute
    "linearly recurrent with constant C").  Without a bound the report is
    never conclusive.
    """
    if factor_len_max < 1 or prefix_len < 1:
        return OracleReport(
            checked="recurrence gaps of short factors",
            prefix_len=max(prefix_len, 0),
            factor_len_max=max(factor_len_max, 0),
            factor_count=0,
            worst={},
            violations=(),
            conclusive=False,
        )
    stream = FixedPointStream(sys, which)
    text = stream.prefix_chars(prefix_len)
    alpha = sys.alphabet if which == "y" else sys.target_alphabet
    worst: dict[int, dict] = {}
    violations: list[GapViolation] = []
    total_factors = 0

    for ln in range(1, min(factor_len_max, len(text)) + 1):
        last: dict[str, int] = {}
        gap_of: dict[str, tuple[int, tuple[int, int]]] = {}
        for i in range(len(text) - ln + 1):
            f = text[i : i + ln]
            prev = last.get(f)
            if prev is not None:
                gap = i - prev
                cur = gap_of.get(f)
                if cur is None or gap > cur[0]:
                    gap_of[f] = (gap, (prev, i))
            last[f] = i
        total_factors += len(last)
        if gap_of:
            top = max(gap_of.items(), key=lambda kv: kv[1][0])
            worst[ln] = {
                "factor": tuple(alpha.decode(top[0])),
                "gap": top[1][0],
                "positions": top[1][1],
            }
        if linear_bound is None:
            continue
        limit = linear_bound * ln
        for f, (gap, pos) in gap_of.items():
            if gap > limit:
                violations.append(GapViolation(tuple(alpha.decode(f)), gap, pos, "internal"))
        scan_end = len(text) - ln  # last start position fully checked
        for f, pos in last.items():
            if scan_end - pos > limit:
                violations.append(
                    GapViolation(tuple(alpha.decode(f)), scan_end - pos, (pos, scan_end), "tail")
                )

    violations.sort(key=lambda v: (-v.gap, v.factor))
    return OracleReport(
        checked="recurrence gaps of short factors",
        prefix_len=prefix_len,
        factor_len_max=factor_len_max,
        factor_count=total_factors,
        worst=worst,
        violations=tuple(violations[:64]),
        conclusive=bool(violations) and linear_bound is not None,
    )


def brute_force_return_words(
    sys: ProlongableSystem,
    u: list[str] | tuple[str, ...],
    prefix_len: int,
    which: str = "x",
) -> list[tuple[str, ...]]:
    """Return words to u observed in a prefix, in first-appearance order.

    Ground truth for the structural return tables: a plain scan for all
    occurrences of u, cutting the prefix at successive occurrence starts.
    Raises NotEnoughOccurrences when u occurs fewer than twice.
    """
    if not u:
        raise ValueError("u must be non-empty")
    stream = FixedPointStream(sys, which)
    text = stream.prefix_chars(prefix_len)
    alpha = sys.alphabet if which == "y" else sys.target_alphabet
    pat = alpha.encode(list(u))
    occ = []
    pos = text.find(pat)
    while pos != -1:
        occ.append(pos)
        pos = text.find(pat, pos + 1)
    if len(occ) < 2:
        raise NotEnoughOccurrences(len(occ))
    seen = set()
    out: list[tuple[str, ...]] = []
    for i, j in zip(occ, occ[1:]):
        w = text[i:j]
        if w not in seen:
            seen.add(w)
            out.append(tuple(alpha.decode(w)))
    return out
