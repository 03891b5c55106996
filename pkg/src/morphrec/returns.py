"""Return words, derived sequences, and induced substitutions.

Two layers: the word case (returns of a sequence to a single prefix u, with
the induced substitution sigma_u), and the set case used by the decider
(returns of y to the preimage set U of a prefix of x, producing a pair table,
the index substitution sigma_U, and the coding psi onto x-side return
indices).  All tables index from 1; entry order is first appearance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    BudgetExhausted,
    InternalConsistencyError,
    NoOccurrence,
    NotPrimitive,
    PrefixInvalid,
)
from .growth import is_primitive
from .morphism import Morphism
from .stream import FixedPointStream
from .system import ProlongableSystem
from .words import Alphabet, occurrences_in_word


@dataclass(frozen=True)
class ReturnTable:
    """Return words of a sequence to a single word u, in first-appearance order.

    theta(i) is the i-th return word (1-based).  derived_prefix is the start
    of the derived sequence: the index sequence factorizing the scanned
    prefix from one u-occurrence to the next.
    """

    u: tuple[str, ...]
    which: str
    words: tuple[tuple[str, ...], ...]
    derived_prefix: tuple[int, ...]
    complete: bool
    scanned: int

    def __len__(self) -> int:
        return len(self.words)

    def theta(self, i: int) -> tuple[str, ...]:
        if not 1 <= i <= len(self.words):
            raise IndexError(f"return index {i} out of range 1..{len(self.words)}")
        return self.words[i - 1]


def _check_prefix(stream: FixedPointStream, pattern: str, label: str):
    if not pattern:
        raise PrefixInvalid(f"{label} must be non-empty")
    if stream.prefix_chars(len(pattern)) != pattern:
        raise PrefixInvalid(f"{label} is not a prefix of the sequence")


def return_words_to_word(
    sys: ProlongableSystem, u: list[str], budget: int = 1 << 16, which: str = "x"
) -> ReturnTable:
    """Scan the first `budget` letters and collect return words to u.

    The table is ordered by first appearance of the return word; the trailing
    partial return (after the last seen occurrence) is dropped.  Raises
    BudgetExhausted when u does not recur within the budget.
    """
    stream = FixedPointStream(sys, which)
    alpha = sys.alphabet if which == "y" else sys.target_alphabet
    pattern = alpha.encode(u)
    _check_prefix(stream, pattern, "u")
    occ = stream.scan_occurrences(pattern, budget)
    if len(occ) < 2:
        raise BudgetExhausted(
            f"word recurred {len(occ)} time(s) within the first {budget} letters",
            occurrences_found=len(occ),
        )
    text = stream.prefix_chars(occ[-1] + len(pattern))
    index_of: dict[str, int] = {}
    words: list[tuple[str, ...]] = []
    derived: list[int] = []
    for a, b in zip(occ, occ[1:]):
        w = text[a:b]
        idx = index_of.get(w)
        if idx is None:
            idx = len(words) + 1
            index_of[w] = idx
            words.append(tuple(alpha.decode(w)))
        derived.append(idx)
    return ReturnTable(
        u=tuple(u),
        which=which,
        words=tuple(words),
        derived_prefix=tuple(derived),
        complete=False,
        scanned=budget,
    )


@dataclass(frozen=True)
class ReturnSubstitution:
    """Closed return-word table of y to a prefix u, with the substitution
    sigma_u satisfying Theta sigma_u = sigma Theta."""

    sigma_u: Morphism
    table: ReturnTable


def return_substitution(
    sys: ProlongableSystem,
    u: list[str],
    max_returns: int = 4096,
    scan_budget: int = 1 << 22,
) -> ReturnSubstitution:
    """Induced substitution on return-word indices for a primitive system.

    Closure: the first return word is found by scanning; every further word
    appears while cutting images sigma(w_i) at u-occurrences, processed in
    index order, which reproduces first-appearance indexing.
    """
    if not is_primitive(sys.incidence.matrix):
        raise NotPrimitive("return substitutions need a primitive incidence matrix")
    stream = FixedPointStream(sys, "y")
    alpha = sys.alphabet
    pattern = alpha.encode(u)
    _check_prefix(stream, pattern, "u")

    limit = max(4 * len(pattern), 64)
    occ: list[int] = []
    while len(occ) < 2:
        occ = stream.scan_occurrences(pattern, limit, max_count=2)
        if len(occ) >= 2:
            break
        if limit >= scan_budget:
            raise BudgetExhausted(
                f"prefix did not recur within {limit} letters",
                occurrences_found=len(occ),
            )
        limit *= 4

    first_w = stream.prefix_chars(occ[1])
    words = [first_w]
    index_of = {first_w: 1}
    images: list[list[int]] = []
    sigma = sys.sigma
    m = len(pattern)

    j = 0
    while j < len(words):
        j += 1
        w = words[j - 1]
        body = sigma.apply(w)
        ext = body + pattern
        cuts = [o for o in occurrences_in_word(ext, pattern) if o <= len(body)]
        if not cuts or cuts[0] != 0 or cuts[-1] != len(body):
            raise InternalConsistencyError(
                "image of a return word lost its anchoring u-occurrences"
            )
        img: list[int] = []
        for a, b in zip(cuts, cuts[1:]):
            piece = ext[a:b]
            idx = index_of.get(piece)
            if idx is None:
                if len(words) >= max_returns:
                    raise BudgetExhausted(
                        f"more than {max_returns} return words discovered",
                        occurrences_found=len(words),
                    )
                words.append(piece)
                idx = len(words)
                index_of[piece] = idx
            img.append(idx)
        images.append(img)

    count = len(words)
    idx_alpha = Alphabet.indexed(count)
    sigma_u = Morphism.from_tokens(
        idx_alpha, idx_alpha, {str(i): [str(k) for k in images[i - 1]] for i in range(1, count + 1)}
    )
    # independent re-check of the defining equation sigma(Theta(i)) = Theta(sigma_u(i))
    for i in range(1, count + 1):
        lhs = sigma.apply(words[i - 1])
        rhs = "".join(words[k - 1] for k in images[i - 1])
        if lhs != rhs:
            raise InternalConsistencyError(f"defining equation fails at index {i}")
    if images[0][0] != 1:
        raise InternalConsistencyError("sigma_u(1) does not start with 1")

    derived = _derived_prefix_from(images, 64)
    table = ReturnTable(
        u=tuple(u),
        which="y",
        words=tuple(tuple(alpha.decode(w)) for w in words),
        derived_prefix=tuple(derived),
        complete=True,
        scanned=limit,
    )
    return ReturnSubstitution(sigma_u, table)


def _derived_prefix_from(images: list[list[int]], n: int) -> list[int]:
    """First n letters of the fixed point of the index substitution from 1."""
    seq = [1]
    while len(seq) < n:
        nxt: list[int] = []
        for i in seq:
            nxt.extend(images[i - 1])
            if len(nxt) >= n:
                break
        if nxt == seq or not nxt:
            break
        if len(nxt) <= len(seq) and seq == nxt[: len(seq)]:
            break
        seq = nxt
    return seq[:n]


# -- the p/m/s decomposition --------------------------------------------------------


def pms_decompose(
    sys: ProlongableSystem, w: list[str], u: list[str]
) -> tuple[list[str], list[str], list[str]]:
    """Split sigma(w) as p.m.s where m is the first window whose phi-image
    equals phi(u) (the first occurrence of the preimage set U in sigma(w)).

    Raises NoOccurrence when sigma(w) has no such window.
    """
    alpha = sys.alphabet
    phi = sys.effective_phi
    body = sys.sigma.apply(alpha.encode(w))
    v = phi.apply(alpha.encode(u))
    image = phi.apply(body)
    pos = image.find(v)
    if pos == -1 or pos + len(v) > len(body):
        raise NoOccurrence(
            "image of the word contains no occurrence of the target set",
            scanned_length=len(body),
        )
    m = len(v)
    return (
        alpha.decode(body[:pos]),
        alpha.decode(body[pos : pos + m]),
        alpha.decode(body[pos + m :]),
    )


# -- the set-case driver -------------------------------------------------------------


@dataclass(frozen=True)
class DriverExit:
    """Structured abort of the descriptor driver.

    kind: 'E1' (prefix does not recur in the K-window), 'E2' (return word
    longer than K|u|), 'E3' (more than K1 table entries), 'E4' (entry first
    appears beyond the closure window), 'no-occurrence' (a long window misses
    the target), 'empty-image' (an image block contributes no occurrence),
    'short-return' (return word shorter than |u|/K).  unconditional=True
    means the evidence alone refutes uniform recurrence; guarded exits also
    need aperiodicity, which the decider resolves separately.
    """

    kind: str
    unconditional: bool
    message: str
    evidence: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class DerivedDescriptor:
    """Complete return structure of y to U = preimages of a prefix of x.

    pairs[(j-1)] = (w, u') with w a return word of y to U and u' the U-word
    that follows; sigma_u_images are the index images of the induced
    substitution; psi maps pair indices onto x-side return indices;
    x_returns are the return words of x to v = phi(u).
    """

    u: tuple[str, ...]
    v: tuple[str, ...]
    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    sigma_u_images: tuple[tuple[int, ...], ...]
    psi: tuple[int, ...]
    x_returns: tuple[tuple[str, ...], ...]
    complete: bool = True

    def __len__(self) -> int:
        return len(self.pairs)

    @cached_property
    def sigma_U(self) -> Morphism:
        idx = Alphabet.indexed(len(self.pairs))
        return Morphism.from_tokens(
            idx,
            idx,
            {
                str(i): [str(k) for k in self.sigma_u_images[i - 1]]
                for i in range(1, len(self.pairs) + 1)
            },
        )

    @cached_property
    def psi_morphism(self) -> Morphism:
        src = Alphabet.indexed(len(self.pairs))
        dst = Alphabet.indexed(len(self.x_returns))
        return Morphism.from_tokens(
            src, dst, {str(i): [str(self.psi[i - 1])] for i in range(1, len(self.pairs) + 1)}
        )

    def first_return_word(self) -> tuple[str, ...]:
        return self.pairs[0][0]

    def canonical_text(self) -> str:
        """Level-independent form: index substitution plus psi, nothing else."""
        lines = [f"pairs: {len(self.pairs)}"]
        for i, img in enumerate(self.sigma_u_images, start=1):
            lines.append(f"s {i}: " + " ".join(map(str, img)))
        for i, k in enumerate(self.psi, start=1):
            lines.append(f"p {i}: {k}")
        return "\n".join(lines) + "\n"


def build_sigma_U(
    sys: ProlongableSystem,
    u: list[str],
    K: int,
    K1: int | None = None,
    pair_budget: int = 4096,
    work_budget: int = 1 << 26,
):
    """Drive the set-case return construction for u (a prefix of y).

    Returns a DerivedDescriptor on success or a DriverExit.  Processing goes
    in index order: the image of each known pair is cut at occurrences of
    v = phi(u) inside phi(sigma(w u')), which discovers new pairs exactly in
    first-appearance order.  Exits follow the taxonomy on DriverExit; the
    closure window check requires every pair to appear within K+1+#A^2
    expansion rounds of the index substitution.
    """
    phi = sys.effective_phi
    if not phi.is_coding and sys.phi is not None:
        raise PrefixInvalid("driver needs phi to be a coding (normalize first)")
    ystream = FixedPointStream(sys, "y")
    alpha = sys.alphabet
    u_enc = alpha.encode(u)
    _check_prefix(ystream, u_enc, "u")
    v_enc = phi.apply(u_enc)
    m = len(v_enc)

    # E1: v must recur within the (K+1)|v| prefix of x
    window = (K + 1) * m
    xstream = FixedPointStream(sys, "x")
    occ = xstream.scan_occurrences(v_enc, window, max_count=2)
    if len(occ) < 2:
        return DriverExit(
            kind="E1",
            unconditional=True,
            message=f"prefix of length {m} does not recur in the first {window} letters",
            evidence={
                "u": list(u),
                "window": window,
                "occurrences": len(occ),
            },
        )
    p2 = occ[1]
    ytext = ystream.prefix_chars(p2 + m)
    pairs: list[tuple[str, str]] = [(ytext[:p2], ytext[p2 : p2 + m])]
    index_of = {pairs[0]: 1}
    images: list[tuple[int, ...]] = []
    sigma = sys.sigma
    work = 0

    j = 0
    while j < len(pairs):
        w, up = pairs[j]
        j += 1
        body = sigma.apply(w)
        tail = sigma.apply(up)
        T = body + tail
        work += len(T)
        if work > work_budget:
            raise BudgetExhausted(
                f"driver expanded more than {work_budget} letters",
                occurrences_found=len(pairs),
            )
        F = phi.apply(T)
        W = len(body)
        cuts_all = occurrences_in_word(F, v_enc)
        before = [o for o in cuts_all if o < W]
        closing = next((o for o in cuts_all if o >= W), None)
        if not before:
            uncond = W >= K * m
            return DriverExit(
                kind="empty-image",
                unconditional=uncond,
                message="an image block contains no occurrence of the target",
                evidence={
                    "pair_index": j,
                    "pair_w": list(alpha.decode(w)),
                    "pair_u": list(alpha.decode(up)),
                    "window": W,
                    "threshold": K * m,
                },
            )
        if closing is None:
            uncond = len(F) - W >= K * m
            return DriverExit(
                kind="no-occurrence",
                unconditional=uncond,
                message="no closing occurrence after an image block",
                evidence={
                    "pair_index": j,
                    "pair_w": list(alpha.decode(w)),
                    "pair_u": list(alpha.decode(up)),
                    "window": len(F) - W,
                    "threshold": K * m,
                },
            )
        if j == 1 and before[0] != 0:
            raise InternalConsistencyError("first pair image lost its anchor at 0")
        bounds = before + [closing]
        img: list[int] = []
        for a, b in zip(bounds, bounds[1:]):
            piece = (T[a:b], T[b : b + m])
            if len(piece[0]) > K * m:
                return DriverExit(
                    kind="E2",
                    unconditional=True,
                    message=f"return word of length {len(piece[0])} exceeds K|u| = {K * m}",
                    evidence={
                        "pair_index": j,
                        "word": list(alpha.decode(piece[0])),
                        "length": len(piece[0]),
                        "bound": K * m,
                    },
                )
            if len(piece[0]) * K < m:
                return DriverExit(
                    kind="short-return",
                    unconditional=False,
                    message=f"return word of length {len(piece[0])} is below |u|/K",
                    evidence={
                        "pair_index": j,
                        "word": list(alpha.decode(piece[0])),
                        "length": len(piece[0]),
                        "u_length": m,
                        "K": K,
                    },
                )
            idx = index_of.get(piece)
            if idx is None:
                if K1 is not None and len(pairs) >= K1:
                    return DriverExit(
                        kind="E3",
                        unconditional=False,
                        message=f"more than K1 = {K1} table entries",
                        evidence={"entries": len(pairs) + 1, "K1": K1},
                    )
                if len(pairs) >= pair_budget:
                    raise BudgetExhausted(
                        f"more than {pair_budget} pairs discovered",
                        occurrences_found=len(pairs),
                    )
                pairs.append(piece)
                idx = len(pairs)
                index_of[piece] = idx
            img.append(idx)
        images.append(tuple(img))

    if images[0][0] != 1:
        raise InternalConsistencyError("sigma_U(1) does not start with 1")

    # E4 / closure window: every pair must appear within K+1+#A^2 rounds
    rounds = K + 1 + len(alpha) ** 2
    support = {1}
    for _ in range(rounds):
        grown = set(support)
        for i in support:
            grown.update(images[i - 1])
        if grown == support:
            break
        support = grown
    if len(support) != len(pairs):
        missing = sorted(set(range(1, len(pairs) + 1)) - support)
        return DriverExit(
            kind="E4",
            unconditional=False,
            message="table entries appear only beyond the closure window",
            evidence={"missing_indices": missing, "rounds": rounds},
        )

    # x-side return words and psi, by first appearance of phi(w)
    x_words: list[str] = []
    x_index: dict[str, int] = {}
    psi: list[int] = []
    for w, _ in pairs:
        r = phi.apply(w)
        k = x_index.get(r)
        if k is None:
            x_words.append(r)
            k = len(x_words)
            x_index[r] = k
        psi.append(k)

    target = sys.target_alphabet
    return DerivedDescriptor(
        u=tuple(u),
        v=tuple(target.decode(v_enc)),
        pairs=tuple(
            (tuple(alpha.decode(w)), tuple(alpha.decode(up))) for w, up in pairs
        ),
        sigma_u_images=tuple(images),
        psi=tuple(psi),
        x_returns=tuple(tuple(target.decode(r)) for r in x_words),
    )


def delta_reconstruct(descriptor: DerivedDescriptor, n: int) -> list[str]:
    """Concatenate the first n return words of the derived expansion.

    The result is a prefix of y (empty for n = 0).
    """
    if n < 0:
        raise ValueError("steps must be >= 0")
    if n == 0:
        return []
    seq = _derived_prefix_from([list(img) for img in descriptor.sigma_u_images], n)
    if len(seq) < n:
        raise InternalConsistencyError("descriptor expansion stalled before n letters")
    out: list[str] = []
    for i in seq:
        out.extend(descriptor.pairs[i - 1][0])
    return out


def derived_step(sys: ProlongableSystem, u: list[str], budget: int = 1 << 16) -> list[str]:
    """Next nested prefix: the first return word of x to u, concatenated with u."""
    table = return_words_to_word(sys, u, budget=budget, which="x")
    return list(table.theta(1)) + list(u)
