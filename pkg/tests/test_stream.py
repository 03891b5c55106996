"""Lazy fixed-point expansion: prefixes, occurrence scans, gaps, complexity."""

import pytest

from morphrec.errors import NotEnoughOccurrences
from morphrec.stream import (
    FixedPointStream,
    MaxGapResult,
    complexity,
    factor_language,
    max_gap,
    occurrences,
    prefix,
)
from morphrec.system import parse_system
from morphrec.words import factor_set


# -- prefixes ----------------------------------------------------------------------


def test_prefix_fibonacci(fib):
    assert "".join(prefix(fib, 13)) == "abaababaabaab"


def test_prefix_thue_morse(tm):
    assert "".join(prefix(tm, 8)) == "01101001"


def test_prefix_zero_and_monotone(fib):
    assert prefix(fib, 0) == []
    p200 = prefix(fib, 200)
    for n in (1, 7, 50, 199):
        assert prefix(fib, n) == p200[:n]


def test_prefix_outer_vs_inner():
    sys_ = parse_system(
        "alphabet: a b\ntarget: 0 1\nstart: a\nsigma:\na -> a b\nb -> a\n"
        "phi:\na -> 0\nb -> 1\n"
    )
    y = prefix(sys_, 13, "y")
    x = prefix(sys_, 13, "x")
    code = {"a": "0", "b": "1"}
    assert [code[t] for t in y] == x


def test_sigma_of_prefix_is_prefix(fib, tm, trib):
    # sigma(y[:n]) is itself a prefix of y
    for sys_ in (fib, tm, trib):
        stream = FixedPointStream(sys_, "y")
        long = stream.prefix_chars(5000)
        for n in (1, 10, 100, 1000):
            img = sys_.sigma.apply(long[:n])
            assert long.startswith(img[: len(long)]) or img.startswith(long)


def test_stream_rejects_bad_which(fib):
    with pytest.raises(ValueError):
        FixedPointStream(fib, "z")


# -- occurrences and gaps ------------------------------------------------------------


def test_occurrences_fibonacci_aa(fib):
    assert occurrences(fib, ["a", "a"], 13) == [2, 7, 10]


def test_occurrences_thue_morse_zero(tm):
    assert occurrences(tm, ["0"], 8) == [0, 3, 5, 6]


def test_occurrences_overlapping():
    sys_ = parse_system("alphabet: a\nstart: a\nsigma:\na -> a a\n")
    assert occurrences(sys_, ["a", "a"], 5) == [0, 1, 2, 3]


def test_max_gap_thue_morse(tm):
    res = max_gap(tm, ["0"], 64)
    assert isinstance(res, MaxGapResult)
    assert res.gap == 3
    a, b = res.witness
    assert b - a == 3


def test_max_gap_grows_for_block_system(nonur):
    # 1-runs lengthen forever, so the gap between 0s keeps increasing
    g1 = max_gap(nonur, ["0"], 1 << 7).gap
    g2 = max_gap(nonur, ["0"], 1 << 11).gap
    g3 = max_gap(nonur, ["0"], 1 << 15).gap
    assert g1 < g2 < g3


def test_max_gap_signal_value(fib):
    res = max_gap(fib, ["a", "b", "a", "a", "b", "a", "b", "a"], 9)
    assert isinstance(res, NotEnoughOccurrences)
    assert res.count == 1


# -- complexity ----------------------------------------------------------------------


def test_complexity_zero(fib):
    res = complexity(fib, 0)
    assert res.count == 1 and res.exact


def test_complexity_fibonacci_two(fib):
    res = complexity(fib, 2)
    assert res.exact
    assert res.count == 3
    assert res.factors == {("a", "b"), ("b", "a"), ("a", "a")}


def test_complexity_thue_morse_two(tm):
    res = complexity(tm, 2)
    assert res.exact
    assert res.count == 4
    assert res.factors == {("0", "1"), ("1", "0"), ("1", "1"), ("0", "0")}


def test_complexity_sturmian_growth(fib):
    # Sturmian-like: p(n) = n + 1 for the Fibonacci word
    for n in range(1, 9):
        assert complexity(fib, n).count == n + 1


def test_complexity_outer_coded():
    sys_ = parse_system(
        "alphabet: a b\ntarget: z\nstart: a\nsigma:\na -> a b\nb -> a\n"
        "phi:\na -> z\nb -> z\n"
    )
    res = complexity(sys_, 3, "x")
    assert res.exact and res.count == 1


def test_complexity_inexact_fallback(nonur):
    # non-growing letter: exact enumeration unavailable, scan lower bound
    res = complexity(nonur, 2, prefix_length=4096)
    assert not res.exact
    assert res.count >= 3


def test_factor_language_matches_scan(fib, tm):
    for sys_, n in ((fib, 4), (tm, 5)):
        lang = factor_language(sys_, n, "y")
        scanned = factor_set(FixedPointStream(sys_, "y").prefix_chars(4096), n)
        assert scanned <= lang
        # every claimed factor eventually shows up in a longer scan
        big = factor_set(FixedPointStream(sys_, "y").prefix_chars(1 << 15), n)
        assert lang == big


def test_factor_language_windows(trib):
    # cross-check the image-window enumeration on a 3-letter system
    lang = factor_language(trib, 6, "y")
    big = factor_set(FixedPointStream(trib, "y").prefix_chars(1 << 15), 6)
    assert lang == big
