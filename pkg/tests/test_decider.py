"""End-to-end decision pipeline: verdicts, certificates, verification, and the
inspection helpers around them."""

import json

import pytest

from morphrec.catalog import get
from morphrec.decider import (
    INCONCLUSIVE,
    NOT_UNIFORMLY_RECURRENT,
    UNIFORMLY_RECURRENT,
    Certificate,
    Verdict,
    decide_uniform_recurrence,
    derive_chain,
    periodic_checklist,
    prepare,
    verify_certificate,
)
from morphrec.errors import MorphrecError, PreconditionViolated
from morphrec.system import parse_system


def load(name):
    return parse_system(get(name).text)


# -- verdicts on the named corpus ------------------------------------------------------


@pytest.mark.parametrize(
    "name,outcome,kind",
    [
        ("fibonacci", UNIFORMLY_RECURRENT, "repetition"),
        ("thue_morse", UNIFORMLY_RECURRENT, "repetition"),
        ("rudin_shapiro_coded", UNIFORMLY_RECURRENT, "repetition"),
        ("nonur_block", NOT_UNIFORMLY_RECURRENT, "periodic_mismatch"),
        ("tail_fin", NOT_UNIFORMLY_RECURRENT, "exit"),
        ("tail_fin_const", UNIFORMLY_RECURRENT, "periodic"),
        ("cycle_tail_const", UNIFORMLY_RECURRENT, "periodic"),
        ("periodic_coded", UNIFORMLY_RECURRENT, "periodic"),
        ("nonprim_growing", NOT_UNIFORMLY_RECURRENT, "exit"),
        ("blown_fib", UNIFORMLY_RECURRENT, "repetition"),
        ("unreachable_extra", UNIFORMLY_RECURRENT, "repetition"),
    ],
)
def test_catalog_verdicts(name, outcome, kind):
    sys_ = load(name)
    v = decide_uniform_recurrence(sys_)
    assert v.outcome == outcome
    assert v.certificate.kind == kind
    ok, detail = verify_certificate(sys_, v)
    assert ok, detail


def test_erasing_sigma_is_rejected():
    with pytest.raises(MorphrecError):
        decide_uniform_recurrence(load("erasing_sigma"))


def test_fibonacci_repetition_certificate_fields():
    v = decide_uniform_recurrence(load("fibonacci"))
    d = v.certificate.to_json_dict()
    assert d["kind"] == "repetition"
    assert d["n"] == 1 and d["m"] == 2
    assert d["table_size"] == 2 and d["pair_count"] == 2
    assert d["tau"] == [[1, 2], [1]]
    assert d["positivity_power"] == 2
    assert d["canonical"].startswith("pairs: 2\n")


def test_letter_finiteness_exit_shape():
    v = decide_uniform_recurrence(load("tail_fin"))
    d = v.certificate.to_json_dict()
    assert d["exit"] == "letter"
    assert d["unconditional"] is True
    assert d["level"] == 0
    assert d["letter"] == "a"


def test_nonur_pumping_witness_shape():
    v = decide_uniform_recurrence(load("nonur_block"))
    d = v.certificate.to_json_dict()
    assert d["failing_condition"] == 1
    assert d["pumping"]["letter"] == "0"
    assert d["checklist"]["condition1"]["holds"] is False
    assert d["checklist"]["condition1"]["witness"] == ["0", "0"]


def test_periodic_certificate_sources():
    v1 = decide_uniform_recurrence(load("tail_fin_const"))
    assert v1.certificate.data["source"] == "nongrowing"
    assert v1.certificate.data["word"] == ["z"]
    assert v1.certificate.data["period"] == 1
    v2 = decide_uniform_recurrence(load("periodic_coded"))
    assert v2.certificate.data["source"] == "guarded-exit-resolution"


def test_preimage_shortcut_marks_certificate():
    v = decide_uniform_recurrence(load("blown_fib"))
    assert v.certificate.data.get("via") == "preimage"
    ok, _ = verify_certificate(load("blown_fib"), v)
    assert ok


def test_verdict_json_shape_and_determinism():
    for name in ("fibonacci", "nonur_block", "tail_fin_const"):
        sys_ = load(name)
        a = decide_uniform_recurrence(sys_).to_json_dict()
        b = decide_uniform_recurrence(sys_).to_json_dict()
        assert a == b
        assert set(a.keys()) == {"verdict", "certificate", "constants", "trace"}
        # verdict payloads serialize cleanly and round-trip
        blob = json.dumps(a, sort_keys=True)
        assert json.loads(blob) == a


def test_inconclusive_on_tiny_pair_budget():
    v = decide_uniform_recurrence(load("tribonacci"), pair_budget=2)
    assert v.outcome == INCONCLUSIVE
    assert v.certificate is None
    assert any(step.get("step") == "budget" for step in v.trace)
    ok, detail = verify_certificate(load("tribonacci"), v)
    assert not ok
    assert "certificate" in detail["reason"]


def test_small_practical_cap_still_finds_fibonacci():
    v = decide_uniform_recurrence(load("fibonacci"), practical_cap=2)
    assert v.outcome == UNIFORMLY_RECURRENT
    assert (v.certificate.data["n"], v.certificate.data["m"]) == (1, 2)


def test_practical_cap_validation():
    with pytest.raises(ValueError):
        decide_uniform_recurrence(load("fibonacci"), practical_cap=1)


# -- certificate verification rejects tampering ----------------------------------------


def _tampered(verdict, **changes):
    cert = verdict.certificate
    return Verdict(
        verdict.outcome,
        Certificate(changes.pop("kind", cert.kind), {**cert.data, **changes}),
        verdict.sheet,
        verdict.trace,
    )


def test_verify_accepts_alternative_valid_levels():
    # in a period-1 chain every (n, n+1) pair is an honest certificate
    sys_ = load("fibonacci")
    v = decide_uniform_recurrence(sys_)
    ok, _ = verify_certificate(sys_, _tampered(v, n=2, m=3))
    assert ok


def test_verify_rejects_tampered_repetition():
    sys_ = load("fibonacci")
    v = decide_uniform_recurrence(sys_)
    for bad in (
        _tampered(v, tau=[[2, 1], [1]]),
        _tampered(v, pair_count=99),
        _tampered(v, table_size=9),
        _tampered(v, canonical="pairs: 2\nforged"),
    ):
        ok, detail = verify_certificate(sys_, bad)
        assert not ok, detail


def test_verify_rejects_tampered_periodic():
    sys_ = load("tail_fin_const")
    v = decide_uniform_recurrence(sys_)
    for bad in (
        _tampered(v, word=["b"]),
        _tampered(v, period=3),
    ):
        ok, detail = verify_certificate(sys_, bad)
        assert not ok, detail


def test_verify_rejects_swapped_outcome():
    sys_ = load("fibonacci")
    v = decide_uniform_recurrence(sys_)
    flipped = Verdict(NOT_UNIFORMLY_RECURRENT, v.certificate, v.sheet, v.trace)
    ok, _ = verify_certificate(sys_, flipped)
    assert not ok


def test_verify_rejects_certificate_for_wrong_system():
    v = decide_uniform_recurrence(load("fibonacci"))
    ok, _ = verify_certificate(load("thue_morse"), v)
    assert not ok


# -- the periodicity checklist ---------------------------------------------------------


def test_checklist_anchored_for_eventually_periodic():
    cl = periodic_checklist(load("tail_fin_const"), ["b"])
    assert cl["periodic"] is True
    assert cl["anchored"] is True
    assert cl["period"] == 1
    assert cl["condition1"]["holds"] and cl["condition2"]["holds"] and cl["condition3"]["holds"]


def test_checklist_fails_on_nonrecurrent_block():
    cl = periodic_checklist(load("nonur_block"), ["1"])
    assert cl["periodic"] is False
    assert cl["condition1"]["holds"] is False
    assert cl["condition1"]["witness"] == ["0", "0"]
    assert cl["condition2"]["skipped"] == "condition1 failed"


# -- staging and the u-chain helper ----------------------------------------------------


def test_prepare_restricts_and_normalizes():
    st = prepare(load("unreachable_extra"))
    assert st.r_sigma >= 1
    # unreachable letters are gone from the staged system
    v = decide_uniform_recurrence(load("unreachable_extra"))
    assert v.outcome == UNIFORMLY_RECURRENT


def test_derive_chain_fibonacci_two_levels():
    dc = derive_chain(load("fibonacci"), 2)
    assert sorted(dc.levels.keys()) == [1, 2]
    assert "".join(dc.levels[1].u) == "a"
    assert "".join(dc.levels[2].u) == "aba"
    assert len(dc.levels[1].pairs) == 2
    assert dc.driver_exit is None


def test_derive_chain_reports_driver_exit():
    dc = derive_chain(load("nonprim_growing"), 3)
    assert dc.levels == {}
    assert dc.driver_exit is not None
    level, exit_ = dc.driver_exit
    assert level == 1
    assert exit_.kind == "E1"
    assert exit_.unconditional


def test_derive_chain_validates_input():
    with pytest.raises(PreconditionViolated):
        derive_chain(load("fibonacci"), 0)
    with pytest.raises(PreconditionViolated):
        derive_chain(load("tail_fin_const"), 1)  # resolves in the non-growing branch
