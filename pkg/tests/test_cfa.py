import json
import warnings

import pytest

from branecfa.cfa import (
    STRICT,
    CausalRecord,
    Estimate,
    MembraneCapExceeded,
    _check_term,
    contains,
    diff_estimates,
    r_blocks,
    solve,
    validate,
)
from branecfa.semantics import containments
from branecfa.syntax import canonicalize, parse, parse_action, rearrange, to_term
from conftest import CORPUS, estimate, exploration, golden, term

import random

PQ = "mate_n#a89c54fd5d"
R2 = "bud_o#f3d2e49066"
PH = "phago_p#b3c4c1de76"
PH_ENDO = "mate_m#7a2d7cc8f0"


@pytest.mark.parametrize("name", CORPUS)
def test_golden_entries_reproduced(name):
    expected, _ = golden(name)
    missing = contains(estimate(name), expected)
    assert missing.empty, missing.report()


@pytest.mark.parametrize("name", CORPUS)
def test_solution_validates(name):
    assert validate(estimate(name), term(name)) == []


def test_golden_symbols_resolve_to_registry_ids():
    _, table = golden("example1")
    assert table["muPQ"] == PQ and table["muR2"] == R2
    _, table = golden("viral")
    assert table["muPh"] == PH and table["muPhEndo"] == PH_ENDO


def test_zero_has_empty_estimate():
    est = solve(parse("zero"))
    assert not any(est.I.values()) and not est.C and not est.R


def test_empty_estimate_rejects_a_membrane():
    bad = validate(Estimate({}), parse("0<>@m1"))
    assert [v.clause for v in bad] == ["membrane"]
    assert "m1" in bad[0].detail


def test_r_blocks_examples():
    est = estimate("example1")
    assert r_blocks(est, ("*", "*", "muP"), ("*", "*", PQ))
    assert r_blocks(est, ("*", "*", PQ), ("*", "*", "muP"))
    assert not r_blocks(est, ("*", "*", "muP"), ("*", "*", "muP"))
    assert not r_blocks(est, ("*", "*", "muQ"), ("*", "*", "muP"))


def test_r_is_irreflexive_everywhere():
    for name in CORPUS:
        assert all(a != b for a, b in estimate(name).R)


def test_r_precision_no_mate_between_fused_and_consumed():
    est = estimate("example1")
    assert (("*", "*", "muQ"), ("*", "*", PQ)) in est.R
    for key in est.derived.values():
        assert {key.mu_p, key.mu_q} != {PQ, "muQ"}
        assert {key.mu_p, key.mu_q} != {PQ, "muP"}


def test_diff_of_self_is_empty():
    est = estimate("example2")
    assert diff_estimates(est, est).empty


def test_diff_reports_exactly_the_removed_entry():
    est = estimate("example1")
    slot = ("*", "*", "*")
    I = dict(est.I)
    I[slot] = est.get(slot) - {"muQ"}
    smaller = Estimate(I, est.C, est.R, est.multiple, est.derived)
    d = diff_estimates(est, smaller)
    assert d.left_only() == {"I": ["muQ in I(*,*,*)"], "C": [], "R": []}
    assert d.right_only() == {"I": [], "C": [], "R": []}
    assert not validate(smaller, term("example1")) == []


@pytest.mark.parametrize("name", CORPUS)
def test_subject_reduction(name):
    est = estimate(name)
    for S in exploration(name).states:
        assert validate(est, to_term(S)) == [], S.text


@pytest.mark.parametrize("name", CORPUS)
def test_soundness_containment(name):
    est = estimate(name)
    for S in exploration(name).states:
        for slot, x in containments(S):
            assert x in est.get(slot), (S.text, slot, x)


@pytest.mark.parametrize("name", CORPUS)
def test_congruence_invariance(name):
    est = estimate(name)
    rng = random.Random(7)
    for _ in range(25):
        assert validate(est, rearrange(term(name), rng)) == []


@pytest.mark.parametrize("name", CORPUS)
def test_solver_is_deterministic(name):
    assert solve(term(name)).dumps() == solve(term(name)).dumps()


@pytest.mark.parametrize("name", CORPUS)
def test_json_round_trip(name):
    est = estimate(name)
    back = Estimate.from_json(json.loads(est.dumps()))
    assert diff_estimates(est, back).empty
    assert back.multiple == est.multiple
    assert validate(back, term(name)) == []


def test_each_derived_id_has_one_record():
    for name in CORPUS:
        est = estimate(name)
        for mu in est.derived:
            assert len(est.causes(mu)) == 1


def test_viral_sound_mode_entries():
    est = estimate("viral")
    assert "muNucap" in est.get(("*", "*", "muMemb"))
    assert parse_action("coexo(e)") not in est.get(("*", "muMemb", PH))
    assert "muVirus" not in est.get(("*", "muMemb", "muEndo"))
    (rec,) = est.causes(PH_ENDO)
    assert rec.participants() == (PH, "muEndo")


def test_strict_mode_breaks_subject_reduction_on_viral():
    est = estimate("viral", STRICT)
    assert validate(est, term("viral"), STRICT) == []
    bad = [S for S in exploration("viral").states if validate(est, to_term(S), STRICT)]
    assert bad


def test_strict_and_sound_agree_without_phago_or_exo():
    for name in ("example1", "example2", "drip_drip"):
        assert diff_estimates(estimate(name), estimate(name, STRICT)).empty


def test_membrane_cap_on_fusing_replicas():
    with pytest.raises(MembraneCapExceeded) as info:
        solve(parse("!((mate(n) | comate(n) | drip(mate(s)))<>@muC)"), membrane_cap=64)
    assert info.value.cap == 64


def test_causal_records_are_unary_for_drip():
    est = estimate("drip_drip")
    recs = [r for mu in sorted(est.derived) for r in est.causes(mu)]
    assert sorted(str(r.action) for r in recs) == ["drip(mate(r))", "drip(mate(s))"]
    assert all(r.arity == 1 and r.mu_p == "muP" for r in recs)


def test_environmental_causality_capture():
    est = estimate("example1")
    (rec,) = est.causes(R2)
    assert rec.mu_q == PQ
    assert CausalRecord(parse_action("mate(n)"), "muP", parse_action("comate(n)"), "muQ", ("*", "*", "*")) in est.causes(PQ)


# monotone contexts: validity moves to a context whose whole subtree is at least as large

def _check(est, P, ctx):
    out = []
    _check_term(est, P, ctx, out)
    return out


def test_context_monotonicity_with_subtrees():
    P = parse("mate(a)<drip(mate(b))<>@n>@s")
    est = solve(parse("0<mate(a)<drip(mate(b))<>@n>@s>@m1 || 0<>@m2"))
    I = dict(est.I)
    for (gp, p, mu), items in est.I.items():
        if p == "m1":
            I[(gp, "m2", mu)] = I.get((gp, "m2", mu), frozenset()) | items
        if gp == "m1":
            I[("m2", p, mu)] = I.get(("m2", p, mu), frozenset()) | items
    I[("*", "*", "m2")] = I.get(("*", "*", "m2"), frozenset()) | est.get(("*", "*", "m1"))
    assert _check(est, P, ("*", "*", "m1")) == []
    assert _check(Estimate(I), P, ("*", "*", "m2")) == []


def test_context_monotonicity_literal_reading_fails():
    # including only the direct content does not carry the nested obligations
    P = parse("mate(a)<>@s")
    est = Estimate({("*", "*", "m1"): frozenset({"s"}), ("*", "m1", "s"): frozenset({parse_action("mate(a)")}),
                    ("*", "*", "m2"): frozenset({"s"})})
    assert _check(est, P, ("*", "*", "m1")) == []
    assert _check(est, P, ("*", "*", "m2")) != []


def test_canonical_forms_share_the_estimate():
    a = solve(parse("mate(n)<>@p || comate(n)<>@q")).dumps()
    b = solve(parse("comate(n)<>@q || (mate(n) | 0)<>@p || zero")).dumps()
    assert a == b
    assert canonicalize(parse("zero || zero")) == canonicalize(parse("zero"))
