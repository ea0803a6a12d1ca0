import random

import pytest
from hypothesis import given, settings, strategies as st

from bikoszul.ainfty import check_MI_suite, check_SI_suite, pushforward
from bikoszul.bar import build_dual_bar, merkulov_transfer
from bikoszul.classify import is_truncated
from bikoszul.generation import (
    DecompositionError,
    GenerationSpec,
    GlueRejected,
    check_associative_spans,
    check_e1_generation_criteria,
    check_finite_generation,
    check_generated_by_E1,
    check_higher_determined,
    check_md1_containment,
    check_w_containment,
    check_strict_iso_criterion,
    check_strong_criterion,
    check_thm36,
    compute_UVW,
    decompose_truncated,
    glue_decomposition,
    glue_singles,
    transport_generation,
)
from bikoszul.presentation import parse_presentation
from bikoszul.synthetic import (
    bikoszul_instance,
    bridge_instance,
    perturbed_md1,
    strong_failure_variant,
    truncated_instance,
    uncovered_variant,
)

BIK, BIK_T = bikoszul_instance()
UNCOVERED, _ = uncovered_variant()
WEAK, _ = strong_failure_variant()
TRUNC4, TRUNC4_T = truncated_instance(4)


def transferred(text):
    return merkulov_transfer(build_dual_bar(parse_presentation(text)))


# --- finite generation -------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 4])
def test_pkoszul_family_generated_by_degree_one(d):
    s = transferred(f"field GF 2\ngens x\nrel x^{d}\nmaxdeg {3 * d}\n")
    arities = [2] if d == 2 else [2, d]
    r = check_finite_generation(s, GenerationSpec(arities, 1))
    assert r.status == "pass"
    assert all(row.verdict == "pass" for row in r.rows)


def test_cubic_not_generated_by_products_alone():
    s = transferred("field GF 2\ngens x\nrel x^3\nmaxdeg 9\n")
    r = check_finite_generation(s, GenerationSpec([2], 1))
    first = r.first_failure()
    assert r.status == "FAIL" and (first.p, first.q) == (2, 3)


def test_bounded_reading_stops_at_first_uncovered_degree():
    s = transferred("field GF 2\ngens x\nrel x^3\nmaxdeg 9\n")
    r = check_finite_generation(s, GenerationSpec([2, 3], 1, bounded=True))
    assert r.first_failure().line() == "gen p=3 q=4 : fail dim_expected=1 dim_spanned=0"
    assert r.notes[0] == "factors bounded by l"
    r = check_finite_generation(s, GenerationSpec([2, 3], 2, bounded=True))
    assert r.first_failure().line() == "gen p=5 q=7 : fail dim_expected=1 dim_spanned=0"


def test_generation_spec_validation():
    with pytest.raises(ValueError):
        GenerationSpec([1], 1)
    with pytest.raises(ValueError):
        GenerationSpec([2], 0)


def test_bikoszul_instance_not_generated_by_degree_one():
    r = check_generated_by_E1(BIK, 8)
    assert r.first_failure().line() == "gen p=3 q=10 : fail dim_expected=1 dim_spanned=0"


# --- the m_2/m_3 generation theorem instance --------------------------------


def test_m2_m3_generation_instance_passes_through_p8():
    r = check_thm36(BIK, 5, 8)
    assert r.status == "pass"
    assert max(row.p for row in r.rows) == 8
    assert all(row.verdict == "pass" for row in r.rows)


def test_strong_criterion_instance_passes():
    r = check_strong_criterion(BIK, 5, 2)
    assert r.status == "pass" and len(r.rows) == 4


def test_containment_checks_pass():
    for r in (
        check_md1_containment(BIK, 5, 2),
        check_w_containment(BIK, 5, 2),
        check_associative_spans(BIK, 5, 8),
        check_higher_determined(BIK, 5, 8),
    ):
        assert r.status == "pass", r.name


def test_uncovered_variant_located():
    r = check_thm36(UNCOVERED, 5, 8)
    assert r.status == "FAIL"
    first = r.first_failure()
    assert (first.p, first.q, first.a, first.b) == (5, 16, 2, 1)
    assert any("inconsistency" in n for n in r.notes)
    assert check_strong_criterion(UNCOVERED, 5, 2).status == "pass"


def test_strong_failure_variant_located():
    assert check_thm36(WEAK, 5, 8).status == "pass"
    r = check_strong_criterion(WEAK, 5, 2)
    bad = [(row.p, row.q) for row in r.rows if row.verdict == "fail"]
    assert bad == [(5, 16), (8, 26)]


def test_uvw_dimensions():
    U, V, W = compute_UVW(BIK, 5, 1)
    assert (U.dim(BIK.field), V.dim(BIK.field), W.dim(BIK.field)) == (1, 0, 0)


def test_strong_criterion_unknown_beyond_truncation():
    r = check_strong_criterion(BIK, 5, 4)
    assert [row.verdict for row in r.rows] == ["pass"] * 4 + ["unknown"] * 4
    assert r.status == "pass"
    assert "strongly bi-Koszul by the containment criterion, up to k=2" in r.notes


def test_m2_m3_generation_on_truncated_input():
    r = check_thm36(TRUNC4, 4, 6)
    assert r.lines()[0] == "m_2/m_3 generation by E^1..E^3 (d=4, p<=6): pass"
    assert "  gen p=4 q=9 : pass dim_expected=1 dim_spanned=1 [E^4 = m_2(E^(3k1) E^(3k2+1)), k1>=1]" in r.lines()


# --- truncated surgery -------------------------------------------------------


def test_truncated_instance_is_truncated():
    assert is_truncated(TRUNC4, 4).ok
    assert all(r.ok for r in check_SI_suite(TRUNC4))


def test_decompose_then_glue_round_trip():
    dec = decompose_truncated(TRUNC4, 4)
    assert dec.ok and dec.discarded == {}
    assert dec.F.arities() == [2, 4] and dec.G.arities() == [2, 5]
    assert all(r.ok for r in check_SI_suite(dec.F))
    assert all(r.ok for r in check_SI_suite(dec.G))
    glued, _ = glue_decomposition(TRUNC4, dec, 4)
    assert glued == TRUNC4


def test_glue_singles_round_trip():
    e = TRUNC4.with_maps({2: TRUNC4.m(2)})
    glued, reports = glue_singles(e, TRUNC4.m(4), TRUNC4.m(5), 4)
    assert glued == TRUNC4 and all(r.status != "FAIL" for r in reports)


def test_perturbed_md1_rejected_with_witness():
    e = TRUNC4.with_maps({2: TRUNC4.m(2)})
    with pytest.raises(GlueRejected) as ei:
        glue_singles(e, TRUNC4.m(4), perturbed_md1(), 4)
    label, t, res = ei.value.witness
    x = TRUNC4_T.get("x", 0)
    assert label == "SI(8)" and t == (x,) * 8
    assert res == {TRUNC4_T.get("c", 1): 1}


def test_bridge_round_trip_discards_bridging_components():
    s = bridge_instance(4)
    dec = decompose_truncated(s, 4)
    assert dec.discarded
    glued, _ = glue_decomposition(s, dec, 4)
    assert glued != s


def test_unpaired_bridge_rejected():
    s = bridge_instance(4, drop_partner=True)
    e = s.with_maps({2: s.m(2)})
    with pytest.raises(GlueRejected) as ei:
        glue_singles(e, s.m(4), s.m(5), 4)
    assert ei.value.witness[0] == "SI(8)"


def test_decompose_rejects_non_truncated():
    with pytest.raises(DecompositionError):
        decompose_truncated(BIK, 5)


def test_e1_criteria_on_bridge_and_non_truncated():
    assert check_e1_generation_criteria(bridge_instance(4), 4).status == "pass"
    r = check_e1_generation_criteria(BIK, 5, 8)
    assert r.status == "FAIL" and "not truncated" in r.notes[0]


@pytest.mark.parametrize("d", [3, 4, 5])
def test_truncated_implies_strong(d):
    s, _ = truncated_instance(d, 6 * d)
    r = check_strong_criterion(s, d, 2)
    assert r.status == "pass"
    assert [(row.p, row.q) for row in r.rows] == [(5, 2 * d + d + 1)] * 2 + [(8, 4 * d + d + 1)] * 2
    assert all(row.verdict == "pass" for row in r.rows)


# --- transport along morphisms -----------------------------------------------


def _identity(s):
    return {(i,): {i: 1} for i in range(s.dim)}


def _push(spec):
    T = TRUNC4_T
    f2 = {(T.get(*u), T.get(*v)): {T.get(*w): 1} for (u, v), w in spec.items()}
    tgt, f = pushforward(TRUNC4, TRUNC4.degrees, {1: _identity(TRUNC4), 2: f2})
    assert all(r.ok for r in check_SI_suite(tgt)) and all(r.ok for r in check_MI_suite(f))
    return f


def test_transport_witness_on_higher_commutation():
    f = _push({(("x", 0), ("a", 0)): ("b", 0)})
    r = transport_generation(f, 4)
    assert r.status == "FAIL"
    names = TRUNC4.names
    assert "  witness f_2(m_4 (x) 1) = f_2(1 (x) m_4) at (x x x x x) residual 1*b" in r.lines(names)
    rep, _ = check_strict_iso_criterion(f, 4)
    assert "  witness alternating sum for m'_2 at (x a c) residual 1*bc" in rep.lines(names)


def test_transport_witness_on_product_commutation():
    f = _push({(("x", 1), ("a", 0)): ("b", 1)})
    r = transport_generation(f, 4)
    assert "  witness f_2(m_2 (x) 1) = f_2(1 (x) m_2) at (x c a) residual 1*bc" in r.lines(TRUNC4.names)


def test_transport_along_linear_morphism_passes():
    s = transferred("field GF 101\ngens x\nrel x^3\nmaxdeg 9\n")
    rng = random.Random(5)
    f1 = {(i,): {i: (1 if i == 0 else rng.randrange(1, 101))} for i in range(s.dim)}
    tgt, f = pushforward(s, s.degrees, {1: f1})
    assert transport_generation(f).status == "pass"
    rep, g = check_strict_iso_criterion(f)
    assert rep.status == "pass"
    assert all(r.ok for r in check_MI_suite(g))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_transport_scaling_keeps_generation(seed):
    s = transferred("field GF 101\ngens x\nrel x^3\nmaxdeg 9\n")
    rng = random.Random(seed)
    f1 = {(i,): {i: (1 if i == 0 else rng.randrange(1, 101))} for i in range(s.dim)}
    tgt, f = pushforward(s, s.degrees, {1: f1})
    assert check_finite_generation(tgt, GenerationSpec([2, 3], 1)).status == "pass"
    assert transport_generation(f).status == "pass"
