import itertools
from collections import Counter
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from bikoszul.classify import (
    CLASSES,
    ClassUndefined,
    admissible_components,
    classify,
    component_class,
    delta_d,
    delta_pair,
    enumerate_arities,
    format_rows,
    is_reduced,
    is_truncated,
    pkoszul_degree,
    row_consistent,
    symbolic_solutions,
    truncated_table,
)
from bikoszul.synthetic import bikoszul_instance, bridge_instance, truncated_instance

table_for = lru_cache(None)(admissible_components)

GROUP = {"E0": "0", "E1": "1", "E2d": "2", "E2d1": "2"}


def orderings(ins):
    """Distinct orderings built by choosing positions for each class."""
    n = len(ins)
    res = [[None] * n]
    for c, k in Counter(ins).items():
        new = []
        for r in res:
            free = [i for i in range(n) if r[i] is None]
            for pos in itertools.combinations(free, k):
                rr = list(r)
                for i in pos:
                    rr[i] = c
                new.append(rr)
        res = new
    return {tuple(r) for r in res}


def reference_table(d):
    """Admissible rows as (input classes, target group), closed under reordering."""
    two = ["E2d", "E2d1"]
    raw = {
        2: [(("E0", "E0"), "0"), (("E0", "E1"), "1"), (("E2d", "E2d1"), "1")]
        + [(("E0", x), "2") for x in two],
        3: [(("E0", "E2d", "E2d"), "0"), (("E1", "E2d", "E2d"), "1"), (("E0", "E1", "E2d"), "2")]
        + [((x, "E2d", "E2d"), "2") for x in two],
        4: [(("E2d",) * 4, "0"), (("E1", "E2d", "E2d", "E2d"), "2")],
        d: [(("E1",) * (d - 1) + ("E2d1",), "0"), (("E1",) * d, "2")],
        d + 1: [(("E1",) * d + ("E2d",), "0"), (("E1",) * (d + 1), "2")],
    }
    return {l: {(p, t) for ins, t in rows for p in orderings(ins)} for l, rows in raw.items()}


# --- degree rules ------------------------------------------------------------


def test_delta_pair_frozen():
    assert [delta_pair(4, n) for n in range(7)] == [
        (0, 0), (1, 1), (4, 5), (8, 8), (9, 9), (12, 13), (16, 16)
    ]
    assert delta_d(4, 2) == {4, 5} and delta_d(4, 3) == {8}


def test_pkoszul_degree_frozen():
    assert [pkoszul_degree(3, n) for n in range(6)] == [0, 1, 3, 4, 6, 7]
    assert [pkoszul_degree(4, n) for n in range(6)] == [0, 1, 4, 5, 8, 9]


def test_delta_pair_rejects_bad_input():
    with pytest.raises(ValueError):
        delta_pair(1, 0)


def test_component_class():
    assert component_class(0, 0, 5) == "E0"
    assert component_class(4, 11, 5) == "E1"
    assert component_class(5, 15, 5) == "E2d"
    assert component_class(5, 16, 5) == "E2d1"
    with pytest.raises(ClassUndefined):
        component_class(2, 7, 5)


# --- classification verdicts -------------------------------------------------


def test_classify_koszul():
    c = classify({p: {p: p + 1} for p in range(6)}, 5)
    assert c.verdict == "koszul" and c.describe() == "Koszul up to degree 5"


def test_classify_free_terminates():
    c = classify({0: {0: 1}, 1: {1: 2}})
    assert c.describe() == "Koszul (resolution terminates at p=1)"


def test_classify_pkoszul():
    obs = {n: {pkoszul_degree(3, n): 1} for n in range(7)}
    c = classify(obs, 10)
    assert (c.verdict, c.param) == ("p-koszul", 3)
    assert c.lines()[0] == "verdict: 3-Koszul up to degree 10"


def test_classify_bikoszul():
    obs = {n: {q: 1 for q in delta_d(5, n)} for n in range(7)}
    c = classify(obs, 30)
    assert (c.verdict, c.param) == ("bi-koszul", 5)


def test_classify_pkoszul_also_bikoszul_when_short():
    # x^4: E^2 in degree 4 fits the 4-Koszul rule first.
    obs = {0: {0: 1}, 1: {1: 1}, 2: {4: 1}}
    c = classify(obs, 4)
    assert c.verdict == "p-koszul" and "bi-Koszul(d=4)" in c.consistent


def test_classify_other_with_witness():
    obs = {0: {0: 1}, 1: {1: 2}, 2: {2: 1, 3: 1}, 3: {4: 2}, 4: {5: 1, 6: 1}}
    c = classify(obs, 6)
    assert c.verdict == "other"
    assert c.witness == (4, 6)


# --- arity enumeration -------------------------------------------------------


@pytest.mark.parametrize("d", range(2, 13))
def test_enumerate_arity_sets(d):
    arities, _ = enumerate_arities(d)
    if d <= 3:
        assert arities == [2, 3, 4]
    elif d == 4:
        assert arities == [2, 3, 4, 5]
    else:
        assert arities == [2, 3, 4, d, d + 1]


SOURCE_S1 = [("0", "0", "2"), ("1", "1", "d"), ("1", "1", "d+1"), ("1", "2", "3"), ("2", "4", "4")]
SOURCE_S2 = [("0", "0", "2"), ("1", "2", "2"), ("1", "2", "3")]
SOURCE_S3 = [
    ("0", "1", "2"), ("1", "3", "3"), ("0", "0", "d"),
    ("0", "1", "2"), ("0", "1", "3"), ("0", "0", "d+1"), ("1", "3", "3"), ("1", "3", "4"),
]


def test_symbolic_lists():
    sols = symbolic_solutions()
    assert sols["S1"] == SOURCE_S1
    assert sols["S2"] == SOURCE_S2
    assert Counter(sols["S3"]["d"]) == Counter(SOURCE_S3[:3])
    assert Counter(sols["S3"]["d+1"]) == Counter(SOURCE_S3[3:])


def test_symbolic_stable_on_other_ranges():
    assert symbolic_solutions(6, 9) == symbolic_solutions(5, 12)


# --- admissibility tables ----------------------------------------------------


@pytest.mark.parametrize("d", range(5, 13))
def test_admissible_table_matches_reference(d):
    table = admissible_components(d)
    ref = reference_table(d)
    assert sorted(table) == sorted(ref)
    for l in ref:
        assert {(ins, GROUP[t]) for ins, t in table[l]} == ref[l]


@pytest.mark.parametrize("d", range(2, 13))
def test_every_row_bidegree_consistent(d):
    for rows in admissible_components(d).values():
        for row in rows:
            assert row_consistent(row, d)


@settings(max_examples=200, deadline=None)
@given(st.integers(5, 12), st.data())
def test_rows_consistent_for_random_offsets(d, data):
    table = table_for(d)
    l = data.draw(st.sampled_from(sorted(table)))
    row = data.draw(st.sampled_from(table[l]))
    ks = data.draw(st.lists(st.integers(0, 5), min_size=l, max_size=l))
    assert row_consistent(row, d, ks)


@settings(max_examples=200, deadline=None)
@given(st.integers(5, 9), st.data())
def test_consistent_tuples_are_in_table(d, data):
    # Closure: any class tuple whose arithmetic lands in a class appears in the table.
    arities, _ = enumerate_arities(d)
    l = data.draw(st.sampled_from([a for a in arities if a <= 6]))
    ins = tuple(data.draw(st.lists(st.sampled_from(CLASSES), min_size=l, max_size=l)))
    table = set(table_for(d)[l])
    for tgt in CLASSES:
        if row_consistent((ins, tgt), d, [0] * l):
            assert (ins, tgt) in table


@pytest.mark.parametrize("d", [3, 4, 5, 8])
def test_truncated_table_inside_admissible(d):
    trunc = truncated_table(d)
    full = admissible_components(d, sorted(trunc))
    for l, rows in trunc.items():
        assert set(rows) <= set(full[l])


def test_truncated_table_sizes_d4():
    t = truncated_table(4)
    assert {l: len(r) for l, r in t.items()} == {2: 9, 4: 5, 5: 6}


def test_format_rows_shape():
    lines = format_rows(truncated_table(3))
    assert lines[0] == "row 2 : E0 E0 -> E0"
    assert all(line.startswith("row ") and " -> " in line for line in lines)


# --- structure checks --------------------------------------------------------


def test_truncated_instance_checks():
    s, _ = truncated_instance(4)
    assert is_truncated(s, 4).ok
    assert is_reduced(s, 4).ok


def test_bikoszul_instance_reduced_not_truncated():
    s, _ = bikoszul_instance()
    assert is_reduced(s, 5).ok
    assert not is_truncated(s, 5).ok


def test_bridge_is_reduced_and_truncated():
    s = bridge_instance(4)
    assert is_reduced(s, 4).ok and is_truncated(s, 4).ok
