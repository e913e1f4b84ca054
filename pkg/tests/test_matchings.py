import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairgraph.elements import BeamSplitter, OAMSorter, Projection, SPPReflection, apply_elements
from pairgraph.graph import add_crystal, adjacency_matrix, graph_with_paths
from pairgraph.matchings import (
    DetectionPattern,
    PatternError,
    PostSelectedState,
    detect_maverick,
    enumerate_matchings,
    equal_up_to_phase,
    matching_sum,
    occupation_factor,
    post_selected_state,
)
from pairgraph.matrix import hafnian_naive

S3 = 1 / math.sqrt(3)


def fig2():
    g = graph_with_paths("abcd")
    g = add_crystal(g, "a", "H", "b", "H", 1, "I")
    g = add_crystal(g, "c", "H", "d", "H", 1, "II")
    g = add_crystal(g, "a", "V", "c", "V", 1, "III")
    return add_crystal(g, "b", "V", "d", "V", 1, "IV")


def oam_source(g, p, q, tag):
    for lab in (0, -1, 1):
        g = add_crystal(g, p, lab, q, -lab, 1, tag)
    return g


def multiport3():
    g = oam_source(oam_source(graph_with_paths("abcd"), "a", "b", "ab"), "c", "d", "cd")
    ops = [SPPReflection("a"), OAMSorter("b", "c"), BeamSplitter("a", "b", True), Projection("a", (0, -1))]
    return apply_elements(g, ops)


def multiport4():
    g = graph_with_paths("abcdef")
    for p, q in ("ab", "cd", "ef"):
        g = oam_source(g, p, q, p + q)
    ops = [
        SPPReflection("a"),
        SPPReflection("f"),
        OAMSorter("b", "c"),
        OAMSorter("d", "e"),
        BeamSplitter("a", "b", True),
        BeamSplitter("e", "f", True),
        Projection("a", (0, -1)),
        Projection("f", (0, -1)),
    ]
    return apply_elements(g, ops)


def swapping():
    g = graph_with_paths("abcd")
    for p, q in ("ab", "cd"):
        g = add_crystal(g, p, "H", q, "V", 1, p + q)
        g = add_crystal(g, p, "V", q, "H", -1, p + q)
    return BeamSplitter("b", "c").apply(g)


def test_fig2_two_matchings():
    terms = enumerate_matchings(fig2(), "abcd")
    assert sorted(tuple(e.tag for e in t.edges) for t in terms) == [("I", "II"), ("III", "IV")]


def test_fig2_ghz_state():
    state = post_selected_state(fig2(), "abcd", normalize=True)
    s = 1 / math.sqrt(2)
    assert state.terms == pytest.approx({("H",) * 4: s, ("V",) * 4: s})


def test_odd_total_has_no_matchings():
    assert enumerate_matchings(fig2(), "abc") == []


def test_unknown_pattern_path():
    with pytest.raises(PatternError):
        enumerate_matchings(fig2(), "abz")


def test_negative_count_rejected():
    with pytest.raises(PatternError):
        DetectionPattern({"a": -1})


def test_empty_pattern_gives_empty_matching():
    (t,) = enumerate_matchings(fig2(), {})
    assert t.edges == () and t.weight == 1


def test_double_occupation_uses_distinct_edges():
    g = graph_with_paths("ab")
    g = add_crystal(g, "a", "H", "b", "H", 0.5)
    g = add_crystal(g, "a", "V", "b", "V", 0.25)
    (t,) = enumerate_matchings(g, {"a": 2, "b": 2})
    assert t.weight == pytest.approx(0.125)
    assert t.assignment == (("H", "V"), ("H", "V"))


def test_multiport3_counts_and_state():
    state = post_selected_state(multiport3(), "abcd")
    assert (state.n_matchings, state.n_cancelled) == (5, 2)
    h = state.heralded().normalize()
    assert h.paths == ("b", "c", "d")
    target = {(3, 1, 1): S3, (2, 0, 0): -S3, (-1, -1, -1): -S3}
    assert equal_up_to_phase(h.terms, target, 1e-9)


def test_multiport4_maverick():
    state = post_selected_state(multiport4(), "abcdef")
    assert (state.n_matchings, state.n_cancelled) == (8, 4)
    h = state.heralded().normalize()
    assert set(h.terms) == {(-1, -1, 1, 3), (-1, 0, 0, -1), (2, 0, 0, 2), (3, 1, -1, -1)}
    assert all(abs(a) == pytest.approx(0.5) for a in h.terms.values())
    rep = detect_maverick(h, 3, 4)
    assert not rep.is_ghz
    assert rep.surplus == ((-1, 0, 0, -1),)


def test_detect_maverick_on_ghz():
    rep = detect_maverick(post_selected_state(multiport3(), "abcd").heralded(), 3, 3)
    assert rep.is_ghz and rep.surplus == ()


def test_detect_maverick_bell_pair():
    s = PostSelectedState(("a", "b"), {(0, 0): 1, (1, 1): 1})
    rep = detect_maverick(s, 2, 2)
    assert rep.is_ghz and rep.surplus == ()


def test_detect_maverick_unequal_amplitudes():
    s = PostSelectedState(("a", "b"), {(0, 0): 1, (1, 1): 0.5})
    assert not detect_maverick(s, 2, 2).is_ghz


def test_entanglement_swapping():
    state = post_selected_state(swapping(), "abcd")
    assert (state.n_matchings, state.n_cancelled) == (8, 4)
    cond = state.conditional(["b", "c"])
    assert set(cond) == {("H", "V"), ("V", "H")}
    psi_minus = {("H", "V"): 1, ("V", "H"): -1}
    for sub in cond.values():
        assert sub.paths == ("a", "d")
        assert equal_up_to_phase(sub.terms, psi_minus, 1e-9)


def test_drop_paths_merges_terms():
    s = PostSelectedState(("a", "b"), {("T", 0): 0.5, ("T", 1): 0.5})
    assert s.trigger_paths() == ["a"]
    assert s.heralded().terms == {(0,): 0.5, (1,): 0.5}


def test_equal_up_to_phase():
    t = {(0,): 1, (1,): 1j}
    assert equal_up_to_phase({(0,): 1j, (1,): -1}, t)
    assert not equal_up_to_phase({(0,): 1, (1,): -1j}, t)
    assert equal_up_to_phase({}, {})


def test_occupation_factor():
    assert occupation_factor(("H", ("H", "H"))) == 2
    assert occupation_factor((("H", "V"),)) == 1
    assert occupation_factor(((0, 0, 0),)) == 6


def random_graph(rng, n_paths=6, n_edges=9):
    paths = "abcdef"[:n_paths]
    g = graph_with_paths(paths)
    for p, q in rng.sample(list(itertools.combinations(paths, 2)), n_edges):
        g = add_crystal(g, p, "H", q, "H", cmath.rect(rng.uniform(0.1, 1), rng.uniform(-3, 3)))
    return g


def test_matching_sum_equals_hafnian():
    import random

    rng = random.Random(7)
    for _ in range(20):
        g = random_graph(rng)
        assert matching_sum(g, "abcdef") == pytest.approx(hafnian_naive(adjacency_matrix(g)), rel=1e-12)


@given(st.integers(1, 4))
def test_complete_graph_matching_count(k):
    n = 2 * k
    paths = [f"p{i}" for i in range(n)]
    g = graph_with_paths(paths)
    for p, q in itertools.combinations(paths, 2):
        g = add_crystal(g, p, 0, q, 0, 1)
    assert len(enumerate_matchings(g, paths)) == math.prod(range(1, n, 2))


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=8))
def test_each_matching_listed_once(pairs):
    paths = "abcd"
    g = graph_with_paths(paths)
    for i, j in pairs:
        g = add_crystal(g, paths[i], "H", paths[j], "H", 1)
    seen = [tuple(sorted(id(e) for e in t.edges)) for t in enumerate_matchings(g, paths)]
    assert len(seen) == len(set(seen))
    for t in enumerate_matchings(g, paths):
        ends = sorted(x.path for e in t.edges for x in e.endpoints())
        assert ends == list(paths)


def test_state_is_sum_over_matchings():
    g = swapping()
    terms = enumerate_matchings(g, "abcd")
    state = post_selected_state(g, "abcd")
    for key, amp in state.raw.items():
        assert amp == pytest.approx(sum(t.weight for t in terms if t.labels() == key), abs=1e-15)
    np.testing.assert_allclose(sum(state.raw.values()), matching_sum(g, "abcd"), atol=1e-15)
