from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import folner_line_good_count
from soficlab.actions import (
    AlmostAction,
    build_labeled_graph,
    complete_partial,
    finite_core,
    good_set,
    repair_connected,
    restrict_action,
    sigma_elem,
    sigma_of,
)
from soficlab.generators import folner_approximation, quotient_approximation, random_permutation_approximation
from soficlab.groups import FreeAbelian, FreeGroup, SymmetricGroup, ball_elements, cayley_ball
from soficlab.actions import regular_action


def cycle_action(n):
    return AlmostAction(FreeAbelian(1), {"a": [(i + 1) % n for i in range(n)]})


def test_rejects_non_permutation():
    with pytest.raises(ValueError):
        AlmostAction(FreeAbelian(1), {"a": [0, 0, 1]})
    with pytest.raises(ValueError):
        AlmostAction(FreeAbelian(2), {"a": [0, 1]})


def test_sigma_of_examples():
    act = cycle_action(5)
    assert np.array_equal(sigma_of(act, ""), np.arange(5))
    assert np.array_equal(sigma_of(act, "a^3"), (np.arange(5) + 3) % 5)


def test_sigma_of_first_letter_first():
    m = FreeGroup(2)
    act = AlmostAction(m, {"a": [1, 0, 2], "b": [0, 2, 1]})
    a, b = act.perms["a"], act.perms["b"]
    assert np.array_equal(sigma_of(act, "a b"), b[a])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.tuples(st.sampled_from("ab"), st.sampled_from([1, -1])), max_size=10))
def test_sigma_of_free_reduction(seed, letters):
    from soficlab.groups import Word
    act = random_permutation_approximation(2, 9, seed)
    w = Word(tuple(letters))
    assert np.array_equal(sigma_of(act, w), sigma_of(act, w.reduced()))


def test_sigma_elem_quotient_shift():
    act = quotient_approximation(FreeAbelian(1), [7]).stages[0]
    for k in range(-9, 10):
        assert np.array_equal(sigma_elem(act, (k,)), (np.arange(7) + k) % 7)
    assert np.array_equal(sigma_elem(act, (0,)), np.arange(7))


def test_sigma_elem_folner_square_matches_composition():
    act = folner_approximation(FreeAbelian(1), [12]).stages[0]
    a = act.perms["a"]
    assert np.array_equal(sigma_elem(act, (2,)), a[a])


def test_exact_action_is_homomorphic_nonabelian():
    m = SymmetricGroup(4)
    act = regular_action(m)
    elems = ball_elements(m, 3)
    for g in elems[:12]:
        for h in elems[:12]:
            assert np.array_equal(sigma_elem(act, g)[sigma_elem(act, h)], sigma_elem(act, m.multiply(g, h)))
    assert good_set(act, elems).defect == 0


@pytest.mark.parametrize("d,n", [(1, 5), (1, 9), (2, 5), (2, 8)])
def test_good_set_exact_quotient(d, n):
    act = quotient_approximation(FreeAbelian(d), [n]).stages[0]
    rep = good_set(act, ball_elements(act.model, 2))
    assert rep.defect == 0 and rep.size == n ** d


def test_good_set_identity_only():
    act = random_permutation_approximation(2, 30, 3)
    assert good_set(act, [act.model.identity]).size == 30


def test_good_set_empty_F_rejected():
    with pytest.raises(ValueError):
        good_set(cycle_action(4), [])


@pytest.mark.parametrize("n", range(10, 101, 9))
def test_good_set_folner_line_oracle(n):
    act = folner_approximation(FreeAbelian(1), [n]).stages[0]
    F = [(k,) for k in (0, 1, -1, 2, -2)]
    rep = good_set(act, F)
    assert rep.size == folner_line_good_count(n, [0, 1, -1, 2, -2])


def test_good_set_fixed_points_removed():
    act = AlmostAction(FreeAbelian(1), {"a": [0, 2, 1, 3]})
    rep = good_set(act, [(0,), (1,)])
    # 0 and 3 are fixed by a; a^2 is evaluated as a∘a so products never fail here
    assert rep.Y.tolist() == [1, 2]
    # with a^-1 in F, σ(a)σ(a^-1) = e holds but σ(a^-1) fixes 0 and 3 as well
    assert good_set(act, [(1,), (-1,)]).Y.tolist() == [1, 2]


def test_build_labeled_graph_examples():
    g = build_labeled_graph(cycle_action(6))
    assert sorted(g.edges()) == [(i, (i + 1) % 6, "a") for i in range(6)]
    trivial = AlmostAction(FreeGroup(2), {"a": range(3), "b": range(3)})
    g = build_labeled_graph(trivial)
    assert g.num_edges == 6 and all(u == v for u, v, _ in g.edges())
    act = AlmostAction(FreeGroup(2), {"a": [1, 2, 3, 0], "b": [2, 3, 0, 1]})
    by_hand = [(0, 1, "a"), (1, 2, "a"), (2, 3, "a"), (3, 0, "a"), (0, 2, "b"), (1, 3, "b"), (2, 0, "b"), (3, 1, "b")]
    assert sorted(build_labeled_graph(act).edges()) == sorted(by_hand)


def test_complete_partial_ascending_rule():
    partial = np.array([-1, 0, -1, 4, -1])
    # unused targets 1, 2, 3 go to sources 0, 2, 4 in that order
    assert complete_partial(partial).tolist() == [1, 0, 2, 4, 3]
    with pytest.raises(ValueError):
        complete_partial(np.array([1, 1, -1]))


@settings(max_examples=200, deadline=None)
@given(st.permutations(list(range(8))), st.lists(st.booleans(), min_size=8, max_size=8))
def test_complete_partial_matches_matching_oracle(perm, drop):
    partial = np.array([-1 if d else p for p, d in zip(perm, drop)])
    out = complete_partial(partial)
    assert sorted(out.tolist()) == list(range(8))
    free_src = [i for i in range(8) if partial[i] < 0]
    free_dst = sorted(set(range(8)) - set(partial[partial >= 0].tolist()))
    assert [out[i] for i in free_src] == free_dst


def two_component_action(fixed_a, fixed_b):
    """Two 10-point b-cycles; σ(a) fixes the given number of points in each block."""
    n = 20
    b = [(i + 1) % 10 + 10 * (i // 10) for i in range(n)]
    a = list(range(n))
    for block, k in ((0, fixed_a), (1, fixed_b)):
        movers = list(range(10 * block + k, 10 * block + 10))
        for i, x in enumerate(movers):
            a[x] = movers[(i + 1) % len(movers)]
    return AlmostAction(FreeAbelian(2), {"a": a, "b": b})


def test_repair_picks_dense_component():
    act = two_component_action(3, 1)  # densities 0.7 and 0.9
    F = [(0, 0), (1, 0)]
    rep = good_set(act, F)
    assert rep.size == 16
    res = repair_connected(act, F, 0.15)
    assert res.vertices.tolist() == list(range(10, 20))
    assert res.good_before == 9
    assert build_labeled_graph(res.action).is_connected()
    assert good_set(res.action, F).defect <= Fraction(15, 100)


def test_repair_cycle_vs_fixed_component():
    n = 8
    a = [(i + 1) % n for i in range(n)] + [n + i for i in range(4)]
    act = AlmostAction(FreeAbelian(1), {"a": a})
    F = [(0,), (1,), (-1,)]
    res = repair_connected(act, F, 0.1)
    assert res.vertices.tolist() == list(range(n))
    assert res.action == cycle_action(n)


def test_repair_connected_input_unchanged():
    act = cycle_action(9)
    res = repair_connected(act, [(0,), (1,)], 0.1)
    assert res.action == act


def test_repair_no_component():
    act = AlmostAction(FreeAbelian(1), {"a": range(5)})
    with pytest.raises(RuntimeError):
        repair_connected(act, [(1,)], 0.1)


def test_restrict_action_completes():
    act = cycle_action(6)
    sub = restrict_action(act, [0, 1, 2])
    # 0->1, 1->2 kept; 2 -> 3 leaves the set, completed to the unused target 0
    assert sub.perms["a"].tolist() == [1, 2, 0]


def test_finite_core_examples():
    q = quotient_approximation(FreeAbelian(2), [6]).stages[0]
    F = ball_elements(q.model, 2)
    assert finite_core(q, F).all()
    act = random_permutation_approximation(2, 40, 1)
    e = act.model.identity
    assert np.array_equal(finite_core(act, [e]), good_set(act, [e]).mask)


def test_finite_core_exhaustive_intersection():
    act = folner_approximation(FreeAbelian(1), [20]).stages[0]
    F = ball_elements(act.model, 2)
    Y = set(good_set(act, F).Y.tolist())
    core = set(range(20))
    for g in F:
        p = sigma_elem(act, g)
        core &= {int(p[y]) for y in Y}
    got = set(np.flatnonzero(finite_core(act, F)).tolist())
    assert got == core
    assert len(core) >= 20 - len(F) * (20 - len(Y))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(4, 60))
def test_finite_core_bound_random(seed, n):
    act = random_permutation_approximation(2, n, seed)
    for r in (1, 2):
        F = ball_elements(act.model, r)
        rep = good_set(act, F)
        assert finite_core(act, F).sum() >= n - len(F) * (n - rep.size)
