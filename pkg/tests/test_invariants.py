import random

import pytest

from ctrlalg.ctrlmod import Ring
from ctrlalg.dsl import parse, parse_file
from ctrlalg.invariants import (NotSplit, Obstructed, Split, Vanishes, check_finite_retraction,
                                coH_obstruction, cup_nonzero, finite_tau_split, hat_square, herculillo7,
                                moore_count, replay_finite_certificate, replay_split_certificate,
                                seven_subspace_not_split, tau_bar_split, tau_system)
from ctrlalg.nil2 import Nil2Group, from_decl
from ctrlalg.quad import QuadFunctor, quad_fp
from ctrlalg.quiver import FIXTURES, NSubspace, W, catalog_entry, conjugate, indecomposables, sum_of
from ctrlalg.tree import Tree

SMALL = (8, 12, 16)


def _entry(tree, tag):
    return catalog_entry(tree, tag).presentation


# ---------------------------------------------------------------- finite τ̄


def test_hat_square_shape():
    pairs, arms = hat_square(W(0, 3))
    assert pairs == [(0, 0)] and arms == [[], [], []]
    pairs, arms = hat_square(NSubspace(1, 2, ((0b01, 0b10),)))
    assert pairs == [(0, 0), (0, 1), (1, 1)]
    assert arms == [[0b001, 0b010, 0b100]]


def test_seven_subspace_has_no_retraction():
    got = seven_subspace_not_split()
    assert isinstance(got, NotSplit)
    assert replay_finite_certificate(herculillo7(), got)
    # a truncated certificate no longer adds up to 0 = 1
    assert not replay_finite_certificate(herculillo7(), NotSplit(got.certificate[:-1], 0, {}))
    assert not replay_finite_certificate(herculillo7(), NotSplit([("bogus",)], 0, {}))


def test_fewer_arms_split():
    H = herculillo7()
    for k in (0, 1, 3, 6):
        V = NSubspace(k, 3, H.arms[:k])
        got = finite_tau_split(V)
        assert isinstance(got, Split), k
        assert check_finite_retraction(V, got.witness)


def test_rigid_subspaces_split_in_any_basis():
    rng = random.Random(5)
    for X in indecomposables(3):
        Y = conjugate(X, rng)
        got = finite_tau_split(Y)
        assert isinstance(got, Split) and check_finite_retraction(Y, got.witness)


def test_retraction_check_rejects_wrong_maps():
    V = NSubspace(1, 2, ((0b01,),))
    s = finite_tau_split(V).witness
    assert check_finite_retraction(V, s)
    assert not check_finite_retraction(V, {**s, (0, 0): 0b10})
    # ⊗̂²V1 = <e0⊗̂e0> must land in V1 = <e0>: send the mixed pair anywhere, but not e0⊗̂e0 to e1
    assert not check_finite_retraction(V, {(0, 0): 0b11, (0, 1): 0, (1, 1): 0b10})


# ---------------------------------------------------------------- τ̄ on controlled modules


def test_tau_bar_split_on_small_catalog_entries():
    T1 = Tree(1)
    for tag in ("A", "B", "C"):
        P = _entry(T1, tag)
        got = tau_bar_split(P, SMALL)
        assert isinstance(got, Split), tag
        assert got.replayed == 32 and got.trace["replay"] == "ok"


def test_tau_bar_split_reduces_integral_presentations_mod_two():
    P = _entry(Tree(1), "B")
    assert tau_system(P).target.ring is Ring.F2


def test_split_certificate_replay_rejects_garbage():
    P = _entry(Tree(1), "A")
    assert not replay_split_certificate(P, NotSplit([], 8, {}))


def _s0(g):
    # the level-wise retraction on ⊗̂² of the φ presentation of C∞
    _, x, y = g
    (m, n), (p, q) = x[1:], y[1:]
    if (p, q) < (m, n):
        (m, n), (p, q) = (p, q), (m, n)
    return {x if (m, n) == x[1:] else y: 1} if p >= m >= n == q else {}


def _s_reach(s, N):
    """Deepest drop in level from a relation r of ⊗̂² to the φ-preimage of s(r).

    φ is invertible on every finite window, so s(r) always lies in its image;
    a controlled retraction is one whose preimages stay within bounded reach.
    """
    P = parse_file(FIXTURES / "splitcinf_T1.calg").presentations["CinfPhi"]
    Q = quad_fp(QuadFunctor.HATSQ, P)
    worst = checked = 0
    for r in Q.relations.source.gens(N):
        img = Q.relations.image(r)
        if not img or any(Q.P0.size(g) > N - 1 for g in img):
            continue
        v: set = set()
        for g in img:
            v ^= set(s(g))
        y: set = set()
        while v:  # back substitution from the top level down
            a = max(v, key=lambda t: t[1])
            y ^= {a}
            v ^= set(P.relations.image(a))
        checked += 1
        if y:
            level = min(min(x[1], z[1]) for _, x, z in img)
            worst = max(worst, level - min(t[1] for t in y))
    return checked, worst


@pytest.mark.parametrize("N", [10, 16])
def test_levelwise_retraction_for_the_phi_presentation(N):
    checked, reach = _s_reach(_s0, N)
    assert checked > 0 and reach == 0


@pytest.mark.parametrize("wrong", [lambda g: {g[1]: 1}, lambda g: {g[1]: 1} if g[1] == g[2] else {}])
def test_uncontrolled_retractions_reach_arbitrarily_deep(wrong):
    assert _s_reach(wrong, 10)[1] < _s_reach(wrong, 16)[1]


# ---------------------------------------------------------------- cup product


def test_cup_product_detects_the_rigid_summand():
    T3 = Tree(3)
    assert bool(cup_nonzero(_entry(T3, "MV(3,5)"))) is True
    assert bool(cup_nonzero(_entry(T3, "B1"))) is False
    assert bool(cup_nonzero(_entry(T3, "MV(3,4)"))) is False
    assert bool(cup_nonzero(sum_of(T3, ["MV(3,5)", "A"]))) is True
    assert bool(cup_nonzero(sum_of(T3, ["B2", "C3"]))) is False


def test_cup_product_needs_three_ends():
    with pytest.raises(ValueError):
        cup_nonzero(_entry(Tree(1), "B"))


# ---------------------------------------------------------------- co-H obstruction


def _lifts(name):
    ws = parse_file(FIXTURES / f"{name}.calg")
    S, M, T = (Nil2Group(ws.modules[k]) for k in ("D", "DC", "C"))
    return ws, from_decl(ws.nil2["dtop"], S, M), from_decl(ws.nil2["dmid"], M, T)


def test_coH_obstruction_three_ends():
    ws, top, mid = _lifts("comput1_T3")
    got = coH_obstruction(top, mid, ws.presentations["H"])
    assert isinstance(got, Obstructed) and got.certificate


def test_coH_obstruction_one_end():
    ws, top, mid = _lifts("comput1_T1")
    assert isinstance(coH_obstruction(top, mid, ws.presentations["H"]), Vanishes)


# ---------------------------------------------------------------- Moore counts


def test_moore_count_small_cases():
    T1 = Tree(1)
    rep = moore_count(sum_of(T1, ["A", "C"]), SMALL)
    assert rep.ext.verdict == "Stable" and rep.ext.value == 1 and rep.orbit_count == 2
    for tag in ("A", "B", "C"):
        rep = moore_count(_entry(T1, tag), SMALL)
        assert rep.orbit_count == 1, tag


def test_moore_count_skips_diverging_ext():
    rep = moore_count(sum_of(Tree(1), ["R", "B"]), (16, 32, 48))
    assert rep.orbit_count is None and "Diverging" in rep.note


def test_moore_count_tree_limit():
    src = """
module M over T4 ring F2 {
  root x@v0;
}
hom z : M -> M {
  at x => 0;
  witness h(m) = m;
}
present P = z;
"""
    with pytest.raises(NotImplementedError):
        moore_count(parse(src).presentations["P"], SMALL)
