import pytest

from ctrlalg.ctrlmod import (IncompleteRules, ModuleMismatch, Presentation, Ring, Verified, Violated,
                             check_controlled, cokernel_rank, compose, hom_sum, identity, kernel_basis,
                             pushforward_branch, stabilize, tensor_mod2, truncate, zero_hom)
from ctrlalg.dsl import parse
from ctrlalg.quiver import catalog_entry, elementary_catalog, rigid_list
from ctrlalg.tree import Tree, vertex

SRC_Z = """
module N over T1 ring Z {
  root e0@v0;
  ray e(m) where m >= 1 branch 1 height m;
}
hom IA : N -> N {
  at e0 => e0 - e(1);
  for e(m) => e(m) - e(m + 1);
  witness h(m) = m;
}
hom IAt : N -> N {
  at e0 => e0;
  at e(1) => e(1) - e0;
  for e(m) if m > 1 => e(m) - e(m - 1);
  witness h(m) = m - 1;
}
hom two : N -> N {
  at e0 => 2 * e0;
  for e(m) => 2 * e(m);
  witness h(m) = m;
}
present A = IA;
"""

WS = parse(SRC_Z)


def e(m):
    return ("e0",) if m == 0 else ("e", m)


def test_truncate_I_minus_A():
    wm = truncate(WS.homs["IA"], 5)
    assert wm.rows == [e(m) for m in range(6)] and wm.cols == wm.rows
    dense = wm.dense()
    for i in range(6):
        for j in range(6):
            assert dense[i][j] == (1 if i == j else -1 if i == j + 1 else 0)
    assert wm.escaping == {e(5): {e(6): -1}}


def test_truncate_zero_and_coherence():
    M = WS.modules["N"]
    assert all(not col for col in truncate(zero_hom(M, M), 9).entries.values())
    big, small = truncate(WS.homs["IAt"], 20), truncate(WS.homs["IAt"], 8)
    for c in small.cols:
        assert {g: v for g, v in big.entries[c].items() if g in small.rows} == small.entries[c]


def test_truncate_rho_of_MV35():
    P = catalog_entry(Tree(3), "MV(3,5)").presentation
    wm = truncate(P.relations, 4)
    roots = [g for g in wm.rows if len(g) == 1]
    assert sorted(roots) == [("w1",), ("w2",)]
    want = {("u1", 1): {("u1", 1), ("w1",)}, ("u2", 1): {("u2", 1), ("w1",), ("w2",)},
            ("u3", 1): {("u3", 1), ("w2",)}}
    for c in wm.cols:
        lab, m = c
        got = set(wm.entries[c])
        assert got == (want[c] if m == 1 else {(lab, m), (lab, m - 1)})


def test_check_controlled_examples():
    M = WS.modules["N"]
    assert isinstance(check_controlled(identity(M), 32), Verified)
    binf = catalog_entry(Tree(1), "Binf").presentation.relations
    assert isinstance(check_controlled(binf, 64), Verified)
    from ctrlalg.ctrlmod import FuncHom, Witness

    bad = FuncHom(M, M, lambda g: {e(0): 1}, "to_root", Witness.parse("m"))
    assert isinstance(check_controlled(bad, 16), Violated)
    with pytest.raises(IncompleteRules):
        check_controlled(FuncHom(M, M, lambda g: {g: 1}, "nowit"), 8)


def test_compose_examples():
    IA, IAt = WS.homs["IA"], WS.homs["IAt"]
    M = IA.source
    f = compose(identity(M), IA)
    for g in M.gens(10):
        assert f.image(g) == IA.image(g)
    # interior of the composite equals the product of truncations
    N = 8
    c, a, b = truncate(compose(IAt, IA), N), truncate(IA, N), truncate(IAt, N)
    for col in c.cols:
        if M.size(col) > N - 1:
            continue
        prod: dict = {}
        for mid, x in a.entries[col].items():
            for g, y in b.entries[mid].items():
                prod[g] = prod.get(g, 0) + x * y
        assert {g: v for g, v in prod.items() if v} == c.entries[col]
    with pytest.raises(ModuleMismatch):
        compose(IA, catalog_entry(Tree(1), "B").presentation.relations)


def test_additivity_of_truncation():
    IA, IAt = WS.homs["IA"], WS.homs["IAt"]
    s = truncate(hom_sum(Ring.INT, (1, IA), (1, IAt)), 10)
    a, b = truncate(IA, 10), truncate(IAt, 10)
    for col in s.cols:
        want = dict(a.entries[col])
        for g, v in b.entries[col].items():
            want[g] = want.get(g, 0) + v
        assert {g: v for g, v in want.items() if v} == s.entries[col]


def test_cokernel_ranks_of_the_ray_matrices():
    cat = {e.tag: e.presentation.relations for e in elementary_catalog(Tree(1))}
    assert (cokernel_rank(cat["B"]).verdict, cokernel_rank(cat["B"]).value) == ("Stable", 1)
    assert cokernel_rank(cat["C"]).value == 0
    assert cokernel_rank(cat["Binf"]).verdict == "Diverging"
    assert cokernel_rank(cat["Cinf"]).value == 0


def test_cokernel_over_Z_reports_torsion():
    rep = cokernel_rank(WS.homs["two"], (8, 12, 16))
    assert rep.value == 0
    assert all(t and set(t) == {2} for t in rep.extra["torsion"].values())
    assert cokernel_rank(WS.homs["IA"], (8, 12, 16)).value == 1


def test_kernel_basis_examples():
    assert kernel_basis(WS.homs["IA"], (8, 12, 16)).value == 0
    M = WS.modules["N"]
    z = kernel_basis(zero_hom(M, M), (8, 12, 16))
    assert z.dims == {8: 9, 12: 13, 16: 17}
    for V in rigid_list(3):
        P = catalog_entry(Tree(3), "MV" + V.name[1:]).presentation
        assert kernel_basis(P.relations).value == 0


def test_tensor_mod2():
    IA = WS.homs["IA"]
    m2 = tensor_mod2(IA)
    assert m2.ring is Ring.F2
    for g in IA.source.gens(10):
        assert m2.image(g) == {t: 1 for t, c in IA.image(g).items() if c % 2}
    two = tensor_mod2(WS.homs["two"])
    assert all(not two.image(g) for g in two.source.gens(10))
    F = catalog_entry(Tree(1), "B").presentation
    assert tensor_mod2(F) is F
    assert isinstance(tensor_mod2(WS.presentations["A"]), Presentation)


def test_pushforward_branch():
    A = catalog_entry(Tree(1), "B").presentation
    P = pushforward_branch(A, 2, Tree(3))
    assert P.tree == Tree(3)
    for g in P.P0.gens(10):
        v = P.P0.height(g)
        assert v.is_root or v.branch == 2
    assert P.P0.height(("e", 4)) == vertex(2, 4)
    with pytest.raises(ValueError):
        pushforward_branch(A, 4, Tree(3))


def test_stabilize():
    assert stabilize({16: 1, 32: 1, 64: 1}).value == 1
    assert stabilize({16: 1, 32: 2, 64: 3}).verdict == "Diverging"
    assert stabilize({16: 2, 32: 1, 64: 1}).verdict == "Indeterminate"
    assert stabilize({16: 2, 32: 1, 64: 1}, k=2).value == 1


def test_window_schedule_is_validated():
    with pytest.raises(ValueError):
        cokernel_rank(WS.homs["IA"], (16, 32))
    with pytest.raises(ValueError):
        cokernel_rank(WS.homs["IA"], (16, 64, 32))
