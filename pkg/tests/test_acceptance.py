"""Acceptance criteria 1-10, one PASS/FAIL line each (collected in REPORT and
printed in the terminal summary).  Every library call or CLI invocation counted
as a run is timed against the 60 s budget."""

import random
import time
from collections import Counter

from oracles import m_commutator, m_mul, m_word, magnus_of_normal_form, path_algebra_hom_ext, random_subspace, \
    random_word
from ctrlalg.cli import main as cli_main
from ctrlalg.ctrlmod import Ring, cokernel_rank, pushforward_branch, tensor_mod2
from ctrlalg.dsl import parse, parse_file
from ctrlalg.homext import ext1_dim, hom_space
from ctrlalg.invariants import (NotSplit, Split, moore_count, replay_finite_certificate, seven_subspace_not_split,
                                herculillo7, tau_bar_split)
from ctrlalg.nil2 import Coboundary, Nil2Group, NotCoboundary, cup_cocycle, extract_theta, from_decl, \
    is_coboundary
from ctrlalg.quad import QuadFunctor, nat_trans, quad_fp, quad_free
from ctrlalg.quiver import (FIXTURES, W, conjugate, decompose, decompose_fp_module, direct_sum_sub,
                            elementary_catalog, euler_form, ext_dim, hom_dim, indecomposables, label, sum_of)
from ctrlalg.tree import ROOT, Tree, distance, in_cone, meet, vertex

BUDGET = 60.0
REPORT: list[str] = []


class Runs:
    """Times each run; a criterion passes only if every run is under budget."""

    def __init__(self):
        self.times: list[float] = []

    def __call__(self, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        self.times.append(time.perf_counter() - t0)
        return out

    @property
    def slowest(self) -> float:
        return max(self.times, default=0.0)


def record(n: int, what: str, failures: list, runs: Runs):
    over = [t for t in runs.times if t >= BUDGET]
    ok = not failures and not over
    detail = f"{len(runs.times)} runs, slowest {runs.slowest:.1f}s"
    if failures:
        detail += "; failed: " + "; ".join(map(str, failures[:6]))
    if over:
        detail += f"; {len(over)} runs over {BUDGET:.0f}s"
    REPORT.append(f"{'PASS' if ok else 'FAIL'} [C{n}] {what} ({detail})")
    assert ok, REPORT[-1]


def summands(P):
    d = decompose_fp_module(P)
    return d.summands


# ---------------------------------------------------------------- 1


def test_c1_cokernel_dims():
    ws = parse_file(FIXTURES / "elementary_T1.calg")
    runs, bad = Runs(), []
    want = {"rB": ("Stable", 1), "rC": ("Stable", 0), "rBinf": ("Diverging", None), "rCinf": ("Stable", 0)}
    for name, (verdict, value) in want.items():
        rep = runs(cokernel_rank, ws.homs[name])
        if (rep.verdict, rep.value) != (verdict, value):
            bad.append(f"{name}: {rep.verdict} {rep.value}")
    record(1, "cokernels I-A=1, I-At=0, I-B Diverging, I-Bt=0", bad, runs)


# ---------------------------------------------------------------- 2


def test_c2_quiver_tables():
    V = {v.name: v for v in indecomposables(3)}
    V35 = V["V(3,5)"]
    runs, bad = Runs(), []
    homs = [runs(hom_dim, V35, W(i, 3)) for i in range(4)] + [runs(hom_dim, V35, V[f"V(3,{j})"]) for j in range(1, 6)]
    exts = [runs(ext_dim, V35, W(i, 3)) for i in range(4)] + [runs(ext_dim, V35, V[f"V(3,{j})"]) for j in range(1, 6)]
    if homs != [0, 0, 0, 0, 1, 1, 1, 2, 1]:
        bad.append(f"hom {homs}")
    if exts != [1, 0, 0, 0, 0, 0, 0, 0, 0]:
        bad.append(f"ext {exts}")
    selfs = {X.name: runs(ext_dim, X, X) for X in indecomposables(3)}
    bad += [f"self-ext {k}" for k, v in selfs.items() if v]
    record(2, "hom/ext tables of V(3,5) and no self-extensions", bad, runs)


# ---------------------------------------------------------------- 3


def test_c3_hom_ext_over_trees():
    ws = (16, 32, 64)
    E = {e.tag: e.presentation for e in elementary_catalog(Tree(1))}
    T3 = Tree(3)
    runs, bad = Runs(), []

    def expect(rep, value, what):
        if (rep.verdict, rep.value) != ("Stable", value):
            bad.append(f"{what}: {rep.verdict} {rep.value} {rep.dims}")

    expect(runs(hom_space, E["B"], E["A"], ws), 0, "Hom(B,A)")
    expect(runs(hom_space, E["A"], E["B"], ws), 1, "Hom(A,B)")
    expect(runs(hom_space, E["C"], E["Binf"], ws), 0, "Hom(C,Binf)")
    B = {i: pushforward_branch(E["B"], i, T3) for i in (1, 2, 3)}
    Binf = {i: pushforward_branch(E["Binf"], i, T3) for i in (1, 2, 3)}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i != j:
                expect(runs(hom_space, B[i], Binf[j], ws), 0, f"Hom(F{i}B,F{j}Binf)")
            expect(runs(ext1_dim, B[j], Binf[i], ws), 0, f"Ext(F{j}B,F{i}Binf)")
    record(3, "Hom/Ext between B, A, C, Binf and their branch pushforwards, stable by window 64", bad, runs)


# ---------------------------------------------------------------- 4


def test_c4_quadratic_identifications():
    T = {n: {e.tag: e.presentation for e in elementary_catalog(Tree(n))} for n in (1, 2, 3)}
    lines = [(QuadFunctor.WEDGE2, 1, "B", {}), (QuadFunctor.WEDGE2, 1, "Binf", {"Binf": 1}),
             (QuadFunctor.WEDGE2, 2, "MV(2,1)", {})]
    lines += [(QuadFunctor.WEDGE2, 3, f"MV(3,{i})", {}) for i in range(1, 5)]
    lines += [(QuadFunctor.WEDGE2, 3, "MV(3,5)", {"A": 1}), (QuadFunctor.HATSQ, 1, "B", {"B": 1}),
              (QuadFunctor.HATSQ, 1, "Binf", {"Binf": 1}), (QuadFunctor.HATSQ, 2, "MV(2,1)", {"MV(2,1)": 1})]
    lines += [(QuadFunctor.HATSQ, 3, f"MV(3,{i})", {f"MV(3,{i})": 1}) for i in range(1, 5)]
    runs, bad = Runs(), []
    for F, n, tag, want in lines:
        P = T[n][tag]
        if F is QuadFunctor.HATSQ and P.ring is not Ring.F2:
            P = tensor_mod2(P)
        got = runs(lambda: summands(quad_fp(F, P)))
        if got != want:
            bad.append(f"{F.name}({tag}) = {got}")
    record(4, "wedge2 and hat-square of B, Binf, MV(2,1), MV(3,i) as fingerprint isomorphisms", bad, runs)


# ---------------------------------------------------------------- 5


def _lifts(name):
    ws = parse_file(FIXTURES / f"{name}.calg")
    S, M, T = (Nil2Group(ws.modules[k]) for k in ("D", "DC", "C"))
    return ws, from_decl(ws.nil2["dtop"], S, M), from_decl(ws.nil2["dmid"], M, T)


def test_c5_theta_table_and_cocycle():
    runs, bad = Runs(), []
    ws, top, mid = _lifts("comput1_T3")
    theta = runs(extract_theta, top, mid)
    Wd = theta.target
    w1, w2 = ("w1",), ("w2",)

    def wedge(*pairs):
        out = Counter()
        for a, b in pairs:
            out.update(Wd.wedge({a: 1}, {b: 1}))
        return {k: v for k, v in out.items() if v}

    for g in theta.source.gens(10):
        lab, m = g
        if m > 1:
            want = wedge((g, (lab, m - 1)))
        elif lab == "u1":
            want = wedge((g, w1))
        elif lab == "u2":
            want = wedge((g, w1), (g, w2), (w1, w2))
        else:
            want = wedge((g, w2))
        if theta.image(g) != want:
            bad.append(f"theta{g}")
    cyc, target = runs(cup_cocycle, theta, ws.presentations["H"])
    if not isinstance(runs(is_coboundary, cyc, top.abelianization(), target), NotCoboundary):
        bad.append("three ends: expected NotCoboundary")
    ws1, top1, mid1 = _lifts("comput1_T1")
    cyc1, target1 = runs(cup_cocycle, runs(extract_theta, top1, mid1), ws1.presentations["H"])
    if not isinstance(runs(is_coboundary, cyc1, top1.abelianization(), target1), Coboundary):
        bad.append("one end: expected Coboundary")
    record(5, "theta table for m <= 10, NotCoboundary on T3, Coboundary on T1", bad, runs)


# ---------------------------------------------------------------- 6


def test_c6_ext_target():
    runs = Runs()
    P = {e.tag: e.presentation for e in elementary_catalog(Tree(3))}["MV(3,5)"]
    rep = runs(lambda: ext1_dim(P, quad_fp(QuadFunctor.WEDGE2, P)))
    bad = [] if (rep.verdict, rep.value) == ("Stable", 1) else [f"{rep.verdict} {rep.value} {rep.dims}"]
    record(6, "dim Ext1(MV(3,5), wedge2 MV(3,5)) = 1", bad, runs)


# ---------------------------------------------------------------- 7


def test_c7_splitting_suite():
    runs, bad = Runs(), []
    counts = {}
    for n in (1, 2, 3):
        cat = elementary_catalog(Tree(n))
        counts[n] = len(cat)
        for e in cat:
            v = runs(tau_bar_split, e.presentation)
            if not (isinstance(v, Split) and v.replayed and v.trace.get("replay") == "ok"):
                bad.append(f"T{n} {e.tag}: {type(v).__name__} {v.trace}")
    if counts != {1: 6, 2: 12, 3: 21}:
        bad.append(f"catalog sizes {counts}")
    v = runs(seven_subspace_not_split)
    if not (isinstance(v, NotSplit) and v.certificate and replay_finite_certificate(herculillo7(), v)):
        bad.append("seven-subspace: expected a replayable NotSplit")
    record(7, "tau_bar splits on 6+12+21 catalog entries with replay; seven-subspace NotSplit replays", bad,
           runs)


# ---------------------------------------------------------------- 8


def test_c8_moore_counts():
    runs, bad = Runs(), []
    T1 = Tree(1)
    r = runs(moore_count, sum_of(T1, ["A", "C"]))
    if (r.ext.verdict, r.ext.value, r.orbit_count) != ("Stable", 1, 2):
        bad.append(f"A+C: {r.ext.verdict} {r.ext.value} {r.orbit_count}")
    r = runs(moore_count, sum_of(T1, ["R", "B"]))
    dims = [r.dims[N] for N in (16, 32, 64, 128)]
    if r.ext.verdict != "Diverging" or any(a >= b for a, b in zip(dims, dims[1:])):
        bad.append(f"R+B: {r.ext.verdict} {dims}")
    ext_zero = 0
    for n in (1, 2, 3):
        for e in elementary_catalog(Tree(n)):
            r = runs(moore_count, e.presentation)
            if (r.ext.verdict, r.ext.value) == ("Stable", 0):
                ext_zero += 1
                if r.orbit_count != 1:
                    bad.append(f"T{n} {e.tag}: {r.orbit_count} orbits")
    if ext_zero != 39:
        bad.append(f"only {ext_zero}/39 elementaries have Ext1 = 0")
    record(8, f"Moore counts A+C (1, 2 orbits), R+B diverging {dims}, {ext_zero} ext-zero elementaries 1 orbit",
           bad, runs)


# ---------------------------------------------------------------- 9


def test_c9_oracle_suites():
    runs, bad = Runs(), []
    G = Nil2Group(parse("module G over T1 ring Z { root x@v0; root y@v0; root z@v0; }").modules["G"])
    gens = [("x",), ("y",), ("z",)]

    def nil2_suite():
        rng = random.Random(9)
        miss = 0
        for _ in range(10_000):
            w1, w2 = random_word(rng, gens), random_word(rng, gens)
            a, b = G.word(w1), G.word(w2)
            ma, mb = m_word(w1), m_word(w2)
            miss += magnus_of_normal_form(G.mul(a, b)) != m_mul(ma, mb)
            miss += magnus_of_normal_form(G.commutator(a, b)) != m_commutator(ma, mb)
        return miss

    def euler_suite():
        rng = random.Random(10)
        miss = 0
        for _ in range(200):
            A, B = random_subspace(rng, 3, 8), random_subspace(rng, 3, 8)
            h, e = path_algebra_hom_ext(A, B)
            miss += (hom_dim(A, B), ext_dim(A, B)) != (h, e) or h - e != euler_form(A.dimvec, B.dimvec)
        return miss

    def decompose_suite():
        rng = random.Random(11)
        pool = indecomposables(3)
        miss = 0
        for t in range(100):
            parts = [rng.choice(pool) for _ in range(rng.randint(1, 5))]
            X = conjugate(direct_sum_sub(parts), rng)
            miss += Counter(label(s) for s in decompose(X, seed=t)) != Counter(p.name for p in parts)
        return miss

    for name, suite in (("nil2 vs Magnus, 10^4 pairs", nil2_suite), ("hom/ext vs path algebra, 200 pairs",
                        euler_suite), ("decompose round trip, 100 sums", decompose_suite)):
        m = runs(suite)
        if m:
            bad.append(f"{name}: {m} mismatches")
    record(9, "oracle suites: nil2 10^4, Euler form 200, decompose 100, zero mismatches", bad, runs)


# ---------------------------------------------------------------- 10


def test_c10_structural_invariants():
    runs, bad = Runs(), []
    rng = random.Random(12)
    cases = 1000
    M2 = parse("""module M over T2 ring F2 {
      root x@v0; root y@v0;
      ray a(m) where m >= 1 branch 1 height m;
      ray b(m) where m >= 1 branch 2 height m;
    }""").modules["M"]
    MZ = parse("""module M over T2 ring Z {
      root x@v0; root y@v0;
      ray a(m) where m >= 1 branch 1 height m;
      ray b(m) where m >= 1 branch 2 height m;
    }""").modules["M"]
    gens = M2.gens(6)

    def rvec(ring):
        out = {}
        for g in rng.sample(gens, rng.randint(0, 5)):
            c = rng.randint(-3, 3) if ring is Ring.INT else 1
            if c:
                out[g] = c
        return out

    def add(*vs):
        out = Counter()
        for s, v in vs:
            for g, c in v.items():
                out[g] += s * c
        return {g: c for g, c in out.items() if c}

    def add2(*vs):
        out = Counter()
        for v in vs:
            for g in v:
                out[g] ^= 1
        return {g: 1 for g, c in out.items() if c}

    def d2():
        G = quad_free(QuadFunctor.GAMMA, M2)
        tau, sigma = nat_trans("tau", M2), nat_trans("sigma", M2)
        sb, tb, qb = nat_trans("sigma_bar", M2), nat_trans("tau_bar", M2), nat_trans("q_bar", M2)
        fails = 0
        for _ in range(cases):
            x = rvec(Ring.F2)
            g = G.gamma(x)
            fails += sb.apply(tau.apply(g)) != tb.apply(sigma.apply(g)) or qb.apply(tb.apply(x)) != {}
        return fails

    def cross_effects():
        G, Wz = quad_free(QuadFunctor.GAMMA, MZ), quad_free(QuadFunctor.WEDGE2, MZ)
        H = quad_free(QuadFunctor.HATSQ, M2)
        fails = 0
        for _ in range(cases):
            x, y, z = rvec(Ring.INT), rvec(Ring.INT), rvec(Ring.INT)
            fails += add((1, G.gamma(add((1, x), (1, y)))), (-1, G.gamma(x)), (-1, G.gamma(y))) != G.bracket(x, y)
            fails += G.bracket(add((1, x), (1, z)), y) != add((1, G.bracket(x, y)), (1, G.bracket(z, y)))
            fails += Wz.wedge(add((1, x), (1, z)), y) != add((1, Wz.wedge(x, y)), (1, Wz.wedge(z, y)))
            u, v, w = rvec(Ring.F2), rvec(Ring.F2), rvec(Ring.F2)
            fails += H.hat(add2(u, w), v) != add2(H.hat(u, v), H.hat(w, v))
        return fails

    def tree_laws():
        def rv():
            lv = rng.randint(0, 64)
            return vertex(rng.randint(1, 3), lv) if lv else ROOT

        fails = 0
        for _ in range(cases):
            u, v, w = rv(), rv(), rv()
            fails += meet(u, v) != meet(v, u) or meet(meet(u, v), w) != meet(u, meet(v, w)) or meet(u, u) != u
            fails += not (in_cone(u, meet(u, v)) and in_cone(v, meet(u, v)))
            fails += (in_cone(u, w) and in_cone(v, w)) != in_cone(meet(u, v), w)
            fails += distance(u, w) > distance(u, v) + distance(v, w)
        return fails

    for name, check in (("(d2) commutativity", d2), ("cross-effect bilinearity", cross_effects),
                        ("meet/cone laws", tree_laws)):
        f = runs(check)
        if f:
            bad.append(f"{name}: {f} failures")
    record(10, f"(d2), cross-effect bilinearity, meet/cone laws on {cases} cases each", bad, runs)


# ---------------------------------------------------------------- CLI examples


def test_cli_examples(capsys):
    runs, bad = Runs(), []
    for argv, want in ((["ext", "--M", "MV35", "--N", "wedge2(MV35)", "--tree", "T3"], "#! DIM=1"),
                       (["split-tau", "--fixture", "herculillo7"], "VERDICT=NOT_SPLIT"),
                       (["moore", "--M", "A+C", "--tree", "T1"], "#! DIM=1 ORBITS=2")):
        code = runs(cli_main, argv)
        out = capsys.readouterr().out
        if code != 0 or want not in out:
            bad.append(f"{' '.join(argv)} -> {code}")
    assert not bad and runs.slowest < BUDGET, (bad, runs.times)
