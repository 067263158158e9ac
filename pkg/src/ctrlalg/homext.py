"""Window Hom and Ext¹ between presented modules over F2.

A map of presentations is described column by column: each generator a of the
source (reduced window) is sent to a combination of target generators.  The
columns are constrained by a band:

* near the root (level at most N/2) a column may use every target generator;
* a deeper column at level l and size s uses only target generators on the
  same branch with level >= l/2 and size <= 2s + 2 ("banded" ansatz), or
  nothing at all ("finite" ansatz).

Relations of the source (other than the finitely many touching a near-root
column) are allowed to land in the span of the target
relations within a wider band (level >= l/4, size <= 4s + 4).  Columns are
taken modulo the target relations of their own band, which is how controlled
homotopies are factored out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ctrlmod import (DEFAULT_WINDOWS, Presentation, StabilizationReport, _check_windows,
                      gen_str, stabilize)
from .linalg import Echelon, nullspace, sparse_solve_affine
from .tree import Vertex
from .window import WPres, window

ALL = ("all",)
BANDED = "banded"
FINITE = "finite"


def parse_ansatz(text: str | None) -> str:
    if text is None or text in ("banded", "periodic") or text.startswith("periodic:"):
        return BANDED
    if text in ("finite", "FiniteSupport"):
        return FINITE
    raise ValueError(f"unknown ansatz {text!r} (expected finite or periodic:p)")


class Target:
    """Quotient coordinates of a target window presentation, cached per band."""

    def __init__(self, W: WPres) -> None:
        self.W = W
        self.idx = {g: i for i, g in enumerate(W.gens)}
        self.rvec = {r: self.vec(c) for r, c in W.rels.items()}
        self._ech: dict[tuple, Echelon] = {}
        self._allowed: dict[tuple, list[int]] = {}
        self._quot: dict[tuple, list[int]] = {}
        self._red: dict[tuple, dict[int, int]] = {}
        self.width = len(W.gens)

    def vec(self, gens) -> int:
        v = 0
        for g in gens:
            v ^= 1 << self.idx[g]
        return v

    def _inside(self, key: tuple, p: Vertex, s: int) -> bool:
        if key is ALL:
            return True
        if key is None:
            return False
        branch, lo, hi = key
        return p.branch == branch and p.level >= lo and s <= hi

    def allowed(self, key: tuple) -> list[int]:
        got = self._allowed.get(key)
        if got is None:
            W = self.W
            got = [1 << self.idx[g] for g in W.gens if self._inside(key, W.pos[g], W.size[g])]
            self._allowed[key] = got
        return got

    def rel_echelon(self, key: tuple) -> Echelon:
        got = self._ech.get(key)
        if got is None:
            got = Echelon()
            W = self.W
            for r, v in self.rvec.items():
                if self._inside(key, W.rpos[r], W.rsize[r]):
                    got.add(v)
            self._ech[key] = got
        return got

    def quotient_basis(self, key: tuple) -> list[int]:
        """Representatives of a basis of span(allowed)/relations(key)."""
        got = self._quot.get(key)
        if got is None:
            ech = self.rel_echelon(key)
            seen = Echelon()
            got = []
            for v in self.allowed(key):
                red = ech.reduce(v)[0]
                if red and seen.add(red) is True:
                    got.append(red)
            self._quot[key] = got
        return got

    def reduce(self, key: tuple, v: int) -> int:
        memo = self._red.setdefault(key, {})
        got = memo.get(v)
        if got is None:
            got = memo[v] = self.rel_echelon(key).reduce(v)[0]
        return got


def gband(p: Vertex, s: int, N: int, ansatz: str):
    if p.level <= N // 2:
        return ALL
    if ansatz == FINITE:
        return None
    return (p.branch, p.level // 2, min(N, 2 * s + 2))


def hband(p: Vertex, s: int, N: int, ansatz: str, touches_prefix: bool = False):
    # relations meeting a near-root column may also be lifted freely: finitely many
    if p.level <= N // 2 or touches_prefix:
        return ALL
    if ansatz == FINITE:
        return None
    return (p.branch, p.level // 4, min(N, 4 * s + 4))


def rel_band(S: WPres, r, ansatz: str):
    K = S.N // 2
    touches = any(S.pos[a].level <= K for a in S.rels[r])
    return hband(S.rpos[r], S.rsize[r], S.N, ansatz, touches)


@dataclass
class Unknowns:
    """Column unknowns: (source generator, target vector) pairs."""

    cols: list  # source generator per unknown
    vecs: list[int]
    by_gen: dict


def _unknowns(S: WPres, T: Target, ansatz: str, full: bool = False) -> Unknowns:
    cols, vecs, by_gen = [], [], {}
    for a in S.gens:
        key = gband(S.pos[a], S.size[a], S.N, ansatz)
        if key is None:
            continue
        basis = T.allowed(key) if full else T.quotient_basis(key)
        ids = []
        for v in basis:
            ids.append(len(cols))
            cols.append(a)
            vecs.append(v)
        by_gen[a] = ids
    return Unknowns(cols, vecs, by_gen)


def _cycle_rows(S: WPres, T: Target, U: Unknowns, ansatz: str) -> list[int]:
    """Rows over the unknowns expressing: every source relation lands in the
    target relations of its band."""
    rows: list[int] = []
    for r, col in S.rels.items():
        key = rel_band(S, r, ansatz)
        per_bit: dict[int, int] = {}
        for a in col:
            for u in U.by_gen.get(a, ()):
                w = T.reduce(key, U.vecs[u]) if key is not None else U.vecs[u]
                while w:
                    low = w & -w
                    per_bit[low] = per_bit.get(low, 0) ^ (1 << u)
                    w ^= low
        rows.extend(v for v in per_bit.values() if v)
    return rows


@dataclass
class HomWindow:
    dim: int
    maps: list[dict]  # each map: source generator -> set of target generators


def hom_window(M: Presentation, N_: Presentation, N: int, ansatz: str = BANDED,
               want_maps: bool = False) -> HomWindow:
    S = window(M, N)
    T = Target(window(N_, N))
    U = _unknowns(S, T, ansatz)
    rows = _cycle_rows(S, T, U, ansatz)
    n = len(U.cols)
    if not want_maps:
        from .linalg import rank

        return HomWindow(n - rank(rows), [])
    ns = nullspace(rows, n)
    maps = []
    gl = T.W.gens
    for x in ns:
        m: dict = {}
        while x:
            low = x & -x
            u = low.bit_length() - 1
            a = U.cols[u]
            m[a] = m.get(a, 0) ^ U.vecs[u]
            x ^= low
        maps.append({a: {gl[i] for i in range(T.width) if v >> i & 1} for a, v in m.items() if v})
    return HomWindow(len(ns), maps)


def ext_window(M: Presentation, N_: Presentation, N: int, ansatz: str = BANDED) -> tuple[int, list[dict]]:
    """dim of (relation cochains mod target relations) / (restrictions of columns).

    Returns the dimension and representative cochains (relation -> target generators).
    """
    S = window(M, N)
    T = Target(window(N_, N))
    rel_ids = list(S.rels)
    width = T.width
    slot = {r: i * width for i, r in enumerate(rel_ids)}
    keys = {r: rel_band(S, r, ansatz) for r in rel_ids}
    gen_rels: dict = {}
    for r, col in S.rels.items():
        for a in col:
            gen_rels.setdefault(a, []).append(r)
    im = Echelon()
    for a in S.gens:
        key = gband(S.pos[a], S.size[a], N, ansatz)
        if key is None or a not in gen_rels:
            continue
        for v in T.allowed(key):
            tot = 0
            for r in gen_rels[a]:
                if keys[r] is None:
                    continue
                tot |= T.reduce(keys[r], v) << slot[r]
            if tot:
                im.add(tot)
    base = len(im)
    reps = []
    for r in rel_ids:
        if keys[r] is None:
            continue
        for y in T.quotient_basis(keys[r]):
            if im.add(y << slot[r]) is True:
                reps.append({r: {T.W.gens[i] for i in range(width) if y >> i & 1}})
    return len(im) - base, reps


def hom_space(M: Presentation, N_: Presentation, windows: Sequence[int] = DEFAULT_WINDOWS,
              ansatz: str | None = None, k: int = 3, want_maps: bool = False) -> StabilizationReport:
    ans = parse_ansatz(ansatz)
    dims, maps = {}, {}
    ws = _check_windows(windows)
    for N in ws:
        hw = hom_window(M, N_, N, ans, want_maps=want_maps and N == ws[-1])
        dims[N] = hw.dim
        if hw.maps:
            maps[N] = hw.maps
    return stabilize(dims, k, {"maps": maps, "ansatz": ans})


def ext1_dim(M: Presentation, N_: Presentation, windows: Sequence[int] = DEFAULT_WINDOWS,
             ansatz: str | None = None, k: int = 3, check_injective: bool = True) -> StabilizationReport:
    ans = parse_ansatz(ansatz)
    ws = _check_windows(windows)
    if check_injective:
        require_injective(M, ws[-1])
    dims, reps = {}, {}
    for N in ws:
        d, rp = ext_window(M, N_, N, ans)
        dims[N] = d
        reps[N] = rp
    return stabilize(dims, k, {"cochains": reps, "ansatz": ans})


class NotInjective(ValueError):
    pass


def require_injective(P: Presentation, N: int) -> None:
    if P.injectivity_checked_to >= N:
        return
    from .ctrlmod import Ring, kernel_basis, tensor_mod2

    rel = P.relations if P.ring is Ring.F2 else tensor_mod2(P.relations)
    # kernel windows use interior columns only; one window at the top size suffices
    rep = kernel_basis(rel, [max(4, N // 4), max(5, N // 2), N])
    if rep.dims[N] != 0:
        bad = rep.extra["vectors"][N][0]
        raise NotInjective(f"relations of {P.name} have a window kernel, e.g. "
                           + " + ".join(gen_str(g) for g in bad) + "; see kernel_basis")
    P.injectivity_checked_to = N


@dataclass
class Extra:
    """An additional equation g(vec) = rhs, banded like a relation at (pos, size)."""

    vec: frozenset  # source window generators
    rhs: frozenset  # target generators
    pos: Vertex
    size: int


@dataclass
class ColumnSystem:
    rows: list[set]  # unknown ids per equation
    rhs: list[int]
    labels: list  # (equation label, target generator) per equation
    unknowns: Unknowns
    target: Target
    source: WPres


def _equations(S: WPres, rhs: dict, extra: dict, ansatz: str):
    """(label, column generators, rhs generators, band) for relations then extras."""
    for r, col in S.rels.items():
        yield r, col, rhs.get(r, ()), rel_band(S, r, ansatz)
    K = S.N // 2
    for lab, e in extra.items():
        if not all(g in S.pos for g in e.vec):
            continue  # the equation leaves the window
        col = S.nf(e.vec)
        touches = any(S.pos[a].level <= K for a in col)
        yield lab, col, e.rhs, hband(e.pos, e.size, S.N, ansatz, touches)


def column_system(M: Presentation, N_: Presentation, N: int, rhs: dict, ansatz: str = BANDED,
                  extra: dict | None = None, reduce: bool = False) -> ColumnSystem:
    """Equations (g o relations)(r) = rhs[r], plus g(vec) = rhs for each extra,
    modulo the target relations of the equation's band.

    With reduce the source window is Tietze-reduced first; rhs must then be
    empty, since reduced relations are combinations of the original ones.
    """
    if reduce and rhs:
        raise ValueError("relation right-hand sides need the unreduced source window")
    S = window(M, N, reduce=reduce)
    TW = window(N_, N)
    T = Target(TW)
    U = _unknowns(S, T, ansatz, full=True)
    rows, rhs_bits, labels = [], [], []
    for r, col, want, key in _equations(S, rhs, extra or {}, ansatz):
        per_bit: dict[int, set] = {}
        for a in col:
            for u in U.by_gen.get(a, ()):
                w = T.reduce(key, U.vecs[u]) if key is not None else U.vecs[u]
                while w:
                    low = w & -w
                    per_bit.setdefault(low, set()).symmetric_difference_update((u,))
                    w ^= low
        target = T.vec(TW.nf(want))
        target = T.reduce(key, target) if key is not None else target
        bits_ = {b for b, us in per_bit.items() if us}
        t = target
        while t:
            low = t & -t
            bits_.add(low)
            t ^= low
        for low in sorted(bits_):
            rows.append(per_bit.get(low, set()))
            rhs_bits.append(1 if target & low else 0)
            labels.append((r, TW.gens[low.bit_length() - 1]))
    return ColumnSystem(rows, rhs_bits, labels, U, T, S)


def solve_columns(M: Presentation, N_: Presentation, N: int, rhs: dict, ansatz: str = BANDED,
                  extra: dict | None = None, reduce: bool = False):
    """Find columns g with (g o relations)(r) = rhs[r] (and g(vec) = rhs for extras)
    modulo the target relations of each equation's band.

    Returns ("ok", g) with g: source window generator -> set of reduced target
    generators, or ("cert", [(label, target generator), ...]) naming equations
    whose sum reads 0 = 1.
    """
    sy = column_system(M, N_, N, rhs, ansatz, extra, reduce)
    x, cert = sparse_solve_affine(sy.rows, sy.rhs)
    if x is None:
        return "cert", [sy.labels[i] for i in sorted(cert)]
    U, T = sy.unknowns, sy.target
    g: dict = {}
    for u in x:
        g[U.cols[u]] = g.get(U.cols[u], 0) ^ U.vecs[u]
    gl = T.W.gens
    return "ok", {a: {gl[i] for i in range(T.width) if v >> i & 1} for a, v in g.items() if v}


def replay_certificate(M: Presentation, N_: Presentation, N: int, rhs: dict, cert: list,
                       ansatz: str = BANDED, extra: dict | None = None, reduce: bool = False) -> bool:
    """True iff the named equations, rebuilt from scratch, sum to 0 = 1."""
    sy = column_system(M, N_, N, rhs, ansatz, extra, reduce)
    want = set(cert)
    if len(want) != len(cert):
        return False
    lhs: set = set()
    tot, seen = 0, 0
    for lab, row, c in zip(sy.labels, sy.rows, sy.rhs):
        if lab in want:
            lhs ^= row
            tot ^= c
            seen += 1
    return seen == len(want) and not lhs and tot == 1


def verify_columns(M: Presentation, N_: Presentation, N: int, rhs: dict, g: dict, fresh: int,
                   ansatz: str = BANDED, extra: dict | None = None, reduce: bool = False) -> list:
    """Replay a column solution found at window N against a fresh target window.

    Every equation imposed at window N must hold modulo the span of all target
    relations at window `fresh` >= N.  Returns the labels of failing equations.
    """
    if fresh < N:
        raise ValueError("replay window must not be smaller than the solving window")
    S = window(M, N, reduce=reduce)
    TW = window(N_, fresh)
    T = Target(TW)
    ech = T.rel_echelon(ALL)
    bad = []
    for lab, col, want, key in _equations(S, rhs, extra or {}, ansatz):
        if key is None:
            continue
        v = T.vec(TW.nf(want))
        for a in col:
            v ^= T.vec(TW.nf(g.get(a, ())))
        if ech.reduce(v)[0]:
            bad.append(lab)
    return bad
