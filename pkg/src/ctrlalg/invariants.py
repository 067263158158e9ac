"""Splitting of τ̄, cup-product detection, co-H obstruction and Moore-space counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ctrlmod import (DEFAULT_WINDOWS, Presentation, Ring, StabilizationReport, _check_windows,
                      tensor_mod2)
from .dsl import parse_file
from .homext import Extra, ext1_dim, parse_ansatz, replay_certificate, solve_columns, verify_columns
from .linalg import nullspace, rank, sparse_solve_affine
from .nil2 import (Coboundary, Nil2Hom, NotCoboundary, cup_cocycle, extract_theta, is_coboundary)
from .quad import QuadFunctor, quad_fp
from .quiver import FIXTURES, Decomposition, NSubspace, decompose_fp_module, from_decl


@dataclass
class Split:
    witness: dict  # generator of ⊗̂²P0 -> set of generators of P0
    window: int
    trace: dict
    replayed: int | None = None  # fresh window the witness was replayed on


@dataclass
class NotSplit:
    certificate: list
    window: int
    trace: dict


@dataclass
class Indeterminate:
    trace: dict


# ---------------------------------------------------------------- τ̄ splitting


@dataclass
class TauSystem:
    """s∘τ̄ = id as a column problem on the reduced window of ⊗̂²P: the
    relations of ⊗̂²P map to 0 and each a⊗̂a maps to a."""

    source: Presentation
    target: Presentation

    def extra(self, N: int) -> dict:
        H = self.source.P0
        out = {}
        for a in self.target.P0.gens(N):
            g = ("⊗̂", a, a)
            out[("tau", a)] = Extra(frozenset((g,)), frozenset((a,)), H.height(g), H.size(g))
        return out

    def solve(self, N: int, ansatz: str):
        return solve_columns(self.source, self.target, N, {}, ansatz, self.extra(N), reduce=True)

    def verify(self, N: int, s: dict, fresh: int, ansatz: str) -> list:
        return verify_columns(self.source, self.target, N, {}, s, fresh, ansatz, self.extra(N), reduce=True)

    def replay(self, N: int, cert: list, ansatz: str) -> bool:
        return replay_certificate(self.source, self.target, N, {}, cert, ansatz, self.extra(N), reduce=True)


def tau_system(P: Presentation) -> TauSystem:
    if P.ring is not Ring.F2:
        P = tensor_mod2(P)
    return TauSystem(quad_fp(QuadFunctor.HATSQ, P), P)


def tau_bar_split(P: Presentation, windows: Sequence[int] = DEFAULT_WINDOWS, ansatz: str | None = None,
                  replay: bool = True):
    """Search a retraction s of τ̄: P → ⊗̂²P, a ↦ a⊗̂a, window by window.

    The witness maps generators of the reduced ⊗̂²P window to generators of P.
    A Split witness from the last window is replayed against a fresh target
    window of twice the size; a failed replay demotes the verdict to Indeterminate.
    """
    ans = parse_ansatz(ansatz)
    sy = tau_system(P)
    trace, last = {}, None
    for N in _check_windows(windows):
        status, data = sy.solve(N, ans)
        trace[N] = status
        last = (status, data, N)
    statuses = set(trace.values())
    if statuses == {"ok"}:
        _, s, N = last
        if not replay:
            return Split(s, N, trace)
        bad = sy.verify(N, s, 2 * N, ans)
        trace["replay"] = "ok" if not bad else f"failed on {len(bad)} equations"
        return Split(s, N, trace, 2 * N) if not bad else Indeterminate(trace)
    if statuses == {"cert"}:
        return NotSplit(last[1], last[2], trace)
    return Indeterminate(trace)


def replay_split_certificate(P: Presentation, verdict: NotSplit, ansatz: str | None = None) -> bool:
    return tau_system(P).replay(verdict.window, verdict.certificate, parse_ansatz(ansatz))


# ---------------------------------------------------------------- the finite-dimensional case


def hat_square(V: NSubspace) -> tuple[list[tuple[int, int]], list[list[int]]]:
    """⊗̂² of an n-subspace: basis pairs (i, j), i ≤ j, of ⊗̂²V0 and spanning bitmasks of each ⊗̂²V_k."""
    d = V.dim0
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    idx = {p: t for t, p in enumerate(pairs)}

    def hat(a: int, b: int) -> int:
        out = 0
        for i in range(d):
            if a >> i & 1:
                for j in range(d):
                    if b >> j & 1:
                        out ^= 1 << idx[(min(i, j), max(i, j))]
        return out

    arms = []
    for cols in V.arms:
        arms.append([hat(a, b) for x, a in enumerate(cols) for b in cols[x:]])
    return pairs, arms


def finite_tau_split(V: NSubspace):
    """Retraction s: ⊗̂²V → V of v ↦ v⊗̂v as a morphism of n-subspaces.

    Unknowns are the entries s[p][k] (pair p of ⊗̂²V0, coordinate k of V0);
    s(e_k⊗̂e_k) = e_k and, for each arm, every functional vanishing on V_i
    vanishes on s(⊗̂²V_i).
    """
    rows, rhs, labels = _finite_tau_rows(V)
    x, cert = sparse_solve_affine(rows, rhs)
    if x is None:
        return NotSplit([labels[i] for i in sorted(cert)], 0, {0: "cert"})
    pairs, _ = hat_square(V)
    d = V.dim0
    s = {pairs[p]: sum(1 << k for k in range(d) if p * d + k in x) for p in range(len(pairs))}
    return Split(s, 0, {0: "ok"})


def _finite_tau_rows(V: NSubspace):
    d = V.dim0
    pairs, arms = hat_square(V)
    rows, rhs, labels = [], [], []
    for k in range(d):
        p = pairs.index((k, k))
        for c in range(d):
            rows.append({p * d + c})
            rhs.append(int(c == k))
            labels.append(("tau", k, c))
    for i, (cols, spans) in enumerate(zip(V.arms, arms), 1):
        for phi in nullspace(list(cols), d):
            for t, w in enumerate(spans):
                row = {p * d + c for p in range(len(pairs)) if w >> p & 1 for c in range(d) if phi >> c & 1}
                rows.append(row)
                rhs.append(0)
                labels.append(("arm", i, t, phi))
    return rows, rhs, labels


def replay_finite_certificate(V: NSubspace, verdict: NotSplit) -> bool:
    """The named equations, rebuilt from V, have zero left side and right side 1."""
    rows, rhs, labels = _finite_tau_rows(V)
    by = dict(zip(labels, zip(rows, rhs)))
    if not verdict.certificate or any(lab not in by for lab in verdict.certificate):
        return False
    lhs: set = set()
    tot = 0
    for lab in set(verdict.certificate):
        r, c = by[lab]
        lhs ^= r
        tot ^= c
    return not lhs and tot == 1


def check_finite_retraction(V: NSubspace, s: dict) -> bool:
    pairs, arms = hat_square(V)
    d = V.dim0

    def apply(w: int) -> int:
        out = 0
        for p, pr in enumerate(pairs):
            if w >> p & 1:
                out ^= s[pr]
        return out

    if any(s[(k, k)] != 1 << k for k in range(d)):
        return False
    return all(rank([*cols, apply(w)]) == rank(list(cols)) for cols, spans in zip(V.arms, arms) for w in spans)


def herculillo7() -> NSubspace:
    ws = parse_file(FIXTURES / "herculillo7.calg")
    return from_decl(ws.subspaces["herculillo7"])


def seven_subspace_not_split():
    return finite_tau_split(herculillo7())


# ---------------------------------------------------------------- cup product and co-H


@dataclass
class CupVerdict:
    value: bool | None  # None when the decomposition is ambiguous
    decomposition: Decomposition

    def __bool__(self) -> bool:
        if self.value is None:
            raise ValueError(f"cup_nonzero is indeterminate: {self.decomposition.residual}")
        return self.value


def cup_nonzero(P: Presentation, windows: Sequence[int] | None = None) -> CupVerdict:
    """Nonvanishing of the mod-2 chain cup product with H_n ⊗ Z/2 = P: an MV(3,5) summand."""
    if P.tree.n_ends != 3:
        raise ValueError("the cup-product criterion is stated for trees with 3 ends")
    if P.ring is not Ring.F2:
        P = tensor_mod2(P)
    dec = decompose_fp_module(P, windows)
    sols = dec.solutions
    if not sols:
        return CupVerdict(None, dec)
    hits = {sol.get("MV(3,5)", 0) > 0 for sol in sols}
    return CupVerdict(hits.pop() if len(hits) == 1 else None, dec)


@dataclass
class Vanishes:
    xi: dict
    trace: dict


@dataclass
class Obstructed:
    certificate: list
    cocycle: object
    trace: dict


def coH_obstruction(d_top: Nil2Hom, d_mid: Nil2Hom, H: Presentation,
                    windows: Sequence[int] = (16, 32, 64), ansatz: str | None = None):
    """ϑ from the two lifts, pushed into ∧²(H ⊗ Z/2); Vanishes iff it is a coboundary."""
    theta = extract_theta(d_top, d_mid)
    cocycle, target = cup_cocycle(theta, H)
    got = is_coboundary(cocycle, d_top.abelianization(), target, windows, ansatz)
    if isinstance(got, Coboundary):
        return Vanishes(got.xi, got.trace)
    if isinstance(got, NotCoboundary):
        return Obstructed(got.certificate, cocycle, got.trace)
    return Indeterminate(got.trace)


# ---------------------------------------------------------------- Moore spaces


@dataclass
class MooreReport:
    ext: StabilizationReport
    orbit_count: int | None
    note: str = ""

    @property
    def dims(self) -> dict:
        return self.ext.dims


def moore_count(P: Presentation, windows: Sequence[int] = DEFAULT_WINDOWS, k: int = 3) -> MooreReport:
    """d = dim Ext¹(P, P) over F2 and the number of Aut(P)-orbits on it when d ≤ 1.

    Aut(P) acts linearly on the Ext group, so zero is a fixed orbit and, for
    d = 1, the single nonzero class is a second one.  Larger d needs the
    action itself and is reported as dimension only.
    """
    if P.tree.n_ends > 3:
        raise NotImplementedError("Moore counts use the classification for at most 3 ends")
    if P.ring is not Ring.F2:
        P = tensor_mod2(P)
    rep = ext1_dim(P, P, windows, k=k)
    if rep.verdict != "Stable":
        return MooreReport(rep, None, f"Ext¹ is {rep.verdict}; orbit count skipped")
    d = rep.value
    if d <= 1:
        return MooreReport(rep, 1 + d)
    return MooreReport(rep, None, f"orbit count for dim {d} needs the automorphism action")
