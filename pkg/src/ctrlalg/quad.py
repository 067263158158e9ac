"""Controlled quadratic functors on free modules, homs and presentations.

Pair generators are tuples ``(marker, a, b)``:

    Γ      ("γ", a) and ("[]", a1, a2) with a1 ≻ a2
    ∧²     ("∧", a1, a2) with a1 ≺ a2
    ⊗̂²     ("⊗̂", a1, a2) with a1 ⪯ a2 (F2 only)
    ⊗², ⊗  ("⊗", a, b), all pairs

The order is the module's generator key.  A pair sits at the meet of the two
heights and has the larger of the two sizes.
"""

from __future__ import annotations

import enum
from typing import Callable, Mapping

from .ctrlmod import (CtrlHom, FreeModule, FuncHom, Gen, ModuleMismatch, Presentation, Ring,
                      SumModule, Witness, _MinWitness, add_into)
from .tree import Vertex, meet


class QuadFunctor(enum.Enum):
    GAMMA = "gamma"
    WEDGE2 = "wedge2"
    TENSOR2 = "tensor2"
    HATSQ = "hatsq"
    TENSOR_PAIR = "tensor"

    @staticmethod
    def parse(text: str) -> "QuadFunctor":
        t = text.lower()
        for f in QuadFunctor:
            if f.value == t or f.name.lower() == t:
                return f
        raise ValueError(f"unknown functor {text!r}")


class ExplicitBasisError(ValueError):
    pass


class QuadModule(FreeModule):
    def __init__(self, functor: QuadFunctor, M: FreeModule, M2: FreeModule | None = None) -> None:
        if functor is QuadFunctor.HATSQ and M.ring is not Ring.F2:
            raise ExplicitBasisError("the explicit ⊗̂² basis exists over F2 only; use quad_fp on the mod-2 data")
        if functor is QuadFunctor.TENSOR_PAIR:
            if M2 is None:
                raise ValueError("tensor of two modules needs both")
            if M2.ring != M.ring or M2.tree != M.tree:
                raise ModuleMismatch("tensor of modules over different rings or trees")
        self.functor = functor
        self.M = M
        self.M2 = M2 if functor is QuadFunctor.TENSOR_PAIR else M
        self.ring = M.ring
        self.tree = M.tree
        sym = {QuadFunctor.GAMMA: "Γ", QuadFunctor.WEDGE2: "∧²", QuadFunctor.TENSOR2: "⊗²",
               QuadFunctor.HATSQ: "⊗̂²"}
        self.name = (f"{M.name}⊗{M2.name}" if functor is QuadFunctor.TENSOR_PAIR
                     else f"{sym[functor]}{M.name}")
        self._cache: dict[int, list[Gen]] = {}
        self._kmemo: dict[Gen, tuple] = {}
        self._hmemo: dict[Gen, Vertex] = {}

    def _lt(self, a: Gen, b: Gen) -> bool:
        return self.M.key(a) < self.M.key(b)

    def gens(self, N: int) -> list[Gen]:
        got = self._cache.get(N)
        if got is not None:
            return got
        F = self.functor
        base = self.M.gens(N)
        out: list[Gen] = []
        if F in (QuadFunctor.TENSOR2, QuadFunctor.TENSOR_PAIR):
            out = [("⊗", a, b) for a in base for b in self.M2.gens(N)]
        else:
            # base is sorted by key, so index order is the generator order
            for i, a in enumerate(base):
                if F is QuadFunctor.GAMMA:
                    out.append(("γ", a))
                    out.extend(("[]", a, b) for b in base[:i])
                elif F is QuadFunctor.WEDGE2:
                    out.extend(("∧", b, a) for b in base[:i])
                else:
                    out.extend(("⊗̂", b, a) for b in base[:i + 1])
        out.sort(key=self.key)
        self._cache[N] = out
        return out

    def _parts(self, g: Gen) -> tuple[Gen, Gen]:
        return (g[1], g[1]) if g[0] == "γ" else (g[1], g[2])

    def height(self, g: Gen) -> Vertex:
        got = self._hmemo.get(g)
        if got is None:
            a, b = self._parts(g)
            got = self._hmemo[g] = meet(self.M.height(a), self.M2.height(b))
        return got

    def size(self, g: Gen) -> int:
        a, b = self._parts(g)
        return max(self.M.size(a), self.M2.size(b))

    def key(self, g: Gen) -> tuple:
        got = self._kmemo.get(g)
        if got is None:
            v = self.height(g)
            a, b = self._parts(g)
            got = self._kmemo[g] = (v.level, v.branch, g[0], self.M.key(a), self.M2.key(b))
        return got

    def contains(self, g: Gen) -> bool:
        if not isinstance(g, tuple) or len(g) < 2:
            return False
        F, m = self.functor, g[0]
        if F is QuadFunctor.GAMMA:
            if m == "γ":
                return len(g) == 2 and self.M.contains(g[1])
            return m == "[]" and len(g) == 3 and self.M.contains(g[1]) and self.M.contains(g[2]) \
                and self._lt(g[2], g[1])
        if len(g) != 3:
            return False
        if F is QuadFunctor.WEDGE2:
            return m == "∧" and self.M.contains(g[1]) and self.M.contains(g[2]) and self._lt(g[1], g[2])
        if F is QuadFunctor.HATSQ:
            return m == "⊗̂" and self.M.contains(g[1]) and self.M.contains(g[2]) and not self._lt(g[2], g[1])
        return m == "⊗" and self.M.contains(g[1]) and self.M2.contains(g[2])

    # -- classical formulas on coefficient vectors, normalized to the basis
    def _acc(self, out: dict, g: Gen, c: int) -> None:
        v = self.ring.norm(out.get(g, 0) + c)
        if v:
            out[g] = v
        else:
            out.pop(g, None)

    def wedge(self, x: Mapping, y: Mapping) -> dict:
        out: dict = {}
        key = self.M.key
        for a, c in x.items():
            ka = key(a)
            for b, d in y.items():
                if a == b:
                    continue
                if ka < key(b):
                    self._acc(out, ("∧", a, b), c * d)
                else:
                    self._acc(out, ("∧", b, a), -c * d)
        return out

    def hat(self, x: Mapping, y: Mapping) -> dict:
        out: dict = {}
        key = self.M.key
        for a, c in x.items():
            ka = key(a)
            for b, d in y.items():
                self._acc(out, ("⊗̂", b, a) if key(b) < ka else ("⊗̂", a, b), c * d)
        return out

    def tensor(self, x: Mapping, y: Mapping) -> dict:
        out: dict = {}
        for a, c in x.items():
            for b, d in y.items():
                self._acc(out, ("⊗", a, b), c * d)
        return out

    def bracket(self, x: Mapping, y: Mapping) -> dict:
        """[x, y] in Γ: bilinear, symmetric, [a, a] = 2γ(a)."""
        out: dict = {}
        for a, c in x.items():
            for b, d in y.items():
                if a == b:
                    add_into(out, {("γ", a): 1}, 2 * c * d, self.ring)
                elif self._lt(b, a):
                    add_into(out, {("[]", a, b): 1}, c * d, self.ring)
                else:
                    add_into(out, {("[]", b, a): 1}, c * d, self.ring)
        return out

    def gamma(self, x: Mapping) -> dict:
        """γ(Σ c_a a) = Σ c_a² γ(a) + Σ_{a≻b} c_a c_b [a, b]."""
        out: dict = {}
        items = sorted(x.items(), key=lambda t: self.M.key(t[0]))
        for i, (a, c) in enumerate(items):
            add_into(out, {("γ", a): 1}, c * c, self.ring)
            for b, d in items[:i]:
                add_into(out, {("[]", a, b): 1}, c * d, self.ring)
        return out

    def pair(self, x: Mapping, y: Mapping) -> dict:
        """The cross-effect pairing F(X|Y) -> F(X ⊕ Y) -> F(X) read in one module."""
        F = self.functor
        if F is QuadFunctor.WEDGE2:
            return self.wedge(x, y)
        if F is QuadFunctor.HATSQ:
            return self.hat(x, y)
        if F is QuadFunctor.GAMMA:
            return self.bracket(x, y)
        return self.tensor(x, y)


_QUAD_CACHE: dict[tuple, tuple] = {}


def quad_free(F: QuadFunctor, M: FreeModule, M2: FreeModule | None = None) -> QuadModule:
    key = (F, id(M), id(M2))
    got = _QUAD_CACHE.get(key)
    if got is not None and got[0] is M and got[1] is M2:
        return got[2]
    Q = QuadModule(F, M, M2)
    _QUAD_CACHE[key] = (M, M2, Q)
    return Q


def _witness(*hs: CtrlHom) -> Witness | None:
    ws = [h.witness for h in hs]
    if any(w is None for w in ws):
        return None
    return ws[0] if len(ws) == 1 else _MinWitness(ws)


def quad_hom(F: QuadFunctor, h: CtrlHom, h2: CtrlHom | None = None) -> CtrlHom:
    """F applied to a hom (F(h, h2) for the tensor of two homs)."""
    if F is QuadFunctor.TENSOR_PAIR:
        if h2 is None:
            raise ValueError("tensor of homs needs two homs")
        S = quad_free(F, h.source, h2.source)
        T = quad_free(F, h.target, h2.target)
        return FuncHom(S, T, lambda g: T.tensor(h.image(g[1]), h2.image(g[2])),
                       f"{h.name}⊗{h2.name}", _witness(h, h2))
    S = quad_free(F, h.source)
    T = quad_free(F, h.target)

    def img(g: Gen) -> dict:
        m = g[0]
        if m == "γ":
            return T.gamma(h.image(g[1]))
        x, y = h.image(g[1]), h.image(g[2])
        if m == "[]":
            return T.bracket(x, y)
        if m == "∧":
            return T.wedge(x, y)
        if m == "⊗̂":
            return T.hat(x, y)
        return T.tensor(x, y)

    return FuncHom(S, T, img, f"{F.value}({h.name})", _witness(h))


def cross_term(F: QuadFunctor, h: CtrlHom) -> CtrlHom:
    """F(h | 1) i₁₂ : source(h) ⊗ target(h) -> F(target(h)), x ⊗ y ↦ pairing(h(x), y)."""
    S = quad_free(QuadFunctor.TENSOR_PAIR, h.source, h.target)
    T = quad_free(F, h.target)
    return FuncHom(S, T, lambda g: T.pair(h.image(g[1]), {g[2]: 1}), f"{F.value}({h.name}|1)",
                   _witness(h))


def quad_fp(F: QuadFunctor, P: Presentation, Q: Presentation | None = None) -> Presentation:
    """Presentation of F(coker φ): F(P1) ⊕ P1⊗P0 → F(P0) via (F(φ), F(φ|1)i₁₂)."""
    phi = P.relations
    if F is QuadFunctor.TENSOR_PAIR:
        if Q is None:
            raise ValueError("tensor of presentations needs two presentations")
        psi = Q.relations
        T = quad_free(F, P.P0, Q.P0)
        left = quad_free(F, P.P1, Q.P0)
        right = quad_free(F, P.P0, Q.P1)
        src = SumModule([left, right], f"({left.name} + {right.name})")

        def img(g: Gen) -> dict:
            k, (_, a, b) = g
            if k == 0:
                return T.tensor(phi.image(a), {b: 1})
            return T.tensor({a: 1}, psi.image(b))

        return Presentation(FuncHom(src, T, img, f"rel({P.name}⊗{Q.name})", _witness(phi, psi)),
                            f"{P.name}⊗{Q.name}")
    if F is QuadFunctor.HATSQ and P.ring is not Ring.F2:
        raise ExplicitBasisError("⊗̂² over Z is not explicit; reduce the presentation mod 2 first")
    Fphi = quad_hom(F, phi)
    cross = cross_term(F, phi)
    src = SumModule([Fphi.source, cross.source], f"({Fphi.source.name} + {cross.source.name})")
    T = Fphi.target

    def img2(g: Gen) -> dict:
        k, inner = g
        return (Fphi if k == 0 else cross).image(inner)

    sym = {QuadFunctor.GAMMA: "gamma", QuadFunctor.WEDGE2: "wedge2", QuadFunctor.TENSOR2: "tensor2",
           QuadFunctor.HATSQ: "hatsq"}[F]
    return Presentation(FuncHom(src, T, img2, f"rel({sym}({P.name}))", _witness(phi)), f"{sym}({P.name})")


# ---------------------------------------------------------------- natural transformations

NAT_NAMES = ("tau", "sigma", "q", "bracket", "tau_bar", "sigma_bar", "q_bar", "tau_retraction")


def nat_trans(name: str, M: FreeModule) -> CtrlHom:
    G = quad_free(QuadFunctor.GAMMA, M) if name in ("tau", "sigma", "bracket", "tau_retraction") else None
    T2 = quad_free(QuadFunctor.TENSOR2, M)
    wit = Witness.parse("m")

    def need_f2() -> None:
        if M.ring is not Ring.F2:
            raise ValueError(f"{name} is defined over F2 here; reduce the module mod 2 first")

    if name == "tau":
        def img(g: Gen) -> dict:
            if g[0] == "γ":
                return {("⊗", g[1], g[1]): 1}
            return T2.tensor({g[1]: 1}, {g[2]: 1}) | T2.tensor({g[2]: 1}, {g[1]: 1})
        return FuncHom(G, T2, img, "tau", wit)
    if name == "tau_retraction":
        # a1 ≺ a2: a1⊗a2 ↦ 0, a2⊗a1 ↦ [a2, a1], a⊗a ↦ γ(a)
        def img(g: Gen) -> dict:
            a, b = g[1], g[2]
            if a == b:
                return {("γ", a): 1}
            return {("[]", a, b): 1} if G._lt(b, a) else {}
        return FuncHom(T2, G, img, "tau_retraction", wit)
    if name == "sigma":
        need_f2()
        return FuncHom(G, M, lambda g: {g[1]: 1} if g[0] == "γ" else {}, "sigma", wit)
    if name == "q":
        W = quad_free(QuadFunctor.WEDGE2, M)
        return FuncHom(T2, W, lambda g: W.wedge({g[1]: 1}, {g[2]: 1}), "q", wit)
    if name == "bracket":
        return FuncHom(T2, G, lambda g: G.bracket({g[1]: 1}, {g[2]: 1}), "bracket", wit)
    if name == "tau_bar":
        need_f2()
        H = quad_free(QuadFunctor.HATSQ, M)
        return FuncHom(M, H, lambda g: {("⊗̂", g, g): 1}, "tau_bar", wit)
    if name == "sigma_bar":
        need_f2()
        H = quad_free(QuadFunctor.HATSQ, M)
        return FuncHom(T2, H, lambda g: H.hat({g[1]: 1}, {g[2]: 1}), "sigma_bar", wit)
    if name == "q_bar":
        need_f2()
        H = quad_free(QuadFunctor.HATSQ, M)
        W = quad_free(QuadFunctor.WEDGE2, M)
        return FuncHom(H, W, lambda g: W.wedge({g[1]: 1}, {g[2]: 1}), "q_bar", wit)
    raise ValueError(f"unknown natural transformation {name!r}; expected one of {', '.join(NAT_NAMES)}")


def tau_bar_fp(P: Presentation) -> tuple[Presentation, Callable[[Gen], Gen]]:
    """⊗̂²P with the generator-level formula of τ̄ on P0 (a ↦ a⊗̂a)."""
    Q = quad_fp(QuadFunctor.HATSQ, P)
    return Q, lambda a: ("⊗̂", a, a)
