"""Free controlled groups of nilpotency class 2 and the chain cup-product cocycle.

An element is stored in normal form (u, c): u is the abelian part, a Z-combination
of generators, and c is central, a Z-combination of the ∧² basis a∧b (a ≺ b).  The
element u = Σ n_i a_i (a_1 ≺ a_2 ≺ ...) stands for the ordered product
a_1^{n_1} a_2^{n_2} ...; collecting a product of two such words gives

    (u, c)(v, d) = (u + v, c + d + β(u, v)),   β(u, v) = Σ_{a ≻ b} u_a v_b [a, b],

with [x, y] = -x - y + x + y and [a, b] = a∧b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .ctrlmod import (CtrlHom, FreeModule, FuncHom, Gen, IncompleteRules,
                      Presentation, Ring, Term, Witness, gen_str, tensor_mod2, vec_str)
from .homext import BANDED, FINITE, solve_columns
from .quad import QuadFunctor, quad_free, quad_fp


class NotAChainComplex(ValueError):
    def __init__(self, generator: Gen, residue: dict) -> None:
        super().__init__(f"abelianized composite is nonzero on {gen_str(generator)}: {vec_str(residue)}")
        self.generator = generator
        self.residue = residue


def _clean(d: Mapping) -> dict:
    return {k: v for k, v in d.items() if v}


def _add(x: Mapping, y: Mapping, s: int = 1) -> dict:
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, 0) + s * v
    return _clean(out)


@dataclass(frozen=True)
class Nil2Element:
    abelian: tuple  # sorted ((gen, coef), ...)
    comm: tuple  # sorted ((wedge gen, coef), ...)

    @property
    def ab(self) -> dict:
        return dict(self.abelian)

    @property
    def c(self) -> dict:
        return dict(self.comm)

    def is_identity(self) -> bool:
        return not self.abelian and not self.comm

    def __str__(self) -> str:
        if self.is_identity():
            return "0"
        parts = []
        if self.abelian:
            parts.append(vec_str(dict(self.abelian)))
        if self.comm:
            parts.append("(" + vec_str(dict(self.comm)) + ")")
        return " + ".join(parts)


class Nil2Group:
    """The free nil-2 group on the generators of a free controlled module."""

    def __init__(self, basis_module: FreeModule) -> None:
        if basis_module.ring is not Ring.INT:
            basis_module = basis_module.with_ring(Ring.INT) if hasattr(basis_module, "with_ring") else basis_module
        self.M = basis_module
        self.wedge = quad_free(QuadFunctor.WEDGE2, basis_module)

    def element(self, abelian: Mapping, comm: Mapping | None = None) -> Nil2Element:
        key = self.M.key
        ab = tuple(sorted(_clean(abelian).items(), key=lambda kv: key(kv[0])))
        cm = tuple(sorted(_clean(comm or {}).items(), key=lambda kv: self.wedge.key(kv[0])))
        return Nil2Element(ab, cm)

    def identity(self) -> Nil2Element:
        return Nil2Element((), ())

    def gen(self, g: Gen) -> Nil2Element:
        if not self.M.contains(g):
            raise ValueError(f"{gen_str(g)} is not a generator of {self.M.name}")
        return self.element({g: 1})

    def beta(self, u: Mapping, v: Mapping) -> dict:
        """Σ_{a ≻ b} u_a v_b a∧b (collection cocycle)."""
        key = self.M.key
        out: dict = {}
        for a, x in u.items():
            ka = key(a)
            for b, y in v.items():
                if ka > key(b):
                    for w, s in self.wedge.wedge({a: 1}, {b: 1}).items():
                        out[w] = out.get(w, 0) + s * x * y
        return _clean(out)

    def mul(self, x: Nil2Element, y: Nil2Element) -> Nil2Element:
        u, v = x.ab, y.ab
        c = _add(_add(x.c, y.c), self.beta(u, v))
        return self.element(_add(u, v), c)

    def power(self, x: Nil2Element, n: int) -> Nil2Element:
        u = x.ab
        b = self.beta(u, u)
        c = _add({k: n * v for k, v in x.c.items()}, {k: n * (n - 1) // 2 * v for k, v in b.items()})
        return self.element({k: n * v for k, v in u.items()}, c)

    def inverse(self, x: Nil2Element) -> Nil2Element:
        return self.power(x, -1)

    def commutator(self, x: Nil2Element, y: Nil2Element) -> Nil2Element:
        """[x, y] = -x - y + x + y."""
        return self.prod([self.inverse(x), self.inverse(y), x, y])

    def prod(self, xs: Iterable[Nil2Element]) -> Nil2Element:
        out = self.identity()
        for x in xs:
            out = self.mul(out, x)
        return out

    def word(self, letters: Sequence[tuple[int, Gen]]) -> Nil2Element:
        """g_1^{e_1} g_2^{e_2} ... read left to right."""
        return self.prod(self.power(self.gen(g), e) for e, g in letters)

    def abelianize(self, x: Nil2Element) -> dict:
        return x.ab

    def central(self, comm: Mapping) -> Nil2Element:
        return self.element({}, comm)


class Nil2Hom:
    """A homomorphism of free nil-2 groups given by words on generators."""

    def __init__(self, source: Nil2Group, target: Nil2Group, fn, name: str = "h",
                 witness: Witness | None = None) -> None:
        self.source, self.target = source, target
        self.fn = fn
        self.name = name
        self.witness = witness
        self._cache: dict = {}

    def on_gen(self, g: Gen) -> Nil2Element:
        got = self._cache.get(g)
        if got is None:
            got = self._cache[g] = self.fn(g)
        return got

    def ab_image(self, g: Gen) -> dict:
        return self.on_gen(g).ab

    def abelianization(self) -> CtrlHom:
        return FuncHom(self.source.M, self.target.M, self.ab_image, f"ab({self.name})", self.witness)


def apply(h: Nil2Hom, x: Nil2Element) -> Nil2Element:
    """Multiplicative extension: h(Π a_i^{n_i} · c) = Π h(a_i)^{n_i} · ∧²(ab h)(c)."""
    T = h.target
    out = T.prod(T.power(h.on_gen(g), n) for g, n in x.abelian)
    if x.comm:
        img: dict = {}
        for w, s in x.comm:
            _, a, b = w
            for k, v in T.wedge.wedge(h.ab_image(a), h.ab_image(b)).items():
                img[k] = img.get(k, 0) + s * v
        out = T.mul(out, T.central(img))
    return out


def from_decl(decl, source: Nil2Group | None = None, target: Nil2Group | None = None) -> Nil2Hom:
    """Nil2Hom from a parsed `nil2` declaration (words read left to right)."""
    S = source or Nil2Group(decl.source)
    T = target or Nil2Group(decl.target)
    rules: dict[str, list] = {}
    for r in decl.rules:
        rules.setdefault(r.label, []).append(r)
    tgt = decl.target

    def resolve(t: Term, idx: tuple) -> Gen:
        if not t.args and t.label in tgt.roots:
            g = (t.label,)
        else:
            g = (t.label, *(a(*idx) for a in t.args))
        if not tgt.contains(g):
            raise IncompleteRules(f"nil2 {decl.name}: word letter {gen_str(g)} is not a generator of {tgt.name}")
        return g

    def fn(g: Gen) -> Nil2Element:
        if g in decl.exceptions:
            return T.word([(t.coef, resolve(t, ())) for t in decl.exceptions[g]])
        hits = [r for r in rules.get(g[0], []) if r.guard(*g[1:])]
        if len(hits) != 1:
            raise IncompleteRules(f"nil2 {decl.name}: {'no rule' if not hits else 'several rules'} "
                                  f"match {gen_str(g)}")
        return T.word([(t.coef, resolve(t, g[1:])) for t in hits[0].word])

    return Nil2Hom(S, T, fn, decl.name, decl.witness)


# ---------------------------------------------------------------- the quadratic obstruction


def theta_value(d_top: Nil2Hom, d_mid: Nil2Hom, g: Gen) -> dict:
    x = apply(d_mid, d_top.on_gen(g))
    if x.abelian:
        raise NotAChainComplex(g, x.ab)
    return x.c


def extract_theta(d_top: Nil2Hom, d_mid: Nil2Hom, check_window: int = 16) -> CtrlHom:
    """ϑ: C_{n+2} → ∧² C_n with ∂_{n+1}∂_{n+2} = 0 + ϑ, evaluated exactly per generator.

    The composite is checked to abelianize to zero on every generator up to the window.
    """
    if d_top.target is not d_mid.source:
        raise ValueError("lifts do not compose")
    S, W = d_top.source.M, d_mid.target.wedge
    for g in S.gens(check_window):
        theta_value(d_top, d_mid, g)
    return FuncHom(S, W, lambda g: theta_value(d_top, d_mid, g), f"theta({d_mid.name},{d_top.name})",
                   d_top.witness)


def theta_rules(theta: CtrlHom, N: int) -> list[str]:
    """Describe ϑ per family: a uniform pattern for large index plus the exceptional values."""
    S = theta.source
    lines = []
    for g in S.gens(N):
        if len(g) == 1:
            lines.append(f"at {gen_str(g)} => {vec_str(theta.image(g))}")
    fams = getattr(S, "families", {})
    for lab, f in fams.items():
        if len(f.vars) != 1:
            continue
        vals = {g[1]: theta.image(g) for g in S.gens(N) if g[0] == lab}
        ms = sorted(vals)
        m0 = None
        for m in reversed(ms[:-1]):
            if _shift(vals[m], 1) == vals[m + 1] if m + 1 in vals else False:
                m0 = m
            else:
                break
        for m in ms:
            if m0 is not None and m >= m0:
                break
            lines.append(f"at {lab}({m}) => {vec_str(vals[m])}")
        if m0 is not None:
            lines.append(f"for {lab}(m) if m >= {m0} => {_pattern(vals[m0], m0)}")
    return lines


def _shift_gen(g, d: int):
    if isinstance(g, tuple) and g and g[0] in ("∧", "⊗", "⊗̂", "[]", "γ"):
        return (g[0], *(_shift_gen(x, d) for x in g[1:]))
    if len(g) == 2 and isinstance(g[1], int):
        return (g[0], g[1] + d)
    return g


def _shift(v: Mapping, d: int) -> dict:
    return {_shift_gen(g, d): c for g, c in v.items()}


def _pattern(v: Mapping, m0: int) -> str:
    def gtxt(g) -> str:
        if g[0] in ("∧",):
            return f"{gtxt(g[1])}∧{gtxt(g[2])}"
        if len(g) == 2 and isinstance(g[1], int):
            off = g[1] - m0
            return f"{g[0]}(m{'+' if off > 0 else '-'}{abs(off)})" if off else f"{g[0]}(m)"
        return gen_str(g)

    out = []
    for g, c in v.items():
        s = gtxt(g)
        out.append(("- " if c < 0 else "+ ") + (f"{abs(c)}*" if abs(c) != 1 else "") + s)
    txt = " ".join(out)
    return txt[2:] if txt.startswith("+ ") else txt or "0"


def cup_cocycle(theta: CtrlHom, H: Presentation, p_tilde: CtrlHom | None = None) -> tuple[CtrlHom, Presentation]:
    """(∧² p̃)∘ϑ into ∧² of H ⊗ Z/2; p̃ defaults to the projection from H's generators.

    Returns the cocycle (as a map into the generators of the target presentation)
    and the target presentation quad_fp(WEDGE2, H mod 2).
    """
    H2 = H if H.ring is Ring.F2 else tensor_mod2(H)
    target = quad_fp(QuadFunctor.WEDGE2, H2)
    W = target.P0
    if p_tilde is None:
        def pt(g: Gen) -> dict:
            return {g: 1}
    else:
        def pt(g: Gen) -> dict:
            return p_tilde.image(g)

    def img(g: Gen) -> dict:
        out: dict = {}
        for w, c in theta.image(g).items():
            if not c & 1:
                continue
            _, a, b = w
            for k, v in W.wedge(pt(a), pt(b)).items():
                if v & 1:
                    out[k] = out.get(k, 0) ^ 1
        return {k: 1 for k, v in out.items() if v}

    src = theta.source if theta.source.ring is Ring.F2 else tensor_mod2(theta.source)
    return FuncHom(src, W, img, f"cup({theta.name})", theta.witness), target


@dataclass
class Coboundary:
    xi: dict  # generator of C_{n+1} -> set of target generators
    window: int
    trace: dict


@dataclass
class NotCoboundary:
    certificate: list  # (relation generator, target generator) equations summing to 0 = 1
    window: int
    trace: dict


@dataclass
class IndeterminateCob:
    trace: dict


def is_coboundary(cocycle: CtrlHom, d_relations: CtrlHom, target: Presentation,
                  windows: Sequence[int] = (16, 32, 64), ansatz: str | None = None):
    """Search ξ with cocycle = ξ∘d modulo the target relations.

    Finite support is used when the reduced target window has only root
    generators at every window, the banded ansatz otherwise.
    """
    from .ctrlmod import _check_windows
    from .homext import parse_ansatz
    from .window import window

    d2 = d_relations if d_relations.ring is Ring.F2 else tensor_mod2(d_relations)
    M = Presentation(d2, f"d({d_relations.name})")
    if ansatz is None:
        rooted = all(W.pos[g].is_root for N in _check_windows(windows) for W in [window(target, N)] for g in W.gens)
        ans = FINITE if rooted else BANDED
    else:
        ans = parse_ansatz(ansatz)
    trace, last = {}, None
    for N in _check_windows(windows):
        rhs = {}
        for r in d2.source.gens(N):
            v = {g for g, c in cocycle.image(r).items() if c & 1}
            if v:
                rhs[r] = v
        status, data = solve_columns(M, target, N, rhs, ans)
        trace[N] = status
        last = (status, data, N)
    statuses = set(trace.values())
    if statuses == {"ok"}:
        return Coboundary(last[1], last[2], trace)
    if statuses == {"cert"}:
        return NotCoboundary(last[1], last[2], trace)
    return IndeterminateCob(trace)
