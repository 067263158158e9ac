"""Free controlled modules over star trees, controlled homomorphisms and presentations.

Generators are plain tuples:

* ``(label, i, j, ...)`` for a member of a generator family,
* ``(label,)`` for a root generator,
* ``(marker, a, b)`` for pair generators built by quadratic functors,
* ``(k, g)`` (integer ``k``) for the k-th summand of a direct sum.

A module enumerates its generators window by window (all generators of size at
most N).  The size of a proper generator is its level; pair generators that sit
at the root because of the meet map still have a size, the largest size of their
constituents, so that windows stay finite.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .expr import Expr
from .tree import ROOT, Tree, Vertex, in_cone

Gen = tuple
Vec = dict  # Gen -> int coefficient


class Ring(enum.Enum):
    INT = "Z"
    F2 = "F2"

    def norm(self, c: int) -> int:
        return c & 1 if self is Ring.F2 else c


class IncompleteRules(ValueError):
    pass


class ModuleMismatch(ValueError):
    pass


def add_into(out: dict, vec: Mapping, coef: int, ring: Ring) -> None:
    for g, c in vec.items():
        v = ring.norm(out.get(g, 0) + coef * c)
        if v:
            out[g] = v
        else:
            out.pop(g, None)


def vec_add(ring: Ring, *terms: tuple[int, Mapping]) -> dict:
    out: dict = {}
    for coef, vec in terms:
        add_into(out, vec, coef, ring)
    return out


# ---------------------------------------------------------------- free modules


@dataclass(frozen=True)
class GeneratorFamily:
    label: str
    vars: tuple[str, ...]
    shape: Expr
    branch: int
    height: Expr

    def describe(self) -> str:
        return (f"ray {self.label}({', '.join(self.vars)}) where {self.shape.text} "
                f"branch {self.branch} height {self.height.text}")


class FreeModule:
    """Common interface; subclasses provide enumeration and heights."""

    ring: Ring
    tree: Tree
    name: str = "?"

    def gens(self, N: int) -> list[Gen]:
        raise NotImplementedError

    def height(self, g: Gen) -> Vertex:
        raise NotImplementedError

    def size(self, g: Gen) -> int:
        raise NotImplementedError

    def key(self, g: Gen) -> tuple:
        raise NotImplementedError

    def contains(self, g: Gen) -> bool:
        raise NotImplementedError

    def gen_str(self, g: Gen) -> str:
        return gen_str(g)

    def is_zero(self) -> bool:
        return not self.gens(64)


class FamilyModule(FreeModule):
    """Free module given by finitely many generator families plus root generators."""

    def __init__(self, name: str, ring: Ring, tree: Tree,
                 families: Sequence[GeneratorFamily] = (),
                 roots: Sequence[tuple[str, Vertex]] = ()) -> None:
        self.name = name
        self.ring = ring
        self.tree = tree
        self.families = {f.label: f for f in families}
        self.roots = {lab: v for lab, v in roots}
        labels = [f.label for f in families] + [lab for lab, _ in roots]
        if len(set(labels)) != len(labels):
            raise ValueError(f"module {name}: duplicate generator labels")
        for f in families:
            if not 1 <= f.branch <= tree.n_ends:
                raise ValueError(f"module {name}: family {f.label} on branch {f.branch} outside {tree}")
        for _, v in roots:
            tree.check(v)
        self._cache: dict[int, list[Gen]] = {}
        self._hmemo: dict[Gen, Vertex] = {}
        self._kmemo: dict[Gen, tuple] = {}

    def _levels(self, f: GeneratorFamily, N: int) -> list[tuple[tuple[int, ...], int]]:
        out = []
        k = len(f.vars)
        if k == 0:
            if f.shape():
                h = f.height()
                if h <= N:
                    out.append(((), h))
            return out
        # shapes imply nonnegative indices; heights grow at least like the indices
        bound = 2 * N + 4 if k == 1 else N + 3
        if k == 1:
            for m in range(bound + 1):
                if f.shape(m):
                    h = f.height(m)
                    if h < 1:
                        raise ValueError(f"family {f.label}: height {h} < 1 at ({m},)")
                    if h <= N:
                        out.append(((m,), h))
        elif k == 2:
            for a in range(bound + 1):
                for b in range(bound + 1):
                    if f.shape(a, b):
                        h = f.height(a, b)
                        if h < 1:
                            raise ValueError(f"family {f.label}: height {h} < 1 at ({a},{b})")
                        if h <= N:
                            out.append(((a, b), h))
        else:
            raise ValueError("families have arity at most 2")
        return out

    def gens(self, N: int) -> list[Gen]:
        got = self._cache.get(N)
        if got is not None:
            return got
        out: list[Gen] = [(lab,) for lab, v in self.roots.items() if v.level <= N]
        for f in self.families.values():
            out.extend((f.label, *idx) for idx, _ in self._levels(f, N))
        out.sort(key=self.key)
        self._cache[N] = out
        return out

    def height(self, g: Gen) -> Vertex:
        got = self._hmemo.get(g)
        if got is None:
            lab = g[0]
            if len(g) == 1 and lab in self.roots:
                got = self.roots[lab]
            else:
                f = self.families[lab]
                got = Vertex(f.branch, f.height(*g[1:]))
            self._hmemo[g] = got
        return got

    def size(self, g: Gen) -> int:
        return self.height(g).level

    def key(self, g: Gen) -> tuple:
        got = self._kmemo.get(g)
        if got is None:
            v = self.height(g)
            got = self._kmemo[g] = (v.level, v.branch, g[0], g[1:])
        return got

    def contains(self, g: Gen) -> bool:
        if not g or not isinstance(g[0], str):
            return False
        if len(g) == 1 and g[0] in self.roots:
            return True
        f = self.families.get(g[0])
        if f is None or len(g) - 1 != len(f.vars):
            return False
        return bool(f.shape(*g[1:]))

    def with_ring(self, ring: Ring) -> "FamilyModule":
        return FamilyModule(self.name, ring, self.tree, list(self.families.values()),
                            list(self.roots.items()))

    def describe(self) -> str:
        lines = [f"module {self.name} over {self.tree} ring {self.ring.value} {{"]
        for lab, v in self.roots.items():
            lines.append(f"  root {lab}@{v};")
        for f in self.families.values():
            lines.append(f"  {f.describe()};")
        lines.append("}")
        return "\n".join(lines)


class SumModule(FreeModule):
    """Direct sum; the k-th summand's generator g becomes (k, g)."""

    def __init__(self, parts: Sequence[FreeModule], name: str | None = None) -> None:
        if not parts:
            raise ValueError("empty direct sum")
        self.parts = list(parts)
        self.ring = parts[0].ring
        self.tree = parts[0].tree
        for p in parts:
            if p.ring != self.ring or p.tree != self.tree:
                raise ModuleMismatch("direct sum of modules over different rings or trees")
        self.name = name or "(" + " + ".join(p.name for p in parts) + ")"
        self._cache: dict[int, list[Gen]] = {}

    def gens(self, N: int) -> list[Gen]:
        got = self._cache.get(N)
        if got is None:
            got = [(k, g) for k, p in enumerate(self.parts) for g in p.gens(N)]
            got.sort(key=self.key)
            self._cache[N] = got
        return got

    def height(self, g: Gen) -> Vertex:
        return self.parts[g[0]].height(g[1])

    def size(self, g: Gen) -> int:
        return self.parts[g[0]].size(g[1])

    def key(self, g: Gen) -> tuple:
        inner = self.parts[g[0]].key(g[1])
        return (inner[0], inner[1], g[0], inner)

    def contains(self, g: Gen) -> bool:
        return (len(g) == 2 and isinstance(g[0], int) and 0 <= g[0] < len(self.parts)
                and self.parts[g[0]].contains(g[1]))


def zero_module(ring: Ring, tree: Tree, name: str = "0") -> FamilyModule:
    return FamilyModule(name, ring, tree)


def gen_str(g: Gen) -> str:
    if not g:
        return "?"
    head = g[0]
    if isinstance(head, int):
        return f"{gen_str(g[1])}#{head}"
    if head in _MARKERS:
        if head == "γ":
            return f"γ({gen_str(g[1])})"
        if head == "[]":
            return f"[{gen_str(g[1])},{gen_str(g[2])}]"
        return f"{gen_str(g[1])}{head}{gen_str(g[2])}"
    if len(g) == 1:
        return head
    return f"{head}({','.join(str(i) for i in g[1:])})"


_MARKERS = {"γ", "[]", "∧", "⊗", "⊗̂", "×"}


def vec_str(vec: Mapping, ring: Ring | None = None) -> str:
    if not vec:
        return "0"
    parts = []
    for g in sorted(vec, key=repr):
        c = vec[g]
        s = gen_str(g)
        if c == 1:
            parts.append(f"+ {s}")
        elif c == -1:
            parts.append(f"- {s}")
        elif c < 0:
            parts.append(f"- {-c}*{s}")
        else:
            parts.append(f"+ {c}*{s}")
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]


# ---------------------------------------------------------------- homomorphisms


@dataclass(frozen=True)
class Witness:
    """Monotone unbounded lower bound h(m) for the heights of image terms."""

    expr: Expr

    def __call__(self, m: int) -> int:
        return self.expr(m)

    @staticmethod
    def parse(text: str) -> "Witness":
        return Witness(Expr(text, ("m",)))

    def __str__(self) -> str:
        return self.expr.text


@dataclass
class Term:
    coef: int
    label: str
    args: tuple[Expr, ...]


@dataclass
class Rule:
    label: str
    vars: tuple[str, ...]
    guard: Expr
    terms: list[Term]


class CtrlHom:
    """A homomorphism of free controlled modules given generator-wise."""

    def __init__(self, source: FreeModule, target: FreeModule, name: str = "h",
                 witness: Witness | None = None) -> None:
        if source.ring != target.ring or source.tree != target.tree:
            raise ModuleMismatch(f"{name}: source and target differ in ring or tree")
        self.source = source
        self.target = target
        self.name = name
        self.witness = witness
        self._img: dict[Gen, dict] = {}

    @property
    def ring(self) -> Ring:
        return self.source.ring

    @property
    def tree(self) -> Tree:
        return self.source.tree

    def _image(self, g: Gen) -> dict:
        raise NotImplementedError

    def image(self, g: Gen) -> dict:
        got = self._img.get(g)
        if got is None:
            got = self._image(g)
            self._img[g] = got
        return got

    def apply(self, vec: Mapping) -> dict:
        out: dict = {}
        for g, c in vec.items():
            add_into(out, self.image(g), c, self.ring)
        return out


class FuncHom(CtrlHom):
    def __init__(self, source: FreeModule, target: FreeModule, fn: Callable[[Gen], Mapping],
                 name: str = "h", witness: Witness | None = None) -> None:
        super().__init__(source, target, name, witness)
        self._fn = fn

    def _image(self, g: Gen) -> dict:
        norm = self.ring.norm
        return {t: v for t, c in self._fn(g).items() if (v := norm(c))}


class RuleHom(CtrlHom):
    """Homomorphism given by guarded affine index rules plus an exception table."""

    def __init__(self, source: FamilyModule, target: FamilyModule, name: str,
                 rules: Sequence[Rule] = (), exceptions: Mapping[Gen, list[tuple[int, Gen]]] | None = None,
                 witness: Witness | None = None) -> None:
        super().__init__(source, target, name, witness)
        self.rules: dict[str, list[Rule]] = {}
        for r in rules:
            if r.label not in source.families:
                raise ValueError(f"hom {name}: rule for unknown family {r.label!r}")
            self.rules.setdefault(r.label, []).append(r)
        self.exceptions = dict(exceptions or {})
        for g in self.exceptions:
            if not source.contains(g):
                raise ValueError(f"hom {name}: exception on {gen_str(g)} outside the source")

    def _resolve(self, t: Term, idx: tuple[int, ...]) -> Gen:
        if not t.args and t.label in self.target.roots:
            g = (t.label,)
        else:
            g = (t.label, *(a(*idx) for a in t.args))
        if not self.target.contains(g):
            raise IncompleteRules(f"hom {self.name}: image term {gen_str(g)} is not a generator of {self.target.name}")
        return g

    def _image(self, g: Gen) -> dict:
        out: dict = {}
        if g in self.exceptions:
            for c, t in self.exceptions[g]:
                add_into(out, {t: c}, 1, self.ring)
            return out
        if len(g) == 1 and g[0] in self.source.roots:
            raise IncompleteRules(f"hom {self.name}: root generator {gen_str(g)} has no image")
        idx = g[1:]
        hits = [r for r in self.rules.get(g[0], []) if r.guard(*idx)]
        if len(hits) != 1:
            kind = "no rule" if not hits else "several rules"
            raise IncompleteRules(f"hom {self.name}: {kind} match {gen_str(g)}")
        for t in hits[0].terms:
            add_into(out, {self._resolve(t, idx): t.coef}, 1, self.ring)
        return out


def identity(M: FreeModule, name: str = "id") -> CtrlHom:
    return FuncHom(M, M, lambda g: {g: 1}, name, Witness.parse("m"))


def zero_hom(S: FreeModule, T: FreeModule, name: str = "0") -> CtrlHom:
    return FuncHom(S, T, lambda g: {}, name, Witness.parse("m"))


def compose(g: CtrlHom, f: CtrlHom, name: str | None = None) -> CtrlHom:
    """g ∘ f, evaluated generator-wise; the witness composes the two witnesses."""
    if f.target is not g.source:
        raise ModuleMismatch(f"cannot compose {g.name} after {f.name}: target/source differ")
    wit = None
    if f.witness is not None and g.witness is not None:
        wf, wg = f.witness, g.witness
        wit = _ComposedWitness(wg, wf)
    return FuncHom(f.source, g.target, lambda x: g.apply(f.image(x)), name or f"{g.name}∘{f.name}", wit)


class _ComposedWitness(Witness):
    def __init__(self, outer: Witness, inner: Witness) -> None:
        object.__setattr__(self, "expr", Expr("m", ("m",)))
        object.__setattr__(self, "_outer", outer)
        object.__setattr__(self, "_inner", inner)

    def __call__(self, m: int) -> int:
        # clipped to be monotone: max over smaller arguments never exceeds value at m
        return min(self._outer(self._inner(k)) for k in range(m, m + 1))

    def __str__(self) -> str:
        return f"({self._outer})∘({self._inner})"


def hom_sum(ring: Ring, *terms: tuple[int, CtrlHom], name: str = "sum") -> CtrlHom:
    first = terms[0][1]
    wits = [h.witness for _, h in terms]
    wit = None if any(w is None for w in wits) else _MinWitness(wits)
    return FuncHom(first.source, first.target,
                   lambda x: vec_add(ring, *((c, h.image(x)) for c, h in terms)), name, wit)


class _MinWitness(Witness):
    def __init__(self, parts: list[Witness]) -> None:
        object.__setattr__(self, "expr", Expr("m", ("m",)))
        object.__setattr__(self, "_parts", parts)

    def __call__(self, m: int) -> int:
        return min(p(m) for p in self._parts)

    def __str__(self) -> str:
        return "min(" + ", ".join(str(p) for p in self._parts) + ")"


def direct_sum_hom(homs: Sequence[CtrlHom], source: SumModule, target: SumModule, name: str) -> CtrlHom:
    def img(g: Gen) -> dict:
        k, inner = g
        return {(k, t): c for t, c in homs[k].image(inner).items()}

    wits = [h.witness for h in homs]
    wit = None if any(w is None for w in wits) else _MinWitness(wits)
    return FuncHom(source, target, img, name, wit)


# ---------------------------------------------------------------- presentations


class Presentation:
    """The module coker(relations: P1 -> P0)."""

    def __init__(self, relations: CtrlHom, name: str | None = None) -> None:
        self.relations = relations
        self.name = name or relations.name
        self.injectivity_checked_to = 0
        self._windows: dict = {}

    @property
    def P0(self) -> FreeModule:
        return self.relations.target

    @property
    def P1(self) -> FreeModule:
        return self.relations.source

    @property
    def ring(self) -> Ring:
        return self.relations.ring

    @property
    def tree(self) -> Tree:
        return self.relations.tree

    def __repr__(self) -> str:
        return f"Presentation({self.name})"


def free_presentation(M: FreeModule, name: str | None = None) -> Presentation:
    empty = zero_module(M.ring, M.tree, "0")
    return Presentation(zero_hom(empty, M, "0"), name or M.name)


def direct_sum(parts: Sequence[Presentation], name: str | None = None) -> Presentation:
    P0 = SumModule([p.P0 for p in parts])
    P1 = SumModule([p.P1 for p in parts])
    nm = name or "+".join(p.name for p in parts)
    return Presentation(direct_sum_hom([p.relations for p in parts], P1, P0, f"rel({nm})"), nm)


# ---------------------------------------------------------------- windows


@dataclass
class WindowMatrix:
    ring: Ring
    rows: list[Gen]
    cols: list[Gen]
    entries: dict[Gen, dict]  # column -> {row: coef}, in-window terms only
    escaping: dict[Gen, dict] = field(default_factory=dict)  # column -> escaping terms

    def dense(self) -> list[list[int]]:
        ri = {g: i for i, g in enumerate(self.rows)}
        out = [[0] * len(self.cols) for _ in self.rows]
        for j, c in enumerate(self.cols):
            for g, v in self.entries[c].items():
                out[ri[g]][j] = v
        return out

    def interior_cols(self) -> list[Gen]:
        return [c for c in self.cols if c not in self.escaping]


def truncate(h: CtrlHom, N: int) -> WindowMatrix:
    rows = h.target.gens(N)
    rowset = set(rows)
    cols = h.source.gens(N)
    entries, escaping = {}, {}
    for c in cols:
        img = h.image(c)
        inside = {g: v for g, v in img.items() if g in rowset}
        entries[c] = inside
        out = {g: v for g, v in img.items() if g not in rowset}
        if out:
            escaping[c] = out
    return WindowMatrix(h.ring, rows, cols, entries, escaping)


@dataclass
class Verified:
    window: int


@dataclass
class Violated:
    generator: Gen
    term: Gen
    reason: str


def check_controlled(h: CtrlHom, window: int, margin: int = 1) -> Verified | Violated:
    """Check the displacement witness on every source generator up to the window."""
    if not window >= margin >= 1:
        raise ValueError("need window >= margin >= 1")
    if h.witness is None:
        raise IncompleteRules(f"hom {h.name} carries no displacement witness")
    exc = getattr(h, "exceptions", {})
    for g in h.source.gens(window):
        img = h.image(g)
        if g in exc:
            continue
        v = h.source.height(g)
        if v.is_root:
            continue
        bound = h.witness(v.level)
        for t in img:
            w = h.target.height(t)
            if bound <= 0:
                continue
            if w.is_root or w.branch != v.branch:
                return Violated(g, t, f"term at {w} leaves branch {v.branch}")
            if w.level < bound:
                return Violated(g, t, f"term at level {w.level} below witness {bound}")
    return Verified(window)


# ---------------------------------------------------------------- stabilization


@dataclass
class StabilizationReport:
    dims: dict[int, int]
    verdict: str  # "Stable" | "Diverging" | "Indeterminate"
    value: int | None = None
    extra: dict = field(default_factory=dict)

    def __str__(self) -> str:
        trace = ", ".join(f"{n}:{d}" for n, d in self.dims.items())
        v = f"Stable({self.value})" if self.verdict == "Stable" else self.verdict
        return f"{v} [{trace}]"

    @property
    def definite(self) -> bool:
        return self.verdict in ("Stable", "Diverging")


def stabilize(dims: dict[int, int], k: int = 3, extra: dict | None = None) -> StabilizationReport:
    seq = [dims[n] for n in sorted(dims)]
    if len(seq) >= k and len(set(seq[-k:])) == 1:
        return StabilizationReport(dims, "Stable", seq[-1], extra or {})
    if len(seq) >= 2 and all(a < b for a, b in zip(seq, seq[1:])):
        return StabilizationReport(dims, "Diverging", None, extra or {})
    return StabilizationReport(dims, "Indeterminate", None, extra or {})


DEFAULT_WINDOWS = (16, 32, 64, 128)


def _check_windows(windows: Sequence[int]) -> list[int]:
    ws = list(windows)
    if len(ws) < 3 or any(a >= b for a, b in zip(ws, ws[1:])):
        raise ValueError("need at least 3 strictly increasing windows")
    return ws


def _reach(h: CtrlHom, wm: WindowMatrix) -> int:
    r = 0
    for c in wm.cols:
        lc = h.source.size(c)
        for g in list(wm.entries[c]) + list(wm.escaping.get(c, {})):
            r = max(r, h.target.size(g) - lc)
    return r


def cokernel_rank(h: CtrlHom, windows: Sequence[int] = DEFAULT_WINDOWS, k: int = 3) -> StabilizationReport:
    """Window dimensions of coker(h), omitting escaping columns."""
    from .linalg import int_elementary_divisors, sparse_rank

    dims: dict[int, int] = {}
    torsion: dict[int, list[int]] = {}
    for N in _check_windows(windows):
        wm = truncate(h, N)
        cut = N - _reach(h, wm)
        rows = [g for g in wm.rows if h.target.size(g) <= cut]
        rset = set(rows)
        cols = [c for c in wm.cols if c not in wm.escaping and all(g in rset for g in wm.entries[c])]
        if h.ring is Ring.F2:
            dims[N] = len(rows) - sparse_rank({g for g, x in wm.entries[c].items() if x & 1} for c in cols)
        else:
            ri = {g: i for i, g in enumerate(rows)}
            mat = [[0] * len(cols) for _ in rows]
            for j, c in enumerate(cols):
                for g, x in wm.entries[c].items():
                    mat[ri[g]][j] = x
            divs = int_elementary_divisors(mat) if rows and cols else []
            dims[N] = len(rows) - len(divs)
            torsion[N] = [d for d in divs if d != 1]
    rep = stabilize(dims, k)
    if torsion:
        rep.extra["torsion"] = torsion
    return rep


def kernel_basis(h: CtrlHom, windows: Sequence[int] = DEFAULT_WINDOWS, k: int = 3) -> StabilizationReport:
    """Window kernels using only columns whose images lie inside the window."""
    from .linalg import nullspace

    dims: dict[int, int] = {}
    vectors: dict[int, list[dict]] = {}
    for N in _check_windows(windows):
        wm = truncate(h, N)
        cols = wm.interior_cols()
        if h.ring is Ring.F2:
            ri = {g: i for i, g in enumerate(wm.rows)}
            rows_bits = [0] * len(wm.rows)
            for j, c in enumerate(cols):
                for g, x in wm.entries[c].items():
                    if x & 1:
                        rows_bits[ri[g]] |= 1 << j
            ns = nullspace(rows_bits, len(cols))
            dims[N] = len(ns)
            vectors[N] = [{cols[j]: 1 for j in range(len(cols)) if v >> j & 1} for v in ns]
        else:
            from sympy import Matrix

            ri = {g: i for i, g in enumerate(wm.rows)}
            mat = Matrix.zeros(len(wm.rows), len(cols))
            for j, c in enumerate(cols):
                for g, x in wm.entries[c].items():
                    mat[ri[g], j] = x
            ns = mat.nullspace() if cols else []
            dims[N] = len(ns)
            vectors[N] = [{cols[j]: v[j] for j in range(len(cols)) if v[j] != 0} for v in ns]
    rep = stabilize(dims, k)
    rep.extra["vectors"] = vectors
    return rep


# ---------------------------------------------------------------- ring and tree changes


def tensor_mod2(x):
    """Reduce coefficients mod 2 (modules, homs and presentations)."""
    if isinstance(x, Presentation):
        if x.ring is Ring.F2:
            return x
        return Presentation(tensor_mod2(x.relations), x.name)
    if isinstance(x, CtrlHom):
        if x.ring is Ring.F2:
            return x
        src, tgt = tensor_mod2(x.source), tensor_mod2(x.target)
        h = x
        return FuncHom(src, tgt, lambda g: {t: c & 1 for t, c in h.image(g).items() if c & 1},
                       x.name, x.witness)
    if isinstance(x, FreeModule):
        if x.ring is Ring.F2:
            return x
        cache = _MOD2_CACHE.get(id(x))
        if cache is not None and cache[0] is x:
            return cache[1]
        out = _Mod2View(x)
        _MOD2_CACHE[id(x)] = (x, out)
        return out
    raise TypeError(f"cannot reduce {type(x).__name__} mod 2")


_MOD2_CACHE: dict[int, tuple] = {}


class _Mod2View(FreeModule):
    def __init__(self, base: FreeModule) -> None:
        self.base = base
        self.ring = Ring.F2
        self.tree = base.tree
        self.name = base.name

    def gens(self, N: int) -> list[Gen]:
        return self.base.gens(N)

    def height(self, g: Gen) -> Vertex:
        return self.base.height(g)

    def size(self, g: Gen) -> int:
        return self.base.size(g)

    def key(self, g: Gen) -> tuple:
        return self.base.key(g)

    def contains(self, g: Gen) -> bool:
        return self.base.contains(g)


class _BranchView(FreeModule):
    """Relabels the rays of a module over T1 onto branch i of a bigger star tree."""

    def __init__(self, base: FreeModule, branch: int, tree: Tree) -> None:
        if base.tree.n_ends != 1:
            raise ValueError("pushforward_branch expects data over T1")
        if not 1 <= branch <= tree.n_ends:
            raise ValueError(f"branch {branch} not in {tree}")
        self.base = base
        self.branch = branch
        self.ring = base.ring
        self.tree = tree
        self.name = f"F{branch}*{base.name}"

    def gens(self, N: int) -> list[Gen]:
        return self.base.gens(N)

    def height(self, g: Gen) -> Vertex:
        v = self.base.height(g)
        return v if v.is_root else Vertex(self.branch, v.level)

    def size(self, g: Gen) -> int:
        return self.base.size(g)

    def key(self, g: Gen) -> tuple:
        k = self.base.key(g)
        v = self.height(g)
        return (k[0], v.branch) + k[2:]

    def contains(self, g: Gen) -> bool:
        return self.base.contains(g)


def pushforward_branch(x, i: int, target: Tree):
    """Change of tree along the inclusion of T1 as branch i of the target tree."""
    if isinstance(x, Presentation):
        return Presentation(pushforward_branch(x.relations, i, target), f"F{i}*{x.name}")
    if isinstance(x, CtrlHom):
        src = pushforward_branch(x.source, i, target)
        tgt = pushforward_branch(x.target, i, target)
        h = x
        return FuncHom(src, tgt, lambda g: h.image(g), f"F{i}*{x.name}", x.witness)
    if isinstance(x, FamilyModule):
        fams = [GeneratorFamily(f.label, f.vars, f.shape, i, f.height) for f in x.families.values()]
        if x.tree.n_ends != 1:
            raise ValueError("pushforward_branch expects data over T1")
        return _cached_push(x, i, target, lambda: FamilyModule(f"F{i}*{x.name}", x.ring, target, fams,
                                                               list(x.roots.items())))
    if isinstance(x, FreeModule):
        return _cached_push(x, i, target, lambda: _BranchView(x, i, target))
    raise TypeError(f"cannot push forward {type(x).__name__}")


_PUSH_CACHE: dict[tuple, tuple] = {}


def _cached_push(x, i, target, make):
    key = (id(x), i, target)
    got = _PUSH_CACHE.get(key)
    if got is not None and got[0] is x:
        return got[1]
    out = make()
    _PUSH_CACHE[key] = (x, out)
    return out


def is_root_supported(M: FreeModule, N: int = 32) -> bool:
    return all(M.height(g).is_root for g in M.gens(N)) and len(M.gens(N)) == len(M.gens(N // 2))


__all__ = [
    "Ring", "Gen", "GeneratorFamily", "FreeModule", "FamilyModule", "SumModule", "CtrlHom",
    "FuncHom", "RuleHom", "Rule", "Term", "Witness", "Presentation", "WindowMatrix",
    "StabilizationReport", "truncate", "check_controlled", "compose", "cokernel_rank",
    "kernel_basis", "tensor_mod2", "pushforward_branch", "identity", "zero_hom",
    "free_presentation", "direct_sum", "stabilize", "in_cone", "ROOT",
]
