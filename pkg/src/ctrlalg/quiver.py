"""Finite-dimensional n-subspaces over F2, the M functor and the elementary catalog.

Vectors of V0 are int bitmasks (bit j = j-th basis vector); an arm is the list
of its basis columns.  A morphism of subspaces is a matrix f0 on V0 with
f0(V_i) ⊆ W_i, the arm maps being forced by injectivity.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .ctrlmod import Presentation, cokernel_rank, direct_sum, pushforward_branch
from .linalg import Echelon, nullspace, rank
from .tree import Tree

FIXTURES = Path(__file__).with_name("fixtures")


class NotInjective(ValueError):
    pass


class InconsistentExt(ArithmeticError):
    pass


@dataclass(frozen=True)
class NSubspace:
    n: int
    dim0: int
    arms: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if len(self.arms) != self.n:
            raise ValueError(f"expected {self.n} arms, got {len(self.arms)}")
        for i, cols in enumerate(self.arms, 1):
            if any(c >> self.dim0 for c in cols):
                raise ValueError(f"arm {i} has a column outside V0")
            if rank(cols) != len(cols):
                raise NotInjective(f"arm {i} is not injective")

    @property
    def dimvec(self) -> tuple[int, ...]:
        return (self.dim0, *(len(a) for a in self.arms))

    def span(self, i: int) -> list[int]:
        return list(self.arms[i])

    def __str__(self) -> str:
        def bs(c: int) -> str:
            return "".join("1" if c >> j & 1 else "0" for j in range(self.dim0))
        arms = " ".join(f"arm{i + 1}={{{' '.join(bs(c) for c in a)}}}" for i, a in enumerate(self.arms))
        return f"subspace n={self.n} V0={self.dim0} {arms}"

    @staticmethod
    def parse(text: str, name: str = "") -> "NSubspace":
        from .dsl import parse

        body = text.strip().rstrip(";")
        if not body.startswith("subspace"):
            raise ValueError("expected 'subspace n=... V0=... arm1={...}'")
        rest = body[len("subspace"):].strip()
        if not rest.startswith("n="):
            rest = rest.split(None, 1)[1] if " " in rest else rest
        ws = parse(f"subspace _S {rest};")
        return from_decl(ws.subspaces["_S"], name)


def from_decl(d, name: str = "") -> NSubspace:
    arms = tuple(tuple(int(b[::-1], 2) for b in cols) for cols in d.arms)
    return NSubspace(d.n, d.dim0, arms, name or d.name)


def euler_form(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """⟨a, b⟩ = Σ_{i≥0} a_i b_i - Σ_{i≥1} a_i b_0."""
    if len(a) != len(b):
        raise ValueError("dimension vectors of different length")
    return sum(x * y for x, y in zip(a, b)) - sum(x * b[0] for x in a[1:])


def _annihilator(cols: list[int], d: int) -> list[int]:
    return nullspace(list(cols), d)


def _hom_rows(V: NSubspace, W: NSubspace) -> tuple[list[int], int]:
    """Linear conditions on f0 (entry (r, s) at bit r*dV + s) for f0(V_i) ⊆ W_i."""
    if V.n != W.n:
        raise ValueError("subspaces with different numbers of arms")
    dV, dW = V.dim0, W.dim0
    rows = []
    for i in range(V.n):
        ann = _annihilator(list(W.arms[i]), dW)
        for c in V.arms[i]:
            for ell in ann:
                row = 0
                for r in range(dW):
                    if ell >> r & 1:
                        for s in range(dV):
                            if c >> s & 1:
                                row |= 1 << (r * dV + s)
                if row:
                    rows.append(row)
    return rows, dV * dW


def hom_basis(V: NSubspace, W: NSubspace) -> list[list[int]]:
    """Basis of Hom(V, W) as matrices f0 given by their columns (images of V0 basis)."""
    rows, n = _hom_rows(V, W)
    out = []
    for x in nullspace(rows, n):
        cols = [0] * V.dim0
        for r in range(W.dim0):
            for s in range(V.dim0):
                if x >> (r * V.dim0 + s) & 1:
                    cols[s] |= 1 << r
        out.append(cols)
    return out


def hom_dim(V: NSubspace, W: NSubspace) -> int:
    rows, n = _hom_rows(V, W)
    return n - rank(rows)


def ext_dim(V: NSubspace, W: NSubspace) -> int:
    e = hom_dim(V, W) - euler_form(V.dimvec, W.dimvec)
    if e < 0:
        raise InconsistentExt(f"negative Ext between {V} and {W}")
    return e


# ---------------------------------------------------------------- small matrix helpers


def _apply(cols: list[int], v: int) -> int:
    out = 0
    j = 0
    while v:
        if v & 1:
            out ^= cols[j]
        v >>= 1
        j += 1
    return out


def _compose(f: list[int], g: list[int]) -> list[int]:
    return [_apply(f, c) for c in g]


def _basis(vs) -> list[int]:
    e = Echelon()
    out = []
    for v in vs:
        if e.add(v) is True:
            out.append(v)
    return out


def _kernel(f: list[int], d: int) -> list[int]:
    rows = [0] * d  # row r of f as bitmask over columns
    for s, c in enumerate(f):
        for r in range(d):
            if c >> r & 1:
                rows[r] |= 1 << s
    return nullspace(rows, len(f))


def _intersect(U: list[int], S: list[int], d: int) -> list[int]:
    """U ∩ S via the kernel of [U | S]."""
    if not U or not S:
        return []
    cols = U + S
    rel = _kernel(cols, d)
    out = [_apply(U, x & ((1 << len(U)) - 1)) for x in rel]
    return _basis(v for v in out if v)


def _coords(basis: list[int], v: int) -> int:
    """Coordinates of v in the given independent list (as a bitmask)."""
    e = Echelon(track=True)
    for i, b in enumerate(basis):
        e.add(b, 1 << i)
    rem, tag = e.reduce(v)
    if rem:
        raise ValueError("vector outside span")
    return tag


def restrict(V: NSubspace, S: list[int]) -> NSubspace:
    """The subrepresentation on S ⊆ V0 (assumed to be a summand), in S-coordinates."""
    arms = []
    for cols in V.arms:
        inter = _intersect(list(cols), S, V.dim0)
        arms.append(tuple(_coords(S, v) for v in inter))
    return NSubspace(V.n, len(S), tuple(arms))


def end_basis(V: NSubspace) -> list[list[int]]:
    return hom_basis(V, V)


def _fitting(V: NSubspace, f: list[int]) -> tuple[list[int], list[int]] | None:
    d = V.dim0
    p = f
    for _ in range(max(1, d).bit_length() + 1):
        p = _compose(p, p)
    K = _kernel(p, d)
    img = _basis(c for c in p if c)
    if not K or not img:
        return None
    return K, img


def _split_once(V: NSubspace, rng: random.Random, tries: int = 400) -> tuple[list[int], list[int]] | None:
    B = end_basis(V)
    if V.dim0 == 0:
        return None
    if len(B) <= 12:
        for mask in range(1, 1 << len(B)):
            f = [0] * V.dim0
            for k in range(len(B)):
                if mask >> k & 1:
                    f = [a ^ b for a, b in zip(f, B[k])]
            got = _fitting(V, f)
            if got:
                return got
        return None
    for _ in range(tries):
        f = [0] * V.dim0
        for k in range(len(B)):
            if rng.random() < 0.5:
                f = [a ^ b for a, b in zip(f, B[k])]
        got = _fitting(V, f)
        if got:
            return got
    return None


def decompose(V: NSubspace, seed: int = 0) -> list[NSubspace]:
    """Krull–Schmidt summands (unlabeled), sorted by dimension vector."""
    rng = random.Random(seed)
    if V.dim0 == 0:
        return []
    out, todo = [], [V]
    while todo:
        X = todo.pop()
        got = _split_once(X, rng)
        if got is None:
            out.append(X)
        else:
            K, I = got
            todo.append(restrict(X, K))
            todo.append(restrict(X, I))
    return sorted(out, key=lambda s: s.dimvec)


# ---------------------------------------------------------------- named subspaces


def _sub(n: int, dim0: int, arms, name: str) -> NSubspace:
    return NSubspace(n, dim0, tuple(tuple(a) for a in arms), name)


def W(i: int, n: int) -> NSubspace:
    """W⁰ (a point) or Wⁱ (V0 = V_i = F2)."""
    arms = [[1] if j == i else [] for j in range(1, n + 1)]
    return _sub(n, 1, arms, f"W{i}")


X_, Y_ = 1, 2  # x, y in F2⟨x, y⟩


def rigid_list(n: int) -> list[NSubspace]:
    """Indecomposable rigid n-subspaces with at least two nonzero arms, n ≤ 3 (hardcoded)."""
    if n == 1:
        return []
    if n == 2:
        return [_sub(2, 1, [[1], [1]], "V(2,1)")]
    if n == 3:
        return [
            _sub(3, 1, [[1], [1], []], "V(3,1)"),
            _sub(3, 1, [[1], [], [1]], "V(3,2)"),
            _sub(3, 1, [[], [1], [1]], "V(3,3)"),
            _sub(3, 1, [[1], [1], [1]], "V(3,4)"),
            _sub(3, 2, [[X_], [X_ ^ Y_], [Y_]], "V(3,5)"),
        ]
    raise NotImplementedError("rigid lists are only known here for n ≤ 3")


def indecomposables(n: int) -> list[NSubspace]:
    return [W(0, n)] + [W(i, n) for i in range(1, n + 1)] + rigid_list(n)


def label(V: NSubspace) -> str | None:
    """Name of an indecomposable n-subspace for n ≤ 3 (dimension vector plus hom check)."""
    if V.n > 3:
        return None
    for E in indecomposables(V.n):
        if E.dimvec == V.dimvec and hom_dim(E, V) >= 1 and hom_dim(V, E) >= 1:
            return E.name
    return None


def direct_sum_sub(parts: list[NSubspace]) -> NSubspace:
    n = parts[0].n
    off, arms = 0, [[] for _ in range(n)]
    for P in parts:
        for i in range(n):
            arms[i].extend(c << off for c in P.arms[i])
        off += P.dim0
    return NSubspace(n, off, tuple(tuple(a) for a in arms))


def conjugate(V: NSubspace, rng: random.Random) -> NSubspace:
    """Random change of basis of V0 and of each arm."""
    d = V.dim0
    while True:
        g = [rng.getrandbits(d) for _ in range(d)] if d else []
        if rank(g) == d:
            break
    arms = []
    for cols in V.arms:
        k = len(cols)
        while True:
            h = [rng.getrandbits(k) for _ in range(k)] if k else []
            if rank(h) == k:
                break
        new = [_apply(list(cols), hv) for hv in h]
        arms.append(tuple(_apply(g, c) for c in new))
    return NSubspace(V.n, d, tuple(arms))


# ---------------------------------------------------------------- M functor


def _roots(d: int) -> list[str]:
    return [f"w{j + 1}" for j in range(d)]


def m_functor_source(V: NSubspace, tree: Tree, name: str = "MV") -> str:
    """DSL text of the presentation of M(V): rays for arm basis vectors, roots for V0."""
    if V.n != tree.n_ends:
        raise ValueError(f"{V.n}-subspace over {tree}")
    rays = []
    for i, cols in enumerate(V.arms, 1):
        for k, c in enumerate(cols):
            lab = f"u{i}" if len(cols) == 1 else f"u{i}_{k + 1}"
            rays.append((lab, i, c))
    roots = _roots(V.dim0)
    p0 = [f"module {name}_P0 over {tree} ring F2 {{"]
    p0 += [f"  root {r}@v0;" for r in roots]
    p0 += [f"  ray {lab}(m) where m >= 1 branch {i} height m;" for lab, i, _ in rays]
    p0.append("}")
    p1 = [f"module {name}_P1 over {tree} ring F2 {{"]
    p1 += [f"  ray {lab}(m) where m >= 1 branch {i} height m;" for lab, i, _ in rays]
    p1.append("}")
    hom = [f"hom {name}_rel : {name}_P1 -> {name}_P0 {{"]
    for lab, _, c in rays:
        img = " ".join(f"- {roots[j]}" for j in range(V.dim0) if c >> j & 1)
        hom.append(f"  at {lab}(1) => {lab}(1) {img};".replace("  ;", ";"))
        hom.append(f"  for {lab}(m) if m > 1 => {lab}(m) - {lab}(m - 1);")
    hom.append("  witness h(m) = m - 1;")
    hom.append("}")
    text = "\n".join(p0) + "\n\n" + "\n".join(p1) + "\n\n" + "\n".join(hom) + "\n\n"
    if not rays:
        text = "\n".join(p0) + f"\n\npresent {name} = free {name}_P0;\n"
    else:
        text += f"present {name} = {name}_rel;\n"
    return text


def m_functor(V: NSubspace, tree: Tree, name: str | None = None) -> Presentation:
    from .dsl import parse

    nm = _ident(name or V.name or "MV")
    ws = parse(m_functor_source(V, tree, nm))
    P = ws.presentations[nm]
    P.name = name or V.name or "MV"
    return P


def _ident(s: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in s).strip("_") or "MV"


# ---------------------------------------------------------------- elementary catalog


@dataclass
class Elementary:
    tag: str  # "A", "R1", "B2", "Binf3", "C1", "Cinf1", "MV(3,5)", ...
    kind: str  # A, R, B, Binf, C, Cinf, MV
    branch: int
    presentation: Presentation
    subspace: NSubspace | None = None


T1_KINDS = ("A", "R", "B", "Binf", "C", "Cinf")


@lru_cache(maxsize=None)
def t1_workspace():
    from .dsl import parse_file

    return parse_file(FIXTURES / "elementary_T1.calg")


@lru_cache(maxsize=None)
def elementary_catalog(tree: Tree) -> tuple[Elementary, ...]:
    n = tree.n_ends
    if n > 3:
        raise NotImplementedError("the elementary catalog is only available for trees with at most 3 ends")
    base = t1_workspace().presentations
    out = []
    if n == 1:
        for k in T1_KINDS:
            P = base[k]
            sub = W(0, 1) if k == "A" else (W(1, 1) if k == "B" else None)
            out.append(Elementary(k, k, 1 if k != "A" else 0, P, sub))
        return tuple(out)
    A = pushforward_branch(base["A"], 1, tree)
    A.name = "A"
    out.append(Elementary("A", "A", 0, A, W(0, n)))
    for i in range(1, n + 1):
        for k in T1_KINDS[1:]:
            P = pushforward_branch(base[k], i, tree)
            P.name = f"{k}{i}"
            out.append(Elementary(f"{k}{i}", k, i, P, W(i, n) if k == "B" else None))
    for V in rigid_list(n):
        out.append(Elementary(f"MV{V.name[1:]}", "MV", 0, m_functor(V, tree, f"MV{V.name[1:]}"), V))
    return tuple(out)


def catalog_source(tree: Tree) -> str:
    """DSL text declaring every catalog presentation over the tree under its tag.

    Branch copies of the T1 data get the branch number appended to every
    name; the shipped elementary_T<n>.calg fixtures are this text.
    """
    n = tree.n_ends
    if n == 1:
        return (FIXTURES / "elementary_T1.calg").read_text()
    import re

    body = "\n".join(ln for ln in (FIXTURES / "elementary_T1.calg").read_text().splitlines()
                     if not ln.startswith("#")).strip()
    names = sorted(re.findall(r"^(?:module|hom|present) (\w+)", body, re.M), key=len, reverse=True)
    parts = [f"# Elementary modules over {tree}, over F2 (generated by catalog_source).\n"
             f"# A sits on branch 1; R, B, Binf, C, Cinf have one copy per branch.\n"]
    for i in range(1, n + 1):
        text = body.replace("over T1", f"over {tree}").replace("branch 1", f"branch {i}")
        text = re.sub(r"\b(" + "|".join(names) + r")\b", lambda m: m.group(1) + str(i), text)
        if i > 1:  # A is shared
            text = re.sub(r"module NA\d* .*?\n}\n\n|hom rA\d* .*?\n}\n\n|present A\d* = .*?;\n", "",
                          text, flags=re.S)
        parts.append(text.replace("present A1 =", "present A =") + "\n")
    for V in rigid_list(n):
        parts.append(m_functor_source(V, tree, f"MV_{n}_{V.name[4:-1]}"))
    return "\n".join(parts)


def catalog_entry(tree: Tree, tag: str) -> Elementary:
    for e in elementary_catalog(tree):
        if e.tag == tag:
            return e
    raise KeyError(f"no elementary {tag!r} over {tree}")


def sum_of(tree: Tree, tags: list[str]) -> Presentation:
    parts = [catalog_entry(tree, t).presentation for t in tags]
    return parts[0] if len(parts) == 1 else direct_sum(parts, "+".join(tags))


def change_of_tree_restrict(P: Presentation, i: int, j: int, windows=(16, 32, 64, 128)) -> dict:
    """(Fⁱ)* Fʲ_* X for X over T1 presented by P: X itself when i = j, otherwise a sum
    of copies of A indexed by the plain cokernel of the relations."""
    if i == j:
        return {"result": P.name, "multiplicity": None, "report": None}
    rep = cokernel_rank(P.relations, windows)
    if rep.verdict == "Stable":
        res = "0" if rep.value == 0 else ("A" if rep.value == 1 else f"A^{rep.value}")
        return {"result": res, "multiplicity": rep.value, "report": rep}
    return {"result": "A-ray, diverging multiplicity", "multiplicity": None, "report": rep}


def all_subspaces(n: int, max_dim0: int, max_arm: int | None = None):
    """Enumerate subspace configurations (not up to iso) for small oracles."""
    for d in range(max_dim0 + 1):
        vecs = list(range(1, 1 << d))
        arm_choices = [()]
        for k in range(1, (max_arm if max_arm is not None else d) + 1):
            arm_choices += [c for c in itertools.combinations(vecs, k) if rank(c) == k]
        for arms in itertools.product(arm_choices, repeat=n):
            yield NSubspace(n, d, tuple(arms))


# ---------------------------------------------------------------- fingerprints

INF = "∞"
ABSORBING = ("R", "Binf", "Cinf")  # X ⊕ X ≅ X
ABSORBED_BY = {"A": "R", "B": "Binf", "C": "Cinf"}  # A by any R_i; B_i by Binf_i; C_i by Cinf_i


def _fp_value(rep) -> int | str:
    # a non-stable trace is recorded as infinite: dims that keep moving never come from a finite sum
    return rep.value if rep.verdict == "Stable" else INF


def _fp_add(x, y):
    return INF if INF in (x, y) else x + y


def _fp_scale(x, m: int):
    if m == 0:
        return 0
    return INF if x == INF else m * x


@dataclass
class Fingerprint:
    entries: dict  # ("to", tag) / ("from", tag) / ("coker",) -> int | ∞
    traces: dict

    def key(self) -> tuple:
        return tuple(sorted((k, str(v)) for k, v in self.entries.items()))


def fingerprint(P: Presentation, tree: Tree, windows=None, k: int = 3) -> Fingerprint:
    """Hom dims between P and every catalog entry, both directions, plus the plain cokernel."""
    from .ctrlmod import DEFAULT_WINDOWS
    from .homext import hom_space

    ws = tuple(windows or DEFAULT_WINDOWS)
    entries, traces = {}, {}
    for e in elementary_catalog(tree):
        for side, (a, b) in (("to", (e.presentation, P)), ("from", (P, e.presentation))):
            rep = hom_space(a, b, ws, k=k)
            entries[(side, e.tag)] = _fp_value(rep)
            traces[(side, e.tag)] = rep.dims
    rep = cokernel_rank(P.relations, ws, k)
    entries[("coker",)] = _fp_value(rep)
    traces[("coker",)] = rep.dims
    traces["_presentation"] = P
    return Fingerprint(entries, traces)


_CATALOG_FP: dict = {}


def catalog_fingerprints(tree: Tree, windows=None, k: int = 3) -> dict[str, Fingerprint]:
    from .ctrlmod import DEFAULT_WINDOWS

    key = (tree, tuple(windows or DEFAULT_WINDOWS), k)
    got = _CATALOG_FP.get(key)
    if got is None:
        got = {e.tag: fingerprint(e.presentation, tree, key[1], k) for e in elementary_catalog(tree)}
        _CATALOG_FP[key] = got
    return got


def normalize(tree: Tree, mult: dict[str, int]) -> dict[str, int]:
    """Apply the absorption isomorphisms to a multiset of catalog tags."""
    kinds = {e.tag: (e.kind, e.branch) for e in elementary_catalog(tree)}
    out = {t: m for t, m in mult.items() if m > 0}
    present = {kinds[t] for t in out}
    for t in list(out):
        kind, br = kinds[t]
        if kind in ABSORBING:
            out[t] = 1
        elif kind == "A" and any(k == "R" for k, _ in present):
            del out[t]
        elif kind in ("B", "C") and (ABSORBED_BY[kind], br) in present:
            del out[t]
    return dict(sorted(out.items()))


def combine(fps: dict[str, Fingerprint], mult: dict[str, int]) -> dict:
    keys = next(iter(fps.values())).entries.keys()
    if not mult:
        return {k_: 0 for k_ in keys}
    tot = {k: 0 for k in keys}
    for t, m in mult.items():
        for k in keys:
            tot[k] = _fp_add(tot[k], _fp_scale(fps[t].entries[k], m))
    return tot


@dataclass
class Decomposition:
    summands: dict[str, int] | None  # normalized multiset, None if no or several solutions
    solutions: list[dict[str, int]]
    fingerprint: Fingerprint
    residual: str = ""

    def __str__(self) -> str:
        if self.summands is None:
            return self.residual
        if not self.summands:
            return "0"
        return " + ".join(t if m == 1 else f"{m}*{t}" for t, m in self.summands.items())


def decompose_fp_module(P: Presentation, windows=None, k: int = 3, max_mult: int = 3) -> Decomposition:
    tree = P.tree
    if tree.n_ends > 3:
        raise NotImplementedError("classification by the elementary catalog needs at most 3 ends")
    fps = catalog_fingerprints(tree, windows, k)
    fp = fingerprint(P, tree, windows, k)
    kinds = {e.tag: e.kind for e in elementary_catalog(tree)}
    # a summand E gives id_E = E → P → E, so both hom dims are nonzero
    cands = [t for t in fps if fp.entries[("to", t)] != 0 and fp.entries[("from", t)] != 0]
    found = _solve(tree, fps, fp, cands, kinds, max_mult)
    free = [t for t in cands if kinds[t] == "R"]
    if len(found) > 1 and free and _injective(P, windows):
        # hom entries saturate next to a free summand; Ext into R vanishes only on R itself
        _add_ext_entries(fp, tree, free, windows, k)
        fps = {t: _with_ext(f, tree, t, free, windows, k) for t, f in fps.items()}
        found = _solve(tree, fps, fp, cands, kinds, max_mult)
    if len(found) == 1:
        return Decomposition(found[0], found, fp)
    if not found:
        return Decomposition(None, [], fp, "no sum of catalog entries matches the fingerprint")
    return Decomposition(None, found, fp, f"{len(found)} normalized sums match the fingerprint")


def _add_ext_entries(fp: Fingerprint, tree: Tree, free: list[str], windows, k: int) -> None:
    from .ctrlmod import DEFAULT_WINDOWS
    from .homext import ext1_dim

    ws = tuple(windows or DEFAULT_WINDOWS)
    for t in free:
        rep = ext1_dim(_self_presentation(fp), catalog_entry(tree, t).presentation, ws, k=k)
        fp.entries[("ext", t)] = _fp_value(rep)
        fp.traces[("ext", t)] = rep.dims


def _self_presentation(fp: Fingerprint) -> Presentation:
    return fp.traces["_presentation"]


_EXT_FP: dict = {}


def _with_ext(f: Fingerprint, tree: Tree, tag: str, free: list[str], windows, k: int) -> Fingerprint:
    key = (tree, tag, tuple(free), tuple(windows or ()), k)
    got = _EXT_FP.get(key)
    if got is None:
        got = Fingerprint(dict(f.entries), dict(f.traces))
        _add_ext_entries(got, tree, free, windows, k)
        _EXT_FP[key] = got
    return got


def _solve(tree: Tree, fps: dict, fp: Fingerprint, cands: list[str], kinds: dict, max_mult: int) -> list[dict]:
    target = fp.entries
    bounds = []
    for t in cands:
        if kinds[t] in ABSORBING:
            bounds.append(1)
            continue
        e, h = fps[t].entries[("to", t)], target[("to", t)]
        bounds.append(max_mult if INF in (e, h) or e == 0 else min(max_mult, h // e))
    sols: dict[tuple, dict] = {}
    for ms in itertools.product(*(range(b + 1) for b in bounds)):
        mult = {t: m for t, m in zip(cands, ms) if m}
        if combine(fps, mult) == target:
            norm = normalize(tree, mult)
            sols[tuple(norm.items())] = norm
    return list(sols.values())


def _injective(P: Presentation, windows) -> bool:
    from .ctrlmod import DEFAULT_WINDOWS
    from .homext import NotInjective, require_injective

    try:
        require_injective(P, max(windows or DEFAULT_WINDOWS))
    except NotInjective:
        return False
    return True
