"""Window presentations over F2 and their controlled Tietze reduction.

A window presentation keeps the generators of size at most N of a presented
module together with the relations whose image stays inside the window.
Reduction eliminates a generator b through a relation r containing it when
the substitution b -> r - b is controlled.  With reach(l) = 2l + 2:

* every other term of r lies in the cone of b, no deeper than the reach of
  the lowest original generator the composite substitution touches;
* the span of original relations absorbed into r and the relations that
  still contain b stay within reach of each other.

The first condition keeps generator substitutions local; the second stops a
relation from absorbing an unbounded chain of deeper relations, which would
not be a controlled change of presentation.  Eliminations are recorded so
that vectors can be rewritten in the reduced generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ctrlmod import Gen, Presentation, Ring, tensor_mod2
from .tree import Vertex, in_cone


def reach(level: int) -> int:
    """Deepest level a substitution may connect to a generator or relation at `level`."""
    return 2 * level + 2


@dataclass
class WPres:
    N: int
    gens: list[Gen]
    pos: dict[Gen, Vertex]
    size: dict[Gen, int]
    rels: dict[object, frozenset]  # relation id -> set of generators
    rpos: dict[object, Vertex]
    rsize: dict[object, int]
    subst: list[tuple[Gen, frozenset]] = field(default_factory=list)
    dropped: int = 0  # relations omitted because their image escapes
    _nf1: dict | None = field(default=None, repr=False, compare=False)

    def nf(self, vec) -> frozenset:
        """Rewrite a set of (window) generators in the reduced generators."""
        if self._nf1 is None:
            self._nf1 = {}
            # substitution terms are only eliminated later, so walk backwards
            for b, rest in reversed(self.subst):
                out: set = set()
                for c in rest:
                    out ^= self._nf1.get(c, {c})
                self._nf1[b] = frozenset(out)
        cur: set = set()
        for g in vec:
            cur ^= self._nf1.get(g, {g})
        return frozenset(cur)

    def __len__(self) -> int:
        return len(self.gens)


def extract(P: Presentation, N: int) -> WPres:
    if P.ring is not Ring.F2:
        P = tensor_mod2(P)
    P0, P1, rel = P.P0, P.P1, P.relations
    gens = P0.gens(N)
    gset = set(gens)
    pos = {g: P0.height(g) for g in gens}
    size = {g: P0.size(g) for g in gens}
    rels, rpos, rsize = {}, {}, {}
    dropped = 0
    for r in P1.gens(N):
        img = rel.image(r)
        col = frozenset(g for g, c in img.items() if c & 1)
        if not col <= gset:
            dropped += 1
            continue
        if not col:
            continue
        rels[r] = col
        rpos[r] = P1.height(r)
        rsize[r] = P1.size(r)
    return WPres(N, gens, pos, size, rels, rpos, rsize, [], dropped)


def window(P: Presentation, N: int, reduce: bool = True) -> WPres:
    key = (N, reduce)
    got = P._windows.get(key)
    if got is None:
        got = extract(P, N)
        if reduce:
            got = tietze(got)
        P._windows[key] = got
    return got


def tietze(W: WPres) -> WPres:
    cols = {r: set(c) for r, c in W.rels.items()}
    rows: dict[Gen, set] = {g: set() for g in W.gens}
    for r, c in cols.items():
        for g in c:
            rows[g].add(r)
    pos, size = W.pos, W.size
    span = {r: (p.level, p.level) for r, p in W.rpos.items()}  # levels of absorbed relations
    origin = {g: pos[g].level for g in W.gens}  # lowest level substituted into g so far
    rlev = {r: p.level for r, p in W.rpos.items()}
    alive = set(W.gens)
    subst: list[tuple[Gen, frozenset]] = []

    def pick(r) -> Gen | None:
        col = cols[r]
        best = None
        for b in col:
            pb = pos[b]
            ok = True
            for c in col:
                if c is b or c == b:
                    continue
                pc = pos[c]
                if not in_cone(pc, pb) or pc.level > reach(min(origin[b], origin[c])):
                    ok = False
                    break
            if not ok:
                continue
            # every r2 already satisfies its own span bounds, so only r's span matters
            lo, hi = span[r]
            levs = list(map(rlev.__getitem__, rows[b]))
            if reach(lo) < max(levs) or hi > reach(min(levs)):
                continue
            if ok and (best is None or (size[b], repr(b)) > (size[best], repr(best))):
                best = b
        return best

    changed = True
    while changed:
        changed = False
        for r in sorted(cols, key=lambda r: (len(cols[r]), W.rsize[r], repr(r))):
            if r not in cols:
                continue
            b = pick(r)
            if b is None:
                continue
            col = cols.pop(r)
            rest = col - {b}
            for g in col:
                rows[g].discard(r)
            for r2 in list(rows[b]):
                c2 = cols[r2]
                for g in col:
                    if g in c2:
                        c2.discard(g)
                        rows[g].discard(r2)
                    else:
                        c2.add(g)
                        rows[g].add(r2)
                span[r2] = (min(span[r2][0], span[r][0]), max(span[r2][1], span[r][1]))
                if not c2:
                    del cols[r2]
            for c in rest:
                origin[c] = min(origin[c], origin[b])
            del rows[b]
            alive.discard(b)
            subst.append((b, frozenset(rest)))
            changed = True
    gens = [g for g in W.gens if g in alive]
    return WPres(W.N, gens, W.pos, W.size, {r: frozenset(c) for r, c in cols.items()},
                 W.rpos, W.rsize, W.subst + subst, W.dropped)
