"""Exact linear algebra: GF(2) on int bitsets, integers via Smith form."""

from __future__ import annotations

from typing import Iterable, Sequence


class Echelon:
    """Incrementally built GF(2) row space; each stored row's lowest bit is its pivot.

    Pivots are keyed by bit index: hashing the isolated bit itself costs time
    linear in the width, which dominates on wide windows.

    ``tags`` optionally tracks, for every stored row, which input rows were
    combined into it (as a bitset), so that dependencies can be certified.
    """

    __slots__ = ("piv", "tags", "track")

    def __init__(self, track: bool = False) -> None:
        self.piv: dict[int, int] = {}
        self.tags: dict[int, int] = {}
        self.track = track

    def __len__(self) -> int:
        return len(self.piv)

    def reduce(self, v: int, tag: int = 0) -> tuple[int, int]:
        """Fully reduce v; returns (remainder, combined tag)."""
        piv, tags = self.piv, self.tags
        out = 0
        while v:
            low = v & -v
            b = low.bit_length()
            p = piv.get(b)
            if p is None:
                out |= low
                v ^= low
            else:
                v ^= p
                if self.track:
                    tag ^= tags[b]
        return out, tag

    def head_reduce(self, v: int, tag: int = 0) -> tuple[int, int]:
        """Reduce only until the lowest bit is not a pivot (enough for rank)."""
        piv, tags = self.piv, self.tags
        while v:
            b = (v & -v).bit_length()
            p = piv.get(b)
            if p is None:
                break
            v ^= p
            if self.track:
                tag ^= tags[b]
        return v, tag

    def add(self, v: int, tag: int = 0) -> bool | int:
        """Insert v.  Returns True if independent; otherwise False, or the
        dependency tag when tracking is on."""
        v, tag = self.head_reduce(v, tag)
        if v == 0:
            return tag if self.track else False
        b = (v & -v).bit_length()
        self.piv[b] = v
        if self.track:
            self.tags[b] = tag
        return True

    def contains(self, v: int) -> bool:
        return self.head_reduce(v)[0] == 0

    def basis(self) -> list[int]:
        return list(self.piv.values())


def rank(rows: Iterable[int]) -> int:
    e = Echelon()
    for r in rows:
        e.add(r)
    return len(e)


def sparse_rank(cols: Iterable[Iterable]) -> int:
    """GF(2) rank of a sparse matrix given as columns (sets of row keys).

    Markowitz-style: eliminate the lightest column on its least shared row, so
    structured relation matrices stay sparse.
    """
    import heapq

    colset: dict[int, set] = {}
    rows: dict = {}
    for j, c in enumerate(cols):
        c = set(c)
        if c:
            colset[j] = c
            for g in c:
                rows.setdefault(g, set()).add(j)
    heap = [(len(c), j) for j, c in colset.items()]
    heapq.heapify(heap)
    r = 0
    while heap:
        w, j = heapq.heappop(heap)
        c = colset.get(j)
        if c is None or len(c) != w:
            continue
        g = min(c, key=lambda x: len(rows[x]))
        r += 1
        del colset[j]
        for x in c:
            rows[x].discard(j)
        for j2 in list(rows[g]):
            c2 = colset[j2]
            for x in c:
                if x in c2:
                    c2.discard(x)
                    rows[x].discard(j2)
                else:
                    c2.add(x)
                    rows[x].add(j2)
            if c2:
                heapq.heappush(heap, (len(c2), j2))
            else:
                del colset[j2]
        del rows[g]
    return r


def nullspace(rows: Sequence[int], n: int) -> list[int]:
    """Basis of {x in GF(2)^n : <row, x> = 0 for all rows}."""
    # reduced row echelon keyed by pivot, with full back-substitution
    piv: dict[int, int] = {}
    for r in rows:
        for b, p in piv.items():
            if r >> b & 1:
                r ^= p
        if not r:
            continue
        b = (r & -r).bit_length() - 1
        for k in list(piv):
            if piv[k] >> b & 1:
                piv[k] ^= r
        piv[b] = r
    out = []
    for f in range(n):
        if f in piv:
            continue
        x = 1 << f
        for b, p in piv.items():
            if p >> f & 1:
                x |= 1 << b
        out.append(x)
    return out


def solve_affine(rows: Sequence[int], rhs: Sequence[int]) -> tuple[int | None, int]:
    """Solve <rows[i], x> = rhs[i] over GF(2).

    Returns (x, 0) for a particular solution, or (None, certificate) where the
    certificate is a bitset over equation indices whose sum reads 0 = 1.
    """
    piv: dict[int, tuple[int, int, int]] = {}  # pivot index + 1 -> (row, rhs, tag)
    for i, (r, c) in enumerate(zip(rows, rhs)):
        tag = 1 << i
        while r:
            got = piv.get((r & -r).bit_length())
            if got is None:
                break
            pr, pc, pt = got
            r ^= pr
            c ^= pc
            tag ^= pt
        if r == 0:
            if c:
                return None, tag
            continue
        piv[(r & -r).bit_length()] = (r, c, tag)
    x = 0
    for b in sorted(piv, reverse=True):
        r, c, _ = piv[b]
        low = 1 << (b - 1)
        rest = r ^ low
        val = c ^ (bin(rest & x).count("1") & 1)
        if val:
            x |= low
    return x, 0


def sparse_solve_affine(rows: Sequence[Iterable[int]], rhs: Sequence[int]) -> tuple[set | None, set]:
    """Solve sum_{j in rows[i]} x_j = rhs[i] over GF(2) for sparse rows.

    Returns (support of a particular solution, set()) or (None, certificate),
    the certificate being equation indices whose sum reads 0 = 1.  Pivoting is
    Markowitz-style as in sparse_rank; certificates are only tracked on a
    second pass once the system is known to be inconsistent.
    """
    got = _sparse_affine(rows, rhs, False)
    if got is not None:
        return got, set()
    return None, _sparse_affine(rows, rhs, True)


def _sparse_affine(rows, rhs, track: bool):
    import heapq

    live: dict[int, list] = {}  # equation -> [vars, rhs, tags]
    col: dict[int, set] = {}
    for i, (r, c) in enumerate(zip(rows, rhs)):
        r = set(r)
        live[i] = [r, c & 1, {i} if track else None]
        for v in r:
            col.setdefault(v, set()).add(i)
    heap = [(len(e[0]), i) for i, e in live.items()]
    heapq.heapify(heap)
    order = []
    while heap:
        w, i = heapq.heappop(heap)
        e = live.get(i)
        if e is None or len(e[0]) != w:
            continue
        r, c, tags = e
        del live[i]
        if not r:
            if c:
                return tags if track else None
            continue
        v = min(r, key=lambda x: len(col[x]))
        for x in r:
            col[x].discard(i)
        for i2 in list(col[v]):
            e2 = live[i2]
            r2 = e2[0]
            for x in r:
                if x in r2:
                    r2.discard(x)
                    col[x].discard(i2)
                else:
                    r2.add(x)
                    col[x].add(i2)
            e2[1] ^= c
            if track:
                e2[2] ^= tags
            heapq.heappush(heap, (len(r2), i2))
        del col[v]
        order.append((v, r, c))
    if track:
        raise AssertionError("inconsistent on the first pass but consistent on the second")
    x: set = set()
    for v, r, c in reversed(order):
        val = c
        for y in r:
            if y != v and y in x:
                val ^= 1
        if val:
            x.add(v)
    return x


def bits(v: int) -> list[int]:
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def popcount(v: int) -> int:
    return bin(v).count("1")


def int_elementary_divisors(matrix: list[list[int]]) -> list[int]:
    """Nonzero invariant factors of an integer matrix (exact, arbitrary precision)."""
    if not matrix or not matrix[0]:
        return []
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import invariant_factors

    facs = invariant_factors(Matrix(matrix), domain=ZZ)
    return [abs(int(f)) for f in facs if f != 0]
