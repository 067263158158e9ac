"""Star trees T_n: vertices, metric, cones and the meet map."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple


class Vertex(NamedTuple):
    """A vertex of a star tree; ``(0, 0)`` is the root."""

    branch: int
    level: int

    @property
    def is_root(self) -> bool:
        return self.level == 0

    def __str__(self) -> str:
        return "v0" if self.is_root else f"v{self.branch}_{self.level}"


ROOT = Vertex(0, 0)

_VERTEX_RE = re.compile(r"^v(?:0|(\d+)_(\d+))$")


def vertex(branch: int, level: int) -> Vertex:
    if level == 0:
        return ROOT
    if branch < 1 or level < 1:
        raise ValueError(f"invalid vertex ({branch},{level})")
    return Vertex(branch, level)


def parse_vertex(text: str) -> Vertex:
    m = _VERTEX_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad vertex literal {text!r}")
    if m.group(1) is None:
        return ROOT
    return vertex(int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class Tree:
    n_ends: int

    def __post_init__(self) -> None:
        if self.n_ends < 1:
            raise ValueError("a star tree needs at least one end")

    def __str__(self) -> str:
        return f"T{self.n_ends}"

    def check(self, *vs: Vertex) -> None:
        for v in vs:
            if v.level < 0 or (v.level > 0 and not 1 <= v.branch <= self.n_ends):
                raise ValueError(f"vertex {v} does not belong to {self}")
            if v.level == 0 and v.branch != 0:
                raise ValueError(f"root must be serialized as (0,0), got {tuple(v)}")

    def meet(self, u: Vertex, v: Vertex) -> Vertex:
        self.check(u, v)
        return meet(u, v)

    def distance(self, u: Vertex, v: Vertex) -> int:
        self.check(u, v)
        return distance(u, v)

    def in_cone(self, x: Vertex, w: Vertex) -> bool:
        self.check(x, w)
        return in_cone(x, w)


def meet(u: Vertex, v: Vertex) -> Vertex:
    """Nearest common point of the arcs from the root to u and to v."""
    if u.is_root or v.is_root or u.branch != v.branch:
        return ROOT
    return u if u.level <= v.level else v


def distance(u: Vertex, v: Vertex) -> int:
    w = meet(u, v)
    return (u.level - w.level) + (v.level - w.level)


def in_cone(x: Vertex, w: Vertex) -> bool:
    """True iff w lies on the arc from the root to x."""
    if w.is_root:
        return True
    return x.branch == w.branch and x.level >= w.level


def lower(v: Vertex, steps: int) -> Vertex:
    """Move ``steps`` edges towards the root."""
    if v.level - steps <= 0:
        return ROOT
    return Vertex(v.branch, v.level - steps)


def parse_tree(text: str) -> Tree:
    m = re.fullmatch(r"T(\d+)", text.strip())
    if not m:
        raise ValueError(f"bad tree literal {text!r}")
    return Tree(int(m.group(1)))
