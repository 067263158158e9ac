import pytest
from hypothesis import given, settings, strategies as st

from ctrlalg.tree import ROOT, Tree, distance, in_cone, lower, meet, parse_tree, parse_vertex, vertex

T3 = Tree(3)


@st.composite
def vertices(draw, n=3, max_level=64):
    level = draw(st.integers(0, max_level))
    return vertex(draw(st.integers(1, n)), level) if level else ROOT


def test_meet_examples():
    assert meet(vertex(1, 3), vertex(1, 5)) == vertex(1, 3)
    assert meet(vertex(1, 3), vertex(2, 5)) == ROOT
    u = vertex(2, 7)
    assert meet(u, u) == u


def test_distance_examples():
    assert distance(vertex(1, 3), vertex(1, 5)) == 2
    assert distance(vertex(1, 2), vertex(2, 3)) == 5
    assert distance(ROOT, ROOT) == 0


def test_in_cone_examples():
    assert in_cone(vertex(1, 5), vertex(1, 3))
    assert not in_cone(vertex(2, 5), vertex(1, 3))
    assert all(in_cone(x, ROOT) for x in (ROOT, vertex(1, 1), vertex(3, 40)))


def test_tree_checks_membership():
    with pytest.raises(ValueError):
        T3.meet(vertex(4, 1), ROOT)
    with pytest.raises(ValueError):
        Tree(0)
    with pytest.raises(ValueError):
        vertex(0, 2)


def test_text_forms():
    assert parse_vertex("v0") == ROOT
    assert parse_vertex("v2_17") == vertex(2, 17)
    assert str(vertex(2, 17)) == "v2_17" and str(ROOT) == "v0"
    assert parse_tree("T3") == T3
    with pytest.raises(ValueError):
        parse_vertex("v2")
    assert lower(vertex(1, 5), 2) == vertex(1, 3) and lower(vertex(1, 2), 5) == ROOT


@settings(max_examples=1000, deadline=None)
@given(vertices(), vertices(), vertices())
def test_meet_laws(u, v, w):
    assert meet(u, v) == meet(v, u)
    assert meet(meet(u, v), w) == meet(u, meet(v, w))
    assert meet(u, u) == u
    assert in_cone(u, meet(u, v)) and in_cone(v, meet(u, v))


@settings(max_examples=1000, deadline=None)
@given(vertices(), vertices(), vertices())
def test_cone_law(x, y, w):
    assert (in_cone(x, w) and in_cone(y, w)) == in_cone(meet(x, y), w)


@settings(max_examples=1000, deadline=None)
@given(vertices(), vertices(), vertices())
def test_distance_is_a_tree_metric(u, v, w):
    m = meet(u, v)
    assert distance(u, v) == distance(u, m) + distance(m, v) == distance(v, u)
    assert distance(u, w) <= distance(u, v) + distance(v, w)
    assert (distance(u, v) == 0) == (u == v)


def test_meets_of_escaping_sequences_escape():
    # same-branch sequences with levels -> infinity have meets -> infinity
    import random

    rng = random.Random(7)
    xs = [vertex(2, k + rng.randint(1, 5)) for k in range(1000)]
    ys = [vertex(2, k // 2 + 1) for k in range(1000)]
    levels = [meet(x, y).level for x, y in zip(xs, ys)]
    assert all(lv >= k // 2 + 1 for k, lv in enumerate(levels))
