import random
from fractions import Fraction

import pytest

import oracles
from snowflake_billiards.boundary import (
    AngleClass,
    build_prefractal,
    first_hit,
    scale_for,
    triangle_count,
    vertex_census,
)
from snowflake_billiards.dynamics import random_interior_point
from snowflake_billiards.errors import BudgetError, DomainError
from snowflake_billiards.lattice import LatticePoint, LatticeVector, OrientationClass, polygon_lattice_area

P = LatticePoint
V = LatticeVector


def test_side_counts():
    assert len(build_prefractal(0)) == 3
    assert len(build_prefractal(1)) == 12
    assert len(build_prefractal(3)) == 192


def test_level_budget():
    with pytest.raises(BudgetError, match="budget"):
        build_prefractal(11)
    with pytest.raises(DomainError):
        build_prefractal(-1)


def test_ks0_geometry():
    p = build_prefractal(0)
    assert p.vertex_points() == [P(0, 0), P(1, 0), P(0, 1)]
    assert [s.address for s in p.sides] == ["5", "1", "3"]
    assert all(v.angle is AngleClass.ACUTE for v in p.vertices)


def test_ks1_addresses():
    assert [s.address for s in build_prefractal(1).sides] == oracles.KS1_ADDRESSES


@pytest.mark.parametrize("n", range(4))
def test_vertices_match_turtle_oracle(n):
    exact = [complex(*v.point.to_cartesian()) for v in build_prefractal(n).vertices]
    ref = oracles.koch_vertices(n)
    assert len(exact) == len(ref)
    assert max(abs(a - b) for a, b in zip(exact, ref)) < 1e-12


@pytest.mark.parametrize("n", range(7))
def test_sides_perimeter_orientation(n):
    p = build_prefractal(n)
    assert len(p) == 3 * 4**n
    assert p.perimeter() == 3 * Fraction(4, 3) ** n
    if n <= 4:
        for s in p.sides:
            assert s.segment.vector.squared_length == Fraction(1, 9**n)
            assert s.orientation in OrientationClass


@pytest.mark.parametrize("n", range(7))
def test_census(n):
    c = vertex_census(build_prefractal(n))
    assert c == (4**n + 2, 2 * (4**n - 1))


def test_census_examples():
    for n, expected in enumerate(oracles.CENSUS):
        assert tuple(vertex_census(build_prefractal(n))) == expected


@pytest.mark.parametrize("n", range(7))
def test_area_closed_form(n):
    p = build_prefractal(n)
    closed = Fraction(1, 2) * (Fraction(8, 5) - Fraction(3, 5) * Fraction(4, 9) ** n)
    assert p.lattice_area() == closed
    if n <= 4:
        assert polygon_lattice_area(p.vertex_points()) == closed


def test_area_oracle_values():
    for n, a in enumerate(oracles.KS_AREAS):
        assert build_prefractal(n).lattice_area() == a


def test_triangle_count():
    assert triangle_count(1, 1) == 12
    assert triangle_count(1, 2) == 108
    assert [triangle_count(0, k) for k in range(4)] == [1, 9, 81, 729]
    for n in range(5):
        for k in range(n, n + 3):
            assert isinstance(triangle_count(n, k), int)
    with pytest.raises(DomainError):
        triangle_count(2, 1)


@pytest.mark.parametrize("n", range(5))
def test_ghosts_and_cells(n):
    p = build_prefractal(n)
    assert len(p.ghosts) == 3 * 4**n
    for side, g in zip(p.sides, p.ghosts):
        assert side.segment.relative_position(g.segment.start) == Fraction(1, 3)
        assert side.segment.relative_position(g.segment.end) == Fraction(2, 3)
        m = g.segment.midpoint
        assert (2 * 3 ** (n + 1)) % m.a.denominator == 0
        assert (2 * 3 ** (n + 1)) % m.b.denominator == 0
    if n:
        parent = build_prefractal(n - 1)
        assert len(p.cells) == 3 * 4 ** (n - 1)
        for c in p.cells:
            assert (c.triangle[0], c.triangle[2]) == (c.ghost.segment.start, c.ghost.segment.end)
            # the apex lies outside the parent table
            assert not parent.contains(c.apex)


@pytest.mark.parametrize("n", range(1, 5))
def test_nesting(n):
    p = build_prefractal(n)
    for v in build_prefractal(n - 1).vertex_points():
        assert p.contains(v)


def _random_ray(rng):
    o = random_interior_point(rng)
    while True:
        a, b = rng.randint(-6, 6), rng.randint(-6, 6)
        if (a, b) != (0, 0):
            return o, V(a, b).primitive()


def _normalize(p, hit, M):
    # a vertex may be reported as the end of one side or the start of the next
    if hit is None:
        return None
    point = p.sides[hit.side].segment.point_at(Fraction(hit.s, M))
    return point, Fraction(hit.t_num, hit.t_den), hit.at_vertex


@pytest.mark.parametrize("n", range(5))
def test_grid_trace_matches_brute_force(n):
    p = build_prefractal(n)
    rng = random.Random(1000 + n)
    for _ in range(1000):
        o, d = _random_ray(rng)
        M = scale_for((o.a, o.b), d, p.unit)
        fine = p.unit * M
        args = (int(o.a * fine), int(o.b * fine), *d.as_ints(), M)
        assert _normalize(p, p.trace(*args), M) == _normalize(p, p.brute_trace(*args), M)


@pytest.mark.parametrize("n", range(4))
def test_first_hit_matches_float_oracle(n):
    p = build_prefractal(n)
    pts = oracles.koch_vertices(n)
    rng = random.Random(n)
    for _ in range(200):
        o, d = _random_ray(rng)
        h = first_hit(p, o, d)
        z = oracles.cart(o.a, o.b)
        ref = oracles.float_first_hit(pts, z, oracles.cart(d.a, d.b))
        assert abs(complex(*h.point.to_cartesian()) - ref[2]) < 1e-9
        assert float(h.t) == pytest.approx(ref[0], rel=1e-9)


def test_first_hit_examples():
    h = first_hit(build_prefractal(0), P(Fraction(7, 12), 0), V(0, 1))
    assert h.side.address == "1" and h.point == P(Fraction(7, 12), Fraction(5, 12)) and not h.at_vertex
    assert h.t == Fraction(5, 12)
    h = first_hit(build_prefractal(1), P(Fraction(7, 12), 0), V(0, -1))
    assert h.side.address == "51"
    assert h.side.segment.relative_position(h.point) == Fraction(3, 4)
    centroid = P(Fraction(1, 3), Fraction(1, 3))
    h = first_hit(build_prefractal(0), centroid, V(-1, -1))
    assert h.at_vertex and h.point == P(0, 0)


def test_first_hit_outward_rejected():
    with pytest.raises(DomainError):
        first_hit(build_prefractal(0), P(Fraction(1, 2), 0), V(0, -1))


def test_locate_and_contains():
    p = build_prefractal(1)
    assert p.contains(P(Fraction(1, 3), Fraction(1, 3)))
    assert p.contains(P(Fraction(5, 9), Fraction(-1, 9)))  # centroid of the base cell
    assert not p.contains(P(2, 2))
    assert p.locate(P(Fraction(5, 9), Fraction(-1, 9))) is None
    k, pos = p.locate(P(Fraction(1, 2), Fraction(-1, 6)))
    assert p.side(k).address == "51" and pos == Fraction(1, 2)
    k, pos = p.locate(P(Fraction(1, 6), 0))
    assert p.side(k).address == "54" and pos == Fraction(1, 2)
