"""Koch snowflake prefractals KS_n as exact lattice polygons.

Internally a level-``n`` prefractal keeps its vertices as integer pairs in
units of ``3**-n``; every side is then a single unit edge of the triangular
lattice.  Ray queries run on integers scaled by a per-query factor ``M``
(so that every intersection point is integral) and walk a uniform bucket
grid.  The public surface speaks :class:`~fractions.Fraction` and the
lattice types.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from collections.abc import Sequence
from typing import NamedTuple, Optional

from . import addressing
from .errors import BudgetError, DomainError, InvariantViolation
from .lattice import (
    UNIT_VECTORS,
    LatticePoint,
    LatticeVector,
    OrientationClass,
    Segment,
    as_rational,
    cross,
)

MAX_LEVEL = 10

_ORIENT_OF_DIR = [OrientationClass.of(u) for u in UNIT_VECTORS]


class AngleClass(enum.Enum):
    """Interior angle at a vertex, stored as the rational multiple (p, q) of pi."""

    ACUTE = (1, 3)
    REFLEX = (4, 3)

    @property
    def label(self) -> str:
        return "pi/3" if self is AngleClass.ACUTE else "4pi/3"


@dataclass(frozen=True)
class Side:
    segment: Segment
    scale: int
    index: int  # 1-based, counterclockwise from the origin corner
    address: str

    @property
    def orientation(self) -> OrientationClass:
        return self.segment.orientation

    @property
    def direction_index(self) -> int:
        return (self.segment.vector * 3**self.scale).direction_index


@dataclass(frozen=True)
class Ghost:
    segment: Segment
    parent_side: int  # index of the side whose middle third this is


@dataclass(frozen=True)
class Cell:
    triangle: tuple[LatticePoint, LatticePoint, LatticePoint]  # base start, apex, base end
    ghost: Ghost
    index: int

    @property
    def apex(self) -> LatticePoint:
        return self.triangle[1]


@dataclass(frozen=True)
class Vertex:
    point: LatticePoint
    angle: AngleClass


class Census(NamedTuple):
    count_pi3: int
    count_4pi3: int


class FirstHit(NamedTuple):
    side: Side
    point: LatticePoint
    t: Fraction
    at_vertex: bool


class RawHit(NamedTuple):
    """Integer-kernel hit: side index (0-based), offset along it, ray parameter."""

    side: int
    s: int
    t_num: int
    t_den: int
    at_vertex: bool


class Prefractal:
    """The polygon KS_n with sides, ghosts, cells and a first-hit index."""

    def __init__(self, level: int, verts: list, dirs: list, addresses: list):
        self.level = level
        self._verts = verts
        self._dirs = dirs
        self.addresses = addresses
        self._index_of_address = None
        self._grid = None

    def __repr__(self) -> str:
        return f"Prefractal(level={self.level}, sides={len(self._dirs)})"

    def __len__(self) -> int:
        return len(self._dirs)

    @property
    def unit(self) -> int:
        """Integer coordinates are in units of 1/unit."""
        return 3**self.level

    # -- exposed geometry ------------------------------------------------

    def side(self, k: int) -> Side:
        """Side with 1-based index ``k``."""
        return self.sides[k - 1]

    @cached_property
    def sides(self) -> "_SideList":
        return _SideList(self)

    def _make_side(self, i: int) -> Side:
        q = self.unit
        n = len(self._verts)
        (a0, b0), (a1, b1) = self._verts[i], self._verts[(i + 1) % n]
        seg = Segment(LatticePoint(Fraction(a0, q), Fraction(b0, q)), LatticePoint(Fraction(a1, q), Fraction(b1, q)))
        return Side(seg, self.level, i + 1, self.addresses[i])

    @cached_property
    def vertices(self) -> list[Vertex]:
        out = []
        for i, (a, b) in enumerate(self._verts):
            out.append(Vertex(LatticePoint(Fraction(a, self.unit), Fraction(b, self.unit)), self._angle_at(i)))
        return out

    def _angle_at(self, i: int) -> AngleClass:
        turn = (self._dirs[i] - self._dirs[i - 1]) % 6
        if turn == 2:
            return AngleClass.ACUTE
        if turn == 5:
            return AngleClass.REFLEX
        raise InvariantViolation(f"unexpected turn {turn} at vertex {i} of KS_{self.level}")

    @cached_property
    def ghosts(self) -> list[Ghost]:
        out = []
        for side in self.sides:
            seg = side.segment
            out.append(Ghost(Segment(seg.point_at(Fraction(1, 3)), seg.point_at(Fraction(2, 3))), side.index))
        return out

    @cached_property
    def cells(self) -> list[Cell]:
        """Cells of this level: the bumps glued over ghosts of the previous level."""
        if self.level == 0:
            return []
        parent = build_prefractal(self.level - 1)
        out = []
        for k, ghost in enumerate(parent.ghosts):
            # the four children of parent side k are sides 4k .. 4k+3 here
            bump = self.sides[4 * k + 1].segment
            out.append(Cell((bump.start, bump.end, self.sides[4 * k + 2].segment.end), ghost, k + 1))
        return out

    def vertex_points(self) -> list[LatticePoint]:
        return [v.point for v in self.vertices]

    def index_of_address(self, word: str) -> int:
        """1-based side index of an address."""
        if self._index_of_address is None:
            self._index_of_address = {w: i + 1 for i, w in enumerate(self.addresses)}
        try:
            return self._index_of_address[word]
        except KeyError:
            raise DomainError(f"no side of KS_{self.level} has address {word!r}") from None

    def side_by_address(self, word: str) -> Side:
        return self.side(self.index_of_address(word))

    def lattice_area(self) -> Fraction:
        total = 0
        v = self._verts
        n = len(v)
        for i in range(n):
            (a0, b0), (a1, b1) = v[i], v[(i + 1) % n]
            total += a0 * b1 - b0 * a1
        return Fraction(total, 2 * self.unit**2)

    def perimeter(self) -> Fraction:
        return sum((s.segment.length for s in self.sides), Fraction(0))

    # -- integer kernel --------------------------------------------------

    def raw_side(self, k: int) -> tuple[tuple[int, int], int]:
        """(start vertex in 1/unit units, direction index) of 0-based side k."""
        return self._verts[k], self._dirs[k]

    def _build_grid(self):
        level = self.level
        g = max(1, 3**level // 2**level)
        cells: dict = {}
        amin = bmin = 10**30
        amax = bmax = -(10**30)
        for k, ((a, b), d) in enumerate(zip(self._verts, self._dirs)):
            ua, ub = UNIT_VECTORS[d]
            a2, b2 = a + ua, b + ub
            lo_a, hi_a = min(a, a2), max(a, a2)
            lo_b, hi_b = min(b, b2), max(b, b2)
            amin, amax = min(amin, lo_a), max(amax, hi_a)
            bmin, bmax = min(bmin, lo_b), max(bmax, hi_b)
            for i in range(lo_a // g, hi_a // g + 1):
                for j in range(lo_b // g, hi_b // g + 1):
                    cells.setdefault((i, j), []).append(k)
        self._grid = (g, cells, amin // g, amax // g, bmin // g, bmax // g)

    def trace(self, px: int, py: int, da: int, db: int, scale: int) -> Optional[RawHit]:
        """First boundary hit of the ray (px, py) + t (da, db), t > 0.

        Coordinates are integers in units of ``1/(unit*scale)``.  Returns
        ``None`` when the ray leaves the grid without meeting a side.
        """
        if self._grid is None:
            self._build_grid()
        g0, cells, imin, imax, jmin, jmax = self._grid
        G = g0 * scale
        M = scale
        verts, dirs = self._verts, self._dirs

        if da > 0:
            i = px // G
            ta_num, ta_den, si = (i + 1) * G - px, da, 1
        elif da < 0:
            i = -((-px) // G) - 1
            ta_num, ta_den, si = px - i * G, -da, -1
        else:
            i = px // G
            ta_num, ta_den, si = 1, 0, 0
        if db > 0:
            j = py // G
            tb_num, tb_den, sj = (j + 1) * G - py, db, 1
        elif db < 0:
            j = -((-py) // G) - 1
            tb_num, tb_den, sj = py - j * G, -db, -1
        else:
            j = py // G
            tb_num, tb_den, sj = 1, 0, 0

        while imin <= i <= imax and jmin <= j <= jmax:
            # exit parameter of this cell, as a fraction (infinite when den == 0)
            if ta_den == 0:
                ex_num, ex_den = tb_num, tb_den
            elif tb_den == 0:
                ex_num, ex_den = ta_num, ta_den
            elif ta_num * tb_den <= tb_num * ta_den:
                ex_num, ex_den = ta_num, ta_den
            else:
                ex_num, ex_den = tb_num, tb_den

            best = None
            for k in cells.get((i, j), ()):
                ua, ub = UNIT_VECTORS[dirs[k]]
                den = da * ub - db * ua
                if den == 0:
                    continue
                va, vb = verts[k]
                wa, wb = va * M - px, vb * M - py
                tn = wa * ub - wb * ua
                sn = wa * db - wb * da
                if den < 0:
                    den, tn, sn = -den, -tn, -sn
                if tn <= 0 or sn < 0 or sn > M * den:
                    continue
                if best is None or tn * best[3] < best[2] * den:
                    best = [k, sn, tn, den, False]
                elif tn * best[3] == best[2] * den:
                    best[4] = True  # two sides at the same parameter: a shared vertex
            if best is not None and best[2] * ex_den <= ex_num * best[3]:
                k, sn, tn, den, tie = best
                if sn % den:
                    raise InvariantViolation("intersection is not on the integer grid; scale too small")
                s = sn // den
                at_vertex = tie or s == 0 or s == M
                return RawHit(k, s, tn, den, at_vertex)

            # advance to the neighbouring cell(s)
            if ta_den == 0:
                j += sj
                tb_num += G
            elif tb_den == 0:
                i += si
                ta_num += G
            else:
                lhs, rhs = ta_num * tb_den, tb_num * ta_den
                if lhs <= rhs:
                    i += si
                    ta_num += G
                if rhs <= lhs:
                    j += sj
                    tb_num += G
        return None

    def brute_trace(self, px: int, py: int, da: int, db: int, scale: int) -> Optional[RawHit]:
        """Reference scan over every side; same contract as :meth:`trace`."""
        M = scale
        best = None
        for k, ((va, vb), d) in enumerate(zip(self._verts, self._dirs)):
            ua, ub = UNIT_VECTORS[d]
            den = da * ub - db * ua
            if den == 0:
                continue
            wa, wb = va * M - px, vb * M - py
            tn = wa * ub - wb * ua
            sn = wa * db - wb * da
            if den < 0:
                den, tn, sn = -den, -tn, -sn
            if tn <= 0 or sn < 0 or sn > M * den:
                continue
            if best is None or tn * best[3] < best[2] * den:
                best = [k, sn, tn, den, False]
            elif tn * best[3] == best[2] * den:
                best[4] = True
        if best is None:
            return None
        k, sn, tn, den, tie = best
        s = sn // den
        return RawHit(k, s, tn, den, tie or s == 0 or s == M)

    # -- point location ----------------------------------------------------

    def locate(self, p: LatticePoint) -> Optional[tuple[int, Fraction]]:
        """(1-based side index, relative position) if ``p`` is on the boundary.

        A vertex is reported on the side it starts (position 0).
        """
        if self._grid is None:
            self._build_grid()
        g, cells = self._grid[0], self._grid[1]
        a, b = p.a * self.unit, p.b * self.unit
        ci, cj = math.floor(a / g), math.floor(b / g)
        found = None
        for k in cells.get((ci, cj), ()):
            (va, vb), d = self._verts[k], self._dirs[k]
            ua, ub = UNIT_VECTORS[d]
            wa, wb = a - va, b - vb
            if wa * ub - wb * ua != 0:
                continue
            s = wa * ua if ua else wb * ub
            if 0 <= s <= 1:
                pos = Fraction(s)
                if pos == 1:
                    cand = ((k + 1) % len(self) + 1, Fraction(0))
                else:
                    cand = (k + 1, pos)
                if found is None or cand[1] == 0:
                    found = cand
        return found

    def contains(self, p: LatticePoint) -> bool:
        """Closed point-in-polygon test (boundary counts as inside)."""
        if self.locate(p) is not None:
            return True
        a, b = p.a * self.unit, p.b * self.unit
        inside = False
        n = len(self._verts)
        for k in range(n):
            a0, b0 = self._verts[k]
            a1, b1 = self._verts[(k + 1) % n]
            if (b0 > b) != (b1 > b):
                x = a0 + (b - b0) * Fraction(a1 - a0, b1 - b0)
                if x > a:
                    inside = not inside
        return inside

    def is_inward(self, k: int, d: LatticeVector) -> bool:
        """Whether ``d`` points into the table across the interior of side ``k`` (1-based)."""
        u = UNIT_VECTORS[self._dirs[k - 1]]
        return cross(u, (d.a, d.b)) > 0


class _SideList(Sequence):
    """Sides materialized on first access; KS_8 has 196,608 of them."""

    def __init__(self, p: Prefractal):
        self._p = p
        self._cache: dict[int, Side] = {}

    def __len__(self) -> int:
        return len(self._p)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        side = self._cache.get(i)
        if side is None:
            side = self._cache[i] = self._p._make_side(i)
        return side


def _level0() -> Prefractal:
    return Prefractal(0, [(0, 0), (1, 0), (0, 1)], [0, 2, 4], list(addressing.ROOTS))


def _refine(p: Prefractal) -> Prefractal:
    verts, dirs, addresses = [], [], []
    for k, ((a, b), d) in enumerate(zip(p._verts, p._dirs)):
        ua, ub = UNIT_VECTORS[d]
        r = (d - 1) % 6  # outward turn
        ra, rb = UNIT_VECTORS[r]
        a, b = 3 * a, 3 * b
        verts += [(a, b), (a + ua, b + ub), (a + ua + ra, b + ub + rb), (a + 2 * ua, b + 2 * ub)]
        dirs += [d, r, (d + 1) % 6, d]
        addresses += addressing.children(p.addresses[k])
    return Prefractal(p.level + 1, verts, dirs, addresses)


@lru_cache(maxsize=None)
def _build(n: int) -> Prefractal:
    return _level0() if n == 0 else _refine(_build(n - 1))


def build_prefractal(n: int, max_level: int = MAX_LEVEL) -> Prefractal:
    if n < 0:
        raise DomainError("level must be nonnegative")
    if n > max_level:
        raise BudgetError(f"level {n} exceeds the configured budget of {max_level}")
    return _build(n)


def vertex_census(p: Prefractal) -> Census:
    acute = sum(1 for i in range(len(p)) if p._angle_at(i) is AngleClass.ACUTE)
    return Census(acute, len(p) - acute)


def triangle_count(n: int, k: int) -> int:
    """Number of scale-k equilateral triangles tiling the level-n table."""
    if k < n:
        raise DomainError("the tiling scale k must be at least the level n")
    count = 2 * build_prefractal(n).lattice_area() * 9**k
    if count.denominator != 1:
        raise InvariantViolation(f"non-integral triangle count {count} for KS_{n} at scale {k}")
    return int(count)


def scale_for(points, d: LatticeVector, unit: int) -> int:
    """Scale making every hit of a ray through ``points`` along ``d`` integral."""
    den = 1
    for x in points:
        den = math.lcm(den, (as_rational(x) * unit).denominator)
    p, q = d.as_ints()
    return den * math.lcm(*(abs(c) for c in (p, q, p + q) if c))


def first_hit(p: Prefractal, origin: LatticePoint, d: LatticeVector) -> FirstHit:
    """The boundary point first met by the ray from ``origin`` along ``d``."""
    if d.is_zero():
        raise DomainError("direction must be nonzero")
    dd = d.primitive()
    where = p.locate(origin)
    if where is not None:
        k, pos = where
        if pos != 0:
            if not p.is_inward(k, dd):
                raise DomainError(f"direction {d} points out of the table at {origin}")
        else:
            prev = (k - 2) % len(p) + 1
            left_in, left_prev = p.is_inward(k, dd), p.is_inward(prev, dd)
            ok = (left_in and left_prev) if p.vertices[k - 1].angle is AngleClass.ACUTE else (left_in or left_prev)
            if not ok:
                raise DomainError(f"direction {d} points out of the table at corner {origin}")
    unit = p.unit
    M = scale_for((origin.a, origin.b), dd, unit)
    fine = unit * M
    px, py = origin.a * fine, origin.b * fine
    hit = p.trace(int(px), int(py), *dd.as_ints(), M)
    if hit is None:
        raise DomainError(f"ray from {origin} along {d} does not meet KS_{p.level}; is the origin inside?")
    side = p.sides[hit.side]
    point = side.segment.point_at(Fraction(hit.s, M))
    # rescale t from the primitive direction in fine units back to d
    t = Fraction(hit.t_num, hit.t_den) / fine
    t = t * (dd.a / d.a if d.a != 0 else dd.b / d.b)
    return FirstHit(side, point, t, hit.at_vertex)
