"""Exact plane geometry in the triangular-lattice basis.

Points and vectors are stored as coordinates ``(a, b)`` with respect to
``e1 = (1, 0)`` and ``e2 = (1/2, sqrt(3)/2)``.  Every vertex of a Koch
prefractal and every point of an orbit in a lattice direction is rational
in this basis, so no irrational number ever enters a computation.  Cartesian
floats appear only in :func:`to_cartesian`, which exists for rendering.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Union

from .errors import DomainError

RationalLike = Union[Fraction, int, str]

SQRT3_2 = math.sqrt(3.0) / 2.0


def as_rational(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {x!r}") from exc
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact rational")


def format_rational(x: Fraction) -> str:
    """Canonical ``"p/q"`` serialization (``"0/1"`` for zero)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    return as_rational(text)


def cross(u: tuple, v: tuple) -> int:
    """Lattice cross product; the Euclidean one is this times sqrt(3)/2."""
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class LatticeVector:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "b", as_rational(self.b))

    @property
    def squared_length(self) -> Fraction:
        return self.a * self.a + self.a * self.b + self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(-self.a, -self.b)

    def __mul__(self, t) -> "LatticeVector":
        t = as_rational(t)
        return LatticeVector(self.a * t, self.b * t)

    __rmul__ = __mul__

    def cross(self, other: "LatticeVector") -> Fraction:
        return self.a * other.b - self.b * other.a

    def primitive(self) -> "LatticeVector":
        """The positive multiple with coprime integer coordinates."""
        if self.is_zero():
            raise DomainError("zero vector has no primitive form")
        den = math.lcm(self.a.denominator, self.b.denominator)
        ia, ib = int(self.a * den), int(self.b * den)
        g = math.gcd(ia, ib)
        return LatticeVector(ia // g, ib // g)

    def as_ints(self) -> tuple[int, int]:
        if self.a.denominator != 1 or self.b.denominator != 1:
            raise DomainError(f"{self} is not an integer vector")
        return int(self.a), int(self.b)

    @property
    def direction_index(self) -> Optional[int]:
        """k if this is the unit vector at angle k*pi/3, else None."""
        return UNIT_DIRECTIONS.get((self.a, self.b))

    def __str__(self) -> str:
        return f"({self.a},{self.b})"


@dataclass(frozen=True)
class LatticePoint:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "b", as_rational(self.b))

    def __add__(self, v: LatticeVector) -> "LatticePoint":
        return LatticePoint(self.a + v.a, self.b + v.b)

    def __sub__(self, other):
        if isinstance(other, LatticePoint):
            return LatticeVector(self.a - other.a, self.b - other.b)
        return LatticePoint(self.a - other.a, self.b - other.b)

    def to_cartesian(self) -> tuple[float, float]:
        return to_cartesian(self.a, self.b)

    def __str__(self) -> str:
        return f"({self.a},{self.b})"


def to_cartesian(a, b) -> tuple[float, float]:
    return float(a) + float(b) / 2.0, float(b) * SQRT3_2


# direction k*pi/3 for k = 0..5
UNIT_VECTORS: tuple[tuple[int, int], ...] = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
UNIT_DIRECTIONS = {(Fraction(a), Fraction(b)): k for k, (a, b) in enumerate(UNIT_VECTORS)}


class OrientationClass(enum.Enum):
    """Slope of a side modulo pi; the value is the multiple of pi/3."""

    HORIZONTAL = 0
    UP_RIGHT = 1
    UP_LEFT = 2

    @classmethod
    def of(cls, v) -> "OrientationClass":
        a, b = (v.a, v.b) if isinstance(v, LatticeVector) else v
        if a == 0 and b == 0:
            raise DomainError("zero vector has no orientation")
        if b == 0:
            return cls.HORIZONTAL
        if a == 0:
            return cls.UP_RIGHT
        if a == -b:
            return cls.UP_LEFT
        raise DomainError(f"vector ({a},{b}) is not in the pi/3 family")


def reflect_ints(a, b, orientation: OrientationClass):
    """Specular reflection across a line of the given orientation.

    Works for ints or Fractions; the maps are integral and involutive.
    """
    if orientation is OrientationClass.HORIZONTAL:
        return a + b, -b
    if orientation is OrientationClass.UP_RIGHT:
        return -a, a + b
    return -b, -a


def reflect_direction(d: LatticeVector, o: OrientationClass) -> LatticeVector:
    if d.is_zero():
        raise DomainError("cannot reflect the zero vector")
    return LatticeVector(*reflect_ints(d.a, d.b, o))


@dataclass(frozen=True)
class Segment:
    start: LatticePoint
    end: LatticePoint

    def __post_init__(self):
        if self.start == self.end:
            raise DomainError("degenerate segment")
        OrientationClass.of(self.end - self.start)

    @property
    def vector(self) -> LatticeVector:
        return self.end - self.start

    @property
    def orientation(self) -> OrientationClass:
        return OrientationClass.of(self.vector)

    @property
    def length(self) -> Fraction:
        # a pi/3-family vector is t*u with |u| = 1, so its length is |t|
        v = self.vector
        return max(abs(v.a), abs(v.b))

    @property
    def midpoint(self) -> LatticePoint:
        return LatticePoint((self.start.a + self.end.a) / 2, (self.start.b + self.end.b) / 2)

    def point_at(self, s) -> LatticePoint:
        return self.start + self.vector * as_rational(s)

    def contains(self, p: LatticePoint) -> bool:
        w = p - self.start
        v = self.vector
        if w.cross(v) != 0:
            return False
        s = _param_along(w, v)
        return 0 <= s <= 1

    def relative_position(self, p: LatticePoint) -> Fraction:
        """Position of a point of the segment as a fraction of its length."""
        if not self.contains(p):
            raise DomainError(f"{p} is not on {self}")
        return _param_along(p - self.start, self.vector)

    def __str__(self) -> str:
        return f"[{self.start}->{self.end}]"


def _param_along(w: LatticeVector, v: LatticeVector) -> Fraction:
    return w.a / v.a if v.a != 0 else w.b / v.b


def reflect_point(p: LatticePoint, s: Segment) -> LatticePoint:
    w = p - s.start
    return s.start + LatticeVector(*reflect_ints(w.a, w.b, s.orientation))


class RayHit(NamedTuple):
    t: Fraction
    point: LatticePoint
    at_vertex: bool


def ray_hit(origin: LatticePoint, d: LatticeVector, s: Segment) -> Optional[RayHit]:
    """First forward intersection of ``origin + t*d`` (t > 0) with ``s``."""
    if d.is_zero():
        raise DomainError("ray direction must be nonzero")
    v = s.vector
    w = s.start - origin
    den = d.cross(v)
    if den == 0:
        if w.cross(d) != 0:
            return None
        # collinear: the ray runs along the segment's own line
        s0 = _param_along(origin - s.start, v)
        if 0 < s0 < 1:
            raise DomainError("ray origin lies inside the segment and runs along it")
        hits = []
        for end in (s.start, s.end):
            t = _param_along(end - origin, d)
            if t > 0:
                hits.append((t, end))
        if not hits:
            return None
        t, end = min(hits, key=lambda h: h[0])
        return RayHit(t, end, True)
    t = w.cross(v) / den
    u = w.cross(d) / den
    if t <= 0 or not (0 <= u <= 1):
        return None
    point = origin + d * t
    return RayHit(t, point, u == 0 or u == 1)


def polygon_lattice_area(vertices: Sequence[LatticePoint]) -> Fraction:
    """Signed shoelace area in units of the parallelogram spanned by e1, e2."""
    if len(vertices) < 3:
        raise DomainError("a polygon needs at least three vertices")
    total = Fraction(0)
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        total += p.a * q.b - p.b * q.a
    return total / 2
