"""The exact billiard map on KS_n tables and everything built from orbits."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Union

from . import addressing
from .boundary import Prefractal, Side, build_prefractal
from .errors import CornerCompatible, DomainError, InvariantViolation
from .lattice import (
    UNIT_VECTORS,
    LatticePoint,
    LatticeVector,
    OrientationClass,
    RationalLike,
    as_rational,
    cross,
    reflect_ints,
)
from .ternary import OrbitKind, classify, expand

DEFAULT_BUDGET = 100_000
DEFAULT_MAX_LEVEL = 8

PI3 = LatticeVector(0, 1)  # direction pi/3 in the fixed frame

_ORIENT = [OrientationClass.of(u) for u in UNIT_VECTORS]


@dataclass(frozen=True)
class BilliardState:
    """A boundary point with the inward direction leaving it."""

    side: Side
    position: Fraction
    direction: LatticeVector

    @property
    def point(self) -> LatticePoint:
        return self.side.segment.point_at(self.position)

    @property
    def key(self) -> tuple:
        return (self.side.index, self.position, self.direction.a, self.direction.b)


class SingularHit(NamedTuple):
    vertex: LatticePoint
    side: Side  # a side ending or starting at the vertex
    t: Fraction


class Status(enum.Enum):
    PERIODIC = "Periodic"
    SINGULAR = "Singular"
    BUDGET_EXCEEDED = "BudgetExceeded"


@dataclass
class Orbit:
    level: int
    states: list[BilliardState]
    status: Status
    params: list[Fraction]  # ray parameter of each leg along its direction vector
    vertex: Optional[LatticePoint] = None
    saddle_connection: bool = False
    backward_states: list[BilliardState] = field(default_factory=list)

    @property
    def period(self) -> Optional[int]:
        return len(self.states) if self.status is Status.PERIODIC else None

    @property
    def pi3_family(self) -> bool:
        return all(s.direction.direction_index is not None for s in self.states)

    @property
    def length(self) -> Optional[Fraction]:
        """Exact path length; only defined for pi/3-family orbits."""
        if not self.pi3_family:
            return None
        return sum(self.params, Fraction(0))

    def footprint(self) -> list["FootprintPoint"]:
        return [FootprintPoint(s.side.address, s.position, _dir_label(s.direction)) for s in self.states]

    def __len__(self) -> int:
        return len(self.states)


class FootprintPoint(NamedTuple):
    address: str
    position: Fraction
    direction: Union[int, str]


def _dir_label(d: LatticeVector):
    k = d.direction_index
    return k if k is not None else f"{d.a},{d.b}"


def _primitive_ints(d: LatticeVector) -> tuple[int, int]:
    if d.is_zero():
        raise DomainError("direction must be nonzero")
    return d.primitive().as_ints()


def _direction_scale(da: int, db: int) -> int:
    return math.lcm(*(abs(c) for c in (da, db, da + db) if c))


def _scale(position: Fraction, da: int, db: int) -> int:
    # a hit on the unfolded line has denominator dividing den(start) * lcm(|p|, |q|, |p+q|)
    return position.denominator * _direction_scale(da, db)


def _state(p: Prefractal, k: int, s: int, M: int, da: int, db: int) -> BilliardState:
    return BilliardState(p.sides[k], Fraction(s, M), LatticeVector(da, db))


def _check_state(p: Prefractal, st: BilliardState) -> tuple[int, int, int]:
    if st.side.scale != p.level or p.sides[st.side.index - 1] != st.side:
        raise DomainError(f"state side {st.side.address} does not belong to KS_{p.level}")
    if not 0 < st.position < 1:
        raise DomainError("state must sit strictly inside a side (corners are excluded)")
    da, db = _primitive_ints(st.direction)
    if not p.is_inward(st.side.index, st.direction):
        raise DomainError(f"direction {st.direction} is not inward on side {st.side.address}")
    return st.side.index - 1, da, db


def _step_raw(p: Prefractal, k: int, s: int, M: int, da: int, db: int):
    (va, vb), dk = p.raw_side(k)
    ua, ub = UNIT_VECTORS[dk]
    hit = p.trace(va * M + s * ua, vb * M + s * ub, da, db, M)
    if hit is None:
        raise InvariantViolation(f"ray escaped KS_{p.level} from side {k + 1}")
    return hit


def billiard_step(p: Prefractal, state: BilliardState) -> Union[BilliardState, SingularHit]:
    k, da, db = _check_state(p, state)
    M = _scale(state.position, da, db)
    s = int(state.position * M)
    hit = _step_raw(p, k, s, M, da, db)
    t = Fraction(hit.t_num, hit.t_den) / (p.unit * M)
    t *= Fraction(da, state.direction.a) if state.direction.a else Fraction(db, state.direction.b)
    side = p.sides[hit.side]
    if hit.at_vertex:
        return SingularHit(side.segment.point_at(Fraction(hit.s, M)), side, t)
    na, nb = reflect_ints(da, db, _ORIENT[p.raw_side(hit.side)[1]])
    return _state(p, hit.side, hit.s, M, na, nb)


def reverse_state(p: Prefractal, state: BilliardState) -> BilliardState:
    """The same boundary point with time reversed: leave along the reversed incoming ray."""
    ia, ib = reflect_ints(state.direction.a, state.direction.b, state.side.orientation)
    return BilliardState(state.side, state.position, LatticeVector(-ia, -ib))


def _run(p: Prefractal, k: int, s: int, M: int, da: int, db: int, budget: int):
    """Iterate the map; returns (raw states, params, status, vertex hit)."""
    start = (k, s, da, db)
    raw = [start]
    params = []
    fine = p.unit * M
    for _ in range(budget):
        hit = _step_raw(p, k, s, M, da, db)
        params.append(Fraction(hit.t_num, hit.t_den * fine))
        if hit.at_vertex:
            return raw, params, Status.SINGULAR, hit
        da, db = reflect_ints(da, db, _ORIENT[p.raw_side(hit.side)[1]])
        k, s = hit.side, hit.s
        if (k, s, da, db) == start:
            return raw, params, Status.PERIODIC, None
        raw.append((k, s, da, db))
    return raw, params, Status.BUDGET_EXCEEDED, None


def compute_orbit(p: Prefractal, init: BilliardState, budget: int = DEFAULT_BUDGET) -> Orbit:
    if budget < 1:
        raise DomainError("budget must be at least 1")
    k, da, db = _check_state(p, init)
    M = _scale(init.position, da, db)
    s = int(init.position * M)
    # params are measured along the primitive direction; rescale if init was not primitive
    raw, params, status, hit = _run(p, k, s, M, da, db, budget)
    states = [init] + [_state(p, *r[:2], M, *r[2:]) for r in raw[1:]]
    orbit = Orbit(p.level, states, status, params)
    if status is Status.SINGULAR:
        side = p.sides[hit.side]
        orbit.vertex = side.segment.point_at(Fraction(hit.s, M))
        back = reverse_state(p, init)
        bk, bda, bdb = back.side.index - 1, *_primitive_ints(back.direction)
        braw, _, bstatus, _ = _run(p, bk, s, M, bda, bdb, budget)
        orbit.backward_states = [_state(p, *r[:2], M, *r[2:]) for r in braw]
        orbit.saddle_connection = bstatus is Status.SINGULAR
    return orbit


# -- compatible basepoints and sequences ------------------------------------


def basepoint_from(p: Prefractal, origin: LatticePoint, d: LatticeVector = PI3) -> BilliardState:
    """Boundary state whose ray along ``d`` passes through ``origin`` unobstructed.

    If ``origin`` lies on a side, that point itself is used.  Otherwise the
    ray from ``origin`` along ``-d`` is cast and its first boundary point is
    returned with direction ``d``.
    """
    da, db = _primitive_ints(d)
    d = LatticeVector(da, db)
    where = p.locate(origin)
    if where is not None:
        k, pos = where
        if pos == 0:
            raise CornerCompatible(f"{origin} is a corner of KS_{p.level}")
        if not p.is_inward(k, d):
            raise DomainError(f"direction {d} is not inward at {origin}")
        return BilliardState(p.side(k), pos, d)
    den = math.lcm(*((x * p.unit).denominator for x in (origin.a, origin.b)))
    M = den * _direction_scale(da, db)
    fine = p.unit * M
    hit = p.trace(int(origin.a * fine), int(origin.b * fine), -da, -db, M)
    if hit is None:
        raise DomainError(f"{origin} is not inside KS_{p.level}")
    if hit.at_vertex:
        raise CornerCompatible(f"the ray from {origin} along {-d} runs into a corner of KS_{p.level}")
    return BilliardState(p.sides[hit.side], Fraction(hit.s, M), d)


def compatible_basepoint(x0: RationalLike, p: Prefractal, d: LatticeVector = PI3) -> BilliardState:
    x0 = as_rational(x0)
    if not 0 < x0 < 1:
        raise DomainError(f"x0 = {x0} is outside (0, 1)")
    return basepoint_from(p, LatticePoint(x0, 0), d)


@dataclass
class CompatibleSequence:
    x0: Fraction
    orbits: list[Orbit]
    initial_basepoints: list[BilliardState]
    diagnostic: Optional[str] = None

    @property
    def periods(self) -> list[Optional[int]]:
        return [o.period for o in self.orbits]

    @property
    def lengths(self) -> list[Optional[Fraction]]:
        return [o.length for o in self.orbits]


def compatible_sequence(x0: RationalLike, n_max: int, budget: int = DEFAULT_BUDGET) -> CompatibleSequence:
    x0 = as_rational(x0)
    if classify(x0).kind is OrbitKind.SINGULAR_TERNARY:
        raise DomainError(f"x0 = {x0} has a finite ternary expansion; its orbits run into corners")
    seq = CompatibleSequence(x0, [], [])
    for n in range(n_max + 1):
        p = build_prefractal(n)
        try:
            init = compatible_basepoint(x0, p)
        except CornerCompatible as exc:
            seq.diagnostic = f"level {n}: {exc}"
            break
        orbit = compute_orbit(p, init, budget)
        seq.initial_basepoints.append(init)
        seq.orbits.append(orbit)
        if orbit.status is not Status.PERIODIC:
            seq.diagnostic = f"level {n}: orbit is {orbit.status.value}"
            break
    return seq


def footprint_points(orbit: Orbit, level: Optional[int] = None) -> Optional[frozenset]:
    """The footprint as a set of (address, position), re-expressed at ``level``.

    Returns ``None`` if some point of the orbit is not on KS_level (it sits in
    a ghost that was removed on the way down).
    """
    level = orbit.level if level is None else level
    if level < orbit.level:
        raise DomainError("footprints can only be refined to deeper levels")
    out = set()
    for st in orbit.states:
        ref = addressing.refine_position(st.side.address, st.position, level - orbit.level)
        if ref is None:
            return None
        out.add(ref)
    return frozenset(out)


def same_footprint(a: Orbit, b: Orbit) -> bool:
    level = max(a.level, b.level)
    fa, fb = footprint_points(a, level), footprint_points(b, level)
    return fa is not None and fa == fb


def stabilization_index(seq: CompatibleSequence) -> Optional[int]:
    """Least N with O_n = O_N for every computed n >= N; None if not reached before n_max."""
    orbits = seq.orbits
    if len(orbits) < 2:
        return None
    N = len(orbits) - 1
    while N > 0 and same_footprint(orbits[N - 1], orbits[-1]):
        N -= 1
    return N if N < len(orbits) - 1 else None


def is_pf_orbit(o: Orbit, p_next: Optional[Prefractal] = None) -> bool:
    """Whether every basepoint of a periodic orbit is the midpoint of its side.

    A side midpoint of KS_n is the midpoint of that side's ghost, which is the
    base of a cell of KS_{n+1}; ``p_next`` is accepted for that check.
    """
    if o.status is not Status.PERIODIC:
        return False
    if any(st.position != Fraction(1, 2) for st in o.states):
        return False
    if p_next is not None:
        mids = {g.segment.midpoint for g in build_prefractal(o.level).ghosts}
        return all(st.point in mids for st in o.states)
    return True


@dataclass
class PairCollapseReport:
    doubling: bool
    cell_pairs: bool
    ghost_midpoints: bool
    length_recursion: bool
    messages: list[str]

    @property
    def passed(self) -> bool:
        return self.doubling and self.cell_pairs and self.ghost_midpoints and self.length_recursion


FAGNANO_LENGTH = Fraction(3, 2)


def pair_collapse_check(o_n: Orbit, o_prev: Orbit, p: Optional[Prefractal] = None) -> PairCollapseReport:
    """Check that o_n is o_prev with a small Fagnano loop hung in each cell."""
    msgs = []
    n = o_n.level
    if o_prev.level != n - 1:
        msgs.append(f"levels {o_prev.level} and {n} are not consecutive")
    doubling = len(o_n) == 2 * len(o_prev)
    if not doubling:
        msgs.append(f"period {len(o_n)} is not twice {len(o_prev)}")

    addrs = [st.side.address for st in o_n.states]
    pairs_ok = False
    parents = []
    if len(addrs) % 2 == 0:
        for offset in (0, 1):
            rot = addrs[offset:] + addrs[:offset]
            cand = []
            for i in range(0, len(rot), 2):
                a, b = rot[i], rot[i + 1]
                if a[:-1] == b[:-1] and {a[-1], b[-1]} == {"1", "3"}:
                    cand.append(a[:-1])
                else:
                    break
            else:
                pairs_ok, parents = True, cand
                break
    if not pairs_ok:
        msgs.append("basepoints do not pair up on the two outer sides of single cells")

    prev_mids = {(st.side.address, st.position) for st in o_prev.states}
    ghosts_ok = pairs_ok and all((w, Fraction(1, 2)) in prev_mids for w in parents)
    if pairs_ok and not ghosts_ok:
        missing = [w for w in parents if (w, Fraction(1, 2)) not in prev_mids]
        msgs.append(f"ghost midpoints of cells {missing[:5]} are not basepoints of the previous orbit")

    length_ok = False
    if o_n.length is not None and o_prev.length is not None:
        expected = o_prev.length + len(o_prev) * FAGNANO_LENGTH / 3**n
        length_ok = o_n.length == expected
        if not length_ok:
            msgs.append(f"length {o_n.length} != {o_prev.length} + {len(o_prev)}*(3/2)/3^{n} = {expected}")
    else:
        msgs.append("lengths are only defined for pi/3-family orbits")
    return PairCollapseReport(doubling, pairs_ok, ghosts_ok, length_ok, msgs)


# -- unfolding --------------------------------------------------------------

_REFLECTION_MATRIX = {
    OrientationClass.HORIZONTAL: ((1, 1), (0, -1)),
    OrientationClass.UP_RIGHT: ((-1, 0), (1, 1)),
    OrientationClass.UP_LEFT: ((0, -1), (-1, 0)),
}


def _matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def _apply(A, c, a, b):
    return A[0][0] * a + A[0][1] * b + c[0], A[1][0] * a + A[1][1] * b + c[1]


@dataclass
class UnfoldedPath:
    points: list[LatticePoint]
    direction: LatticeVector
    span: Fraction  # ray parameter from first to last point along ``direction``

    @property
    def length(self) -> Optional[Fraction]:
        return self.span if self.direction.squared_length == 1 else None


def unfold(o: Orbit) -> UnfoldedPath:
    """Straighten the orbit by reflecting the table across every side it hits."""
    states = o.states
    hits = [st.point for st in states[1:]]
    if o.status is Status.PERIODIC:
        hits.append(states[0].point)
    elif o.status is Status.SINGULAR:
        hits.append(o.vertex)
    A = ((1, 0), (0, 1))
    c = (Fraction(0), Fraction(0))
    pts = [states[0].point]
    sides = [st.side for st in states[1:]]
    for i, h in enumerate(hits):
        pts.append(LatticePoint(*_apply(A, c, h.a, h.b)))
        if i < len(sides):
            side = sides[i]
            R = _REFLECTION_MATRIX[side.orientation]
            anchor = side.segment.start
            ra, rb = _apply(R, (0, 0), anchor.a, anchor.b)
            ta, tb = anchor.a - ra, anchor.b - rb
            c = _apply(A, c, ta, tb)
            A = _matmul(A, R)
    d0 = states[0].direction
    q0 = pts[0]
    prev = Fraction(0)
    for q in pts[1:]:
        w = q - q0
        if w.cross(d0) != 0:
            raise InvariantViolation(f"unfolded point {q} is off the line through {q0} along {d0}")
        t = w.a / d0.a if d0.a != 0 else w.b / d0.b
        if t <= prev:
            raise InvariantViolation("unfolded points do not advance along the initial direction")
        prev = t
    return UnfoldedPath(pts, d0, prev)


# -- periodic direction probe -------------------------------------------------


class ProbeRecord(NamedTuple):
    origin: LatticePoint
    level: int
    status: Status
    period: Optional[int]
    detail: str
    orbit: Optional[Orbit] = None


@dataclass
class ProbeReport:
    direction: LatticeVector
    level: int
    records: list[ProbeRecord]
    rejected: int = 0  # draws skipped for landing on a corner

    @property
    def budget_exceeded(self) -> list[ProbeRecord]:
        return [r for r in self.records if r.status is Status.BUDGET_EXCEEDED]

    @property
    def all_closed(self) -> bool:
        return not self.budget_exceeded


def random_interior_point(rng: random.Random, max_den: int = 97) -> LatticePoint:
    """A random rational point strictly inside the unit triangle."""
    while True:
        q = rng.randint(2, max_den)
        a, b = rng.randint(1, q - 1), rng.randint(1, q - 1)
        if a + b < q:
            return LatticePoint(Fraction(a, q), Fraction(b, q))


def periodic_direction_probe(
    d: LatticeVector,
    n: int,
    samples: int,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    origins: Optional[Iterable[LatticePoint]] = None,
    skip_singular: bool = False,
    keep_orbits: bool = False,
) -> ProbeReport:
    """Run orbits along ``d`` through sample interior points, in KS_0 and KS_n.

    With ``skip_singular`` a random draw whose orbit runs into a corner at
    either level is discarded and counted in ``rejected``, so the report
    covers ``samples`` non-singular basepoints.
    """
    rng = random.Random(seed)
    levels = sorted({0, n})
    tables = [build_prefractal(m) for m in levels]
    records = []
    pool = list(origins) if origins is not None else None
    taken = rejected = 0
    while taken < samples:
        origin = pool[taken] if pool is not None else random_interior_point(rng)
        try:
            inits = [basepoint_from(p, origin, d) for p in tables]
        except CornerCompatible:
            if pool is not None:
                raise
            rejected += 1
            continue
        batch = []
        for p, init in zip(tables, inits):
            o = compute_orbit(p, init, budget)
            detail = ""
            if o.status is Status.BUDGET_EXCEEDED:
                last = o.states[-1]
                detail = f"after {budget} steps at {last.side.address} pos {last.position} dir {last.direction}"
            elif o.status is Status.SINGULAR:
                detail = f"corner {o.vertex}"
            batch.append(ProbeRecord(origin, p.level, o.status, o.period, detail, o if keep_orbits else None))
        if skip_singular and pool is None and any(r.status is Status.SINGULAR for r in batch):
            rejected += 1
            continue
        taken += 1
        records += batch
    return ProbeReport(LatticeVector(*_primitive_ints(d)), n, records, rejected)


def random_primitive_direction(rng: random.Random, bound: int = 4) -> LatticeVector:
    while True:
        a, b = rng.randint(-bound, bound), rng.randint(-bound, bound)
        if (a, b) != (0, 0) and math.gcd(a, b) == 1:
            return LatticeVector(a, b)


def initial_relative_expansion(seq: CompatibleSequence, n: int):
    """Ternary expansion of the level-n initial basepoint's relative position."""
    return expand(seq.initial_basepoints[n].position)
