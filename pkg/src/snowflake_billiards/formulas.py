"""Closed forms for periods, lengths and genus, and a harness that checks them
against simulated orbits."""

from __future__ import annotations

from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .boundary import build_prefractal, vertex_census
from .dynamics import DEFAULT_BUDGET, Status, compatible_sequence, same_footprint
from .errors import DomainError, InvariantViolation
from .lattice import RationalLike, as_rational, format_rational
from .ternary import OrbitKind, classify, expand, omega, omega_table

FAGNANO_LENGTH = Fraction(3, 2)

# (p, q) with cone angle p*pi/q, for the two vertex classes of KS_n
_ACUTE = (1, 3)
_REFLEX = (4, 3)


def fagnano_length() -> Fraction:
    return FAGNANO_LENGTH


def _check_x0(x0: RationalLike) -> Fraction:
    x0 = as_rational(x0)
    if not 0 < x0 < 1:
        raise DomainError(f"x0 = {x0} is outside (0, 1)")
    if classify(x0).kind is OrbitKind.SINGULAR_TERNARY:
        raise DomainError(f"x0 = {x0} has a finite ternary expansion")
    return x0


def period_formula(x0: RationalLike, n: int) -> int:
    """3 * 2**omega_n(x0)."""
    x0 = _check_x0(x0)
    return 3 * 2 ** omega(x0, n)


def observed_period_law(x0: RationalLike, n: int) -> int:
    """The period the simulation produces, as an explicit rule.

    At level 0 only 1/2 gives the Fagnano triangle (period 3); everything else
    has period 6.  For n >= 1 the period is 3 * 2**omega_n when the first
    digit is c and twice that otherwise.
    """
    x0 = _check_x0(x0)
    if n == 0:
        return 3 if x0 == Fraction(1, 2) else 6
    base = 3 if expand(x0).digit(1) == "c" else 6
    return base * 2 ** omega(x0, n)


def length_formula(x0: RationalLike, n: int, periods: Sequence[int]) -> Fraction:
    """2L + sum_{i=2}^{n} chi[x_i] * periods[i-1] * L / 3**i.

    ``periods[m]`` is the period used for level ``m``; entries up to ``n - 1``
    are read.
    """
    x0 = _check_x0(x0)
    if n < 1:
        raise DomainError("the length formula starts at n = 1")
    if len(periods) < n:
        raise DomainError(f"need periods for levels 0..{n - 1}, got {len(periods)}")
    e = expand(x0)
    total = 2 * FAGNANO_LENGTH
    for i in range(2, n + 1):
        if e.digit(i) == "c":
            total += periods[i - 1] * FAGNANO_LENGTH / 3**i
    return total


def length_limit(x0: RationalLike, base: int = 3) -> Fraction:
    """Limit of the length formula when the period at level m is base * 2**omega_m.

    ``base = 3`` is ``period_formula``; ``base = 6`` matches the
    simulation when the first digit is not c.
    """
    x0 = _check_x0(x0)
    e = expand(x0)
    P, C = len(e.cycle), e.cycle.count("c")
    start = max(2, len(e.prefix) + 1)
    omegas = omega_table(x0, start + P)

    def term(i: int) -> Fraction:
        if e.digit(i) != "c":
            return Fraction(0)
        return Fraction(2 ** omegas[i - 2], 3**i)

    head = sum((term(i) for i in range(2, start)), Fraction(0))
    block = sum((term(i) for i in range(start, start + P)), Fraction(0))
    # past the prefix, shifting i by one cycle multiplies the term by 2^C / 3^P
    tail = block / (1 - Fraction(2**C, 3**P))
    return 2 * FAGNANO_LENGTH + base * FAGNANO_LENGTH * (head + tail)


def ppf_gap(n: int) -> Fraction:
    """6 - |ppf_n| in closed form, for n >= 1."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return Fraction(9, 2) * Fraction(2, 3) ** n


def genus(n: int) -> int:
    """Genus of the translation surface of KS_n, from its vertex census."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    census = vertex_census(build_prefractal(n))
    s = census.count_pi3 * Fraction(_ACUTE[0] - 1, _ACUTE[1]) + census.count_4pi3 * Fraction(
        _REFLEX[0] - 1, _REFLEX[1]
    )
    g = 1 + Fraction(3, 2) * s
    if g.denominator != 1 or g != 3 * 4**n - 2:
        raise InvariantViolation(f"genus of KS_{n} from the census is {g}, expected {3 * 4**n - 2}")
    return int(g)


@dataclass
class LevelRecord:
    n: int
    omega_n: int
    period_formula: int
    period_simulated: Optional[int]
    length_formula: Optional[Fraction]  # with simulated periods
    length_formula_plain: Optional[Fraction]  # with period_formula periods
    length_simulated: Optional[Fraction]
    same_as_previous: Optional[bool] = None

    @property
    def agree_period(self) -> bool:
        return self.period_simulated == self.period_formula

    @property
    def agree_length(self) -> bool:
        if self.length_simulated is None:
            return False
        if self.length_formula is None:  # n = 0: nothing to compare
            return True
        return self.length_formula == self.length_simulated


@dataclass
class FormulaReport:
    x0: Fraction
    orbit_class: str
    records: list[LevelRecord] = field(default_factory=list)
    diagnostic: Optional[str] = None

    @property
    def all_periodic(self) -> bool:
        return self.diagnostic is None and all(r.period_simulated is not None for r in self.records)

    CSV_HEADER = (
        "x0",
        "class",
        "n",
        "omega",
        "period_formula",
        "period_sim",
        "length_formula_sim_periods",
        "length_sim",
        "agree_period",
        "agree_length",
    )

    def csv_rows(self) -> list[tuple[str, ...]]:
        def fmt(v) -> str:
            return "" if v is None else format_rational(v)

        return [
            (
                format_rational(self.x0),
                self.orbit_class,
                str(r.n),
                str(r.omega_n),
                str(r.period_formula),
                "" if r.period_simulated is None else str(r.period_simulated),
                fmt(r.length_formula),
                fmt(r.length_simulated),
                str(r.agree_period).lower(),
                str(r.agree_length).lower(),
            )
            for r in self.records
        ]


def study_point(x0: RationalLike, n_max: int, budget: int = DEFAULT_BUDGET) -> FormulaReport:
    x0 = _check_x0(x0)
    seq = compatible_sequence(x0, n_max, budget)
    report = FormulaReport(x0, classify(x0).kind.value, diagnostic=seq.diagnostic)
    formula_periods = [period_formula(x0, n) for n in range(n_max + 1)]
    sim_periods = seq.periods
    omegas = [0] + omega_table(x0, n_max)
    for n, orbit in enumerate(seq.orbits):
        periodic = orbit.status is Status.PERIODIC
        lf = lt = None
        if n >= 1 and all(p is not None for p in sim_periods[:n]):
            lf = length_formula(x0, n, sim_periods)
        if n >= 1:
            lt = length_formula(x0, n, formula_periods)
        report.records.append(
            LevelRecord(
                n=n,
                omega_n=omegas[n],
                period_formula=formula_periods[n],
                period_simulated=orbit.period if periodic else None,
                length_formula=lf,
                length_formula_plain=lt,
                length_simulated=orbit.length if periodic else None,
                same_as_previous=same_footprint(seq.orbits[n - 1], orbit) if n and periodic else None,
            )
        )
    return report


def _study_job(args) -> FormulaReport:
    return study_point(*args)


def period_study(
    sample: Iterable[RationalLike], n_max: int, budget: int = DEFAULT_BUDGET, workers: int = 1
) -> list[FormulaReport]:
    jobs = [(as_rational(x), n_max, budget) for x in sample]
    for x, _, _ in jobs:
        _check_x0(x)
    if workers <= 1 or len(jobs) <= 1:
        return [_study_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_study_job, jobs))


@dataclass
class ClassSummary:
    points: int = 0
    rows: int = 0
    period_agree: int = 0
    length_agree: int = 0
    not_periodic: int = 0


def summarize(reports: Iterable[FormulaReport]) -> dict[str, ClassSummary]:
    """Agreement counts grouped by orbit class."""
    out: dict[str, ClassSummary] = defaultdict(ClassSummary)
    for rep in reports:
        s = out[rep.orbit_class]
        s.points += 1
        s.not_periodic += not rep.all_periodic
        for r in rep.records:
            s.rows += 1
            s.period_agree += r.agree_period
            s.length_agree += r.agree_length
    return dict(sorted(out.items()))


def doubling_ratios(report: FormulaReport) -> Counter:
    ps = [r.period_simulated for r in report.records]
    return Counter(Fraction(b, a) for a, b in zip(ps, ps[1:]) if a and b)
