"""Acceptance criteria 1-11.

Each test records a PASS/FAIL line; ``conftest.py`` prints them at the end of
the run, and ``python3 tests/test_acceptance.py`` runs them standalone.
Expected values come from ``oracles.py`` or from hand-checked constants.
"""

from __future__ import annotations

import csv
import functools
import io
import itertools
import os
import random
import sys
import traceback
from fractions import Fraction

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from snowflake_billiards.addressing import straighten  # noqa: E402
from snowflake_billiards.boundary import build_prefractal, triangle_count  # noqa: E402
from snowflake_billiards.cli import parse_sample  # noqa: E402
from snowflake_billiards.dynamics import (  # noqa: E402
    Status,
    compatible_basepoint,
    compatible_sequence,
    compute_orbit,
    initial_relative_expansion,
    pair_collapse_check,
    periodic_direction_probe,
    random_primitive_direction,
    same_footprint,
    unfold,
)
from snowflake_billiards.formulas import (  # noqa: E402
    FormulaReport,
    genus,
    length_formula,
    length_limit,
    period_formula,
    ppf_gap,
    study_point,
)
from snowflake_billiards.ternary import TernaryExpansion, expand, mc_representation, midpoint_set  # noqa: E402

RESULTS: dict[int, tuple[bool, str, str]] = {}
NAMES = {
    1: "Fagnano baseline",
    2: "primary pF family",
    3: "stabilizing orbits 7/12 and 5/12",
    4: "straightening",
    5: "ternary midpoint machinery",
    6: "genus",
    7: "periodic-direction equivalence",
    8: "unfolding is collinear",
    9: "pair collapse",
    10: "tiling and area",
    11: "formula-vs-oracle study",
}
STUDY_CSV = os.path.join(os.path.dirname(__file__), "..", "study.csv")


def criterion(k: int):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                note = fn() or ""
            except Exception as exc:
                RESULTS[k] = (False, NAMES[k], f"{type(exc).__name__}: {exc}".splitlines()[0][:200])
                raise
            RESULTS[k] = (True, NAMES[k], note)

        return run

    return wrap


def summary_lines() -> list[str]:
    out = []
    for k in sorted(NAMES):
        if k not in RESULTS:
            continue
        ok, name, note = RESULTS[k]
        line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {name}"
        out.append(line + (f"  ({note})" if note else ""))
    return out


# -- shared orbits ------------------------------------------------------------


@functools.cache
def fagnano_orbits():
    p = build_prefractal(0)
    return [compute_orbit(p, compatible_basepoint(x, p)) for x in (Fraction(1, 2), Fraction(1, 4))]


@functools.cache
def ppf_sequence():
    return compatible_sequence(Fraction(1, 2), 8)


@functools.cache
def stabilizing_sequences():
    return compatible_sequence(Fraction(7, 12), 6), compatible_sequence(Fraction(5, 12), 6)


@functools.cache
def probe_reports():
    rng = random.Random(20240607)
    reports = []
    for i in range(50):
        d = random_primitive_direction(rng)
        for n in (1, 2, 3):
            reports.append(
                periodic_direction_probe(d, n, samples=5, seed=100 * i + n, skip_singular=True, keep_orbits=True)
            )
    return reports


# -- criteria -----------------------------------------------------------------


@criterion(1)
def test_criterion_01_fagnano():
    half, quarter = fagnano_orbits()
    assert half.status is Status.PERIODIC and half.period == 3
    assert half.length == Fraction(3, 2)
    assert quarter.status is Status.PERIODIC and quarter.period == 6
    assert quarter.length == Fraction(3) == 2 * half.length
    assert (half.period, float(half.length)) == oracles.FLOAT_PERIODS[(0, 0.5)]


@criterion(2)
def test_criterion_02_primary_pf_family():
    seq = ppf_sequence()
    assert seq.diagnostic is None
    periods, lengths = seq.periods, seq.lengths
    assert periods == oracles.PPF_PERIODS
    assert lengths == oracles.PPF_LENGTHS
    for n in range(1, 9):
        assert periods[n] == 3 * 2**n == period_formula(Fraction(1, 2), n)
        assert lengths[n] > lengths[n - 1]
        assert lengths[n] == length_formula(Fraction(1, 2), n, periods)
        assert lengths[n] < 6 and 6 - lengths[n] == ppf_gap(n)
    assert lengths[1:4] == [3, 4, Fraction(14, 3)]
    assert length_limit(Fraction(1, 2)) == 6 == 4 * Fraction(3, 2)
    return f"|ppf_8| = {lengths[8]}"


@criterion(3)
def test_criterion_03_stabilizing():
    s7, s5 = stabilizing_sequences()
    for seq in (s7, s5):
        assert seq.diagnostic is None
        assert seq.periods[1:] == [6] * 6
        for n in range(2, 7):
            assert same_footprint(seq.orbits[1], seq.orbits[n])
    assert expand(Fraction(7, 12)) == TernaryExpansion("c", "rl")
    rel7 = s7.initial_basepoints[1].position
    assert rel7 == Fraction(3, 4) == expand(Fraction(7, 12)).shift(1).value
    assert initial_relative_expansion(s7, 1) == TernaryExpansion("", "rl")
    assert initial_relative_expansion(s5, 1) == TernaryExpansion("", "lr")
    for seq in (s7, s5):
        for n in range(1, 7):
            # the level-n relative position is the n-th left shift of x0
            assert initial_relative_expansion(seq, n) == expand(seq.x0).shift(n)
    return "O_n = O_1 for n <= 6 at both points"


@criterion(4)
def test_criterion_04_straightening():
    assert straighten("13123232113133100324") == "13123212313131344120"
    rng = random.Random(4)
    for _ in range(10_000):
        w = "".join(rng.choice("012345") for _ in range(rng.randint(1, 40)))
        s = straighten(w)
        assert straighten(s) == s, w
        assert [i for i, c in enumerate(w) if c in "25"] == [i for i, c in enumerate(s) if c in "25"], w
        assert all(a == b for a, b in zip(w, s) if a in "25"), w


@criterion(5)
def test_criterion_05_midpoints():
    assert midpoint_set(1) == {Fraction(1, 6), Fraction(1, 2), Fraction(5, 6)}
    total = 0
    for n in range(9):
        m = midpoint_set(n)
        assert len(m) == 3**n
        for x in m:
            r = mc_representation(x)
            assert r is not None and r.N <= n and r.value() == x
            padded = mc_representation(x, length=n)
            assert padded.N == n and padded.value() == x
        # converse: every digit tuple of length n gives an element of M(n)
        built = set()
        for p in itertools.product(range(3), repeat=n):
            x = sum((Fraction(pi, 3 ** (n - i)) for i, pi in enumerate(p)), Fraction(0)) + Fraction(1, 2 * 3**n)
            built.add(x)
        assert built == m
        total += len(m)
    for x in (Fraction(1, 4), Fraction(7, 12), Fraction(1, 3)):
        assert mc_representation(x) is None
    return f"{total} elements checked"


@criterion(6)
def test_criterion_06_genus():
    assert genus(1) == 10
    for n in range(6):
        assert genus(n) == 3 * 4**n - 2


@criterion(7)
def test_criterion_07_periodic_directions():
    reports = probe_reports()
    failures, rejected, orbits = [], 0, 0
    for rep in reports:
        rejected += rep.rejected
        for r in rep.records:
            orbits += 1
            if r.status is not Status.PERIODIC:
                failures.append(f"dir {rep.direction} KS_{r.level} from {r.origin}: {r.status.value} {r.detail}")
    assert not failures, "\n".join(failures)
    assert orbits == 50 * 3 * 5 * 2
    return f"{orbits} orbits closed, {rejected} singular draws skipped"


@criterion(8)
def test_criterion_08_unfolding():
    orbits = list(fagnano_orbits()) + ppf_sequence().orbits
    for seq in stabilizing_sequences():
        orbits += seq.orbits
    for rep in probe_reports():
        orbits += [r.orbit for r in rep.records]
    checked = 0
    for o in orbits:
        assert o.status is Status.PERIODIC
        path = unfold(o)
        q0, d = path.points[0], path.direction
        for q in path.points[1:]:
            assert (q - q0).cross(d) == 0
        if o.length is not None:
            assert path.length == o.length
        checked += 1
    return f"{checked} orbits"


@criterion(9)
def test_criterion_09_pair_collapse():
    orbits = ppf_sequence().orbits
    for n in range(2, 7):
        rep = pair_collapse_check(orbits[n], orbits[n - 1])
        assert rep.passed, rep.messages
        assert orbits[n].length == orbits[n - 1].length + orbits[n - 1].period * Fraction(3, 2) / 3**n


@criterion(10)
def test_criterion_10_tiling_area():
    assert triangle_count(1, 1) == 12
    for n in range(5):
        for k in range(n, n + 3):
            c = triangle_count(n, k)
            assert isinstance(c, int) and c > 0
    for n in range(7):
        closed = Fraction(1, 2) * (Fraction(8, 5) - Fraction(3, 5) * Fraction(4, 9) ** n)
        assert build_prefractal(n).lattice_area() == closed
    for n, a in enumerate(oracles.KS_AREAS):
        assert build_prefractal(n).lattice_area() == a


def _study_sample() -> list[Fraction]:
    return parse_sample("M(3),7/12,5/12,1/4,1/6,1/8,random:50:10000", seed=11)


@criterion(11)
def test_criterion_11_study():
    sample = _study_sample()
    n_max = 5
    reports = [study_point(x, n_max) for x in sample]
    ppf = ppf_sequence().lengths
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FormulaReport.CSV_HEADER)
    mismatched = set()
    for rep in reports:
        x = rep.x0
        # (a) every orbit closes
        assert rep.all_periodic and len(rep.records) == n_max + 1, (x, rep.diagnostic)
        e = expand(x)
        for prev, cur in zip(rep.records, rep.records[1:]):
            n = cur.n
            # (b) periods at most double
            assert Fraction(cur.period_simulated, prev.period_simulated) in (1, 2), (x, n)
            # (c) a non-middle digit leaves the footprint unchanged
            if e.digit(n) != "c":
                assert cur.same_as_previous, (x, n)
            # (d) never longer than the primary pF orbit
            assert cur.length_simulated <= ppf[n], (x, n)
        for r in rep.records:
            assert r.agree_length, (x, r.n)
            if not r.agree_period:
                mismatched.add(x)
        # (e) agreement where it is required
        if x == Fraction(1, 2):
            assert all(r.agree_period for r in rep.records)
        if x in (Fraction(7, 12), Fraction(5, 12)):
            assert all(r.agree_period for r in rep.records[1:]), x
        w.writerows(rep.csv_rows())
    assert Fraction(1, 4) in mismatched and Fraction(1, 6) in mismatched
    with open(STUDY_CSV, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return f"{len(sample)} points, formula period differs at some level for {len(mismatched)}; rows in study.csv"


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except Exception:
                traceback.print_exc()
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _, _ in RESULTS.values()) and len(RESULTS) == len(NAMES) else 1)
