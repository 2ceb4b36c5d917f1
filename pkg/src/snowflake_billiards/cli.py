"""Command-line front end: ``snowflake-billiards <command> [options]``.

Every rational crosses this boundary as a ``"p/q"`` string.  JSON output is
sorted and carries a ``schema`` field; floats only ever appear in SVG.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import re
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import addressing, formulas, ternary
from .boundary import build_prefractal, vertex_census
from .dynamics import (
    DEFAULT_BUDGET,
    Orbit,
    compatible_basepoint,
    compatible_sequence,
    compute_orbit,
    periodic_direction_probe,
    random_primitive_direction,
    same_footprint,
    stabilization_index,
)
from .errors import DomainError, InvariantViolation
from .lattice import LatticePoint, LatticeVector, format_rational, parse_rational
from .render import SvgStyle, render_svg

SCHEMA_VERSION = 1
EXIT_OK, EXIT_DOMAIN, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_MAX_LEVEL = 8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    level: int = 0
    max_level: int = DEFAULT_MAX_LEVEL
    budget: int = DEFAULT_BUDGET
    n_max: int = 4
    sample: list[Fraction] = field(default_factory=list)
    seed: int = 0
    workers: int = 1
    out: Optional[str] = None
    fmt: str = "json"
    style: SvgStyle = SvgStyle()

    def check(self) -> None:
        if self.budget <= 0:
            raise DomainError("--budget must be positive")
        if self.workers <= 0:
            raise DomainError("--workers must be positive")
        for name, lvl in (("--level", self.level), ("--n-max", self.n_max)):
            if not 0 <= lvl <= self.max_level:
                raise DomainError(f"{name} {lvl} is outside 0..{self.max_level}")


# -- serialization ------------------------------------------------------------


def _q(x) -> str:
    return format_rational(x)


def _point(p: LatticePoint) -> list[str]:
    return [_q(p.a), _q(p.b)]


def _vector(v: LatticeVector) -> list[str]:
    return [_q(v.a), _q(v.b)]


def _orbit_json(o: Orbit) -> dict:
    return {
        "level": o.level,
        "status": o.status.value,
        "period": o.period,
        "length": None if o.length is None else _q(o.length),
        "saddle_connection": o.saddle_connection,
        "vertex": None if o.vertex is None else _point(o.vertex),
        "states": [
            {
                "side": st.side.index,
                "address": st.side.address,
                "position": _q(st.position),
                "point": _point(st.point),
                "direction": _vector(st.direction),
            }
            for st in o.states
        ],
    }


def _class_json(x0: Fraction) -> dict:
    c = ternary.classify(x0)
    e = ternary.expand(x0)
    return {"x0": _q(x0), "class": c.kind.value, "N": c.N, "expansion": e.as_digits(), "lcr": str(e)}


def _doc(kind: str, body: dict) -> dict:
    return {"schema": f"snowflake-billiards/{kind}/{SCHEMA_VERSION}", **body}


def _dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _dump_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- argument helpers -----------------------------------------------------------


def parse_direction(text: str) -> LatticeVector:
    parts = text.split(",")
    if len(parts) != 2:
        raise DomainError(f"direction must be 'a,b', got {text!r}")
    d = LatticeVector(parse_rational(parts[0]), parse_rational(parts[1]))
    if d.is_zero():
        raise DomainError("direction must be nonzero")
    return d


_M_TOKEN = re.compile(r"^M\(?(\d+)\)?$")
_RANDOM_TOKEN = re.compile(r"^random:(\d+):(\d+)$")


def parse_sample(spec: str, seed: int = 0) -> list[Fraction]:
    """Comma-separated tokens: ``p/q``, ``M(n)`` or ``random:count:maxden``.

    Random draws skip finite ternary expansions.  Duplicates are dropped and
    the result is sorted.
    """
    rng = random.Random(seed)
    out: set[Fraction] = set()
    for tok in filter(None, (t.strip() for t in spec.split(","))):
        if m := _M_TOKEN.match(tok):
            out |= ternary.midpoint_set(int(m.group(1)))
        elif m := _RANDOM_TOKEN.match(tok):
            count, max_den = int(m.group(1)), int(m.group(2))
            if max_den < 2:
                raise DomainError("random samples need a denominator bound of at least 2")
            got = 0
            while got < count:
                q = rng.randint(2, max_den)
                x = Fraction(rng.randint(1, q - 1), q)
                if x not in out and ternary.classify(x).kind is not ternary.OrbitKind.SINGULAR_TERNARY:
                    out.add(x)
                    got += 1
        else:
            out.add(parse_rational(tok))
    return sorted(out)


def _require_x0(args) -> Fraction:
    if args.x0 is None:
        raise DomainError("--x0 is required")
    return parse_rational(args.x0)


# -- commands -----------------------------------------------------------------


def cmd_boundary(cfg: RunConfig, args) -> str:
    p = build_prefractal(cfg.level, cfg.max_level)
    if cfg.fmt == "svg":
        return render_svg(p, None, cfg.style)
    census = vertex_census(p)
    return _dump_json(
        _doc(
            "boundary",
            {
                "level": p.level,
                "side_count": len(p),
                "perimeter": _q(p.perimeter()),
                "lattice_area": _q(p.lattice_area()),
                "census": {"pi/3": census.count_pi3, "4pi/3": census.count_4pi3},
                "vertices": [{"point": _point(v.point), "angle_class": v.angle.label} for v in p.vertices],
                "sides": [
                    {
                        "index": s.index,
                        "address": s.address,
                        "start": _point(s.segment.start),
                        "end": _point(s.segment.end),
                    }
                    for s in p.sides
                ],
            },
        )
    )


def cmd_classify(cfg: RunConfig, args) -> str:
    x0 = _require_x0(args)
    body = _class_json(x0)
    body["value"] = body.pop("x0")
    body["omega_table"] = ternary.omega_table(x0, cfg.n_max)
    mc = ternary.mc_representation(x0)
    body["midpoint_representation"] = None if mc is None else {"N": mc.N, "p": list(mc.p)}
    return _dump_json(_doc("classify", body))


def _orbit_for(cfg: RunConfig, args) -> Orbit:
    x0 = _require_x0(args)
    p = build_prefractal(cfg.level, cfg.max_level)
    d = parse_direction(args.dir) if args.dir else LatticeVector(0, 1)
    return compute_orbit(p, compatible_basepoint(x0, p, d), cfg.budget)


def cmd_orbit(cfg: RunConfig, args) -> str:
    o = _orbit_for(cfg, args)
    if cfg.fmt == "svg":
        return render_svg(build_prefractal(o.level), o, cfg.style)
    body = _orbit_json(o)
    body["footprint"] = _footprint_json(o)
    body["x0"] = _q(parse_rational(args.x0))
    body["class"] = _class_json(parse_rational(args.x0))
    return _dump_json(_doc("orbit", body))


def cmd_render(cfg: RunConfig, args) -> str:
    p = build_prefractal(cfg.level, cfg.max_level)
    o = _orbit_for(cfg, args) if args.x0 is not None else None
    return render_svg(p, o, cfg.style)


def _footprint_json(o: Orbit) -> list[dict]:
    return [{"address": fp.address, "position": _q(fp.position), "dir": fp.direction} for fp in o.footprint()]


def cmd_footprint(cfg: RunConfig, args) -> str:
    o = _orbit_for(cfg, args)
    if cfg.fmt == "csv":
        rows = [(fp.address, _q(fp.position), fp.direction) for fp in o.footprint()]
        return _dump_csv(("address", "position", "dir"), rows)
    return _dump_json(
        _doc("footprint", {"level": o.level, "status": o.status.value, "footprint": _footprint_json(o)})
    )


def cmd_sequence(cfg: RunConfig, args) -> str:
    x0 = _require_x0(args)
    seq = compatible_sequence(x0, cfg.n_max, cfg.budget)
    levels = []
    for n, (o, init) in enumerate(zip(seq.orbits, seq.initial_basepoints)):
        levels.append(
            {
                "n": n,
                "status": o.status.value,
                "period": o.period,
                "length": None if o.length is None else _q(o.length),
                "initial_address": init.side.address,
                "initial_position": _q(init.position),
                "same_as_previous": None if n == 0 else same_footprint(seq.orbits[n - 1], o),
            }
        )
    return _dump_json(
        _doc(
            "sequence",
            {
                "class": _class_json(x0),
                "n_max": cfg.n_max,
                "levels": levels,
                "stabilization_index": stabilization_index(seq),
                "diagnostic": seq.diagnostic,
            },
        )
    )


def cmd_straighten(cfg: RunConfig, args) -> str:
    return addressing.straighten(args.word) + "\n"


def cmd_address(cfg: RunConfig, args) -> str:
    if args.word is None:
        if args.index is None:
            raise DomainError("give an address word, or --level and --index")
        p = build_prefractal(cfg.level, cfg.max_level)
        if not 1 <= args.index <= len(p):
            raise DomainError(f"side index {args.index} is outside 1..{len(p)}")
        word = p.side(args.index).address
    else:
        word = args.word
    if not addressing.is_side_address(word):
        raise DomainError(f"{word!r} is not a side address")
    p = build_prefractal(len(word) - 1, cfg.max_level)
    side = p.side_by_address(word)
    return _dump_json(
        _doc(
            "address",
            {
                "address": word,
                "level": p.level,
                "index": side.index,
                "start": _point(side.segment.start),
                "end": _point(side.segment.end),
                "direction": side.direction_index,
                "key": addressing.key(word),
                "bump": addressing.is_bump(word),
                "children": list(addressing.children(word)),
                "straightened": addressing.straighten(word),
            },
        )
    )


def cmd_genus(cfg: RunConfig, args) -> str:
    return f"{formulas.genus(cfg.level)}\n"


def _probe_job(job) -> dict:
    d, level, samples, budget, seed, skip = job
    rep = periodic_direction_probe(d, level, samples, budget, seed, skip_singular=skip)
    return {
        "direction": _vector(d),
        "all_closed": rep.all_closed,
        "rejected": rep.rejected,
        "records": [
            {
                "origin": _point(r.origin),
                "level": r.level,
                "status": r.status.value,
                "period": r.period,
                "detail": r.detail,
            }
            for r in rep.records
        ],
    }


def cmd_probe(cfg: RunConfig, args) -> str:
    rng = random.Random(cfg.seed)
    dirs = [parse_direction(t) for t in args.dir_list or []]
    dirs += [random_primitive_direction(rng) for _ in range(args.random_dirs)]
    if not dirs:
        raise DomainError("give --dir a,b or --random-dirs K")
    samples = args.basepoints
    jobs = [(d, cfg.level, samples, cfg.budget, cfg.seed + i, args.skip_singular) for i, d in enumerate(dirs)]
    results = _fan_out(_probe_job, jobs, cfg.workers)
    if cfg.fmt == "csv":
        rows = [
            (",".join(r["direction"]), ";".join(rec["origin"]), rec["level"], rec["status"], rec["period"] or "")
            for r in results
            for rec in r["records"]
        ]
        return _dump_csv(("direction", "origin", "level", "status", "period"), rows)
    budget_exceeded = sum(rec["status"] == "BudgetExceeded" for r in results for rec in r["records"])
    return _dump_json(
        _doc("probe", {"level": cfg.level, "budget_exceeded": budget_exceeded, "directions": results})
    )


def cmd_study(cfg: RunConfig, args) -> str:
    if not cfg.sample:
        raise DomainError("--sample is required")
    reports = formulas.period_study(cfg.sample, cfg.n_max, cfg.budget, cfg.workers)
    if cfg.fmt == "csv":
        rows = [row for rep in reports for row in rep.csv_rows()]
        return _dump_csv(formulas.FormulaReport.CSV_HEADER, rows)
    summary = {
        k: {
            "points": s.points,
            "rows": s.rows,
            "period_agree": s.period_agree,
            "length_agree": s.length_agree,
            "not_periodic": s.not_periodic,
        }
        for k, s in formulas.summarize(reports).items()
    }
    rows = [dict(zip(formulas.FormulaReport.CSV_HEADER, row)) for rep in reports for row in rep.csv_rows()]
    return _dump_json(_doc("study", {"n_max": cfg.n_max, "summary": summary, "rows": rows}))


def _fan_out(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


COMMANDS = {
    "boundary": (cmd_boundary, "print a prefractal table", ("json", "svg")),
    "classify": (cmd_classify, "classify a basepoint by its ternary expansion", ("json",)),
    "orbit": (cmd_orbit, "compute one orbit", ("json", "svg")),
    "sequence": (cmd_sequence, "compatible sequence of orbits across levels", ("json",)),
    "footprint": (cmd_footprint, "boundary points of an orbit", ("json", "csv")),
    "straighten": (cmd_straighten, "straighten an address word", ("json",)),
    "address": (cmd_address, "describe a side address", ("json",)),
    "probe": (cmd_probe, "periodic-direction probe", ("json", "csv")),
    "study": (cmd_study, "period and length formulas against simulation", ("json", "csv")),
    "genus": (cmd_genus, "genus of the translation surface", ("json",)),
    "render": (cmd_render, "SVG picture of a table and optional orbit", ("svg",)),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="snowflake-billiards", description="Exact billiards in Koch snowflake prefractals.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text, formats) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--level", type=int, default=0)
        sp.add_argument("--max-level", type=int, default=DEFAULT_MAX_LEVEL)
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        sp.add_argument("--seed", type=int, default=0)
        if name in ("classify", "orbit", "sequence", "footprint", "render"):
            sp.add_argument("--x0", help="basepoint on the base side, as p/q")
        if name in ("orbit", "footprint", "render"):
            sp.add_argument("--dir", help="direction a,b in lattice coordinates (default 0,1)")
        if name in ("classify", "sequence", "study"):
            sp.add_argument("--n-max", type=int, default=4)
        if name == "straighten":
            sp.add_argument("word")
        if name == "address":
            sp.add_argument("word", nargs="?")
            sp.add_argument("--index", type=int, help="1-based side index at --level")
        if name == "probe":
            sp.add_argument("--dir", dest="dir_list", action="append", help="direction a,b; may repeat")
            sp.add_argument("--random-dirs", type=int, default=0)
            sp.add_argument("--sample", dest="basepoints", type=int, default=5, help="basepoints per direction")
            sp.add_argument("--skip-singular", action="store_true", help="redraw basepoints that hit a corner")
        if name in ("probe", "study"):
            sp.add_argument("--workers", type=int, default=1)
        if name == "study":
            sp.add_argument("--sample", required=True, help="p/q, M(n), random:count:maxden; comma separated")
        if name in ("boundary", "orbit", "render"):
            sp.add_argument("--size", type=int, default=SvgStyle.size)
            sp.add_argument("--no-ghosts", action="store_true")
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig(
        level=args.level,
        max_level=args.max_level,
        budget=args.budget,
        n_max=getattr(args, "n_max", 4),
        seed=args.seed,
        workers=getattr(args, "workers", 1),
        out=args.out,
        fmt=args.format,
    )
    if hasattr(args, "size"):
        cfg.style = SvgStyle(size=args.size, show_ghosts=not args.no_ghosts)
    if args.command == "study":
        cfg.sample = parse_sample(args.sample, args.seed)
    cfg.check()
    return cfg


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = _config(args)
        text = COMMANDS[args.command][0](cfg, args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return EXIT_INVARIANT
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
