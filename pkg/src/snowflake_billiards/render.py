"""Deterministic SVG pictures of a table and an orbit on it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .boundary import Prefractal
from .dynamics import Orbit, Status
from .errors import DomainError
from .lattice import LatticePoint


@dataclass(frozen=True)
class SvgStyle:
    size: int = 600  # pixel width of the drawing
    margin: float = 0.05  # fraction of the bounding box added on each side
    boundary_color: str = "#1f1f1f"
    ghost_color: str = "#888888"
    orbit_color: str = "#c0392b"
    dot_color: str = "#2c3e50"
    stroke: float = 1.0
    dot_radius: float = 2.5
    show_ghosts: bool = True
    show_footprint: bool = True


def _num(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def render_svg(p: Prefractal, orbit: Optional[Orbit] = None, style: SvgStyle = SvgStyle()) -> str:
    if orbit is not None and orbit.level != p.level:
        raise DomainError(f"orbit was computed on KS_{orbit.level}, not on KS_{p.level}")
    outline = [pt.to_cartesian() for pt in p.vertex_points()]
    xs = [x for x, _ in outline]
    ys = [y for _, y in outline]
    w, h = max(xs) - min(xs), max(ys) - min(ys)
    pad = style.margin * max(w, h)
    x0, y1 = min(xs) - pad, max(ys) + pad
    k = style.size / (w + 2 * pad)
    height = (h + 2 * pad) * k

    def coords(pt: LatticePoint) -> tuple[str, str]:
        x, y = pt.to_cartesian()
        # SVG's y axis points down
        return _num((x - x0) * k), _num((y1 - y) * k)

    def xy(pt: LatticePoint) -> str:
        return ",".join(coords(pt))

    def poly(tag: str, pts, **attrs) -> str:
        extra = "".join(f' {name.replace("_", "-")}="{val}"' for name, val in attrs.items())
        return f'<{tag} points="{" ".join(xy(q) for q in pts)}"{extra}/>'

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(style.size)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(style.size)} {_num(height)}">',
        poly(
            "polygon",
            p.vertex_points(),
            fill="none",
            stroke=style.boundary_color,
            stroke_width=_num(style.stroke),
        ),
    ]
    if style.show_ghosts and p.level > 0:
        lines.append(f'<g stroke="{style.ghost_color}" stroke-width="{_num(style.stroke)}" stroke-dasharray="4 3">')
        for g in build_parent_ghosts(p):
            (ax, ay), (bx, by) = coords(g[0]), coords(g[1])
            lines.append(f'<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}"/>')
        lines.append("</g>")
    if orbit is not None and orbit.states:
        path = [st.point for st in orbit.states]
        if orbit.status is Status.PERIODIC:
            path.append(path[0])
        elif orbit.status is Status.SINGULAR and orbit.vertex is not None:
            path.append(orbit.vertex)
        lines.append(
            poly(
                "polyline",
                path,
                fill="none",
                stroke=style.orbit_color,
                stroke_width=_num(style.stroke),
            )
        )
        if style.show_footprint:
            lines.append(f'<g fill="{style.dot_color}">')
            for st in orbit.states:
                cx, cy = coords(st.point)
                lines.append(f'<circle cx="{cx}" cy="{cy}" r="{_num(style.dot_radius)}"/>')
            lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def build_parent_ghosts(p: Prefractal) -> list[tuple[LatticePoint, LatticePoint]]:
    """Bases of the level-n cells: the middle thirds removed from KS_{n-1}."""
    return [(c.triangle[0], c.triangle[2]) for c in p.cells]
