"""CSV and SVG writers for phase-space trajectories and optimizer history."""

from __future__ import annotations

import numpy as np

SVG_SIZE = 480
MODE_STYLES = {
    "com": "fill:none;stroke:#1f6fb2;stroke-width:1.5;stroke-dasharray:6 4",
    "stretch": "fill:none;stroke:#c24f1f;stroke-width:1.5",
}


def trajectory_csv(trajectories, header_lines=()) -> str:
    """Vertex list of one or more trajectories as CSV.

    Columns: mode, s1, s2, step, re, im. ``step`` 0 is the origin.
    """
    lines = [f"# {line}" for line in header_lines]
    lines.append("mode,s1,s2,step,re,im")
    for traj in trajectories:
        for mode in ("com", "stretch"):
            for step, vertex in enumerate(traj.vertices(mode)):
                lines.append(f"{mode},{traj.spin.s1},{traj.spin.s2},{step},"
                             f"{float(vertex.real)!r},{float(vertex.imag)!r}")
    return "\n".join(lines) + "\n"


def _svg_points(vertices, scale, offset):
    return " ".join(
        f"{(v.real * scale + offset):.3f},{(-v.imag * scale + offset):.3f}"
        for v in vertices)


def trajectory_svg(trajectories, header_lines=()) -> str:
    """One polyline per mode and spin configuration, auto-scaled viewBox."""
    radius = 1e-12
    for traj in trajectories:
        for mode in ("com", "stretch"):
            vertices = traj.vertices(mode)
            radius = max(radius, float(np.max(np.abs(vertices))) if len(vertices) else 0.0)
    scale = 0.45 * SVG_SIZE / radius
    offset = SVG_SIZE / 2

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">']
    parts += [f"<!-- {line} -->" for line in header_lines]
    axis_style = "stroke:#999;stroke-width:0.5"
    parts.append(f'<line x1="0" y1="{offset}" x2="{SVG_SIZE}" y2="{offset}" style="{axis_style}"/>')
    parts.append(f'<line x1="{offset}" y1="0" x2="{offset}" y2="{SVG_SIZE}" style="{axis_style}"/>')
    for traj in trajectories:
        for mode in ("com", "stretch"):
            vertices = traj.vertices(mode)
            parts.append(
                f'<polyline id="{mode}_s{traj.spin.s1:+d}{traj.spin.s2:+d}" '
                f'points="{_svg_points(vertices, scale, offset)}" '
                f'style="{MODE_STYLES[mode]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def history_csv(history, header_lines=()) -> str:
    """Per-generation best fitness of an optimizer run."""
    lines = [f"# {line}" for line in header_lines]
    lines.append("generation,best_fitness")
    lines += [f"{i},{float(fit)!r}" for i, fit in enumerate(history)]
    return "\n".join(lines) + "\n"
