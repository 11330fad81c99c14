"""Fidelity-versus-noise curves for coherent states and ECSs, with SVG output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import analytics
from .channels import GaussianNoiseChannel
from .config import RunConfig
from .entfid import (
    ecs_purification,
    entanglement_fidelity_brute,
    entanglement_fidelity_overlap,
    overlap_converged_order,
)
from .errors import CutoffTooSmall
from .fock import FockSpace, coherent_tail_mass

CSV_HEADER = ["sigma", "fe_coherent", "fe_ecs_closed", "fe_ecs_exact", "fe_ecs_brute", "est_error"]
FIDELITY_SLACK = 1e-9


@dataclass(frozen=True)
class CurvePoint:
    sigma: float
    fe_coherent: float
    fe_ecs_closed: float
    fe_ecs_exact: float
    fe_ecs_brute: float | None
    est_error: float

    def __post_init__(self):
        for name in ("fe_coherent", "fe_ecs_closed", "fe_ecs_exact", "fe_ecs_brute"):
            value = getattr(self, name)
            if value is not None and not -FIDELITY_SLACK <= value <= 1 + FIDELITY_SLACK:
                raise ValueError(f"{name}={value!r} outside [0, 1]")


def brute_force_feasible(alpha: float, config: RunConfig) -> bool:
    """Whether the two-mode cutoff holds ``|alpha>`` to the tail tolerance."""
    return coherent_tail_mass(alpha, config.cutoff_two_mode) <= config.tol("tail_tol")


def fig1_curve(alpha: float, sigma_max: float, steps: int, config: RunConfig,
               brute: bool | None = None) -> list[CurvePoint]:
    """Fidelities of ``|alpha>`` and ``|Psi(alpha, -alpha)>`` on ``linspace(0, sigma_max, steps)``.

    The brute-force column is filled only when the two-mode cutoff can hold
    the ECS (``brute=None`` decides automatically).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if not sigma_max > 0:
        raise ValueError(f"sigma_max must be > 0, got {sigma_max}")
    spec = analytics.ECSSpec.symmetric(alpha)
    if brute is None:
        brute = brute_force_feasible(alpha, config)
    gamma = None
    if brute:
        gamma = ecs_purification(alpha, -alpha, FockSpace(config.cutoff_two_mode),
                                 tail_tol=config.tol("tail_tol"))
        if not brute_force_feasible(alpha, config):
            raise CutoffTooSmall(f"cutoff {config.cutoff_two_mode} too small for brute force at alpha={alpha}")

    rows = []
    for sigma in np.linspace(0.0, sigma_max, steps):
        sigma = float(sigma)
        exact = entanglement_fidelity_overlap(alpha, -alpha, sigma, order=config.gh_order)
        est = exact.est_error
        fe_brute = None
        if gamma is not None:
            order = max(config.gh_order, overlap_converged_order(alpha, -alpha, sigma, order=config.gh_order,
                                                                 tol=1e-9, max_order=160))
            res = entanglement_fidelity_brute(gamma, GaussianNoiseChannel.gaussian(sigma, order))
            fe_brute = res.value
            est = max(est, res.est_error)
        rows.append(CurvePoint(
            sigma=sigma,
            fe_coherent=analytics.coherent_entanglement_fidelity(sigma),
            fe_ecs_closed=analytics.ecs_entanglement_fidelity(spec, sigma),
            fe_ecs_exact=exact.value,
            fe_ecs_brute=fe_brute,
            est_error=est,
        ))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


def curve_to_csv(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow([_fmt(getattr(p, name)) for name in CSV_HEADER])
    return buf.getvalue()


def curve_to_json(points, meta: dict | None = None) -> str:
    rows = [{k: (None if v is None else float(_fmt(v))) for k, v in asdict(p).items()} for p in points]
    payload = {"meta": meta or {}, "points": rows}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def curve_to_svg(points, title: str = "", width: int = 480, height: int = 320) -> str:
    """Line chart of the coherent and ECS fidelity columns."""
    margin = {"l": 56, "r": 16, "t": 28, "b": 44}
    pw = width - margin["l"] - margin["r"]
    ph = height - margin["t"] - margin["b"]
    sig_max = max(p.sigma for p in points) or 1.0

    def x(s):
        return margin["l"] + pw * s / sig_max

    def y(f):
        return margin["t"] + ph * (1.0 - f)

    series = [
        ("fe_coherent", "CS", "#1f77b4", ""),
        ("fe_ecs_closed", "ECS closed form", "#d62728", ""),
        ("fe_ecs_exact", "ECS exact", "#2ca02c", "4 3"),
    ]
    if any(p.fe_ecs_brute is not None for p in points):
        series.append(("fe_ecs_brute", "ECS Fock", "#9467bd", "1 3"))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin["l"]}" y="{margin["t"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(6):
        f = i / 5
        out.append(f'<text x="{margin["l"] - 6}" y="{y(f) + 4:.2f}" text-anchor="end">{f:.1f}</text>')
        s = sig_max * i / 5
        out.append(f'<text x="{x(s):.2f}" y="{margin["t"] + ph + 16}" text-anchor="middle">{s:.3g}</text>')
    out.append(f'<text x="{margin["l"] + pw / 2:.2f}" y="{height - 8}" text-anchor="middle">'
               f'noise variance sigma (vacuum = 1/2)</text>')
    out.append(f'<text x="14" y="{margin["t"] + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {margin["t"] + ph / 2:.2f})">entanglement fidelity</text>')
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="18" text-anchor="middle">{title}</text>')
    for idx, (key, label, color, dash) in enumerate(series):
        pts = [(p.sigma, getattr(p, key)) for p in points if getattr(p, key) is not None]
        path = " ".join(f"{x(s):.2f},{y(f):.2f}" for s, f in pts)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        ly = margin["t"] + 14 + 14 * idx
        lx = margin["l"] + pw - 120
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 24}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def check_curve(points) -> list[str]:
    """Row-level invariants; returns a list of violations."""
    problems = []
    for p in points:
        if p.fe_ecs_closed > p.fe_coherent + FIDELITY_SLACK:
            problems.append(f"sigma={p.sigma}: ECS closed form {p.fe_ecs_closed} above coherent {p.fe_coherent}")
    for key in ("fe_coherent", "fe_ecs_closed", "fe_ecs_exact"):
        vals = [getattr(p, key) for p in points]
        if any(b > a + FIDELITY_SLACK for a, b in zip(vals, vals[1:])):
            problems.append(f"{key} is not monotone in sigma")
    if any(not math.isfinite(p.est_error) for p in points):
        problems.append("non-finite error estimate")
    return problems
