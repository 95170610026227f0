"""Numerical verification that an envelope set brackets a true wave.

Checks three things on a dense grid: the pointwise ordering of the
envelopes, the corner (one-sided derivative) conditions at the join
points, and the four differential inequalities

    u_up'' - s u_up' + u_up (1 - u_up - c v_lo) <= 0,
    u_lo'' - s u_lo' + u_lo (1 - u_lo - c v_up) >= 0,
    d v_up'' - s v_up' + v_up (a - b u_lo - v_up) <= 0,
    d v_lo'' - s v_lo' + v_lo (a - b u_up - v_lo) >= 0,

with small exclusion windows around the joins where second derivatives
are undefined.  This is a floating-point grid check, not interval
arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .model import Regime, SystemParams, admissibility, classify_regime, critical_speed
from .envelopes import (
    EnvelopeSet,
    SelectionKnobs,
    build_envelopes,
    min_decay_rate,
    select_critical,
    select_supercritical,
)

#: residual within this band of zero counts as satisfying its inequality
RESIDUAL_TOL = 1e-10
#: grid points closer than this to a join point are skipped
EXCLUSION_RADIUS = 1e-6


@dataclass(frozen=True)
class CornerCheck:
    profile: str
    location: float
    left_deriv: float
    right_deriv: float
    ok: bool


@dataclass(frozen=True)
class Certificate:
    inequality_margins: Dict[str, np.ndarray]
    min_margins: Dict[str, float]
    corner_checks: List[CornerCheck]
    ordering_ok: bool
    ordering_gap: float
    grid: Dict[str, float]
    verdict: str
    excluded_points: int = 0
    envelope: EnvelopeSet = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def make_grid(env: EnvelopeSet, n_points: int = 20001) -> np.ndarray:
    """Evaluation grid clustered near join points and deep in the left tail.

    Spans [leftmost join - 40/lam_min, 30] with geometric refinement on
    both sides of every join; points inside the exclusion radius of a join
    are dropped.
    """
    lam_min = min_decay_rate(env)
    joins = env.join_points
    left = min(joins) - 40.0 / lam_min
    base = np.linspace(left, 30.0, n_points)
    clusters = [base]
    for j in joins:
        offs = np.geomspace(2.0 * EXCLUSION_RADIUS, 1.0, 80)
        clusters.append(j + offs)
        clusters.append(j - offs)
    grid = np.unique(np.concatenate(clusters))
    keep = np.ones(grid.size, dtype=bool)
    for j in joins:
        keep &= np.abs(grid - j) > EXCLUSION_RADIUS
    return grid[keep & (grid >= left) & (grid <= 30.0)]


def check_ordering(env: EnvelopeSet, grid: np.ndarray) -> Tuple[bool, float]:
    """Pointwise u_lower <= u_upper and v_lower <= v_upper on the grid."""
    gap_u = env.u_upper(grid) - env.u_lower(grid)
    gap_v = env.v_upper(grid) - env.v_lower(grid)
    worst = float(min(gap_u.min(), gap_v.min()))
    return worst >= -1e-12, worst


def check_corners(env: EnvelopeSet) -> List[CornerCheck]:
    """One-sided derivative orientation at every join point.

    Upper envelopes must be concave at corners (left derivative >= right);
    lower envelopes convex (left <= right).
    """
    out = []
    specs = [
        ("u_upper", env.u_upper, True), ("u_lower", env.u_lower, False),
        ("v_upper", env.v_upper, True), ("v_lower", env.v_lower, False),
    ]
    for name, prof, is_upper in specs:
        for j in prof.join_points:
            dl, dr = prof.one_sided(j)
            ok = dl >= dr - RESIDUAL_TOL if is_upper else dl <= dr + RESIDUAL_TOL
            out.append(CornerCheck(name, j, dl, dr, ok))
    return out


def check_differential_inequalities(env: EnvelopeSet, p: SystemParams, s: float,
                                    grid: np.ndarray) -> Dict[str, np.ndarray]:
    """Signed residuals of the four inequalities from closed-form derivatives."""
    a, b, c, d = p.a, p.b, p.c, p.d
    uu, ul = env.u_upper(grid), env.u_lower(grid)
    vu, vl = env.v_upper(grid), env.v_lower(grid)
    res = {
        "u_upper": env.u_upper(grid, 2) - s * env.u_upper(grid, 1)
        + uu * (1.0 - uu - c * vl),
        "u_lower": env.u_lower(grid, 2) - s * env.u_lower(grid, 1)
        + ul * (1.0 - ul - c * vu),
        "v_upper": d * env.v_upper(grid, 2) - s * env.v_upper(grid, 1)
        + vu * (a - b * ul - vu),
        "v_lower": d * env.v_lower(grid, 2) - s * env.v_lower(grid, 1)
        + vl * (a - b * uu - vl),
    }
    return res


def _mode_knobs(mode: str) -> SelectionKnobs:
    if mode == "default":
        return SelectionKnobs()
    if mode == "nonmonotone-u":
        return SelectionKnobs(nonmonotone_u=True)
    if mode == "nonmonotone-v":
        return SelectionKnobs(nonmonotone_v=True)
    raise ValueError(f"unknown mode {mode!r}")


def select_and_build(p: SystemParams, s: float, mode: str = "default",
                     knobs: SelectionKnobs = None) -> EnvelopeSet:
    """Pick envelope constants for (p, s) and assemble the envelope set."""
    if knobs is None:
        knobs = _mode_knobs(mode)
    s_star = critical_speed(p)
    if abs(s - s_star) <= 1e-9:
        ep = select_critical(p, knobs)
        return build_envelopes(p, s_star, ep)
    ep = select_supercritical(p, s, knobs)
    return build_envelopes(p, s, ep)


def certify(p: SystemParams, s: float, mode: str = "default",
            knobs: SelectionKnobs = None, n_points: int = 20001,
            env: EnvelopeSet = None) -> Certificate:
    """Build envelopes for (p, s) and verify all bracketing conditions."""
    adm = admissibility(p, s)
    if not adm.admissible:
        raise ValueError(adm.reason)
    if classify_regime(p) is not Regime.STRICT_WEAK:
        raise ValueError("unsupported regime")
    if env is None:
        env = select_and_build(p, s, mode, knobs)
    grid = make_grid(env, n_points)
    ordering_ok, gap = check_ordering(env, grid)
    corners = check_corners(env)
    residuals = check_differential_inequalities(env, p, s, grid)

    min_margins = {}
    signs_ok = True
    for name, arr in residuals.items():
        if name.endswith("upper"):
            worst = float(arr.max())   # must be <= tol
            min_margins[name] = worst
            signs_ok &= worst <= RESIDUAL_TOL
        else:
            worst = float(arr.min())   # must be >= -tol
            min_margins[name] = worst
            signs_ok &= worst >= -RESIDUAL_TOL

    verdict = "pass" if (signs_ok and ordering_ok and all(cc.ok for cc in corners)) else "fail"
    grid_desc = {
        "left": float(grid[0]), "right": float(grid[-1]),
        "n_points": int(grid.size), "exclusion_radius": EXCLUSION_RADIUS,
    }
    return Certificate(
        inequality_margins=residuals,
        min_margins=min_margins,
        corner_checks=corners,
        ordering_ok=ordering_ok,
        ordering_gap=gap,
        grid=grid_desc,
        verdict=verdict,
        envelope=env,
    )


def certificate_to_json(cert: Certificate) -> Dict:
    """JSON-ready summary (residual arrays reduced to their worst values)."""
    return {
        "verdict": cert.verdict,
        "ordering_ok": cert.ordering_ok,
        "ordering_gap": cert.ordering_gap,
        "min_margins": cert.min_margins,
        "corner_checks": [
            {"profile": cc.profile, "location": cc.location,
             "left_deriv": cc.left_deriv, "right_deriv": cc.right_deriv,
             "ok": cc.ok}
            for cc in cert.corner_checks
        ],
        "grid": cert.grid,
        "case": cert.envelope.case if cert.envelope is not None else None,
    }


def write_certificate(cert: Certificate, json_path: str,
                      csv_path: str = None, grid: np.ndarray = None) -> None:
    with open(json_path, "w") as fh:
        json.dump(certificate_to_json(cert), fh, indent=2, sort_keys=True)
    if csv_path is not None and grid is not None:
        cols = np.column_stack([grid] + [cert.inequality_margins[k]
                                         for k in sorted(cert.inequality_margins)])
        header = "xi," + ",".join(sorted(cert.inequality_margins))
        np.savetxt(csv_path, cols, delimiter=",", fmt="%.17g",
                   header=header, comments="")
