"""Front-pulse computation by continuation toward a critical-weak limit.

A non-monotone wave is continued in c toward 1/a (u-pulse) or in b toward
a (v-pulse).  The envelope constants mu and q are frozen at the start so
the lower-envelope maximum -- the floor under the pulsed component's peak
-- is step-independent, while delta shrinks with the closing coexistence
gap.  The limit profile is checked against the degenerate system.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .model import Regime, SystemParams, classify_regime, critical_speed, decay_rates
from .envelopes import SelectionKnobs, bump_extrema
from .certify import certify
from .solve import (
    IterationReport,
    OperatorConfig,
    Profile,
    iterate,
    ode_residual,
    write_profile,
)

#: the final continuation step must land within this distance of the limit
LIMIT_GAP = 1e-4
#: distance actually used for the final step: small enough that the limit
#: profile's residual against the degenerate system is dominated by grid
#: truncation (which refinement shrinks), not by the parameter gap
FINAL_GAP = 1e-7


@dataclass(frozen=True)
class ContinuationPlan:
    target: str                # "c_to_1_over_a" or "b_to_a"
    base: SystemParams
    speed: float
    steps: Tuple[float, ...]   # successive values of the moving parameter
    knobs: SelectionKnobs      # frozen envelope constants
    config: OperatorConfig
    floor: float               # maximum of the fixed lower envelope
    extrapolation: bool = False


@dataclass(frozen=True)
class StepResult:
    value: float
    profile: Profile
    report: IterationReport
    certified: bool
    max_pulsed: float
    floor_ok: bool


@dataclass(frozen=True)
class PulseResult:
    plan: ContinuationPlan
    steps: List[StepResult]
    limit_profile: Optional[Profile]
    floor: float
    degenerate_residual: Optional[float]
    degenerate_residual_refined: Optional[float]
    tail_verdicts: dict
    failure_index: Optional[int]

    @property
    def passed(self) -> bool:
        return (self.failure_index is None
                and all(st.floor_ok for st in self.steps)
                and all(self.tail_verdicts.values()))


def _step_params(plan: ContinuationPlan, value: float) -> SystemParams:
    b = plan.base
    if plan.target == "c_to_1_over_a":
        return SystemParams(b.a, b.b, value, b.d)
    return SystemParams(b.a, value, b.c, b.d)


def plan_continuation(p_base: SystemParams, s: float, target: str,
                      n_steps: int,
                      config: Optional[OperatorConfig] = None) -> ContinuationPlan:
    """Geometric schedule toward the degenerate limit with frozen envelopes.

    Step distances to the limit halve each step; the final step is forced
    to within LIMIT_GAP of it.  The overshoot-mode q (= 2/denominator) and
    the mu placements are computed once and reused at every step, which
    keeps the lower-envelope maximum -- the floor -- fixed.
    """
    if classify_regime(p_base) is not Regime.STRICT_WEAK:
        raise ValueError("unsupported regime")
    if s < critical_speed(p_base):
        raise ValueError("subcritical speed")
    if target == "c_to_1_over_a":
        limit, start = 1.0 / p_base.a, p_base.c
    elif target == "b_to_a":
        limit, start = p_base.a, p_base.b
    else:
        raise ValueError(f"unknown continuation target {target!r}")
    total = limit - start
    if total <= LIMIT_GAP:
        raise ValueError("target not reachable from the base parameters")
    steps = [limit - total * 0.5 ** k for k in range(1, n_steps)]
    steps.append(limit - min(total * 0.5 ** n_steps, FINAL_GAP))
    if any(s2 <= s1 for s1, s2 in zip([start] + steps, steps)):
        raise ValueError("continuation schedule is not strictly monotone")

    r = decay_rates(p_base, s)
    a, d = p_base.a, p_base.d
    cap1 = min(r.lambda3 / r.lambda1, (r.lambda1 + r.lambda2) / r.lambda1, 2.0)
    cap2 = min(r.lambda4 / r.lambda2, (r.lambda1 + r.lambda2) / r.lambda2, 2.0)
    if target == "c_to_1_over_a":
        mu1 = 1.0 + 0.9 * (cap1 - 1.0)
        denom1 = -((mu1 * r.lambda1) ** 2) + s * mu1 * r.lambda1 - 1.0
        q1 = 2.0 / denom1
        mu2 = 1.0 + 0.5 * (cap2 - 1.0)
        denom2 = -d * (mu2 * r.lambda2) ** 2 + s * mu2 * r.lambda2 - a
        q2 = 1.1 * max(1.0, a, (a * a + a * p_base.b) / denom2)
        _, _, floor = bump_extrema(1.0, r.lambda1, mu1, q1)
    else:
        mu2 = 1.0 + 0.9 * (cap2 - 1.0)
        denom2 = -d * (mu2 * r.lambda2) ** 2 + s * mu2 * r.lambda2 - a
        q2 = 2.0 * a * a / denom2
        if q2 <= max(1.0, a):
            raise ValueError("overshoot q infeasible for the v-pulse")
        mu1 = 1.0 + 0.5 * (cap1 - 1.0)
        denom1 = -((mu1 * r.lambda1) ** 2) + s * mu1 * r.lambda1 - 1.0
        q1 = 1.1 * max(1.0, (1.0 + a * p_base.c) / denom1)
        _, _, floor = bump_extrema(a, r.lambda2, mu2, q2)
    knobs = SelectionKnobs(mu1=mu1, mu2=mu2, q1=q1, q2=q2)
    if config is None:
        # h = 0.04 keeps the quadrature overshoot of the envelope pair an
        # order of magnitude under the sandwich-violation abort threshold
        config = OperatorConfig(left=-80.0, right=600.0, n_points=17001,
                                tol=1e-7, max_iters=40000)
    return ContinuationPlan(target=target, base=p_base, speed=s,
                            steps=tuple(steps), knobs=knobs, config=config,
                            floor=floor)


def _pulsed_component(plan: ContinuationPlan, prof: Profile) -> np.ndarray:
    return prof.u if plan.target == "c_to_1_over_a" else prof.v


def run_continuation(plan: ContinuationPlan, refine: bool = True) -> PulseResult:
    """Solve every step warm-started from the previous profile.

    Each step is certified with the frozen constants before solving; the
    floor must survive every step.  The limit profile (last step) is
    checked against the degenerate system obtained at the exact limit,
    optionally re-solved at doubled resolution to confirm the residual
    drops with the grid.
    """
    s = plan.speed
    results: List[StepResult] = []
    warm = None
    failure = None
    for k, value in enumerate(plan.steps):
        p_k = _step_params(plan, value)
        cert = certify(p_k, s, knobs=plan.knobs)
        prof, rep = iterate(cert.envelope, p_k, s, plan.config, warm_start=warm)
        pulsed = _pulsed_component(plan, prof)
        max_pulsed = float(pulsed.max())
        results.append(StepResult(
            value=value, profile=prof, report=rep, certified=cert.passed,
            max_pulsed=max_pulsed,
            floor_ok=max_pulsed >= plan.floor - 1e-8,
        ))
        if not rep.converged:
            failure = k
            break
        warm = (prof.u, prof.v)

    limit_prof = results[-1].profile if results and failure is None else None
    deg_res = deg_res_fine = None
    tails = {}
    if limit_prof is not None:
        if plan.target == "c_to_1_over_a":
            p_lim = SystemParams(plan.base.a, plan.base.b, 1.0 / plan.base.a, plan.base.d)
            deg_res = ode_residual(limit_prof, p_lim)
            pulsed_right = abs(limit_prof.u[-1])
            companion_right = abs(limit_prof.v[-1] - plan.base.a)
        else:
            p_lim = SystemParams(plan.base.a, plan.base.a, plan.base.c, plan.base.d)
            deg_res = ode_residual(limit_prof, p_lim)
            pulsed_right = abs(limit_prof.v[-1])
            companion_right = abs(limit_prof.u[-1] - 1.0)
        tails = {
            "pulsed_right_small": bool(pulsed_right <= 1e-2),
            "companion_right_at_carrying": bool(companion_right <= 1e-2),
            "left_both_small": bool(abs(limit_prof.u[0]) <= 1e-6
                                    and abs(limit_prof.v[0]) <= 1e-6),
        }
        if refine:
            cfg2 = replace(plan.config, n_points=2 * plan.config.n_points - 1)
            p_k = _step_params(plan, plan.steps[-1])
            cert = certify(p_k, s, knobs=plan.knobs)
            grid2 = np.linspace(cfg2.left, cfg2.right, cfg2.n_points)
            warm2 = (np.interp(grid2, limit_prof.grid, limit_prof.u),
                     np.interp(grid2, limit_prof.grid, limit_prof.v))
            prof2, _ = iterate(cert.envelope, p_k, s, cfg2, warm_start=warm2)
            deg_res_fine = ode_residual(prof2, p_lim)
    return PulseResult(plan=plan, steps=results, limit_profile=limit_prof,
                       floor=plan.floor, degenerate_residual=deg_res,
                       degenerate_residual_refined=deg_res_fine,
                       tail_verdicts=tails, failure_index=failure)


@dataclass(frozen=True)
class TailCase:
    case: int                      # 1..4 per eventual monotonicity pattern
    u_oscillates: bool
    v_oscillates: bool
    bracket_ok: Optional[bool]     # companion bracket at extrema (case 2)
    peak_bound_ok: Optional[bool]  # pulsed-peak bound (case 4 style)


def pulse_tail_diagnostics(prof: Profile, p_degenerate: SystemParams) -> TailCase:
    """Classify the right-tail behavior and check its necessary inequalities.

    Oscillation = at least two interior extrema on the rightmost quarter.
    When v oscillates, each interior v-maximum must satisfy
    u <= (a - v)/b there; at interior u-maxima, u + v/a <= 1 must hold.
    """
    from .analyze import _interior_extrema  # shared prominence filtering

    a, b = p_degenerate.a, p_degenerate.b
    n = prof.grid.size
    sl = slice(3 * n // 4, n)
    ex_u = _interior_extrema(prof.grid[sl], prof.u[sl], "u")
    ex_v = _interior_extrema(prof.grid[sl], prof.v[sl], "v")
    osc_u, osc_v = len(ex_u) >= 2, len(ex_v) >= 2
    case = {(False, False): 1, (False, True): 2,
            (True, False): 3, (True, True): 4}[(osc_u, osc_v)]

    bracket_ok = None
    if osc_v:
        ok = True
        for e in ex_v:
            if e.kind == "max":
                i = int(np.argmin(np.abs(prof.grid - e.location)))
                ok &= prof.u[i] <= (a - prof.v[i]) / b + 1e-9
        bracket_ok = bool(ok)

    peak_bound_ok = None
    u_maxima = [e for e in _interior_extrema(prof.grid, prof.u, "u")
                if e.kind == "max"]
    if u_maxima:
        ok = True
        for e in u_maxima:
            i = int(np.argmin(np.abs(prof.grid - e.location)))
            ok &= prof.u[i] + prof.v[i] / a <= 1.0 + 1e-9
        peak_bound_ok = bool(ok)
    return TailCase(case=case, u_oscillates=osc_u, v_oscillates=osc_v,
                    bracket_ok=bracket_ok, peak_bound_ok=peak_bound_ok)


def write_pulse_result(res: PulseResult, out_dir: str,
                       header_extra: Optional[dict] = None) -> None:
    """One profile CSV per step plus a summary JSON in a directory."""
    os.makedirs(out_dir, exist_ok=True)
    for k, st in enumerate(res.steps):
        base = os.path.join(out_dir, f"step_{k:02d}")
        write_profile(st.profile, base + ".csv", base + ".json",
                      header_extra={"step_value": st.value})
    summary = {
        "target": res.plan.target,
        "speed": res.plan.speed,
        "steps": list(res.plan.steps),
        "floor": res.floor,
        "max_pulsed": [st.max_pulsed for st in res.steps],
        "floor_ok": [st.floor_ok for st in res.steps],
        "iterations": [st.report.iterations_used for st in res.steps],
        "degenerate_residual": res.degenerate_residual,
        "degenerate_residual_refined": res.degenerate_residual_refined,
        "tail_verdicts": res.tail_verdicts,
        "failure_index": res.failure_index,
        "passed": res.passed,
    }
    if header_extra:
        summary.update(header_extra)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
