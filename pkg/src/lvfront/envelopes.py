"""Explicit super/sub-solution envelopes for the competition wave system.

The four envelopes are piecewise-analytic: a decaying exponential (or the
critical-speed variant -h*xi*exp(lam*xi)) capped by a constant for the
upper pair, and a positive "bump" glued to a small constant for the lower
pair.  The free constants are selected so that the differential
inequalities verified in :mod:`lvfront.certify` hold with positive margin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import EQ_TOL, Regime, SystemParams, classify_regime, critical_speed, decay_rates

# envelope cases
SUPERCRITICAL = "Supercritical"
CRITICAL_AD_EQ1 = "CriticalAdEq1"
CRITICAL_AD_LT1 = "CriticalAdLt1"

#: smallest bump maximum considered representable; below this the join
#: point and the lower envelope drown in floating-point underflow
MIN_BUMP_MAX = 1e-250


# ---------------------------------------------------------------------------
# piecewise profiles
# ---------------------------------------------------------------------------

def _eval_constant(t, pr, deriv):
    out = np.full_like(t, pr["c0"] if deriv == 0 else 0.0)
    return out


def _eval_exp(t, pr, deriv):
    A, lam = pr["A"], pr["lam"]
    return A * lam ** deriv * np.exp(lam * t)


def _eval_bump(t, pr, deriv):
    A, lam, mu, q = pr["A"], pr["lam"], pr["mu"], pr["q"]
    return A * lam ** deriv * np.exp(lam * t) - q * (mu * lam) ** deriv * np.exp(mu * lam * t)


def _eval_linexp(t, pr, deriv):
    h, lam = pr["h"], pr["lam"]
    e = np.exp(lam * t)
    if deriv == 0:
        return -h * t * e
    if deriv == 1:
        return -h * e * (1.0 + lam * t)
    return -h * e * (2.0 * lam + lam * lam * t)


def _eval_rootexp(t, pr, deriv):
    # (-h t - q sqrt(-t)) e^{lam t}, only ever evaluated for t < 0
    h, lam, q = pr["h"], pr["lam"], pr["q"]
    mt = np.maximum(-t, 1e-300)
    root = np.sqrt(mt)
    phi = h * mt - q * root
    e = np.exp(lam * t)
    if deriv == 0:
        return phi * e
    dphi = -h + 0.5 * q / root
    if deriv == 1:
        return (dphi + lam * phi) * e
    d2phi = 0.25 * q * mt ** -1.5
    return (d2phi + 2.0 * lam * dphi + lam * lam * phi) * e


_PIECE_EVAL = {
    "constant": _eval_constant,
    "exp": _eval_exp,
    "bump": _eval_bump,
    "linexp": _eval_linexp,
    "rootexp": _eval_rootexp,
}


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    kind: str
    params: Dict[str, float]


@dataclass(frozen=True)
class PiecewiseProfile:
    """Piecewise-analytic function tiling the real line.

    Pieces are evaluated in the unshifted frame; `shift` translates the
    whole profile to the right.  Value and the first two derivatives are
    available in closed form away from the join points.
    """

    pieces: Tuple[Piece, ...]
    shift: float = 0.0

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("empty profile")
        if self.pieces[0].lo != -math.inf or self.pieces[-1].hi != math.inf:
            raise ValueError("pieces must tile the real line")
        for left, right in zip(self.pieces, self.pieces[1:]):
            if left.hi != right.lo:
                raise ValueError("pieces must tile the real line without gaps")

    @property
    def join_points(self) -> Tuple[float, ...]:
        return tuple(pc.hi + self.shift for pc in self.pieces[:-1])

    def __call__(self, x, deriv: int = 0):
        t = np.asarray(x, dtype=float) - self.shift
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        for i, pc in enumerate(self.pieces):
            if i == len(self.pieces) - 1:
                mask = t >= pc.lo
            else:
                mask = (t >= pc.lo) & (t < pc.hi)
            if mask.any():
                out[mask] = _PIECE_EVAL[pc.kind](t[mask], pc.params, deriv)
        return float(out[0]) if scalar else out

    def one_sided(self, x_join: float) -> Tuple[float, float]:
        """Closed-form one-sided first derivatives at an interior join."""
        t = x_join - self.shift
        for left, right in zip(self.pieces, self.pieces[1:]):
            if abs(left.hi - t) <= 1e-12:
                dl = float(_PIECE_EVAL[left.kind](np.array([t]), left.params, 1)[0])
                dr = float(_PIECE_EVAL[right.kind](np.array([t]), right.params, 1)[0])
                return dl, dr
        raise ValueError(f"{x_join} is not a join point of this profile")

    def shifted(self, delta: float) -> "PiecewiseProfile":
        return replace(self, shift=self.shift + delta)

    def continuity_defects(self) -> Tuple[float, ...]:
        out = []
        for left, right in zip(self.pieces, self.pieces[1:]):
            t = np.array([left.hi])
            vl = float(_PIECE_EVAL[left.kind](t, left.params, 0)[0])
            vr = float(_PIECE_EVAL[right.kind](t, right.params, 0)[0])
            out.append(abs(vl - vr))
        return tuple(out)


# ---------------------------------------------------------------------------
# bump profiles and their extrema
# ---------------------------------------------------------------------------

def bump_extrema(coef: float, lam: float, mu: float, q: float) -> Tuple[float, float, float]:
    """Zero, maximum point and maximum of f(xi) = coef e^{lam xi} - q e^{mu lam xi}.

    Closed forms: xi0 = -log(q/coef)/((mu-1) lam), xiM = -log(q mu/coef)/((mu-1) lam),
    fmax = coef (1 - 1/mu) (q mu / coef)^{-1/(mu-1)}.
    """
    if q <= coef:
        raise ValueError("no interior zero")
    if mu <= 1.0 or lam <= 0.0 or coef <= 0.0:
        raise ValueError("bump requires coef > 0, lam > 0, mu > 1")
    xi0 = -math.log(q / coef) / ((mu - 1.0) * lam)
    xiM = -math.log(q * mu / coef) / ((mu - 1.0) * lam)
    log_fmax = math.log(coef * (1.0 - 1.0 / mu)) - math.log(q * mu / coef) / (mu - 1.0)
    fmax = math.exp(log_fmax) if log_fmax > -700.0 else 0.0
    return xi0, xiM, fmax


def bump_log_max(coef: float, lam: float, mu: float, q: float) -> float:
    """log of the bump maximum, safe against underflow for mu near 1."""
    if q <= coef:
        raise ValueError("no interior zero")
    return math.log(coef * (1.0 - 1.0 / mu)) - math.log(q * mu / coef) / (mu - 1.0)


def gbump_extrema(h: float, q: float, lam: float) -> Tuple[float, float, float]:
    """Zero, maximum point and maximum of g(xi) = (-h xi - q sqrt(-xi)) e^{lam xi}.

    g is positive exactly on (-inf, xi0_hat) with xi0_hat = -(q/h)^2; the
    maximum has no closed form and is located by bounded 1-D maximization.
    """
    if min(h, q, lam) <= 0.0:
        raise ValueError("g-bump requires h, q, lam > 0")
    xi0_hat = -((q / h) ** 2)

    def neg_g(x):
        return -(h * (-x) - q * math.sqrt(-x)) * math.exp(lam * x)

    lo = xi0_hat - 30.0 / lam - 5.0
    res = minimize_scalar(neg_g, bounds=(lo, xi0_hat), method="bounded",
                          options={"xatol": 1e-12})
    xiM_hat = float(res.x)
    gmax = -float(res.fun)
    return xi0_hat, xiM_hat, gmax


def join_point(f: Callable[[float], float], delta: float,
               bracket: Tuple[float, float]) -> float:
    """Point in (xiM, xi0) where the bump equals delta on its decreasing branch.

    Root-finds f - delta on the bracket; the returned xi satisfies
    |f(xi) - delta| <= 1e-12 with f decreasing through it.
    """
    xiM, xi0 = bracket
    if delta <= 0.0 or delta >= f(xiM):
        raise ValueError("delta above envelope maximum")
    try:
        xi = brentq(lambda x: f(x) - delta, xiM, xi0, xtol=1e-14, rtol=8.9e-16)
    except ValueError as exc:
        raise ValueError("no continuity point in bracket") from exc
    if abs(f(xi) - delta) > 1e-12:
        raise ValueError("no continuity point in bracket")
    return float(xi)


# ---------------------------------------------------------------------------
# parameter selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectionKnobs:
    """Tunable placement of the free envelope constants.

    theta_mu places mu inside its admissible interval (0 -> near 1,
    1 -> near the cap); q_safety multiplies every strict lower bound;
    delta_fraction places delta below its cap.  The nonmonotone flags
    switch the corresponding q to the value 2/denominator that pushes the
    lower-envelope maximum above the coexistence component, and move mu
    toward the top of its interval where that maximum is largest.
    """

    theta_mu: float = 0.5
    q_safety: float = 1.1
    delta_fraction: float = 0.5
    nonmonotone_u: bool = False
    nonmonotone_v: bool = False
    theta_mu_nonmonotone: float = 0.9
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    q1: Optional[float] = None
    q2: Optional[float] = None


@dataclass(frozen=True)
class EnvelopeParams:
    # supercritical constants
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    q1: Optional[float] = None
    q2: Optional[float] = None
    delta1: Optional[float] = None
    delta2: Optional[float] = None
    xi1: Optional[float] = None
    xi2: Optional[float] = None
    # critical-case constants
    h1: Optional[float] = None
    h2: Optional[float] = None
    qhat1: Optional[float] = None
    qhat2: Optional[float] = None
    deltahat1: Optional[float] = None
    deltahat2: Optional[float] = None
    xihat1: Optional[float] = None
    xihat2: Optional[float] = None
    muhat2: Optional[float] = None
    Qhat2: Optional[float] = None
    margins: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class EnvelopeSet:
    u_upper: PiecewiseProfile
    u_lower: PiecewiseProfile
    v_upper: PiecewiseProfile
    v_lower: PiecewiseProfile
    params: EnvelopeParams
    speed: float
    case: str
    system: SystemParams

    def shifted(self, delta: float) -> "EnvelopeSet":
        return replace(
            self,
            u_upper=self.u_upper.shifted(delta),
            u_lower=self.u_lower.shifted(delta),
            v_upper=self.v_upper.shifted(delta),
            v_lower=self.v_lower.shifted(delta),
        )

    @property
    def join_points(self) -> Tuple[float, ...]:
        pts = []
        for prof in (self.u_upper, self.u_lower, self.v_upper, self.v_lower):
            pts.extend(prof.join_points)
        return tuple(sorted(set(pts)))


def _theta(knobs: SelectionKnobs, nonmonotone: bool) -> float:
    return knobs.theta_mu_nonmonotone if nonmonotone else knobs.theta_mu


def select_supercritical(p: SystemParams, s: float,
                         knobs: SelectionKnobs = SelectionKnobs()) -> EnvelopeParams:
    """Pick mu, q and delta for the supercritical envelopes (s > s*).

    The mu intervals, the q lower bounds and the delta caps follow the
    sequential selection for s > s*; every strict bound carries the
    knobs.q_safety multiplicative margin.
    """
    if classify_regime(p) is not Regime.STRICT_WEAK:
        raise ValueError("unsupported regime")
    if s <= critical_speed(p):
        raise ValueError("subcritical speed")
    a, b, c, d = p.a, p.b, p.c, p.d
    r = decay_rates(p, s)
    l1, l2, l3, l4 = r.lambda1, r.lambda2, r.lambda3, r.lambda4

    cap1 = min(l3 / l1, (l1 + l2) / l1, 2.0)
    cap2 = min(l4 / l2, (l1 + l2) / l2, 2.0)
    mu1 = knobs.mu1 if knobs.mu1 is not None else 1.0 + _theta(knobs, knobs.nonmonotone_u) * (cap1 - 1.0)
    mu2 = knobs.mu2 if knobs.mu2 is not None else 1.0 + _theta(knobs, knobs.nonmonotone_v) * (cap2 - 1.0)
    if not 1.0 < mu1 < cap1 or not 1.0 < mu2 < cap2:
        raise ValueError("mu outside admissible interval")

    denom1 = -((mu1 * l1) ** 2) + s * mu1 * l1 - 1.0
    denom2 = -d * (mu2 * l2) ** 2 + s * mu2 * l2 - a
    # q must also exceed the leading coefficient so the bump has a zero on
    # the negative half-line
    floor1 = max(1.0, (1.0 + a * c) / denom1)
    floor2 = max(1.0, a, (a * a + a * b) / denom2)
    if knobs.q1 is not None:
        q1 = knobs.q1
    elif knobs.nonmonotone_u:
        q1 = max(2.0 / denom1, knobs.q_safety * floor1)
    else:
        q1 = knobs.q_safety * floor1
    if knobs.q2 is not None:
        q2 = knobs.q2
    elif knobs.nonmonotone_v:
        q2 = max(2.0 / denom2, knobs.q_safety * floor2)
    else:
        q2 = knobs.q_safety * floor2
    if q1 <= floor1 or q2 <= floor2:
        raise ValueError("q below its selection floor")

    _, _, fmax1 = bump_extrema(1.0, l1, mu1, q1)
    _, _, fmax2 = bump_extrema(a, l2, mu2, q2)
    delta1 = knobs.delta_fraction * min(1.0 - a * c, fmax1)
    delta2 = knobs.delta_fraction * min(a - b, fmax2)

    margins = {
        "mu1_cap": cap1 - mu1,
        "mu2_cap": cap2 - mu2,
        "q1_floor": q1 - floor1,
        "q2_floor": q2 - floor2,
        "delta1_cap": min(1.0 - a * c, fmax1) - delta1,
        "delta2_cap": min(a - b, fmax2) - delta2,
    }
    return EnvelopeParams(mu1=mu1, mu2=mu2, q1=q1, q2=q2,
                          delta1=delta1, delta2=delta2, margins=margins)


def _critical_q_search(lam: float, h: float, dcoef: float, coupling: float,
                       other: Callable[[np.ndarray], np.ndarray],
                       q_start: float) -> float:
    """Smallest q (on a deterministic geometric ladder) whose sub-solution
    residual is nonnegative on a dense grid left of the g-bump zero.

    residual(xi) = dcoef e^{lam xi} (q/4)(-xi)^{-3/2} - g^2 - coupling*g*other
    where g is the (h, q, lam) bump.  The ladder starts at q_start and is
    capped where the bump maximum underflows.
    """
    q = q_start
    for _ in range(80):
        xi0 = -((q / h) ** 2)
        if xi0 > -1e-6:
            q *= 1.25
            continue
        xs = np.concatenate([
            np.linspace(xi0 - 200.0 / lam, xi0 - 1e-9, 6000),
            xi0 - np.geomspace(1e-9, 1.0, 500),
        ])
        g = (h * (-xs) - q * np.sqrt(-xs)) * np.exp(lam * xs)
        res = dcoef * np.exp(lam * xs) * (q / 4.0) * (-xs) ** -1.5 \
            - g * g - coupling * g * other(xs)
        _, _, gmax = gbump_extrema(h, q, lam)
        if gmax < MIN_BUMP_MAX:
            break
        if res.min() >= -1e-12:
            return q
        q *= 1.25
    raise ValueError("no admissible critical q found")


def select_critical(p: SystemParams, knobs: SelectionKnobs = SelectionKnobs()) -> EnvelopeParams:
    """Pick the envelope constants at the critical speed s = s* (a*d <= 1).

    The slope constants h follow the closed forms that make the capped
    piece continuous.  The analytic lower bounds on q-hat scale like
    4 h^2 (7/(2e lam))^{7/2}; taken literally they push the bump support so
    far left that its maximum underflows double precision, so q-hat is
    instead chosen as the smallest ladder value whose differential-
    inequality residuals verify numerically (see _critical_q_search).
    """
    if classify_regime(p) is not Regime.STRICT_WEAK:
        raise ValueError("unsupported regime")
    a, b, c, d = p.a, p.b, p.c, p.d
    if a * d > 1.0 + EQ_TOL:
        raise ValueError("apply species swap")
    s = critical_speed(p)
    r = decay_rates(p, s)
    lh1 = s / 2.0
    h1 = lh1 / (lh1 + 1.0) * math.exp(lh1 + 1.0)
    q1_start = knobs.q_safety * max(math.sqrt(h1 * (1.0 / lh1 + 1.0)),
                                    h1 * math.sqrt(1.0 + 1.0 / lh1))
    ad_eq_1 = abs(a * d - 1.0) <= EQ_TOL

    if ad_eq_1:
        lh2 = s / (2.0 * d)
        h2 = a * lh2 / (lh2 + 1.0) * math.exp(lh2 + 1.0)

        def v_up(xs):
            return np.where(xs >= -1.0 / lh2 - 1.0, a, h2 * (-xs) * np.exp(lh2 * xs))

        def u_up(xs):
            return np.where(xs >= -1.0 / lh1 - 1.0, 1.0, h1 * (-xs) * np.exp(lh1 * xs))

        qhat1 = _critical_q_search(lh1, h1, 1.0, c, v_up, q1_start)
        q2_start = knobs.q_safety * max(math.sqrt(h2 * (1.0 / lh2 + 1.0)),
                                        h2 * math.sqrt(1.0 + 1.0 / lh2))
        qhat2 = _critical_q_search(lh2, h2, d, b, u_up, q2_start)
        _, _, gmax1 = gbump_extrema(h1, qhat1, lh1)
        _, _, gmax2 = gbump_extrema(h2, qhat2, lh2)
        deltahat1 = knobs.delta_fraction * min(1.0 - a * c, gmax1)
        deltahat2 = knobs.delta_fraction * min(a - b, gmax2)
        margins = {"gmax1": gmax1, "gmax2": gmax2}
        return EnvelopeParams(h1=h1, h2=h2, qhat1=qhat1, qhat2=qhat2,
                              deltahat1=deltahat1, deltahat2=deltahat2,
                              margins=margins)

    # a*d < 1: the v-side keeps its supercritical shape with rates from
    # the (now non-degenerate) second quadratic
    l2, l4 = r.lambda2, r.lambda4

    def v_up_exp(xs):
        return np.where(xs >= 0.0, a, a * np.exp(l2 * xs))

    qhat1 = _critical_q_search(lh1, h1, 1.0, c, v_up_exp, q1_start)
    _, _, gmax1 = gbump_extrema(h1, qhat1, lh1)
    deltahat1 = knobs.delta_fraction * min(1.0 - a * c, gmax1)

    cap2 = min(l4 / l2, 1.0 + lh1 / (2.0 * l2), 2.0)
    muhat2 = knobs.mu2 if knobs.mu2 is not None else 1.0 + _theta(knobs, knobs.nonmonotone_v) * (cap2 - 1.0)
    if not 1.0 < muhat2 < cap2:
        raise ValueError("mu outside admissible interval")
    denom2 = -d * (muhat2 * l2) ** 2 + s * muhat2 * l2 - a
    floor2 = max(1.0, a, (a * a + 2.0 * a * b * h1 * math.exp(-1.0) / lh1) / denom2)
    if knobs.q2 is not None:
        Qhat2 = knobs.q2
    elif knobs.nonmonotone_v:
        Qhat2 = max(2.0 / denom2, knobs.q_safety * floor2)
    else:
        Qhat2 = knobs.q_safety * floor2
    _, _, fmax2 = bump_extrema(a, l2, muhat2, Qhat2)
    deltahat2 = knobs.delta_fraction * min(a - b, fmax2)
    margins = {"gmax1": gmax1, "muhat2_cap": cap2 - muhat2, "Qhat2_floor": Qhat2 - floor2}
    return EnvelopeParams(h1=h1, qhat1=qhat1, deltahat1=deltahat1,
                          muhat2=muhat2, Qhat2=Qhat2, deltahat2=deltahat2,
                          margins=margins)


# ---------------------------------------------------------------------------
# envelope assembly
# ---------------------------------------------------------------------------

def _bump_profile(coef, lam, mu, q, delta):
    xi0, xiM, fmax = bump_extrema(coef, lam, mu, q)
    pr = {"A": coef, "lam": lam, "mu": mu, "q": q}

    def f(x):
        return coef * math.exp(lam * x) - q * math.exp(mu * lam * x)

    xi = join_point(f, delta, (xiM, xi0))
    prof = PiecewiseProfile((
        Piece(-math.inf, xi, "bump", pr),
        Piece(xi, math.inf, "constant", {"c0": delta}),
    ))
    return prof, xi


def _gbump_profile(h, q, lam, delta):
    xi0, xiM, gmax = gbump_extrema(h, q, lam)

    def g(x):
        return (h * (-x) - q * math.sqrt(-x)) * math.exp(lam * x)

    xi = join_point(g, delta, (xiM, xi0))
    prof = PiecewiseProfile((
        Piece(-math.inf, xi, "rootexp", {"h": h, "q": q, "lam": lam}),
        Piece(xi, math.inf, "constant", {"c0": delta}),
    ))
    return prof, xi


def _capped_exp(coef, lam):
    return PiecewiseProfile((
        Piece(-math.inf, 0.0, "exp", {"A": coef, "lam": lam}),
        Piece(0.0, math.inf, "constant", {"c0": coef}),
    ))


def _capped_linexp(h, lam, cap):
    knee = -1.0 / lam - 1.0
    return PiecewiseProfile((
        Piece(-math.inf, knee, "linexp", {"h": h, "lam": lam}),
        Piece(knee, math.inf, "constant", {"c0": cap}),
    ))


def build_envelopes(p: SystemParams, s: float, ep: EnvelopeParams) -> EnvelopeSet:
    """Assemble the four piecewise envelopes for the case encoded in ep.

    Join points of the lower envelopes are located by join_point; the
    continuity of every profile is verified to 1e-10.
    """
    r = decay_rates(p, s)
    a = p.a
    if ep.q1 is not None:  # supercritical
        u_up = _capped_exp(1.0, r.lambda1)
        v_up = _capped_exp(a, r.lambda2)
        u_lo, xi1 = _bump_profile(1.0, r.lambda1, ep.mu1, ep.q1, ep.delta1)
        v_lo, xi2 = _bump_profile(a, r.lambda2, ep.mu2, ep.q2, ep.delta2)
        ep = replace(ep, xi1=xi1, xi2=xi2)
        case = SUPERCRITICAL
    elif ep.qhat2 is not None:  # critical, a*d = 1
        lh1, lh2 = s / 2.0, s / (2.0 * p.d)
        u_up = _capped_linexp(ep.h1, lh1, 1.0)
        v_up = _capped_linexp(ep.h2, lh2, a)
        u_lo, xih1 = _gbump_profile(ep.h1, ep.qhat1, lh1, ep.deltahat1)
        v_lo, xih2 = _gbump_profile(ep.h2, ep.qhat2, lh2, ep.deltahat2)
        ep = replace(ep, xihat1=xih1, xihat2=xih2)
        case = CRITICAL_AD_EQ1
    else:  # critical, a*d < 1
        lh1 = s / 2.0
        u_up = _capped_linexp(ep.h1, lh1, 1.0)
        v_up = _capped_exp(a, r.lambda2)
        u_lo, xih1 = _gbump_profile(ep.h1, ep.qhat1, lh1, ep.deltahat1)
        v_lo, xi2 = _bump_profile(a, r.lambda2, ep.muhat2, ep.Qhat2, ep.deltahat2)
        ep = replace(ep, xihat1=xih1, xihat2=xi2)
        case = CRITICAL_AD_LT1

    for prof in (u_up, u_lo, v_up, v_lo):
        if max(prof.continuity_defects()) > 1e-10:
            raise ValueError("no continuity point in bracket")
    return EnvelopeSet(u_upper=u_up, u_lower=u_lo, v_upper=v_up, v_lower=v_lo,
                       params=ep, speed=s, case=case, system=p)


def envelope_rates(env: EnvelopeSet):
    """Decay rates backing an envelope set (recomputed from its system)."""
    return decay_rates(env.system, env.speed)


def min_decay_rate(env: EnvelopeSet) -> float:
    r = envelope_rates(env)
    return min(r.lambda1, r.lambda2)


def write_envelope_csv(env: EnvelopeSet, grid: np.ndarray,
                       csv_path: str, json_path: Optional[str] = None) -> None:
    """Dump (xi, u_upper, u_lower, v_upper, v_lower) plus a JSON sidecar."""
    cols = np.column_stack([
        grid,
        env.u_upper(grid), env.u_lower(grid),
        env.v_upper(grid), env.v_lower(grid),
    ])
    np.savetxt(csv_path, cols, delimiter=",", fmt="%.17g",
               header="xi,u_upper,u_lower,v_upper,v_lower", comments="")
    if json_path is not None:
        payload = {
            "case": env.case,
            "speed": env.speed,
            "system": {"a": env.system.a, "b": env.system.b,
                       "c": env.system.c, "d": env.system.d},
            "params": {k: v for k, v in vars(env.params).items()
                       if k != "margins" and v is not None},
            "margins": env.params.margins,
        }
        with open(json_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
