"""Existence-window arithmetic for periodically driven configurations.

Whether the fixed-point operator traps a ball of candidate trajectories
reduces to a comparison of two scalar curves: a load curve h that grows
with the drive period, and a gain curve p that is unimodal in the ball
radius. A configuration admits a verified periodic response whenever the
resting load h(0) sits strictly below the gain peak p(R*); the radii at
which the curves cross bracket the certifiable ball sizes, and for each
radius in that bracket there is a largest admissible period T*.

The curve coefficients are four aggregate constants (kappa, beta, gamma,
delta). They can be supplied directly, as published summaries usually do,
or derived from raw growth and embedding constants. A companion bound
expresses the same window condition as a ceiling on the quadratic
reaction coefficient a2 as a function of the cubic coefficient a1, which
is what the parameter-region sweep rasterizes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ionic import DerivedParameters, RescalingParameters

SQRT2 = math.sqrt(2.0)

_BISECT_REL_TOL = 1e-12
_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class AggregateConstants:
    """Coefficients of the gain curve p(R) = kappa R / (beta R^3 + gamma R^1.5 + delta).

    The provenance flag records whether the values were given directly or
    assembled from raw constants by aggregate_from_raw.
    """

    kappa: float
    beta: float
    gamma: float
    delta: float
    provenance: str = "direct"

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.provenance not in ("direct", "derived"):
            raise ValueError(f"provenance must be 'direct' or 'derived', got {self.provenance!r}")


@dataclass(frozen=True)
class EmbeddingConstants:
    """Raw functional-analytic constants that feed the aggregates.

    k1 bounds the dual-space embedding picking up the nonlinearity, k2 the
    embedding of the energy space into the quartic-integrability space.
    projection_excess is the amount by which the modal projection norm
    exceeds one. trace_norm, s_sup and phi_norm describe the boundary
    drive: the trace-functional norm, the sup of the periodic signal and
    the boundary profile norm. domain_measure is the volume of the domain.
    """

    k1: float
    k2: float
    projection_excess: float
    trace_norm: float
    domain_measure: float
    s_sup: float
    phi_norm: float

    def __post_init__(self):
        for name in ("k1", "k2", "trace_norm", "domain_measure"):
            value = getattr(self, name)
            if value <= 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.projection_excess < 0.0:
            raise ValueError(f"projection_excess must be nonnegative, got {self.projection_excess}")
        if self.s_sup < 0.0:
            raise ValueError(f"s_sup must be nonnegative, got {self.s_sup}")
        if self.phi_norm < 0.0:
            raise ValueError(f"phi_norm must be nonnegative, got {self.phi_norm}")


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of a scalar feasibility check with its signed margin."""

    name: str
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class RegionConstants:
    """Everything the admissible-a2 ceiling needs besides a1 itself."""

    kappa: float
    epsilon: float
    C: float
    u_tr: float
    u_pr: float
    xi: float
    c3: float
    k1: float
    domain_measure: float
    s_sup: float
    trace_norm: float
    phi_norm: float

    def __post_init__(self):
        for name in (
            "kappa",
            "epsilon",
            "C",
            "u_tr",
            "u_pr",
            "xi",
            "c3",
            "k1",
            "domain_measure",
        ):
            value = getattr(self, name)
            if value <= 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.b_const <= 0.0:
            raise ValueError(
                "the boundary-drive product s_sup * trace_norm * phi_norm must be positive"
            )

    @property
    def a_const(self) -> float:
        """Geometry-weighted cubic growth factor multiplying a1 in delta."""
        return self.domain_measure**0.75 * (
            (self.u_tr + self.u_pr) / 3.0 + (2.0 / 3.0) * self.u_tr * self.u_pr
        )

    @property
    def b_const(self) -> float:
        """Drive contribution to delta, independent of the reaction coefficients."""
        return self.s_sup * self.trace_norm * self.phi_norm

    @classmethod
    def from_model(
        cls,
        d: DerivedParameters,
        resc: RescalingParameters,
        emb: EmbeddingConstants,
    ) -> "RegionConstants":
        return cls(
            kappa=SQRT2 / (2.0 * (1.0 + emb.projection_excess)),
            epsilon=resc.epsilon,
            C=d.C,
            u_tr=d.u_tr,
            u_pr=d.u_pr,
            xi=resc.xi,
            c3=d.c3,
            k1=emb.k1,
            domain_measure=emb.domain_measure,
            s_sup=emb.s_sup,
            trace_norm=emb.trace_norm,
            phi_norm=emb.phi_norm,
        )


@dataclass(frozen=True)
class FeasibilityReport:
    """Collected window diagnostics for one configuration.

    r_lower, r_upper and the period ceiling entries are populated only
    when the window condition holds; the coupling entry only when the
    recovery coupling constants were supplied. Curves are (n, 2) arrays
    with the abscissa in the first column.
    """

    aggregates: AggregateConstants
    r_star: float
    p_at_r_star: float
    h_at_zero: float
    window: ConditionResult
    reduced_window: ConditionResult
    coupling: Optional[ConditionResult] = None
    r_lower: Optional[float] = None
    r_upper: Optional[float] = None
    t_star_at_r_star: Optional[float] = None
    t_star_fn: Optional[Callable[[float], float]] = None
    h_curve: Optional[np.ndarray] = None
    p_curve: Optional[np.ndarray] = None


def h_of_T(t, c4: float, epsilon: float, C: float):
    """Load curve t / (1 - exp(-rate t)) with rate = epsilon c4 / C.

    Continuously extended to h(0) = C / (epsilon c4); evaluated through
    expm1 so small periods do not lose precision. Accepts scalars or
    arrays of nonnegative periods.
    """
    rate = epsilon * c4 / C
    if not rate > 0.0:
        raise ValueError(f"decay rate epsilon*c4/C must be positive, got {rate}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise ValueError("periods must be nonnegative")
    positive = t_arr > 0.0
    denom = np.where(positive, -np.expm1(-rate * t_arr), 1.0)
    out = np.where(positive, t_arr / denom, 1.0 / rate)
    if t_arr.ndim == 0:
        return float(out)
    return out


def p_of_R(r, agg: AggregateConstants):
    """Gain curve kappa R / (beta R^3 + gamma R^1.5 + delta) for R >= 0."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0):
        raise ValueError("radii must be nonnegative")
    denom = agg.beta * r_arr**3 + agg.gamma * r_arr**1.5 + agg.delta
    out = agg.kappa * (r_arr / denom)
    if r_arr.ndim == 0:
        return float(out)
    return out


def r_star(agg: AggregateConstants) -> float:
    """Radius at which the gain curve peaks.

    Written as a rationalized closed form so the beta -> 0 limit needs no
    branch: with x = 4 delta / (gamma + sqrt(gamma^2 + 32 beta delta)) the
    peak sits at x^(2/3), and at beta = 0 this reduces to (2 delta /
    gamma)^(2/3), the maximizer without the cubic term. Independent of
    kappa, which only scales the curve.
    """
    x = 4.0 * agg.delta / (agg.gamma + math.sqrt(agg.gamma**2 + 32.0 * agg.beta * agg.delta))
    return x ** (2.0 / 3.0)


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Bisection root of f on [lo, hi], to relative width 1e-12."""
    f_lo = f(lo)
    if f_lo == 0.0:
        return lo
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= _BISECT_REL_TOL * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def r_bounds(agg: AggregateConstants, h0: float) -> tuple:
    """Radii where the gain curve crosses the level h0, bracketing the peak.

    Requires h0 <= p(r_star); the tangent case h0 == p(r_star) collapses
    both radii onto the peak. Roots are found by bisection on each side
    of the peak, using the curve's one-sided monotonicity.
    """
    if h0 <= 0.0:
        raise ValueError(f"the load level must be positive, got {h0}")
    rs = r_star(agg)
    peak = p_of_R(rs, agg)
    if h0 > peak:
        raise ValueError(
            f"load level {h0} exceeds the gain peak {peak}; the curves never meet"
        )
    if h0 == peak:
        return rs, rs

    lo = rs
    for _ in range(_BISECT_MAX_ITER):
        lo *= 0.5
        if p_of_R(lo, agg) < h0:
            break
    else:
        raise ValueError("could not bracket the lower crossing radius")
    r_lower = _bisect(lambda r: p_of_R(r, agg) - h0, lo, rs)

    hi = rs
    for _ in range(_BISECT_MAX_ITER):
        hi *= 2.0
        if p_of_R(hi, agg) < h0:
            break
    else:
        raise ValueError("could not bracket the upper crossing radius")
    r_upper = _bisect(lambda r: p_of_R(r, agg) - h0, rs, hi)
    return r_lower, r_upper


def t_star(r: float, agg: AggregateConstants, c4: float, epsilon: float, C: float) -> float:
    """Largest period for which the ball of radius r stays certifiable.

    Solves h(T) = p(r) using the load curve's monotone growth. The radius
    must lie between the crossing radii of level h(0); at either end the
    admissible period degenerates to zero.
    """
    h0 = h_of_T(0.0, c4, epsilon, C)
    lower, upper = r_bounds(agg, h0)
    if not lower <= r <= upper:
        raise ValueError(
            f"radius {r} is outside the certifiable bracket [{lower}, {upper}]"
        )
    target = p_of_R(r, agg)
    if target <= h0:
        return 0.0
    hi = 1.0
    for _ in range(_BISECT_MAX_ITER):
        if h_of_T(hi, c4, epsilon, C) > target:
            break
        hi *= 2.0
    else:
        raise ValueError("could not bracket the period ceiling")
    return _bisect(lambda t: h_of_T(t, c4, epsilon, C) - target, 0.0, hi)


def invariance_inequality(
    r: float,
    t: float,
    agg: AggregateConstants,
    c4: float,
    epsilon: float,
    C: float,
    literal_exponent: bool = False,
) -> ConditionResult:
    """Check h(t) <= p(r), the trapping condition at a given radius and period.

    The default load exponent is epsilon c4 / C, consistent with the
    zeroth spectral eigenvalue and with h_of_T. literal_exponent swaps in
    the bare rate c4 for comparison with the unscaled form.
    """
    if literal_exponent:
        h_val = h_of_T(t, c4, 1.0, 1.0)
    else:
        h_val = h_of_T(t, c4, epsilon, C)
    margin = p_of_R(r, agg) - h_val
    return ConditionResult("invariance_inequality", bool(margin >= 0.0), float(margin))


def recovery_coupling_condition(xi: float, c3: float) -> ConditionResult:
    """Check xi * c3 >= sqrt(2), needed for the recovery block to contract."""
    margin = xi * c3 - SQRT2
    return ConditionResult("recovery_coupling", bool(margin >= 0.0), float(margin))


def feasible_window_condition(
    agg: AggregateConstants, c4: float, epsilon: float, C: float
) -> ConditionResult:
    """Check h(0) < p(r_star), the strict condition opening a feasibility window."""
    h0 = h_of_T(0.0, c4, epsilon, C)
    margin = p_of_R(r_star(agg), agg) - h0
    return ConditionResult("feasible_window", bool(margin > 0.0), float(margin))


def feasible_window_condition_reduced(agg: AggregateConstants, h0: float) -> ConditionResult:
    """Closed-form window check in the beta = 0 limit.

    Without the cubic aggregate the gain peak is kappa cbrt(4) / (3
    gamma^(2/3) delta^(1/3)); the window opens when h0 sits strictly
    below it. For beta > 0 this is a necessary relaxation of the full
    condition, since the cubic term only lowers the gain.
    """
    if h0 <= 0.0:
        raise ValueError(f"the load level must be positive, got {h0}")
    peak = agg.kappa * np.cbrt(4.0) / (3.0 * agg.gamma ** (2.0 / 3.0) * np.cbrt(agg.delta))
    margin = peak - h0
    return ConditionResult("feasible_window_reduced", bool(margin > 0.0), float(margin))


def a2_bound(a1, const: RegionConstants, literal_prefactor: bool = False):
    """Largest quadratic coefficient the window admits at a given cubic one.

    Inverts the reduced window condition for a2 after substituting the
    aggregate definitions, so a2 below the returned ceiling is exactly
    equivalent to feasible_window_condition_reduced holding at (a1, a2).
    The default prefactor 2 / (sqrt(3) xi k1) is that exact inversion;
    literal_prefactor swaps in 2 sqrt(2) / (sqrt(3) c3 k1), the widely
    quoted variant, which is looser whenever the recovery coupling
    condition holds. Accepts scalar or array a1.
    """
    a1_arr = np.asarray(a1, dtype=float)
    if np.any(a1_arr < 0.0):
        raise ValueError("a1 values must be nonnegative")
    if literal_prefactor:
        pref = 2.0 * SQRT2 / (math.sqrt(3.0) * const.c3 * const.k1)
    else:
        pref = 2.0 / (math.sqrt(3.0) * const.xi * const.k1)
    scale = (const.kappa * const.epsilon * const.u_tr * const.u_pr / const.C) ** 1.5
    delta = const.epsilon * const.k1 * const.a_const / const.C * a1_arr + const.b_const
    out = pref * scale * a1_arr**1.5 / np.sqrt(delta)
    if a1_arr.ndim == 0:
        return float(out)
    return out


def emit_curves(
    agg: AggregateConstants,
    c4: float,
    epsilon: float,
    C: float,
    t_max: float,
    r_max: float,
    n_t: int = 256,
    n_r: int = 256,
) -> tuple:
    """Sample the load and gain curves on uniform grids including both endpoints.

    Returns (h_curve, p_curve), each an (n, 2) array with the abscissa in
    column 0 and the curve value in column 1, in ascending abscissa order.
    """
    if t_max <= 0.0 or r_max <= 0.0:
        raise ValueError("curve ranges must be positive")
    if n_t < 2 or n_r < 2:
        raise ValueError("curve grids need at least two points")
    t = np.linspace(0.0, t_max, n_t)
    r = np.linspace(0.0, r_max, n_r)
    h_curve = np.column_stack([t, h_of_T(t, c4, epsilon, C)])
    p_curve = np.column_stack([r, p_of_R(r, agg)])
    return h_curve, p_curve


def build_report(
    agg: AggregateConstants,
    c4: float,
    epsilon: float,
    C: float,
    xi: Optional[float] = None,
    c3: Optional[float] = None,
    t_max: Optional[float] = None,
    r_max: Optional[float] = None,
    n_samples: int = 256,
) -> FeasibilityReport:
    """Assemble the full window diagnostic for one set of constants.

    Crossing radii and period ceilings are computed only when the window
    condition holds. The recovery-coupling entry appears when both xi and
    c3 are given; curves when both range limits are given.
    """
    rs = r_star(agg)
    peak = p_of_R(rs, agg)
    h0 = h_of_T(0.0, c4, epsilon, C)
    window = feasible_window_condition(agg, c4, epsilon, C)
    reduced = feasible_window_condition_reduced(agg, h0)

    coupling = None
    if xi is not None and c3 is not None:
        coupling = recovery_coupling_condition(xi, c3)

    r_lower = r_upper = ceiling = ceiling_fn = None
    if window.satisfied:
        r_lower, r_upper = r_bounds(agg, h0)
        ceiling = t_star(rs, agg, c4, epsilon, C)
        ceiling_fn = functools.partial(t_star, agg=agg, c4=c4, epsilon=epsilon, C=C)

    h_curve = p_curve = None
    if t_max is not None and r_max is not None:
        h_curve, p_curve = emit_curves(
            agg, c4, epsilon, C, t_max, r_max, n_t=n_samples, n_r=n_samples
        )

    return FeasibilityReport(
        aggregates=agg,
        r_star=rs,
        p_at_r_star=peak,
        h_at_zero=h0,
        window=window,
        reduced_window=reduced,
        coupling=coupling,
        r_lower=r_lower,
        r_upper=r_upper,
        t_star_at_r_star=ceiling,
        t_star_fn=ceiling_fn,
        h_curve=h_curve,
        p_curve=p_curve,
    )


def aggregate_from_raw(d: DerivedParameters, emb: EmbeddingConstants) -> AggregateConstants:
    """Assemble the curve coefficients from growth and embedding constants.

    kappa comes from the modal projection norm, beta and gamma weight the
    quadratic and mixed growth constants by the embeddings, and delta
    collects the cubic growth over the domain plus the boundary drive.
    """
    kappa = SQRT2 / (2.0 * (1.0 + emb.projection_excess))
    beta = d.A2 * emb.k1 * emb.k2
    gamma = d.A3 * emb.k1
    delta = (
        d.A1 * emb.k1 * emb.domain_measure**0.75
        + emb.s_sup * emb.trace_norm * emb.phi_norm
    )
    return AggregateConstants(
        kappa=kappa, beta=beta, gamma=gamma, delta=delta, provenance="derived"
    )
