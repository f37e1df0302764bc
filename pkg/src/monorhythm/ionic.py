"""Rogers-McCulloch reaction terms and the parameter derivations behind them.

Everything downstream works in transformed variables: the potential is shifted
by the resting value, the recovery variable is scaled by ``xi``, and time is
scaled by ``epsilon``. Raw-unit quantities enter only through
:class:`PhysiologicalParameters`; :func:`derive_parameters` produces the
constants the solvers actually consume.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = [
    "PhysiologicalParameters",
    "RescalingParameters",
    "DerivedParameters",
    "derive_parameters",
    "f_ion_raw",
    "g_raw",
    "f_transformed",
    "f_hat",
    "g_hat",
    "rescale_period",
    "period_raw",
]


@dataclass(frozen=True)
class PhysiologicalParameters:
    """Membrane and ionic constants in their original units.

    ``c1`` and ``c2`` may be zero (that switches the reaction off, which the
    linear test problems rely on); the remaining rate constants must be
    strictly positive.
    """

    u_res: float
    u_peak: float
    a: float
    c1: float
    c2: float
    c3: float
    b: float
    C_m: float = 1.0
    chi: float = 1.0
    sigma_const: float = 1.0

    def __post_init__(self) -> None:
        if not self.u_peak > self.u_res:
            raise ValueError(
                f"u_peak must exceed u_res, got u_peak={self.u_peak} and u_res={self.u_res}"
            )
        if not 0.0 < self.a < 1.0:
            raise ValueError(f"threshold fraction a must lie in (0, 1), got {self.a}")
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ValueError("c1 and c2 must be nonnegative")
        for name in ("c3", "b", "C_m", "chi", "sigma_const"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def C(self) -> float:
        """Effective capacitance per volume, the product chi * C_m."""
        return self.chi * self.C_m


@dataclass(frozen=True)
class RescalingParameters:
    """Artificial scale factors: ``epsilon`` for time, ``xi`` for recovery."""

    epsilon: float = 0.032
    xi: float = 3.75

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0 or self.xi <= 0.0:
            raise ValueError("epsilon and xi must be positive")


@dataclass(frozen=True)
class DerivedParameters:
    """Constants computed once from the physiological set and reused everywhere.

    The growth-bound constants l1, l2, A1..A3, B1..B3 bound the reaction terms
    polynomially (exponent ``p_exponent``); the solvers never recompute them.
    The tail fields carry enough of the raw context that the reaction
    functions are callable from this object alone.
    """

    u_amp: float
    u_th: float
    u_tr: float
    u_pr: float
    a1: float
    a2: float
    c4: float
    l1: float
    l2: float
    A1: float
    A2: float
    A3: float
    B1: float
    B2: float
    B3: float
    p_exponent: int
    u_res: float
    u_peak: float
    C: float
    b: float
    c3: float
    sigma_const: float


def derive_parameters(
    phys: PhysiologicalParameters,
    resc: RescalingParameters,
    c4_override: float | None = None,
) -> DerivedParameters:
    """Compute the transformed-model constants.

    ``c4_override`` replaces the product a1 * u_tr * u_pr as the zeroth-order
    coefficient of the linear part. That keeps the periodic-response kernels
    well defined when c1 = 0 forces a1 = 0 (pure linear runs); it does not
    touch the reaction terms themselves.
    """
    u_amp = phys.u_peak - phys.u_res
    if u_amp == 0.0:
        raise ValueError("u_peak - u_res must be nonzero (a1, a2 divide by it)")
    a1 = phys.c1 / u_amp**2
    a2 = phys.c2 / u_amp
    u_th = phys.u_res + phys.a * u_amp
    u_tr = u_th - phys.u_res
    u_pr = phys.u_peak - phys.u_res
    c4 = a1 * u_tr * u_pr if c4_override is None else float(c4_override)

    scale = resc.epsilon / phys.C
    l1 = a1 * scale * ((u_tr + u_pr) / 3.0 + (2.0 / 3.0) * u_tr * u_pr)
    l2 = a1 * scale * (1.0 + (2.0 / 3.0) * (u_tr + u_pr) + u_tr * u_pr / 3.0)

    return DerivedParameters(
        u_amp=u_amp,
        u_th=u_th,
        u_tr=u_tr,
        u_pr=u_pr,
        a1=a1,
        a2=a2,
        c4=c4,
        l1=l1,
        l2=l2,
        A1=l1,
        A2=l2 + (2.0 / 3.0) * resc.xi * a2,
        A3=resc.xi * a2 / 3.0,
        B1=resc.epsilon * phys.b / 2.0,
        B2=resc.epsilon * phys.b / 2.0,
        B3=resc.xi * phys.c3,
        p_exponent=4,
        u_res=phys.u_res,
        u_peak=phys.u_peak,
        C=phys.C,
        b=phys.b,
        c3=phys.c3,
        sigma_const=phys.sigma_const,
    )


def f_ion_raw(u_hat, w_hat, d: DerivedParameters):
    """Ionic current in raw units: cubic in the potential plus recovery coupling."""
    du = u_hat - d.u_res
    return d.a1 * du * (u_hat - d.u_th) * (u_hat - d.u_peak) + d.a2 * du * w_hat


def g_raw(u_hat, w_hat, d: DerivedParameters):
    """Recovery dynamics in raw units: b * (u_hat - u_res - c3 * w_hat)."""
    return d.b * (u_hat - d.u_res - d.c3 * w_hat)


def f_transformed(u, w, d: DerivedParameters, resc: RescalingParameters):
    """Nonlinear reaction part in transformed variables.

    (epsilon / C) * (a1 u^3 + xi a2 u w - a1 (u_pr + u_tr) u^2). The linear
    remainder (epsilon c4 / C) u lives in the operator spectrum, not here.
    """
    s = resc.epsilon / d.C
    return s * (d.a1 * u**3 + resc.xi * d.a2 * u * w - d.a1 * (d.u_pr + d.u_tr) * u**2)


def f_hat(u, w, d: DerivedParameters, resc: RescalingParameters):
    """Full transformed ionic term: linear shift plus :func:`f_transformed`."""
    return (resc.epsilon * d.c4 / d.C) * u + f_transformed(u, w, d, resc)


def g_hat(u, w, d: DerivedParameters, resc: RescalingParameters):
    """Transformed recovery dynamics: epsilon * b * (u - xi * c3 * w)."""
    return resc.epsilon * d.b * (u - resc.xi * d.c3 * w)


def rescale_period(t_tilde: float, resc: RescalingParameters) -> float:
    """Map a raw-time period to the transformed clock (divide by epsilon)."""
    if t_tilde <= 0.0:
        raise ValueError(f"period must be positive, got {t_tilde}")
    return t_tilde / resc.epsilon


def period_raw(t_transformed: float, resc: RescalingParameters) -> float:
    """Inverse of :func:`rescale_period`."""
    if t_transformed <= 0.0:
        raise ValueError(f"period must be positive, got {t_transformed}")
    return t_transformed * resc.epsilon


def with_c4(d: DerivedParameters, c4: float) -> DerivedParameters:
    """Copy of ``d`` with the zeroth-order coefficient replaced."""
    return replace(d, c4=float(c4))
