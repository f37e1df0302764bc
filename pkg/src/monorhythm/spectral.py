"""Neumann cosine eigenbasis on an interval, with quadrature, norms, and stimuli.

The elliptic operator behind the model is v -> -(sigma_hat v')' + lam0 v on
(0, L) with insulated ends, where sigma_hat = (epsilon / C) sigma_const and
lam0 = epsilon c4 / C. Its eigenpairs are closed form: a constant mode plus
cosines, with eigenvalues lam0 + sigma_hat (i pi / L)^2. Projections of the
cubic reaction term are done by Gauss-Legendre quadrature sized so that
products of four basis functions integrate to machine accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Geometry1D",
    "SpectralBasis",
    "Stimulus",
    "build_basis",
    "trace_functional",
    "project_nonlinearity",
    "project_profile",
    "norms",
    "evaluate_field",
    "constant_stimulus",
    "sinusoid_stimulus",
    "pulse_stimulus",
]

_EXACTNESS_TARGET = 1e-14


@dataclass(frozen=True)
class Geometry1D:
    """The interval (0, L); the stimulated boundary is the right endpoint."""

    L: float

    def __post_init__(self) -> None:
        if self.L <= 0.0:
            raise ValueError(f"interval length must be positive, got {self.L}")

    @property
    def omega_measure(self) -> float:
        return self.L


def _gauss_tail_log(n: int, eta: float) -> float:
    """Log of the classical n-point Gauss-Legendre error factor for a mode of
    scaled frequency eta on (-1, 1):

        (2n+1)! / ((2n+1) ((2n)!)^3) * ... collapses to
        eta^(2n) * 2^(2n+1) * (n!)^4 / ((2n+1) ((2n)!)^3)

    evaluated in log space to dodge overflow.
    """
    return (
        2.0 * n * math.log(eta)
        + (2.0 * n + 1.0) * math.log(2.0)
        + 4.0 * math.lgamma(n + 1.0)
        - math.log(2.0 * n + 1.0)
        - 3.0 * math.lgamma(2.0 * n + 1.0)
    )


def nodes_for_band(q: int) -> int:
    """Smallest Gauss-Legendre node count that integrates cos(q pi x / L) over
    (0, L) to below 1e-14 of scale, by the classical error bound."""
    if q <= 0:
        return 4
    eta = q * math.pi / 2.0
    n = 4
    target = math.log(_EXACTNESS_TARGET)
    while _gauss_tail_log(n, eta) > target:
        n += 1
    return n


@dataclass(frozen=True)
class SpectralBasis:
    """Truncated eigenbasis: modes 0..m with quadrature baked in.

    ``psi_quad[q, i]`` holds mode i evaluated at quadrature node q, so
    coefficient-to-nodal maps are single matrix products.
    """

    m: int
    L: float
    lambdas: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    psi_quad: np.ndarray
    trace_values: np.ndarray
    lam0: float
    sigma_hat: float
    n_quad: int

    @property
    def n_modes(self) -> int:
        return self.m + 1


def build_basis(geom, m, d, resc, n_quad: int | None = None) -> SpectralBasis:
    """Assemble the cosine eigenbasis for the operator with coefficients from ``d``.

    ``n_quad`` defaults to whichever is larger: 4(m+1), or the node count the
    Gauss-Legendre error bound demands for the highest-frequency quartic
    product (frequency 4m). Passing fewer than 4(m+1) nodes is rejected;
    those rules keep the projected reaction term alias-free.
    """
    if m < 0:
        raise ValueError(f"truncation index m must be >= 0, got {m}")
    floor = 4 * (m + 1)
    if n_quad is None:
        n_quad = max(floor, nodes_for_band(4 * m))
    elif n_quad < floor:
        raise ValueError(
            f"n_quad={n_quad} cannot integrate quartic products of mode {m}; need >= {floor}"
        )

    lam0 = resc.epsilon * d.c4 / d.C
    sigma_hat = (resc.epsilon / d.C) * d.sigma_const
    L = geom.L

    i = np.arange(m + 1)
    lambdas = lam0 + sigma_hat * (i * np.pi / L) ** 2

    xg, wg = np.polynomial.legendre.leggauss(n_quad)
    nodes = 0.5 * L * (xg + 1.0)
    weights = 0.5 * L * wg

    psi = np.sqrt(2.0 / L) * np.cos(np.outer(nodes, i * np.pi / L))
    psi[:, 0] = 1.0 / np.sqrt(L)
    trace = np.sqrt(2.0 / L) * (-1.0) ** i.astype(float)
    trace[0] = 1.0 / np.sqrt(L)

    return SpectralBasis(
        m=m,
        L=L,
        lambdas=lambdas,
        quad_nodes=nodes,
        quad_weights=weights,
        psi_quad=psi,
        trace_values=trace,
        lam0=lam0,
        sigma_hat=sigma_hat,
        n_quad=n_quad,
    )


def trace_functional(basis: SpectralBasis, stim: "Stimulus") -> np.ndarray:
    """Boundary pairing of each mode with the stimulus density: phi * psi_i(L)."""
    return stim.phi_value * basis.trace_values


def _check_coeffs(basis: SpectralBasis, coeffs: np.ndarray, name: str) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != basis.n_modes:
        raise ValueError(
            f"{name} has {coeffs.shape[-1]} modes, basis expects {basis.n_modes}"
        )
    return coeffs


def project_nonlinearity(basis, u_coeffs, w_coeffs, d, resc) -> np.ndarray:
    """Coefficients of the reaction term: integral of f(u_m, w_m) against each mode.

    Accepts stacked inputs; leading axes broadcast, the last axis indexes modes.
    """
    from .ionic import f_transformed

    u_coeffs = _check_coeffs(basis, u_coeffs, "u_coeffs")
    w_coeffs = _check_coeffs(basis, w_coeffs, "w_coeffs")
    u_nodal = u_coeffs @ basis.psi_quad.T
    w_nodal = w_coeffs @ basis.psi_quad.T
    f_nodal = f_transformed(u_nodal, w_nodal, d, resc)
    return (f_nodal * basis.quad_weights) @ basis.psi_quad


def project_profile(basis: SpectralBasis, profile) -> np.ndarray:
    """Project a function of x (callable on arrays) onto the basis by quadrature."""
    values = np.asarray(profile(basis.quad_nodes), dtype=float)
    return (values * basis.quad_weights) @ basis.psi_quad


def norms(basis, u_coeffs, w_coeffs):
    """Return (H-norm of u, V-norm of u, H-norm of w).

    H is plain L2 on the interval, so coefficient vectors give Euclidean norms;
    the V-norm weights each mode by its eigenvalue. Stacked inputs reduce over
    the last axis.
    """
    u_coeffs = _check_coeffs(basis, u_coeffs, "u_coeffs")
    w_coeffs = _check_coeffs(basis, w_coeffs, "w_coeffs")
    h_u = np.sqrt(np.sum(u_coeffs**2, axis=-1))
    v_u = np.sqrt(np.sum(basis.lambdas * u_coeffs**2, axis=-1))
    h_w = np.sqrt(np.sum(w_coeffs**2, axis=-1))
    return h_u, v_u, h_w


def evaluate_field(basis: SpectralBasis, coeffs, x_grid) -> np.ndarray:
    """Reconstruct the field sum(coeffs_i * psi_i) at points of the interval."""
    coeffs = _check_coeffs(basis, coeffs, "coeffs")
    x = np.asarray(x_grid, dtype=float)
    if np.any(x < 0.0) or np.any(x > basis.L):
        raise ValueError("evaluation points must lie in [0, L]")
    i = np.arange(basis.n_modes)
    psi = np.sqrt(2.0 / basis.L) * np.cos(np.outer(x, i * np.pi / basis.L))
    psi[:, 0] = 1.0 / np.sqrt(basis.L)
    out = coeffs @ psi.T
    return out


# ----------------------------------------------------------------- stimuli


@dataclass(frozen=True)
class Stimulus:
    """Periodic boundary drive s(t) applied with density phi at x = L.

    ``s_sup`` is the sup of |s| over one period, computed at construction from
    a dense sample plus the analytic extremum candidates of the waveform, so
    it genuinely dominates every later evaluation.
    """

    kind: str
    period: float
    phi_value: float
    amplitude: float
    offset: float = 0.0
    center: float = 0.5
    width: float = 0.05
    s_sup: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.period <= 0.0:
            raise ValueError(f"stimulus period must be positive, got {self.period}")
        if self.kind not in ("constant", "sinusoid", "pulse"):
            raise ValueError(f"unknown stimulus kind {self.kind!r}")
        if self.kind == "pulse" and not 0.0 < self.width <= 0.25:
            raise ValueError("pulse width fraction must lie in (0, 0.25]")

    def __call__(self, t):
        tau = np.mod(np.asarray(t, dtype=float), self.period)
        if self.kind == "constant":
            return np.full_like(tau, self.amplitude)
        if self.kind == "sinusoid":
            return self.offset + self.amplitude * np.sin(2.0 * np.pi * tau / self.period)
        # periodized Gaussian bump; four periodic images each side flush the
        # tails below double precision for width <= 0.25
        acc = np.zeros_like(tau)
        c = self.center * self.period
        w = self.width * self.period
        for k in range(-4, 5):
            acc = acc + np.exp(-0.5 * ((tau - c + k * self.period) / w) ** 2)
        return self.offset + self.amplitude * acc


def _sup_from_samples(stim: Stimulus, candidates) -> float:
    dense = np.linspace(0.0, stim.period, 2048, endpoint=False)
    values = np.abs(stim(dense))
    cand = np.abs(stim(np.asarray(candidates, dtype=float))) if len(candidates) else []
    return float(max(values.max(), *cand)) if len(candidates) else float(values.max())


def constant_stimulus(value: float, period: float, phi_value: float) -> Stimulus:
    stim = Stimulus(kind="constant", period=period, phi_value=phi_value, amplitude=value)
    object.__setattr__(stim, "s_sup", abs(value))
    return stim


def sinusoid_stimulus(period, amplitude, phi_value, offset=0.0) -> Stimulus:
    stim = Stimulus(
        kind="sinusoid", period=period, phi_value=phi_value, amplitude=amplitude, offset=offset
    )
    # the sine hits both signed extremes, so the sup is exact
    object.__setattr__(stim, "s_sup", abs(offset) + abs(amplitude))
    return stim


def pulse_stimulus(period, amplitude, phi_value, center=0.5, width=0.05, offset=0.0) -> Stimulus:
    stim = Stimulus(
        kind="pulse",
        period=period,
        phi_value=phi_value,
        amplitude=amplitude,
        offset=offset,
        center=center,
        width=width,
    )
    peak = [center * period, (center + 0.5) * period % period]
    object.__setattr__(stim, "s_sup", _sup_from_samples(stim, peak))
    return stim
