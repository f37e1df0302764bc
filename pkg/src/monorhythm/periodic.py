"""Periodic-response kernels, the Farkas fixed-point operator, and two solvers.

A stable scalar mode x' = -lam x + F(t) with T-periodic forcing has exactly
one T-periodic response, obtained by integrating F against a two-branch
exponential kernel. Stacking those responses over all modes gives an operator
on periodic coefficient trajectories whose fixed points are periodic
solutions of the truncated system. Picard iteration attacks that operator
directly; Newton shooting attacks the period map of the ODE flow. Both
return the same orbits, which is the point: they fail independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .galerkin import GalerkinState, GalerkinSystem, integrate_cauchy
from .spectral import norms, project_nonlinearity

__all__ = [
    "NonConvergenceError",
    "PeriodicGrid",
    "PeriodicOrbit",
    "BallCertificate",
    "green_kernel_u",
    "green_kernel_w",
    "kernel_weights",
    "farkas_apply",
    "picard_solve",
    "shooting_solve",
    "certify_ball",
    "orbit_gap",
    "ct_norm",
]


class NonConvergenceError(RuntimeError):
    """An iterative solver failed; carries whatever history it accumulated."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform sampling of one period: nodes k T / n_t for k = 0..n_t - 1."""

    n_t: int
    period: float

    def __post_init__(self) -> None:
        if self.n_t < 64:
            raise ValueError(f"n_t must be at least 64, got {self.n_t}")
        if self.period <= 0.0:
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_t) * (self.period / self.n_t)

    @property
    def h(self) -> float:
        return self.period / self.n_t


@dataclass(frozen=True)
class PeriodicOrbit:
    """A candidate periodic trajectory with its quality measurements attached.

    ``periodicity_residual`` always comes from a fresh integration over one
    period, never from the solver's own bookkeeping.
    """

    grid: PeriodicGrid
    u: np.ndarray
    w: np.ndarray
    periodicity_residual: float
    ct_norm: float
    method: str
    n_iter: int
    converged: bool
    operator_residual: float | None = None

    def state(self, k: int) -> GalerkinState:
        return GalerkinState(u=self.u[k], w=self.w[k], t=float(self.grid.times[k]))


@dataclass(frozen=True)
class BallCertificate:
    radius: float
    member: bool
    worst_t: float
    margin: float


def _positive_rate(lam: float, what: str) -> float:
    if lam <= 0.0:
        raise ValueError(f"{what} must be positive, got {lam} (periodic response undefined)")
    return float(lam)


def green_kernel_u(lam, T, t, tau):
    """Two-branch periodic-response kernel for decay rate ``lam``.

    Equals e^(-lam (t - tau)) / (1 - e^(-lam T)) when tau <= t, and picks up
    an extra period of decay otherwise. The jump across tau = t is exactly 1.
    """
    lam = _positive_rate(lam, "decay rate")
    c = -1.0 / np.expm1(-lam * T)
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    ahead = tau <= t
    value = np.where(ahead, np.exp(-lam * (t - tau)), np.exp(-lam * (t + T - tau)))
    return c * value


def green_kernel_w(b, c3, xi, epsilon, T, t, tau):
    """Recovery-block kernel: same structure with decay rate b c3 xi epsilon."""
    rate = _positive_rate(b * c3 * xi * epsilon, "recovery decay rate b*c3*xi*epsilon")
    return green_kernel_u(rate, T, t, tau)


def _m1_factor(x: float) -> float:
    """(1 - (1 + x) e^-x), by series below x = 1e-3 to dodge cancellation."""
    if x > 1e-3:
        return 1.0 - (1.0 + x) * np.exp(-x)
    return x * x / 2.0 - x**3 / 3.0 + x**4 / 8.0 - x**5 / 30.0 + x**6 / 144.0


def kernel_weights(lam: float, T: float, n_t: int) -> np.ndarray:
    """Circulant quadrature weights of the periodic-response integral.

    Writing the response as a lagged sum over grid nodes, the forcing is
    interpolated linearly on each step while the exponential factor is
    integrated in closed form (branch-split at the kernel jump, so the corner
    never degrades accuracy). The result: applying the weights to samples F_j
    gives the node values of the periodic response of x' = -lam x + F.

    The weights sum to 1 / lam exactly up to roundoff, because a constant
    forcing is reproduced without interpolation error.
    """
    lam = _positive_rate(lam, "decay rate")
    h = T / n_t
    x = lam * h
    r = float(np.exp(-x))
    m0 = -float(np.expm1(-x)) / lam
    m1 = _m1_factor(x) / (lam * lam * h)
    c = -1.0 / float(np.expm1(-lam * T))

    lag = np.arange(n_t)
    with np.errstate(under="ignore"):
        decay = r**lag
    weights = c * decay * (m0 - m1)
    carry = c * decay * m1
    weights[1:] += carry[:-1]
    weights[0] += carry[-1]
    return weights


def _circ_apply(weights: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Circular convolution along axis 0 via the real FFT."""
    n = len(weights)
    return np.fft.irfft(
        np.fft.rfft(weights)[:, None] * np.fft.rfft(samples, axis=0), n=n, axis=0
    )


def _u_block(sys, grid, u, w, literal_plus_f):
    proj = project_nonlinearity(sys.basis, u, w, sys.d, sys.resc)
    s_vals = sys.stim(grid.times)
    sign = 1.0 if literal_plus_f else -1.0
    forcing = sign * proj + s_vals[:, None] * sys.trace_vector
    f_hat = np.fft.rfft(forcing, axis=0)
    w_hat = np.stack(
        [np.fft.rfft(kernel_weights(lam, grid.period, grid.n_t)) for lam in sys.basis.lambdas],
        axis=1,
    )
    return np.fft.irfft(w_hat * f_hat, n=grid.n_t, axis=0)


def _w_block(sys, grid, u, literal_omit_rate):
    d, resc = sys.d, sys.resc
    rate = d.b * d.c3 * resc.xi * resc.epsilon
    wts = kernel_weights(rate, grid.period, grid.n_t)
    gain = 1.0 if literal_omit_rate else resc.epsilon * d.b
    return _circ_apply(wts, gain * u)


def farkas_apply(
    sys: GalerkinSystem,
    grid: PeriodicGrid,
    u: np.ndarray,
    w: np.ndarray,
    literal_plus_f: bool = False,
    literal_omit_recovery_gain: bool = False,
):
    """One application of the periodic fixed-point operator to grid samples.

    The potential block integrates the forcing (projected reaction with a
    minus sign, plus the boundary drive) against each mode's kernel; the
    recovery block integrates epsilon b times the INPUT potential against the
    recovery kernel. Fixed points of this map solve the truncated system
    periodically.

    The two literal flags flip the reaction sign and drop the epsilon b gain.
    Either one breaks the fixed-point / ODE correspondence; they exist only
    so the alternative conventions can be compared side by side.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != (grid.n_t, sys.n_modes) or w.shape != (grid.n_t, sys.n_modes):
        raise ValueError(
            f"expected trajectories of shape ({grid.n_t}, {sys.n_modes}), got {u.shape}/{w.shape}"
        )
    u_new = _u_block(sys, grid, u, w, literal_plus_f)
    w_new = _w_block(sys, grid, u, literal_omit_recovery_gain)
    return u_new, w_new


def ct_norm(sys: GalerkinSystem, u: np.ndarray, w: np.ndarray) -> float:
    """Sup over grid nodes of sqrt(V-norm(u)^2 + H-norm(w)^2)."""
    _, v_u, h_w = norms(sys.basis, u, w)
    return float(np.max(np.sqrt(v_u**2 + h_w**2)))


def _periodicity_residual(sys, u0, w0, dt):
    state0 = GalerkinState(u=u0, w=w0, t=0.0)
    traj = integrate_cauchy(sys, state0, sys.period, dt)
    x0 = np.concatenate([u0, w0])
    x1 = np.concatenate([traj.u[-1], traj.w[-1]])
    return float(np.linalg.norm(x1 - x0) / max(1.0, np.linalg.norm(x0)))


def picard_solve(
    sys: GalerkinSystem,
    grid: PeriodicGrid,
    u0: np.ndarray | None = None,
    w0: np.ndarray | None = None,
    theta: float = 1.0,
    tol: float = 1e-10,
    max_iter: int = 200,
    residual_dt: float | None = None,
) -> PeriodicOrbit:
    """Damped Picard iteration on the periodic fixed-point operator.

    Each sweep updates the potential block first and feeds the fresh
    potential into the recovery block, so in the reaction-free case a single
    sweep lands on the fixed point from anywhere. ``n_iter`` counts sweeps
    that moved the iterate by at least ``tol``; starting at the fixed point
    therefore reports zero.

    If the update norm doubles over a ten-sweep window the damping is halved;
    below 1/16 the iteration is abandoned with the update history attached.
    A run that merely exhausts ``max_iter`` comes back flagged, not raised.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {theta}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = sys.n_modes
    u = np.zeros((grid.n_t, n)) if u0 is None else np.array(u0, dtype=float)
    w = np.zeros((grid.n_t, n)) if w0 is None else np.array(w0, dtype=float)
    if u.shape != (grid.n_t, n) or w.shape != (grid.n_t, n):
        raise ValueError(f"starting guess must have shape ({grid.n_t}, {n})")

    updates: list[float] = []
    effective = 0
    converged = False
    for _ in range(max_iter):
        u_next = (1.0 - theta) * u + theta * _u_block(sys, grid, u, w, False)
        w_next = (1.0 - theta) * w + theta * _w_block(sys, grid, u_next, False)
        step = ct_norm(sys, u_next - u, w_next - w)
        u, w = u_next, w_next
        updates.append(step)
        if not np.isfinite(step):
            raise NonConvergenceError(
                f"picard iterate left finite range after {len(updates)} sweeps",
                history=updates,
            )
        if step < tol:
            converged = True
            break
        effective += 1
        if len(updates) > 10 and updates[-1] > 2.0 * updates[-11]:
            theta *= 0.5
            if theta < 1.0 / 16.0:
                raise NonConvergenceError(
                    f"picard iteration diverged (last update {step:.3e})", history=updates
                )

    ku, kw = farkas_apply(sys, grid, u, w)
    op_res = ct_norm(sys, ku - u, kw - w)
    dt = sys.period / 1024 if residual_dt is None else residual_dt
    per_res = _periodicity_residual(sys, u[0], w[0], dt)

    return PeriodicOrbit(
        grid=grid,
        u=u,
        w=w,
        periodicity_residual=per_res,
        ct_norm=ct_norm(sys, u, w),
        method="picard",
        n_iter=effective,
        converged=converged,
        operator_residual=op_res,
    )


def shooting_solve(
    sys: GalerkinSystem,
    state0: GalerkinState | None = None,
    dt: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 25,
) -> PeriodicOrbit:
    """Newton iteration on the period map: find x with flow_T(x) = x.

    The Jacobian of the defect is built column by column from forward
    differences with step 1e-6 * max(1, |x_j|); at dimension 2m+2 that stays
    cheap. Convergence means the defect norm drops below tol * max(1, |x|).
    The orbit is reconstructed by one final integration, sampled at the
    integrator's own nodes over [0, T).
    """
    T = sys.period
    if dt is None:
        dt = T / 1024
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * T:
        raise ValueError("dt must divide the period so orbit nodes land on the grid")
    n = sys.n_modes
    x = (
        np.zeros(2 * n)
        if state0 is None
        else np.concatenate([np.asarray(state0.u, float), np.asarray(state0.w, float)])
    )

    def defect(vec):
        traj = integrate_cauchy(
            sys, GalerkinState(u=vec[:n], w=vec[n:], t=0.0), T, dt
        )
        return np.concatenate([traj.u[-1], traj.w[-1]]) - vec

    history = []
    n_iter = 0
    g = defect(x)
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(g))
        history.append(gnorm)
        if gnorm <= tol * max(1.0, float(np.linalg.norm(x))):
            break
        jac = np.empty((2 * n, 2 * n))
        for j in range(2 * n):
            step = 1e-6 * max(1.0, abs(x[j]))
            probe = x.copy()
            probe[j] += step
            jac[:, j] = (defect(probe) - g) / step
        try:
            delta = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError as exc:
            cond = float(np.linalg.cond(jac))
            raise NonConvergenceError(
                f"period-map jacobian is singular (condition estimate {cond:.3e})",
                history=history,
            ) from exc
        x = x + delta
        n_iter += 1
        g = defect(x)
    else:
        raise NonConvergenceError(
            f"shooting did not converge in {max_iter} steps (defect {history[-1]:.3e})",
            history=history,
        )

    traj = integrate_cauchy(sys, GalerkinState(u=x[:n], w=x[n:], t=0.0), T, dt)
    grid = PeriodicGrid(n_t=n_steps, period=T)
    u_orbit = traj.u[:-1]
    w_orbit = traj.w[:-1]
    per_res = float(
        np.linalg.norm(np.concatenate([traj.u[-1], traj.w[-1]]) - x)
        / max(1.0, float(np.linalg.norm(x)))
    )
    return PeriodicOrbit(
        grid=grid,
        u=u_orbit,
        w=w_orbit,
        periodicity_residual=per_res,
        ct_norm=ct_norm(sys, u_orbit, w_orbit),
        method="shooting",
        n_iter=n_iter,
        converged=True,
    )


def certify_ball(orbit: PeriodicOrbit, radius: float, basis) -> BallCertificate:
    """Check closed-ball membership of the orbit in the mixed sup norm."""
    _, v_u, h_w = norms(basis, orbit.u, orbit.w)
    pointwise = np.sqrt(v_u**2 + h_w**2)
    worst = int(np.argmax(pointwise))
    ct = float(pointwise[worst])
    return BallCertificate(
        radius=radius,
        member=bool(ct <= radius),
        worst_t=float(orbit.grid.times[worst]),
        margin=radius - ct,
    )


def orbit_gap(a: PeriodicOrbit, b: PeriodicOrbit, basis) -> float:
    """Sup-norm distance between two orbits at their shared grid nodes.

    The grids must nest (one node count a multiple of the other); the
    comparison happens on the coarser set.
    """
    if a.grid.period != b.grid.period:
        raise ValueError("orbits have different periods")
    na, nb = a.grid.n_t, b.grid.n_t
    if na % nb == 0:
        stride = na // nb
        ua, wa = a.u[::stride], a.w[::stride]
        ub, wb = b.u, b.w
    elif nb % na == 0:
        stride = nb // na
        ua, wa = a.u, a.w
        ub, wb = b.u[::stride], b.w[::stride]
    else:
        raise ValueError(f"grids with {na} and {nb} nodes do not nest")
    _, v_u, h_w = norms(basis, ua - ub, wa - wb)
    return float(np.max(np.sqrt(v_u**2 + h_w**2)))
