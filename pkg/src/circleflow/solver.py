"""Radius-vector solvers for prescribed curvature targets: adaptive
explicit integration of the combinatorial Ricci flow du/dt = k - K(u), and
damped Newton descent on the convex energy whose gradient is K(u) - k.

Both integrate in flow coordinates u, where the flows are autonomous and
the Euclidean conserved quantity sum(u) is linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .circlegeom import Geometry
from .conditions import CurvatureTarget
from .curvature import CurvatureEvaluator, r_to_u, u_to_r
from .errors import DomainViolation, InsufficientHistory, SingularHessian, ValidationError
from .mesh import TriangulatedSurface

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_ARMIJO = 1e-4


@dataclass
class FlowSpec:
    """Flow target and step-controller parameters.

    normalization="mean" is the normalized Euclidean flow toward the
    uniform curvature K_av = 2 pi chi / |V|; the target must then be the
    mean target.
    """

    geometry: Geometry
    target: CurvatureTarget
    normalization: str = "none"      # "none" | "mean"
    dt_init: float = 0.1
    dt_max: float = 1.0
    shrink: float = 0.5
    grow: float = 1.2
    grow_after: int = 5
    tol: float = 1e-10
    max_steps: int = 100_000
    stall_window: int = 10_000
    stall_improvement: float = 1e-3

    def __post_init__(self):
        if self.dt_init <= 0 or self.dt_max <= 0 or self.dt_init > self.dt_max:
            raise ValidationError("flow-spec", "need 0 < dt_init <= dt_max")
        if not (0 < self.shrink < 1 <= self.grow):
            raise ValidationError("flow-spec", "need 0 < shrink < 1 <= grow")
        if self.normalization not in ("none", "mean"):
            raise ValidationError("flow-spec", f"unknown normalization {self.normalization!r}")
        if self.normalization == "mean":
            if self.geometry is not Geometry.EUCLIDEAN:
                raise ValidationError("flow-spec", "mean normalization is Euclidean-only")
            k_av = self.target.k.mean()
            if not np.allclose(self.target.k, k_av, atol=1e-12):
                raise ValidationError("flow-spec", "mean normalization requires k == K_av")
        if self.target.geometry is not self.geometry:
            raise ValidationError("flow-spec", "target geometry differs from flow geometry")


@dataclass
class SolveReport:
    """Outcome of a flow or Newton run.

    Non-convergence is reported through status (max-steps-exceeded,
    stalled, line-search-failed, max-iterations) together with the full
    residual history, so callers can inspect the failure; invalid inputs
    raise instead.
    """

    converged: bool
    status: str
    method: str
    geometry: Geometry
    u: np.ndarray
    r: np.ndarray
    K: np.ndarray
    iterations: int
    times: np.ndarray
    residuals: np.ndarray
    conserved_drift: float | None = None
    rate: float | None = None
    message: str = ""


def flow_rhs(surface: TriangulatedSurface, theta, u, spec: FlowSpec) -> np.ndarray:
    """Right-hand side k - K(u) of the flow in u-coordinates."""
    ev = CurvatureEvaluator(surface, theta, spec.geometry)
    return spec.target.k - ev.K_from_u(np.asarray(u, dtype=float))


def integrate_flow(surface: TriangulatedSurface, theta, r0, spec: FlowSpec) -> SolveReport:
    """Integrate du/dt = k - K(u) with an adaptive explicit step: a step is
    accepted only if it keeps u in the domain and does not increase the
    sup-norm residual. Runs until the residual drops below spec.tol, the
    step budget is exhausted, or the residual stops improving over the
    stall window (the expected outcome for non-attainable targets)."""
    ev = CurvatureEvaluator(surface, theta, spec.geometry)
    k = spec.target.k
    u = r_to_u(np.asarray(r0, dtype=float), spec.geometry)
    sum_u0 = float(u.sum())

    K = ev.K_from_u(u)
    res = float(np.abs(K - k).max())
    times = [0.0]
    residuals = [res]
    t = 0.0
    dt = spec.dt_init
    accepted = 0
    accepts_since_grow = 0
    status = "max-steps-exceeded"
    message = ""
    attempts = 0
    max_attempts = 8 * spec.max_steps

    while accepted < spec.max_steps and attempts < max_attempts:
        if res <= spec.tol:
            status = "converged"
            break
        attempts += 1
        trial = u + dt * (k - K)
        if spec.geometry is Geometry.HYPERBOLIC and trial.max() >= 0.0:
            dt *= spec.shrink
            accepts_since_grow = 0
            if dt < 1e-15:
                status = "stalled"
                message = "step size collapsed at the domain boundary"
                break
            continue
        K_trial = ev.K_from_u(trial)
        res_trial = float(np.abs(K_trial - k).max())
        # tie band: residuals pinned at their infimum (non-attainable
        # targets) change by ulps only; treat those steps as non-increasing
        if not math.isfinite(res_trial) or res_trial > res * (1.0 + 1e-12):
            dt *= spec.shrink
            accepts_since_grow = 0
            if dt < 1e-15:
                status = "stalled"
                message = "step size collapsed without residual decrease"
                break
            continue
        u, K, res = trial, K_trial, res_trial
        t += dt
        accepted += 1
        times.append(t)
        residuals.append(res)
        accepts_since_grow += 1
        if accepts_since_grow >= spec.grow_after:
            dt = min(dt * spec.grow, spec.dt_max)
            accepts_since_grow = 0
        if accepted >= spec.stall_window and accepted % 256 == 0:
            window = residuals[-spec.stall_window - 1]
            if res > (1.0 - spec.stall_improvement) * window:
                status = "max-steps-exceeded"
                message = (
                    f"residual improved less than {spec.stall_improvement:.0e} relative "
                    f"over {spec.stall_window} steps; target likely not attainable"
                )
                break
    else:
        if res <= spec.tol:
            status = "converged"

    converged = res <= spec.tol
    if converged:
        status = "converged"
    drift = abs(float(u.sum()) - sum_u0) if spec.geometry is Geometry.EUCLIDEAN else None
    report = SolveReport(
        converged=converged,
        status=status,
        method="flow",
        geometry=spec.geometry,
        u=u,
        r=u_to_r(u, spec.geometry),
        K=K,
        iterations=accepted,
        times=np.array(times),
        residuals=np.array(residuals),
        conserved_drift=drift,
        message=message,
    )
    if converged:
        try:
            report.rate = fit_rate(report)
        except InsufficientHistory:
            report.rate = None
    return report


# ---------------------------------------------------------------------------
# energy along segments


def _segment_energy(ev: CurvatureEvaluator, k: np.ndarray, u0: np.ndarray, delta: np.ndarray) -> float:
    """Integral of <K(u0 + s delta) - k, delta> for s in [0, 1] by 8-point
    Gauss-Legendre; the energy difference along one straight segment."""
    total = 0.0
    for node, w in zip(_GL_NODES, _GL_WEIGHTS):
        s = 0.5 * (node + 1.0)
        Ku = ev.K_from_u(u0 + s * delta)
        total += w * float((Ku - k) @ delta)
    return 0.5 * total


def energy_difference(surface: TriangulatedSurface, theta, target: CurvatureTarget,
                      geometry: Geometry, waypoints) -> float:
    """Energy difference along a piecewise-linear path of u-vectors, one
    Gauss-Legendre segment per linear piece. Path-independent because the
    curvature Jacobian is symmetric."""
    ev = CurvatureEvaluator(surface, theta, geometry)
    pts = [np.asarray(p, dtype=float) for p in waypoints]
    if len(pts) < 2:
        raise ValueError("need at least two waypoints")
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += _segment_energy(ev, target.k, a, b - a)
    return total


# ---------------------------------------------------------------------------
# Newton descent


def _newton_step(J: sp.csr_matrix, F: np.ndarray, geometry: Geometry) -> np.ndarray:
    n = len(F)
    if geometry is Geometry.HYPERBOLIC:
        delta = spla.spsolve(J.tocsc(), -F)
    else:
        # bordered system keeps the step on the hyperplane sum(u) = const,
        # where the Euclidean Jacobian is positive definite
        ones = np.ones((n, 1))
        M = sp.bmat([[J, ones], [ones.T, None]], format="csc")
        sol = spla.spsolve(M, np.concatenate([-F, [0.0]]))
        delta = sol[:n]
        delta = delta - delta.mean()  # exact gauge projection
    if not np.all(np.isfinite(delta)):
        raise SingularHessian("Newton linear system produced non-finite step")
    return delta


def newton_solve(
    surface: TriangulatedSurface,
    theta,
    u0,
    target: CurvatureTarget,
    geometry: Geometry,
    *,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> SolveReport:
    """Damped Newton on the gradient K(u) - k with the curvature Jacobian as
    Hessian; backtracking line search with an Armijo test on the energy,
    falling back to a flow step when the line search fails."""
    ev = CurvatureEvaluator(surface, theta, geometry)
    k = target.k
    if target.geometry is not geometry:
        raise ValidationError("newton", "target geometry differs from solve geometry")
    u = np.asarray(u0, dtype=float).copy()
    if geometry is Geometry.HYPERBOLIC and u.max() >= 0.0:
        raise DomainViolation("hyperbolic u coordinates must be negative")

    F = ev.K_from_u(u) - k
    res = float(np.abs(F).max())
    residuals = [res]
    status = "max-iterations"
    message = ""
    ls_failures = 0
    iterations = 0

    for _ in range(max_iter):
        if res <= tol:
            status = "converged"
            break
        J = ev.jacobian_from_u(u)
        delta = _newton_step(J, F, geometry)

        t_cap = 1.0
        if geometry is Geometry.HYPERBOLIC:
            pos = delta > 0.0
            if np.any(pos):
                t_cap = min(1.0, 0.95 * float(np.min(-u[pos] / delta[pos])))
        slope = float(F @ delta)  # directional derivative of the energy

        accepted = False
        t = t_cap
        for _ in range(40):
            if _segment_energy(ev, k, u, t * delta) <= _ARMIJO * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # second chance: plain residual decrease along the direction
            t = t_cap
            for _ in range(40):
                F_trial = ev.K_from_u(u + t * delta) - k
                if float(np.abs(F_trial).max()) < res:
                    accepted = True
                    break
                t *= 0.5
        if accepted:
            u = u + t * delta
            ls_failures = 0
        else:
            ls_failures += 1
            dt = 0.25
            flow_ok = False
            for _ in range(60):
                trial = u - dt * F
                if geometry is Geometry.HYPERBOLIC and trial.max() >= 0.0:
                    dt *= 0.5
                    continue
                F_trial = ev.K_from_u(trial) - k
                if float(np.abs(F_trial).max()) < res:
                    u = trial
                    flow_ok = True
                    break
                dt *= 0.5
            if not flow_ok:
                status = "line-search-failed"
                message = "neither Newton direction nor flow fallback reduced the residual"
                break
        F = ev.K_from_u(u) - k
        res = float(np.abs(F).max())
        residuals.append(res)
        iterations += 1
    else:
        if res <= tol:
            status = "converged"

    converged = res <= tol
    if converged:
        status = "converged"
    return SolveReport(
        converged=converged,
        status=status,
        method="newton",
        geometry=geometry,
        u=u,
        r=u_to_r(u, geometry),
        K=F + k,
        iterations=iterations,
        times=np.arange(len(residuals), dtype=float),
        residuals=np.array(residuals),
        message=message,
    )


# ---------------------------------------------------------------------------
# convergence-rate fitting


def exponential_fit(report: SolveReport) -> tuple[float, float, int]:
    """Least-squares fit of log residual vs flow time over the trailing half
    of the samples; returns (rate, r_squared, n_tail)."""
    return fit_rate_from_history(report.times, report.residuals)


def fit_rate_from_history(times, residuals) -> tuple[float, float, int]:
    """Tail fit on raw (time, residual) arrays, e.g. reloaded from a stored
    solution document."""
    times = np.asarray(times, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    tail = len(residuals) // 2
    mask = residuals[tail:] > 0.0
    t = times[tail:][mask]
    y = np.log(residuals[tail:][mask])
    if len(t) < 20:
        raise InsufficientHistory(f"only {len(t)} tail samples, need >= 20")
    slope, intercept = np.polyfit(t, y, 1)
    fitted = slope * t + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return -float(slope), r2, len(t)


def fit_rate(report: SolveReport) -> float:
    """Fitted exponential decay rate of a converged run; positive."""
    if not report.converged:
        raise InsufficientHistory("rate fitting requires a converged run")
    rate, _, _ = exponential_fit(report)
    return rate
