"""Least-energy solver.

Minimizes the ray-maximized energy M[u] = sup_{t>=0} J(tu) over
nonnegative nonzero fields by projected gradient descent: every iterate
is rescaled back onto the constraint set where d/dt J(tu)|_{t=1} = 0,
negative nodal values are clipped, and steps are accepted under an
Armijo decrease of M.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .errors import CollapseToZero, MeshTooCoarse, NoRoot, ZeroField
from .fem import DiscreteField, _f_arr, _quad_values, energy, gradient
from .meshing import Mesh
from .nonlinearity import NonlinearitySpec
from .radial import ground_state_cached, profile_eval

__all__ = ["BoundaryBump", "FromField", "Continuation", "SolveConfig",
           "SolveReport", "nehari_scale", "least_energy_solve",
           "mountain_pass_value_check"]


@dataclass
class BoundaryBump:
    """Initial guess: ground-state profile w(|x - P|/eps) centered at a
    boundary point P."""
    P: np.ndarray
    scale: float = 1.0


@dataclass
class FromField:
    field: DiscreteField


@dataclass
class Continuation:
    """Reuse the minimizer of a previous (larger-eps) solve."""
    report: "SolveReport"


@dataclass
class SolveConfig:
    eps: float
    max_iters: int = 4000
    grad_tol: float = 1e-7
    armijo_c1: float = 1e-4
    backtrack_max: int = 40
    init: Union[BoundaryBump, FromField, Continuation, None] = None

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class SolveReport:
    u: DiscreteField
    c_eps: float
    peak_location: np.ndarray
    peak_value: float
    t_history: list = field(default_factory=list)
    residual: float = np.inf
    converged: bool = False
    iterations: int = 0
    eps: float = 0.0


def _quad_weight(mesh: Mesh) -> np.ndarray:
    from .fem import _geom
    vol, _ = _geom(mesh)
    nq = 3 if mesh.N == 2 else mesh.N + 1
    return vol / nq


def nehari_scale(mesh: Mesh, spec: NonlinearitySpec, eps: float,
                 u: DiscreteField) -> float:
    """Unique t* > 0 maximizing t -> J(t u) along the ray.

    Pure power: closed form t* = (A/B)^{1/(p+1-m)} with
    A = int(eps^m |grad u|^m + u^m) and B = int u_+^{p+1}.
    """
    vals = u.values
    if not np.any(vals != 0.0):
        raise ZeroField("nehari scale of the zero field")
    if not np.any(vals > 0.0):
        raise NoRoot("field has no positive part")
    m = spec.m
    E = energy(mesh, spec, eps, u)
    A = m * (E.grad_term + E.mass_term)
    if spec.kind == "pure_power":
        B = (spec.p + 1.0) * E.potential_term
        if B <= 0.0:
            raise NoRoot("field has no positive part")
        return (A / B) ** (1.0 / (spec.p + 1.0 - m))
    # custom: single positive root of A t^{m-1} = int f(t u) u
    wq = _quad_weight(mesh)
    q = _quad_values(mesh, vals)

    def h_prime(t):
        return A * t ** (m - 1.0) - float(
            np.sum(wq[:, None] * _f_arr(spec, t * q) * q))

    lo, hi = 1.0, 1.0
    while h_prime(lo) < 0.0:
        lo /= 2.0
        if lo < 1e-12:
            raise NoRoot("no positive stationary ray point")
    while h_prime(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise NoRoot("no positive stationary ray point")
    if lo == hi:
        return lo
    return float(brentq(h_prime, lo, hi, xtol=1e-14, rtol=8.9e-16))


def _initial_field(mesh: Mesh, spec: NonlinearitySpec,
                   config: SolveConfig) -> DiscreteField:
    init = config.init
    if init is None:
        init = BoundaryBump(P=mesh.vertices[mesh.boundary_vertices[0]])
    if isinstance(init, FromField):
        vals = np.maximum(init.field.values, 0.0)
        return DiscreteField(mesh, vals)
    if isinstance(init, Continuation):
        vals = np.maximum(init.report.u.values, 0.0)
        return DiscreteField(mesh, vals)
    profile = ground_state_cached(spec)
    r = np.linalg.norm(mesh.vertices - init.P, axis=1) / config.eps
    vals = init.scale * profile_eval(profile, r)
    return DiscreteField(mesh, vals)


def least_energy_solve(mesh: Mesh, spec: NonlinearitySpec,
                       config: SolveConfig) -> SolveReport:
    """Projected descent on the ray-maximized energy.

    Raises CollapseToZero when the iterate loses its positive part and
    MeshTooCoarse unless h <= eps/3.
    """
    eps = config.eps
    if mesh.h > eps / 3.0 + 1e-12:
        raise MeshTooCoarse(
            f"h = {mesh.h} does not resolve eps = {eps}: need h <= eps/3")
    u0 = _initial_field(mesh, spec, config)
    if not np.any(u0.values > 0.0):
        raise CollapseToZero("initial guess has no positive part")

    def project(field: DiscreteField) -> tuple[DiscreteField, float]:
        t = nehari_scale(mesh, spec, eps, field)
        return DiscreteField(mesh, t * field.values), t

    v, t0 = project(u0)
    t_history = [t0]
    M_prev = energy(mesh, spec, eps, v).total
    # Armijo reference is the max over a short history (non-monotone
    # line search) so Barzilai-Borwein steps act at their natural length
    M_hist = [M_prev]
    alpha = 1.0
    g_prev = None
    v_prev = None
    residual = np.inf
    converged = False
    iters = 0

    for k in range(config.max_iters):
        iters = k + 1
        g = gradient(mesh, spec, eps, v)
        residual = float(np.abs(g.values).max())
        if residual < config.grad_tol:
            converged = True
            break
        if g_prev is not None:
            dv = v.values - v_prev.values
            dg = g.values - g_prev.values
            denom = float(np.dot(dv, dg))
            if denom > 0.0:
                alpha = float(np.dot(dv, dv)) / denom  # Barzilai-Borwein
        g_norm2 = float(np.dot(g.values, g.values))
        M_ref = max(M_hist[-10:])
        accepted = False
        step = alpha
        for _ in range(config.backtrack_max):
            trial_vals = np.maximum(v.values - step * g.values, 0.0)
            if not np.any(trial_vals > 0.0):
                step /= 2.0
                continue
            try:
                vn, tn = project(DiscreteField(mesh, trial_vals))
            except NoRoot:
                step /= 2.0
                continue
            Mn = energy(mesh, spec, eps, vn).total
            if Mn <= M_ref - config.armijo_c1 * step * g_norm2:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            # no productive step at line-search resolution: report as-is
            break
        v_prev, g_prev = v, g
        v, M_prev = vn, Mn
        M_hist.append(Mn)
        t_history.append(tn)

    if not np.any(v.values > 0.0):
        raise CollapseToZero("iterate collapsed to the zero field")
    peak_idx = int(np.argmax(v.values))
    return SolveReport(u=v, c_eps=M_prev,
                       peak_location=mesh.vertices[peak_idx].copy(),
                       peak_value=float(v.values[peak_idx]),
                       t_history=t_history, residual=residual,
                       converged=converged, iterations=iters, eps=eps)


def mountain_pass_value_check(mesh: Mesh, spec: NonlinearitySpec, eps: float,
                              u: DiscreteField,
                              t_points: int = 3001) -> tuple[float, float, float]:
    """Evaluate J(t u) on a t-grid over [0, 3]; the max should equal J(u)
    when u lies on the constraint set (stationarity at t = 1)."""
    E = energy(mesh, spec, eps, u)
    c_from_energy = E.total
    ts = np.linspace(0.0, 3.0, t_points)
    m = spec.m
    if spec.kind == "pure_power":
        # J(tu) = t^m (grad + mass) - t^{p+1} potential, exactly
        vals = (ts ** m) * (E.grad_term + E.mass_term) \
            - (ts ** (spec.p + 1.0)) * E.potential_term
    else:
        vals = np.array([
            energy(mesh, spec, eps, DiscreteField(mesh, t * u.values)).total
            for t in ts])
    c_from_sup = float(vals.max())
    gap = abs(c_from_sup - c_from_energy) / max(abs(c_from_sup), 1e-300)
    return c_from_sup, c_from_energy, gap
