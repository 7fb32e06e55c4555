"""Parametric smooth domains with analytic boundary mean curvature.

Four shapes: Ball (2D or 3D), Ellipse, Ellipsoid, and PerturbedDisk with
polar boundary r(theta) = R (1 + amp cos k theta).  Mean curvature is
the average of the N-1 principal curvatures with respect to the outward
normal, so a ball of radius R has H = 1/R everywhere.  All curvature
formulas are closed-form; no numerical differencing enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar, minimize

from .errors import PointNotOnBoundary

__all__ = [
    "DomainSpec",
    "ball",
    "ellipse",
    "ellipsoid",
    "perturbed_disk",
    "mean_curvature",
    "max_mean_curvature",
    "nearest_boundary_point",
    "CurvatureMax",
    "NearestPoint",
]

_BOUNDARY_TOL = 1e-8
_SCAN_POINTS = 4096


@dataclass(frozen=True)
class DomainSpec:
    shape: str  # "ball" | "ellipse" | "ellipsoid" | "perturbed_disk"
    N: int
    params: tuple

    def __post_init__(self):
        s, p = self.shape, self.params
        if s == "ball":
            (R,) = p
            if R <= 0:
                raise ValueError("ball radius must be positive")
            if self.N not in (2, 3):
                raise ValueError("ball supports N in {2, 3}")
        elif s == "ellipse":
            a, b = p
            if a <= 0 or b <= 0:
                raise ValueError("ellipse semi-axes must be positive")
            if self.N != 2:
                raise ValueError("ellipse is two-dimensional")
        elif s == "ellipsoid":
            a, b, c = p
            if min(a, b, c) <= 0:
                raise ValueError("ellipsoid semi-axes must be positive")
            if self.N != 3:
                raise ValueError("ellipsoid is three-dimensional")
        elif s == "perturbed_disk":
            R, amp, k = p
            if R <= 0:
                raise ValueError("disk radius must be positive")
            # equality keeps kappa >= 0 (flat point); beyond it the
            # boundary loses convexity and the curvature scan its meaning
            if abs(amp) > 1.0 / (1.0 + k * k):
                raise ValueError(
                    f"|amp| = {abs(amp)} > 1/(1+k^2); boundary would lose "
                    "smooth star-shaped regularity"
                )
            if self.N != 2:
                raise ValueError("perturbed disk is two-dimensional")
        else:
            raise ValueError(f"unknown shape {s!r}")

    # --- implicit description F(x) < 0 inside, F increasing outward ---

    def level(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if self.shape == "ball":
            (R,) = self.params
            return float(np.dot(x, x) / (R * R) - 1.0)
        if self.shape == "ellipse":
            a, b = self.params
            return float((x[0] / a) ** 2 + (x[1] / b) ** 2 - 1.0)
        if self.shape == "ellipsoid":
            a, b, c = self.params
            return float((x[0] / a) ** 2 + (x[1] / b) ** 2 + (x[2] / c) ** 2 - 1.0)
        R, amp, k = self.params
        r = math.hypot(x[0], x[1])
        theta = math.atan2(x[1], x[0])
        return r - R * (1.0 + amp * math.cos(k * theta))

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return self.level(x) <= tol

    def min_feature(self) -> float:
        """Smallest geometric length scale (bounds admissible mesh size)."""
        if self.shape == "ball":
            return self.params[0]
        if self.shape == "ellipse":
            return min(self.params)
        if self.shape == "ellipsoid":
            return min(self.params)
        R, amp, k = self.params
        return R * (1.0 - abs(amp))

    # --- boundary parametrization ---

    def boundary_point(self, theta, phi=None) -> np.ndarray:
        """Boundary point at angular parameter(s); phi is the polar angle
        (from the +z axis) used only in 3D."""
        if self.shape == "ball":
            (R,) = self.params
            if self.N == 2:
                return np.array([R * np.cos(theta), R * np.sin(theta)])
            return np.array([
                R * np.sin(phi) * np.cos(theta),
                R * np.sin(phi) * np.sin(theta),
                R * np.cos(phi),
            ])
        if self.shape == "ellipse":
            a, b = self.params
            return np.array([a * np.cos(theta), b * np.sin(theta)])
        if self.shape == "ellipsoid":
            a, b, c = self.params
            return np.array([
                a * np.sin(phi) * np.cos(theta),
                b * np.sin(phi) * np.sin(theta),
                c * np.cos(phi),
            ])
        R, amp, k = self.params
        rho = R * (1.0 + amp * np.cos(k * theta))
        return np.array([rho * np.cos(theta), rho * np.sin(theta)])

    def outward_normal(self, x: np.ndarray) -> np.ndarray:
        g = self._level_grad(x)
        return g / np.linalg.norm(g)

    def _level_grad(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.shape == "ball":
            (R,) = self.params
            return 2.0 * x / (R * R)
        if self.shape == "ellipse":
            a, b = self.params
            return np.array([2.0 * x[0] / a ** 2, 2.0 * x[1] / b ** 2])
        if self.shape == "ellipsoid":
            a, b, c = self.params
            return np.array([
                2.0 * x[0] / a ** 2, 2.0 * x[1] / b ** 2, 2.0 * x[2] / c ** 2
            ])
        # perturbed disk: grad of r - rho(theta)
        r = math.hypot(x[0], x[1])
        theta = math.atan2(x[1], x[0])
        R, amp, k = self.params
        drho = -R * amp * k * math.sin(k * theta)
        er = np.array([x[0] / r, x[1] / r])
        et = np.array([-x[1] / r, x[0] / r])
        return er - (drho / r) * et


def ball(R: float, N: int = 3) -> DomainSpec:
    return DomainSpec("ball", N, (float(R),))


def ellipse(a: float, b: float) -> DomainSpec:
    return DomainSpec("ellipse", 2, (float(a), float(b)))


def ellipsoid(a: float, b: float, c: float) -> DomainSpec:
    return DomainSpec("ellipsoid", 3, (float(a), float(b), float(c)))


def perturbed_disk(R: float, amp: float, k: int) -> DomainSpec:
    return DomainSpec("perturbed_disk", 2, (float(R), float(amp), int(k)))


def _implicit_mean_curvature(domain: DomainSpec, x: np.ndarray) -> float:
    """H = div(grad F / |grad F|) / (N-1) for quadric level sets.

    Closed form: (lap F |grad F|^2 - grad F . Hess F . grad F) / |grad F|^3
    with diagonal, constant Hess F for the quadric shapes.
    """
    if domain.shape == "ball":
        return 1.0 / domain.params[0]
    if domain.shape == "ellipse":
        axes = np.array(domain.params)
    else:
        axes = np.array(domain.params)
    inv2 = 1.0 / axes ** 2
    g = 2.0 * np.asarray(x) * inv2
    g2 = float(np.dot(g, g))
    lap = 2.0 * float(np.sum(inv2))
    gHg = float(np.sum(g * (2.0 * inv2) * g))
    return (lap * g2 - gHg) / g2 ** 1.5 / (domain.N - 1)


def _polar_curvature(domain: DomainSpec, theta: float) -> float:
    R, amp, k = domain.params
    rho = R * (1.0 + amp * math.cos(k * theta))
    d1 = -R * amp * k * math.sin(k * theta)
    d2 = -R * amp * k * k * math.cos(k * theta)
    return (rho * rho + 2.0 * d1 * d1 - rho * d2) / (rho * rho + d1 * d1) ** 1.5


def mean_curvature(domain: DomainSpec, P: np.ndarray) -> float:
    """Mean curvature of the boundary at P (outward-normal convention,
    H = 1/R on a ball; for N = 2 this is the plane curvature)."""
    P = np.asarray(P, dtype=float)
    if abs(domain.level(P)) > _BOUNDARY_TOL:
        raise PointNotOnBoundary(
            f"point {P.tolist()} is off the boundary (level {domain.level(P):.3g})"
        )
    if domain.shape == "perturbed_disk":
        return _polar_curvature(domain, math.atan2(P[1], P[0]))
    return _implicit_mean_curvature(domain, P)


@dataclass
class CurvatureMax:
    points: list = field(default_factory=list)  # all maximizers found
    H_max: float = float("nan")
    degenerate: bool = False  # constant curvature: maximizer set is all of the boundary
    note: str = ""


def _curvature_on_grid(domain: DomainSpec):
    """(parameter grid, curvature values, point constructor) for scanning."""
    if domain.N == 2:
        thetas = np.linspace(0.0, 2.0 * math.pi, _SCAN_POINTS, endpoint=False)
        if domain.shape == "perturbed_disk":
            H = np.array([_polar_curvature(domain, t) for t in thetas])
        else:
            pts = np.stack([domain.boundary_point(t) for t in thetas])
            H = np.array([_implicit_mean_curvature(domain, x) for x in pts])
        return thetas, H
    # 3D: scan (theta, phi) in chunks
    thetas = np.linspace(0.0, 2.0 * math.pi, _SCAN_POINTS, endpoint=False)
    phis = np.linspace(1e-6, math.pi - 1e-6, _SCAN_POINTS)
    a, b, c = domain.params if domain.shape == "ellipsoid" else (None,) * 3
    best = []
    inv2 = np.array([1.0 / a ** 2, 1.0 / b ** 2, 1.0 / c ** 2])
    lap = 2.0 * inv2.sum()
    Hmax = -np.inf
    vals = np.empty((_SCAN_POINTS, _SCAN_POINTS))
    for i in range(0, _SCAN_POINTS, 64):
        ph = phis[i: i + 64][:, None]
        x = a * np.sin(ph) * np.cos(thetas)[None, :]
        y = b * np.sin(ph) * np.sin(thetas)[None, :]
        z = c * np.cos(ph) * np.ones_like(thetas)[None, :]
        gx, gy, gz = 2 * x * inv2[0], 2 * y * inv2[1], 2 * z * inv2[2]
        g2 = gx * gx + gy * gy + gz * gz
        gHg = 2 * (gx * gx * inv2[0] + gy * gy * inv2[1] + gz * gz * inv2[2])
        vals[i: i + 64] = (lap * g2 - gHg) / g2 ** 1.5 / 2.0
    return (phis, thetas), vals


def max_mean_curvature(domain: DomainSpec) -> CurvatureMax:
    """Global maximizers of boundary mean curvature.

    Scans a fine parameter grid, refines each candidate locally, and
    reports the whole symmetry orbit when the maximum is attained at
    several points.  Constant-curvature boundaries (balls) are flagged
    degenerate.
    """
    out = CurvatureMax()
    if domain.shape == "ball":
        R = domain.params[0]
        out.H_max = 1.0 / R
        out.degenerate = True
        out.note = "degenerate: constant curvature"
        out.points = [np.asarray(domain.boundary_point(0.0, math.pi / 2.0)
                                 if domain.N == 3 else domain.boundary_point(0.0))]
        return out
    if domain.N == 2:
        thetas, H = _curvature_on_grid(domain)
        # candidates: every strict local maximum of the periodic scan
        left, right = np.roll(H, 1), np.roll(H, -1)
        cand = thetas[(H >= left) & (H >= right)]
        # refine each candidate and dedupe
        if domain.shape == "perturbed_disk":
            fun = lambda t: -_polar_curvature(domain, t)
        else:
            fun = lambda t: -_implicit_mean_curvature(
                domain, domain.boundary_point(t))
        refined = []
        dtheta = 2.0 * math.pi / _SCAN_POINTS
        for t0 in cand:
            res = minimize_scalar(fun, bracket=None,
                                  bounds=(t0 - 2 * dtheta, t0 + 2 * dtheta),
                                  method="bounded",
                                  options={"xatol": 1e-12})
            refined.append((res.x % (2.0 * math.pi), -res.fun))
        Hmax = max(v for _, v in refined)
        pts = []
        for t, v in refined:
            if v < Hmax - 1e-10 * abs(Hmax):
                continue
            P = domain.boundary_point(t)
            if all(np.linalg.norm(P - q) > 1e-6 for q in pts):
                pts.append(P)
        out.points = pts
        out.H_max = float(Hmax)
        return out
    # ellipsoid
    (phis, thetas), vals = _curvature_on_grid(domain)
    a, b, c = domain.params

    def neg_h(u):
        x = domain.boundary_point(u[0], u[1])
        return -_implicit_mean_curvature(domain, x)

    flat = np.argsort(vals, axis=None)[::-1][:64]
    cand = [(phis[i // _SCAN_POINTS], thetas[i % _SCAN_POINTS]) for i in flat]
    refined = []
    for ph, th in cand:
        res = minimize(neg_h, x0=[th, ph], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14})
        refined.append((domain.boundary_point(res.x[0], res.x[1]), -res.fun))
    Hmax = max(v for _, v in refined)
    pts = []
    for P, v in refined:
        if v < Hmax - 1e-8 * abs(Hmax):
            continue
        if all(np.linalg.norm(P - q) > 1e-5 for q in pts):
            pts.append(P)
    out.points = pts
    out.H_max = float(Hmax)
    return out


@dataclass
class NearestPoint:
    point: np.ndarray
    distance: float
    tie: bool = False


def nearest_boundary_point(domain: DomainSpec, x: np.ndarray) -> NearestPoint:
    """Closest boundary point to x (inside or on the closed domain).

    Ties (symmetric interior points) return one representative with the
    tie flag set.
    """
    x = np.asarray(x, dtype=float)
    if domain.shape == "ball":
        R = domain.params[0]
        r = np.linalg.norm(x)
        if r < 1e-14:
            P = np.zeros(domain.N)
            P[0] = R
            return NearestPoint(P, R, tie=True)
        return NearestPoint(x * (R / r), abs(R - r), tie=False)
    if domain.N == 2:
        thetas = np.linspace(0.0, 2.0 * math.pi, _SCAN_POINTS, endpoint=False)
        pts = np.stack([domain.boundary_point(t) for t in thetas])
        d2 = np.sum((pts - x) ** 2, axis=1)
        fun = lambda t: float(np.sum((domain.boundary_point(t) - x) ** 2))
        dtheta = 2.0 * math.pi / _SCAN_POINTS
        order = np.argsort(d2)
        best = []
        dmin_grid = math.sqrt(d2[order[0]])
        for i in order[:16]:
            res = minimize_scalar(fun, bounds=(thetas[i] - 2 * dtheta,
                                               thetas[i] + 2 * dtheta),
                                  method="bounded", options={"xatol": 1e-13})
            best.append((domain.boundary_point(res.x), math.sqrt(res.fun)))
        dmin = min(d for _, d in best)
        winners = []
        for P, d in best:
            if d > dmin + 1e-9 * (1.0 + dmin):
                continue
            if all(np.linalg.norm(P - q) > 1e-6 for q in winners):
                winners.append(P)
        return NearestPoint(winners[0], dmin, tie=len(winners) > 1)
    # ellipsoid
    grid = 256
    thetas = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    phis = np.linspace(1e-6, math.pi - 1e-6, grid)
    TT, PP = np.meshgrid(thetas, phis)
    a, b, c = domain.params
    X = a * np.sin(PP) * np.cos(TT)
    Y = b * np.sin(PP) * np.sin(TT)
    Z = c * np.cos(PP)
    d2 = (X - x[0]) ** 2 + (Y - x[1]) ** 2 + (Z - x[2]) ** 2
    flat = np.argsort(d2, axis=None)[:8]

    def fun(u):
        return float(np.sum((domain.boundary_point(u[0], u[1]) - x) ** 2))

    best = []
    for i in flat:
        th0, ph0 = TT.flat[i], PP.flat[i]
        res = minimize(fun, x0=[th0, ph0], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16})
        best.append((domain.boundary_point(res.x[0], res.x[1]),
                     math.sqrt(res.fun)))
    dmin = min(d for _, d in best)
    winners = []
    for P, d in best:
        if d > dmin + 1e-8 * (1.0 + dmin):
            continue
        if all(np.linalg.norm(P - q) > 1e-5 for q in winners):
            winners.append(P)
    return NearestPoint(winners[0], dmin, tie=len(winners) > 1)
