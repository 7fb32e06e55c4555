"""P1 finite-element discretization of the energy functional and its
first variation.

The Neumann condition is natural: no boundary terms appear anywhere.
Gradients of P1 fields are piecewise constant, so the degenerate
|grad v|^m term integrates exactly per element; |v|^m and F(v+) use an
edge-midpoint rule (N=2) or vertex rule (N=3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .meshing import Mesh
from .nonlinearity import NonlinearitySpec, eval_F, eval_f


def _F_arr(spec: NonlinearitySpec, t: np.ndarray) -> np.ndarray:
    if spec.kind == "pure_power":
        tp = np.maximum(t, 0.0)
        return tp ** (spec.p + 1.0) / (spec.p + 1.0)
    return np.vectorize(lambda s: eval_F(spec, s))(t)


def _f_arr(spec: NonlinearitySpec, t: np.ndarray) -> np.ndarray:
    if spec.kind == "pure_power":
        return np.maximum(t, 0.0) ** spec.p
    return np.vectorize(lambda s: eval_f(spec, s))(t)

__all__ = ["DiscreteField", "EnergyBreakdown", "energy", "gradient",
           "interpolate"]

# degenerate-gradient regularization, applied in the first variation only
ETA = 1e-8


@dataclass
class DiscreteField:
    mesh: Mesh
    values: np.ndarray  # one real per vertex

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.mesh.vertices),):
            raise ValueError("value count must equal vertex count")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")


@dataclass
class EnergyBreakdown:
    grad_term: float       # (eps^m/m) int |grad v|^m
    mass_term: float       # (1/m) int |v|^m
    potential_term: float  # int F(v+)
    total: float

    def as_dict(self) -> dict:
        return {"grad_term": self.grad_term, "mass_term": self.mass_term,
                "potential_term": self.potential_term, "total": self.total}


def _geom(mesh: Mesh):
    """Per-cell volumes and P1 basis gradients, cached on the mesh."""
    cached = mesh.__dict__.get("_fem_geom")
    if cached is not None:
        return cached
    N = mesh.N
    v = mesh.vertices[mesh.cells]            # (nc, N+1, N)
    D = v[:, 1:] - v[:, :1]                  # (nc, N, N) edge matrix
    Dinv = np.linalg.inv(D)                  # rows of Dinv.T are basis grads
    grads = np.empty((len(mesh.cells), N + 1, N))
    grads[:, 1:] = np.transpose(Dinv, (0, 2, 1))
    grads[:, 0] = -grads[:, 1:].sum(axis=1)
    det = np.linalg.det(D)
    vol = np.abs(det) / math.factorial(N)
    cached = (vol, grads)
    mesh.__dict__["_fem_geom"] = cached
    return cached


_EDGES_2D = [(0, 1), (0, 2), (1, 2)]


def _quad_values(mesh: Mesh, vals: np.ndarray) -> np.ndarray:
    """Field values at the quadrature nodes of every cell, shape (nc, nq)."""
    vc = vals[mesh.cells]                    # (nc, N+1)
    if mesh.N == 2:
        return np.stack([(vc[:, i] + vc[:, j]) / 2.0 for i, j in _EDGES_2D],
                        axis=1)
    return vc


def energy(mesh: Mesh, spec: NonlinearitySpec, eps: float,
           v: DiscreteField) -> EnergyBreakdown:
    """Element-wise evaluation of the functional; compensated sums keep
    the result independent of cell ordering."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = spec.m
    vol, grads = _geom(mesh)
    vals = v.values

    g = np.einsum("ck,ckd->cd", vals[mesh.cells], grads)
    gnorm = np.linalg.norm(g, axis=1)
    grad_cells = (eps ** m / m) * vol * gnorm ** m

    q = _quad_values(mesh, vals)
    nq = q.shape[1]
    mass_cells = (vol / (m * nq)) * np.sum(np.abs(q) ** m, axis=1)
    pot_cells = (vol / nq) * np.sum(_F_arr(spec, q), axis=1)

    gt = math.fsum(grad_cells.tolist())
    mt = math.fsum(mass_cells.tolist())
    pt = math.fsum(pot_cells.tolist())
    return EnergyBreakdown(grad_term=gt, mass_term=mt, potential_term=pt,
                           total=gt + mt - pt)


def gradient(mesh: Mesh, spec: NonlinearitySpec, eps: float,
             v: DiscreteField) -> DiscreteField:
    """Nodal first variation of the discrete energy.

    For m > 2 the factor |grad v|^{m-2} is regularized as
    (|grad v|^2 + ETA^2)^{(m-2)/2}; the energy itself is never
    regularized.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = spec.m
    vol, grads = _geom(mesh)
    vals = v.values
    out = np.zeros(len(vals))
    cells = mesh.cells

    g = np.einsum("ck,ckd->cd", vals[cells], grads)
    if m == 2:
        coef = eps ** m * vol
    else:
        g2 = np.einsum("cd,cd->c", g, g)
        coef = eps ** m * vol * (g2 + ETA * ETA) ** ((m - 2) / 2.0)
    contrib = coef[:, None] * np.einsum("cd,ckd->ck", g, grads)
    np.add.at(out, cells, contrib)

    q = _quad_values(mesh, vals)
    mass_q = np.abs(q) ** (m - 2) * q if m != 2 else q
    pot_q = _f_arr(spec, q)
    nq = q.shape[1]
    if mesh.N == 2:
        # each midpoint value depends on its two edge endpoints with
        # weight 1/2
        for e, (i, j) in enumerate(_EDGES_2D):
            part = (vol / nq) * 0.5 * (mass_q[:, e] - pot_q[:, e])
            np.add.at(out, cells[:, i], part)
            np.add.at(out, cells[:, j], part)
    else:
        np.add.at(out, cells, (vol[:, None] / nq) * (mass_q - pot_q))
    return DiscreteField(mesh=mesh, values=out)


def interpolate(mesh: Mesh, func) -> DiscreteField:
    """Nodal interpolant of a callable x -> value."""
    vals = np.array([func(x) for x in mesh.vertices], dtype=float)
    return DiscreteField(mesh=mesh, values=vals)
