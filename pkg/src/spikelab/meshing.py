"""Boundary-fitted simplicial meshes for the parametric domains.

Structured template (polar rings in 2D, spherical shells in 3D) mapped
onto the parametric boundary, then triangulated with Delaunay and
filtered to the domain.  Deterministic for fixed (domain, h); boundary
vertices lie exactly on the analytic boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .errors import MeshQualityFailure
from .geometry import DomainSpec

__all__ = ["Mesh", "generate_mesh"]

_MAX_ASPECT = 20.0
_MAX_REPAIR = 60


def _triangulate(domain, points, h):
    """Delaunay triangulation, positively oriented, filtered to the domain."""
    cells = Delaunay(points).simplices
    v = points[cells]
    if domain.N == 2:
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        vol = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    else:
        vol = np.einsum("ij,ij->i",
                        np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]),
                        v[:, 3] - v[:, 0]) / 6.0
    flip = vol < 0
    cells[flip, 0], cells[flip, 1] = cells[flip, 1].copy(), cells[flip, 0].copy()
    vol = np.abs(vol)
    centroids = points[cells].mean(axis=1)
    inside = np.array([domain.contains(c, tol=1e-9) for c in centroids])
    keep = inside & (vol > 1e-14 * h ** domain.N)
    return points, cells[keep], vol[keep]


@dataclass
class Mesh:
    vertices: np.ndarray           # (nv, N)
    cells: np.ndarray              # (nc, N+1) vertex indices, positive volume
    boundary_vertices: np.ndarray  # indices into vertices
    boundary_normals: np.ndarray   # (nb, N) outward unit normals
    h: float
    domain: DomainSpec

    @property
    def N(self) -> int:
        return self.vertices.shape[1]

    def cell_volumes(self) -> np.ndarray:
        v = self.vertices[self.cells]
        if self.N == 2:
            e1 = v[:, 1] - v[:, 0]
            e2 = v[:, 2] - v[:, 0]
            return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        e3 = v[:, 3] - v[:, 0]
        return np.einsum("ij,ij->i", np.cross(e1, e2), e3) / 6.0

    def total_volume(self) -> float:
        return float(np.sum(self.cell_volumes()))


def _boundary_map(domain: DomainSpec):
    """Map from the unit circle/sphere direction to the boundary point."""
    if domain.shape == "ball":
        R = domain.params[0]
        return lambda u: R * u
    if domain.shape == "ellipse":
        a, b = domain.params
        scale = np.array([a, b])
        return lambda u: scale * u
    if domain.shape == "ellipsoid":
        scale = np.array(domain.params)
        return lambda u: scale * u
    R, amp, k = domain.params

    def pd(u):
        theta = np.arctan2(u[..., 1], u[..., 0])
        rho = R * (1.0 + amp * np.cos(k * theta))
        return u * rho[..., None]

    return pd


def _template_points_2d(domain: DomainSpec, h: float):
    bmap = _boundary_map(domain)
    # ring count from the largest boundary radius
    thetas_probe = np.linspace(0, 2 * math.pi, 256, endpoint=False)
    probe = bmap(np.stack([np.cos(thetas_probe), np.sin(thetas_probe)], axis=-1))
    r_out = np.max(np.linalg.norm(probe, axis=1))
    n_rings = max(2, int(round(r_out / h)))
    pts = [np.zeros((1, 2))]
    boundary_idx = None
    count = 1
    # boundary ring size from the actual boundary length
    per = np.sum(np.linalg.norm(np.diff(np.vstack([probe, probe[:1]]), axis=0),
                                axis=1))
    for j in range(1, n_rings + 1):
        t = j / n_rings
        n_theta = max(6, int(round(per * t / h)))
        offs = 0.5 * (j % 2)  # stagger rings for better triangle quality
        th = (np.arange(n_theta) + offs) * (2 * math.pi / n_theta)
        u = np.stack([np.cos(th), np.sin(th)], axis=-1)
        ring = t * bmap(u)
        if j == n_rings:
            ring = bmap(u)  # exactly on the analytic boundary
            boundary_idx = np.arange(count, count + n_theta)
        pts.append(ring)
        count += n_theta
    return np.vstack(pts), boundary_idx


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    golden = math.pi * (1.0 + math.sqrt(5.0))
    theta = golden * i
    return np.stack([np.sin(phi) * np.cos(theta),
                     np.sin(phi) * np.sin(theta),
                     np.cos(phi)], axis=-1)


def _template_points_3d(domain: DomainSpec, h: float):
    """Boundary points on the analytic surface plus an interior BCC lattice.

    A body-centered-cubic lattice gives near-uniform Delaunay tetrahedra;
    lattice points closer than 0.7 h to the boundary are dropped so the
    interface layer is meshed between the lattice and the surface samples.
    """
    bmap = _boundary_map(domain)
    probe = bmap(_fibonacci_sphere(512))
    ext = np.max(np.abs(probe), axis=0) + h
    axes = [np.arange(-ext[d], ext[d] + h, h) for d in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    corners = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    lattice = np.vstack([corners, corners + 0.5 * h])
    # signed-distance estimate level/|grad level|
    dist = np.array([domain.level(p) / np.linalg.norm(domain._level_grad(p))
                     for p in lattice])
    lattice = lattice[dist < -0.7 * h]

    if domain.shape == "ellipsoid":
        a, b, c = domain.params
        q = 1.6075  # Thomsen surface-area approximation
        area = 4.0 * math.pi * (((a * b) ** q + (a * c) ** q
                                 + (b * c) ** q) / 3.0) ** (1.0 / q)
    else:
        area = 4.0 * math.pi * domain.params[0] ** 2
    n_b = max(12, int(round(area / (h * h) * 1.15)))
    bpts = bmap(_fibonacci_sphere(n_b))
    pts = np.vstack([bpts, lattice])
    return pts, np.arange(n_b)


def _relax_interior(domain: DomainSpec, points: np.ndarray,
                    interior: np.ndarray, rounds: int) -> np.ndarray:
    """Laplacian smoothing of interior vertices over Delaunay edges."""
    n = len(points)
    for _ in range(rounds):
        tri = Delaunay(points)
        indptr, indices = tri.vertex_neighbor_vertices
        new_pts = points.copy()
        for i in np.nonzero(interior)[0]:
            nbrs = indices[indptr[i]: indptr[i + 1]]
            if len(nbrs) == 0:
                continue
            cand = points[nbrs].mean(axis=0)
            if domain.contains(cand, tol=-1e-12):
                new_pts[i] = cand
        points = new_pts
    return points


def generate_mesh(domain: DomainSpec, h: float) -> Mesh:
    """Conforming simplicial mesh with target edge length h.

    Raises MeshQualityFailure when any retained cell exceeds the aspect
    ratio cap.
    """
    if h <= 0:
        raise ValueError("mesh size h must be positive")
    if h > domain.min_feature() / 4.0:
        raise ValueError(
            f"h = {h} too coarse: need h <= min_feature/4 = "
            f"{domain.min_feature() / 4.0:.6g}"
        )
    if domain.N == 2:
        points, bidx = _template_points_2d(domain, h)
        verts, cells, vol = _triangulate(domain, points, h)
    else:
        points, bidx = _template_points_3d(domain, h)
        interior = np.ones(len(points), dtype=bool)
        interior[bidx] = False
        points = _relax_interior(domain, points, interior, rounds=3)
        is_b = ~interior
        # sliver repair: nudge the movable vertices of over-cap cells and
        # re-triangulate.  Guarded hill-climb: a nudge round that increases
        # the bad-cell count is reverted to the best configuration seen, so
        # the random kicks cannot cascade into fresh slivers elsewhere.
        # The all-boundary thin caps left over (vertices pinned to the
        # surface) are peeled afterwards.
        rng = np.random.default_rng(20240901)
        best_points, best_bad = points.copy(), None
        for _ in range(_MAX_REPAIR):
            verts, cells, vol = _triangulate(domain, points, h)
            aspect = _aspect_ratios(verts, cells, vol, 3)
            n_b = is_b[cells].sum(axis=1)
            bad = (aspect > _MAX_ASPECT) & (n_b < 4)
            cap = (aspect > _MAX_ASPECT) & (n_b == 4)
            if not bad.any():
                cells = cells[~cap]
                vol = vol[~cap]
                break
            n_bad = int(bad.sum())
            if best_bad is None or n_bad < best_bad:
                best_bad, best_points = n_bad, points.copy()
            elif n_bad > best_bad:
                points = best_points.copy()
                verts, cells, vol = _triangulate(domain, points, h)
                aspect = _aspect_ratios(verts, cells, vol, 3)
                n_b = is_b[cells].sum(axis=1)
                bad = (aspect > _MAX_ASPECT) & (n_b < 4)
            for i in np.unique(cells[bad][~is_b[cells[bad]]]):
                for _try in range(8):
                    cand = points[i] + rng.uniform(-0.1 * h, 0.1 * h, 3)
                    if domain.contains(cand, tol=-1e-12):
                        points[i] = cand
                        break

    aspect = _aspect_ratios(verts, cells, vol, domain.N)
    if np.any(aspect > _MAX_ASPECT):
        raise MeshQualityFailure(
            f"worst cell aspect ratio {aspect.max():.2f} exceeds {_MAX_ASPECT}"
        )

    normals = np.stack([domain.outward_normal(verts[i]) for i in bidx])
    return Mesh(vertices=verts, cells=cells, boundary_vertices=np.asarray(bidx),
                boundary_normals=normals, h=h, domain=domain)


def _aspect_ratios(verts, cells, vol, N):
    """Longest edge over inradius-like scale (2 vol / perimeter in 2D,
    3 vol / surface in 3D), normalized so a regular simplex is ~2-3."""
    v = verts[cells]
    pairs = [(i, j) for i in range(N + 1) for j in range(i + 1, N + 1)]
    edges = np.stack([np.linalg.norm(v[:, i] - v[:, j], axis=1)
                      for i, j in pairs], axis=1)
    lmax = edges.max(axis=1)
    if N == 2:
        inr = 2.0 * vol / edges.sum(axis=1)
    else:
        areas = np.zeros(len(cells))
        faces = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        for f in faces:
            a = v[:, f[1]] - v[:, f[0]]
            b = v[:, f[2]] - v[:, f[0]]
            areas += 0.5 * np.linalg.norm(np.cross(a, b), axis=1)
        inr = 3.0 * vol / areas
    return lmax / np.maximum(inr, 1e-300)
