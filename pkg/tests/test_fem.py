import math

import numpy as np
import pytest

from spikelab import geometry as geo
from spikelab.fem import DiscreteField, energy, gradient, interpolate
from spikelab.meshing import generate_mesh
from spikelab.nonlinearity import pure_power
from spikelab.radial import ground_state_cached, profile_eval


@pytest.fixture(scope="module")
def disk_mesh():
    return generate_mesh(geo.ball(1.0, 2), 0.1)


@pytest.fixture(scope="module")
def ball_mesh():
    return generate_mesh(geo.ball(1.0, 3), 0.25)


SPEC = pure_power(2.0, 2, 3.0)


def test_field_validation(disk_mesh):
    with pytest.raises(ValueError):
        DiscreteField(disk_mesh, np.zeros(3))
    with pytest.raises(ValueError):
        DiscreteField(disk_mesh,
                      np.full(len(disk_mesh.vertices), np.nan))


def test_zero_field_zero_energy(disk_mesh):
    v = DiscreteField(disk_mesh, np.zeros(len(disk_mesh.vertices)))
    E = energy(disk_mesh, SPEC, 0.5, v)
    assert E.grad_term == E.mass_term == E.potential_term == E.total == 0.0


def test_constant_field(disk_mesh):
    c = 1.3
    v = DiscreteField(disk_mesh, np.full(len(disk_mesh.vertices), c))
    E = energy(disk_mesh, SPEC, 0.5, v)
    assert E.grad_term == pytest.approx(0.0, abs=1e-25)
    vol = disk_mesh.total_volume()
    assert E.mass_term == pytest.approx(vol * c ** 2 / 2.0, rel=1e-12)


def test_total_is_sum_of_terms(disk_mesh):
    rng = np.random.default_rng(3)
    v = DiscreteField(disk_mesh, rng.normal(0, 1, len(disk_mesh.vertices)))
    E = energy(disk_mesh, SPEC, 0.5, v)
    assert E.total == E.grad_term + E.mass_term - E.potential_term


def test_zero_gradient_at_zero(disk_mesh):
    v = DiscreteField(disk_mesh, np.zeros(len(disk_mesh.vertices)))
    g = gradient(disk_mesh, SPEC, 0.5, v)
    assert np.all(g.values == 0.0)


@pytest.mark.parametrize("m,p", [(2.0, 3.0), (2.5, 3.0), (3.0, 3.5)])
def test_gradient_consistency(disk_mesh, m, p):
    spec = pure_power(m, 2, p)
    rng = np.random.default_rng(11)
    n = len(disk_mesh.vertices)
    t = 1e-5
    for _ in range(5):
        v = rng.normal(0.5, 0.5, n)
        d = rng.normal(0, 1, n)
        Ep = energy(disk_mesh, spec, 0.4, DiscreteField(disk_mesh, v + t * d))
        Em = energy(disk_mesh, spec, 0.4, DiscreteField(disk_mesh, v - t * d))
        fd = (Ep.total - Em.total) / (2 * t)
        ip = float(np.dot(
            gradient(disk_mesh, spec, 0.4, DiscreteField(disk_mesh, v)).values,
            d))
        assert abs(fd - ip) / abs(fd) < 1e-6


def test_gradient_consistency_3d(ball_mesh):
    spec = pure_power(2.5, 3, 2.5)
    rng = np.random.default_rng(12)
    n = len(ball_mesh.vertices)
    t = 1e-5
    v = rng.normal(0.5, 0.4, n)
    d = rng.normal(0, 1, n)
    Ep = energy(ball_mesh, spec, 0.5, DiscreteField(ball_mesh, v + t * d))
    Em = energy(ball_mesh, spec, 0.5, DiscreteField(ball_mesh, v - t * d))
    fd = (Ep.total - Em.total) / (2 * t)
    ip = float(np.dot(
        gradient(ball_mesh, spec, 0.5, DiscreteField(ball_mesh, v)).values, d))
    assert abs(fd - ip) / abs(fd) < 1e-6


def test_energy_invariant_under_vertex_reordering(disk_mesh):
    rng = np.random.default_rng(5)
    n = len(disk_mesh.vertices)
    vals = rng.normal(0.5, 0.5, n)
    E0 = energy(disk_mesh, SPEC, 0.4, DiscreteField(disk_mesh, vals))

    perm = rng.permutation(n)
    inv = np.empty(n, dtype=int)
    inv[perm] = np.arange(n)
    from spikelab.meshing import Mesh
    mesh2 = Mesh(vertices=disk_mesh.vertices[perm],
                 cells=inv[disk_mesh.cells],
                 boundary_vertices=inv[disk_mesh.boundary_vertices],
                 boundary_normals=disk_mesh.boundary_normals,
                 h=disk_mesh.h, domain=disk_mesh.domain)
    E1 = energy(mesh2, SPEC, 0.4, DiscreteField(mesh2, vals[perm]))
    assert abs(E1.total - E0.total) <= 1e-13 * max(1.0, abs(E0.total))


def test_potential_equals_F_for_nonnegative(disk_mesh):
    # positive-part cutoff inactive on nonnegative fields
    rng = np.random.default_rng(8)
    vals = np.abs(rng.normal(1.0, 0.5, len(disk_mesh.vertices)))
    E = energy(disk_mesh, SPEC, 0.4, DiscreteField(disk_mesh, vals))
    Eneg = energy(disk_mesh, SPEC, 0.4, DiscreteField(disk_mesh, -vals))
    assert E.potential_term > 0
    assert Eneg.potential_term == 0.0


def test_interpolated_bump_matches_radial_quadrature():
    spec = pure_power(2.0, 2, 3.0)
    prof = ground_state_cached(spec)
    eps = 0.3
    mesh = generate_mesh(geo.ball(1.0, 2), 0.05)
    u = interpolate(mesh, lambda x: profile_eval(
        prof, np.linalg.norm(x) / eps))
    E = energy(mesh, spec, eps, u).total
    from spikelab.radial import _energy_density
    dens = _energy_density(prof, spec)
    mask = prof.r <= 1.0 / eps
    oracle = (np.trapezoid(dens[mask] * prof.r[mask], prof.r[mask])
              * 2.0 * math.pi * eps ** 2)
    assert E == pytest.approx(oracle, rel=0.02)


def test_energy_rejects_nonpositive_eps(disk_mesh):
    v = DiscreteField(disk_mesh, np.zeros(len(disk_mesh.vertices)))
    with pytest.raises(ValueError):
        energy(disk_mesh, SPEC, 0.0, v)
