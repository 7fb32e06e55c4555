import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikelab import geometry as geo
from spikelab.errors import (CollapseToZero, MeshTooCoarse, NoRoot, ZeroField)
from spikelab.fem import DiscreteField, energy
from spikelab.meshing import generate_mesh
from spikelab.nehari import (BoundaryBump, FromField, SolveConfig,
                             least_energy_solve, mountain_pass_value_check,
                             nehari_scale)
from spikelab.nonlinearity import pure_power

SPEC = pure_power(2.0, 2, 3.0)


@pytest.fixture(scope="module")
def mesh():
    return generate_mesh(geo.ball(1.0, 2), 0.1)


@pytest.fixture(scope="module")
def solved(mesh):
    P = mesh.vertices[mesh.boundary_vertices[0]]
    return least_energy_solve(
        mesh, SPEC, SolveConfig(eps=0.3, init=BoundaryBump(P=P)))


def _random_positive_field(mesh, seed=0):
    rng = np.random.default_rng(seed)
    return DiscreteField(mesh, np.abs(rng.normal(1.0, 0.5,
                                                 len(mesh.vertices))))


def test_zero_field_raises(mesh):
    with pytest.raises(ZeroField):
        nehari_scale(mesh, SPEC, 0.3,
                     DiscreteField(mesh, np.zeros(len(mesh.vertices))))


def test_no_positive_part_raises(mesh):
    vals = -np.ones(len(mesh.vertices))
    with pytest.raises(NoRoot):
        nehari_scale(mesh, SPEC, 0.3, DiscreteField(mesh, vals))


def test_scale_is_one_when_A_equals_B(mesh):
    u = _random_positive_field(mesh)
    t = nehari_scale(mesh, SPEC, 0.3, u)
    # at t*, the constraint holds by construction
    v = DiscreteField(mesh, t * u.values)
    E = energy(mesh, SPEC, 0.3, v)
    A = 2.0 * (E.grad_term + E.mass_term)
    B = 4.0 * E.potential_term
    assert A == pytest.approx(B, rel=1e-12)


@given(st.floats(min_value=0.05, max_value=20.0))
@settings(max_examples=20, deadline=None)
def test_scale_homogeneity(lam):
    mesh = generate_mesh(geo.ball(1.0, 2), 0.2)
    u = _random_positive_field(mesh, seed=4)
    t1 = nehari_scale(mesh, SPEC, 0.3, u)
    t2 = nehari_scale(mesh, SPEC, 0.3,
                      DiscreteField(mesh, lam * u.values))
    assert t2 * lam == pytest.approx(t1, rel=1e-10)


def test_solve_converges_with_boundary_peak(solved, mesh):
    assert solved.converged
    assert solved.c_eps > 0
    assert np.all(solved.u.values >= 0)
    # Theorem-predicted boundary spike: peak within one mesh size of
    # the boundary
    assert 1.0 - np.linalg.norm(solved.peak_location) <= mesh.h + 1e-12


def test_solve_residual_below_tolerance(solved):
    assert solved.residual < 1e-7


def test_nehari_t_is_one_at_convergence(solved, mesh):
    t = nehari_scale(mesh, SPEC, 0.3, solved.u)
    assert abs(t - 1.0) < 1e-6


def test_mountain_pass_check(solved, mesh):
    c_sup, c_en, gap = mountain_pass_value_check(mesh, SPEC, 0.3, solved.u)
    assert gap < 1e-6
    # grid max attained at t = 1 up to grid spacing
    ts = np.linspace(0.0, 3.0, 3001)
    E = energy(mesh, SPEC, 0.3, solved.u)
    vals = ts ** 2 * (E.grad_term + E.mass_term) - ts ** 4 * E.potential_term
    assert abs(ts[np.argmax(vals)] - 1.0) <= ts[1] - ts[0] + 1e-12


def test_two_boundary_sites_agree(mesh, solved):
    k = len(mesh.boundary_vertices) // 3
    P2 = mesh.vertices[mesh.boundary_vertices[k]]
    rep2 = least_energy_solve(
        mesh, SPEC, SolveConfig(eps=0.3, init=BoundaryBump(P=P2)))
    assert abs(rep2.c_eps - solved.c_eps) / solved.c_eps < 1e-4


def test_zero_init_collapses(mesh):
    zero = DiscreteField(mesh, np.zeros(len(mesh.vertices)))
    with pytest.raises(CollapseToZero):
        least_energy_solve(mesh, SPEC,
                           SolveConfig(eps=0.3, init=FromField(zero)))


def test_mesh_too_coarse(mesh):
    with pytest.raises(MeshTooCoarse):
        least_energy_solve(mesh, SPEC, SolveConfig(eps=0.2))


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(eps=1.5)
    with pytest.raises(ValueError):
        SolveConfig(eps=0.3, grad_tol=0.0)


def test_descent_is_monotone_over_history(mesh):
    # the ray-maximized energy never increases beyond the non-monotone
    # window; the converged value is the running minimum
    P = mesh.vertices[mesh.boundary_vertices[0]]
    rep = least_energy_solve(
        mesh, SPEC, SolveConfig(eps=0.35, init=BoundaryBump(P=P)))
    assert rep.converged
    assert rep.c_eps <= energy(mesh, SPEC, 0.35, rep.u).total + 1e-12
