import math

import numpy as np
import pytest

from spikelab import geometry as geo
from spikelab.errors import MeshQualityFailure
from spikelab.meshing import generate_mesh


@pytest.fixture(scope="module")
def disk_mesh():
    return generate_mesh(geo.ball(1.0, 2), 0.2)


@pytest.fixture(scope="module")
def ball_mesh():
    return generate_mesh(geo.ball(1.0, 3), 0.2)


def test_disk_volume(disk_mesh):
    assert disk_mesh.total_volume() == pytest.approx(math.pi, rel=0.02)


def test_ball_volume(ball_mesh):
    assert ball_mesh.total_volume() == pytest.approx(4.0 / 3.0 * math.pi,
                                                    rel=0.02)


def test_boundary_vertices_on_analytic_boundary():
    d = geo.ellipse(2.0, 1.0)
    mesh = generate_mesh(d, 0.1)
    for i in mesh.boundary_vertices:
        x = mesh.vertices[i]
        assert abs((x[0] / 2.0) ** 2 + x[1] ** 2 - 1.0) < 1e-10


def test_refinement_scaling_2d():
    d = geo.ball(1.0, 2)
    n1 = len(generate_mesh(d, 0.2).cells)
    n2 = len(generate_mesh(d, 0.1).cells)
    assert n2 / n1 == pytest.approx(4.0, rel=0.30)


def test_positive_cell_volumes(disk_mesh, ball_mesh):
    assert np.all(disk_mesh.cell_volumes() > 0)
    assert np.all(ball_mesh.cell_volumes() > 0)


def test_deterministic_for_fixed_inputs():
    d = geo.ellipsoid(1.6, 1.0, 1.0)
    a = generate_mesh(d, 0.2)
    b = generate_mesh(d, 0.2)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.cells, b.cells)


def test_boundary_normals_unit(ball_mesh):
    norms = np.linalg.norm(ball_mesh.boundary_normals, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_rejects_nonpositive_h():
    with pytest.raises(ValueError):
        generate_mesh(geo.ball(1.0, 2), 0.0)


def test_rejects_too_coarse_h():
    with pytest.raises(ValueError, match="too coarse"):
        generate_mesh(geo.ball(1.0, 2), 0.5)


def test_ellipsoid_criterion_mesh_admissible():
    # the coarse quasilinear run needs h = 0.2 on the long ellipsoid
    mesh = generate_mesh(geo.ellipsoid(1.6, 1.0, 1.0), 0.2)
    exact = 4.0 / 3.0 * math.pi * 1.6
    assert mesh.total_volume() == pytest.approx(exact, rel=0.02)


def test_perturbed_disk_mesh_contains_cells_inside():
    d = geo.perturbed_disk(1.0, 0.1, 3)
    mesh = generate_mesh(d, 0.1)
    centroids = mesh.vertices[mesh.cells].mean(axis=1)
    for c in centroids:
        assert d.contains(c, tol=1e-8)
