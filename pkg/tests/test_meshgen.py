import numpy as np
import pytest

from curvem.errors import ConfigError
from curvem.geometry import CircularArc, mesh_diagnostics
from curvem.meshgen import (GENERATORS, disk_boundary, generate, l_shape, replace_with_chords,
                            reparametrize, square_circle_interface, square_straight)


def total_area(mesh, region=None):
    return sum(mesh.geometry(e, 3, 16).area for e, el in enumerate(mesh.elements)
               if region is None or el.region == region)


def test_interface_edges_are_arcs_between_regions():
    mesh = square_circle_interface(4, 0.3)
    adj = mesh.edge_elements()
    arcs = [k for k, e in enumerate(mesh.edges) if e.is_curved]
    assert len(arcs) == 8
    for k in arcs:
        assert isinstance(mesh.edges[k].curve, CircularArc)
        a, b = adj[k]
        assert mesh.elements[a].region != mesh.elements[b].region
        assert mesh.edges[k].boundary == "interior"


@pytest.mark.parametrize("n", [4, 8, 16])
def test_element_count_scales_with_n_squared(n):
    assert len(square_circle_interface(n).elements) == 5 * n * n // 4
    assert len(disk_boundary(n).elements) == n * n // 4 + 2 * n * max(1, n // 4)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_areas(n):
    mesh = square_circle_interface(n, 0.3)
    assert total_area(mesh) == pytest.approx(1.0, abs=1e-13)
    assert total_area(mesh, 1) == pytest.approx(np.pi * 0.09, abs=1e-13)
    assert total_area(disk_boundary(n)) == pytest.approx(np.pi, abs=1e-12)


@pytest.mark.parametrize("name", sorted(GENERATORS))
@pytest.mark.parametrize("n", [4, 8, 16])
def test_shape_regularity(name, n):
    diag = mesh_diagnostics(generate(name, n=n))
    assert diag["theta_min"] >= 0.1
    assert diag["theta1_min"] >= 0.1


@pytest.mark.parametrize("gen", [square_circle_interface, disk_boundary])
def test_mesh_size_ratio_tends_to_one_half(gen):
    h = [mesh_diagnostics(gen(n))["h_max"] for n in (4, 8, 16, 32)]
    ratios = np.array(h[1:]) / np.array(h[:-1])
    assert np.all(ratios < 0.65) and np.all(np.diff(ratios) < 0)
    assert ratios[-1] == pytest.approx(0.5, abs=0.04)


def test_disk_boundary_tags():
    tags = lambda m: {e.boundary for e in m.edges if e.is_curved}
    assert tags(disk_boundary(4)) == {"dirichlet"}
    assert tags(disk_boundary(4, "robin")) == {"robin"}
    assert tags(disk_boundary(4, "mixed")) == {"dirichlet", "robin"}


def test_square_side_tags():
    mesh = square_straight(3, sides={"right": "robin"})
    for e in mesh.edges:
        if e.boundary == "robin":
            assert mesh.vertices[e.v0][0] == mesh.vertices[e.v1][0] == 1.0


def test_l_shape_area():
    assert total_area(l_shape(2)) == pytest.approx(3.0)


def test_chords_and_reparametrization():
    mesh = square_circle_interface(4)
    for declared in ("curved", "straight"):
        ch = replace_with_chords(mesh, declared)
        assert all(e.curve.is_straight() for e in ch.edges)
        assert sum(e.is_curved for e in ch.edges) == (8 if declared == "curved" else 0)
    rp = reparametrize(mesh)
    assert total_area(rp) == pytest.approx(1.0, abs=1e-12)
    assert total_area(rp, 1) == pytest.approx(total_area(mesh, 1), rel=1e-10)


@pytest.mark.parametrize("call", [
    lambda: square_circle_interface(5),
    lambda: square_circle_interface(4, 0.6),
    lambda: disk_boundary(2),
    lambda: disk_boundary(4, "neumann"),
    lambda: square_straight(0),
    lambda: l_shape(0),
    lambda: generate("hexagons", n=4),
])
def test_bad_parameters(call):
    with pytest.raises(ConfigError):
        call()
