import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvem.assembly import (OWNER_BOTH, OWNER_LARGER_KAPPA, OWNER_ONE_SIDED, OWNER_SMALLER_ID,
                             Problem, assemble, choose_stab_owner, export_coo, number_generators)
from curvem.element import GL, MOMENT, TGP, VERTEX
from curvem.errors import ConfigError, DataError, MeshError
from curvem.meshgen import replace_with_chords, square_circle_interface, square_straight
from curvem.poly2d import dim_pk
from curvem.problems import interface_jump, patch, smooth
from curvem.solve import interpolant_oracle

ZERO = lambda x, region: np.zeros(len(x))


def kinds(dofs, idx):
    return [dofs.slots[i].kind for i in idx]


# -- numbering -----------------------------------------------------------------------

def test_two_by_two_grid_k1_has_one_free_value():
    dofs = number_generators(square_straight(2), 1)
    assert dofs.size == 9 and len(dofs.free) == 1
    assert kinds(dofs, dofs.free) == [VERTEX]


def test_two_by_two_grid_k2_free_count():
    dofs = number_generators(square_straight(2), 2)
    assert len(dofs.free) == 9
    assert sorted(kinds(dofs, dofs.free)) == sorted([VERTEX] + [GL] * 4 + [MOMENT] * 4)


def test_constrained_values_follow_g_D():
    mesh = square_straight(2)
    dofs = number_generators(mesh, 2, lambda x: x[..., 0] + 10 * x[..., 1])
    for i, v in dofs.constrained.items():
        s = dofs.slots[i]
        if s.kind == VERTEX:
            p = mesh.vertices[s.entity]
            assert v == pytest.approx(p[0] + 10 * p[1])


@pytest.mark.parametrize("k", [1, 2, 3])
def test_curved_interior_edges_add_trace_slots(k):
    mesh = square_circle_interface(4)
    n_arcs = sum(e.is_curved for e in mesh.edges)
    curved = number_generators(mesh, k)
    straight = number_generators(replace_with_chords(mesh, "straight"), k)
    # a straight edge carries k - 1 slots; a curved interior one carries dim P_k - 2
    assert curved.size - straight.size == n_arcs * (dim_pk(k) - 2 - (k - 1))
    assert sum(s.kind == TGP for s in curved.slots) == n_arcs * (dim_pk(k) - 2)
    if k == 1:
        assert curved.size - straight.size == n_arcs


def test_dirichlet_tag_on_interior_edge_is_rejected():
    mesh = square_straight(2)
    adj = mesh.edge_elements()
    kid = next(i for i, a in enumerate(adj) if len(a) == 2)
    mesh.edges[kid].boundary = "dirichlet"
    with pytest.raises(MeshError):
        number_generators(mesh, 1)


def test_nonfinite_boundary_data_is_rejected():
    with pytest.raises(DataError):
        number_generators(square_straight(2), 1, lambda x: np.full(len(x), np.inf))


# -- ownership -----------------------------------------------------------------------

def _arcs(mesh):
    return [k for k, e in enumerate(mesh.edges) if e.is_curved]


def test_owner_policies_on_a_coefficient_jump():
    mesh = square_circle_interface(4, kappa=(100.0, 1.0))
    adj = mesh.edge_elements()
    for policy, pick in [(OWNER_SMALLER_ID, lambda a, b: {min(a, b)}),
                         (OWNER_ONE_SIDED, lambda a, b: {min(a, b)}),
                         (OWNER_BOTH, lambda a, b: {a, b})]:
        own = choose_stab_owner(mesh, policy)
        for kid in _arcs(mesh):
            assert own[kid] == pick(*adj[kid])
    own = choose_stab_owner(mesh, OWNER_LARGER_KAPPA)
    for kid in _arcs(mesh):
        (eid,) = own[kid]
        assert mesh.elements[eid].region == 0


def test_equal_coefficients_stabilize_both_sides():
    mesh = square_circle_interface(4)
    own = choose_stab_owner(mesh, OWNER_SMALLER_ID)
    assert all(len(v) == 2 for v in own.values())
    own = choose_stab_owner(mesh, OWNER_SMALLER_ID, kappa={0: 5.0, 1: 1.0})
    assert all(len(v) == 1 for v in own.values())


def test_unknown_policy():
    with pytest.raises(ConfigError):
        choose_stab_owner(square_circle_interface(4), "random")


def test_masks_drop_only_non_owner_trace_slots():
    mesh = square_circle_interface(4, kappa=(100.0, 1.0))
    sys = assemble(mesh, Problem(ZERO), 2)
    own = choose_stab_owner(mesh)
    for ops, mask in zip(sys.operators, sys.masks):
        for i, s in enumerate(ops.layout.slots):
            dropped = s.kind == TGP and ops.eid not in own[s.entity]
            assert mask[i] == (0.0 if dropped else 1.0)


# -- global system ---------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_constants_are_in_the_kernel_of_a_h(k):
    mesh = square_circle_interface(4, kappa=(100.0, 1.0))
    sys = assemble(mesh, Problem(ZERO), k)
    one = interpolant_oracle(mesh, sys, lambda x, r: np.ones(len(x))).g
    assert np.abs(sys.A @ one).max() < 1e-11 * abs(sys.A).max()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_patch_interpolant_satisfies_the_discrete_equations(k):
    prob = patch(k)
    mesh = prob.mesh(4)
    sys = assemble(mesh, prob.as_problem(), k)
    g = interpolant_oracle(mesh, sys, prob.u).g
    free = sys.dofs.free
    r = (sys.K @ g - sys.F)[free]
    scale = (abs(sys.K) @ np.abs(g) + np.abs(sys.F))[free]
    assert np.all(np.abs(r) <= 1e-12 * scale)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 3))
def test_traces_agree_across_shared_edges(seed, k):
    mesh = square_circle_interface(4)
    sys = assemble(mesh, Problem(ZERO), k)
    g = np.random.default_rng(seed).normal(size=sys.dofs.size)
    adj = mesh.edge_elements()
    by_eid = {ops.eid: ops for ops in sys.operators}
    for kid, elems in enumerate(adj):
        if len(elems) != 2:
            continue
        vals = []
        for eid in elems:
            ops = by_eid[eid]
            loc = [i for i, (kk, _) in enumerate(ops.geom.loop) if kk == kid][0]
            gl = g[sys.dofs.globals_of(ops.layout)]
            vals.append(ops.traces[loc] @ np.concatenate([gl, np.zeros(ops.n_psi)]))
        np.testing.assert_allclose(vals[0], vals[1], atol=1e-11 * np.abs(g).max())


def test_assembly_is_deterministic():
    prob = interface_jump()
    mesh = prob.mesh(4)
    a = assemble(mesh, prob.as_problem(), 2)
    b = assemble(prob.mesh(4), prob.as_problem(), 2)
    np.testing.assert_array_equal(a.K.toarray(), b.K.toarray())
    np.testing.assert_array_equal(a.F, b.F)


def test_policies_coincide_without_a_jump():
    prob = smooth()
    mesh = prob.mesh(4)
    a = assemble(mesh, prob.as_problem(), 2, policy=OWNER_SMALLER_ID)
    b = assemble(mesh, prob.as_problem(), 2, policy=OWNER_BOTH)
    c = assemble(mesh, prob.as_problem(), 2, policy=OWNER_ONE_SIDED)
    assert abs(a.K - b.K).max() == 0.0
    assert abs(a.K - c.K).max() > 0.0


def test_nonfinite_load_raises():
    with pytest.raises(DataError):
        assemble(square_straight(2), Problem(lambda x, r: np.full(len(x), np.nan)), 1)


def test_coo_export_round_trip(tmp_path):
    prob = interface_jump()
    sys = assemble(prob.mesh(4), prob.as_problem(), 1)
    path = tmp_path / "K.txt"
    export_coo(sys, path)
    data = np.loadtxt(path)
    K = np.zeros(sys.K.shape)
    np.add.at(K, (data[:, 0].astype(int), data[:, 1].astype(int)), data[:, 2])
    np.testing.assert_array_equal(K, sys.K.toarray())
