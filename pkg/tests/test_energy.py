import numpy as np
import pytest

from plastiq.energy import (
    eval_W,
    flow_rule_residual,
    primal_energy,
    project_ball,
    split_infconv,
    triple_energy,
    verify_safe_load,
)
from plastiq.mesh import BoundaryData, MeshError, build_domain, gradient
from plastiq.analytic import annulus, sample_triple


def test_eval_W_values():
    assert eval_W([0.0, 0.0]) == 0.0
    assert eval_W([0.6, 0.8]) == pytest.approx(0.5, abs=1e-15)
    # both branches agree at the threshold
    assert abs(0.5 * 1.0 - (1.0 - 0.5)) == 0.0
    assert eval_W([3.0, 4.0]) == pytest.approx(4.5, abs=1e-15)


def test_eval_W_convexity():
    rng = np.random.default_rng(3)
    x1 = rng.uniform(-4, 4, (1000, 2))
    x2 = rng.uniform(-4, 4, (1000, 2))
    t = rng.uniform(0, 1, 1000)
    mix = t[:, None] * x1 + (1 - t[:, None]) * x2
    assert np.all(eval_W(mix) <= t * eval_W(x1) + (1 - t) * eval_W(x2) + 1e-12)


def test_split_inside_ball():
    s = split_infconv([0.5, 0.0])
    assert np.allclose(s.sigma, [0.5, 0.0])
    assert np.all(s.p == 0.0)


def test_split_outside_ball():
    s = split_infconv([3.0, 4.0])
    assert np.allclose(s.sigma, [0.6, 0.8], atol=1e-15)
    assert np.allclose(s.p, [2.4, 3.2], atol=1e-14)
    val = 0.5 * np.sum((np.array([3.0, 4.0]) - s.p) ** 2) + np.hypot(*s.p)
    assert val == pytest.approx(4.5, abs=1e-14)


def test_split_value_matches_W_randomly():
    rng = np.random.default_rng(11)
    xi = rng.uniform(-5, 5, (1000, 2))
    s = split_infconv(xi)
    vals = 0.5 * np.einsum("ij,ij->i", xi - s.p, xi - s.p) + np.linalg.norm(s.p, axis=1)
    assert np.abs(vals - eval_W(xi)).max() <= 1e-12
    # structural invariants of the decomposition (exact up to one rounding)
    assert np.abs(s.sigma + s.p - xi).max() <= 1e-15 * np.abs(xi).max()
    assert np.linalg.norm(s.sigma, axis=1).max() <= 1.0 + 1e-15
    inside = np.linalg.norm(xi, axis=1) <= 1.0
    assert np.all(s.p[inside] == 0.0)
    outside = ~inside
    cross = s.p[outside, 0] * s.sigma[outside, 1] - s.p[outside, 1] * s.sigma[outside, 0]
    assert np.abs(cross).max() < 1e-12
    assert np.all(np.einsum("ij,ij->i", s.p[outside], s.sigma[outside]) >= 0.0)


def test_split_beats_brute_force_grid():
    rng = np.random.default_rng(4)
    grid = np.linspace(-4.0, 4.0, 81)
    P = np.stack(np.meshgrid(grid, grid), axis=-1).reshape(-1, 2)
    res = grid[1] - grid[0]
    for xi in rng.uniform(-3, 3, (25, 2)):
        brute = float((0.5 * np.einsum("ij,ij->i", xi - P, xi - P)
                       + np.linalg.norm(P, axis=1)).min())
        split_val = float(eval_W(xi))
        assert split_val <= brute + 1e-12
        assert brute - split_val <= 2.0 * res  # the grid comes close to the true minimum


def test_project_ball():
    assert np.allclose(project_ball([0.3, -0.4]), [0.3, -0.4])
    assert np.allclose(project_ball([0.0, -5.0]), [0.0, -1.0])
    rng = np.random.default_rng(5)
    v = rng.uniform(-6, 6, (1000, 2))
    p1 = project_ball(v)
    assert np.abs(project_ball(p1) - p1).max() <= 1e-15
    assert np.abs(p1 - split_infconv(v).sigma).max() == 0.0


def test_primal_energy_zero_fields():
    mesh = build_domain("rectangle", 0.25)
    bd = BoundaryData.from_functions(mesh, w=0.0)
    assert primal_energy(np.zeros(mesh.num_vertices), mesh, bd) == 0.0


def test_primal_energy_pure_penalty_is_perimeter():
    mesh = build_domain("rectangle", 0.25)
    bd = BoundaryData.from_functions(mesh, w=1.0)
    assert primal_energy(np.zeros(mesh.num_vertices), mesh, bd) == pytest.approx(4.0, abs=1e-12)


def _annulus_exact_energy(a, b, alpha, beta):
    # interior: W(grad u) = (a/r)^2 / 2, integrated in polar coordinates;
    # penalty: jump at r = a only
    from scipy.integrate import quad
    inner = quad(lambda r: 0.5 * (a / r) ** 2 * 2 * np.pi * r, a, b)[0]
    jump = abs((np.sign(beta - alpha) * a * np.log(a / b) + beta) - alpha)
    return inner + 2 * np.pi * a * jump


def test_primal_energy_approaches_annulus_value():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    exact = _annulus_exact_energy(1.0, 2.0, 0.0, 2.0)
    errs = []
    for h in (0.2, 0.1, 0.05):
        mesh = oracle.build_mesh(h)
        bd = oracle.boundary_data(mesh)
        u = oracle.u(mesh.vertices)
        errs.append(abs(primal_energy(u, mesh, bd) - exact))
    assert errs[-1] < errs[0]
    assert errs[-1] < 5e-3 * exact


def test_triple_energy_zero_fields():
    mesh = build_domain("rectangle", 0.25)
    bd = BoundaryData.from_functions(mesh, w=0.0)
    val = triple_energy(np.zeros(mesh.num_vertices),
                        np.zeros((mesh.num_triangles, 2)),
                        np.zeros((mesh.num_triangles, 2)),
                        np.zeros(len(mesh.dirichlet)), mesh, bd)
    assert val == 0.0


def test_triple_energy_equals_primal_under_split():
    mesh = build_domain("half_disk", 0.2, radius=1.0)
    bd = BoundaryData.from_functions(mesh, w=lambda m: m[0] - 2 * m[1])
    rng = np.random.default_rng(9)
    u = rng.uniform(-2, 2, mesh.num_vertices)
    s = split_infconv(gradient(u, mesh))
    from plastiq.mesh import DIRICHLET
    p_b = bd.w - mesh.edge_trace(u, DIRICHLET)
    lhs = triple_energy(u, s.sigma, s.p, p_b, mesh, bd)
    rhs = primal_energy(u, mesh, bd)
    assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1.0)


def test_triple_energy_dominates_primal_for_any_compatible_split():
    mesh = build_domain("rectangle", 0.25)
    bd = BoundaryData.from_functions(mesh, w=lambda m: 3 * m[0])
    rng = np.random.default_rng(13)
    u = rng.uniform(-1, 1, mesh.num_vertices)
    grad = gradient(u, mesh)
    from plastiq.mesh import DIRICHLET
    p_b = bd.w - mesh.edge_trace(u, DIRICHLET)
    primal = primal_energy(u, mesh, bd)
    for _ in range(5):
        sigma = project_ball(rng.uniform(-1.5, 1.5, grad.shape))
        val = triple_energy(u, sigma, grad - sigma, p_b, mesh, bd)
        assert val >= primal - 1e-10


def test_triple_energy_rejects_incompatible_split():
    mesh = build_domain("rectangle", 0.25)
    bd = BoundaryData.from_functions(mesh, w=0.0)
    u = np.zeros(mesh.num_vertices)
    p = np.zeros((mesh.num_triangles, 2))
    p[3, 0] = 1e-4  # gradient split broken on cell 3
    with pytest.raises(MeshError, match="cell 3"):
        triple_energy(u, np.zeros_like(p), p, np.zeros(len(mesh.dirichlet)), mesh, bd)


def test_flow_rule_residual_zero_strain():
    mesh = build_domain("rectangle", 0.25)
    sigma = np.tile([0.5, 0.1], (mesh.num_triangles, 1))
    rc, re = flow_rule_residual(sigma, np.zeros_like(sigma), np.zeros(len(mesh.dirichlet)),
                                mesh, np.zeros(len(mesh.dirichlet)))
    assert np.abs(rc).max() == 0.0
    assert np.abs(re).max() == 0.0


def test_flow_rule_residual_vanishes_on_split():
    mesh = build_domain("rectangle", 0.25)
    rng = np.random.default_rng(21)
    xi = rng.uniform(1.1, 3.0, (mesh.num_triangles, 2))
    s = split_infconv(xi)
    rc, _ = flow_rule_residual(s.sigma, s.p, np.zeros(len(mesh.dirichlet)), mesh,
                               np.zeros(len(mesh.dirichlet)))
    assert np.abs(rc).max() <= 1e-12
    assert rc.min() >= -1e-9


def test_flow_rule_residual_annulus_boundary_vanishes_with_h():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    prev = None
    for h in (0.2, 0.1, 0.05):
        mesh = oracle.build_mesh(h)
        bd = oracle.boundary_data(mesh)
        u, sig, plast = sample_triple(oracle, mesh, bd)
        snu = mesh.normal_trace(sig, mesh.dirichlet)
        _, re = flow_rule_residual(sig, plast.interior, plast.boundary, mesh, snu)
        inner = np.hypot(*mesh.boundary_midpoints[mesh.dirichlet].T) < 1.5
        res = float(np.abs(re[inner]).max())
        if prev is not None:
            assert res < prev
        prev = res
    assert prev < 0.05


def test_flow_rule_rejects_constraint_violation():
    mesh = build_domain("rectangle", 0.25)
    sigma = np.tile([1.5, 0.0], (mesh.num_triangles, 1))
    with pytest.raises(MeshError, match="unit-ball"):
        flow_rule_residual(sigma, np.zeros_like(sigma), np.zeros(len(mesh.dirichlet)),
                           mesh, np.zeros(len(mesh.dirichlet)))


def test_safe_load_zero_certificate():
    mesh = build_domain("rectangle", 0.25)
    rep = verify_safe_load(np.zeros((mesh.num_triangles, 2)), np.zeros(len(mesh.neumann)),
                           0.5, mesh)
    assert rep["passes"]


def test_safe_load_constant_certificate():
    mesh = build_domain("rectangle", 0.25)
    mesh = mesh.with_markers(lambda mid, kind, seg: ("neumann" if seg in (1, 3) else "dirichlet", seg))
    alpha = 0.7
    tau = np.tile([alpha, 0.0], (mesh.num_triangles, 1))
    g = mesh.normal_trace(tau, mesh.neumann)
    rep = verify_safe_load(tau, g, alpha, mesh)
    assert rep["passes"]
    assert rep["div_residual_max"] <= 1e-12


def test_safe_load_fails_on_saturated_field():
    mesh = build_domain("rectangle", 0.25)
    tau = np.tile([1.0, 0.0], (mesh.num_triangles, 1))
    rep = verify_safe_load(tau, np.zeros(len(mesh.neumann)), 0.9, mesh)
    assert not rep["passes"]
