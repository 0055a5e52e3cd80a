import numpy as np
import pytest

from plastiq.analytic import (
    ELASTIC,
    OUTSIDE,
    PLASTIC,
    annulus,
    compare,
    macclintock,
    make_oracle,
    monotone_fan,
    sample_fields,
    sample_triple,
    triangle_apexes,
    triangle_sigma,
    truncated_gradient_energy,
)
from plastiq.mesh import MeshError


def test_macclintock_point_value():
    # elastic displacement at (r, theta) = ((a+b)/2, pi/2) for a=1, b=2
    oracle = macclintock(1.0, 2.0)
    r = 1.5
    pt = np.array([[r * np.cos(np.pi / 2), r * np.sin(np.pi / 2)]])
    expected = 2.0 * np.sqrt(1.0 * r) * np.sin(np.pi / 4)  # = sqrt(3)
    assert oracle.u(pt)[0] == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(np.sqrt(3.0), rel=1e-14)


def test_macclintock_elastic_norm_below_one():
    oracle = macclintock(1.0, 2.0)
    rng = np.random.default_rng(0)
    r = rng.uniform(1.01, 1.99, 500)
    th = rng.uniform(0.01, np.pi - 0.01, 500)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    norms = np.linalg.norm(oracle.sigma(pts), axis=1)
    assert np.abs(norms - np.sqrt(1.0 / r)).max() < 1e-12
    assert norms.max() < 1.0


def test_macclintock_sigma_continuous_across_interface():
    # the elastic branch evaluated on r = a equals the fan vortex there; this
    # pins the orientation convention of the stress components
    oracle = macclintock(1.0, 2.0)
    # rounding in cos/sin is amplified by 1/distance-to-apex, so stay 1e-3 away
    th = np.linspace(1e-3, np.pi - 1e-3, 200)
    on_circle = np.column_stack([np.cos(th), np.sin(th)])
    fan_branch = oracle.sigma(on_circle)  # r <= a routes to the vortex formula
    er = np.column_stack([np.cos(th), np.sin(th)])
    et = np.column_stack([-np.sin(th), np.cos(th)])
    elastic_branch = np.sin(th / 2)[:, None] * er + np.cos(th / 2)[:, None] * et
    gap = np.linalg.norm(fan_branch - elastic_branch, axis=1)
    assert gap.max() <= 1e-12


def test_macclintock_u_continuous_across_interface():
    oracle = macclintock(1.0, 2.0)
    th = np.linspace(1e-6, np.pi - 1e-6, 200)
    inner = np.column_stack([(1.0 - 1e-12) * np.cos(th), (1.0 - 1e-12) * np.sin(th)])
    outer = np.column_stack([(1.0 + 1e-12) * np.cos(th), (1.0 + 1e-12) * np.sin(th)])
    assert np.abs(oracle.u(inner) - oracle.u(outer)).max() <= 1e-10
    assert oracle.plastic_boundary_jump is None


def test_macclintock_u_constant_on_fan_rays():
    oracle = macclintock(1.0, 2.0)
    apex = np.array([-1.0, 0.0])
    for phi in (0.3, 0.8, 1.2):
        t = np.linspace(0.05, 2 * np.cos(phi) - 0.05, 40)
        pts = apex + np.outer(t, [np.cos(phi), np.sin(phi)])
        vals = oracle.u(pts)
        assert np.ptp(vals) < 1e-12
        assert vals[0] == pytest.approx(2.0 * np.sin(phi), rel=1e-12)


def test_macclintock_rejects_bad_radii():
    with pytest.raises(MeshError):
        macclintock(2.0, 1.0)


def test_macclintock_region_predicate():
    oracle = macclintock(1.0, 2.0)
    pts = np.array([[0.5, 0.2], [1.5, 0.5], [0.0, 2.5], [0.5, -0.5]])
    assert list(oracle.region(pts)) == [PLASTIC, ELASTIC, OUTSIDE, OUTSIDE]


def test_annulus_jump_density():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    jump = oracle.plastic_boundary_jump
    assert jump["radius"] == 1.0
    assert jump["density"] == pytest.approx(2.0 - np.log(2.0), rel=1e-14)


def test_annulus_norm_profile():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    r = np.linspace(1.0, 2.0, 50)
    pts = np.column_stack([r, np.zeros_like(r)])
    norms = np.linalg.norm(oracle.sigma(pts), axis=1)
    assert np.abs(norms - 1.0 / r).max() < 1e-12
    assert norms[0] == pytest.approx(1.0)
    assert np.all(norms[1:] < 1.0)


def test_annulus_flow_rule_sign_identity():
    # d = +a requires beta - alpha - a ln(b/a) > 0 and conversely
    for a, b, alpha, beta in [(1.0, 2.0, 0.0, 2.0), (1.0, 3.0, 5.0, 0.0), (0.5, 2.0, -3.0, 0.0)]:
        oracle = annulus(a, b, alpha, beta)
        s = np.sign(beta - alpha)
        lhs = s * (beta - alpha - s * a * np.log(b / a))
        assert lhs == pytest.approx(abs(beta - alpha - s * a * np.log(b / a)), rel=1e-14)
        assert lhs > 0


def test_annulus_requires_large_gap():
    with pytest.raises(MeshError, match="ln"):
        annulus(1.0, 2.0, 0.0, 0.5)


def test_monotone_fan_structure():
    oracle = monotone_fan([0.0, np.pi / 2], [0.0, np.pi], 1.0)
    rng = np.random.default_rng(2)
    th = rng.uniform(0.01, np.pi / 2 - 0.01, 200)
    r = rng.uniform(0.05, 0.99, 200)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    # u depends only on the angle; sigma is the unit angular direction
    assert np.abs(oracle.u(pts) - 2.0 * th).max() < 1e-12
    sig = oracle.sigma(pts)
    assert np.abs(np.linalg.norm(sig, axis=1) - 1.0).max() < 1e-14
    assert np.abs(sig - np.column_stack([-np.sin(th), np.cos(th)])).max() < 1e-12
    # the interior plastic density is h'/r - 1 > 0 throughout
    dens = np.linalg.norm(oracle.plastic_density(pts), axis=1)
    assert np.abs(dens - (2.0 / r - 1.0)).max() < 1e-11
    assert dens.min() > 0


def test_monotone_fan_u_constant_on_rays():
    oracle = monotone_fan([0.0, np.pi / 2], [0.0, np.pi], 1.0)
    t = np.linspace(0.05, 0.95, 30)
    pts = np.column_stack([t * np.cos(0.8), t * np.sin(0.8)])
    assert np.ptp(oracle.u(pts)) < 1e-13


def test_monotone_fan_discontinuous_data_gives_discontinuous_u():
    # a near-step in the boundary table translates into a near-jump of u
    # across the characteristic ray through it
    eps = 1e-9
    oracle = monotone_fan([0.0, 0.7, 0.7 + eps, np.pi / 2], [0.0, 1.5, 3.0, 5.0], 1.0)
    below = oracle.u(np.array([[0.5 * np.cos(0.7 - 1e-6), 0.5 * np.sin(0.7 - 1e-6)]]))[0]
    above = oracle.u(np.array([[0.5 * np.cos(0.7 + 1e-5), 0.5 * np.sin(0.7 + 1e-5)]]))[0]
    assert above - below > 1.0


def test_monotone_fan_validation():
    with pytest.raises(MeshError, match="difference quotients"):
        monotone_fan([0.0, 1.0], [0.0, 0.5], 1.0)   # slope 0.5 <= 1
    with pytest.raises(MeshError):
        monotone_fan([0.0, 1.0], [0.0, 2.0], 1.5)   # radius > 1


def test_triangle_sigma_formula_in_top_band():
    oracle = triangle_sigma()
    pts = np.array([[0.1, 0.6], [0.2, 0.7], [0.05, 0.9]])
    b0 = np.array([0.5, 0.5])
    d = pts - b0
    rho = np.linalg.norm(d, axis=1)
    expected = np.column_stack([-d[:, 1], d[:, 0]]) / rho[:, None]
    assert np.abs(oracle.sigma(pts) - expected).max() < 1e-14


def test_triangle_sigma_unit_norm_inside():
    oracle = triangle_sigma()
    rng = np.random.default_rng(4)
    pts = []
    while len(pts) < 300:
        p = rng.uniform(0, 1, 2)
        if p[0] >= 0 and p[0] <= p[1] <= 1 - p[0] and p[0] + p[1] > 1e-3:
            pts.append(p)
    pts = np.array(pts)
    norms = np.linalg.norm(oracle.sigma(pts), axis=1)
    assert np.abs(norms - 1.0).max() < 1e-12


def test_triangle_sigma_outside():
    oracle = triangle_sigma()
    assert oracle.region(np.array([[0.6, 0.1]]))[0] == OUTSIDE
    assert oracle.u is None


def test_triangle_h1_energy_monotone_growth():
    oracle = triangle_sigma()
    mesh = oracle.build_mesh(2.0 ** -7)
    cuts = [2.0 ** -m for m in range(2, 7)]
    vals = truncated_gradient_energy(oracle, mesh, cuts)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1.5 * vals[0]


def test_sample_triple_compatibility():
    from plastiq.mesh import DIRICHLET, gradient
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    mesh = oracle.build_mesh(0.15)
    bd = oracle.boundary_data(mesh)
    u, sig, plastic = sample_triple(oracle, mesh, bd)
    assert np.abs(gradient(u, mesh) - sig - plastic.interior).max() == 0.0
    assert np.abs((bd.w - mesh.edge_trace(u, DIRICHLET)) - plastic.boundary).max() == 0.0


def test_oracle_invariants_sigma_is_gradient_on_elastic():
    # central finite differences of u against sigma at random elastic points
    rng = np.random.default_rng(8)
    cases = [
        (macclintock(1.0, 2.0), rng.uniform(1.1, 1.9, 100), rng.uniform(0.1, np.pi - 0.1, 100)),
        (annulus(1.0, 2.0, 0.0, 2.0), rng.uniform(1.05, 1.95, 100), rng.uniform(0, 2 * np.pi, 100)),
    ]
    for oracle, r, th in cases:
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        eps = 1e-6
        dx = (oracle.u(pts + [eps, 0]) - oracle.u(pts - [eps, 0])) / (2 * eps)
        dy = (oracle.u(pts + [0, eps]) - oracle.u(pts - [0, eps])) / (2 * eps)
        fd = np.column_stack([dx, dy])
        assert np.abs(fd - oracle.sigma(pts)).max() < 1e-7, oracle.name


def test_oracle_norm_bounds():
    for oracle in (macclintock(1.0, 2.0), annulus(1.0, 2.0, 0.0, 2.0),
                   monotone_fan([0.0, np.pi / 2], [0.0, np.pi], 1.0)):
        mesh = oracle.build_mesh(0.1)
        sig = oracle.sigma(mesh.centroids)
        region = oracle.region(mesh.centroids)
        norms = np.linalg.norm(sig, axis=1)
        assert norms.max() <= 1.0 + 1e-12
        plastic = region == PLASTIC
        if plastic.any():
            assert np.abs(norms[plastic] - 1.0).max() <= 1e-12


def test_compare_self_sampling():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    mesh = oracle.build_mesh(0.1)
    u, sig = sample_fields(oracle, mesh)
    rec = compare(oracle, u, sig, mesh)
    assert rec["u_rel_l2"] <= 1e-3      # interpolation error only
    assert rec["sigma_rel_l2"] <= 1e-3  # exact centroid samples
    confusion = rec["region_confusion"]
    assert confusion[ELASTIC, ELASTIC] == mesh.num_triangles


def test_compare_zero_fields_full_error():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    mesh = oracle.build_mesh(0.15)
    rec = compare(oracle, np.zeros(mesh.num_vertices),
                  np.zeros((mesh.num_triangles, 2)), mesh)
    assert rec["sigma_rel_l2"] == pytest.approx(1.0, abs=1e-12)


def test_compare_rejects_wrong_domain():
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    from plastiq.mesh import build_domain
    mesh = build_domain("rectangle", 0.2)  # not an annulus
    with pytest.raises(MeshError, match="incompatible"):
        compare(oracle, np.zeros(mesh.num_vertices),
                np.zeros((mesh.num_triangles, 2)), mesh)


def test_make_oracle_dispatch():
    oracle = make_oracle("annulus", {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0})
    assert oracle.name == "annulus"
    with pytest.raises(MeshError):
        make_oracle("nonexistent", {})


def test_triangle_apexes_table():
    pts = triangle_apexes(1)
    assert np.allclose(pts[0][2], [0.5, 0.5])    # b_0
    assert np.allclose(pts[1][2], [0.0, 0.5])    # a_1
    assert np.allclose(pts[2][2], [0.25, 0.25])  # b_1
    assert np.allclose(pts[3][2], [0.0, 0.25])   # a_2
