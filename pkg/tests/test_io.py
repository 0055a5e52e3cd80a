import numpy as np

from plastiq import io as pio
from plastiq.classify import classify_regions
from plastiq.characteristics import reconstruct_sigma, trace
from plastiq.mesh import BoundaryData, build_domain
from plastiq.solver import PlasticStrain
from plastiq.analytic import annulus, sample_fields


def _fields(h=0.2):
    oracle = annulus(1.0, 2.0, 0.0, 2.0)
    mesh = oracle.build_mesh(h)
    u, sigma = sample_fields(oracle, mesh)
    plastic = PlasticStrain(interior=np.zeros_like(sigma),
                            boundary=np.zeros(len(mesh.dirichlet)))
    return mesh, u, sigma, plastic


def test_fields_csv_roundtrip(tmp_path):
    mesh, u, sigma, plastic = _fields()
    prefix = str(tmp_path / "fields")
    pio.write_fields_csv(prefix, mesh, u, sigma, plastic)
    back = pio.read_fields_csv(prefix)
    assert back["cell_header"][:4] == ["centroid_x", "centroid_y", "sigma_x", "sigma_y"]
    assert np.array_equal(back["cells"][:, 2:4], sigma)
    assert np.array_equal(back["cells"][:, :2], mesh.centroids)
    assert np.array_equal(back["vertices"][:, 2], u)


def test_regions_csv_roundtrip(tmp_path):
    mesh, u, sigma, _ = _fields()
    rm = classify_regions(sigma, mesh, 0.02)
    path = tmp_path / "regions.csv"
    pio.write_regions_csv(path, rm)
    labels, norms = pio.read_regions_csv(path)
    assert np.array_equal(labels, rm.labels)
    assert np.array_equal(norms, np.linalg.norm(sigma, axis=1))


def test_polylines_roundtrip(tmp_path):
    lines = [np.array([[0.0, 0.0], [1.0, 0.5], [2.0, 0.25]]),
             np.array([[5.0, 5.0], [6.0, 6.0]])]
    path = tmp_path / "lines.csv"
    pio.write_polylines_csv(path, lines)
    back = pio.read_polylines_csv(path)
    assert len(back) == 2
    for a, b in zip(lines, back):
        assert np.array_equal(a, b)


def test_characteristics_csv_roundtrip(tmp_path):
    mesh, u, sigma, _ = _fields()
    f = reconstruct_sigma(sigma, mesh, u=u)
    chars = [trace(f, (1.5, 0.0), step=0.1, max_length=1.0),
             trace(f, (0.0, 1.5), step=0.1, max_length=1.0)]
    path = tmp_path / "chars.csv"
    pio.write_characteristics_csv(path, chars)
    back = pio.read_characteristics_csv(path)
    assert set(back) == {0, 1}
    for i, ch in enumerate(chars):
        assert np.array_equal(back[i][:, 1:3], ch.points)
        assert np.array_equal(back[i][:, 3:5], ch.sigma_samples)
        assert np.array_equal(back[i][:, 5], ch.u_samples)


def test_vtk_roundtrip(tmp_path):
    mesh, u, sigma, plastic = _fields()
    path = tmp_path / "fields.vtk"
    pio.write_vtk(path, mesh, point_data={"u": u},
                  cell_data={"sigma": sigma, "sigma_norm": np.linalg.norm(sigma, axis=1)})
    back = pio.read_vtk(path)
    assert np.array_equal(back["points"], mesh.vertices)
    assert np.array_equal(back["triangles"], mesh.triangles)
    assert np.array_equal(back["point_data"]["u"], u)
    assert np.array_equal(back["cell_data"]["sigma"], sigma)
    assert np.array_equal(back["cell_data"]["sigma_norm"], np.linalg.norm(sigma, axis=1))


def test_report_json_roundtrip_and_determinism(tmp_path):
    report = {
        "residuals": {"div_interior_max": 1.25e-9, "ball_violation_max": 0.0},
        "arrays": np.arange(4).reshape(2, 2),
        "flag": np.bool_(True),
        "count": np.int64(7),
    }
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    pio.write_report_json(p1, report)
    pio.write_report_json(p2, report)
    assert p1.read_bytes() == p2.read_bytes()
    back = pio.read_report_json(p1)
    assert back["residuals"]["div_interior_max"] == 1.25e-9
    assert back["arrays"] == [[0, 1], [2, 3]]
    assert back["flag"] is True
    assert back["count"] == 7
