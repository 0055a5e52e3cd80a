import json

import numpy as np
import pytest

from plastiq.cli import (
    ConfigError,
    load_config,
    main,
    print_schema,
    run_pipeline,
    verify_analytic,
)


def _write(tmp_path, cfg, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_schema_lists_every_field(capsys):
    print_schema()
    out = capsys.readouterr().out
    assert "eps_sat = 0.02" in out
    assert "solver.theta = 1.0" in out
    for field in ("domain.name", "domain.edge_length", "fields", "boundary.segments",
                  "solver.max_iter", "solver.tol", "solver.step_ratio", "solver.init",
                  "tracing.seed_strategy", "analyses", "output_dir", "workers", "figures"):
        assert field in out


def test_schema_subcommand_exit_code():
    assert main(["schema"]) == 0


def test_missing_dirichlet_segment_named(tmp_path):
    cfg = {
        "domain": {"name": "rectangle", "edge_length": 0.25},
        "boundary": {"from_oracle": False,
                     "segments": {"0": {"kind": "dirichlet", "value": 0.0},
                                  "1": {"kind": "dirichlet", "value": 0.0},
                                  "2": {"kind": "dirichlet", "value": 1.0}}},
        "analyses": [],
        "output_dir": str(tmp_path / "out"),
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 1
    with pytest.raises(ConfigError, match="segment 3"):
        run_pipeline(load_config(p), tmp_path / "out")


def test_invalid_json_reports_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{ not json }")
    with pytest.raises(ConfigError, match="line 1"):
        load_config(p)


def test_unknown_field_rejected(tmp_path):
    p = _write(tmp_path, {"domain": {"name": "rectangle", "edge_length": 0.2},
                          "bogus": 1})
    with pytest.raises(ConfigError, match="bogus"):
        load_config(p)


def test_oracle_fields_classify_without_solve(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.1},
        "fields": "oracle",
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0}},
        "analyses": ["classify"],
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["solve"] is None           # pipeline gating: no solve performed
    assert "classify" in rep["analyses"]
    assert (tmp_path / "out" / "regions.csv").exists()
    assert not (tmp_path / "out" / "timing.txt").exists()


def test_report_json_bit_identical_across_runs(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.15},
        "fields": "solve",
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0}},
        "solver": {"max_iter": 3000, "tol": 1e-6},
        "analyses": ["classify", "compare"],
        "figures": False,
        "workers": 1,
    }
    p = _write(tmp_path, cfg)
    cfg["output_dir"] = str(tmp_path / "a")
    _write(tmp_path, cfg, "a.json")
    cfg["output_dir"] = str(tmp_path / "b")
    _write(tmp_path, cfg, "b.json")
    assert main(["run", str(tmp_path / "a.json")]) == 0
    assert main(["run", str(tmp_path / "b.json")]) == 0
    ra = (tmp_path / "a" / "report.json").read_bytes()
    rb = (tmp_path / "b" / "report.json").read_bytes()
    # identical config except the output path; strip it before comparing
    ja = json.loads(ra); jb = json.loads(rb)
    ja["config"]["output_dir"] = jb["config"]["output_dir"] = ""
    assert json.dumps(ja, sort_keys=True) == json.dumps(jb, sort_keys=True)


def test_exit_2_when_not_converged(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.2},
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0}},
        "solver": {"max_iter": 60, "tol": 1e-12},
        "analyses": [],
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 2


def test_exit_3_on_failed_assertion(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.15},
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0}},
        "solver": {"max_iter": 5000, "tol": 1e-6},
        "analyses": ["compare"],
        "assertions": {"sigma_rel_l2_max": 1e-9},  # unattainable at this h
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 3


def test_boundary_tables_interpolated(tmp_path):
    # left and right edges Dirichlet via arc-length tables, top/bottom Neumann
    cfg = {
        "domain": {"name": "rectangle", "edge_length": 0.25},
        "boundary": {"from_oracle": False,
                     "segments": {"0": {"kind": "neumann", "value": 0.0},
                                  "1": {"kind": "dirichlet",
                                        "table": [[0.0, 0.0], [1.0, 1.0]]},
                                  "2": {"kind": "neumann", "value": 0.0},
                                  "3": {"kind": "dirichlet", "value": 0.0}}},
        "solver": {"max_iter": 20000, "tol": 1e-6},
        "analyses": ["classify", "safe-load"],
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["analyses"]["safe_load"]["passes"]  # zero data, zero certificate


def test_cli_figures_written(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.2},
        "fields": "oracle",
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0}},
        "analyses": ["classify", "trace"],
        "output_dir": str(tmp_path / "out"),
        "figures": True,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 0
    for name in ("regions.png", "displacement.png", "characteristics.png"):
        assert (tmp_path / "out" / name).exists(), name


def test_cli_out_and_seed_flags(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.2},
        "fields": "oracle",
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0}},
        "analyses": ["classify"],
        "output_dir": str(tmp_path / "ignored"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p), "--out", str(tmp_path / "flagged"), "--seed", "9"]) == 0
    rep = json.loads((tmp_path / "flagged" / "report.json").read_text())
    assert rep["config"]["solver"]["seed"] == 9
    assert not (tmp_path / "ignored").exists()


def test_bad_oracle_params_exit_1(tmp_path):
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.2},
        "fields": "oracle",
        "oracle": {"name": "annulus",
                   "params": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 0.1}},
        "analyses": [],
        "output_dir": str(tmp_path / "out"),
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 1


def test_verify_analytic_annulus_passes(capsys):
    assert verify_analytic("annulus", 0.1)
    out = capsys.readouterr().out
    assert "PASS" in out


def test_verify_analytic_cli_exit():
    assert main(["verify-analytic", "annulus", "0.15"]) == 0


def test_shipped_annulus_config_meets_error_bounds(tmp_path):
    from pathlib import Path
    cfg = json.loads((Path(__file__).parent.parent / "configs"
                      / "annulus-dirichlet.json").read_text())
    cfg["output_dir"] = str(tmp_path / "out")
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["analyses"]["compare"]["u_rel_l2"] <= 0.02


def test_every_written_file_is_reloadable(tmp_path):
    from plastiq import io as pio
    from plastiq.mesh import load_mesh
    cfg = {
        "domain": {"name": "from_oracle", "edge_length": 0.15},
        "fields": "oracle",
        "oracle": {"name": "macclintock", "params": {"a": 1.0, "b": 2.0}},
        "analyses": ["classify", "trace", "fans", "levels", "audit"],
        "tracing": {"spacing": 0.4, "max_length": 3.0},
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 0
    out = tmp_path / "out"
    mesh = load_mesh(out / "mesh.txt")
    fields = pio.read_fields_csv(str(out / "fields"))
    assert len(fields["cells"]) == mesh.num_triangles
    assert len(fields["vertices"]) == mesh.num_vertices
    labels, norms = pio.read_regions_csv(out / "regions.csv")
    assert len(labels) == mesh.num_triangles
    pio.read_polylines_csv(out / "interface.csv")
    pio.read_polylines_csv(out / "char_boundary.csv")
    chars = pio.read_characteristics_csv(out / "characteristics.csv")
    assert len(chars) > 0
    vtk = pio.read_vtk(out / "fields.vtk")
    assert np.array_equal(vtk["points"], mesh.vertices)
    rep = pio.read_report_json(out / "report.json")
    assert rep["mesh"]["triangles"] == mesh.num_triangles


def test_mesh_file_reloadable(tmp_path):
    from plastiq.mesh import load_mesh
    cfg = {
        "domain": {"name": "rectangle", "edge_length": 0.25},
        "boundary": {"from_oracle": False,
                     "segments": {str(i): {"kind": "dirichlet", "value": 0.0}
                                  for i in range(4)}},
        "solver": {"max_iter": 100, "tol": 1e-10},
        "analyses": [],
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    p = _write(tmp_path, cfg)
    assert main(["run", str(p)]) == 0
    mesh = load_mesh(tmp_path / "out" / "mesh.txt")
    assert mesh.num_vertices == 25
