"""Batch front end: configure, run the pipeline, emit files, figures, and a report.

Exit status: 0 when every requested assertion passes, 1 on configuration
errors, 2 when the solver did not converge, 3 when an assertion fails.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from . import io as pio
from . import report as figs
from .analytic import compare, make_oracle, sample_triple
from .characteristics import (detect_fans, level_set_alignment, no_loop_audit,
                              reconstruct_sigma, seed_grid, trace)
from .classify import (characteristic_boundary, classify_regions, convexity_check,
                       elastic_diagnostics)
from .energy import verify_safe_load
from .mesh import DIRICHLET, NEUMANN, BoundaryData, MeshError, build_domain, save_mesh
from .solver import SolverConfig, kkt_residuals, solve, uniqueness_probe

ANALYSES = ("classify", "trace", "fans", "levels", "audit", "compare",
            "uniqueness-probe", "safe-load")

# (path, default, description); None defaults mean "required" or "derived"
SCHEMA = [
    ("domain.name", None, "one of rectangle, disk, annulus, half_disk, fan_sector, "
                          "triangle, or from_oracle"),
    ("domain.edge_length", None, "target mesh edge length (> 0)"),
    ("domain.params", {}, "builder parameters, e.g. {\"inner\": 1.0, \"outer\": 2.0}"),
    ("fields", "solve", "field source: solve | oracle"),
    ("oracle.name", None, "optional closed-form solution: macclintock, annulus, "
                          "monotone_fan, triangle_sigma"),
    ("oracle.params", {}, "oracle parameters"),
    ("boundary.from_oracle", None, "mark segments and take w, g from the oracle "
                                   "(default: true when an oracle is configured)"),
    ("boundary.segments", {}, "per-segment tables: {\"0\": {\"kind\": \"dirichlet\", "
                              "\"value\": 1.0}} or {\"kind\": ..., \"table\": [[s, v], ...]} "
                              "with s the arc-length parameter"),
    ("solver.max_iter", 20000, "iteration cap"),
    ("solver.tol", 1e-6, "combined residual threshold"),
    ("solver.theta", 1.0, "primal extrapolation in [0, 1]"),
    ("solver.step_ratio", 1.0, "dual/primal step balance (> 0)"),
    ("solver.init", "zeros", "zeros | random"),
    ("solver.seed", 0, "seed for random init"),
    ("eps_sat", 0.02, "saturation threshold for region classification"),
    ("tracing.seed_strategy", "grid", "grid | interface"),
    ("tracing.spacing", 0.25, "grid spacing of trace seeds"),
    ("tracing.step", None, "integration step (default: edge_length / 2)"),
    ("tracing.max_length", 10.0, "arc-length cap per trajectory"),
    ("levels.count", 5, "number of displacement levels to test"),
    ("levels.values", None, "explicit level values (overrides count)"),
    ("analyses", ["classify"], f"subset of {list(ANALYSES)}"),
    ("uniqueness.seeds", [1, 2], "init seeds for the uniqueness probe"),
    ("uniqueness.step_ratios", [0.5, 2.0], "step ratios for the uniqueness probe"),
    ("safe_load.alpha", 0.9, "safe-load margin in (0, 1)"),
    ("safe_load.tau", [0.0, 0.0], "constant certificate field"),
    ("assertions.require_converged", True, "fail the run when the solver does not converge"),
    ("assertions.u_rel_l2_max", None, "bound on the displacement error vs the oracle"),
    ("assertions.sigma_rel_l2_max", None, "bound on the stress error vs the oracle"),
    ("assertions.loops_plastic_max", None, "bound on plastic-touching loop count"),
    ("assertions.char_components_max", None, "bound on characteristic-boundary components"),
    ("output_dir", "out", "artifact directory"),
    ("figures", True, "render PNG figures next to the delimited output"),
    ("workers", 1, "parallel tracing workers (1 = deterministic reference)"),
]


class ConfigError(ValueError):
    pass


def _defaults():
    cfg = {}
    for path, default, _ in SCHEMA:
        parts = path.split(".")
        d = cfg
        for p in parts[:-1]:
            d = d.setdefault(p, {})
        d[parts[-1]] = copy.deepcopy(default)
    return cfg


def _merge(base, override, path=""):
    known_sections = {p.split(".")[0] for p, _, _ in SCHEMA}
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if path == "" and key not in known_sections:
            raise ConfigError(f"unknown config field '{here}'")
        if isinstance(val, dict) and isinstance(base.get(key), dict) and key != "segments" \
                and key != "params":
            _merge(base[key], val, here)
        else:
            base[key] = val
    return base


def load_config(path):
    try:
        with open(path) as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level config must be a JSON object")
    cfg = _merge(_defaults(), raw)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    dom = cfg.get("domain") or {}
    if not dom.get("name"):
        raise ConfigError("domain.name is required")
    if not dom.get("edge_length") or dom["edge_length"] <= 0:
        raise ConfigError("domain.edge_length must be a positive number")
    if cfg["fields"] not in ("solve", "oracle"):
        raise ConfigError("fields must be 'solve' or 'oracle'")
    if cfg["fields"] == "oracle" and not (cfg.get("oracle") or {}).get("name"):
        raise ConfigError("fields = 'oracle' requires oracle.name")
    bad = [a for a in cfg["analyses"] if a not in ANALYSES]
    if bad:
        raise ConfigError(f"unknown analyses {bad}; allowed: {list(ANALYSES)}")
    for key, seg in (cfg["boundary"].get("segments") or {}).items():
        here = f"boundary.segments.{key}"
        if not str(key).lstrip("-").isdigit():
            raise ConfigError(f"{here}: segment ids are integers")
        if seg.get("kind") not in (DIRICHLET, NEUMANN):
            raise ConfigError(f"{here}.kind must be 'dirichlet' or 'neumann'")
        if "value" not in seg and "table" not in seg:
            raise ConfigError(f"{here}: needs 'value' or 'table'")
        if "table" in seg:
            t = seg["table"]
            if not (isinstance(t, list) and all(len(r) == 2 for r in t)):
                raise ConfigError(f"{here}.table must be [[s, value], ...]")
    if "compare" in cfg["analyses"] and not (cfg.get("oracle") or {}).get("name"):
        raise ConfigError("analysis 'compare' requires oracle.name")


def print_schema(file=None):
    file = file or sys.stdout
    print("plastiq run-config schema (JSON).  Field = default  -- description", file=file)
    for path, default, desc in SCHEMA:
        print(f"  {path} = {json.dumps(default)}  -- {desc}", file=file)
    print("\nDefaults as a config skeleton:\n", file=file)
    json.dump(_defaults(), file, indent=2, sort_keys=True)
    print(file=file)


# -- boundary data from per-segment tables -----------------------------------

def _segment_arclength(mesh, idx):
    """Cumulative arc-length parameter of each edge midpoint within its segment chain."""
    edges = mesh.boundary_edges[idx]
    order = {}
    adj = {}
    for i, (a, b) in enumerate(edges):
        adj.setdefault(int(a), []).append(i)
        adj.setdefault(int(b), []).append(i)
    deg1 = [v for v, lst in adj.items() if len(lst) == 1]
    start = deg1[0] if deg1 else int(edges[0, 0])
    used = np.zeros(len(edges), dtype=bool)
    s = 0.0
    cur = start
    params = np.zeros(len(edges))
    for _ in range(len(edges)):
        nxt = [i for i in adj[cur] if not used[i]]
        if not nxt:
            break
        i = nxt[0]
        used[i] = True
        L = mesh.boundary_lengths[idx[i]]
        params[i] = s + L / 2
        s += L
        a, b = edges[i]
        cur = int(b) if int(a) == cur else int(a)
    return params


def apply_boundary_config(mesh, cfg, oracle):
    from_oracle = cfg["boundary"].get("from_oracle")
    if from_oracle is None:
        from_oracle = oracle is not None
    if from_oracle:
        if oracle is None:
            raise ConfigError("boundary.from_oracle requires oracle.name")
        if oracle._mark is not None:
            mesh = mesh.with_markers(oracle._mark)
        return mesh, oracle.boundary_data(mesh)

    segs = {int(k): v for k, v in (cfg["boundary"].get("segments") or {}).items()}
    present = sorted(set(int(s) for s in mesh.boundary_segment))
    for sid in present:
        if sid not in segs:
            raise ConfigError(f"boundary.segments: no data for segment {sid} "
                              f"(mesh has segments {present})")

    def marker(mid, kind, seg):
        return segs[seg]["kind"], seg

    mesh = mesh.with_markers(marker)
    w = np.zeros(len(mesh.dirichlet))
    g = np.zeros(len(mesh.neumann))
    for arrs, idx in ((w, mesh.dirichlet), (g, mesh.neumann)):
        for sid in present:
            sel = np.flatnonzero(mesh.boundary_segment[idx] == sid)
            if len(sel) == 0:
                continue
            spec = segs[sid]
            if "table" in spec:
                t = np.asarray(spec["table"], dtype=float)
                params = _segment_arclength(mesh, idx[sel])
                arrs[sel] = np.interp(params, t[:, 0], t[:, 1])
            else:
                arrs[sel] = float(spec["value"])
    bdata = BoundaryData(w, g)
    bdata.validate(mesh)
    return mesh, bdata


# -- run pipeline --------------------------------------------------------------

def run_pipeline(cfg, out_dir):
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"output_dir {out}: {e.strerror}")
    rep = {"config": cfg, "analyses": {}}
    assertions = {}
    exit_status = 0

    oracle = None
    if (cfg.get("oracle") or {}).get("name"):
        try:
            oracle = make_oracle(cfg["oracle"]["name"], cfg["oracle"].get("params") or {})
        except (MeshError, TypeError) as e:
            raise ConfigError(f"oracle: {e}")

    dom = cfg["domain"]
    if dom["name"] == "from_oracle":
        if oracle is None:
            raise ConfigError("domain.name = 'from_oracle' requires oracle.name")
        spec = dict(oracle.domain_spec)
        mesh = build_domain(spec.pop("name"), dom["edge_length"], **spec)
    else:
        try:
            mesh = build_domain(dom["name"], dom["edge_length"], **(dom.get("params") or {}))
        except (MeshError, TypeError) as e:
            raise ConfigError(f"domain: {e}")
    try:
        mesh, bdata = apply_boundary_config(mesh, cfg, oracle)
    except MeshError as e:
        raise ConfigError(f"boundary: {e}")
    h = mesh.edge_length_mean
    rep["mesh"] = {"vertices": mesh.num_vertices, "triangles": mesh.num_triangles,
                   "edge_length_mean": h, "area": mesh.total_area()}
    save_mesh(mesh, out / "mesh.txt")

    solver_cfg = SolverConfig(**cfg["solver"])
    solve_report = None
    if cfg["fields"] == "solve":
        u, sigma, plastic, solve_report = solve(mesh, bdata, solver_cfg)
        rep["solve"] = {
            "iterations": solve_report.iterations,
            "converged": solve_report.converged,
            "residuals": solve_report.residuals,
            "lambda_trace_gap": solve_report.lambda_trace_gap,
            "neumann_present": solve_report.neumann_present,
            "message": solve_report.message,
            "energy_first": float(solve_report.energy_history[0]),
            "energy_final": float(solve_report.energy_history[-1]),
        }
        with open(out / "timing.txt", "w") as f:
            f.write(f"solve_wall_time_s {solve_report.wall_time_s:.3f}\n")
        if cfg["assertions"]["require_converged"] and not solve_report.converged:
            exit_status = 2
    else:
        u, sigma, plastic = sample_triple(oracle, mesh, bdata)
        rep["solve"] = None
    rep["kkt_residuals"] = kkt_residuals(u, sigma, plastic, mesh, bdata)

    pio.write_fields_csv(str(out / "fields"), mesh, u, sigma, plastic)
    pio.write_vtk(out / "fields.vtk", mesh, point_data={"u": u},
                  cell_data={"sigma": sigma, "sigma_norm": np.linalg.norm(sigma, axis=1),
                             "p": plastic.interior})

    disc = oracle.discontinuity_points if oracle is not None else ()
    regionmap = None
    interp = None
    traces = []
    fans = None

    requested = list(cfg["analyses"])
    if any(a in requested for a in ("trace", "fans", "levels", "audit")) \
            and "classify" not in requested:
        requested.insert(0, "classify")

    for analysis in requested:
        if analysis == "classify":
            regionmap = classify_regions(sigma, mesh, cfg["eps_sat"])
            cvx = convexity_check(regionmap, mesh)
            cb = characteristic_boundary(regionmap, sigma, mesh, eps=cfg["eps_sat"])
            eld = elastic_diagnostics(u, sigma, regionmap, mesh)
            sweep = []
            for eps in (cfg["eps_sat"] / 2, cfg["eps_sat"], 2 * cfg["eps_sat"]):
                if 0 < eps < 0.5:
                    rm2 = classify_regions(sigma, mesh, eps)
                    sweep.append({"eps_sat": eps, "plastic_area": rm2.plastic_area()})
            rep["analyses"]["classify"] = {
                "eps_sat": regionmap.eps_sat,
                "plastic_cells": int(len(regionmap.plastic_cells)),
                "plastic_area": regionmap.plastic_area(),
                "interface_polylines": len(regionmap.sigma_interface),
                "degenerate_components": len(regionmap.degenerate_components),
                "convexity": cvx,
                "char_boundary": {"n_components": cb["n_components"],
                                  "theorem_consistent": cb["theorem_consistent"]},
                "elastic_diagnostics": eld,
                "eps_sensitivity": sweep,
            }
            pio.write_regions_csv(out / "regions.csv", regionmap)
            pio.write_polylines_csv(out / "interface.csv", regionmap.sigma_interface)
            pio.write_polylines_csv(out / "char_boundary.csv", cb["segments"])
            a = cfg["assertions"].get("char_components_max")
            if a is not None:
                assertions["char_components_max"] = {
                    "passed": cb["n_components"] <= a,
                    "value": cb["n_components"], "bound": a}
        elif analysis in ("trace", "audit"):
            if interp is None:
                interp = reconstruct_sigma(sigma, mesh, disc, u=u)
            step = cfg["tracing"]["step"] or h / 2
            if cfg["tracing"]["seed_strategy"] == "interface" and regionmap is not None \
                    and len(regionmap.interface_edges):
                mids = 0.5 * (mesh.vertices[regionmap.interface_edges[:, 0]]
                              + mesh.vertices[regionmap.interface_edges[:, 1]])
                seeds = mids[::max(1, len(mids) // 64)]
            else:
                seeds = seed_grid(interp, cfg["tracing"]["spacing"])
            if analysis == "trace":
                for seed in seeds:
                    for direction in (1, -1):
                        try:
                            traces.append(trace(interp, seed, direction=direction, step=step,
                                                max_length=cfg["tracing"]["max_length"]))
                        except MeshError:
                            pass
                hist = {}
                for ch in traces:
                    hist[ch.termination] = hist.get(ch.termination, 0) + 1
                rep["analyses"]["trace"] = {"n_traces": len(traces), "terminations": hist}
                pio.write_characteristics_csv(out / "characteristics.csv", traces)
            else:
                audit = no_loop_audit(interp, seeds, step=step,
                                      max_length=cfg["tracing"]["max_length"],
                                      regionmap=regionmap, workers=cfg["workers"])
                rep["analyses"]["audit"] = {k: v for k, v in audit.items()
                                            if k != "characteristics"}
                a = cfg["assertions"].get("loops_plastic_max")
                if a is not None:
                    assertions["loops_plastic_max"] = {
                        "passed": audit["loops_plastic_touching"] <= a,
                        "value": audit["loops_plastic_touching"], "bound": a}
        elif analysis == "fans":
            fans = detect_fans(regionmap, sigma, mesh)
            rep["analyses"]["fans"] = {
                "n_fans": len(fans["fans"]),
                "n_components": fans["n_components"],
                "fans": [{"apex": f["apex"], "members": int(len(f["members"])),
                          "spread": f["spread"], "orientation": f["orientation"],
                          "vortex_deviation_far": f["vortex_deviation_far"]}
                         for f in fans["fans"]],
            }
        elif analysis == "levels":
            values = cfg["levels"]["values"]
            if values is None:
                # levels must cut the plastic region to be testable
                cells = regionmap.plastic_cells
                base = u[np.unique(mesh.triangles[cells].ravel())] if len(cells) else u
                qs = np.linspace(0.15, 0.85, cfg["levels"]["count"])
                values = list(np.quantile(base, qs))
            recs = []
            for lam in values:
                r = level_set_alignment(u, float(lam), regionmap, mesh)
                recs.append({k: v for k, v in r.items() if k not in ("midpoint", "direction")})
            rep["analyses"]["levels"] = recs
        elif analysis == "compare":
            cmp_rec = compare(oracle, u, sigma, mesh, eps_sat=cfg["eps_sat"])
            rep["analyses"]["compare"] = cmp_rec
            for key, bound_key in (("u_rel_l2", "u_rel_l2_max"),
                                   ("sigma_rel_l2", "sigma_rel_l2_max")):
                bound = cfg["assertions"].get(bound_key)
                if bound is not None:
                    assertions[bound_key] = {"passed": bool(cmp_rec[key] <= bound),
                                             "value": cmp_rec[key], "bound": bound}
        elif analysis == "uniqueness-probe":
            cfgs = [SolverConfig(**{**cfg["solver"], "init": "random", "seed": s,
                                    "step_ratio": r})
                    for s, r in zip(cfg["uniqueness"]["seeds"],
                                    cfg["uniqueness"]["step_ratios"])]
            probe = uniqueness_probe(mesh, bdata, cfgs)
            rep["analyses"]["uniqueness_probe"] = {
                "u_l1": probe["u_l1"], "sigma_l2": probe["sigma_l2"],
                "inconclusive": probe["inconclusive"],
                "pure_dirichlet": probe["pure_dirichlet"],
            }
        elif analysis == "safe-load":
            tau = np.tile(np.asarray(cfg["safe_load"]["tau"], dtype=float),
                          (mesh.num_triangles, 1))
            rep["analyses"]["safe_load"] = verify_safe_load(
                tau, bdata.g, cfg["safe_load"]["alpha"], mesh)

    if cfg["figures"]:
        if regionmap is not None:
            figs.save_region_figure(out / "regions.png", mesh, regionmap)
        figs.save_displacement_figure(out / "displacement.png", mesh, u)
        if traces:
            figs.save_characteristics_figure(out / "characteristics.png", mesh, traces,
                                             regionmap, (fans or {}).get("fans"))
        if solve_report is not None:
            figs.save_energy_figure(out / "energy.png", solve_report)

    rep["assertions"] = assertions
    if exit_status == 0 and any(not a["passed"] for a in assertions.values()):
        exit_status = 3
    rep["exit_status"] = exit_status
    pio.write_report_json(out / "report.json", rep)
    return exit_status, rep


# -- verify-analytic ------------------------------------------------------------

ORACLE_DEFAULTS = {
    "macclintock": {"a": 1.0, "b": 2.0},
    "annulus": {"a": 1.0, "b": 2.0, "alpha": 0.0, "beta": 2.0},
    "monotone_fan": {"theta_samples": [0.0, np.pi / 2], "h_samples": [0.0, np.pi],
                     "radius": 1.0},
    "triangle_sigma": {},
}


def verify_analytic(name, h, params=None, file=None):
    file = file or sys.stdout
    params = {**ORACLE_DEFAULTS.get(name, {}), **(params or {})}
    oracle = make_oracle(name, params)
    mesh = oracle.build_mesh(h)
    ok = True

    def check(label, passed, detail=""):
        nonlocal ok
        ok &= bool(passed)
        print(f"  [{'pass' if passed else 'FAIL'}] {label} {detail}", file=file)

    print(f"verify-analytic {name} at h = {h}: mesh {mesh.num_vertices} vertices, "
          f"{mesh.num_triangles} triangles", file=file)
    if oracle.u is None:
        sigma = oracle.sigma(mesh.centroids)
        norms = np.linalg.norm(sigma, axis=1)
        check("|sigma| = 1", abs(norms.max() - 1) < 1e-9 and abs(norms.min() - 1) < 1e-9,
              f"(range [{norms.min():.2e}, {norms.max():.2e}])")
        rm = classify_regions(sigma, mesh, 0.02)
        fans = detect_fans(rm, sigma, mesh)
        check("fans detected", len(fans["fans"]) > 0, f"({len(fans['fans'])})")
        return ok

    bdata = oracle.boundary_data(mesh)
    u, sigma, plastic = sample_triple(oracle, mesh, bdata)
    res = kkt_residuals(u, sigma, plastic, mesh, bdata)
    scale = max(1.0, 10.0 * h)
    check("ball constraint", res["ball_violation_max"] <= 1e-9,
          f"(violation {res['ball_violation_max']:.2e})")
    for key in ("div_interior_max", "neumann_trace_max",
                "flow_rule_interior_max", "flow_rule_dirichlet_max"):
        check(key, res[key] <= scale, f"({res[key]:.3e} vs {scale:.2f})")
    rm = classify_regions(sigma, mesh, 0.02)
    cb = characteristic_boundary(rm, sigma, mesh)
    check("characteristic boundary components <= 2", cb["n_components"] <= 2,
          f"({cb['n_components']})")
    interp = reconstruct_sigma(sigma, mesh, oracle.discontinuity_points, u=u)
    audit = no_loop_audit(interp, seed_grid(interp, max(4 * h, 0.15)),
                          step=h / 2, max_length=8.0, regionmap=rm)
    check("plastic-touching loops = 0", audit["loops_plastic_touching"] == 0,
          f"(loops {audit['loops_plastic_touching']}, traced {audit['n_traced']})")
    print("verify-analytic:", "PASS" if ok else "FAIL", file=file)
    return ok


# -- entry point -----------------------------------------------------------------

def main(argv=None):
    ap = argparse.ArgumentParser(prog="plastiq",
                                 description="Scalar plasticity solver and analyzer")
    sub = ap.add_subparsers(dest="command", required=True)

    ap_run = sub.add_parser("run", help="run a pipeline from a JSON config")
    ap_run.add_argument("config")
    ap_run.add_argument("--out", default=None, help="output directory (overrides config)")
    ap_run.add_argument("--workers", type=int, default=None)
    ap_run.add_argument("--seed", type=int, default=None, help="override solver seed")

    sub.add_parser("schema", help="print the config schema with defaults")

    ap_va = sub.add_parser("verify-analytic",
                           help="sample an oracle on a mesh and check its structure")
    ap_va.add_argument("oracle", choices=sorted(ORACLE_DEFAULTS))
    ap_va.add_argument("h", type=float)
    ap_va.add_argument("--params", default=None, help="JSON oracle parameters")

    args = ap.parse_args(argv)
    if args.command == "schema":
        print_schema()
        return 0
    if args.command == "verify-analytic":
        params = json.loads(args.params) if args.params else None
        return 0 if verify_analytic(args.oracle, args.h, params) else 3
    try:
        cfg = load_config(args.config)
        if args.workers is not None:
            cfg["workers"] = args.workers
        if args.seed is not None:
            cfg["solver"]["seed"] = args.seed
        out_dir = args.out or cfg["output_dir"]
        status, _ = run_pipeline(cfg, out_dir)
        return status
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
