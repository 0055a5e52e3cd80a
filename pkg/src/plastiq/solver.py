"""Primal-dual solution of the discrete relaxed problem.

The saddle formulation pairs the nodal displacement u with a cell stress
sigma (resolvent: scaled ball projection, from the conjugate of the energy
density) and a bounded multiplier lambda per Dirichlet edge (resolvent:
clamp to [-1, 1], from the conjugate of the mismatch penalty).  Primal steps
are explicit and mass-preconditioned; the extrapolation acts on u.  The run
is deterministic for a fixed config.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .mesh import DIRICHLET, MeshError, divergence_adjoint, gradient, operator_norm
from .energy import eval_W, flow_rule_residual, project_ball

RESIDUAL_KEYS = (
    "div_interior_max",
    "neumann_trace_max",
    "ball_violation_max",
    "flow_rule_interior_max",
    "flow_rule_dirichlet_max",
)


@dataclass
class SolverConfig:
    max_iter: int = 20000
    tol: float = 1e-6
    theta: float = 1.0
    step_ratio: float = 1.0
    init: str = "zeros"
    seed: int = 0
    check_every: int = 100
    record_every: int = 10

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.step_ratio <= 0:
            raise ValueError("step_ratio must be positive")
        if self.init not in ("zeros", "random"):
            raise ValueError("init must be 'zeros' or 'random'")


@dataclass
class PlasticStrain:
    """Interior density per triangle plus jump density per Dirichlet edge."""

    interior: np.ndarray
    boundary: np.ndarray


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    energy_history: np.ndarray
    energy_iterations: np.ndarray
    residuals: dict
    wall_time_s: float
    lambda_trace_gap: float = float("nan")
    neumann_present: bool = False
    message: str = ""
    step_sizes: tuple = field(default=(0.0, 0.0))


def _step_sizes(mesh, config):
    norm_K = operator_norm(mesh, with_dirichlet_trace=True) * 1.01
    if norm_K == 0.0:
        raise MeshError("degenerate mesh: zero operator norm")
    tau_dual = config.step_ratio / norm_K
    tau_primal = 1.0 / (config.step_ratio * norm_K)
    # convergence condition in the mass-weighted metric
    assert tau_primal * tau_dual * operator_norm(mesh) ** 2 <= 1.0 + 1e-9
    return tau_primal, tau_dual


def solve(mesh, bdata, config=None):
    """Minimize the discrete relaxed energy; returns (u, sigma, PlasticStrain, SolveReport).

    The plastic strain is extracted as p = grad(u) - sigma per cell and
    w - u per Dirichlet edge, so the gradient split holds exactly.  Safe-load
    feasibility of Neumann data is the caller's business; its presence is
    only reported.
    """
    config = config or SolverConfig()
    bdata.validate(mesh)
    nt, nv = mesh.num_triangles, mesh.num_vertices
    nD = len(mesh.dirichlet)

    tau_p, tau_d = _step_sizes(mesh, config)
    G, GtA, TD = mesh._G, mesh._GtA, mesh._trace_D
    TDt = TD.T.tocsr()
    lD = mesh.boundary_lengths[mesh.dirichlet]
    lN = mesh.boundary_lengths[mesh.neumann]
    w, g = bdata.w, bdata.g
    neumann_load = mesh._trace_N.T @ (lN * g) if len(mesh.neumann) else np.zeros(nv)
    taupm = tau_p / mesh.vertex_mass
    g_scale = 1.0 + (np.abs(g).max() if len(g) else 0.0)

    if config.init == "zeros":
        u = np.zeros(nv)
        sig = np.zeros((nt, 2))
        lam = np.zeros(nD)
    else:
        rng = np.random.default_rng(config.seed)
        u = rng.uniform(-0.1, 0.1, nv)
        sig = rng.uniform(-0.1, 0.1, (nt, 2))
        lam = rng.uniform(-0.1, 0.1, nD)
    ubar = u.copy()

    energies, energy_iters = [], []
    interior = mesh.interior_vertex_mask
    t0 = time.perf_counter()
    converged = False
    last_energy = None
    iterations = 0

    def record_energy(k, u_now):
        grad = (G @ u_now).reshape(nt, 2)
        e = float(np.dot(mesh.areas, eval_W(grad)))
        e += float(np.dot(lD, np.abs(w - TD @ u_now)))
        e -= float(np.dot(lN, g * (mesh._trace_N @ u_now))) if len(lN) else 0.0
        energies.append(e)
        energy_iters.append(k)
        return e

    last_energy = record_energy(0, u)
    for k in range(1, config.max_iter + 1):
        iterations = k
        gu = (G @ ubar).reshape(nt, 2)
        sig = project_ball((sig + tau_d * gu) / (1.0 + tau_d))
        if nD:
            lam = np.clip(lam + tau_d * (w - TD @ ubar), -1.0, 1.0)
        force = -(GtA @ sig.ravel())
        if nD:
            force += TDt @ (lD * lam)
        force += neumann_load
        unew = u + taupm * force
        ubar = unew + config.theta * (unew - u)
        u = unew

        if k % config.record_every == 0 or k == config.max_iter:
            record_energy(k, u)
        if k % config.check_every == 0 or k == config.max_iter or k <= 2:
            if not np.isfinite(u).all() or not np.isfinite(sig).all():
                raise FloatingPointError(f"solver produced non-finite values at iteration {k}")
            div_raw = -(GtA @ sig.ravel())
            div_max = float(np.abs(div_raw[interior]).max()) if interior.any() else 0.0
            grad_u = (G @ u).reshape(nt, 2)
            p = grad_u - sig
            flow_int = float((mesh.areas * (np.linalg.norm(p, axis=1)
                                            - np.einsum("ij,ij->i", sig, p))).max())
            if nD:
                jump = w - TD @ u
                flow_dir = float((lD * (np.abs(jump) - lam * jump)).max())
            else:
                flow_dir = 0.0
            e_now = record_energy(k, u) if energy_iters[-1] != k else energies[-1]
            de = abs(e_now - last_energy) / (abs(e_now) + 1.0) if last_energy is not None else np.inf
            last_energy = e_now
            if (div_max <= config.tol * g_scale and flow_int <= config.tol
                    and flow_dir <= config.tol and de <= config.tol):
                converged = True
                break

    wall = time.perf_counter() - t0
    grad_u = (G @ u).reshape(nt, 2)
    plastic = PlasticStrain(interior=grad_u - sig,
                            boundary=(w - TD @ u) if nD else np.zeros(0))
    residuals = kkt_residuals(u, sig, plastic, mesh, bdata)

    if nD:
        jump = plastic.boundary
        active = np.abs(jump) > 10 * config.tol
        snu = mesh.normal_trace(sig, mesh.dirichlet)
        lam_gap = float(np.abs(lam - snu)[active].max()) if active.any() else 0.0
    else:
        lam_gap = 0.0

    report = SolveReport(
        iterations=iterations,
        converged=converged,
        energy_history=np.array(energies),
        energy_iterations=np.array(energy_iters),
        residuals=residuals,
        wall_time_s=wall,
        lambda_trace_gap=lam_gap,
        neumann_present=bool(len(mesh.neumann)),
        message="" if converged else "not converged: best iterate returned",
        step_sizes=(tau_p, tau_d),
    )
    return u, sig, plastic, report


def kkt_residuals(u, sigma, plastic, mesh, bdata):
    """Optimality defects of a field triple, computed without solver state.

    div_interior_max        nodal force-balance defect at interior nodes
    neumann_trace_max       max |sigma.nu - g| over Neumann edges
    ball_violation_max      max(|sigma| - 1, 0)
    flow_rule_interior_max  max of the per-cell flow-rule measure defect
                            area * (|p| - sigma.p)
    flow_rule_dirichlet_max max of the per-edge measure defect
                            length * (|p_b| - (sigma.nu) p_b)

    The flow-rule defects are weighted by cell area / edge length (the flow
    rule is an identity between measures); the corresponding densities are
    available from `energy.flow_rule_residual`.
    """
    bdata.validate(mesh)
    sigma = mesh._check_cellwise(sigma)
    div = divergence_adjoint(sigma, mesh)
    interior = mesh.interior_vertex_mask
    div_max = float(np.abs(div[interior]).max()) if interior.any() else 0.0
    if len(mesh.neumann):
        neumann_max = float(np.abs(mesh.normal_trace(sigma, mesh.neumann) - bdata.g).max())
    else:
        neumann_max = 0.0
    norms = np.linalg.norm(sigma, axis=1)
    ball = float(max(norms.max(initial=0.0) - 1.0, 0.0))
    snu = mesh.normal_trace(sigma, mesh.dirichlet) if len(mesh.dirichlet) else np.zeros(0)
    # flow_rule_residual insists on |sigma| <= 1 + 1e-6; tolerate larger here
    # by scaling back (the excess is already reported as ball violation)
    sig_ok = sigma if ball <= 1e-6 else project_ball(sigma)
    r_cells, r_edges = flow_rule_residual(sig_ok, plastic.interior, plastic.boundary, mesh, snu)
    r_cells = mesh.areas * r_cells
    r_edges = mesh.boundary_lengths[mesh.dirichlet] * r_edges
    return {
        "div_interior_max": div_max,
        "neumann_trace_max": neumann_max,
        "ball_violation_max": ball,
        "flow_rule_interior_max": float(max(r_cells.max(initial=0.0), 0.0)),
        "flow_rule_dirichlet_max": float(max(r_edges.max(initial=0.0), 0.0)),
    }


def uniqueness_probe(mesh, bdata, configs):
    """Pairwise distances between solves from different configs.

    Returns per-pair L1(domain) distances between displacements and
    L2(domain) distances between stresses; pairs involving a run that did
    not converge are marked inconclusive.  u-agreement is only meaningful
    for pure Dirichlet problems; sigma-agreement holds for any partition.
    """
    if len(configs) < 2:
        raise ValueError("uniqueness_probe needs at least two configs")
    runs = [solve(mesh, bdata, c) for c in configs]
    n = len(runs)
    u_l1 = np.zeros((n, n))
    s_l2 = np.zeros((n, n))
    inconclusive = np.zeros((n, n), dtype=bool)
    for i in range(n):
        ui, si, _, ri = runs[i]
        for j in range(i + 1, n):
            uj, sj, _, rj = runs[j]
            du = float(np.dot(mesh.vertex_mass, np.abs(ui - uj)))
            ds = float(np.sqrt(np.dot(mesh.areas, np.einsum("ij,ij->i", si - sj, si - sj))))
            u_l1[i, j] = u_l1[j, i] = du
            s_l2[i, j] = s_l2[j, i] = ds
            inconclusive[i, j] = inconclusive[j, i] = not (ri.converged and rj.converged)
    return {
        "u_l1": u_l1,
        "sigma_l2": s_l2,
        "inconclusive": inconclusive,
        "reports": [r for *_, r in runs],
        "pure_dirichlet": len(mesh.neumann) == 0,
    }
