"""The linear-growth energy density, its minimizing split, and discrete energies.

The density is quadratic inside the unit ball and grows linearly outside:

    W(xi) = |xi|^2 / 2          if |xi| <= 1
            |xi|  - 1/2         otherwise,

the infimal convolution of |.|^2/2 and |.|.  Its pointwise minimizing split
xi = sigma + p (ball projection + radial shrinkage) is what couples the
displacement gradient to the stress and the plastic strain everywhere below.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import DIRICHLET, MeshError, gradient

# Analytic identities hold to this tolerance; discretization-limited checks
# declare their own mesh-dependent tolerances.
IDENTITY_TOL = 1e-9


@dataclass
class Split:
    """Minimizing decomposition xi = sigma + p with |sigma| <= 1."""

    sigma: np.ndarray
    p: np.ndarray


def eval_W(xi):
    """Energy density; accepts a single 2-vector or an (n, 2) array."""
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1)
    return np.where(r <= 1.0, 0.5 * r * r, r - 0.5)


def project_ball(v):
    """Euclidean projection onto the closed unit ball (idempotent, 1-Lipschitz)."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1)
    scale = np.where(r > 1.0, 1.0 / np.maximum(r, 1e-300), 1.0)
    return v * scale[..., None]


def split_infconv(xi):
    """Minimizer of  p -> |xi - p|^2/2 + |p|: sigma is the ball projection, p the rest."""
    xi = np.asarray(xi, dtype=float)
    sigma = project_ball(xi)
    return Split(sigma=sigma, p=xi - sigma)


def primal_energy(u, mesh, bdata):
    """Interior W-term + Dirichlet mismatch penalty - Neumann work."""
    bdata.validate(mesh)
    grad = gradient(u, mesh)
    interior = float(np.dot(mesh.areas, eval_W(grad)))
    uD = mesh.edge_trace(u, DIRICHLET)
    lD = mesh.boundary_lengths[mesh.dirichlet]
    penalty = float(np.dot(lD, np.abs(bdata.w - uD)))
    uN = mesh.edge_trace(u, "neumann")
    lN = mesh.boundary_lengths[mesh.neumann]
    work = float(np.dot(lN, bdata.g * uN))
    return interior + penalty - work


def triple_energy(u, sigma, p_interior, p_boundary, mesh, bdata, compat_tol=1e-8):
    """Energy of a compatible triple: |sigma|^2/2 + |p| mass - Neumann work.

    Rejects triples violating the gradient split grad(u) = sigma + p or the
    Dirichlet jump density p = w - u beyond ``compat_tol``, naming the worst
    cell or edge.
    """
    bdata.validate(mesh)
    sigma = mesh._check_cellwise(sigma)
    p_interior = mesh._check_cellwise(p_interior)
    p_boundary = np.asarray(p_boundary, dtype=float).reshape(-1)
    if len(p_boundary) != len(mesh.dirichlet):
        raise MeshError("p_boundary must have one density per Dirichlet edge")

    gap = np.linalg.norm(gradient(u, mesh) - sigma - p_interior, axis=1)
    if gap.size and gap.max() > compat_tol:
        worst = int(np.argmax(gap))
        raise MeshError(
            f"gradient split violated: |grad u - sigma - p| = {gap[worst]:.3e} on cell {worst}")
    uD = mesh.edge_trace(u, DIRICHLET)
    egap = np.abs((bdata.w - uD) - p_boundary)
    if egap.size and egap.max() > compat_tol:
        worst = int(np.argmax(egap))
        raise MeshError(
            f"boundary jump density violated by {egap[worst]:.3e} on Dirichlet edge {worst}")

    val = 0.5 * float(np.dot(mesh.areas, np.einsum("ij,ij->i", sigma, sigma)))
    val += float(np.dot(mesh.areas, np.linalg.norm(p_interior, axis=1)))
    val += float(np.dot(mesh.boundary_lengths[mesh.dirichlet], np.abs(p_boundary)))
    uN = mesh.edge_trace(u, "neumann")
    val -= float(np.dot(mesh.boundary_lengths[mesh.neumann], bdata.g * uN))
    return val


def flow_rule_residual(sigma, p_interior, p_boundary, mesh, sigma_nu_dirichlet):
    """Complementarity defects of the flow rule, per cell and per Dirichlet edge.

    Cell residual |p| - sigma . p and edge residual |p_b| - (sigma.nu) p_b are
    nonnegative up to rounding (Cauchy-Schwarz with |sigma| <= 1) and vanish
    exactly where p is a nonnegative multiple of sigma, resp. where the jump
    sign matches a saturated normal trace.
    """
    sigma = mesh._check_cellwise(sigma)
    p_interior = mesh._check_cellwise(p_interior)
    p_boundary = np.asarray(p_boundary, dtype=float).reshape(-1)
    sigma_nu = np.asarray(sigma_nu_dirichlet, dtype=float).reshape(-1)
    norms = np.linalg.norm(sigma, axis=1)
    if norms.size and norms.max() > 1.0 + 1e-6:
        raise MeshError(f"|sigma| = {norms.max():.6f} violates the unit-ball constraint")
    r_cells = np.linalg.norm(p_interior, axis=1) - np.einsum("ij,ij->i", sigma, p_interior)
    r_edges = np.abs(p_boundary) - sigma_nu * p_boundary
    return r_cells, r_edges


def verify_safe_load(tau, g, alpha, mesh, tol=1e-8):
    """Report whether tau certifies the safe-load condition at margin alpha.

    Checks |tau| <= alpha, a vanishing interior divergence residual, and the
    Neumann normal trace matching g.
    """
    if not 0 < alpha < 1:
        raise MeshError("safe-load margin alpha must lie in (0, 1)")
    from .mesh import divergence_adjoint

    tau = mesh._check_cellwise(tau)
    g = np.asarray(g, dtype=float).reshape(-1)
    if len(g) != len(mesh.neumann):
        raise MeshError("g must have one sample per Neumann edge")
    max_norm = float(np.linalg.norm(tau, axis=1).max()) if len(tau) else 0.0
    div = divergence_adjoint(tau, mesh)
    div_res = float(np.abs(div[mesh.interior_vertex_mask]).max()) if mesh.interior_vertex_mask.any() else 0.0
    if len(mesh.neumann):
        trace_res = float(np.abs(mesh.normal_trace(tau, mesh.neumann) - g).max())
    else:
        trace_res = 0.0
    return {
        "max_norm": max_norm,
        "alpha": float(alpha),
        "div_residual_max": div_res,
        "neumann_trace_residual_max": trace_res,
        "passes": bool(max_norm <= alpha and div_res <= tol and trace_res <= tol),
    }
