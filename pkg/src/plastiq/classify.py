"""Elastic/plastic segmentation, interface extraction, and geometry checks.

A triangle is saturated when its stress norm is within eps_sat of the
constraint; the plastic set is the saturated set with discrete
empty-interior artifacts stripped: isolated saturated triangles and
components without a single fully-surrounded triangle are relabeled elastic
and reported as degenerate strips (the segment case of the region split).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from .mesh import MeshError, divergence_adjoint, gradient

ELASTIC, PLASTIC = 0, 1


@dataclass
class RegionMap:
    labels: np.ndarray                     # (nt,) 0 elastic / 1 plastic
    eps_sat: float
    mesh: object
    sigma: np.ndarray                      # the stress the labels came from
    interface_edges: np.ndarray            # (m, 2) vertex pairs inside the domain
    sigma_interface: list                  # polylines, each an (k, 2) point array
    degenerate_components: list            # triangle-id arrays stripped as empty-interior
    char_boundary: Optional[list] = None   # filled by characteristic_boundary
    convexity: Optional[dict] = None       # filled by convexity_check

    @property
    def plastic_cells(self):
        return np.flatnonzero(self.labels == PLASTIC)

    @property
    def elastic_cells(self):
        return np.flatnonzero(self.labels == ELASTIC)

    def plastic_area(self):
        return float(self.mesh.areas[self.labels == PLASTIC].sum())


def _components(cells, tri_neighbors):
    """Connected components of ``cells`` under edge adjacency."""
    seen = set()
    out = []
    cellset = set(int(c) for c in cells)
    for c in cells:
        c = int(c)
        if c in seen:
            continue
        stack, group = [c], []
        seen.add(c)
        while stack:
            t = stack.pop()
            group.append(t)
            for nb in tri_neighbors[t]:
                nb = int(nb)
                if nb >= 0 and nb in cellset and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        out.append(np.array(sorted(group)))
    return out


def _chain_polylines(edges, vertices):
    """Order an undirected edge set into polylines (open chains first, then loops)."""
    if len(edges) == 0:
        return []
    adj = {}
    for i, (a, b) in enumerate(edges):
        adj.setdefault(int(a), []).append((int(b), i))
        adj.setdefault(int(b), []).append((int(a), i))
    used = np.zeros(len(edges), dtype=bool)
    polylines = []

    def walk(start):
        path = [start]
        cur = start
        while True:
            nxt = [(v, i) for v, i in adj[cur] if not used[i]]
            if not nxt:
                break
            v, i = nxt[0]
            used[i] = True
            path.append(v)
            cur = v
        return path

    endpoints = [v for v, lst in adj.items() if len(lst) % 2 == 1]
    for v in endpoints:
        if any(not used[i] for _, i in adj[v]):
            polylines.append(walk(v))
    for v in adj:  # leftover closed loops
        if any(not used[i] for _, i in adj[v]):
            polylines.append(walk(v))
    return [vertices[np.array(p)] for p in polylines]


def classify_regions(sigma, mesh, eps_sat=0.02):
    """Label triangles elastic/plastic from the stress norm and extract the interface."""
    sigma = mesh._check_cellwise(sigma)
    if not 0.0 < eps_sat < 0.5:
        raise MeshError("eps_sat must lie in (0, 0.5)")
    norms = np.linalg.norm(sigma, axis=1)
    if norms.size and norms.max() > 1.0 + 1e-6:
        raise MeshError(f"|sigma| = {norms.max():.8f} violates the unit-ball constraint")

    labels = np.where(norms >= 1.0 - eps_sat, PLASTIC, ELASTIC).astype(np.int8)

    nbr = mesh.tri_neighbors
    plastic_mask = labels == PLASTIC
    has_plastic_nbr = np.zeros(mesh.num_triangles, dtype=bool)
    for k in range(3):
        valid = nbr[:, k] >= 0
        has_plastic_nbr[valid] |= plastic_mask[nbr[valid, k]]
    labels[plastic_mask & ~has_plastic_nbr] = ELASTIC

    # strip components with no fully surrounded triangle (one-wide strips)
    plastic_mask = labels == PLASTIC
    degenerate = []
    for group in _components(np.flatnonzero(plastic_mask), nbr):
        fully_inside = False
        for t in group:
            ns = nbr[t]
            if np.all(ns >= 0) and np.all(plastic_mask[ns]):
                fully_inside = True
                break
        if not fully_inside:
            degenerate.append(group)
            labels[group] = ELASTIC

    interface = []
    for e, (t0, t1) in zip(mesh.edges, mesh.edge_tris):
        if t1 < 0:
            continue
        if labels[t0] != labels[t1]:
            interface.append(e)
    interface = np.array(interface, dtype=np.int64).reshape(-1, 2)
    polylines = _chain_polylines(interface, mesh.vertices)

    return RegionMap(labels=labels, eps_sat=float(eps_sat), mesh=mesh, sigma=sigma,
                     interface_edges=interface, sigma_interface=polylines,
                     degenerate_components=degenerate)


def convexity_check(regionmap, mesh, deficit_tol=0.02):
    """Convex-hull area deficit of the plastic set (the barrier hypothesis probe)."""
    cells = regionmap.plastic_cells
    if len(cells) == 0:
        return {"empty": True, "is_convex": None, "hull_area_deficit": 0.0,
                "plastic_area": 0.0, "hull_area": 0.0}
    verts = np.unique(mesh.triangles[cells].ravel())
    pts = mesh.vertices[verts]
    hull = ConvexHull(pts)
    hull_area = float(hull.volume)
    plastic_area = float(mesh.areas[cells].sum())
    deficit = max((hull_area - plastic_area) / hull_area, 0.0) if hull_area > 0 else 0.0
    record = {
        "empty": False,
        "is_convex": bool(deficit <= deficit_tol),
        "hull_area_deficit": deficit,
        "plastic_area": plastic_area,
        "hull_area": hull_area,
    }
    regionmap.convexity = record
    return record


def _split_straight(points, tol):
    """Split an ordered point chain into maximal runs straight within ``tol``."""
    segments = []
    start = 0
    n = len(points)
    while start < n - 1:
        end = start + 1
        while end + 1 < n:
            a, b = points[start], points[end + 1]
            chord = b - a
            L = np.hypot(*chord)
            if L < 1e-300:
                break
            nrm = np.array([-chord[1], chord[0]]) / L
            dev = np.abs((points[start:end + 2] - a) @ nrm).max()
            if dev > tol:
                break
            end += 1
        segments.append(points[start:end + 1])
        start = end
    return segments


def characteristic_boundary(regionmap, sigma, mesh, eps=0.02):
    """Straight pieces of the plastic-set boundary where the stress is normal.

    Edges of the plastic set (interface edges and domain-boundary edges of
    plastic triangles) are flagged when |sigma . nu| >= 1 - eps, chained, and
    split into maximal straight segments; chains shorter than two mean edge
    lengths are dropped as discretization speckle.  The report is
    theorem-consistent when at most two segments remain.
    """
    sigma = mesh._check_cellwise(sigma)
    labels = regionmap.labels
    h = mesh.edge_length_mean
    flagged = []
    # interface edges, normal taken outward from the plastic side
    for e, (t0, t1) in zip(mesh.edges, mesh.edge_tris):
        if t1 < 0:
            continue
        if labels[t0] == labels[t1]:
            continue
        tp = t0 if labels[t0] == PLASTIC else t1
        v = mesh.vertices[e[1]] - mesh.vertices[e[0]]
        nrm = np.array([-v[1], v[0]]) / np.hypot(*v)
        mid = 0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]])
        if np.dot(nrm, mesh.centroids[tp] - mid) > 0:
            nrm = -nrm
        if abs(np.dot(sigma[tp], nrm)) >= 1.0 - eps:
            flagged.append(e)
    # domain-boundary edges of plastic triangles
    for i, tri in enumerate(mesh.boundary_tri):
        if labels[tri] != PLASTIC:
            continue
        if abs(np.dot(sigma[tri], mesh.boundary_normals[i])) >= 1.0 - eps:
            flagged.append(np.sort(mesh.boundary_edges[i]))
    flagged = np.array(flagged, dtype=np.int64).reshape(-1, 2)

    chains = _chain_polylines(flagged, mesh.vertices)
    tol = max(eps, 3.0 * h)
    segments = []
    for chain in chains:
        length = np.hypot(*np.diff(chain, axis=0).T).sum()
        if length < 2.0 * h:
            continue
        segments.extend(s for s in _split_straight(chain, tol)
                        if np.hypot(*(s[-1] - s[0])) >= 2.0 * h)
    record = {
        "segments": segments,
        "n_components": len(segments),
        "theorem_consistent": bool(len(segments) <= 2),
    }
    regionmap.char_boundary = segments
    return record


def elastic_diagnostics(u, sigma, regionmap, mesh):
    """Harmonicity and gradient-bound checks on the elastic region.

    The gradient bound max|grad u| <= 1 - eps_sat/2 is evaluated away from a
    one-layer band around plastic or degenerate cells and away from boundary
    edges with a saturated normal trace (active boundary jumps).
    """
    u = mesh._check_nodal(u)
    sigma = mesh._check_cellwise(sigma)
    labels = regionmap.labels
    eps = regionmap.eps_sat
    grad = gradient(u, mesh)
    elastic = labels == ELASTIC

    gap = np.linalg.norm(sigma - grad, axis=1)
    max_gap = float(gap[elastic].max()) if elastic.any() else 0.0

    # nodal Laplacian residual at interior nodes fully surrounded by elastic cells
    lap = divergence_adjoint(grad, mesh) / mesh.vertex_mass
    vertex_all_elastic = np.ones(mesh.num_vertices, dtype=bool)
    for k in range(3):
        vs = mesh.triangles[:, k]
        np.logical_and.at(vertex_all_elastic, vs, elastic)
    nodes = mesh.interior_vertex_mask & vertex_all_elastic
    lap_max = float(np.abs(lap[nodes]).max()) if nodes.any() else 0.0

    # exclusion band: one triangle layer around non-elastic or degenerate cells
    special = ~elastic
    for group in regionmap.degenerate_components:
        special[group] = True
    band = special.copy()
    for k in range(3):
        valid = mesh.tri_neighbors[:, k] >= 0
        band[valid] |= special[mesh.tri_neighbors[valid, k]]
    saturated_trace = np.abs(mesh.normal_trace(sigma)) >= 1.0 - eps
    band[mesh.boundary_tri[saturated_trace]] = True
    kept = elastic & ~band
    grad_norm = np.linalg.norm(grad, axis=1)
    max_grad = float(grad_norm[kept].max()) if kept.any() else 0.0
    max_grad_all = float(grad_norm[elastic].max()) if elastic.any() else 0.0

    return {
        "max_sigma_gradient_gap": max_gap,
        "laplacian_residual_max": lap_max,
        "max_gradient_away_from_interface": max_grad,
        "max_gradient_elastic": max_grad_all,
        "passes": bool(max_grad <= 1.0 - eps / 2),
    }
