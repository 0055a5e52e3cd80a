"""Triangulated 2D domains and the discrete gradient / divergence pair.

Displacements are piecewise affine (one value per vertex), stresses are
piecewise constant (one 2-vector per triangle).  Everything downstream --
energies, the saddle-point solver, region segmentation, tracing -- works on
this P1/P0 pairing, so the adjointness of `gradient` and `divergence_adjoint`
is kept exact (up to rounding) rather than approximate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

_AREA_EPS = 1e-14


class MeshError(ValueError):
    """Raised for invalid mesh construction or mismatched field sizes."""


def _rot90(v):
    """Counterclockwise quarter turn, works on (..., 2) arrays."""
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


@dataclass
class TriMesh:
    """Conforming triangle mesh of a polygonal domain with marked boundary.

    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counterclockwise
    boundary_edges : (nb, 2) int array, each edge lying on exactly one triangle
    boundary_kind : (nb,) array of {"dirichlet", "neumann"}
    boundary_segment : (nb,) int array, geometric segment id from the builder
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_kind: np.ndarray
    boundary_segment: np.ndarray

    # derived quantities, filled in __post_init__
    areas: np.ndarray = field(init=False, repr=False)
    grad_hats: np.ndarray = field(init=False, repr=False)
    centroids: np.ndarray = field(init=False, repr=False)
    vertex_mass: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        self.boundary_kind = np.asarray(self.boundary_kind, dtype=object).reshape(-1)
        self.boundary_segment = np.asarray(self.boundary_segment, dtype=np.int64).reshape(-1)
        self._validate_and_build()

    # -- construction ------------------------------------------------------

    def _validate_and_build(self):
        v, t = self.vertices, self.triangles
        if v.ndim != 2 or v.shape[1] != 2:
            raise MeshError("vertices must be an (nv, 2) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must be an (nt, 3) array")
        if t.min(initial=0) < 0 or t.max(initial=-1) >= len(v):
            raise MeshError("triangle indices out of range")

        p0 = v[t[:, 0]]
        e1 = v[t[:, 1]] - p0
        e2 = v[t[:, 2]] - p0
        self.areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        if np.any(self.areas <= _AREA_EPS):
            bad = int(np.argmin(self.areas))
            raise MeshError(
                f"triangle {bad} has non-positive area {self.areas[bad]:.3e}; "
                "triangles must be counterclockwise and non-degenerate"
            )
        self.centroids = (v[t[:, 0]] + v[t[:, 1]] + v[t[:, 2]]) / 3.0

        # grad of the three hat functions on each triangle: (nt, 3, 2)
        g = np.empty((len(t), 3, 2))
        for i in range(3):
            opp = v[t[:, (i + 2) % 3]] - v[t[:, (i + 1) % 3]]
            g[:, i, :] = _rot90(opp) / (2.0 * self.areas)[:, None]
        self.grad_hats = g

        mass = np.zeros(len(v))
        np.add.at(mass, t.ravel(), np.repeat(self.areas / 3.0, 3))
        self.vertex_mass = mass

        self._build_edges()
        self._check_boundary()
        self._build_operators()

    def _build_edges(self):
        t = self.triangles
        raw = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        tri_of = np.tile(np.arange(len(t)), 3)
        key = np.sort(raw, axis=1)
        uniq, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        if counts.max(initial=0) > 2:
            raise MeshError("non-conforming mesh: an edge is shared by more than two triangles")
        self.edges = uniq                      # (ne, 2) sorted vertex pairs
        self.edge_counts = counts
        # edge -> adjacent triangles (-1 padding)
        e2t = np.full((len(uniq), 2), -1, dtype=np.int64)
        slot = np.zeros(len(uniq), dtype=np.int64)
        for e, tri in zip(inv, tri_of):
            e2t[e, slot[e]] = tri
            slot[e] += 1
        self.edge_tris = e2t
        # triangle -> neighbor triangles across edges opposite local vertex order
        nbr = np.full((len(t), 3), -1, dtype=np.int64)
        local = {}
        for e, tri in zip(inv, tri_of):
            local.setdefault(tri, []).append(e)
        edge_of_tri = inv.reshape(3, len(t)).T  # columns: edge01, edge12, edge20
        for k in range(3):
            e = edge_of_tri[:, k]
            both = self.edge_tris[e]
            other = np.where(both[:, 0] == np.arange(len(t)), both[:, 1], both[:, 0])
            nbr[:, k] = other
        self.tri_neighbors = nbr
        self._edge_index = {tuple(p): i for i, p in enumerate(map(tuple, uniq))}

    def _check_boundary(self):
        topological = set(map(tuple, self.edges[self.edge_counts == 1]))
        declared = set(map(tuple, np.sort(self.boundary_edges, axis=1)))
        if topological != declared:
            raise MeshError(
                "boundary edges must cover exactly the topological boundary "
                f"({len(declared)} declared vs {len(topological)} topological)"
            )
        if len(self.boundary_edges) != len(declared):
            raise MeshError("duplicate boundary edge markers")
        for k in self.boundary_kind:
            if k not in (DIRICHLET, NEUMANN):
                raise MeshError(f"unknown boundary marker kind {k!r}")
        # every boundary vertex must have exactly two boundary edges (closed loops)
        deg = np.zeros(len(self.vertices), dtype=int)
        np.add.at(deg, self.boundary_edges.ravel(), 1)
        on_bdry = deg > 0
        if not np.all(deg[on_bdry] == 2):
            raise MeshError("boundary edges do not form closed loops")
        self.boundary_vertex_mask = on_bdry
        self.interior_vertex_mask = ~on_bdry

        mids = 0.5 * (self.vertices[self.boundary_edges[:, 0]] + self.vertices[self.boundary_edges[:, 1]])
        vecs = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        self.boundary_lengths = np.hypot(vecs[:, 0], vecs[:, 1])
        self.boundary_midpoints = mids
        # adjacent triangle of each boundary edge + outward unit normal
        tri = np.empty(len(self.boundary_edges), dtype=np.int64)
        for i, (a, b) in enumerate(np.sort(self.boundary_edges, axis=1)):
            tri[i] = self.edge_tris[self._edge_index[(a, b)], 0]
        self.boundary_tri = tri
        n = _rot90(vecs) / self.boundary_lengths[:, None]
        flip = np.einsum("ij,ij->i", n, self.centroids[tri] - mids) > 0
        n[flip] *= -1.0
        self.boundary_normals = n

        self.dirichlet = np.flatnonzero(self.boundary_kind == DIRICHLET)
        self.neumann = np.flatnonzero(self.boundary_kind == NEUMANN)

    def _build_operators(self):
        nt, nv = len(self.triangles), len(self.vertices)
        rows = np.repeat(np.arange(2 * nt).reshape(nt, 2), 3, axis=1).ravel()
        cols = np.repeat(self.triangles, 2, axis=0).ravel()
        vals = np.transpose(self.grad_hats, (0, 2, 1)).ravel()
        self._G = sp.csr_matrix((vals, (rows, cols)), shape=(2 * nt, nv))
        w = np.repeat(self.areas, 2)
        self._GtA = self._G.multiply(w[:, None]).T.tocsr()

        def trace_matrix(idx):
            if len(idx) == 0:
                return sp.csr_matrix((0, nv))
            r = np.repeat(np.arange(len(idx)), 2)
            c = self.boundary_edges[idx].ravel()
            return sp.csr_matrix((np.full(2 * len(idx), 0.5), (r, c)), shape=(len(idx), nv))

        self._trace_D = trace_matrix(self.dirichlet)
        self._trace_N = trace_matrix(self.neumann)

    # -- basic queries ------------------------------------------------------

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def edge_length_mean(self):
        v = self.vertices[self.triangles]
        e = np.concatenate([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]])
        return float(np.hypot(e[:, 0], e[:, 1]).mean())

    def total_area(self):
        return float(self.areas.sum())

    def edge_trace(self, u, which):
        """Midpoint value of the affine interpolant of ``u`` on boundary edges.

        ``which`` is "dirichlet" or "neumann".
        """
        u = self._check_nodal(u)
        T = self._trace_D if which == DIRICHLET else self._trace_N
        return T @ u

    def normal_trace(self, sigma, idx=None):
        """sigma . nu on boundary edges, taken from the adjacent triangle."""
        sigma = self._check_cellwise(sigma)
        if idx is None:
            idx = np.arange(len(self.boundary_edges))
        return np.einsum("ij,ij->i", sigma[self.boundary_tri[idx]], self.boundary_normals[idx])

    def with_markers(self, fn):
        """Return a copy with markers reassigned per boundary edge.

        ``fn(midpoint, kind, segment) -> (kind, segment)`` is called once per
        boundary edge.
        """
        kinds, segs = [], []
        for m, k, s in zip(self.boundary_midpoints, self.boundary_kind, self.boundary_segment):
            nk, ns = fn(m, k, int(s))
            kinds.append(nk)
            segs.append(ns)
        return TriMesh(self.vertices.copy(), self.triangles.copy(),
                       self.boundary_edges.copy(), np.array(kinds, dtype=object),
                       np.array(segs, dtype=np.int64))

    def _check_nodal(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.num_vertices,):
            raise MeshError(f"nodal field has shape {u.shape}, expected ({self.num_vertices},)")
        return u

    def _check_cellwise(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (self.num_triangles, 2):
            raise MeshError(
                f"cell field has shape {sigma.shape}, expected ({self.num_triangles}, 2)")
        return sigma


@dataclass
class BoundaryData:
    """Dirichlet samples w (per Dirichlet edge) and Neumann samples g (per Neumann edge)."""

    w: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float).reshape(-1)
        self.g = np.asarray(self.g, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.g))):
            raise MeshError("boundary data contains non-finite samples")

    @classmethod
    def from_functions(cls, mesh, w=None, g=None):
        """Evaluate callables (or broadcast constants) at boundary edge midpoints."""
        def ev(fn, idx):
            if len(idx) == 0:
                return np.zeros(0)
            mids = mesh.boundary_midpoints[idx]
            if callable(fn):
                return np.array([float(fn(m)) for m in mids])
            return np.full(len(idx), 0.0 if fn is None else float(fn))
        data = cls(ev(w, mesh.dirichlet), ev(g, mesh.neumann))
        data.validate(mesh)
        return data

    def validate(self, mesh):
        if len(self.w) != len(mesh.dirichlet):
            raise MeshError(f"w has {len(self.w)} samples for {len(mesh.dirichlet)} Dirichlet edges")
        if len(self.g) != len(mesh.neumann):
            raise MeshError(f"g has {len(self.g)} samples for {len(mesh.neumann)} Neumann edges")


# --------------------------------------------------------------------------
# discrete differential operators
# --------------------------------------------------------------------------

def gradient(u, mesh):
    """Exact gradient of the piecewise-affine interpolant, one 2-vector per triangle."""
    u = mesh._check_nodal(u)
    return (mesh._G @ u).reshape(-1, 2)


def divergence_adjoint(sigma, mesh):
    """Negative transpose of `gradient` under the area-weighted cell product.

    Returns the nodal array  d_v = -sum_T area_T * sigma_T . grad(hat_v)|_T,
    so  <gradient(u), sigma>_areas + <u, d> = 0  exactly for all u, sigma.
    A stress is discretely divergence-free at an interior node iff d = 0 there.
    """
    sigma = mesh._check_cellwise(sigma)
    return -(mesh._GtA @ sigma.ravel())


def _power_iteration(apply_op, inner, n, seed=0, tol=1e-4, max_iter=500):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= math.sqrt(inner(x, x))
    lam = 0.0
    for _ in range(max_iter):
        y = apply_op(x)
        lam_new = inner(x, y)
        ny = math.sqrt(inner(y, y))
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-30):
            lam = lam_new
            break
        lam = lam_new
    return lam


def operator_norm(mesh, with_dirichlet_trace=False, seed=0):
    """Spectral norm of the gradient operator by power iteration (rel. err ~1e-3).

    Measured from the mass-weighted nodal space to the area-weighted cell
    space; with ``with_dirichlet_trace`` the length-weighted Dirichlet midpoint
    trace is stacked below the gradient (the solver's full coupling operator).
    """
    m = mesh.vertex_mass
    TD = mesh._trace_D
    lD = mesh.boundary_lengths[mesh.dirichlet] if len(mesh.dirichlet) else np.zeros(0)

    def apply_op(x):
        y = mesh._GtA @ (mesh._G @ x)
        if with_dirichlet_trace and TD.shape[0]:
            y = y + TD.T @ (lD * (TD @ x))
        return y / m

    lam = _power_iteration(apply_op, lambda a, b: float(np.dot(m * a, b)),
                           mesh.num_vertices, seed=seed, tol=1e-4)
    return math.sqrt(max(lam, 0.0))


# --------------------------------------------------------------------------
# canonical domain builders
# --------------------------------------------------------------------------

def build_domain(name, edge_length, **params):
    """Mesh one of the named domains at the given target edge length.

    Names: rectangle(width, height), disk(radius), annulus(inner, outer),
    half_disk(radius), fan_sector(radius, angle[, theta0]),
    triangle(p0, p1, p2).  All boundary edges start Dirichlet; remap with
    `TriMesh.with_markers`.
    """
    if edge_length <= 0:
        raise MeshError("target edge length must be positive")
    builders = {
        "rectangle": _build_rectangle,
        "disk": _build_disk,
        "annulus": _build_annulus,
        "half_disk": _build_half_disk,
        "fan_sector": _build_fan_sector,
        "triangle": _build_triangle,
    }
    if name not in builders:
        raise MeshError(f"unknown domain {name!r}; expected one of {sorted(builders)}")
    return builders[name](edge_length, **params)


def _segment_markers(nb, seg_fn, mids):
    kinds = np.array([DIRICHLET] * nb, dtype=object)
    segs = np.array([seg_fn(m) for m in mids], dtype=np.int64)
    return kinds, segs


def _finish(vertices, triangles, seg_fn):
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    # extract topological boundary
    raw = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    key = np.sort(raw, axis=1)
    uniq, counts = np.unique(key, axis=0, return_counts=True)
    bedges = uniq[counts == 1]
    mids = 0.5 * (vertices[bedges[:, 0]] + vertices[bedges[:, 1]])
    kinds, segs = _segment_markers(len(bedges), seg_fn, mids)
    return TriMesh(vertices, triangles, bedges, kinds, segs)


def _build_rectangle(h, width=1.0, height=1.0):
    if width <= 0 or height <= 0:
        raise MeshError("rectangle needs positive width and height")
    nx = max(1, round(width / h))
    ny = max(1, round(height / h))
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    tol = 1e-9 * max(width, height)

    def seg(m):
        if abs(m[1]) < tol:
            return 0  # bottom
        if abs(m[0] - width) < tol:
            return 1  # right
        if abs(m[1] - height) < tol:
            return 2  # top
        return 3      # left

    return _finish(verts, tris, seg)


def _ring_points(r, n, theta0, theta1, closed):
    if closed:
        th = theta0 + (theta1 - theta0) * np.arange(n) / n
    else:
        th = np.linspace(theta0, theta1, n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)]), th


def _band(tris, inner_ids, inner_th, outer_ids, outer_th, closed):
    """Conforming triangulation between two concentric rings of node chains.

    Two-pointer sweep by angle; handles differing node counts.  For closed
    rings the chains are augmented with their wrapped-around first node.
    """
    if closed:
        ii = np.concatenate([inner_ids, inner_ids[:1]])
        oi = np.concatenate([outer_ids, outer_ids[:1]])
        it = np.concatenate([inner_th, inner_th[:1] + 2 * np.pi])
        ot = np.concatenate([outer_th, outer_th[:1] + 2 * np.pi])
    else:
        ii, oi, it, ot = inner_ids, outer_ids, inner_th, outer_th
    a = b = 0
    while a < len(ii) - 1 or b < len(oi) - 1:
        adv_inner = b == len(oi) - 1 or (a < len(ii) - 1 and it[a + 1] <= ot[b + 1])
        if adv_inner:
            tris.append((oi[b], ii[a + 1], ii[a]))
            a += 1
        else:
            tris.append((oi[b], oi[b + 1], ii[a]))
            b += 1


def _polar_mesh(h, radius, theta0, theta1, closed, inner_radius=0.0):
    """Graded polar mesh of a disk, sector, or annulus (node at the apex if solid)."""
    span = theta1 - theta0
    nr = max(1, round((radius - inner_radius) / h))
    dr = (radius - inner_radius) / nr
    verts, tris = [], []
    ring_ids, ring_th = [], []

    def count(r):
        if closed:
            return max(4, round(span * r / dr))
        return max(2, round(span * r / dr) + 1)

    if inner_radius == 0.0:
        verts.append((0.0, 0.0))
        ring_ids.append(np.array([0]))
        ring_th.append(np.array([0.5 * (theta0 + theta1)]))
        start = 1
    else:
        pts, th = _ring_points(inner_radius, count(inner_radius), theta0, theta1, closed)
        ids = np.arange(len(pts))
        verts.extend(map(tuple, pts))
        ring_ids.append(ids)
        ring_th.append(th)
        start = 1

    for i in range(start, nr + 1):
        r = inner_radius + i * dr
        pts, th = _ring_points(r, count(r), theta0, theta1, closed)
        ids = np.arange(len(verts), len(verts) + len(pts))
        verts.extend(map(tuple, pts))
        prev_ids, prev_th = ring_ids[-1], ring_th[-1]
        if len(prev_ids) == 1:  # apex fan
            for k in range(len(ids) - 1):
                tris.append((prev_ids[0], ids[k], ids[k + 1]))
            if closed:
                tris.append((prev_ids[0], ids[-1], ids[0]))
        else:
            _band(tris, prev_ids, prev_th, ids, th, closed)
        ring_ids.append(ids)
        ring_th.append(th)
    return np.array(verts), tris


def _build_disk(h, radius=1.0):
    if radius <= 0:
        raise MeshError("disk needs a positive radius")
    verts, tris = _polar_mesh(h, radius, 0.0, 2 * np.pi, closed=True)
    return _finish(verts, tris, lambda m: 0)


def _build_annulus(h, inner=1.0, outer=2.0):
    if not 0 < inner < outer:
        raise MeshError(f"annulus needs 0 < inner < outer, got inner={inner}, outer={outer}")
    verts, tris = _polar_mesh(h, outer, 0.0, 2 * np.pi, closed=True, inner_radius=inner)
    rmid = 0.5 * (inner + outer)

    def seg(m):
        return 0 if np.hypot(m[0], m[1]) < rmid else 1

    return _finish(verts, tris, seg)


def _build_half_disk(h, radius=1.0):
    if radius <= 0:
        raise MeshError("half_disk needs a positive radius")
    verts, tris = _polar_mesh(h, radius, 0.0, np.pi, closed=False)
    tol = 1e-9 * radius

    def seg(m):
        return 0 if abs(m[1]) < tol else 1  # 0: diameter, 1: arc

    return _finish(verts, tris, seg)


def _build_fan_sector(h, radius=1.0, angle=np.pi / 2, theta0=0.0):
    if radius <= 0 or not 0 < angle < 2 * np.pi:
        raise MeshError("fan_sector needs radius > 0 and 0 < angle < 2*pi")
    theta1 = theta0 + angle
    verts, tris = _polar_mesh(h, radius, theta0, theta1, closed=False)
    tol = 1e-9 * radius
    d0 = np.array([np.cos(theta0), np.sin(theta0)])
    d1 = np.array([np.cos(theta1), np.sin(theta1)])

    def seg(m):
        if abs(m[0] * d0[1] - m[1] * d0[0]) < tol and m @ d0 > 0:
            return 0  # side theta = theta0
        if abs(m[0] * d1[1] - m[1] * d1[0]) < tol and m @ d1 > 0:
            return 2  # side theta = theta0 + angle
        return 1      # arc

    return _finish(verts, tris, seg)


def _build_triangle(h, p0=(0.0, 0.0), p1=(1.0, 0.0), p2=(0.0, 1.0)):
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    cross = (p1 - p0)[0] * (p2 - p0)[1] - (p1 - p0)[1] * (p2 - p0)[0]
    if abs(cross) < 1e-14:
        raise MeshError("triangle vertices are collinear")
    if cross < 0:
        p1, p2 = p2, p1
    n = max(1, math.ceil(max(np.linalg.norm(p1 - p0), np.linalg.norm(p2 - p1),
                             np.linalg.norm(p0 - p2)) / h))
    verts, index = [], {}
    for i in range(n + 1):
        for j in range(n + 1 - i):
            index[(i, j)] = len(verts)
            lam1, lam2 = i / n, j / n
            verts.append(tuple(p0 + lam1 * (p1 - p0) + lam2 * (p2 - p0)))
    tris = []
    for i in range(n):
        for j in range(n - i):
            a, b, c = index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]
            tris.append((a, b, c))
            if j < n - i - 1:
                tris.append((b, index[(i + 1, j + 1)], c))
    e01, e12, e20 = p1 - p0, p2 - p1, p0 - p2
    tol = 1e-9 * max(np.linalg.norm(e01), np.linalg.norm(e12))

    def on(m, a, e):
        d = m - a
        return abs(d[0] * e[1] - d[1] * e[0]) / np.linalg.norm(e) < tol

    def seg(m):
        if on(m, p0, e01):
            return 0
        if on(m, p1, e12):
            return 1
        return 2

    return _finish(np.array(verts), tris, seg)


# --------------------------------------------------------------------------
# plain-text save / load
# --------------------------------------------------------------------------

def save_mesh(mesh, path):
    """Write the 'plastiq-mesh 1' whitespace-separated text format."""
    with open(path, "w") as f:
        f.write("plastiq-mesh 1\n")
        f.write(f"{mesh.num_vertices}\n")
        for x, y in mesh.vertices:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        f.write(f"{mesh.num_triangles}\n")
        for a, b, c in mesh.triangles:
            f.write(f"{a} {b} {c}\n")
        f.write(f"{len(mesh.boundary_edges)}\n")
        for (a, b), k, s in zip(mesh.boundary_edges, mesh.boundary_kind, mesh.boundary_segment):
            f.write(f"{a} {b} {k} {s}\n")


def load_mesh(path):
    with open(path) as f:
        tokens = f.read().split()
    it = iter(tokens)
    if next(it) != "plastiq-mesh" or next(it) != "1":
        raise MeshError(f"{path}: not a plastiq-mesh version 1 file")
    nv = int(next(it))
    verts = np.array([[float(next(it)), float(next(it))] for _ in range(nv)])
    nt = int(next(it))
    tris = np.array([[int(next(it)) for _ in range(3)] for _ in range(nt)])
    nb = int(next(it))
    bed, kinds, segs = [], [], []
    for _ in range(nb):
        bed.append((int(next(it)), int(next(it))))
        kinds.append(next(it))
        segs.append(int(next(it)))
    return TriMesh(verts, tris, np.array(bed), np.array(kinds, dtype=object),
                   np.array(segs))
