"""Characteristic-line machinery on reconstructed stress fields.

Trajectories solve gamma' = sigma_perp(gamma) by classic RK4 over any field
exposing point evaluation (a P1 reconstruction of a cell stress, or a
closed-form solution).  On top of the tracer sit the structural probes:
straightness and constancy inside the plastic region, fan detection,
level-set alignment, interface-crossing classification, and the loop audit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from matplotlib.tri import Triangulation
from scipy.spatial import cKDTree

from .analytic import OUTSIDE as _OUTSIDE
from .classify import PLASTIC, _components
from .mesh import MeshError

TERM_BOUNDARY = "boundary"
TERM_ZERO = "zero_sigma"
TERM_DISCONTINUITY = "discontinuity_point"
TERM_MAXLEN = "max_length"
TERM_LOOP = "loop_detected"

ZERO_SIGMA_THRESHOLD = 0.1
LOOP_INDEX_GAP = 10


def _rot90(v):
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


class SigmaInterpolant:
    """Continuous P1 reconstruction of a per-triangle stress field.

    Nodal values are area-weighted averages of the adjacent cells; point
    evaluation is barycentric, renormalized onto the unit ball when the
    interpolated norm overshoots.  Marked discontinuity points (candidates
    for the at-most-two bad points of the stress) stop the tracer early.
    """

    def __init__(self, mesh, nodal_sigma, discontinuity_points=(), nodal_u=None):
        self.mesh = mesh
        self.nodal_sigma = nodal_sigma
        self.nodal_u = nodal_u
        self.discontinuity_points = np.asarray(discontinuity_points, dtype=float).reshape(-1, 2)
        self._tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
        self._finder = self._tri.get_trifinder()

    def locate(self, points):
        p = np.atleast_2d(points)
        return self._finder(p[:, 0], p[:, 1])

    def contains(self, points):
        return self.locate(points) >= 0

    def _bary(self, points, tris):
        t = self.mesh.triangles[tris]
        v = self.mesh.vertices
        a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
        l1 = ((points[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
              - (points[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])) / det
        l2 = ((b[:, 0] - a[:, 0]) * (points[:, 1] - a[:, 1])
              - (b[:, 1] - a[:, 1]) * (points[:, 0] - a[:, 0])) / det
        return np.column_stack([1.0 - l1 - l2, l1, l2]), t

    def sigma_at(self, points):
        """Interpolated stress; NaN outside the domain."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        tris = self.locate(p)
        out = np.full((len(p), 2), np.nan)
        ok = tris >= 0
        if ok.any():
            lam, t = self._bary(p[ok], tris[ok])
            vals = np.einsum("ik,ikj->ij", lam, self.nodal_sigma[t])
            r = np.linalg.norm(vals, axis=1)
            over = r > 1.0
            vals[over] /= r[over, None]
            out[ok] = vals
        return out

    def u_at(self, points):
        if self.nodal_u is None:
            return None
        p = np.atleast_2d(np.asarray(points, dtype=float))
        tris = self.locate(p)
        out = np.full(len(p), np.nan)
        ok = tris >= 0
        if ok.any():
            lam, t = self._bary(p[ok], tris[ok])
            out[ok] = np.einsum("ik,ik->i", lam, self.nodal_u[t])
        return out


class AnalyticField:
    """Adapter exposing a closed-form solution through the tracer protocol."""

    def __init__(self, oracle):
        self.oracle = oracle
        self.discontinuity_points = oracle.discontinuity_points

    def contains(self, points):
        return self.oracle.region(points) != _OUTSIDE

    def sigma_at(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = self.oracle.sigma(p)
        out[~self.contains(p)] = np.nan
        return out

    def u_at(self, points):
        if self.oracle.u is None:
            return None
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = self.oracle.u(p)
        out[~self.contains(p)] = np.nan
        return out


def reconstruct_sigma(sigma, mesh, discontinuity_points=(), u=None):
    """Area-weighted nodal averaging of a cell stress into a SigmaInterpolant."""
    sigma = mesh._check_cellwise(sigma)
    nodal = np.zeros((mesh.num_vertices, 2))
    wsum = np.zeros(mesh.num_vertices)
    for k in range(3):
        vs = mesh.triangles[:, k]
        np.add.at(nodal, vs, sigma * mesh.areas[:, None])
        np.add.at(wsum, vs, mesh.areas)
    nodal /= wsum[:, None]
    nodal_u = mesh._check_nodal(u) if u is not None else None
    return SigmaInterpolant(mesh, nodal, discontinuity_points, nodal_u)


@dataclass
class Characteristic:
    points: np.ndarray
    termination: str
    sigma_samples: np.ndarray
    u_samples: Optional[np.ndarray]
    arc_length: float
    step: float


def _sigma_one(field, x):
    return field.sigma_at(x[None, :])[0]


def trace(field, x0, direction=1, step=0.01, max_length=10.0):
    """Integrate gamma' = direction * sigma_perp(gamma) from x0 with RK4.

    Stops on leaving the domain (exit point bisected onto the boundary to
    step/100), on |sigma| < 0.1 (isolated zero of the elastic gradient), on
    entering a 2*step ball around a marked discontinuity point, on exceeding
    max_length, or on revisiting an earlier point (index gap > 10) within
    step/2.
    """
    x0 = np.asarray(x0, dtype=float)
    if not field.contains(x0[None, :])[0]:
        raise MeshError(f"trace seed {tuple(x0)} lies outside the domain")
    disc = field.discontinuity_points
    if len(disc) and np.min(np.hypot(*(disc - x0).T)) <= 2 * step:
        raise MeshError("trace seed coincides with a marked discontinuity point")

    def rhs(x):
        s = _sigma_one(field, x)
        if np.any(np.isnan(s)):
            return None
        return direction * np.array([-s[1], s[0]])

    pts = [x0.copy()]
    length = 0.0
    termination = TERM_MAXLEN
    x = x0.copy()
    max_steps = int(np.ceil(max_length / step)) + 10
    for _ in range(max_steps):
        s_here = _sigma_one(field, x)
        if np.linalg.norm(s_here) < ZERO_SIGMA_THRESHOLD:
            termination = TERM_ZERO
            break

        def rk4(x, hstep):
            k1 = rhs(x)
            if k1 is None:
                return None
            k2 = rhs(x + 0.5 * hstep * k1)
            if k2 is None:
                return None
            k3 = rhs(x + 0.5 * hstep * k2)
            if k3 is None:
                return None
            k4 = rhs(x + hstep * k3)
            if k4 is None:
                return None
            return x + (hstep / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

        xn = rk4(x, step)
        if xn is not None and not field.contains(xn[None, :])[0]:
            xn = None
        if xn is None:
            # bisect along the last admissible direction onto the boundary
            d = rhs(x)
            if d is None or np.linalg.norm(d) < 1e-12:
                termination = TERM_BOUNDARY
                break
            lo, hi = 0.0, step
            while hi - lo > step / 100.0:
                mid = 0.5 * (lo + hi)
                if field.contains((x + mid * d)[None, :])[0]:
                    lo = mid
                else:
                    hi = mid
            if lo > 0:
                x_exit = x + lo * d
                length += np.linalg.norm(x_exit - x)
                pts.append(x_exit)
            termination = TERM_BOUNDARY
            break
        length += np.linalg.norm(xn - x)
        pts.append(xn)
        x = xn
        if len(disc) and np.min(np.hypot(*(disc - x).T)) <= 2 * step:
            termination = TERM_DISCONTINUITY
            break
        if length > max_length:
            termination = TERM_MAXLEN
            break
        if len(pts) > LOOP_INDEX_GAP + 1:
            older = np.array(pts[:len(pts) - 1 - LOOP_INDEX_GAP])
            if np.min(np.hypot(*(older - x).T)) < step / 2.0:
                termination = TERM_LOOP
                break

    points = np.array(pts)
    sig = field.sigma_at(points)
    u = field.u_at(points)
    return Characteristic(points=points, termination=termination, sigma_samples=sig,
                          u_samples=u, arc_length=length, step=step)


# --------------------------------------------------------------------------
# structural probes
# --------------------------------------------------------------------------

def _plastic_mask_of_points(points, regionmap):
    tris = Triangulation(regionmap.mesh.vertices[:, 0], regionmap.mesh.vertices[:, 1],
                         regionmap.mesh.triangles).get_trifinder()(points[:, 0], points[:, 1])
    mask = np.zeros(len(points), dtype=bool)
    inside = tris >= 0
    mask[inside] = regionmap.labels[tris[inside]] == PLASTIC
    return mask, tris


def straightness_and_constancy(char, regionmap, tol=None, exclude_points=(), exclude_radius=0.0):
    """Deviation from a straight line and from constant sigma / u, per plastic sub-arc.

    Samples within ``exclude_radius`` of any of ``exclude_points`` (apex
    candidates, where the continuum statements are void) are dropped before
    splitting into sub-arcs.  When ``tol`` is given, a pass flag is attached:
    all deviations on all sub-arcs at most tol.
    """
    mask, _ = _plastic_mask_of_points(char.points, regionmap)
    pts_excl = np.asarray(exclude_points, dtype=float).reshape(-1, 2)
    if len(pts_excl) and exclude_radius > 0:
        d = cKDTree(pts_excl).query(char.points)[0]
        mask &= d > exclude_radius
    records = []
    skipped = 0
    i = 0
    n = len(char.points)
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        if j - i + 1 < 3:
            skipped += 1
        else:
            pts = char.points[i:j + 1]
            chord = pts[-1] - pts[0]
            L = np.hypot(*chord)
            if L > 1e-14:
                nrm = np.array([-chord[1], chord[0]]) / L
                straight = float(np.abs((pts - pts[0]) @ nrm).max())
            else:
                straight = float(np.linalg.norm(pts - pts[0], axis=1).max())
            mid = (i + j) // 2
            sig_dev = float(np.linalg.norm(char.sigma_samples[i:j + 1]
                                           - char.sigma_samples[mid], axis=1).max())
            if char.u_samples is not None:
                u_dev = float(np.abs(char.u_samples[i:j + 1] - char.u_samples[mid]).max())
            else:
                u_dev = float("nan")
            records.append({
                "start": i, "stop": j,
                "length": float(np.hypot(*np.diff(pts, axis=0).T).sum()),
                "straightness": straight,
                "sigma_constancy": sig_dev,
                "u_constancy": u_dev,
            })
        i = j + 1
    out = {"sub_arcs": records, "skipped_short": skipped}
    if tol is not None:
        devs = [max(r["straightness"], r["sigma_constancy"],
                    0.0 if np.isnan(r["u_constancy"]) else r["u_constancy"])
                for r in records]
        out["passes"] = bool(all(d <= tol for d in devs))
        out["tol"] = float(tol)
    return out


def _line_intersections(c, d, pairs, min_angle=0.02):
    """Intersection points of centroid-direction lines for index pairs."""
    i, j = pairs[:, 0], pairs[:, 1]
    cross = d[i, 0] * d[j, 1] - d[i, 1] * d[j, 0]
    ok = np.abs(cross) >= min_angle
    i, j, cross = i[ok], j[ok], cross[ok]
    dc = c[j] - c[i]
    t = (dc[:, 0] * d[j, 1] - dc[:, 1] * d[j, 0]) / cross
    return c[i] + t[:, None] * d[i]


def _boundary_tree(mesh):
    mids = mesh.boundary_midpoints
    ends = mesh.vertices[np.unique(mesh.boundary_edges.ravel())]
    return cKDTree(np.vstack([mids, ends]))


def detect_fans(regionmap, sigma, mesh, min_members=5, seed=0):
    """Cluster characteristic lines of plastic cells into boundary fans.

    Lines through plastic-cell centroids along sigma_perp are intersected
    pairwise (nearest-neighbor pairs at several ranks keep the pair count
    linear); intersections near the domain boundary are clustered, every
    cluster apex is refit by least squares over the lines passing close to
    it, and clusters keeping at least ``min_members`` members with spread
    <= 2h survive.  Leftover plastic triangles are grouped by adjacency.
    """
    sigma = mesh._check_cellwise(sigma)
    cells = regionmap.plastic_cells
    h = mesh.edge_length_mean
    empty = {"fans": [], "n_components": 0, "leftover_components": []}
    if len(cells) == 0:
        return empty
    c = mesh.centroids[cells]
    s = sigma[cells]
    nrm = np.linalg.norm(s, axis=1)
    good = nrm > 0.5
    cells, c, s, nrm = cells[good], c[good], s[good], nrm[good]
    if len(cells) < min_members:
        comps = _components(cells, mesh.tri_neighbors)
        return {"fans": [], "n_components": len(comps), "leftover_components": comps}
    d = _rot90(s / nrm[:, None])

    n = len(cells)
    tree = cKDTree(c)
    ranks = [r for r in (4, 16, 64, 256) if r < n]
    pairs = []
    for r in ranks:
        _, idx = tree.query(c, k=r + 1)
        pairs.append(np.column_stack([np.arange(n), idx[:, r]]))
    rng = np.random.default_rng(seed)
    extra = min(4 * n, 200000)
    pairs.append(rng.integers(0, n, size=(extra, 2)))
    pairs = np.vstack(pairs)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]

    pts = _line_intersections(c, d, pairs)
    btree = _boundary_tree(mesh)
    near_b, _ = btree.query(pts, distance_upper_bound=4.0 * h)
    pts = pts[np.isfinite(near_b)]
    if len(pts) == 0:
        comps = _components(cells, mesh.tri_neighbors)
        return {"fans": [], "n_components": len(comps), "leftover_components": comps}

    # grid clustering at scale 2h
    keys = np.round(pts / (2.0 * h)).astype(np.int64)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    order = np.argsort(-counts)
    candidates = []
    taken = set()
    for k in order:
        if counts[k] < min_members:
            break
        key = tuple(uniq[k])
        if any((key[0] + dx, key[1] + dy) in taken for dx in (-1, 0, 1) for dy in (-1, 0, 1)):
            continue
        taken.add(key)
        sel = np.all(keys == uniq[k], axis=1)
        candidates.append(pts[sel].mean(axis=0))

    normals = _rot90(d)
    fans = []
    member_tol = 3.0 * h
    claimed = np.zeros(n, dtype=bool)
    for apex in candidates:
        members = None
        for _ in range(3):  # alternate membership and least-squares refit
            dist = np.abs(np.einsum("ij,ij->i", normals, apex - c))
            members = np.flatnonzero((dist <= member_tol) & ~claimed)
            if len(members) < min_members:
                members = None
                break
            nn = normals[members]
            A = np.einsum("ki,kj->ij", nn, nn)
            rhs = np.einsum("ki,kj,kj->i", nn, nn, c[members])
            try:
                apex = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                members = None
                break
        if members is None:
            continue
        dist = np.abs(np.einsum("ij,ij->i", normals[members], apex - c[members]))
        spread = float(np.sqrt(np.mean(dist ** 2)))
        bdist, _ = btree.query(apex)
        if spread > 2.0 * h or bdist > 4.0 * h:
            continue
        rel = c[members] - apex
        rho = np.linalg.norm(rel, axis=1)
        ang = np.arctan2(rel[:, 1], rel[:, 0])
        signs = np.sign(np.einsum("ij,ij->i", s[members], _rot90(rel)))
        orient = 1.0 if signs.sum() >= 0 else -1.0
        vort = orient * _rot90(rel) / rho[:, None]
        dev = np.linalg.norm(s[members] - vort, axis=1)
        far = rho >= 5.0 * h  # the vortex shape is only O(h)-clean away from the apex core
        claimed[members] = True
        fans.append({
            "apex": apex.copy(),
            "members": cells[members],
            "angular_extent": (float(ang.min()), float(ang.max())),
            "spread": spread,
            "orientation": orient,
            "vortex_deviation_max": float(dev.max()),
            "vortex_deviation_far": float(dev[far].max()) if far.any() else float("nan"),
        })

    leftover = cells[~claimed]
    comps = _components(leftover, mesh.tri_neighbors)
    return {"fans": fans, "n_components": len(comps), "leftover_components": comps}


def level_set_alignment(u, level, regionmap, mesh):
    """Fit a line to the superlevel boundary of u inside the plastic set.

    Reports the RMS point-to-line distance and the angle between the fitted
    direction and sigma_perp at the fitted midpoint; both should vanish with
    the mesh size when the level boundary is a characteristic segment.
    """
    u = mesh._check_nodal(u)
    cells = regionmap.plastic_cells
    if len(cells) == 0:
        return {"status": "level out of range"}
    uv = u[mesh.triangles[cells]]
    area_above = float(mesh.areas[cells][uv.mean(axis=1) > level].sum())
    area_pl = float(mesh.areas[cells].sum())
    if not 0.0 < area_above < area_pl:
        return {"status": "level out of range"}

    segs = []
    for t in cells:
        vals = u[mesh.triangles[t]]
        if vals.min() >= level or vals.max() < level:
            continue
        pts = mesh.vertices[mesh.triangles[t]]
        crossings = []
        for i in range(3):
            va, vb = vals[i], vals[(i + 1) % 3]
            if (va - level) * (vb - level) < 0:
                lam = (level - va) / (vb - va)
                crossings.append(pts[i] + lam * (pts[(i + 1) % 3] - pts[i]))
        if len(crossings) == 2:
            segs.append(crossings)
    if not segs:
        return {"status": "level out of range"}
    segs = np.asarray(segs)
    pts = segs.reshape(-1, 2)

    centroid = pts.mean(axis=0)
    q = pts - centroid
    cov = q.T @ q / len(q)
    evals, evecs = np.linalg.eigh(cov)
    direction = evecs[:, -1]
    nrm = np.array([-direction[1], direction[0]])
    rms = float(np.sqrt(np.mean((q @ nrm) ** 2)))

    t = q @ direction
    midpoint = centroid + 0.5 * (t.min() + t.max()) * direction
    finder = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1],
                           mesh.triangles).get_trifinder()
    tri = int(finder(midpoint[0], midpoint[1]))
    if tri < 0:
        return {"status": "level out of range"}
    sig = regionmap.sigma[tri]
    sig_norm = np.linalg.norm(sig)
    if sig_norm > 1e-12:
        sperp = np.array([-sig[1], sig[0]]) / sig_norm
        cosang = abs(float(np.dot(direction, sperp)))
        angle = float(np.arccos(np.clip(cosang, -1.0, 1.0)))
    else:
        angle = float("nan")
    return {
        "status": "ok",
        "rms_distance": rms,
        "angle": angle,
        "n_segments": len(segs),
        "midpoint": midpoint,
        "direction": direction,
        "level": float(level),
        "area_above": area_above,
    }


def crossing_analysis(char, regionmap):
    """Classify how a trajectory meets the elastic/plastic interface.

    Events are transversal crossings (strictly plastic on one side of the
    index window, elastic on the other), tangential runs hugging the
    interface, and endpoint touches at the trajectory ends.
    """
    mesh = regionmap.mesh
    mask, tris = _plastic_mask_of_points(char.points, regionmap)
    inside = tris >= 0
    events = []
    if len(regionmap.interface_edges) == 0:
        return events
    mids = 0.5 * (mesh.vertices[regionmap.interface_edges[:, 0]]
                  + mesh.vertices[regionmap.interface_edges[:, 1]])
    ends = mesh.vertices[np.unique(regionmap.interface_edges.ravel())]
    itree = cKDTree(np.vstack([mids, ends]))
    dist, _ = itree.query(char.points)
    near = dist <= 0.9 * char.step

    # tangential runs: >= 5 consecutive samples near the interface
    tangential = np.zeros(len(char.points), dtype=bool)
    i = 0
    n = len(char.points)
    while i < n:
        if not near[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and near[j + 1]:
            j += 1
        if j - i + 1 >= 5:
            tangential[i:j + 1] = True
            events.append({"kind": "tangential_along_char_segment",
                           "start": i, "stop": j,
                           "point": char.points[(i + j) // 2].copy()})
        i = j + 1

    w = 5
    for i in range(n - 1):
        if not (inside[i] and inside[i + 1]):
            continue
        if mask[i] == mask[i + 1]:
            continue
        if tangential[i] or tangential[i + 1]:
            continue
        lo, hi = max(0, i - w + 1), min(n, i + 1 + w)
        before = mask[lo:i + 1]
        after = mask[i + 1:hi]
        pure = before.all() == before.any() and after.all() == after.any()
        at_end = i < w or i + 1 > n - w
        if pure and not at_end:
            direction = "plastic_to_elastic" if mask[i] else "elastic_to_plastic"
            events.append({"kind": "transversal", "direction": direction,
                           "index": i, "point": char.points[i].copy()})
        else:
            events.append({"kind": "endpoint_touch", "index": i,
                           "point": char.points[i].copy()})
    return events


def seed_grid(field, spacing, margin=0.0):
    """Regular interior seed grid, away from marked discontinuity points."""
    if isinstance(field, SigmaInterpolant):
        lo = field.mesh.vertices.min(axis=0)
        hi = field.mesh.vertices.max(axis=0)
    else:
        raise MeshError("seed_grid needs a SigmaInterpolant; pass explicit seeds otherwise")
    xs = np.arange(lo[0] + spacing / 2, hi[0], spacing)
    ys = np.arange(lo[1] + spacing / 2, hi[1], spacing)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    keep = field.contains(pts)
    disc = field.discontinuity_points
    if len(disc):
        d = cKDTree(disc).query(pts)[0]
        keep &= d > max(margin, 4 * spacing / 10)
    return pts[keep]


def no_loop_audit(field, seeds, step, max_length, regionmap=None, workers=1):
    """Trace from every seed in both directions and count loop terminations.

    Zero loops are expected among plastic-touching trajectories on any field
    passing the optimality residuals; closed elastic orbits (gradient-flow
    orthogonals around a zero of sigma) are counted separately.  Also
    reports how much of the plastic set the traced trajectories cover.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    disc = field.discontinuity_points
    if len(disc):
        ok = cKDTree(disc).query(seeds)[0] > 2 * step
        seeds = seeds[ok]
    seeds = seeds[field.contains(seeds)]

    def run(seed):
        out = []
        for direction in (1, -1):
            try:
                out.append(trace(field, seed, direction=direction, step=step,
                                 max_length=max_length))
            except MeshError:
                pass
        return out

    chars = []
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as ex:
            for res in ex.map(run, seeds):
                chars.extend(res)
    else:
        for seed in seeds:
            chars.extend(run(seed))

    terminations = {}
    loops_total = 0
    loops_plastic = 0
    visited = set()
    plastic_cells = set()
    if regionmap is not None:
        plastic_cells = set(int(t) for t in regionmap.plastic_cells)
    for ch in chars:
        terminations[ch.termination] = terminations.get(ch.termination, 0) + 1
        touches = False
        if regionmap is not None:
            _, tris = _plastic_mask_of_points(ch.points, regionmap)
            hit = {int(t) for t in tris[tris >= 0] if int(t) in plastic_cells}
            visited |= hit
            touches = bool(hit)
        if ch.termination == TERM_LOOP:
            loops_total += 1
            if touches:
                loops_plastic += 1
    coverage = (len(visited) / max(len(plastic_cells), 1)) if regionmap is not None else float("nan")
    return {
        "n_seeds": int(len(seeds)),
        "n_traced": len(chars),
        "terminations": terminations,
        "loops_total": loops_total,
        "loops_plastic_touching": loops_plastic,
        "plastic_coverage": coverage,
        "characteristics": chars,
    }
