"""Closed-form reference solutions, point-evaluable, with mesh samplers.

Each oracle exposes vectorized u / sigma / region evaluation on (n, 2) point
arrays, the matching domain builder spec, and hooks that mark boundary
segments and produce the boundary data of the corresponding solve.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dfield
from typing import Callable, Optional

import numpy as np

from .mesh import DIRICHLET, NEUMANN, BoundaryData, MeshError, build_domain, gradient
from .solver import PlasticStrain

ELASTIC, PLASTIC, OUTSIDE = 0, 1, 2
REGION_NAMES = {ELASTIC: "elastic", PLASTIC: "plastic", OUTSIDE: "outside"}

_GEOM_TOL = 1e-12


def _pts(points):
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[-1] != 2:
        raise ValueError("points must be (n, 2)")
    return p


def _rot90(v):
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


@dataclass
class AnalyticSolution:
    """Point-evaluable reference solution (u may be absent for pure stress fields)."""

    name: str
    domain_spec: dict
    sigma: Callable
    u: Optional[Callable] = None
    region: Callable = None
    plastic_density: Optional[Callable] = None
    plastic_boundary_jump: Optional[dict] = None
    discontinuity_points: np.ndarray = dfield(default_factory=lambda: np.zeros((0, 2)))
    _mark: Optional[Callable] = None
    _w: Optional[Callable] = None
    _g: Optional[Callable] = None

    def build_mesh(self, edge_length):
        """Mesh the matching domain and mark its boundary for this problem."""
        spec = dict(self.domain_spec)
        name = spec.pop("name")
        mesh = build_domain(name, edge_length, **spec)
        if self._mark is not None:
            mesh = mesh.with_markers(self._mark)
        return mesh

    def boundary_data(self, mesh):
        return BoundaryData.from_functions(mesh, w=self._w, g=self._g)


def macclintock(a, b):
    """Half-disk crack problem: elastic annulus around a one-fan plastic core.

    Elastic in a < r < b with u = 2 sqrt(a r) sin(theta/2); plastic in r <= a
    where sigma is the unit vortex about the apex (-a, 0) and u is constant
    along the rays from the apex.  The (e_r, e_theta) reading of the stress
    components is the one that makes sigma continuous across r = a, which the
    tests verify pointwise.
    """
    if not 0 < a < b:
        raise MeshError(f"macclintock needs 0 < a < b, got a={a}, b={b}")
    apex = np.array([-a, 0.0])

    def region(points):
        p = _pts(points)
        r = np.hypot(p[:, 0], p[:, 1])
        out = np.full(len(p), ELASTIC, dtype=np.int8)
        out[r <= a + _GEOM_TOL] = PLASTIC
        out[(p[:, 1] < -1e-9) | (r > b + 1e-9)] = OUTSIDE
        return out

    def u(points):
        p = _pts(points)
        r = np.hypot(p[:, 0], p[:, 1])
        theta = np.arctan2(p[:, 1], p[:, 0])
        theta = np.where(theta < 0, 0.0, theta)
        u_el = 2.0 * np.sqrt(a * np.maximum(r, 0)) * np.sin(theta / 2)
        d = p - apex
        phi = np.arctan2(d[:, 1], d[:, 0])
        phi = np.clip(phi, 0.0, np.pi / 2)
        u_pl = 2.0 * a * np.sin(phi)
        return np.where(r <= a + _GEOM_TOL, u_pl, u_el)

    def sigma(points):
        p = _pts(points)
        r = np.hypot(p[:, 0], p[:, 1])
        theta = np.arctan2(p[:, 1], p[:, 0])
        theta = np.where(theta < 0, 0.0, theta)
        er = np.column_stack([np.cos(theta), np.sin(theta)])
        et = _rot90(er)
        amp = np.sqrt(a / np.maximum(r, 1e-300))
        s_el = amp[:, None] * (np.sin(theta / 2)[:, None] * er + np.cos(theta / 2)[:, None] * et)
        d = p - apex
        rho = np.maximum(np.hypot(d[:, 0], d[:, 1]), 1e-300)
        s_pl = _rot90(d) / rho[:, None]
        return np.where((r <= a + _GEOM_TOL)[:, None], s_pl, s_el)

    def plastic_density(points):
        p = _pts(points)
        d = p - apex
        rho = np.maximum(np.hypot(d[:, 0], d[:, 1]), 1e-300)
        phi = np.clip(np.arctan2(d[:, 1], d[:, 0]), 0.0, np.pi / 2)
        mag = np.maximum(2.0 * a * np.cos(phi) / rho - 1.0, 0.0)
        dens = mag[:, None] * _rot90(d) / rho[:, None]
        r = np.hypot(p[:, 0], p[:, 1])
        dens[r > a + _GEOM_TOL] = 0.0
        return dens

    def mark(mid, kind, seg):
        if seg == 0 and mid[0] < -a:  # diameter left of the apex: traction free
            return NEUMANN, 0
        return DIRICHLET, seg + 1      # 1: diameter right of apex, 2: arc

    def w_fn(mid):
        r = np.hypot(mid[0], mid[1])
        if abs(mid[1]) < 1e-9 * b:
            return 0.0
        theta = np.arctan2(mid[1], mid[0])
        return 2.0 * np.sqrt(a * b) * np.sin(theta / 2)

    return AnalyticSolution(
        name="macclintock",
        domain_spec={"name": "half_disk", "radius": b},
        sigma=sigma, u=u, region=region, plastic_density=plastic_density,
        plastic_boundary_jump=None,
        discontinuity_points=np.array([apex]),
        _mark=mark, _w=w_fn, _g=lambda mid: 0.0,
    )


def annulus(a, b, alpha, beta):
    """Radially symmetric ring: purely elastic with a jump at the inner circle.

    Valid only under |beta - alpha| > a ln(b/a); the displacement is
    s a ln(r/b) + beta with s the sign of beta - alpha, the stress s (a/r) e_r,
    and the plastic strain concentrates on r = a with density u(a) - alpha.
    """
    if not 0 < a < b:
        raise MeshError(f"annulus needs 0 < a < b, got a={a}, b={b}")
    gap = abs(beta - alpha)
    if gap <= a * np.log(b / a):
        raise MeshError(
            f"annulus oracle needs |beta - alpha| > a ln(b/a) = {a * np.log(b / a):.6g}, "
            f"got {gap:.6g}")
    s = 1.0 if beta > alpha else -1.0
    u_inner = s * a * np.log(a / b) + beta

    def region(points):
        p = _pts(points)
        r = np.hypot(p[:, 0], p[:, 1])
        out = np.full(len(p), ELASTIC, dtype=np.int8)
        out[(r < a - 1e-9) | (r > b + 1e-9)] = OUTSIDE
        return out

    def u(points):
        p = _pts(points)
        r = np.maximum(np.hypot(p[:, 0], p[:, 1]), 1e-300)
        return s * a * np.log(r / b) + beta

    def sigma(points):
        p = _pts(points)
        r = np.maximum(np.hypot(p[:, 0], p[:, 1]), 1e-300)
        return s * a * p / (r * r)[:, None]

    def w_fn(mid):
        r = np.hypot(mid[0], mid[1])
        return alpha if r < 0.5 * (a + b) else beta

    return AnalyticSolution(
        name="annulus",
        domain_spec={"name": "annulus", "inner": a, "outer": b},
        sigma=sigma, u=u, region=region,
        plastic_density=lambda pts: np.zeros((len(_pts(pts)), 2)),
        plastic_boundary_jump={"curve": "r=a", "radius": a, "density": u_inner - alpha},
        _w=w_fn,
    )


def monotone_fan(theta_samples, h_samples, radius=1.0):
    """Pure fan: u depends only on the angle, the whole sector is plastic.

    ``h_samples`` is an increasing table over ``theta_samples`` interpolated
    piecewise linearly; every difference quotient must exceed 1 and the
    radius may not exceed 1, so the interior plastic density h'(theta)/r - 1
    stays positive throughout.
    """
    th = np.asarray(theta_samples, dtype=float)
    hv = np.asarray(h_samples, dtype=float)
    if th.ndim != 1 or th.shape != hv.shape or len(th) < 2:
        raise MeshError("need matching 1d sample arrays with at least two entries")
    if np.any(np.diff(th) <= 0):
        raise MeshError("theta samples must be strictly increasing")
    slopes = np.diff(hv) / np.diff(th)
    if np.any(slopes <= 1.0):
        raise MeshError(f"all difference quotients must exceed 1, min is {slopes.min():.6g}")
    if radius > 1.0 or radius <= 0:
        raise MeshError("monotone fan needs 0 < radius <= 1")
    t0, t1 = float(th[0]), float(th[-1])

    def angle(p):
        return np.arctan2(p[:, 1], p[:, 0])

    def region(points):
        p = _pts(points)
        r = np.hypot(p[:, 0], p[:, 1])
        a = angle(p)
        inside = (r <= radius + 1e-9) & (a >= t0 - 1e-9) & (a <= t1 + 1e-9)
        out = np.full(len(p), OUTSIDE, dtype=np.int8)
        out[inside] = PLASTIC
        return out

    def u(points):
        p = _pts(points)
        return np.interp(np.clip(angle(p), t0, t1), th, hv)

    def sigma(points):
        p = _pts(points)
        a = angle(p)
        return np.column_stack([-np.sin(a), np.cos(a)])

    def plastic_density(points):
        p = _pts(points)
        a = np.clip(angle(p), t0, t1)
        idx = np.clip(np.searchsorted(th, a, side="right") - 1, 0, len(slopes) - 1)
        r = np.maximum(np.hypot(p[:, 0], p[:, 1]), 1e-300)
        mag = slopes[idx] / r - 1.0
        return mag[:, None] * sigma(p)

    def w_fn(mid):
        r = np.hypot(mid[0], mid[1])
        a = np.arctan2(mid[1], mid[0])
        return float(np.interp(np.clip(a, t0, t1), th, hv))

    return AnalyticSolution(
        name="monotone_fan",
        domain_spec={"name": "fan_sector", "radius": radius, "angle": t1 - t0, "theta0": t0},
        sigma=sigma, u=u, region=region, plastic_density=plastic_density,
        discontinuity_points=np.array([[0.0, 0.0]]),
        _w=w_fn,
    )


def triangle_sigma(max_level=48):
    """Nested-fan stress field on the triangle (0,0), (0,1), (1/2, 1/2); no u.

    On the band 2^-(n+1) < x + y <= 2^-n the field is the unit vortex about
    b_n = (2^-(n+1), 2^-(n+1)) above the horizontal split, and the opposite
    vortex about a_{n+1} = (0, 2^-(n+1)) below it, continuous across bands.
    """
    def region(points):
        p = _pts(points)
        x, y = p[:, 0], p[:, 1]
        inside = (x >= -1e-12) & (y >= x - 1e-12) & (y <= 1 - x + 1e-12) & (x + y > 0)
        out = np.full(len(p), OUTSIDE, dtype=np.int8)
        out[inside] = PLASTIC
        return out

    def level(p):
        s = np.maximum(p[:, 0] + p[:, 1], 1e-300)
        return np.clip(np.floor(-np.log2(s)).astype(int), 0, max_level)

    def sigma(points):
        p = _pts(points)
        n = level(p)
        scale = np.exp2(-(n + 1).astype(float))
        upper = p[:, 1] >= scale - 1e-15
        center = np.where(upper[:, None],
                          np.column_stack([scale, scale]),
                          np.column_stack([np.zeros(len(p)), scale]))
        d = p - center
        rho = np.maximum(np.hypot(d[:, 0], d[:, 1]), 1e-300)
        v = _rot90(d) / rho[:, None]
        return np.where(upper[:, None], v, -v)

    return AnalyticSolution(
        name="triangle_sigma",
        domain_spec={"name": "triangle", "p0": (0.0, 0.0), "p1": (0.5, 0.5), "p2": (0.0, 1.0)},
        sigma=sigma, u=None, region=region,
        discontinuity_points=np.array([[0.0, 0.0]]),
    )


def triangle_apexes(n_max):
    """The fan apexes b_n and a_{n+1} of the nested-triangle field, n = 0..n_max."""
    out = []
    for n in range(n_max + 1):
        s = 2.0 ** (-(n + 1))
        out.append(("b", n, np.array([s, s])))
        out.append(("a", n + 1, np.array([0.0, s])))
    return out


ORACLES = {
    "macclintock": macclintock,
    "annulus": annulus,
    "monotone_fan": monotone_fan,
    "triangle_sigma": triangle_sigma,
}


def make_oracle(name, params):
    if name not in ORACLES:
        raise MeshError(f"unknown oracle {name!r}; expected one of {sorted(ORACLES)}")
    return ORACLES[name](**params)


# --------------------------------------------------------------------------
# sampling and error measurement
# --------------------------------------------------------------------------

def sample_fields(oracle, mesh):
    """Vertex-sample u and centroid-sample sigma onto the mesh."""
    sig = oracle.sigma(mesh.centroids)
    u = oracle.u(mesh.vertices) if oracle.u is not None else None
    return u, sig


def sample_triple(oracle, mesh, bdata):
    """Discretely compatible (u, sigma, p): p is extracted from the gradient split."""
    u, sig = sample_fields(oracle, mesh)
    if u is None:
        raise MeshError(f"oracle {oracle.name} has no displacement to sample")
    p_int = gradient(u, mesh) - sig
    p_bdy = bdata.w - mesh.edge_trace(u, DIRICHLET)
    return u, sig, PlasticStrain(interior=p_int, boundary=p_bdy)


def truncated_gradient_energy(oracle, mesh, y_cuts):
    """Discrete H1 energy of the stress above horizontal cuts (blow-up probe).

    The stress is vertex-sampled and differentiated per component with the P1
    gradient; each value integrates |grad sigma|^2 over the triangles whose
    centroids lie above the cut.  Nested cuts give monotone values; growth
    without apparent bound is the expected signature of fan accumulation.
    """
    nodal = oracle.sigma(mesh.vertices)
    g1 = gradient(nodal[:, 0], mesh)
    g2 = gradient(nodal[:, 1], mesh)
    dens = np.einsum("ij,ij->i", g1, g1) + np.einsum("ij,ij->i", g2, g2)
    out = []
    for cut in y_cuts:
        mask = mesh.centroids[:, 1] > cut
        out.append(float(np.dot(mesh.areas[mask], dens[mask])))
    return out


def compare(oracle, u, sigma, mesh, eps_sat=0.02):
    """Relative L2 errors vs the oracle plus a region confusion matrix.

    The displacement comparison is shift-invariant: means are matched first.
    """
    from .classify import classify_regions

    sigma = mesh._check_cellwise(sigma)
    centroid_region = oracle.region(mesh.centroids)
    if np.mean(centroid_region == OUTSIDE) > 5e-3:
        raise MeshError(f"mesh is incompatible with the {oracle.name} oracle domain")

    m = mesh.vertex_mass
    u_ref = oracle.u(mesh.vertices) if oracle.u is not None else None
    if u_ref is not None:
        u = mesh._check_nodal(u)
        shift = np.dot(m, u - u_ref) / m.sum()
        num = np.sqrt(np.dot(m, (u - shift - u_ref) ** 2))
        den = np.sqrt(np.dot(m, u_ref ** 2))
        u_err = float(num / den) if den > 0 else float(num)
    else:
        u_err = float("nan")

    s_ref = oracle.sigma(mesh.centroids)
    ds = sigma - s_ref
    num = np.sqrt(np.dot(mesh.areas, np.einsum("ij,ij->i", ds, ds)))
    den = np.sqrt(np.dot(mesh.areas, np.einsum("ij,ij->i", s_ref, s_ref)))
    s_err = float(num / den) if den > 0 else float(num)

    labels = classify_regions(sigma, mesh, eps_sat).labels
    confusion = np.zeros((2, 2), dtype=np.int64)  # rows: oracle, cols: computed
    for o_lab in (ELASTIC, PLASTIC):
        for c_lab in (ELASTIC, PLASTIC):
            confusion[o_lab, c_lab] = int(np.sum((centroid_region == o_lab) & (labels == c_lab)))
    return {
        "u_rel_l2": u_err,
        "sigma_rel_l2": s_err,
        "region_confusion": confusion,
    }
