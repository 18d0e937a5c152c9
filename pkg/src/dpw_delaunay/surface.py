"""Mesh generation over ``z = exp(rho + i t)``, geometric measurements and file export."""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .delaunay import (
    DelaunayGeometry,
    DelaunayParams,
    check_closing,
    expm_traceless,
    xi_minus1,
)
from .dpw import sym_bobenko_values, unit_normal
from .iwasawa import TruncationError, iwasawa_decompose
from .loops import DEFAULT_DEGREE, circle_points, evaluate, from_samples, lambda_derivative


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Immersion sampled on a ``(t, rho)`` grid; ``points[i, j]`` sits at ``t[i]``, ``rho[j]``."""

    t: np.ndarray
    rho: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    params: DelaunayParams
    N: int
    closed: bool
    closure_error: float
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def shape(self):
        return self.points.shape[:2]


@dataclass(frozen=True)
class MeasurementReport:
    measured_neck: float
    measured_bulge: float
    axis_fit_residual: float
    first_integral_spread: float
    period_closure_error: float
    kappa: float
    interior_extrema: bool

    def to_dict(self) -> dict:
        return {
            "measured_neck": self.measured_neck,
            "measured_bulge": self.measured_bulge,
            "axis_fit_residual": self.axis_fit_residual,
            "s_spread": self.first_integral_spread,
            "closure_error": self.period_closure_error,
            "kappa": self.kappa,
            "interior_extrema": self.interior_extrema,
        }


def _rotation_loops(p: DelaunayParams, ts, N):
    """``exp(i t xi_{-1})`` and its lambda-derivative at ``lam0`` for each ``t``."""
    lam = circle_points(4 * N)
    xi = xi_minus1(p, lam)
    vals, dvals = [], []
    for t in ts:
        C = from_samples(expm_traceless(1j * t * xi), N)
        vals.append(evaluate(C, p.lam0))
        dvals.append(evaluate(lambda_derivative(C), p.lam0))
    return np.array(vals), np.array(dvals)


def _radial_frame(p: DelaunayParams, rho, N, tol):
    lam = circle_points(4 * N)
    phi = from_samples(expm_traceless(rho * xi_minus1(p, lam)), N)
    try:
        F = iwasawa_decompose(phi, N, tol).F
    except TruncationError as exc:
        raise TruncationError(f"grid point rho={rho}: {exc}", exc.residual) from exc
    return evaluate(F, p.lam0), evaluate(lambda_derivative(F), p.lam0)


def generate_mesh(p: DelaunayParams, t_steps=128, rho_min=-math.pi, rho_max=math.pi,
                  rho_steps=129, N=DEFAULT_DEGREE, tol=1e-8, workers=None,
                  allow_multiply_wrapped=False, parallel=False) -> SurfaceMesh:
    """Immerse the Delaunay triple on the grid ``z = exp(rho_j + i t_i)``.

    Along ``|z| = const`` the holomorphic frame is ``exp(i t xi_{-1}) Phi(rho)``
    with a unitary left factor, so the unitary Iwasawa factor is
    ``exp(i t xi_{-1}) F(rho)`` and only one splitting per ``rho`` is needed.
    When the period closes, ``t`` samples ``[0, 2 pi)`` and the seam is
    welded on export; otherwise ``t`` runs over ``[0, 2 pi]`` inclusive.
    ``parallel=True`` samples the parallel CMC surface instead.
    """
    if t_steps < 2 or rho_steps < 2:
        raise ValueError("grid needs at least two samples in each direction")
    closing = check_closing(p, N=N)
    if closing.half_integer and not closing.simply_wrapped and not allow_multiply_wrapped:
        raise ValueError(f"mu(lam0) = {closing.mu1} gives a multiply wrapped surface")
    closed = closing.report.closed
    rho = np.linspace(rho_min, rho_max, rho_steps)
    if closed:
        t = 2 * np.pi * np.arange(t_steps) / t_steps
    else:
        t = np.linspace(0.0, 2 * np.pi, t_steps)

    def radial(r):
        return _radial_frame(p, r, N, tol)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            radial_frames = list(pool.map(radial, rho))
    else:
        radial_frames = [radial(r) for r in rho]
    F_rho = np.array([f for f, _ in radial_frames])
    dF_rho = np.array([d for _, d in radial_frames])

    ts = np.append(t, 2 * np.pi)
    C, dC = _rotation_loops(p, ts, N)
    F = C[:, None] @ F_rho[None, :]
    dF = dC[:, None] @ F_rho[None, :] + C[:, None] @ dF_rho[None, :]
    pts = sym_bobenko_values(F, dF, p.lam0, p.H, parallel=parallel)
    normals = unit_normal(F)
    closure = float(np.linalg.norm(pts[-1] - pts[0], axis=-1).max())
    return SurfaceMesh(t, rho, pts[:-1], normals[:-1], p, N, closed, closure)


def _d1(y, h):
    """Fourth-order central first derivative on the interior (two points trimmed per side)."""
    return (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)


def _refine_extremum(y, i):
    """Vertex of the parabola through samples ``i-1, i, i+1``."""
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    if den == 0:
        return y1
    s = 0.5 * (y0 - y2) / den
    return y1 - 0.25 * (y0 - y2) * s


def measure(mesh: SurfaceMesh, geometry: DelaunayGeometry) -> MeasurementReport:
    """Compare the mesh against the predicted axis and read off its profile curve."""
    pts = mesh.points
    if pts.shape[1] < 5 or not np.all(np.isfinite(pts)):
        raise MeasurementError("mesh needs at least five finite rho samples")
    u = np.asarray(geometry.axis_direction, dtype=float)
    u = u / np.linalg.norm(u)
    d = pts - np.asarray(geometry.circle_center, dtype=float)
    x = d @ u
    radial = np.linalg.norm(d - x[..., None] * u, axis=-1)
    axis_fit = float(max(np.ptp(radial, axis=0).max(), np.ptp(x, axis=0).max()))
    r = radial.mean(axis=0)
    xs = x.mean(axis=0)

    interior_min = [i for i in range(1, len(r) - 1) if r[i] <= r[i - 1] and r[i] <= r[i + 1]]
    interior_max = [i for i in range(1, len(r) - 1) if r[i] >= r[i - 1] and r[i] >= r[i + 1]]
    neck = min([_refine_extremum(r, i) for i in interior_min] + [r.min()])
    bulge = max([_refine_extremum(r, i) for i in interior_max] + [r.max()])

    h = mesh.rho[1] - mesh.rho[0]
    r_d, x_d = _d1(r, h), _d1(xs, h)
    speed = np.hypot(r_d, x_d)
    if np.any(speed == 0):
        raise MeasurementError("profile curve is degenerate")
    r_in = r[2:-2]
    orient = np.sign(x_d[np.argmax(r_in)]) or 1.0
    H = mesh.params.H
    cos_theta = orient * x_d / speed
    s = r_in * cos_theta - H * r_in ** 2
    # the profile runs backwards through a nodoid neck; the neck root is then negative
    signed_neck = neck * (np.sign(cos_theta[np.argmin(r_in)]) or 1.0)
    return MeasurementReport(
        measured_neck=float(neck),
        measured_bulge=float(bulge),
        axis_fit_residual=axis_fit,
        first_integral_spread=float(np.ptp(s)),
        period_closure_error=mesh.closure_error,
        kappa=float(signed_neck * (1 - signed_neck * H)),
        interior_extrema=bool(interior_min and interior_max),
    )


def _faces(mesh: SurfaceMesh) -> np.ndarray:
    n_t, n_r = mesh.shape
    idx = np.arange(n_t * n_r).reshape(n_t, n_r)
    rows = n_t if mesh.closed else n_t - 1
    faces = []
    for i in range(rows):
        i2 = (i + 1) % n_t
        for j in range(n_r - 1):
            a, b, c, d = idx[i, j], idx[i2, j], idx[i2, j + 1], idx[i, j + 1]
            faces.append((a, b, c))
            faces.append((a, c, d))
    return np.array(faces, dtype=np.int64).reshape(-1, 3)


def export_mesh(mesh: SurfaceMesh, fmt: str, path) -> None:
    """Write OBJ, binary PLY or CSV.  Closed meshes are welded across the ``t`` seam."""
    fmt = fmt.lower()
    pts = mesh.points.reshape(-1, 3)
    nrm = mesh.normals.reshape(-1, 3)
    if fmt == "obj":
        faces = _faces(mesh) + 1
        with open(path, "w") as fh:
            for v in pts:
                fh.write("v %.17g %.17g %.17g\n" % tuple(v))
            for v in nrm:
                fh.write("vn %.17g %.17g %.17g\n" % tuple(v))
            for f in faces:
                fh.write("f %d//%d %d//%d %d//%d\n" % (f[0], f[0], f[1], f[1], f[2], f[2]))
    elif fmt == "ply":
        faces = _faces(mesh)
        header = (
            "ply\nformat binary_little_endian 1.0\n"
            f"element vertex {len(pts)}\n"
            "property double x\nproperty double y\nproperty double z\n"
            "property double nx\nproperty double ny\nproperty double nz\n"
            f"element face {len(faces)}\n"
            "property list uchar int vertex_indices\nend_header\n"
        )
        verts = np.hstack([pts, nrm]).astype("<f8")
        face_rec = np.zeros(len(faces), dtype=[("n", "u1"), ("v", "<i4", (3,))])
        face_rec["n"] = 3
        face_rec["v"] = faces
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(verts.tobytes())
            fh.write(face_rec.tobytes())
    elif fmt == "csv":
        tt, rr = np.meshgrid(mesh.t, mesh.rho, indexing="ij")
        with open(path, "w") as fh:
            fh.write("t,rho,x,y,z\n")
            for row in zip(tt.ravel(), rr.ravel(), *pts.T):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; expected obj, ply or csv")


def read_csv(path) -> np.ndarray:
    """Rows ``(t, rho, x, y, z)`` written by :func:`export_mesh`."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,rho,x,y,z":
            raise ValueError(f"unexpected header {header!r}")
        return np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])


def read_ply_vertices(path) -> np.ndarray:
    """Vertex block ``(x, y, z, nx, ny, nz)`` of a PLY file written by :func:`export_mesh`."""
    with open(path, "rb") as fh:
        n = None
        while True:
            line = fh.readline().decode("ascii").strip()
            if line.startswith("element vertex"):
                n = int(line.split()[-1])
            if line == "end_header":
                break
        data = fh.read(n * 6 * 8)
    return np.array(struct.unpack(f"<{n * 6}d", data)).reshape(n, 6)
