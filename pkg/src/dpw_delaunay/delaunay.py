"""Delaunay surfaces from the potential ``xi = xi_{-1}(lam) dz/z`` on the punctured plane.

The residue is

    xi_{-1}(lam) = [[c,                    a/lam + conj(b) lam],
                    [b/lam + conj(a) lam, -c                 ]]

which is twisted, hermitian on ``|lam| = 1`` and satisfies
``-det xi_{-1} = |a|^2 + |b|^2 + c^2 + ab/lam^2 + conj(ab) lam^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .dpw import DPWTriple, Potential, adjoint
from .loops import (
    DEFAULT_DEGREE,
    LoopMatrix,
    circle_points,
    diag,
    evaluate,
    from_samples,
    su2_to_vector,
)
from .monodromy import ClosingReport, MonodromyMatrix, closing_conditions

PARAM_TOL = 1e-9

UNDULOID = "unduloid"
NODOID = "nodoid"
CYLINDER = "cylinder"
SPHERE = "sphere-limit"
BRANCHED = "branched/invalid"


@dataclass(frozen=True)
class DelaunayParams:
    a: complex
    b: complex
    c: float = 0.0
    H: float = 1.0
    lam0: complex = 1.0

    def __post_init__(self):
        if self.H == 0:
            raise ValueError("H must be nonzero")
        if abs(abs(self.lam0) - 1) > 1e-12:
            raise ValueError("lam0 must lie on the unit circle")
        if abs(complex(self.c).imag) > 0:
            raise ValueError("c must be real")

    @property
    def ab(self) -> complex:
        return complex(self.a) * complex(self.b)

    @classmethod
    def from_dict(cls, data: dict) -> "DelaunayParams":
        def num(v):
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1])
            return v

        lam0 = complex(math.cos(data.get("lambda0_arg", 0.0)), math.sin(data.get("lambda0_arg", 0.0)))
        return cls(num(data["a"]), num(data["b"]), float(data.get("c", 0.0)),
                   float(data.get("H", 1.0)), lam0)

    @classmethod
    def from_json(cls, path) -> "DelaunayParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        def enc(v):
            v = complex(v)
            return v.real if v.imag == 0 else [v.real, v.imag]

        return {"a": enc(self.a), "b": enc(self.b), "c": float(self.c), "H": float(self.H),
                "lambda0_arg": float(np.angle(self.lam0))}


def xi_minus1(p: DelaunayParams, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    a, b, c = complex(p.a), complex(p.b), float(p.c)
    out = np.empty(lam.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 1] = -c
    out[..., 0, 1] = a / lam + np.conj(b) * lam
    out[..., 1, 0] = b / lam + np.conj(a) * lam
    return out


def xi_loop(p: DelaunayParams) -> LoopMatrix:
    a, b, c = complex(p.a), complex(p.b), float(p.c)
    return LoopMatrix.from_modes({
        -1: np.array([[0, a], [b, 0]]),
        0: diag(c, -c),
        1: np.array([[0, np.conj(b)], [np.conj(a), 0]]),
    })


def expm_traceless(x) -> np.ndarray:
    """``exp`` of stacked trace-free 2x2 matrices via ``cosh(s) I + sinh(s)/s X``, ``s^2 = -det X``."""
    x = np.asarray(x, dtype=complex)
    s = np.sqrt(-np.linalg.det(x))
    small = np.abs(s) < 1e-4
    s_safe = np.where(small, 1.0, s)
    s2 = s * s
    shc = np.where(small, 1 + s2 / 6 + s2 * s2 / 120, np.sinh(s_safe) / s_safe)
    ch = np.cosh(s)
    return ch[..., None, None] * np.eye(2) + shc[..., None, None] * x


def delaunay_potential(p: DelaunayParams) -> Potential:
    def coefficient(z, lam):
        return xi_minus1(p, lam) / z

    def fundamental(w0, w, lam):
        return expm_traceless((w - w0) * xi_minus1(p, lam))

    return Potential(coefficient, poles=(0j,), chart="log", fundamental=fundamental)


def delaunay_triple(p: DelaunayParams) -> DPWTriple:
    return DPWTriple(delaunay_potential(p), LoopMatrix.identity(), 0j, p.H, p.lam0)


def mu(p: DelaunayParams, lam):
    """Principal square root of ``|a|^2 + |b|^2 + c^2 + ab/lam^2 + conj(ab) lam^2``."""
    lam = np.asarray(lam, dtype=complex)
    ab = p.ab
    rad = abs(p.a) ** 2 + abs(p.b) ** 2 + p.c ** 2 + ab / lam ** 2 + np.conj(ab) * lam ** 2
    return np.sqrt(rad)


def cover_coordinate(z, angle=None) -> complex:
    """``log|z| + i t`` with ``t = angle`` when given, else the principal argument."""
    t = np.angle(z) if angle is None else angle
    return complex(math.log(abs(z)), t)


def closed_form_frame(p: DelaunayParams, z, N=DEFAULT_DEGREE, angle=None) -> LoopMatrix:
    """``Phi(z) = exp(log(z) xi_{-1})`` on the branch fixed by ``angle``."""
    w = cover_coordinate(z, angle)
    lam = circle_points(4 * N)
    return from_samples(expm_traceless(w * xi_minus1(p, lam)), N)


def diagonalized_frame(p: DelaunayParams, z, lam, angle=None) -> np.ndarray:
    """``T diag[z^-mu, z^mu] T^-1``; singular where ``mu`` or ``conj(a) lam^2 + b`` vanish."""
    w = cover_coordinate(z, angle)
    lam = np.asarray(lam, dtype=complex)
    m = mu(p, lam)
    den = np.conj(p.a) * lam ** 2 + p.b
    T = np.empty(lam.shape + (2, 2), dtype=complex)
    T[..., 0, 0] = (p.c - m) * lam / den
    T[..., 0, 1] = (p.c + m) * lam / den
    T[..., 1, 0] = 1
    T[..., 1, 1] = 1
    D = np.zeros_like(T)
    D[..., 0, 0] = np.exp(-w * m)
    D[..., 1, 1] = np.exp(w * m)
    return T @ D @ np.linalg.inv(T)


def closed_form_monodromy(p: DelaunayParams, N=DEFAULT_DEGREE) -> MonodromyMatrix:
    """``exp(2 pi i xi_{-1})``, the monodromy of the identity-based frame around ``z = 0``."""
    lam = circle_points(4 * N)
    chi = from_samples(expm_traceless(2j * np.pi * xi_minus1(p, lam)), N)
    return MonodromyMatrix(chi)


@dataclass(frozen=True)
class ClosingCheck:
    report: ClosingReport
    mu1: float
    half_integer: bool
    ab_real: bool
    simply_wrapped: bool
    on_ellipse: bool

    @property
    def closes(self) -> bool:
        return self.half_integer and self.ab_real

    def to_dict(self) -> dict:
        out = self.report.to_dict()
        out.update(mu1=self.mu1, half_integer=self.half_integer, ab_real=self.ab_real,
                   simply_wrapped=self.simply_wrapped, on_ellipse=self.on_ellipse)
        return out


def check_closing(p: DelaunayParams, tol=1e-7, N=DEFAULT_DEGREE) -> ClosingCheck:
    """Algebraic closing constraints, cross-checked against the closed-form monodromy."""
    m1 = complex(mu(p, p.lam0))
    two_mu = 2 * m1.real
    half_integer = abs(m1.imag) <= tol and abs(two_mu - round(two_mu)) <= tol and round(two_mu) > 0
    ab_real = abs(p.ab.imag) <= tol
    simply_wrapped = half_integer and round(two_mu) == 1
    on_ellipse = False
    if ab_real and abs(p.a) > 0:
        a, b = rotation_normalize(p.a, p.b)[:2]
        on_ellipse = abs((a + b) ** 2 + p.c ** 2 - 0.25) <= tol
    report = closing_conditions(closed_form_monodromy(p, N), p.lam0, tol)
    return ClosingCheck(report, m1.real, half_integer, ab_real, simply_wrapped, on_ellipse)


def rotation_normalize(a, b, tol=PARAM_TOL):
    """Rotate ``(a, b)`` with ``ab`` real onto real parameters.

    Returns ``(a', b', A)`` with ``A = diag[sqrt(g), sqrt(conj g)]``, ``g = a/|a|``;
    conjugating the potential to ``A^-1 xi A`` produces real coefficients
    ``a' = |a|`` and ``b' = g b``.
    """
    a, b = complex(a), complex(b)
    if a == 0:
        raise ValueError("a must be nonzero")
    if abs((a * b).imag) > tol:
        raise ValueError(f"ab = {a * b} is not real")
    g = a / abs(a)
    sg = np.sqrt(g)
    A = LoopMatrix.constant(diag(sg, np.conj(sg)))
    a_new = abs(a)
    b_new = g * b
    return a_new, float(b_new.real), A


def _real_params(p: DelaunayParams):
    a, b, _ = rotation_normalize(p.a, p.b)
    return a, b


def neck_bulge_radii(p: DelaunayParams):
    """Roots ``(1 -+ sqrt(1 - 16ab)) / 2H`` ordered ``(neck, bulge)``.

    For nodoids ``ab < 0`` and the neck root is negative.
    """
    ab = p.ab
    if abs(ab.imag) > PARAM_TOL:
        raise ValueError("ab must be real")
    disc = 1 - 16 * ab.real
    if disc < 0:
        raise ValueError(f"16ab = {16 * ab.real} > 1: no real neck/bulge radii")
    root = math.sqrt(disc)
    r1, r2 = (1 - root) / (2 * p.H), (1 + root) / (2 * p.H)
    return (min(r1, r2), max(r1, r2))


def classify(p: DelaunayParams, tol=PARAM_TOL) -> str:
    if abs(p.a) <= tol:
        return BRANCHED
    a, b = _real_params(p)
    if abs(b) <= tol:
        return SPHERE
    if abs(a - 0.25) <= tol and abs(b - 0.25) <= tol and abs(p.c) <= tol:
        return CYLINDER
    return UNDULOID if a * b > 0 else NODOID


def axis_and_circle(p: DelaunayParams):
    """Axis direction, centre and radius of the image of ``|z| = 1``, and ``cos(theta)``.

    The axis is the direction of ``i xi_{-1}(lam0)``; for real parameters at
    ``lam0 = 1`` it is proportional to ``(c, 0, a + b)``.  Complex parameters
    are handled through their real normalisation, whose surface differs by
    the rotation ``Ad(A)``.
    """
    a, b, A = rotation_normalize(p.a, p.b)
    rot = A.coeff(0)
    q = DelaunayParams(a, b, p.c, p.H, p.lam0)
    v = su2_to_vector(1j * xi_minus1(q, p.lam0))
    axis = v / np.linalg.norm(v)
    H = p.H
    center = np.array([(8 * a * a + 8 * a * b - 1) / (2 * H), 0.0, -4 * a * p.c / H])
    return adjoint(rot, axis), adjoint(rot, center), 2 * abs(a / H), 2 * (a + b)


def profile_first_integral(r, rdot, H=1.0):
    """``r / sqrt(1 + rdot^2) - H r^2``, constant along a CMC profile curve."""
    r = np.asarray(r, dtype=float)
    return r / np.sqrt(1 + np.asarray(rdot) ** 2) - H * r ** 2


@dataclass(frozen=True)
class DelaunayGeometry:
    neck_radius: float
    bulge_radius: float
    axis_direction: np.ndarray
    circle_center: np.ndarray
    circle_radius: float
    cos_theta: float
    classification: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axis_direction"] = [float(x) for x in self.axis_direction]
        d["circle_center"] = [float(x) for x in self.circle_center]
        return d


def delaunay_geometry(p: DelaunayParams) -> DelaunayGeometry:
    neck, bulge = neck_bulge_radii(p)
    axis, center, radius, cos_theta = axis_and_circle(p)
    return DelaunayGeometry(neck, bulge, axis, center, radius, cos_theta, classify(p))
