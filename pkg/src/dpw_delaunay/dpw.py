"""The three DPW steps: integrate ``dPhi = Phi xi``, split ``Phi = F B``, apply Sym-Bobenko.

Points on the universal cover are passed as a complex coordinate ``w``.  A
potential on the punctured plane uses the ``"log"`` chart, ``z = exp(w)``,
so that ``w`` and ``w + 2 pi i`` are different points of the cover; on the
``"plane"`` chart ``z = w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .iwasawa import iwasawa_decompose
from .loops import (
    DEFAULT_DEGREE,
    E1,
    IDENTITY,
    SIGMA,
    LoopMatrix,
    circle_points,
    evaluate,
    from_samples,
    lambda_derivative,
    su2_to_vector,
    vector_to_su2,
)

STEPS_PER_UNIT = 64


class IntegrationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Potential:
    """Holomorphic potential ``xi = A(z, lam) dz``.

    ``coefficient(z, lam)`` returns ``A`` evaluated at an array of spectral
    values (shape ``lam.shape + (2, 2)``).  ``fundamental(w0, w, lam)``, when
    given, is the closed-form solution with identity value at ``w0``.
    """

    coefficient: Callable
    poles: tuple = ()
    chart: str = "plane"
    fundamental: Optional[Callable] = None

    def to_z(self, w):
        return np.exp(w) if self.chart == "log" else w

    def loop(self, z, N=DEFAULT_DEGREE) -> LoopMatrix:
        """``A(z, .)`` as a loop of degree ``N``."""
        return from_samples(self.coefficient(z, circle_points(4 * N)), N)

    def conjugated(self, P) -> "Potential":
        """The potential ``P xi P^-1`` for a constant matrix ``P``."""
        P = np.asarray(P, dtype=complex)
        Pinv = np.linalg.inv(P)
        coefficient = self.coefficient
        fundamental = self.fundamental

        def conj_coefficient(z, lam):
            return P @ coefficient(z, lam) @ Pinv

        conj_fundamental = None
        if fundamental is not None:
            def conj_fundamental(w0, w, lam):
                return P @ fundamental(w0, w, lam) @ Pinv

        return replace(self, coefficient=conj_coefficient, fundamental=conj_fundamental)


@dataclass(frozen=True)
class DPWTriple:
    """DPW data ``(xi, Phi_0, w_0)`` together with ``H`` and the evaluation point ``lam0``."""

    potential: Potential
    initial_frame: LoopMatrix = field(default_factory=LoopMatrix.identity)
    base_point: complex = 0j
    mean_curvature: float = 1.0
    lam0: complex = 1.0

    def __post_init__(self):
        if self.mean_curvature == 0:
            raise ValueError("mean curvature must be nonzero")
        if abs(abs(self.lam0) - 1) > 1e-12:
            raise ValueError(f"lam0 must lie on the unit circle, got {self.lam0}")


def _segment_hits_pole(z0, z1, pole, eps=1e-12):
    d = z1 - z0
    if d == 0:
        return abs(z0 - pole) < eps
    s = min(max(((pole - z0) * np.conj(d)).real / abs(d) ** 2, 0.0), 1.0)
    return abs(z0 + s * d - pole) < eps


def integrate_samples(potential: Potential, phi0, path, lam, steps_per_unit=STEPS_PER_UNIT):
    """RK4 for ``dPhi/dz = Phi A(z)`` along a z-plane polyline, vectorised over ``lam``.

    ``phi0`` holds the starting values at ``lam`` (shape ``lam.shape + (2, 2)``).
    On the log chart each segment is traversed uniformly in ``w = log z``
    (equation ``dPhi/dw = Phi A(e^w) e^w``), so arc length and step size are
    measured on the cover and stay uniform near the puncture.
    """
    path = np.asarray(path, dtype=complex)
    phi = np.array(phi0, dtype=complex)
    log_chart = potential.chart == "log"
    if log_chart:
        def coeff(w):
            z = np.exp(w)
            return potential.coefficient(z, lam) * z
    else:
        def coeff(z):
            return potential.coefficient(z, lam)

    for z0, z1 in zip(path[:-1], path[1:]):
        for pole in potential.poles:
            if _segment_hits_pole(z0, z1, pole):
                raise ValueError(f"path segment {z0} -> {z1} passes through the pole {pole}")
        if log_chart:
            # principal branch: the segment misses 0, so it turns by less than pi
            s0, step = np.log(z0), np.log(z1 / z0)
        else:
            s0, step = z0, z1 - z0
        length = abs(step)
        if length == 0:
            continue
        n = max(1, math.ceil(steps_per_unit * length))
        h = step / n
        for i in range(n):
            s = s0 + i * h
            k1 = phi @ coeff(s)
            mid = coeff(s + 0.5 * h)
            k2 = (phi + 0.5 * h * k1) @ mid
            k3 = (phi + 0.5 * h * k2) @ mid
            k4 = (phi + h * k3) @ coeff(s + h)
            phi = phi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(phi)):
            raise IntegrationError(f"integration blew up on segment {z0} -> {z1}")
    return phi


def integrate_frame(triple: DPWTriple, path, steps_per_unit=STEPS_PER_UNIT,
                    N=DEFAULT_DEGREE) -> LoopMatrix:
    """``Phi`` at the end of ``path``, which must start at the base point."""
    path = np.asarray(path, dtype=complex)
    z_start = triple.potential.to_z(triple.base_point)
    if abs(path[0] - z_start) > 1e-12:
        raise ValueError(f"path must start at the base point {z_start}, not {path[0]}")
    lam = circle_points(4 * N)
    phi = integrate_samples(triple.potential, evaluate(triple.initial_frame, lam), path, lam,
                            steps_per_unit)
    return from_samples(phi, N)


def lift_path(potential: Potential, w0, w, arc_step=0.05):
    """A z-plane polyline from ``w0`` to ``w`` whose lift to the cover ends at ``w``.

    On the log chart: radial segment first, then a polygon following the circle.
    """
    if potential.chart != "log":
        return np.array([w0, w], dtype=complex)
    t0, t1 = w0.imag, w.imag
    r1 = math.exp(w.real)
    pts = [np.exp(w0), r1 * np.exp(1j * t0)]
    n = max(1, math.ceil(abs(t1 - t0) / arc_step))
    pts.extend(r1 * np.exp(1j * np.linspace(t0, t1, n + 1)[1:]))
    return np.array(pts)


def frame(triple: DPWTriple, w, N=DEFAULT_DEGREE, steps_per_unit=STEPS_PER_UNIT) -> LoopMatrix:
    """``Phi(w)``, from the closed form when the potential has one."""
    pot = triple.potential
    if pot.fundamental is None:
        return integrate_frame(triple, lift_path(pot, triple.base_point, w), steps_per_unit, N)
    lam = circle_points(4 * N)
    vals = evaluate(triple.initial_frame, lam) @ pot.fundamental(triple.base_point, w, lam)
    return from_samples(vals, N)


def sym_bobenko_values(F_val, dF_val, lam0, H, parallel=False) -> np.ndarray:
    """Sym-Bobenko formula from ``F(lam0)`` and ``dF/dlam(lam0)``; stacked input allowed."""
    Finv = np.conj(np.swapaxes(F_val, -1, -2))
    sign = -1.0 if parallel else 1.0
    x = -(1.0 / H) * (1j * lam0 * dF_val @ Finv + sign * 0.5j * F_val @ SIGMA @ Finv)
    return su2_to_vector(x)


def _frame_at(F: LoopMatrix, lam0, tol):
    F_val = evaluate(F, lam0)
    err = np.abs(F_val @ np.conj(F_val.T) - IDENTITY).max()
    if err > tol:
        raise ValueError(f"frame is not unitary at lam0 (error {err:.3e})")
    return F_val, evaluate(lambda_derivative(F), lam0)


def sym_bobenko(F: LoopMatrix, lam0=1.0, H=1.0, tol=1e-6) -> np.ndarray:
    """Immersion point ``-(1/H)(i lam F' F^-1 + (i/2) F sigma F^-1)`` in R^3."""
    F_val, dF_val = _frame_at(F, lam0, tol)
    return sym_bobenko_values(F_val, dF_val, lam0, H)


def sym_bobenko_parallel(F: LoopMatrix, lam0=1.0, H=1.0, tol=1e-6) -> np.ndarray:
    """Same as :func:`sym_bobenko` with the sign of the ``F sigma F^-1`` term flipped."""
    F_val, dF_val = _frame_at(F, lam0, tol)
    return sym_bobenko_values(F_val, dF_val, lam0, H, parallel=True)


def unitary_frame(triple: DPWTriple, w, N=DEFAULT_DEGREE, tol=1e-8):
    return iwasawa_decompose(frame(triple, w, N), N, tol)


def immerse(triple: DPWTriple, w, N=DEFAULT_DEGREE, tol=1e-8, parallel=False) -> np.ndarray:
    """Surface point at the cover coordinate ``w``."""
    F = unitary_frame(triple, w, N, tol).F
    f = sym_bobenko_parallel if parallel else sym_bobenko
    return f(F, triple.lam0, triple.mean_curvature)


def adjoint(C, v) -> np.ndarray:
    """Rotate ``v`` by ``Ad(C)`` for a constant ``C`` in SU(2)."""
    X = vector_to_su2(v)
    return su2_to_vector(C @ X @ np.linalg.inv(C))


def metric_density(r0, a1) -> float:
    """Conformal factor ``4 r0^4 |a1|^2`` of the ``lam = 1`` immersion."""
    return 4 * r0 ** 4 * abs(a1) ** 2


def hopf_coefficient(a1, a2) -> complex:
    return -a1 * a2 / 2


def unit_normal(F_val) -> np.ndarray:
    """``F e1 F^-1`` in R^3; the direction from a point to its parallel point."""
    return su2_to_vector(F_val @ E1 @ np.conj(np.swapaxes(F_val, -1, -2)))
