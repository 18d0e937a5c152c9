"""Monodromy of the holomorphic frame around the puncture and the closing conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dpw import STEPS_PER_UNIT, DPWTriple, integrate_samples
from .loops import (
    DEFAULT_DEGREE,
    IDENTITY,
    LoopMatrix,
    circle_points,
    evaluate,
    from_samples,
    is_unitary_on_circle,
    lambda_derivative,
)

CLOSING_TOL = 1e-7


@dataclass(frozen=True)
class MonodromyMatrix:
    chi: LoopMatrix
    generator: str = "w -> w + 2 pi i"


@dataclass(frozen=True)
class ClosingReport:
    cond1_residual: float
    cond1_sign: int
    cond2_residual: float
    tol: float

    @property
    def passes(self):
        return (self.cond1_residual <= self.tol, self.cond2_residual <= self.tol)

    @property
    def closed(self) -> bool:
        return all(self.passes)

    def to_dict(self) -> dict:
        return {
            "cond1_residual": self.cond1_residual,
            "cond1_sign": self.cond1_sign,
            "cond2_residual": self.cond2_residual,
            "cond1_pass": self.passes[0],
            "cond2_pass": self.passes[1],
        }


def _loop_polygon(z0, vertices):
    """Closed polygon inscribed in the circle through ``z0``, counter-clockwise."""
    return z0 * np.exp(2j * np.pi * np.arange(vertices + 1) / vertices)


def compute_monodromy(triple: DPWTriple, N=DEFAULT_DEGREE, steps_per_unit=STEPS_PER_UNIT,
                      vertices=128) -> MonodromyMatrix:
    """``Phi(w0 + 2 pi i) Phi(w0)^-1`` by integrating once around the puncture at 0."""
    pot = triple.potential
    if pot.chart != "log":
        raise ValueError("monodromy needs a potential on the punctured plane (log chart)")
    lam = circle_points(4 * N)
    phi0 = evaluate(triple.initial_frame, lam)
    z0 = pot.to_z(triple.base_point)
    phi1 = integrate_samples(pot, phi0, _loop_polygon(z0, vertices), lam, steps_per_unit)
    return MonodromyMatrix(from_samples(phi1 @ np.linalg.inv(phi0), N))


def certify_unitary_monodromy(triple: DPWTriple, samples=64, tol=1e-9) -> bool:
    """True when ``Phi_0`` is unitary and ``xi`` is skew-hermitian along ``|z| = 1``.

    Along ``z = exp(i t)`` the potential pulls back to ``A(z) i z dt``; if that
    is anti-hermitian for every spectral value on the circle, the frame stays
    unitary along the curve and so does the monodromy.
    """
    pot = triple.potential
    if abs(abs(pot.to_z(triple.base_point)) - 1) > tol:
        return False
    if not is_unitary_on_circle(triple.initial_frame, samples, tol):
        return False
    lam = circle_points(samples)
    for t in 2 * np.pi * np.arange(samples) / samples:
        z = complex(math.cos(t), math.sin(t))
        x = pot.coefficient(z, lam) * (1j * z)
        if np.abs(x + np.conj(np.swapaxes(x, -1, -2))).max() > tol:
            return False
    return True


def closing_conditions(chi: MonodromyMatrix, lam0=1.0, tol=CLOSING_TOL) -> ClosingReport:
    """Distance of ``chi(lam0)`` to ``+-Id`` and size of ``d chi / d lam`` at ``lam0``."""
    val = evaluate(chi.chi, lam0)
    d_plus = float(np.abs(val - IDENTITY).max())
    d_minus = float(np.abs(val + IDENTITY).max())
    sign = 1 if d_plus <= d_minus else -1
    deriv = float(np.abs(evaluate(lambda_derivative(chi.chi), lam0)).max())
    return ClosingReport(min(d_plus, d_minus), sign, deriv, tol)
