"""Iwasawa splitting ``g = F B`` of twisted SL(2, C) loops on the unit circle.

``F`` is unitary on the circle and ``B`` extends holomorphically into the
unit disk with ``B(0) = diag[rho, 1/rho]``, ``rho > 0``.  The work is done by
a spectral factorization of the positive loop ``h = g^* g = B^* B``:
with ``P = B^{-1}`` the product ``h P = B^*`` has no positive modes, which
is a block-Toeplitz system for the Taylor coefficients of ``P``.  It is
solved on growing finite sections by Cholesky until the coefficients
settle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .loops import (
    DEFAULT_DEGREE,
    IDENTITY,
    LoopError,
    LoopMatrix,
    circle_points,
    evaluate,
    from_samples,
    multiply,
    star,
)

RESIDUAL_SAMPLES = 64


class TruncationError(ArithmeticError):
    """The factorization did not reach the tolerance at the given degree."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class IwasawaFactors:
    F: LoopMatrix
    B: LoopMatrix
    residual: float
    section: int = 0

    @property
    def rho(self) -> float:
        """Upper-left entry of ``B(0)``."""
        return float(self.B.coeff(0)[0, 0].real)


def _block_toeplitz(h: LoopMatrix, size: int) -> np.ndarray:
    """Hermitian matrix with ``(k, j)`` block ``h_{k-j}``, ``0 <= k, j < size``."""
    t = np.zeros((size, 2, size, 2), dtype=complex)
    for k in range(size):
        for j in range(size):
            t[k, :, j, :] = h.coeff(k - j)
    return t.reshape(2 * size, 2 * size)


def _inverse_outer_factor(h: LoopMatrix, section: int) -> np.ndarray:
    """Taylor coefficients ``P_0..P_{section-1}`` of ``B^{-1}`` from one finite section."""
    t = _block_toeplitz(h, section)
    try:
        factor = cho_factor(t, lower=True)
    except LinAlgError as exc:
        raise LoopError("loop is not positive definite on the circle") from exc
    rhs = np.zeros((2 * section, 2), dtype=complex)
    rhs[:2] = IDENTITY
    y = cho_solve(factor, rhs).reshape(section, 2, 2)
    # y_0 = (B_0^H B_0)^{-1} = diag[1/rho^2, rho^2] for B_0 in K
    d = np.real(np.diag(y[0]))
    if np.any(d <= 0):
        raise LoopError("finite section produced a non-positive leading block")
    b0 = np.diag(1.0 / np.sqrt(d))
    return y @ b0


def _settled_inverse_factor(h: LoopMatrix, degree: int, tol: float, start: int):
    cap = 16 * degree
    section = max(start, 8)
    prev = _inverse_outer_factor(h, section)
    while True:
        nxt = min(2 * section, cap)
        if nxt == section:
            return prev, section, np.inf
        cur = _inverse_outer_factor(h, nxt)
        change = np.abs(cur[: section] - prev).max()
        change = max(change, np.abs(cur[section:]).max(initial=0.0))
        section, prev = nxt, cur
        if change < tol / 10:
            return cur, section, change


def _sample_count(*degrees) -> int:
    need = 2 * sum(degrees) + 2
    return int(2 ** np.ceil(np.log2(need)))


def _check_positive_definite(h_vals):
    eig = np.linalg.eigvalsh(0.5 * (h_vals + np.conj(np.swapaxes(h_vals, -1, -2))))
    bad = np.flatnonzero(eig[:, 0] <= 0)
    if bad.size:
        raise LoopError(
            f"loop is not positive definite at sample {bad[0]} "
            f"(min eigenvalue {eig[bad[0], 0]:.3e})"
        )


def spectral_factorize_positive(h: LoopMatrix, N=DEFAULT_DEGREE, tol=1e-9) -> LoopMatrix:
    """Return the positive loop ``B`` with ``star(B) @ B == h``.

    ``h`` must be hermitian positive definite at every point of the circle.
    """
    m = _sample_count(h.degree, N)
    _check_positive_definite(evaluate(h, circle_points(m)))
    p, section, _ = _settled_inverse_factor(h, N, tol, start=max(N, 2 * h.degree))
    pts = circle_points(_sample_count(section, N))
    p_vals = np.einsum("...k,kij->...ij", pts[:, None] ** np.arange(section), p)
    B = from_samples(np.linalg.inv(p_vals), N)
    resid = np.abs(evaluate(multiply(star(B), B, headroom=N), circle_points(RESIDUAL_SAMPLES))
                   - evaluate(h, circle_points(RESIDUAL_SAMPLES))).max()
    if resid > tol:
        raise TruncationError(f"spectral factorization did not converge at degree {N}", resid)
    return B


def iwasawa_decompose(g: LoopMatrix, N=DEFAULT_DEGREE, tol=1e-8) -> IwasawaFactors:
    """Split a twisted loop ``g`` with ``det g = 1`` as ``F @ B``.

    Both factors are returned truncated to degree ``N``.  Raises
    :class:`TruncationError` when ``g - F B`` exceeds ``tol`` on the circle.
    """
    if g.radius != 1:
        raise LoopError("only the unit circle is supported")
    m = _sample_count(g.degree, N)
    g_vals = evaluate(g, circle_points(m))
    if np.abs(np.linalg.det(g_vals)).min() < 1e-14:
        raise LoopError("loop is singular on the unit circle")
    h = multiply(star(g), g, headroom=g.degree)
    p, section, _ = _settled_inverse_factor(h, N, tol, start=max(N, 2 * g.degree))

    m = _sample_count(g.degree, section, N)
    pts = circle_points(m)
    g_vals = evaluate(g, pts)
    p_vals = np.einsum("...k,kij->...ij", pts[:, None] ** np.arange(section), p)
    F = from_samples(g_vals @ p_vals, N)
    B = from_samples(np.linalg.inv(p_vals), N)

    check = circle_points(RESIDUAL_SAMPLES)
    resid = float(np.abs(evaluate(g, check) - evaluate(F, check) @ evaluate(B, check)).max())
    if resid > tol:
        raise TruncationError(f"Iwasawa factorization did not converge at degree {N}", resid)
    return IwasawaFactors(F, B, resid, section)
