"""Truncated matrix Laurent series on a circle in the spectral plane.

A loop is stored densely as coefficients ``c_k`` for ``k in [-N, N]`` with
``L(lam) = sum_k c_k lam**k``.  Coefficients live in an array of shape
``(2N+1, 2, 2)``; index ``k + N`` holds ``c_k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_DEGREE = 32
DEFAULT_TOL = 1e-9

SIGMA = np.diag([1.0, -1.0]).astype(complex)
IDENTITY = np.eye(2, dtype=complex)

# basis of su(2) used to identify it with R^3
E1 = np.array([[1j, 0], [0, -1j]])
E2 = np.array([[0, 1], [-1, 0]], dtype=complex)
E3 = np.array([[0, 1j], [1j, 0]])


class LoopError(ValueError):
    """Raised for malformed loop arguments or evaluation outside the domain."""


def diag(u, v):
    return np.array([[u, 0], [0, v]], dtype=complex)


def off(u, v):
    return np.array([[0, u], [v, 0]], dtype=complex)


def circle_points(m, radius=1.0):
    """The ``m``-th roots of unity scaled to ``radius``."""
    return radius * np.exp(2j * np.pi * np.arange(m) / m)


@dataclass(frozen=True, eq=False)
class LoopMatrix:
    """A 2x2 matrix loop ``lam -> sum_k c_k lam**k`` on ``|lam| = radius``.

    ``discarded`` records the max-norm of coefficients dropped when the loop
    was produced by truncating a longer series.
    """

    coeffs: np.ndarray
    radius: float = 1.0
    discarded: float = field(default=0.0, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1:] != (2, 2) or c.shape[0] % 2 != 1:
            raise LoopError(f"coefficients must have shape (2N+1, 2, 2), got {c.shape}")
        if not 0 < self.radius <= 1:
            raise LoopError(f"radius must lie in (0, 1], got {self.radius}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    def coeff(self, k: int) -> np.ndarray:
        n = self.degree
        if abs(k) > n:
            return np.zeros((2, 2), dtype=complex)
        return self.coeffs[k + n]

    @classmethod
    def from_modes(cls, modes: dict, degree=None, radius=1.0) -> "LoopMatrix":
        """Build a loop from a ``{k: 2x2 matrix}`` mapping."""
        n = max([abs(k) for k in modes] + [0]) if degree is None else degree
        c = np.zeros((2 * n + 1, 2, 2), dtype=complex)
        for k, m in modes.items():
            if abs(k) > n:
                raise LoopError(f"mode {k} exceeds truncation degree {n}")
            c[k + n] = m
        return cls(c, radius)

    @classmethod
    def constant(cls, m, degree=0, radius=1.0) -> "LoopMatrix":
        return cls.from_modes({0: np.asarray(m, dtype=complex)}, degree, radius)

    @classmethod
    def identity(cls, degree=0, radius=1.0) -> "LoopMatrix":
        return cls.constant(IDENTITY, degree, radius)

    def __call__(self, lam):
        return evaluate(self, lam)

    def __matmul__(self, other: "LoopMatrix") -> "LoopMatrix":
        return multiply(self, other)

    def resize(self, degree: int) -> "LoopMatrix":
        """Zero-pad or truncate symmetrically to ``degree``."""
        n = self.degree
        c = np.zeros((2 * degree + 1, 2, 2), dtype=complex)
        m = min(n, degree)
        c[degree - m : degree + m + 1] = self.coeffs[n - m : n + m + 1]
        lost = 0.0
        if degree < n:
            dropped = np.concatenate([self.coeffs[: n - degree], self.coeffs[n + degree + 1 :]])
            lost = float(np.abs(dropped).max())
        return LoopMatrix(c, self.radius, max(self.discarded, lost))

    def to_json(self) -> str:
        """Debug dump: ``{"radius": r, "coeffs": {k: [[[re, im], ...], ...]}}``."""
        n = self.degree
        out = {
            str(k): [[[z.real, z.imag] for z in row] for row in self.coeffs[k + n]]
            for k in range(-n, n + 1)
        }
        return json.dumps({"radius": self.radius, "coeffs": out})

    @classmethod
    def from_json(cls, text: str) -> "LoopMatrix":
        data = json.loads(text)
        modes = {
            int(k): np.array([[complex(re, im) for re, im in row] for row in m])
            for k, m in data["coeffs"].items()
        }
        return cls.from_modes(modes, radius=data["radius"])


def evaluate(loop: LoopMatrix, lam):
    """Evaluate the loop at ``lam`` (scalar or array); returns ``(..., 2, 2)``."""
    lam = np.asarray(lam, dtype=complex)
    n = loop.degree
    if np.any(lam == 0):
        if np.abs(loop.coeffs[:n]).max(initial=0.0) > 0:
            raise LoopError("cannot evaluate a loop with negative modes at lam = 0")
        out = np.broadcast_to(loop.coeffs[n], lam.shape + (2, 2)).copy()
        nz = lam != 0
        if np.any(nz):
            out[nz] = evaluate(loop, lam[nz])
        return out
    powers = lam[..., None] ** np.arange(-n, n + 1)
    return np.einsum("...k,kij->...ij", powers, loop.coeffs)


def from_samples(values, degree: int, radius=1.0) -> LoopMatrix:
    """Fourier-analyse samples taken at ``circle_points(M, radius)``.

    Returns the loop with modes ``[-degree, degree]``.  Exact for loops that
    are band-limited to those modes.
    """
    values = np.asarray(values, dtype=complex)
    m = values.shape[0]
    if m < 2 * degree + 2:
        raise LoopError(f"{m} samples cannot resolve degree {degree}; need at least {2 * degree + 2}")
    spectrum = np.fft.fft(values, axis=0) / m
    ks = np.arange(-degree, degree + 1)
    c = spectrum[ks % m] / (radius ** ks)[:, None, None]
    kept = np.zeros(m, dtype=bool)
    kept[ks % m] = True
    lost = float(np.abs(spectrum[~kept]).max(initial=0.0))
    return LoopMatrix(c, radius, lost)


def samples(loop: LoopMatrix, m: int) -> np.ndarray:
    """Values of ``loop`` at ``circle_points(m, loop.radius)``."""
    return evaluate(loop, circle_points(m, loop.radius))


def multiply(l1: LoopMatrix, l2: LoopMatrix, headroom: int = 0) -> LoopMatrix:
    """Cauchy product, truncated to ``max(deg1, deg2) + headroom``."""
    if l1.radius != l2.radius:
        raise LoopError(f"radius mismatch: {l1.radius} vs {l2.radius}")
    n1, n2 = l1.degree, l2.degree
    full = n1 + n2
    size = 2 * full + 1
    # zero-padded FFT convolution is exact once size >= 2*full + 1
    a = np.zeros((size, 2, 2), dtype=complex)
    b = np.zeros((size, 2, 2), dtype=complex)
    for k in range(-n1, n1 + 1):
        a[k % size] = l1.coeffs[k + n1]
    for k in range(-n2, n2 + 1):
        b[k % size] = l2.coeffs[k + n2]
    prod = np.fft.ifft(np.fft.fft(a, axis=0) @ np.fft.fft(b, axis=0), axis=0)
    ks = np.arange(-full, full + 1)
    product = LoopMatrix(prod[ks % size], l1.radius)
    return product.resize(max(n1, n2) + headroom)


def lambda_derivative(loop: LoopMatrix) -> LoopMatrix:
    """Termwise ``d/dlam``: output mode ``k`` is ``(k+1) c_{k+1}``.

    The result has degree ``N + 1`` since ``c_{-N}`` feeds mode ``-N-1``.
    """
    n = loop.degree
    m = n + 1
    c = np.zeros((2 * m + 1, 2, 2), dtype=complex)
    for k in range(-n - 1, n):
        c[k + m] = (k + 1) * loop.coeffs[k + 1 + n]
    return LoopMatrix(c, loop.radius)


def star(loop: LoopMatrix) -> LoopMatrix:
    """Adjoint loop ``lam -> L(1/conj(lam))^H``; mode ``k`` is ``c_{-k}^H``."""
    c = np.conj(np.swapaxes(loop.coeffs[::-1], 1, 2))
    return LoopMatrix(c, loop.radius)


def scale_lambda(loop: LoopMatrix, power: int) -> LoopMatrix:
    """Multiply by ``lam**power`` (shift of modes), keeping the degree."""
    n = loop.degree
    c = np.zeros_like(loop.coeffs)
    for k in range(-n, n + 1):
        j = k + power
        if abs(j) <= n:
            c[j + n] = loop.coeffs[k + n]
    return LoopMatrix(c, loop.radius)


def _parity_violation(loop: LoopMatrix, flip: bool) -> float:
    n = loop.degree
    ks = np.arange(-n, n + 1)
    even = ks % 2 == 0
    if flip:
        even = ~even
    c = loop.coeffs
    bad_diag = np.abs(c[~even][:, [0, 1], [0, 1]]).max(initial=0.0)
    bad_off = np.abs(c[even][:, [0, 1], [1, 0]]).max(initial=0.0)
    return float(max(bad_diag, bad_off))


def is_twisted(loop: LoopMatrix, tol=DEFAULT_TOL) -> bool:
    """Even modes on the diagonal and odd modes off it, i.e. ``sigma L(-lam) sigma^-1 = L(lam)``."""
    return _parity_violation(loop, flip=False) <= tol


def is_twisted_derivative(loop: LoopMatrix, tol=DEFAULT_TOL) -> bool:
    """Parity pattern of the lambda-derivative of a twisted loop (roles swapped)."""
    return _parity_violation(loop, flip=True) <= tol


def is_unitary_on_circle(loop: LoopMatrix, samples=64, tol=DEFAULT_TOL) -> bool:
    vals = evaluate(loop, circle_points(samples))
    gram = np.conj(np.swapaxes(vals, -1, -2)) @ vals
    if np.abs(gram - IDENTITY).max() > tol:
        return False
    return bool(np.abs(np.linalg.det(vals) - 1).max() <= tol)


def is_positive_loop(loop: LoopMatrix, tol=DEFAULT_TOL, samples=64) -> bool:
    """Extends holomorphically to the disk with ``L(0)`` in ``K = {diag[a, 1/a] : a > 0}``."""
    n = loop.degree
    if np.abs(loop.coeffs[:n]).max(initial=0.0) > tol:
        return False
    vals = evaluate(loop, circle_points(samples, loop.radius))
    if np.abs(np.linalg.det(vals) - 1).max() > tol:
        return False
    c0 = loop.coeffs[n]
    if abs(c0[0, 1]) > tol or abs(c0[1, 0]) > tol:
        return False
    d = np.diag(c0)
    return bool(np.all(np.abs(d.imag) <= tol) and np.all(d.real > 0))


def max_norm(loop: LoopMatrix) -> float:
    return float(np.abs(loop.coeffs).max())


def su2_to_vector(x) -> np.ndarray:
    """Coordinates of ``x1 e1 + x2 e2 + x3 e3``; accepts stacked matrices."""
    x = np.asarray(x)
    return np.stack([x[..., 0, 0].imag, x[..., 0, 1].real, x[..., 0, 1].imag], axis=-1)


def vector_to_su2(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return (
        v[..., 0, None, None] * E1
        + v[..., 1, None, None] * E2
        + v[..., 2, None, None] * E3
    )
