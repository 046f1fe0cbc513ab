"""Positive-semidefiniteness tests via Newton identities.

The characteristic polynomial coefficients c_0..c_n of a Hermitian matrix
are elementary symmetric functions of its (real) eigenvalues, obtainable
from the power traces p_k = Tr(A^k) by the Newton recursion.  For a
real-rooted polynomial, Descartes' rule of signs collapses to: the matrix
is PSD iff every c_k is nonnegative.  This avoids computing eigenvalues
in the samplers' hot path; the dense eigensolver below exists only as an
independent oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidInputError,
    NumericalFailureError,
)

__all__ = [
    "NewtonCoefficients",
    "power_traces",
    "newton_coefficients",
    "is_psd_newton",
    "is_psd_eigen",
    "mehta_radius",
    "outer_radius",
    "psd_bits_batch",
]

DEFAULT_PSD_TOL = 1e-10
# roundoff guard for the cancelling terms of the Newton recursion
_NEWTON_NOISE = 1e-15


@dataclass(frozen=True)
class NewtonCoefficients:
    """Characteristic-polynomial coefficients c_0..c_n (unit-trace input)."""

    n: int
    c: np.ndarray

    def __post_init__(self):
        assert self.c.shape == (self.n + 1,)
        assert self.c[0] == 1.0


def power_traces(a: np.ndarray, k_max: int) -> np.ndarray:
    """Power traces p_k = Tr(A^k), k = 1..k_max, by iterated multiplication."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.conj().T, atol=1e-9):
        raise InvalidInputError("matrix is not Hermitian")
    if k_max < 1:
        raise InvalidInputError("k_max must be >= 1")
    p = np.empty(k_max)
    power = a
    for k in range(1, k_max + 1):
        if k > 1:
            power = power @ a
        t = np.trace(power)
        if abs(t.imag) > 1e-10:
            raise NumericalFailureError(f"power trace p_{k} has imaginary residue {t.imag}")
        p[k - 1] = t.real
    return p


def newton_coefficients(p, n: int) -> NewtonCoefficients:
    """Characteristic-polynomial coefficients from power traces.

    ``p`` holds p_1..p_m with m >= n; p_1 must equal 1 (unit trace) to
    within 1e-9.  Uses c_k = (1/k) sum_{i=1..k} (-1)^{i+1} p_i c_{k-i}.
    """
    p = np.asarray(p, dtype=float)
    if p.size < n:
        raise InvalidInputError(f"need at least {n} power traces, got {p.size}")
    if abs(p[0] - 1) > 1e-9:
        raise InvalidInputError(f"p_1 = {p[0]} is not a unit trace")
    c = np.zeros(n + 1)
    c[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            term = p[i - 1] * c[k - i]
            acc += term if i % 2 == 1 else -term
        c[k] = acc / k
    return NewtonCoefficients(n=n, c=c)


def is_psd_newton(a: np.ndarray, tol: float = DEFAULT_PSD_TOL) -> bool:
    """PSD test for a unit-trace Hermitian matrix.

    Each coefficient c_k gets slack ``tol * |c_{k-1}|`` -- its
    sensitivity to the smallest eigenvalue -- plus a roundoff guard
    proportional to the accumulated absolute terms of the recursion, so
    the tolerance acts uniformly on the spectrum at every dimension.
    The coefficients themselves shrink like products of up to n
    eigenvalues, which would make an absolute threshold far too
    permissive at large n.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    p = power_traces(a, n)
    c = np.zeros(n + 1)
    c[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0
        mag = 0.0
        for i in range(1, k + 1):
            term = p[i - 1] * c[k - i]
            acc += term if i % 2 == 1 else -term
            mag += abs(term)
        c[k] = acc / k
        if c[k] < -(tol * abs(c[k - 1]) + _NEWTON_NOISE * mag) / k:
            return False
    return True


def is_psd_eigen(a: np.ndarray, tol: float = DEFAULT_PSD_TOL) -> bool:
    """Independent PSD oracle via a dense Hermitian eigensolver."""
    try:
        w = np.linalg.eigvalsh(np.asarray(a, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed: {exc}") from exc
    return bool(w[0] >= -tol)


def mehta_radius(n: int) -> float:
    """HS radius of the ball around I_n/n guaranteed to contain only
    (separable) states: 1/sqrt(n(n-1))."""
    if n < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {n}")
    return 1 / np.sqrt(n * (n - 1))


def outer_radius(n: int) -> float:
    """HS radius of the smallest ball around I_n/n containing every state:
    sqrt((n-1)/n)."""
    if n < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {n}")
    return np.sqrt((n - 1) / n)


def _batch_newton_bits(m: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized PSD classification of a batch of unit-trace Hermitian
    matrices, shape (B, n, n).  Power traces are formed from matrix powers
    up to ceil(n/2) via HS pairings p_{a+b} = <M^a, M^b>."""
    b, n, _ = m.shape
    n_half = (n + 1) // 2
    powers = [m]
    for _ in range(1, n_half):
        powers.append(powers[-1] @ m)
    p = np.empty((n, b))
    p[0] = np.trace(m, axis1=1, axis2=2).real
    for k in range(2, n + 1):
        hi, lo = (k + 1) // 2, k // 2
        p[k - 1] = np.einsum("bij,bij->b", powers[hi - 1], powers[lo - 1].conj()).real
    c = np.zeros((n + 1, b))
    c[0] = 1.0
    ok = np.ones(b, dtype=bool)
    for k in range(1, n + 1):
        acc = np.zeros(b)
        mag = np.zeros(b)
        for i in range(1, k + 1):
            term = p[i - 1] * c[k - i]
            acc += term if i % 2 == 1 else -term
            mag += np.abs(term)
        c[k] = acc / k
        # same scale-aware threshold as is_psd_newton
        ok &= c[k] >= -(tol * np.abs(c[k - 1]) + _NEWTON_NOISE * mag) / k
    return ok


def psd_bits_batch(generators: np.ndarray, coords: np.ndarray,
                   tol: float = DEFAULT_PSD_TOL) -> np.ndarray:
    """PSD classification of I/n + sum_i coords[:, i] generators[i].

    ``generators`` is a (d, n, n) unit-norm scaled generator array and
    ``coords`` a (B, d) batch of coordinate vectors.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    n = generators.shape[1]
    m = np.tensordot(coords, generators, axes=(1, 0))
    m += np.eye(n) / n
    return _batch_newton_bits(m, tol)
