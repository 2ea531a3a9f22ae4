"""Symmetric-matrix algebra on the cone of positive definite matrices.

All functions take plain ``numpy`` arrays. Inputs are symmetrized on entry
with :func:`sym`, so callers may pass anything square and (nearly) symmetric.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class ConeError(ValueError):
    """Raised when a cone operation receives a matrix outside the open cone."""


class Norms(NamedTuple):
    op: float
    hs: float
    quad: float


class ConeParams(NamedTuple):
    """Amplitude ``a`` and exponent ``nu`` of a Hoelder cone of matrix fields."""

    a: float
    nu: float = 1.0

    def validate(self) -> "ConeParams":
        if not self.a > 0:
            raise ValueError(f"cone amplitude must be positive, got {self.a}")
        if not 0 < self.nu <= 1:
            raise ValueError(f"cone exponent must lie in (0, 1], got {self.nu}")
        return self


def sym(a) -> np.ndarray:
    """Return ``a`` as a float symmetric matrix, (a + a^T) / 2."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product tr(A^T B)."""
    a, b = sym(a), sym(b)
    _check_dims(a, b)
    return float(np.einsum("ij,ij->", a, b))


def eigvalsh(a) -> np.ndarray:
    return np.linalg.eigvalsh(sym(a))


def norms(a) -> Norms:
    """Operator norm, Hilbert-Schmidt norm and max |eigenvalue| of ``a``."""
    a = sym(a)
    ev = np.linalg.eigvalsh(a)
    quad = float(np.max(np.abs(ev)))
    return Norms(op=float(np.linalg.norm(a, 2)), hs=float(np.sqrt(hs_inner(a, a))), quad=quad)


def hs_norm(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.einsum("ij,ij->", a, a)))


def is_psd(a, tol: float = 0.0) -> bool:
    """True iff min eigenvalue >= -tol * max(1, ||a||_HS)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = sym(a)
    scale = max(1.0, hs_norm(a))
    return bool(np.linalg.eigvalsh(a)[0] >= -tol * scale)


def is_pd(a) -> bool:
    a = sym(a)
    return bool(np.linalg.eigvalsh(a)[0] > 0)


def _inv_sqrt(a: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(a)
    if ev[0] <= 0:
        raise ConeError(f"matrix is not positive definite (min eigenvalue {ev[0]:.3e})")
    return (vec / np.sqrt(ev)) @ vec.T


def relative_spectrum(a, b) -> np.ndarray:
    """Eigenvalues of A^{-1/2} B A^{-1/2}, ascending.

    Both arguments must be strictly positive definite.
    """
    a, b = sym(a), sym(b)
    _check_dims(a, b)
    if np.linalg.eigvalsh(b)[0] <= 0:
        raise ConeError("matrix is not positive definite")
    w = _inv_sqrt(a)
    ev = np.linalg.eigvalsh(sym(w @ b @ w))
    if ev[0] <= 0:
        raise ConeError("relative spectrum is not positive; matrices too close to the cone boundary")
    return ev


def cone_alpha(a, b) -> float:
    """sup{t > 0 : B - tA is positive semidefinite}."""
    return float(relative_spectrum(a, b)[0])


def cone_beta(a, b) -> float:
    """inf{t > 0 : tA - B is positive semidefinite}."""
    return float(relative_spectrum(a, b)[-1])


def cone_theta(a, b) -> float:
    """Hilbert projective distance log(beta/alpha) between two PD matrices."""
    ev = relative_spectrum(a, b)
    return float(max(0.0, np.log(ev[-1] / ev[0])))


def sandwich_exponent(a, b) -> float:
    """Smallest D with e^{-D} B <= A <= e^{D} B."""
    ev = relative_spectrum(b, a)
    return float(max(abs(np.log(ev[0])), abs(np.log(ev[-1]))))
