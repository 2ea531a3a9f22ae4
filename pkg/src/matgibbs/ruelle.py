"""The matrix Ruelle operator A -> sum_i L_i^T A L_i and its Perron data.

Two representations are supported:

* constant matrices (exact for affine systems), via :func:`apply_const`;
* cylinder fields, tables of matrices indexed by the words of a fixed depth,
  via :func:`apply_field`.  Derivatives are frozen at the cell anchors, which
  lets a non-affine derivative enter through the ``derivative`` hook.

:func:`operator_matrix` gives the same linear map as a dense matrix on the
space of symmetric matrices, serving as an independent check on the power
iteration in :func:`leading_eigenpair`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import matcone
from .ifs import DEFAULT_CAP, IfsSystem, cell_anchors, check_cap
from .matcone import ConeError, cone_theta, hs_inner, hs_norm, sym

log = logging.getLogger(__name__)

Derivative = Callable[[int, np.ndarray], np.ndarray]


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class CylinderField:
    """Matrix field constant on the cylinders of a fixed depth.

    ``values[k]`` belongs to the k-th word in lexicographic order.
    """

    depth: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[0] != self.n**self.depth:
            raise ValueError(f"field needs {self.n ** self.depth} cells, got {self.values.shape[0]}")

    @classmethod
    def constant(cls, a, n: int, depth: int) -> "CylinderField":
        a = sym(a)
        return cls(depth, n, np.broadcast_to(a, (n**depth,) + a.shape).copy())

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, w) -> np.ndarray:
        idx = 0
        for c in w:
            idx = idx * self.n + c
        return self.values[idx]


@dataclass(frozen=True)
class EigenPair:
    beta: float
    q: np.ndarray | CylinderField
    residual: float
    iterations: int = 0


# -- constant matrices --------------------------------------------------------

def apply_const(sys: IfsSystem, a) -> np.ndarray:
    a = sym(a)
    if a.shape != (sys.dim, sys.dim):
        raise ValueError(f"dimension mismatch: system has d={sys.dim}, matrix {a.shape}")
    out = np.einsum("nji,jk,nkl->il", sys.linears, a, sys.linears)
    return 0.5 * (out + out.T)


def apply_adjoint(sys: IfsSystem, x) -> np.ndarray:
    """X -> sum_i L_i X L_i^T, the HS-adjoint of :func:`apply_const`."""
    x = sym(x)
    out = np.einsum("nij,jk,nlk->il", sys.linears, x, sys.linears)
    return 0.5 * (out + out.T)


def _projective_iteration(step, x0, tol, max_iter, what):
    x = x0 / hs_norm(x0)
    for k in range(1, max_iter + 1):
        y = step(x)
        norm = hs_norm(y)
        if not np.isfinite(norm) or norm == 0:
            raise ConeError(f"{what}: iterate vanished at step {k}")
        y = y / norm
        try:
            dist = cone_theta(x, y)
        except ConeError:
            raise ConeError(f"{what}: iterate left the positive definite cone at step {k}") from None
        x = y
        if dist < tol:
            return x, k, dist
    raise ConvergenceError(f"{what}: no convergence after {max_iter} iterations (theta={dist:.3e})", dist)


def leading_eigenpair(sys: IfsSystem, tol: float = 1e-12, max_iter: int = 10000, start=None) -> EigenPair:
    """Perron eigenpair (beta, q) of the Ruelle operator on constant matrices.

    Projective power iteration from ``start`` (default the identity), stopped
    when consecutive iterates are within ``tol`` in the Hilbert metric.
    ``q`` is normalized to unit HS norm and beta is the HS Rayleigh quotient.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x0 = np.eye(sys.dim) if start is None else sym(start)
    q, k, _ = _projective_iteration(lambda x: apply_const(sys, x), x0, tol, max_iter, "leading_eigenpair")
    lq = apply_const(sys, q)
    beta = hs_inner(lq, q) / hs_inner(q, q)
    residual = hs_norm(lq - beta * q) / hs_norm(q)
    log.debug("leading_eigenpair: beta=%.15g after %d steps, residual %.3e", beta, k, residual)
    return EigenPair(beta=float(beta), q=q, residual=float(residual), iterations=k)


def adjoint_eigenpair(sys: IfsSystem, tol: float = 1e-12, max_iter: int = 10000, start=None) -> EigenPair:
    """Same as :func:`leading_eigenpair` for the adjoint X -> sum L X L^T."""
    x0 = np.eye(sys.dim) if start is None else sym(start)
    x, k, _ = _projective_iteration(lambda y: apply_adjoint(sys, y), x0, tol, max_iter, "adjoint iteration")
    lx = apply_adjoint(sys, x)
    beta = hs_inner(lx, x) / hs_inner(x, x)
    residual = hs_norm(lx - beta * x) / hs_norm(x)
    return EigenPair(beta=float(beta), q=x, residual=float(residual), iterations=k)


# -- vectorized oracle ----------------------------------------------------------

def sym_basis(d: int) -> np.ndarray:
    """Orthonormal (HS) basis of d x d symmetric matrices, shape (m, d, d)."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d))
        e[i, i] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            basis.append(e)
    return np.array(basis)


def vectorize(a) -> np.ndarray:
    a = sym(a)
    return np.einsum("mij,ij->m", sym_basis(a.shape[0]), a)


def unvectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    m = v.shape[0]
    d = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    return np.einsum("m,mij->ij", v, sym_basis(d))


def operator_matrix(sys: IfsSystem) -> np.ndarray:
    """Matrix of :func:`apply_const` in the basis :func:`sym_basis`."""
    basis = sym_basis(sys.dim)
    images = np.einsum("nji,mjk,nkl->mil", sys.linears, basis, sys.linears)
    # column m holds the coordinates of the image of basis element m
    return np.einsum("pij,mij->pm", basis, images)


# -- contraction diagnostics ------------------------------------------------------

@dataclass
class ContractionReport:
    trials: int
    diameter: float
    max_ratio: float
    ratio_bound: float
    lower_constant: float

    @property
    def ratio_ok(self) -> bool:
        return self.max_ratio <= self.ratio_bound + 1e-9


def random_pd(rng: np.random.Generator, d: int, rank_one: bool = False) -> np.ndarray:
    if rank_one:
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        return np.outer(v, v) + 1e-6 * np.eye(d)
    g = rng.standard_normal((d, d))
    return g @ g.T + 1e-3 * np.eye(d)


def contraction_diagnostics(sys: IfsSystem, trials: int = 500, seed: int = 0) -> ContractionReport:
    """Empirical Birkhoff contraction data for the Ruelle operator.

    Half of the random pairs are near rank one so that the observed image
    diameter approaches the true one.
    """
    if trials < 2:
        raise ValueError("trials must be at least 2")
    rng = np.random.default_rng(seed)
    d = sys.dim
    diameter = 0.0
    max_ratio = 0.0
    lower = np.inf
    for t in range(trials):
        a = random_pd(rng, d, rank_one=t % 2 == 0)
        b = random_pd(rng, d, rank_one=t % 4 < 2)
        la, lb = apply_const(sys, a), apply_const(sys, b)
        img = cone_theta(la, lb)
        diameter = max(diameter, img)
        src = cone_theta(a, b)
        if src > 1e-12:
            max_ratio = max(max_ratio, img / src)
        lower = min(lower, np.linalg.eigvalsh(la)[0] / hs_norm(a))
    return ContractionReport(
        trials=trials,
        diameter=float(diameter),
        max_ratio=float(max_ratio),
        ratio_bound=float(1 - np.exp(-diameter)),
        lower_constant=float(lower),
    )


def convergence_profile(sys: IfsSystem, b, q, steps: int) -> np.ndarray:
    """Hilbert distance between the normalized iterates L^l B and q, l = 1..steps."""
    out = []
    x = sym(b)
    for _ in range(steps):
        x = apply_const(sys, x)
        x = x / hs_norm(x)
        out.append(cone_theta(x, q))
    return np.array(out)


def geometric_ratio(errors, floor: float = 0.0) -> float:
    """Least-squares decay ratio of a positive sequence (entries <= floor dropped)."""
    e = np.asarray(errors, dtype=float)
    idx = np.nonzero(e > floor)[0]
    if idx.size < 2:
        return 0.0
    slope = np.polyfit(idx, np.log(e[idx]), 1)[0]
    return float(np.exp(slope))


# -- cylinder fields --------------------------------------------------------------

def _affine_derivative(sys: IfsSystem) -> Derivative:
    return lambda i, x: np.broadcast_to(sys.linears[i], x.shape[:-1] + sys.linears[i].shape)


def apply_field(sys: IfsSystem, field: CylinderField, derivative: Derivative | None = None) -> CylinderField:
    """Discretized Ruelle operator on a cylinder field.

    (LA)(w) = sum_i D_i(anchor w)^T A(trunc(i w)) D_i(anchor w), where trunc
    drops the last letter. ``derivative(i, points)`` returns the Jacobians of
    map ``i`` at an array of points; the default uses the affine linear parts.
    """
    if field.depth < 1:
        raise ValueError("apply_field needs depth >= 1")
    if field.n != sys.n or field.dim != sys.dim:
        raise ValueError("field does not match the system")
    n, depth = sys.n, field.depth
    derivative = derivative or _affine_derivative(sys)
    anchors = cell_anchors(sys, depth)
    idx = np.arange(n**depth)
    out = np.zeros_like(field.values)
    for i in range(n):
        jac = np.asarray(derivative(i, anchors), dtype=float)
        src = field.values[i * n ** (depth - 1) + idx // n]
        out += np.einsum("wji,wjk,wkl->wil", jac, src, jac)
    out = 0.5 * (out + np.swapaxes(out, 1, 2))
    return CylinderField(depth, n, out)


def field_eigenpair(
    sys: IfsSystem,
    depth: int,
    tol: float = 1e-12,
    max_iter: int = 10000,
    derivative: Derivative | None = None,
    cap: int = DEFAULT_CAP,
) -> EigenPair:
    """Perron eigenpair of the discretized operator; q normalized to sup_w ||q(w)||_HS = 1."""
    check_cap(sys.n, depth, cap)
    x = CylinderField.constant(np.eye(sys.dim), sys.n, depth)

    def sup_hs(f: CylinderField) -> float:
        return float(np.max(np.sqrt(np.einsum("wij,wij->w", f.values, f.values))))

    def dist(f: CylinderField, g: CylinderField) -> float:
        # Hilbert metric on the product cone: log(max beta / min alpha)
        lo, hi = np.inf, 0.0
        for a, b in zip(f.values, g.values):
            ev = matcone.relative_spectrum(a, b)
            lo, hi = min(lo, ev[0]), max(hi, ev[-1])
        return float(np.log(hi / lo))

    x = CylinderField(depth, sys.n, x.values / sup_hs(x))
    d = np.inf
    for k in range(1, max_iter + 1):
        y = apply_field(sys, x, derivative)
        y = CylinderField(depth, sys.n, y.values / sup_hs(y))
        d = dist(x, y)
        x = y
        if d < tol:
            break
    else:
        raise ConvergenceError(f"field_eigenpair: no convergence after {max_iter} iterations", d)
    lx = apply_field(sys, x, derivative)
    beta = float(np.einsum("wij,wij->", lx.values, x.values) / np.einsum("wij,wij->", x.values, x.values))
    residual = float(np.sqrt(np.einsum("wij,wij->", lx.values - beta * x.values, lx.values - beta * x.values)))
    return EigenPair(beta=beta, q=x, residual=residual, iterations=k)


def gamma_for(sys: IfsSystem) -> float:
    return max(sys.eta, 0.5)


def cone_membership(field: CylinderField, gamma: float = 0.5, nu: float = 1.0) -> tuple[float, float]:
    """Smallest amplitude a with A_w e^{-a d(w,w')^nu} <= A_w' for all cell pairs.

    ``d`` is the symbolic metric gamma^k, k the first index where the words
    differ. Returns ``(a_hat, nu)``.
    """
    n, depth = field.n, field.depth
    vals = field.values
    ev, vec = np.linalg.eigh(vals)
    bad = np.flatnonzero(ev[:, 0] <= 0)
    if bad.size:
        raise ConeError(f"cell {bad[0]} is not positive definite")
    inv_sqrt = np.einsum("wij,wj,wkj->wik", vec, 1 / np.sqrt(ev), vec)
    count = n**depth
    # digits[k, m] is the m-th letter of the k-th word
    digits = np.array([np.arange(count) // n ** (depth - 1 - m) % n for m in range(depth)]).T
    a_hat = 0.0
    for p in range(count - 1):
        rest = vals[p + 1:]
        rel = np.linalg.eigvalsh(np.einsum("ij,wjk,kl->wil", inv_sqrt[p], rest, inv_sqrt[p]))
        if np.any(rel[:, 0] <= 0):
            raise ConeError("relative spectrum is not positive")
        need = np.maximum(np.maximum(-np.log(rel[:, 0]), np.log(rel[:, -1])), 0.0)
        first_diff = np.argmax(digits[p + 1:] != digits[p], axis=1)
        a_hat = max(a_hat, float(np.max(need / (gamma**first_diff) ** nu)))
    return float(a_hat), nu
