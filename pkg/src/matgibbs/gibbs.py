"""Matrix-valued Gibbs measure and Kusuoka measure of an affine IFS.

For affine maps the Gibbs measure is determined by its total mass
``tau_mass`` through the closed cylinder formula

    tau([w]) = beta^{-|w|} L_w tau_mass L_w^T,

so nothing here is discretized; every cylinder value is exact up to
floating point. The Kusuoka measure of a cylinder is (q, tau([w]))_HS.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .ifs import DEFAULT_CAP, IfsSystem, Word, check_cap, check_word, word_linears, word_map, words
from .matcone import ConeError, hs_inner, hs_norm, sym
from .ruelle import EigenPair, _projective_iteration, apply_adjoint, leading_eigenpair


@dataclass(frozen=True)
class GibbsData:
    system: IfsSystem
    pair: EigenPair
    tau_mass: np.ndarray

    @property
    def beta(self) -> float:
        return self.pair.beta

    @property
    def q(self) -> np.ndarray:
        return self.pair.q

    def with_tau_mass(self, tau_mass) -> "GibbsData":
        return replace(self, tau_mass=sym(tau_mass))


@dataclass(frozen=True)
class MeasureTable:
    depth: int
    words: list[Word]
    tau: np.ndarray
    kappa: np.ndarray

    def __len__(self) -> int:
        return len(self.words)

    def rows(self):
        return zip(self.words, self.tau, self.kappa)


def stationary_mass(sys: IfsSystem, pair: EigenPair, tol: float = 1e-12, max_iter: int = 10000) -> np.ndarray:
    """Total mass tau(Sigma): the Perron vector of X -> sum_i L_i X L_i^T.

    Normalized so that (q, tau_mass)_HS = 1. Raises if the adjoint's dominant
    eigenvalue disagrees with ``pair.beta`` by more than ``max(tol, 1e-9 beta)``.
    """
    x, _, _ = _projective_iteration(lambda y: apply_adjoint(sys, y), np.eye(sys.dim), tol, max_iter, "stationary_mass")
    lx = apply_adjoint(sys, x)
    beta_adj = hs_inner(lx, x) / hs_inner(x, x)
    if abs(beta_adj - pair.beta) > max(tol, 1e-9 * pair.beta):
        raise ConeError(f"adjoint eigenvalue {beta_adj:.15g} differs from beta {pair.beta:.15g}")
    mass = hs_inner(pair.q, x)
    if not mass > 0:
        raise ConeError("Gibbs measure has zero mass against q")
    return x / mass


def gibbs_data(sys: IfsSystem, tol: float = 1e-12, max_iter: int = 10000) -> GibbsData:
    pair = leading_eigenpair(sys, tol=tol, max_iter=max_iter)
    return GibbsData(sys, pair, stationary_mass(sys, pair, tol=tol, max_iter=max_iter))


def cylinder_tau(g: GibbsData, w: Iterable[int]) -> np.ndarray:
    w = check_word(g.system, w)
    lin = word_map(g.system, w).linear
    return lin @ g.tau_mass @ lin.T / g.beta ** len(w)


def kappa(g: GibbsData, w: Iterable[int]) -> float:
    return hs_inner(g.q, cylinder_tau(g, w))


def cylinder_taus(g: GibbsData, depth: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """tau([w]) for every word of ``depth`` in lexicographic order."""
    lin = word_linears(g.system, depth, cap)
    return np.einsum("wij,jk,wlk->wil", lin, g.tau_mass, lin) / g.beta**depth


def measure_table(g: GibbsData, depth: int, cap: int = DEFAULT_CAP) -> MeasureTable:
    check_cap(g.system.n, depth, cap)
    tau = cylinder_taus(g, depth, cap)
    kap = np.einsum("ij,wij->w", g.q, tau)
    return MeasureTable(depth, list(words(g.system.n, depth)), tau, kap)


# -- consistency --------------------------------------------------------------

@dataclass
class ConsistencyReport:
    depth: int
    additivity_error: float
    shift_error: float
    tv_constant: float
    tv_violation: float
    tolerance: float = 1e-12

    @property
    def additivity_ok(self) -> bool:
        return self.additivity_error <= self.tolerance

    @property
    def shift_ok(self) -> bool:
        return self.shift_error <= self.tolerance

    @property
    def tv_ok(self) -> bool:
        return self.tv_violation <= 0.0

    @property
    def ok(self) -> bool:
        return self.additivity_ok and self.shift_ok and self.tv_ok


def tv_constant(g: GibbsData) -> float:
    """sqrt(d) / lambda_min(q), the constant in ||tau_w||_HS <= C kappa_w."""
    return float(np.sqrt(g.system.dim) / np.linalg.eigvalsh(g.q)[0])


def consistency_checks(g: GibbsData, depth: int, tolerance: float = 1e-12) -> ConsistencyReport:
    """Additivity, shift invariance of kappa and the total-variation bound for all |w| < depth.

    The total-variation check also covers depth ``depth`` itself.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n = g.system.n
    c3 = tv_constant(g)
    add_err = shift_err = 0.0
    tv_violation = -np.inf
    parent = cylinder_taus(g, 0)
    for l in range(1, depth + 1):
        child = cylinder_taus(g, l)
        # children of w are the contiguous block w*n .. w*n + n-1
        summed = child.reshape(-1, n, g.system.dim, g.system.dim).sum(axis=1)
        add_err = max(add_err, float(np.max(np.abs(summed - parent))))
        k_parent = np.einsum("ij,wij->w", g.q, parent)
        k_child = np.einsum("ij,wij->w", g.q, child)
        # words i ++ w sit at i * n^{l-1} + index(w)
        shifted = k_child.reshape(n, -1).sum(axis=0)
        shift_err = max(shift_err, float(np.max(np.abs(shifted - k_parent))))
        hs = np.sqrt(np.einsum("wij,wij->w", child, child))
        tv_violation = max(tv_violation, float(np.max(hs - c3 * k_child)))
        parent = child
    return ConsistencyReport(depth, add_err, shift_err, c3, tv_violation, tolerance)


def correlation(g: GibbsData, u: Iterable[int], a, l: int, cap: int = DEFAULT_CAP) -> float:
    """sum over |w| = l of (A, tau([w ++ u]))_HS."""
    u = check_word(g.system, u)
    check_cap(g.system.n, l + len(u), cap)
    lin = word_linears(g.system, l, cap)
    tau_u = cylinder_tau(g, u)
    total = np.einsum("wij,jk,wlk->il", lin, tau_u, lin) / g.beta**l
    return hs_inner(sym(a), total)


def mixing_limit(g: GibbsData, u: Iterable[int], a) -> float:
    return kappa(g, u) * hs_inner(sym(a), g.tau_mass)


def direction_field(g: GibbsData, w: Iterable[int]) -> tuple[np.ndarray, float]:
    """Dominant unit eigenvector of tau([w]) and the ratio of its top two eigenvalues.

    The sign is fixed so that the first nonzero component is positive.
    """
    w = check_word(g.system, w)
    if not w:
        raise ValueError("direction_field needs depth >= 1")
    t = cylinder_tau(g, w)
    norm = hs_norm(t)
    if norm == 0:
        raise ConeError("cylinder matrix vanishes")
    ev, vec = np.linalg.eigh(t / norm)
    z = vec[:, -1]
    nz = np.flatnonzero(np.abs(z) > 1e-300)
    if z[nz[0]] < 0:
        z = -z
    residual = float(ev[-2] / ev[-1]) if len(ev) > 1 else 0.0
    return z, residual
