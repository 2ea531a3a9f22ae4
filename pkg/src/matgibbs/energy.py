"""Self-similar energy form E(f, h) = int (grad f, d tau grad h).

The integral is evaluated as a cylinder sum at a chosen depth with one node
per cell. Nodes are ``psi_w(p0)`` for a fixed point ``p0`` of the attractor,
so that ``psi_i(node(w)) == node(i w)`` and the scaling identity

    sum_i E(f o psi_i, h o psi_i) at depth L == beta * E(f, h) at depth L + 1

holds exactly, whatever f and h are.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gibbs import GibbsData, cylinder_taus
from .ifs import DEFAULT_CAP, AffineMap, IfsSystem, word_affines

VecFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TestFunction:
    """A C^1 function with its gradient, both vectorized over leading axes.

    ``value`` maps (..., d) -> (...), ``gradient`` maps (..., d) -> (..., d).
    """

    __test__ = False  # not a pytest class

    value: VecFn
    gradient: VecFn
    kind: str = "callable"

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(
            lambda x: self.value(x) + other.value(x),
            lambda x: self.gradient(x) + other.gradient(x),
            self.kind if self.kind == other.kind else "callable",
        )

    def compose(self, m: AffineMap) -> "TestFunction":
        """f o m, with gradient L^T grad f(m(x))."""
        lin, trans = m.linear, m.translation

        def value(x):
            return self.value(np.asarray(x) @ lin.T + trans)

        def gradient(x):
            return self.gradient(np.asarray(x) @ lin.T + trans) @ lin

        return TestFunction(value, gradient, self.kind)


def linear(coef, const: float = 0.0) -> TestFunction:
    c = np.asarray(coef, dtype=float)
    return TestFunction(
        lambda x: np.asarray(x) @ c + const,
        lambda x: np.broadcast_to(c, np.shape(x)).copy(),
        "linear",
    )


def quadratic(matrix, coef=None) -> TestFunction:
    """f(x) = x^T M x + c^T x."""
    m = np.asarray(matrix, dtype=float)
    c = np.zeros(m.shape[0]) if coef is None else np.asarray(coef, dtype=float)
    ms = m + m.T
    return TestFunction(
        lambda x: np.einsum("...i,ij,...j->...", x, m, x) + np.asarray(x) @ c,
        lambda x: np.asarray(x) @ ms.T + c,
        "polynomial",
    )


def constant(value: float) -> TestFunction:
    return TestFunction(
        lambda x: np.full(np.shape(x)[:-1], float(value)),
        lambda x: np.zeros(np.shape(x)),
        "linear",
    )


def from_callable(value, gradient) -> TestFunction:
    """Wrap pointwise callables (d-vector -> scalar / d-vector)."""

    def vvalue(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        return np.array([value(p) for p in flat]).reshape(x.shape[:-1])

    def vgrad(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        return np.array([gradient(p) for p in flat]).reshape(x.shape)

    return TestFunction(vvalue, vgrad, "callable")


def gradient_error(f: TestFunction, points: np.ndarray, step: float = 1e-5) -> float:
    """Max relative deviation of f.gradient from centered differences."""
    points = np.atleast_2d(points)
    d = points.shape[1]
    fd = np.empty_like(points)
    for k in range(d):
        e = np.zeros(d)
        e[k] = step
        fd[:, k] = (f.value(points + e) - f.value(points - e)) / (2 * step)
    g = f.gradient(points)
    scale = np.maximum(1.0, np.abs(g))
    return float(np.max(np.abs(g - fd) / scale))


def reference_point(sys: IfsSystem) -> np.ndarray:
    """Fixed point of the first map; it lies on the attractor."""
    return sys.maps[0].fixpoint()


def quadrature_nodes(sys: IfsSystem, depth: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """psi_w(p0) for every word of ``depth``."""
    lin, trans = word_affines(sys, depth, cap)
    return np.einsum("wij,j->wi", lin, reference_point(sys)) + trans


def energy(g: GibbsData, f: TestFunction, h: TestFunction, depth: int, cap: int = DEFAULT_CAP) -> float:
    nodes = quadrature_nodes(g.system, depth, cap)
    tau = cylinder_taus(g, depth, cap)
    gf = f.gradient(nodes)
    gh = h.gradient(nodes)
    return float(np.einsum("wi,wij,wj->", gf, tau, gh))


def linear_energy(g: GibbsData, grad_f, grad_h) -> float:
    """Closed form for linear f, h: (grad f, tau_mass grad h)."""
    return float(np.asarray(grad_f) @ g.tau_mass @ np.asarray(grad_h))


def pulled_back_energy(g: GibbsData, f: TestFunction, h: TestFunction, depth: int) -> float:
    """sum_i E(f o psi_i, h o psi_i) at ``depth``."""
    return sum(energy(g, f.compose(m), h.compose(m), depth) for m in g.system.maps)


def self_similarity_residual(g: GibbsData, f: TestFunction, h: TestFunction, depth: int) -> float:
    lhs = pulled_back_energy(g, f, h, depth)
    rhs = g.beta * energy(g, f, h, depth + 1)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def builtin_pairs(dim: int) -> dict[str, tuple[TestFunction, TestFunction]]:
    """Named (f, h) pairs used by the CLI and the verification suite.

    ``linear``: f = x1, h = x2 (x1 again when d = 1);
    ``quadratic``: f = h = x1^2 + x1 x2 (x1^2 when d = 1);
    ``mixed``: f as in ``quadratic``, h = |x|^2 + x1.
    """
    e = np.eye(dim)
    x1 = linear(e[0])
    x2 = linear(e[min(1, dim - 1)])
    quad_m = np.zeros((dim, dim))
    quad_m[0, 0] = 1.0
    if dim > 1:
        quad_m[0, 1] = 1.0
    q1 = quadratic(quad_m)
    q2 = quadratic(np.eye(dim), e[0])
    return {"linear": (x1, x2), "quadratic": (q1, q1), "mixed": (q1, q2)}
