"""Affine iterated function systems and their coding by finite words.

Words are tuples of 0-based letters; ``(0, 2)`` is the cylinder the paper-style
notation would write as ``[1 3]``. Composition follows the usual convention
for codings: the first letter is applied last, so ``word_map(sys, (i, j))`` is
``psi_i o psi_j``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

Word = tuple[int, ...]

# Words at a given depth are enumerated in lexicographic order, first letter
# most significant.  Batched helpers below follow the same order.
DEFAULT_CAP = 10**6


class IfsError(ValueError):
    """Invalid system description or word."""


@dataclass(frozen=True)
class AffineMap:
    linear: np.ndarray
    translation: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.translation

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self o other."""
        return AffineMap(self.linear @ other.linear, self.linear @ other.translation + self.translation)

    def fixpoint(self) -> np.ndarray:
        eye = np.eye(self.dim)
        return np.linalg.solve(eye - self.linear, self.translation)


@dataclass(frozen=True)
class IfsSystem:
    maps: tuple[AffineMap, ...]
    eta: float
    diam_scale: float
    name: str = ""
    linears: np.ndarray = field(init=False, repr=False, compare=False)
    translations: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "linears", np.stack([m.linear for m in self.maps]))
        object.__setattr__(self, "translations", np.stack([m.translation for m in self.maps]))

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    def rescaled(self, scale: float | None = None) -> "IfsSystem":
        """Conjugate by x -> scale * x (default: ``diam_scale``).

        Linear parts are unchanged, so every spectral quantity is too.
        """
        s = self.diam_scale if scale is None else float(scale)
        raw = [(m.linear, s * m.translation) for m in self.maps]
        return build_system(raw, name=self.name, _diam_scale=self.diam_scale / s)


def _bounding_diameter(linears: np.ndarray, translations: np.ndarray, eta: float) -> float:
    eye = np.eye(linears.shape[1])
    fix = np.array([np.linalg.solve(eye - L, t) for L, t in zip(linears, translations)])
    return 2 * np.max(np.linalg.norm(fix, axis=1)) + 2 * np.max(np.linalg.norm(translations, axis=1)) / (1 - eta)


def build_system(raw: Sequence[tuple], name: str = "", _diam_scale: float | None = None) -> IfsSystem:
    """Validate a list of ``(linear, translation)`` pairs and build an IFS.

    Raises :class:`IfsError` on dimension mismatch, singular or
    non-contracting linear parts. The message names the offending map
    with a 1-based index.
    """
    raw = list(raw)
    if len(raw) < 1:
        raise IfsError("a system needs at least one map")
    maps = []
    dim = None
    for k, (lin, trans) in enumerate(raw, start=1):
        lin = np.atleast_2d(np.asarray(lin, dtype=float))
        trans = np.atleast_1d(np.asarray(trans, dtype=float)).reshape(-1)
        if lin.ndim != 2 or lin.shape[0] != lin.shape[1]:
            raise IfsError(f"map {k}: linear part must be square, got shape {lin.shape}")
        if dim is None:
            dim = lin.shape[0]
        if lin.shape[0] != dim or trans.shape[0] != dim:
            raise IfsError(f"map {k}: dimension mismatch (expected {dim})")
        op = np.linalg.norm(lin, 2)
        if not op < 1:
            raise IfsError(f"map {k}: not a contraction (operator norm {op:.6g})")
        if abs(np.linalg.det(lin)) <= 1e-12 * max(op, 1e-300) ** dim:
            raise IfsError(f"map {k}: singular linear part")
        maps.append(AffineMap(lin, trans))
    linears = np.stack([m.linear for m in maps])
    eta = float(max(np.linalg.norm(L, 2) for L in linears))
    if _diam_scale is None:
        diam = _bounding_diameter(linears, np.stack([m.translation for m in maps]), eta)
        _diam_scale = 1.0 / diam if diam > 0 else 1.0
    return IfsSystem(tuple(maps), eta=eta, diam_scale=float(_diam_scale), name=name)


SQRT3 = np.sqrt(3.0)
GASKET_LINEARS = (
    np.array([[3 / 5, 0.0], [0.0, 1 / 5]]),
    np.array([[3 / 10, SQRT3 / 10], [SQRT3 / 10, 1 / 2]]),
    np.array([[3 / 10, -SQRT3 / 10], [-SQRT3 / 10, 1 / 2]]),
)
GASKET_VERTICES = (
    np.array([0.0, 0.0]),
    np.array([1.0, 1 / SQRT3]),
    np.array([1.0, -1 / SQRT3]),
)


def preset_harmonic_gasket() -> IfsSystem:
    """The harmonic Sierpinski gasket: psi_i(x) = P_i + T_i (x - P_i)."""
    raw = [(T, P - T @ P) for T, P in zip(GASKET_LINEARS, GASKET_VERTICES)]
    return build_system(raw, name="harmonic-gasket")


def preset_dyadic() -> IfsSystem:
    return build_system([([[0.5]], [0.0]), ([[0.5]], [0.5])], name="dyadic-1d")


PRESETS = {
    "harmonic-gasket": preset_harmonic_gasket,
    "dyadic-1d": preset_dyadic,
}


def preset(name: str) -> IfsSystem:
    try:
        return PRESETS[name]()
    except KeyError:
        raise IfsError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# -- words ------------------------------------------------------------------

def check_word(sys: IfsSystem, w: Iterable[int]) -> Word:
    w = tuple(int(c) for c in w)
    for c in w:
        if not 0 <= c < sys.n:
            raise IfsError(f"letter {c} out of range for {sys.n} maps")
    return w


def check_cap(n: int, depth: int, cap: int = DEFAULT_CAP) -> None:
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if n**depth > cap:
        raise ValueError(f"{n}^{depth} words exceed the cap of {cap}")


def words(n: int, depth: int) -> Iterator[Word]:
    return itertools.product(range(n), repeat=depth)


def word_index(w: Word, n: int) -> int:
    idx = 0
    for c in w:
        idx = idx * n + c
    return idx


def word_map(sys: IfsSystem, w: Iterable[int]) -> AffineMap:
    w = check_word(sys, w)
    out = AffineMap(np.eye(sys.dim), np.zeros(sys.dim))
    for c in w:
        out = out.compose(sys.maps[c])
    return out


def cell_anchor(sys: IfsSystem, w: Iterable[int]) -> np.ndarray:
    """Fixed point of psi_w, i.e. the image of the periodic word w w w ..."""
    w = check_word(sys, w)
    if not w:
        raise ValueError("cell_anchor needs a word of depth >= 1")
    return word_map(sys, w).fixpoint()


def word_linears(sys: IfsSystem, depth: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Linear parts of psi_w for all words of ``depth``, shape (n^depth, d, d)."""
    check_cap(sys.n, depth, cap)
    out = np.eye(sys.dim)[None]
    for _ in range(depth):
        out = np.einsum("wij,njk->wnik", out, sys.linears).reshape(-1, sys.dim, sys.dim)
    return out


def word_affines(sys: IfsSystem, depth: int, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Linear parts and translations of psi_w for all words of ``depth``."""
    check_cap(sys.n, depth, cap)
    d = sys.dim
    lin = np.eye(d)[None]
    trans = np.zeros((1, d))
    for _ in range(depth):
        # (psi_w o psi_j)(x) = L_w L_j x + L_w t_j + t_w
        new_trans = np.einsum("wij,nj->wni", lin, sys.translations) + trans[:, None, :]
        lin = np.einsum("wij,njk->wnik", lin, sys.linears).reshape(-1, d, d)
        trans = new_trans.reshape(-1, d)
    return lin, trans


def cell_anchors(sys: IfsSystem, depth: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Fixed points of psi_w for all words of ``depth``, shape (n^depth, d)."""
    if depth < 1:
        raise ValueError("cell anchors need depth >= 1")
    lin, trans = word_affines(sys, depth, cap)
    eye = np.eye(sys.dim)
    return np.linalg.solve(eye[None] - lin, trans[..., None])[..., 0]


# -- non-degeneracy -----------------------------------------------------------

def _unit_grid(dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        phi = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if dim == 3:
        # Fibonacci sphere
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    g = np.random.default_rng(0).standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def nd_constant(sys: IfsSystem, grid_count: int = 720) -> float:
    """Grid estimate of the non-degeneracy constant.

    Returns min over unit pairs (v, v0) of max_i |(L_i v, v0)|. A positive value
    certifies the condition on the grid; values within rounding of zero are
    reported as 0.
    """
    if grid_count < 16:
        raise ValueError("grid_count must be at least 16")
    units = _unit_grid(sys.dim, grid_count)
    # images[i, a, :] = L_i v_a
    images = np.einsum("njk,ak->naj", sys.linears, units)
    best = np.full((units.shape[0], units.shape[0]), -np.inf)
    for img in images:
        best = np.maximum(best, np.abs(img @ units.T))
    b = float(best.min())
    if b <= 64 * np.finfo(float).eps * sys.eta:
        return 0.0
    return b
