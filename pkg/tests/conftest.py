import numpy as np
import pytest

from matgibbs import ifs


def random_system(rng, dim, n, lo=0.3, hi=0.75):
    """Random affine IFS whose linear parts have operator norm in [lo, hi]."""
    raw = []
    for _ in range(n):
        lin = rng.standard_normal((dim, dim))
        lin *= rng.uniform(lo, hi) / np.linalg.norm(lin, 2)
        raw.append((lin, rng.uniform(-1, 1, dim)))
    return ifs.build_system(raw, name="random")


def random_nd_systems(count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        dim = int(rng.integers(1, 4))
        n = int(rng.integers(max(2, dim), dim + 3))
        sys = random_system(rng, dim, n)
        if ifs.nd_constant(sys, 64) > 1e-3:
            out.append(sys)
    return out


@pytest.fixture(scope="session")
def gasket():
    return ifs.preset_harmonic_gasket()


@pytest.fixture(scope="session")
def dyadic():
    return ifs.preset_dyadic()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
