import numpy as np
import pytest

from affpress import MatrixTuple, rotation


def random_invertible(rng, d, scale=1.0):
    """Gaussian matrix resampled until comfortably invertible."""
    while True:
        a = rng.standard_normal((d, d)) * scale
        if abs(np.linalg.det(a)) > 1e-6 * scale**d:
            return a


def random_tuple(rng, d, n, scale=1.0):
    return MatrixTuple(np.stack([random_invertible(rng, d, scale) for _ in range(n)]))


def random_word(rng, n_symbols, max_len, min_len=1):
    length = int(rng.integers(min_len, max_len + 1))
    return tuple(int(x) + 1 for x in rng.integers(0, n_symbols, length))


@pytest.fixture(scope="session")
def plane_corpus():
    """Irreducible, strictly contractive 2-D tuples reused across suites."""
    return [
        MatrixTuple(
            np.stack([0.7 * rotation(0.5), rotation(2.0) @ np.diag([0.5, 0.3])])
        ),
        MatrixTuple(np.stack([rotation(0.9) @ np.diag([0.8, 0.2]), np.diag([0.3, 0.7])])),
        MatrixTuple(
            np.stack(
                [rotation(1.3) @ np.diag([0.9, 0.15]), rotation(0.4) @ np.diag([0.25, 0.6])]
            )
        ),
    ]


@pytest.fixture(scope="session")
def mixed_corpus(plane_corpus):
    """Corpus with reducible/rotation/diagonal members for structural sweeps."""
    extra = [
        MatrixTuple(rotation(np.pi / 2)[None]),
        MatrixTuple(np.stack([np.diag([0.5, 0.3]), np.diag([0.2, 0.6])])),
        MatrixTuple(np.stack([rotation(1.0), np.diag([2.0, 1.0])])),
    ]
    return list(plane_corpus) + extra
