"""Numerically careful linear-algebra primitives for tuples of invertible matrices.

Singular values, spectral radii, eigenvalue moduli, compound (exterior-power)
matrices, and stabilized log-domain singular values of long matrix products.
Everything here is a pure function of its inputs; arrays are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateError, InputError
from .words import Word, as_symbols

# |det| floor (after row-max scaling) below which a matrix is rejected as singular.
DET_FLOOR = 1e-300


def _as_square(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    return arr


def _check_invertible(a: np.ndarray) -> None:
    # Row-max scaling keeps the floor meaningful for badly scaled inputs.
    row_max = np.max(np.abs(a), axis=1)
    if np.any(row_max == 0.0):
        raise InputError("matrix has a zero row; not invertible")
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0.0 or logdet - np.sum(np.log(row_max)) < math.log(DET_FLOOR):
        raise InputError("matrix is singular or below the invertibility floor")


@dataclass(frozen=True)
class MatrixTuple:
    """A tuple of N invertible d x d real matrices, the central input everywhere.

    ``mats`` has shape (N, d, d). Matrices are validated (finite, shared
    dimension, |det| above the floor after row-max scaling) and stored
    read-only, so instances are safe to share across threads.
    """

    mats: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.mats, dtype=float)
        if arr.ndim == 2:
            arr = arr[None, :, :]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise InputError(f"expected (N, d, d) matrices, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError("need at least one matrix of dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise InputError("matrix entries must be finite")
        for i in range(arr.shape[0]):
            try:
                _check_invertible(arr[i])
            except InputError as exc:
                raise InputError(f"matrix {i + 1}: {exc}") from None
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "mats", arr)

    @property
    def n_maps(self) -> int:
        return self.mats.shape[0]

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    def mat(self, symbol: int) -> np.ndarray:
        """Matrix for a 1-based symbol."""
        if not 1 <= symbol <= self.n_maps:
            raise InputError(f"symbol {symbol} out of range 1..{self.n_maps}")
        return self.mats[symbol - 1]

    def __iter__(self):
        return iter(self.mats)

    def exterior(self, k: int) -> "MatrixTuple":
        """The tuple of k-th compound matrices."""
        return MatrixTuple(np.stack([exterior_power(a, k) for a in self.mats]))


def singular_values(a) -> np.ndarray:
    """Singular values of a matrix in decreasing order.

    Computed from the full decomposition of the matrix itself (not of A^T A)
    for small-singular-value accuracy.
    """
    arr = _as_square(a)
    return np.linalg.svd(arr, compute_uv=False)


def spectral_radius(a) -> float:
    """Largest modulus among the eigenvalues."""
    arr = _as_square(a)
    return float(np.max(np.abs(np.linalg.eigvals(arr))))


def eigen_moduli(a) -> np.ndarray:
    """Eigenvalue moduli in decreasing order; complex pairs contribute twice."""
    arr = _as_square(a)
    return np.sort(np.abs(np.linalg.eigvals(arr)))[::-1]


def exterior_power(a, k: int) -> np.ndarray:
    """Matrix of the induced action on k-vectors (the k-th compound matrix).

    The basis of the k-vector space is {e_{i_1} ^ ... ^ e_{i_k}} with the
    index sets in lexicographic order; entry (I, J) is the minor of ``a`` with
    rows I and columns J.
    """
    arr = _as_square(a)
    d = arr.shape[0]
    if not 1 <= k <= d:
        raise InputError(f"exterior degree k={k} out of range 1..{d}")
    if k == 1:
        return arr.copy()
    subsets = list(combinations(range(d), k))
    m = len(subsets)
    out = np.empty((m, m))
    for bi, cols in enumerate(subsets):
        sub = arr[:, cols]
        for ai, rows in enumerate(subsets):
            out[ai, bi] = np.linalg.det(sub[rows, :])
    return out


def top_singular_value(a: np.ndarray) -> float:
    return float(np.linalg.svd(a, compute_uv=False)[0])


@dataclass(frozen=True)
class LogSVResult:
    """Log singular values of a represented matrix product.

    ``logsv[j] + logscale`` equals log alpha_{j+1} of the product; ``logsv``
    is non-increasing and ``logscale`` is the exponent accumulated by the
    per-step renormalization.
    """

    logsv: np.ndarray
    logscale: float

    @property
    def log_alphas(self) -> np.ndarray:
        """Absolute log singular values, decreasing."""
        return self.logsv + self.logscale

    @property
    def log_abs_det(self) -> float:
        return float(np.sum(self.log_alphas))


def word_product(t: MatrixTuple, word) -> tuple[np.ndarray, float]:
    """Renormalized product matrix of a word.

    Returns (m, logscale) with the true product equal to exp(logscale) * m and
    the top singular value of m equal to 1. The word (w_1, ..., w_n) maps to
    the product with w_n leftmost, so each appended symbol multiplies on the
    left; per-step renormalization by the running top singular value keeps
    every intermediate representable for word lengths well beyond 10^4.
    """
    syms = as_symbols(word, t.n_maps)
    m = np.eye(t.dim)
    logscale = 0.0
    for s in syms:
        m = t.mats[s - 1] @ m
        nu = top_singular_value(m)
        if nu == 0.0 or not math.isfinite(nu):
            raise DegenerateError("product collapsed to zero or overflowed")
        m = m / nu
        logscale += math.log(nu)
    return m, logscale


def word_product_logsv(t: MatrixTuple, word) -> LogSVResult:
    """All log singular values of the matrix product of a word, stably.

    The top singular value of the k-th compound product equals the product of
    the k largest singular values, so running one renormalized product per
    exterior degree yields every log alpha_j as a difference of accumulated
    exponents. Each chain only ever needs its own top singular value, which
    stays exactly 1 after renormalization; this is what makes words of length
    10^4 and beyond safe even when the singular values spread over thousands
    of orders of magnitude.
    """
    syms = as_symbols(word, t.n_maps)
    d = t.dim
    ext = [[exterior_power(a, k) for k in range(1, d + 1)] for a in t.mats]
    dims = [ext[0][k - 1].shape[0] for k in range(1, d + 1)]
    chains = [np.eye(dim) for dim in dims]
    acc = [0.0] * d
    for s in syms:
        gen = ext[s - 1]
        for k in range(d):
            m = gen[k] @ chains[k]
            nu = top_singular_value(m)
            if nu == 0.0 or not math.isfinite(nu):
                raise DegenerateError("exterior product chain degenerated")
            chains[k] = m / nu
            acc[k] += math.log(nu)
    log_alphas = np.empty(d)
    prev = 0.0
    for k in range(d):
        log_alphas[k] = acc[k] - prev
        prev = acc[k]
    log_alphas = np.sort(log_alphas)[::-1]
    logscale = acc[0]
    return LogSVResult(logsv=log_alphas - logscale, logscale=logscale)


def rotation(theta: float) -> np.ndarray:
    """2x2 rotation matrix; a convenience used across the test corpus and CLI docs."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random orthogonal matrix via QR with sign-fixed diagonal."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))
