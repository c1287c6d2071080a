"""The singular value function, submultiplicative potentials, and the duality transform.

A potential assigns a positive weight to every word; all evaluation here is in
the log domain end-to-end because products of contractions underflow long
before interesting word lengths are reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateError, InputError
from .linalg import (
    MatrixTuple,
    exterior_power,
    singular_values,
    spectral_radius,
    top_singular_value,
    word_product,
    word_product_logsv,
)
from .words import as_symbols, symbol_counts

# ---------------------------------------------------------------------------
# Singular value function
# ---------------------------------------------------------------------------


def log_svf_from_log_alphas(log_alphas: np.ndarray, s: float) -> float:
    """log phi^s from the decreasing log singular values of one matrix."""
    if s < 0:
        raise InputError(f"svf exponent s={s} must be >= 0")
    if s == 0.0:
        return 0.0
    la = np.asarray(log_alphas, dtype=float)
    d = la.shape[0]
    if s >= d:
        return (s / d) * float(np.sum(la))
    k = math.floor(s)
    frac = s - k
    val = float(np.sum(la[:k]))
    if frac > 0.0:
        val += frac * float(la[k])
    return val


def log_svf_batch(log_alphas: np.ndarray, s: float) -> np.ndarray:
    """Vectorized log phi^s over a (W, d) stack of decreasing log singular values."""
    la = np.asarray(log_alphas, dtype=float)
    d = la.shape[1]
    if s < 0:
        raise InputError(f"svf exponent s={s} must be >= 0")
    if s == 0.0:
        return np.zeros(la.shape[0])
    if s >= d:
        return (s / d) * np.sum(la, axis=1)
    k = math.floor(s)
    frac = s - k
    val = np.sum(la[:, :k], axis=1)
    if frac > 0.0:
        val = val + frac * la[:, k]
    return val


def svf(a, s: float) -> float:
    """The singular value function phi^s of a single matrix.

    phi^s(A) = alpha_1 ... alpha_floor(s) * alpha_ceil(s)^(s - floor(s)) for
    0 <= s <= d and |det A|^(s/d) for s >= d; s = 0 gives the empty product 1.
    Inputs whose value would vanish (rank below ceil(s)) are rejected rather
    than assigned a conventional zero.
    """
    alphas = singular_values(a)
    d = alphas.shape[0]
    if s < 0:
        raise InputError(f"svf exponent s={s} must be >= 0")
    if s == 0.0:
        return 1.0
    needed = d if s >= d else math.ceil(s)
    if alphas[needed - 1] <= 0.0:
        raise DegenerateError(
            f"phi^{s} undefined: singular value {needed} of the input vanishes"
        )
    with np.errstate(divide="ignore"):
        return float(math.exp(log_svf_from_log_alphas(np.log(alphas), s)))


def svf_via_exterior(a, s: float) -> float:
    """phi^s evaluated through compound-matrix norms; an independent cross-check path.

    Uses ||A^(^k)|| = alpha_1...alpha_k: the value equals
    ||A^(^floor(s))||^(1+floor(s)-s) * ||A^(^ceil(s))||^(s-floor(s)).
    """
    arr = np.asarray(a, dtype=float)
    d = arr.shape[0]
    if not 0 < s <= d:
        raise InputError(f"svf_via_exterior needs 0 < s <= d, got s={s}")
    k0 = math.floor(s)
    k1 = math.ceil(s)
    n0 = 1.0 if k0 == 0 else top_singular_value(exterior_power(arr, k0))
    n1 = top_singular_value(exterior_power(arr, k1))
    if n1 <= 0.0 or n0 <= 0.0:
        raise DegenerateError("compound-matrix norm vanished")
    return float(n0 ** (1 + k0 - s) * n1 ** (s - k0))


# ---------------------------------------------------------------------------
# Potential specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SVF:
    """Phi(w) = phi^s(A_w)."""

    s: float

    def __post_init__(self):
        if not (self.s >= 0):
            raise InputError(f"SVF exponent must be >= 0, got {self.s}")


@dataclass(frozen=True)
class NormPower:
    """Phi(w) = ||A_w^(^k)||^t."""

    t: float
    k: int

    def __post_init__(self):
        if not (self.t > 0):
            raise InputError(f"NormPower exponent must be > 0, got {self.t}")
        if self.k < 1:
            raise InputError(f"NormPower degree must be >= 1, got {self.k}")


@dataclass(frozen=True)
class WeightedProduct:
    """Phi(w) = prod_i ||A_w^(^k_i)||^(e_i), all exponents strictly positive."""

    factors: tuple[tuple[int, float], ...]

    def __post_init__(self):
        factors = tuple((int(k), float(e)) for k, e in self.factors)
        if len(factors) == 0:
            raise InputError("WeightedProduct needs at least one factor")
        for k, e in factors:
            if k < 1:
                raise InputError(f"WeightedProduct degree must be >= 1, got {k}")
            if not (e > 0):
                raise InputError(f"WeightedProduct exponent must be > 0, got {e}")
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class ScaledSVF:
    """Phi(w) = (prod_j weights[w_j]) * phi^s(A_w).

    Represents symbol-weighted potentials (scalar-block weights) without ever
    constructing rescaled matrices.
    """

    s: float
    weights: tuple[float, ...]

    def __post_init__(self):
        if not (self.s >= 0):
            raise InputError(f"ScaledSVF exponent must be >= 0, got {self.s}")
        weights = tuple(float(w) for w in self.weights)
        if len(weights) == 0 or any(not (w > 0) for w in weights):
            raise InputError("ScaledSVF weights must be positive")
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class MaxOf:
    """Phi(w) = max over member potentials; non-empty."""

    members: tuple["PotentialSpec", ...]

    def __post_init__(self):
        if len(self.members) == 0:
            raise InputError("MaxOf needs at least one member")
        object.__setattr__(self, "members", tuple(self.members))


PotentialSpec = Union[SVF, NormPower, WeightedProduct, ScaledSVF, MaxOf]


def validate_spec(spec: PotentialSpec, t: MatrixTuple) -> None:
    """Check a potential against the tuple it will be evaluated on."""
    d, n = t.dim, t.n_maps
    if isinstance(spec, SVF):
        return
    if isinstance(spec, NormPower):
        if spec.k > d:
            raise InputError(f"NormPower degree {spec.k} exceeds dimension {d}")
        return
    if isinstance(spec, WeightedProduct):
        for k, _ in spec.factors:
            if k > d:
                raise InputError(f"WeightedProduct degree {k} exceeds dimension {d}")
        return
    if isinstance(spec, ScaledSVF):
        if len(spec.weights) != n:
            raise InputError(
                f"ScaledSVF has {len(spec.weights)} weights for {n} matrices"
            )
        return
    if isinstance(spec, MaxOf):
        for m in spec.members:
            validate_spec(m, t)
        return
    raise InputError(f"unknown potential spec {spec!r}")


def spec_needs_counts(spec: PotentialSpec) -> bool:
    if isinstance(spec, ScaledSVF):
        return True
    if isinstance(spec, MaxOf):
        return any(spec_needs_counts(m) for m in spec.members)
    return False


def log_potential_from_log_alphas(
    spec: PotentialSpec,
    log_alphas: np.ndarray,
    counts: Sequence[int] | None = None,
) -> float:
    """log Phi(w) from the log singular values of A_w (plus symbol counts)."""
    la = np.asarray(log_alphas, dtype=float)
    if isinstance(spec, SVF):
        return log_svf_from_log_alphas(la, spec.s)
    if isinstance(spec, NormPower):
        return spec.t * float(np.sum(la[: spec.k]))
    if isinstance(spec, WeightedProduct):
        return float(sum(e * np.sum(la[:k]) for k, e in spec.factors))
    if isinstance(spec, ScaledSVF):
        if counts is None:
            raise InputError("ScaledSVF evaluation needs symbol counts")
        logw = float(np.dot(np.asarray(counts, dtype=float), np.log(spec.weights)))
        return logw + log_svf_from_log_alphas(la, spec.s)
    if isinstance(spec, MaxOf):
        return max(
            log_potential_from_log_alphas(m, la, counts) for m in spec.members
        )
    raise InputError(f"unknown potential spec {spec!r}")


def log_potential_batch(
    spec: PotentialSpec,
    log_alphas: np.ndarray,
    counts: np.ndarray | None = None,
) -> np.ndarray:
    """Vectorized log Phi over a (W, d) stack of log singular values."""
    la = np.asarray(log_alphas, dtype=float)
    if isinstance(spec, SVF):
        return log_svf_batch(la, spec.s)
    if isinstance(spec, NormPower):
        return spec.t * np.sum(la[:, : spec.k], axis=1)
    if isinstance(spec, WeightedProduct):
        out = np.zeros(la.shape[0])
        for k, e in spec.factors:
            out += e * np.sum(la[:, :k], axis=1)
        return out
    if isinstance(spec, ScaledSVF):
        if counts is None:
            raise InputError("ScaledSVF evaluation needs symbol counts")
        logw = counts @ np.log(spec.weights)
        return logw + log_svf_batch(la, spec.s)
    if isinstance(spec, MaxOf):
        vals = [log_potential_batch(m, la, counts) for m in spec.members]
        return np.maximum.reduce(vals)
    raise InputError(f"unknown potential spec {spec!r}")


def eval_potential(spec: PotentialSpec, t: MatrixTuple, word) -> float:
    """log Phi(word), never materializing an underflowing product."""
    validate_spec(spec, t)
    syms = as_symbols(word, t.n_maps)
    res = word_product_logsv(t, syms)
    counts = symbol_counts(syms, t.n_maps) if spec_needs_counts(spec) else None
    return log_potential_from_log_alphas(spec, res.log_alphas, counts)


# ---------------------------------------------------------------------------
# Spectral-radius form of a potential (asymptotic per-orbit average)
# ---------------------------------------------------------------------------


def _needed_degrees(spec: PotentialSpec, d: int) -> set[int]:
    if isinstance(spec, (SVF, ScaledSVF)):
        s = spec.s
        if s == 0:
            return set()
        if s >= d:
            return {d}
        ks = {math.ceil(s)}
        if math.floor(s) >= 1:
            ks.add(math.floor(s))
        return ks
    if isinstance(spec, NormPower):
        return {spec.k}
    if isinstance(spec, WeightedProduct):
        return {k for k, _ in spec.factors}
    if isinstance(spec, MaxOf):
        out: set[int] = set()
        for m in spec.members:
            out |= _needed_degrees(m, d)
        return out
    raise InputError(f"unknown potential spec {spec!r}")


def _log_rho_from_degrees(
    spec: PotentialSpec,
    log_rho: dict[int, float],
    counts: Sequence[int] | None,
    d: int,
) -> float:
    def lr(k: int) -> float:
        return 0.0 if k == 0 else log_rho[k]

    if isinstance(spec, SVF) or isinstance(spec, ScaledSVF):
        s = spec.s
        if s == 0:
            base = 0.0
        elif s >= d:
            base = (s / d) * lr(d)
        else:
            k = math.floor(s)
            base = (1 + k - s) * lr(k) + (s - k) * lr(math.ceil(s))
        if isinstance(spec, ScaledSVF):
            base += float(
                np.dot(np.asarray(counts, dtype=float), np.log(spec.weights))
            )
        return base
    if isinstance(spec, NormPower):
        return spec.t * lr(spec.k)
    if isinstance(spec, WeightedProduct):
        return float(sum(e * lr(k) for k, e in spec.factors))
    if isinstance(spec, MaxOf):
        return max(_log_rho_from_degrees(m, log_rho, counts, d) for m in spec.members)
    raise InputError(f"unknown potential spec {spec!r}")


def log_rho_form(spec: PotentialSpec, t: MatrixTuple, word) -> float:
    """log of the spectral-radius form of the potential on one word.

    Every operator norm in the potential is replaced by the spectral radius of
    the same compound product. Along repetitions w^m the potential grows at
    exactly this rate, so (1/|w|) times this value is the asymptotic average
    of the potential for the periodic measure of the word.
    """
    validate_spec(spec, t)
    syms = as_symbols(word, t.n_maps)
    d = t.dim
    log_rho: dict[int, float] = {}
    for k in sorted(_needed_degrees(spec, d)):
        ext = t.exterior(k)
        m, logscale = word_product(ext, syms)
        rho = spectral_radius(m)
        if rho <= 0.0:
            raise DegenerateError("spectral radius of a compound product vanished")
        log_rho[k] = logscale + math.log(rho)
    counts = symbol_counts(syms, t.n_maps) if spec_needs_counts(spec) else None
    return _log_rho_from_degrees(spec, log_rho, counts, d)


def log_multiplicative_minorant_per_symbol(
    spec: PotentialSpec, t: MatrixTuple
) -> np.ndarray | None:
    """Per-symbol log of an exactly multiplicative minorant of the potential.

    Since the potential dominates the interpolated |det| power (top singular
    values dominate the geometric mean), each variant admits a minorant of the
    form prod_j c[w_j] with log c additive along words. Returns the length-N
    vector log c, or None for MaxOf (handled member-wise by callers).
    """
    validate_spec(spec, t)
    d = t.dim
    logdets = np.array([np.linalg.slogdet(a)[1] for a in t.mats])
    # phi^s(A) >= |det A|^(s/d) for s <= d (majorization of sorted log singular
    # values) and equals it for s >= d, so the exponent is s/d throughout.
    if isinstance(spec, SVF):
        return spec.s / d * logdets
    if isinstance(spec, ScaledSVF):
        return spec.s / d * logdets + np.log(spec.weights)
    if isinstance(spec, NormPower):
        return spec.t * spec.k / d * logdets
    if isinstance(spec, WeightedProduct):
        c = sum(e * k for k, e in spec.factors) / d
        return c * logdets
    if isinstance(spec, MaxOf):
        return None
    raise InputError(f"unknown potential spec {spec!r}")


# ---------------------------------------------------------------------------
# Duality transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualityTransformResult:
    """The transformed tuple A'_i = |det A_i|^(1/(d-s)) (A_i^-1)^T and its exponent d-s.

    phi^(d-s) of any word product of the transformed tuple equals phi^s of the
    same word product of the original, so equilibrium problems at s and d-s
    are interchangeable.
    """

    tuple: MatrixTuple
    s_dual: float


def dualize(t: MatrixTuple, s: float) -> DualityTransformResult:
    """Inverse-transpose duality at exponent s, valid for 0 < s < d."""
    d = t.dim
    if not 0.0 < s < d:
        raise InputError(f"dualize needs 0 < s < d={d}, got s={s}")
    out = np.empty_like(t.mats)
    for i, a in enumerate(t.mats):
        sign, logdet = np.linalg.slogdet(a)
        scale = math.exp(logdet / (d - s))
        out[i] = scale * np.linalg.inv(a).T
    return DualityTransformResult(tuple=MatrixTuple(out), s_dual=d - s)
