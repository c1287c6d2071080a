"""Subadditive pressure over the full shift: brackets, affinity dimension,
Bernoulli measures, Lyapunov spectra, level-n Gibbs approximants, and
chaos-game sampling of self-affine measures.

Enumeration contract: the word space of a level is partitioned into
fixed-size prefix blocks which are processed and reduced in block index
order, so every reported number is bit-stable across runs and thread
counts for a given (input, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import BudgetError, DegenerateError, InputError
from .linalg import MatrixTuple, spectral_radius, word_product, word_product_logsv
from .potentials import (
    PotentialSpec,
    MaxOf,
    SVF,
    log_multiplicative_minorant_per_symbol,
    log_potential_batch,
    log_potential_from_log_alphas,
    log_rho_form,
    log_svf_batch,
    spec_needs_counts,
    validate_spec,
)
from .words import (
    count_words,
    symbol_counts,
    word_from_index,
    words_up_to_length,
)

DEFAULT_BUDGET = 1 << 24
_BLOCK_WORDS = 1 << 15


def logsumexp(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return -math.inf
    m = float(np.max(x))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(x - m))))


def _check_budget(n_maps: int, depth: int, budget: int) -> int:
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    total = count_words(n_maps, depth)
    if total > budget:
        raise BudgetError(
            f"enumerating {n_maps}^{depth} = {total} words exceeds the budget {budget}"
        )
    return total


def iter_product_blocks(
    t: MatrixTuple,
    depth: int,
    *,
    budget: int = DEFAULT_BUDGET,
    block_words: int = _BLOCK_WORDS,
    need_counts: bool = False,
) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray | None]]:
    """All word products of one level, in lexicographic blocks.

    Yields (start_index, mats, logscale, counts) where ``mats[i]`` times
    ``exp(logscale[i])`` is the product for the word of index ``start+i``.
    Blocks share a word prefix; matrices are renormalized per level by their
    max-abs entry so no intermediate leaves double range within the budget.
    """
    n = t.n_maps
    total = _check_budget(n, depth, budget)
    suffix_len = 0
    while suffix_len < depth and n ** (suffix_len + 1) <= block_words:
        suffix_len += 1
    if suffix_len == 0:
        suffix_len = min(1, depth)
    prefix_len = depth - suffix_len
    n_blocks = count_words(n, prefix_len) if prefix_len > 0 else 1
    block_size = total // n_blocks
    for b in range(n_blocks):
        if prefix_len > 0:
            prefix = word_from_index(b, n, prefix_len)
            m0, ls0 = word_product(t, prefix)
            c0 = symbol_counts(prefix, n) if need_counts else None
        else:
            m0, ls0 = np.eye(t.dim), 0.0
            c0 = [0] * n if need_counts else None
        mats = m0[None, :, :]
        ls = np.array([ls0])
        counts = (
            np.asarray(c0, dtype=float)[None, :] if need_counts else None
        )
        for _ in range(suffix_len):
            k = mats.shape[0]
            mats = np.matmul(t.mats[None, :, :, :], mats[:, None, :, :]).reshape(
                k * n, t.dim, t.dim
            )
            ls = np.repeat(ls, n)
            scale = np.max(np.abs(mats), axis=(1, 2))
            if np.any(scale == 0.0) or not np.all(np.isfinite(scale)):
                raise DegenerateError("word product degenerated during enumeration")
            mats = mats / scale[:, None, None]
            ls = ls + np.log(scale)
            if need_counts:
                counts = np.repeat(counts, n, axis=0) + np.tile(np.eye(n), (k, 1))
        yield b * block_size, mats, ls, counts


def _block_log_alphas(mats: np.ndarray, ls: np.ndarray) -> np.ndarray:
    """(B, d) decreasing log singular values from renormalized products."""
    svals = np.linalg.svd(mats, compute_uv=False)
    with np.errstate(divide="ignore"):
        return np.log(svals) + ls[:, None]


def level_log_potentials(
    t: MatrixTuple,
    spec: PotentialSpec,
    depth: int,
    *,
    budget: int = DEFAULT_BUDGET,
) -> np.ndarray:
    """log Phi over all words of one level, lexicographic order."""
    validate_spec(spec, t)
    need_counts = spec_needs_counts(spec)
    total = _check_budget(t.n_maps, depth, budget)
    out = np.empty(total)
    for start, mats, ls, counts in iter_product_blocks(
        t, depth, budget=budget, need_counts=need_counts
    ):
        la = _block_log_alphas(mats, ls)
        vals = log_potential_batch(spec, la, counts)
        out[start : start + vals.shape[0]] = vals
    return out


# ---------------------------------------------------------------------------
# Pressure bracket
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PressureBracket:
    """Certified interval for the pressure of a potential at one depth.

    ``upper`` is the level-n normalized log partition sum, non-increasing in
    n by submultiplicativity; ``lower`` is the better of the periodic-orbit
    spectral-radius bound (witnessed by ``lower_witness``) and the
    entropy-bearing multiplicative-minorant bound, both valid at every depth.
    """

    spec: PotentialSpec
    depth: int
    lower: float
    upper: float
    lower_witness: tuple[int, ...] | None
    lower_method: str

    def __post_init__(self):
        if self.lower > self.upper:
            raise InputError("pressure bracket must satisfy lower <= upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def pressure_upper(
    t: MatrixTuple,
    spec: PotentialSpec,
    depth: int,
    *,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """(1/n) log sum of the potential over all words of length n."""
    validate_spec(spec, t)
    need_counts = spec_needs_counts(spec)
    partials = []
    for _, mats, ls, counts in iter_product_blocks(
        t, depth, budget=budget, need_counts=need_counts
    ):
        la = _block_log_alphas(mats, ls)
        partials.append(logsumexp(log_potential_batch(spec, la, counts)))
    return logsumexp(partials) / depth


def _periodic_candidates(
    n_maps: int, per_len: int, per_samples: int, seed: int
) -> list[tuple[int, ...]]:
    cands = list(words_up_to_length(n_maps, per_len))
    if per_samples > 0:
        rng = np.random.Generator(np.random.Philox(key=seed))
        for _ in range(per_samples):
            length = int(rng.integers(per_len + 1, 2 * per_len + 1))
            cands.append(tuple(int(s) + 1 for s in rng.integers(0, n_maps, length)))
    return cands


def pressure_lower(
    t: MatrixTuple,
    spec: PotentialSpec,
    *,
    per_len: int = 6,
    per_samples: int = 32,
    seed: int = 0,
) -> tuple[float, tuple[int, ...] | None, str]:
    """Best available rigorous lower bound for the pressure.

    Periodic words bound the pressure through the zero-entropy measures they
    carry: the per-orbit asymptotic average of the potential is exactly the
    spectral-radius form divided by the word length. Independently, any
    exactly multiplicative minorant m <= Phi gives the entropy-bearing bound
    log sum_i m(A_i) through block-Bernoulli measures. The max of the two is
    returned together with the witnessing periodic word and which bound won.
    """
    validate_spec(spec, t)
    if per_len > 0 and count_words(t.n_maps, per_len) > 200_000:
        raise BudgetError(
            f"periodic candidate enumeration {t.n_maps}^{per_len} too large"
        )
    best = -math.inf
    witness: tuple[int, ...] | None = None
    for w in _periodic_candidates(t.n_maps, per_len, per_samples, seed):
        val = log_rho_form(spec, t, w) / len(w)
        if val > best:
            best = val
            witness = w
    specs = spec.members if isinstance(spec, MaxOf) else (spec,)
    det_bound = -math.inf
    for member in specs:
        c = log_multiplicative_minorant_per_symbol(member, t)
        if c is not None:
            det_bound = max(det_bound, logsumexp(c))
    if det_bound > best:
        return det_bound, witness, "determinant-entropy"
    return best, witness, "periodic-orbit"


def pressure_bracket(
    t: MatrixTuple,
    spec: PotentialSpec,
    depth: int,
    *,
    budget: int = DEFAULT_BUDGET,
    per_len: int = 6,
    per_samples: int = 32,
    seed: int = 0,
) -> PressureBracket:
    """Two-sided pressure estimate at one truncation depth."""
    upper = pressure_upper(t, spec, depth, budget=budget)
    lower, witness, method = pressure_lower(
        t, spec, per_len=per_len, per_samples=per_samples, seed=seed
    )
    lower = min(lower, upper)  # guard roundoff when the bracket is exact
    return PressureBracket(
        spec=spec,
        depth=depth,
        lower=lower,
        upper=upper,
        lower_witness=witness,
        lower_method=method,
    )


# ---------------------------------------------------------------------------
# Affinity dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffinityInterval:
    """Bisection output: [s_lo, s_hi] contains the affinity dimension."""

    s_lo: float
    s_hi: float
    depth: int
    tol: float

    @property
    def width(self) -> float:
        return self.s_hi - self.s_lo


def _bisect_decreasing_zero(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float]:
    """Bracket [lo, hi] of the zero of a decreasing function, width <= tol.

    Throughout, f(lo) > 0 >= f(hi), so the true zero stays inside; callers
    pick the outward endpoint that preserves their one-sided guarantee.
    """
    if f(lo) <= 0.0:
        return lo, lo
    if f(hi) > 0.0:
        return hi, hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


_MATERIALIZE_CAP = 1 << 22


def affinity_dimension(
    t: MatrixTuple,
    depth: int,
    tol: float,
    *,
    budget: int = DEFAULT_BUDGET,
    per_len: int = 6,
    per_samples: int = 32,
    seed: int = 0,
) -> AffinityInterval:
    """Interval around the zero crossing of s -> P(phi^s) for contractive tuples.

    ``s_hi`` is the zero of the upper pressure estimate and ``s_lo`` the zero
    of the lower estimate; both are clamped to [0, d]. Strict contractivity
    makes the pressure strictly decreasing in s, so bisection is sound.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    norms = np.linalg.svd(t.mats, compute_uv=False)[:, 0]
    if np.any(norms >= 1.0):
        raise InputError(
            "affinity dimension needs strict contractions (every ||A_i|| < 1)"
        )
    d = t.dim
    total = _check_budget(t.n_maps, depth, budget)

    if total * d <= _MATERIALIZE_CAP:
        blocks = [
            _block_log_alphas(mats, ls)
            for _, mats, ls, _ in iter_product_blocks(t, depth, budget=budget)
        ]
        la = np.concatenate(blocks, axis=0)

        def upper_at(s: float) -> float:
            return logsumexp(log_svf_batch(la, s)) / depth

    else:

        def upper_at(s: float) -> float:
            return pressure_upper(t, SVF(s), depth, budget=budget)

    # Periodic spectral-radius data per candidate word is s-independent.
    candidates = _periodic_candidates(t.n_maps, per_len, per_samples, seed)
    rho_table = []
    for w in candidates:
        logs = {}
        for k in range(1, d + 1):
            ext = t.exterior(k)
            m, lsc = word_product(ext, w)
            rho = spectral_radius(m)
            if rho <= 0.0:
                logs = None
                break
            logs[k] = lsc + math.log(rho)
        if logs is not None:
            rho_table.append((len(w), logs))
    logdets = np.array([np.linalg.slogdet(a)[1] for a in t.mats])

    def lower_at(s: float) -> float:
        if s == 0.0:
            per = 0.0
        else:
            per = -math.inf
            k0 = math.floor(s)
            k1 = math.ceil(s)
            for length, logs in rho_table:
                if s >= d:
                    val = (s / d) * logs[d]
                else:
                    val = (s - k0) * logs[k1]
                    if k0 >= 1:
                        val += (1 + k0 - s) * logs[k0]
                per = max(per, val / length)
        det_bound = logsumexp((s / d) * logdets)
        return max(per, det_bound)

    # Outward rounding keeps the guarantee s_lo <= dimaff <= s_hi: the upper
    # zero is reported from the side where the upper estimate is <= 0, the
    # lower zero from the side where the lower estimate is still > 0.
    _, s_hi = _bisect_decreasing_zero(upper_at, 0.0, float(d), tol / 2)
    s_lo, _ = _bisect_decreasing_zero(lower_at, 0.0, float(d), tol / 2)
    s_lo = min(max(s_lo, 0.0), float(d))
    s_hi = min(max(s_hi, 0.0), float(d))
    if s_lo > s_hi:
        s_lo = s_hi
    return AffinityInterval(s_lo=s_lo, s_hi=s_hi, depth=depth, tol=tol)


# ---------------------------------------------------------------------------
# Bernoulli measures and Lyapunov spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BernoulliMeasure:
    """An i.i.d. product measure on the symbol space, given by its weight vector."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.shape[0] < 1:
            raise InputError("probability vector must be one-dimensional")
        if np.any(p <= 0.0):
            raise InputError("probability vector entries must be positive")
        if abs(float(np.sum(p)) - 1.0) > 1e-12:
            raise InputError("probability vector must sum to 1 within 1e-12")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def entropy(self) -> float:
        """Shannon entropy in nats per step."""
        return -float(np.sum(self.p * np.log(self.p)))


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Estimated Lyapunov exponents, non-increasing, with per-exponent errors."""

    exponents: np.ndarray
    stderr: np.ndarray
    method: str
    horizon: int
    reps: int
    seed: int | None = None


def _is_diagonal_tuple(t: MatrixTuple) -> bool:
    for a in t.mats:
        off = a - np.diag(np.diag(a))
        if np.max(np.abs(off)) > 1e-14 * max(1.0, np.max(np.abs(a))):
            return False
    return True


def _mc_log_alpha_paths(
    t: MatrixTuple, symbols: np.ndarray, horizon: int
) -> np.ndarray:
    """Per-replica log singular values of the sampled products, via one
    renormalized product chain per exterior degree; shape (reps, d)."""
    d = t.dim
    reps = symbols.shape[0]
    acc_all = np.zeros((reps, d))
    for k in range(1, d + 1):
        gens = t.exterior(k).mats
        dim_k = gens.shape[1]
        m = np.broadcast_to(np.eye(dim_k), (reps, dim_k, dim_k)).copy()
        acc = np.zeros(reps)
        for step in range(horizon):
            g = gens[symbols[:, step]]
            m = np.matmul(g, m)
            nu = np.linalg.svd(m, compute_uv=False)[:, 0]
            if np.any(nu == 0.0) or not np.all(np.isfinite(nu)):
                raise DegenerateError("Monte-Carlo product chain degenerated")
            m = m / nu[:, None, None]
            acc += np.log(nu)
        acc_all[:, k - 1] = acc
    la = np.empty((reps, d))
    la[:, 0] = acc_all[:, 0]
    la[:, 1:] = np.diff(acc_all, axis=1)
    return -np.sort(-la, axis=1)


def lyapunov_spectrum(
    t: MatrixTuple,
    mu: BernoulliMeasure,
    horizon: int,
    reps: int,
    seed: int = 0,
    *,
    method: str = "auto",
) -> LyapunovSpectrum:
    """Lyapunov exponents of the tuple under a Bernoulli measure.

    Simultaneously diagonal tuples use the exact per-coordinate formula
    sum_i p_i log|diag_j(A_i)| (sorted); otherwise i.i.d. symbol paths are
    sampled with one counter-based stream per replica (Philox keyed by
    seed XOR replica index) and the normalized log singular values at the
    horizon are averaged across replicas.
    """
    if mu.p.shape[0] != t.n_maps:
        raise InputError("Bernoulli vector length must match the number of maps")
    if horizon < 1 or reps < 1:
        raise InputError("horizon and reps must be >= 1")
    if method not in ("auto", "exact-diagonal", "monte-carlo"):
        raise InputError(f"unknown method {method!r}")
    if method != "monte-carlo" and _is_diagonal_tuple(t):
        diags = np.stack([np.diag(a) for a in t.mats])
        exps = mu.p @ np.log(np.abs(diags))
        exps = np.sort(exps)[::-1]
        return LyapunovSpectrum(
            exponents=exps,
            stderr=np.zeros_like(exps),
            method="exact-diagonal",
            horizon=horizon,
            reps=reps,
            seed=seed,
        )
    if method == "exact-diagonal":
        raise InputError("exact-diagonal method requires a simultaneously diagonal tuple")
    symbols = np.empty((reps, horizon), dtype=np.intp)
    for r in range(reps):
        rng = np.random.Generator(np.random.Philox(key=seed ^ r))
        symbols[r] = rng.choice(t.n_maps, size=horizon, p=mu.p)
    la = _mc_log_alpha_paths(t, symbols, horizon) / horizon
    exps = la.mean(axis=0)
    if reps > 1:
        err = la.std(axis=0, ddof=1) / math.sqrt(reps)
    else:
        err = np.zeros_like(exps)
    return LyapunovSpectrum(
        exponents=exps,
        stderr=err,
        method="monte-carlo",
        horizon=horizon,
        reps=reps,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Level-n Gibbs approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GibbsApprox:
    """Level-n cylinder weights proportional to the potential.

    ``log_weights`` is normalized (log-sum-exp zero) over all words of the
    level in lexicographic order. The entropy estimate is the difference
    H_n - H_(n-1) of level Shannon entropies, which converges faster than
    H_n / n for Gibbs-like weights; the pressure defect reports how far
    entropy + asymptotic average sits from the level upper pressure and is a
    diagnostic, never an assertion.
    """

    depth: int
    log_weights: np.ndarray
    entropy_estimate: float
    lyapunov_estimate: float
    pressure_defect: float
    upper_pressure: float
    marginal_defect: float


def _level_entropy_and_mean(logphi: np.ndarray) -> tuple[float, float, float]:
    """(log Z, Shannon entropy of normalized weights, weighted mean of logphi)."""
    logz = logsumexp(logphi)
    logw = logphi - logz
    w = np.exp(logw)
    ent = -float(np.sum(np.where(w > 0.0, w * logw, 0.0)))
    mean = float(np.sum(w * logphi))
    return logz, ent, mean


def gibbs_approx(
    t: MatrixTuple,
    spec: PotentialSpec,
    depth: int,
    *,
    budget: int = DEFAULT_BUDGET,
) -> GibbsApprox:
    """Normalized level-n weights with entropy/Lyapunov/pressure diagnostics."""
    logphi = level_log_potentials(t, spec, depth, budget=budget)
    logz, ent_n, mean_n = _level_entropy_and_mean(logphi)
    if depth >= 2:
        logphi_prev = level_log_potentials(t, spec, depth - 1, budget=budget)
        _, ent_prev, _ = _level_entropy_and_mean(logphi_prev)
        logw_prev = logphi_prev - logsumexp(logphi_prev)
        marg = logsumexp_rows(
            (logphi - logz).reshape(count_words(t.n_maps, depth - 1), t.n_maps)
        )
        marginal_defect = float(np.max(np.abs(marg - logw_prev)))
    else:
        ent_prev = 0.0
        marginal_defect = 0.0
    upper = logz / depth
    entropy_estimate = ent_n - ent_prev
    lyapunov_estimate = mean_n / depth
    defect = abs(entropy_estimate + lyapunov_estimate - upper)
    return GibbsApprox(
        depth=depth,
        log_weights=logphi - logz,
        entropy_estimate=entropy_estimate,
        lyapunov_estimate=lyapunov_estimate,
        pressure_defect=defect,
        upper_pressure=upper,
        marginal_defect=marginal_defect,
    )


def logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=1)
    safe = np.where(np.isfinite(m), m, 0.0)
    return safe + np.log(np.sum(np.exp(x - safe[:, None]), axis=1))


def sample_words_from_gibbs(
    t: MatrixTuple,
    spec: PotentialSpec,
    depth: int,
    samples: int,
    seed: int,
    *,
    budget: int = DEFAULT_BUDGET,
) -> list[tuple[int, ...]]:
    """I.i.d. words of one level drawn from the normalized Gibbs weights."""
    logphi = level_log_potentials(t, spec, depth, budget=budget)
    probs = np.exp(logphi - logsumexp(logphi))
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(key=seed))
    idx = rng.choice(probs.shape[0], size=samples, p=probs)
    return [word_from_index(int(i), t.n_maps, depth) for i in idx]


def gibbs_lyapunov_spectrum(
    t: MatrixTuple,
    spec: PotentialSpec,
    depth: int,
    samples: int,
    seed: int = 0,
    *,
    budget: int = DEFAULT_BUDGET,
) -> LyapunovSpectrum:
    """Lyapunov exponents under the level-n Gibbs weights, by resampling words."""
    if samples < 2:
        raise InputError("need at least 2 samples for an error estimate")
    words = sample_words_from_gibbs(t, spec, depth, samples, seed, budget=budget)
    la = np.empty((samples, t.dim))
    for i, w in enumerate(words):
        la[i] = word_product_logsv(t, w).log_alphas / depth
    exps = la.mean(axis=0)
    err = la.std(axis=0, ddof=1) / math.sqrt(samples)
    return LyapunovSpectrum(
        exponents=exps,
        stderr=err,
        method="gibbs-level-n",
        horizon=depth,
        reps=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Quasimultiplicativity diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasimultReport:
    """Empirical quasimultiplicativity constant over sampled word pairs.

    delta_hat = min over pairs (i, j) of the best bridged ratio
    Phi(i k j) / (Phi(i) Phi(j)) over bridges k (the empty bridge included).
    Positive delta_hat is evidence, never proof.
    """

    delta_hat: float
    worst_pair: tuple[tuple[int, ...], tuple[int, ...]]
    bridge_count: int
    pair_count: int
    violations: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


def quasimult_diagnostic(
    t: MatrixTuple,
    spec: PotentialSpec,
    n_probe: int,
    *,
    bridge_len: int = 2,
    max_pairs: int = 400,
    violation_floor: float = 1e-9,
    seed: int = 0,
) -> QuasimultReport:
    validate_spec(spec, t)
    if n_probe < 1:
        raise InputError("n_probe must be >= 1")
    probe_words = list(words_up_to_length(t.n_maps, n_probe))
    bridges: list[tuple[int, ...]] = [()]
    bridges += list(words_up_to_length(t.n_maps, bridge_len))
    cache: dict[tuple[int, ...], float] = {}

    def logphi(w: tuple[int, ...]) -> float:
        if w not in cache:
            res = word_product_logsv(t, w)
            counts = symbol_counts(w, t.n_maps) if spec_needs_counts(spec) else None
            cache[w] = log_potential_from_log_alphas(spec, res.log_alphas, counts)
        return cache[w]

    pairs = [(u, v) for u in probe_words for v in probe_words]
    if len(pairs) > max_pairs:
        rng = np.random.Generator(np.random.Philox(key=seed))
        sel = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[int(i)] for i in sorted(sel)]
    best_min = math.inf
    worst = pairs[0]
    violations = []
    for u, v in pairs:
        base = logphi(u) + logphi(v)
        best = max(logphi(u + k + v) - base for k in bridges)
        if best < best_min:
            best_min = best
            worst = (u, v)
        if best < math.log(violation_floor):
            violations.append((u, v))
    return QuasimultReport(
        delta_hat=math.exp(best_min),
        worst_pair=worst,
        bridge_count=len(bridges),
        pair_count=len(pairs),
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Affine IFS and self-affine sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineIFS:
    """Affine maps x -> A_i x + v_i; strict mode insists every ||A_i|| < 1."""

    tuple: MatrixTuple
    translations: np.ndarray
    strict_contraction: bool = True

    def __post_init__(self):
        v = np.asarray(self.translations, dtype=float)
        if v.shape != (self.tuple.n_maps, self.tuple.dim):
            raise InputError(
                f"translations must have shape (N, d) = "
                f"({self.tuple.n_maps}, {self.tuple.dim}), got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InputError("translations must be finite")
        if self.strict_contraction:
            norms = np.linalg.svd(self.tuple.mats, compute_uv=False)[:, 0]
            if np.any(norms >= 1.0):
                raise InputError("strict-contraction mode requires every ||A_i|| < 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "translations", v)

    def apply(self, symbol: int, x: np.ndarray) -> np.ndarray:
        return self.tuple.mat(symbol) @ x + self.translations[symbol - 1]


def sample_self_affine(
    ifs: AffineIFS,
    mu: BernoulliMeasure,
    points: int,
    burn: int = 100,
    seed: int = 0,
) -> np.ndarray:
    """Chaos-game sample of the self-affine measure driven by the Bernoulli weights.

    Iterates x -> A_i x + v_i with i.i.d. symbols, discarding the burn-in;
    deterministic for a given seed.
    """
    if not ifs.strict_contraction:
        norms = np.linalg.svd(ifs.tuple.mats, compute_uv=False)[:, 0]
        if np.any(norms >= 1.0):
            raise InputError("sampling requires strict contractions")
    if mu.p.shape[0] != ifs.tuple.n_maps:
        raise InputError("Bernoulli vector length must match the number of maps")
    if points < 1 or burn < 0:
        raise InputError("points must be >= 1 and burn >= 0")
    rng = np.random.Generator(np.random.Philox(key=seed))
    symbols = rng.choice(ifs.tuple.n_maps, size=burn + points, p=mu.p)
    x = np.zeros(ifs.tuple.dim)
    out = np.empty((points, ifs.tuple.dim))
    mats = ifs.tuple.mats
    trans = ifs.translations
    for step, s in enumerate(symbols):
        x = mats[s] @ x + trans[s]
        if step >= burn:
            out[step - burn] = x
    return out
