"""Theorem-level checkers composed from the lower modules.

The Lyapunov-gap separation criterion, the scalar-block max-decomposition
identity, spectral-radius multiplicativity probes, weighted-eigenvalue
normalization/constancy tests, and detection of a common invariant inner
product (similitude structure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputError
from .linalg import (
    MatrixTuple,
    exterior_power,
    spectral_radius,
    word_product,
    word_product_logsv,
)
from .potentials import SVF, log_rho_form, log_svf_from_log_alphas
from .pressure import DEFAULT_BUDGET, sample_words_from_gibbs
from .structure import (
    IrreducibilityVerdict,
    StrongIrreducibilityVerdict,
    irreducibility_report,
    proximality,
    strong_irreducibility_heuristic,
)
from .words import words_up_to_length

# ---------------------------------------------------------------------------
# Lyapunov-gap separation checker
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationVerdict:
    """Outcome of the separation criterion for one case.

    ``hypotheses`` maps each required condition to its verdict string;
    ``gap_indices`` names the exponent pair (1-based) whose difference is
    estimated under the level-n Gibbs weights. GAP_CONFIRMED requires every
    hypothesis to hold (heuristic passes are flagged) and the estimated gap
    to clear three standard errors. Uniqueness of the equilibrium state is
    implied by the hypotheses, never verified numerically.
    """

    case: str
    k: int
    s: float
    hypotheses: dict[str, str]
    gap_indices: tuple[int, int]
    gap_estimate: float | None
    gap_stderr: float | None
    conclusion: str
    heuristic: bool
    unique_equilibrium_implied: bool


def _vacuous(degree: int, d: int) -> bool:
    return degree <= 0 or degree >= d or math.comb(d, degree) == 1


class _HypothesisCache:
    def __init__(self, t: MatrixTuple, prox_len: int, strong_parts: int, strong_len: int):
        self.t = t
        self.prox_len = prox_len
        self.strong_parts = strong_parts
        self.strong_len = strong_len
        self._irr: dict[int, IrreducibilityVerdict] = {}
        self._strong: dict[int, StrongIrreducibilityVerdict] = {}
        self._prox: dict[int, bool] = {}

    def irreducible(self, degree: int) -> str:
        if _vacuous(degree, self.t.dim):
            return "YES"
        if degree not in self._irr:
            self._irr[degree] = irreducibility_report(self.t, degree)
        return self._irr[degree].status

    def strongly_irreducible(self, degree: int) -> str:
        if _vacuous(degree, self.t.dim):
            return "YES"
        if degree not in self._strong:
            self._strong[degree] = strong_irreducibility_heuristic(
                self.t, degree, self.strong_parts, self.strong_len
            )
        return self._strong[degree].status

    def proximal(self, index: int) -> str:
        if index not in self._prox:
            res = proximality(self.t, index, self.prox_len)
            self._prox[index] = res.proximal
        return "YES" if self._prox[index] else f"NO_UP_TO({self.prox_len})"


def _strong_alternatives(case: str, k: int, s: float) -> list[list[int]]:
    """Alternative sets of degrees that must be strongly irreducible."""
    integer = float(s).is_integer()
    if case == "i":
        # integer s means s = k + 1 and the middle degree drops out
        return [[k], [k + 2]] if integer else [[k], [k + 1, k + 2]]
    return [[k - 1], [k + 1]] if integer else [[k + 1], [k - 1, k]]


def _evaluate_case(
    case: str,
    k: int,
    s: float,
    cache: _HypothesisCache,
) -> tuple[dict[str, str], bool, bool]:
    """(hypotheses map, all passed, heuristic flag)."""
    d = cache.t.dim
    hyp: dict[str, str] = {}
    irr_degrees = [k, k + 1, k + 2] if case == "i" else [k - 1, k, k + 1]
    prox_index = k + 1 if case == "i" else k
    ok = True
    for deg in irr_degrees:
        status = cache.irreducible(deg)
        hyp[f"irreducible_{deg}"] = status
        ok = ok and status == "YES"
    status = cache.proximal(prox_index)
    hyp[f"proximal_{prox_index}"] = status
    ok = ok and status == "YES"
    heuristic = False
    alt_ok = False
    for alt in _strong_alternatives(case, k, s):
        statuses = []
        for deg in alt:
            st = cache.strongly_irreducible(deg)
            hyp[f"strongly_irreducible_{deg}"] = st
            statuses.append(st)
        if all(st in ("YES", "YES_HEURISTIC") for st in statuses):
            alt_ok = True
            heuristic = heuristic or any(st == "YES_HEURISTIC" for st in statuses)
            break
    if not alt_ok:
        # record the remaining alternative degrees for the report
        for alt in _strong_alternatives(case, k, s):
            for deg in alt:
                hyp.setdefault(
                    f"strongly_irreducible_{deg}", cache.strongly_irreducible(deg)
                )
    ok = ok and alt_ok
    return hyp, ok, heuristic


def check_separation(
    t: MatrixTuple,
    s: float,
    *,
    depth: int = 10,
    samples: int = 400,
    seed: int = 0,
    prox_len: int = 6,
    strong_parts: int = 6,
    strong_len: int = 4,
    budget: int = DEFAULT_BUDGET,
) -> list[SeparationVerdict]:
    """Run the Lyapunov-gap criterion in every applicable case.

    Case (i) uses k = ceil(s) - 1 and separates exponents k+1 and k+2 when
    ceil(s) < d; case (ii) uses k = floor(s) >= 1 and separates exponents
    k and k+1. Degrees with a one-dimensional exterior action pass their
    irreducibility conditions vacuously, and at integer s the weaker
    alternative sets apply. When the hypotheses hold, the gap is estimated
    by resampling words from the level-``depth`` Gibbs weights of phi^s.
    """
    d = t.dim
    if not 0.0 < s < d:
        raise InputError(f"check_separation needs 0 < s < d={d}, got s={s}")
    cache = _HypothesisCache(t, prox_len, strong_parts, strong_len)
    cases: list[tuple[str, int, tuple[int, int]]] = []
    k_i = math.ceil(s) - 1
    if k_i + 1 < d:
        cases.append(("i", k_i, (k_i + 1, k_i + 2)))
    k_ii = math.floor(s)
    if k_ii >= 1:
        cases.append(("ii", k_ii, (k_ii, k_ii + 1)))

    evaluated = [
        (case, k, gap_idx, *_evaluate_case(case, k, s, cache))
        for case, k, gap_idx in cases
    ]
    la = None
    if any(ok for _, _, _, _, ok, _ in evaluated):
        words = sample_words_from_gibbs(t, SVF(s), depth, samples, seed, budget=budget)
        la = np.empty((samples, d))
        for i, w in enumerate(words):
            la[i] = word_product_logsv(t, w).log_alphas / depth

    verdicts = []
    for case, k, gap_idx, hyp, ok, heuristic in evaluated:
        if not ok:
            verdicts.append(
                SeparationVerdict(
                    case=case,
                    k=k,
                    s=s,
                    hypotheses=hyp,
                    gap_indices=gap_idx,
                    gap_estimate=None,
                    gap_stderr=None,
                    conclusion="HYPOTHESES_FAIL",
                    heuristic=heuristic,
                    unique_equilibrium_implied=False,
                )
            )
            continue
        a, b = gap_idx
        x = la[:, a - 1] - la[:, b - 1]
        gap = float(np.mean(x))
        stderr = float(np.std(x, ddof=1) / math.sqrt(x.shape[0]))
        confirmed = gap > 3.0 * stderr
        verdicts.append(
            SeparationVerdict(
                case=case,
                k=k,
                s=s,
                hypotheses=hyp,
                gap_indices=gap_idx,
                gap_estimate=gap,
                gap_stderr=stderr,
                conclusion="GAP_CONFIRMED" if confirmed else "INCONCLUSIVE",
                heuristic=heuristic,
                unique_equilibrium_implied=True,
            )
        )
    return verdicts


# ---------------------------------------------------------------------------
# Scalar-block max-decomposition identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSplitReport:
    """Residual of the exact identity phi^s(diag(b_w, C_w)) = max of three
    reduced potentials, over sampled words."""

    max_residual: float
    worst_word: tuple[int, ...]
    n_words: int
    regime_counts: dict[str, int]


def block_split_residual(
    b,
    c: MatrixTuple,
    s: float,
    *,
    n_words: int = 200,
    max_len: int = 10,
    seed: int = 0,
) -> BlockSplitReport:
    """Check that the svf of a scalar-block extension splits as a max.

    For block matrices diag(b_i, C_i) the singular values of a word product
    are |b_w| merged into the singular values of C_w, so phi^s factors as
    the max of: phi^s(C_w); |b_w| phi^(s-1)(C_w); |b_w|^(s-floor(s))
    ||C_w^(^floor(s))||. The returned residual is the worst absolute
    log-mismatch over the sampled words (an exact identity, so it should sit
    at rounding level), together with how often each regime attained the max.
    """
    bvec = np.asarray(b, dtype=float)
    if bvec.ndim != 1 or bvec.shape[0] != c.n_maps:
        raise InputError("need one scalar block entry per matrix")
    if np.any(bvec == 0.0) or not np.all(np.isfinite(bvec)):
        raise InputError("scalar block entries must be finite and nonzero")
    d = c.dim + 1
    if not 1.0 < s < d - 1:
        raise InputError(f"exponent must satisfy 1 < s < {d - 1}, got {s}")
    logb = np.log(np.abs(bvec))
    k = math.floor(s)
    rng = np.random.Generator(np.random.Philox(key=seed))
    words: list[tuple[int, ...]] = []
    while len(words) < n_words:
        length = int(rng.integers(1, max_len + 1))
        words.append(tuple(int(x) + 1 for x in rng.integers(0, c.n_maps, length)))
    worst = -1.0
    worst_word = words[0]
    regimes = {"inner": 0, "scalar-dominant": 0, "interleaved": 0}
    names = ("inner", "scalar-dominant", "interleaved")
    for w in words:
        lb = float(sum(logb[x - 1] for x in w))
        lsv = word_product_logsv(c, w).log_alphas
        merged = np.sort(np.concatenate([[lb], lsv]))[::-1]
        direct = log_svf_from_log_alphas(merged, s)
        phi1 = log_svf_from_log_alphas(lsv, s)
        phi2 = lb + log_svf_from_log_alphas(lsv, s - 1.0)
        phi3 = (s - k) * lb + float(np.sum(lsv[:k]))
        vals = (phi1, phi2, phi3)
        best = max(vals)
        regimes[names[int(np.argmax(vals))]] += 1
        resid = abs(direct - best)
        if resid > worst:
            worst = resid
            worst_word = w
    return BlockSplitReport(
        max_residual=worst,
        worst_word=tuple(worst_word),
        n_words=len(words),
        regime_counts=regimes,
    )


# ---------------------------------------------------------------------------
# Spectral-radius multiplicativity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoMultReport:
    """Worst relative defect of rho(A_u A_v) = rho(A_u) rho(A_v) over samples."""

    max_rel_defect: float
    worst_pair: tuple[tuple[int, ...], tuple[int, ...]]
    n_pairs: int


def spectral_radius_multiplicativity(
    t: MatrixTuple,
    *,
    pairs: int = 64,
    max_len: int = 6,
    seed: int = 0,
) -> RhoMultReport:
    """Sample word pairs and report how far the spectral radius is from
    multiplying across products; tiny defects fingerprint similitude-like
    (conjugate-to-isometry) semigroups."""
    if pairs < 1 or max_len < 1:
        raise InputError("pairs and max_len must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    cand: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    singles = [(i,) for i in range(1, t.n_maps + 1)]
    for u in singles:
        for v in singles:
            cand.append((u, v))
    while len(cand) < pairs + len(singles) ** 2:
        lu = int(rng.integers(1, max_len + 1))
        lv = int(rng.integers(1, max_len + 1))
        u = tuple(int(x) + 1 for x in rng.integers(0, t.n_maps, lu))
        v = tuple(int(x) + 1 for x in rng.integers(0, t.n_maps, lv))
        cand.append((u, v))
    worst = -1.0
    worst_pair = cand[0]
    for u, v in cand:
        mu, lu_ = word_product(t, u)
        mv, lv_ = word_product(t, v)
        ru = spectral_radius(mu)
        rv = spectral_radius(mv)
        rp = spectral_radius(mu @ mv)
        if ru <= 0.0 or rv <= 0.0:
            raise DegenerateError("spectral radius vanished on a sampled word")
        with np.errstate(divide="ignore"):
            log_defect = math.log(rp) - math.log(ru) - math.log(rv) if rp > 0 else -math.inf
        defect = abs(math.exp(log_defect) - 1.0) if math.isfinite(log_defect) else 1.0
        if defect > worst:
            worst = defect
            worst_pair = (u, v)
    return RhoMultReport(max_rel_defect=worst, worst_pair=worst_pair, n_pairs=len(cand))


# ---------------------------------------------------------------------------
# Weighted eigenvalue-modulus normalization and constancy
# ---------------------------------------------------------------------------


def rho_form(a, s: float) -> float:
    """rho(A^(^floor(s)))^(1+floor(s)-s) * rho(A^(^ceil(s)))^(s-floor(s))."""
    arr = np.asarray(a, dtype=float)
    d = arr.shape[0]
    if not 0.0 < s <= d:
        raise InputError(f"rho form needs 0 < s <= d={d}, got {s}")
    k0 = math.floor(s)
    k1 = math.ceil(s)
    r0 = 1.0 if k0 == 0 else spectral_radius(exterior_power(arr, k0))
    r1 = spectral_radius(exterior_power(arr, k1))
    if r0 <= 0.0 or r1 <= 0.0:
        raise DegenerateError("spectral radius of an exterior power vanished")
    return float(r0 ** (1 + k0 - s) * r1 ** (s - k0))


def rho_form_normalize(t: MatrixTuple, s: float) -> MatrixTuple:
    """Rescale each generator so its weighted eigenvalue-modulus form equals 1.

    Scaling A by c scales the form by c^s, so each generator is divided by
    its form to the power 1/s; the output generators satisfy the constancy
    equation exactly (within rounding).
    """
    d = t.dim
    if not 0.0 < s < d:
        raise InputError(f"normalization needs 0 < s < d={d}, got {s}")
    out = np.empty_like(t.mats)
    for i, a in enumerate(t.mats):
        rf = rho_form(a, s)
        if rf <= 0.0 or not math.isfinite(rf):
            raise DegenerateError(f"generator {i + 1} has degenerate rho form")
        out[i] = a * rf ** (-1.0 / s)
    return MatrixTuple(out)


@dataclass(frozen=True)
class RhoFormConstancyReport:
    """Largest |log rho-form| over sampled words of a normalized tuple."""

    max_abs_log: float
    worst_word: tuple[int, ...]
    n_words: int
    normalized_first: bool


def rho_form_constancy(
    t: MatrixTuple,
    s: float,
    *,
    max_len: int = 12,
    samples: int = 64,
    seed: int = 0,
) -> RhoFormConstancyReport:
    """Evaluate the weighted eigenvalue-modulus form on sampled words.

    A semigroup on which the form is identically 1 keeps it at 1 on every
    product; the report returns the largest log-deviation and its witness.
    Generators are normalized first if they are not already.
    """
    if max_len < 1 or samples < 0:
        raise InputError("max_len must be >= 1 and samples >= 0")
    normalized = False
    if any(abs(math.log(rho_form(a, s))) > 1e-12 for a in t.mats):
        t = rho_form_normalize(t, s)
        normalized = True
    words: list[tuple[int, ...]] = list(words_up_to_length(t.n_maps, min(3, max_len)))
    for i in range(1, t.n_maps + 1):
        words.extend((i,) * L for L in range(2, max_len + 1))
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(samples):
        length = int(rng.integers(1, max_len + 1))
        words.append(tuple(int(x) + 1 for x in rng.integers(0, t.n_maps, length)))
    spec = SVF(s)
    worst = -1.0
    worst_word = words[0]
    for w in words:
        val = abs(log_rho_form(spec, t, w))
        if val > worst:
            worst = val
            worst_word = w
    return RhoFormConstancyReport(
        max_abs_log=worst,
        worst_word=tuple(worst_word),
        n_words=len(words),
        normalized_first=normalized,
    )


# ---------------------------------------------------------------------------
# Similitude (invariant inner product) detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimilitudeCertificate:
    """Verdict on conjugacy of the determinant-normalized tuple into the
    orthogonal group, with the invariant quadratic form when one exists.

    ``residual`` is max_i ||H_i^T P H_i - P|| / ||P|| for the normalized
    generators H_i = |det A_i|^(-1/d) A_i.
    """

    verdict: str
    form: np.ndarray | None
    residual: float | None
    method: str


def _sym_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        e = np.zeros((d, d))
        e[i, i] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
            basis.append(e)
    return basis


def _transfer_matrix(h: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    m = len(basis)
    cols = []
    for bmat in basis:
        img = h.T @ bmat @ h
        cols.append([float(np.sum(img * b2)) for b2 in basis])
    return np.array(cols).T


def _spd_screen(p: np.ndarray) -> tuple[bool, np.ndarray | None]:
    """Is +-p definite (up to sign)? Returns (definite, oriented copy)."""
    p = 0.5 * (p + p.T)
    eig = np.linalg.eigvalsh(p)
    scale = max(abs(eig[0]), abs(eig[-1]))
    if scale == 0.0:
        return False, None
    if eig[0] > 1e-8 * scale:
        return True, p
    if eig[-1] < -1e-8 * scale:
        return True, -p
    return False, None


def _certificate_residual(hs: list[np.ndarray], p: np.ndarray) -> float:
    denom = np.linalg.norm(p, 2)
    return max(np.linalg.norm(h.T @ p @ h - p, 2) / denom for h in hs)


def detect_similitude_structure(
    t: MatrixTuple,
    iters: int = 10_000,
    tol: float = 1e-8,
) -> SimilitudeCertificate:
    """Search for a quadratic form preserved by all det-normalized generators.

    Normalizing by |det|^(1/d) makes the fixed-point problem for
    P -> H_i^T P H_i linear, so the primary route solves the stacked null
    space on symmetric matrices and screens it for a definite element (grid
    search when the null space is 2-dimensional). A Cesaro averaging
    iteration from the identity is the fallback; divergence of its residual
    certifies NOT_SIMILITUDES, exhaustion yields INCONCLUSIVE.
    """
    d = t.dim
    hs = []
    for a in t.mats:
        _, logdet = np.linalg.slogdet(a)
        hs.append(a * math.exp(-logdet / d))
    basis = _sym_basis(d)
    m = len(basis)
    rows = [_transfer_matrix(h, basis) - np.eye(m) for h in hs]
    stacked = np.concatenate(rows, axis=0)
    u, svals, vh = np.linalg.svd(stacked)
    sigma1 = svals[0] if svals.size else 0.0
    null_mask = svals <= 1e-10 * max(1.0, sigma1)
    nullity = int(np.sum(null_mask)) + (m - svals.size)
    null_vecs = vh[m - nullity :] if nullity > 0 else np.empty((0, m))

    def vec_to_sym(x: np.ndarray) -> np.ndarray:
        return sum(float(c) * b for c, b in zip(x, basis))

    def finish(p: np.ndarray, method: str) -> SimilitudeCertificate | None:
        p = p * (d / np.trace(p))
        resid = _certificate_residual(hs, p)
        if resid <= tol:
            return SimilitudeCertificate(
                verdict="SIMILITUDES", form=p, residual=resid, method=method
            )
        return None

    if nullity == 1:
        definite, oriented = _spd_screen(vec_to_sym(null_vecs[0]))
        if definite:
            cert = finish(oriented, "null-space")
            if cert is not None:
                return cert
        else:
            return SimilitudeCertificate(
                verdict="NOT_SIMILITUDES",
                form=None,
                residual=None,
                method="null-space-indefinite",
            )
    elif nullity == 2:
        s1 = vec_to_sym(null_vecs[0])
        s2 = vec_to_sym(null_vecs[1])
        best = None
        best_margin = 0.0
        for theta in np.linspace(0.0, math.pi, 1441):
            definite, oriented = _spd_screen(
                math.cos(theta) * s1 + math.sin(theta) * s2
            )
            if definite:
                eig = np.linalg.eigvalsh(oriented)
                margin = eig[0] / eig[-1]
                if margin > best_margin:
                    best_margin = margin
                    best = oriented
        if best is not None:
            cert = finish(best, "null-space-grid")
            if cert is not None:
                return cert
        else:
            return SimilitudeCertificate(
                verdict="NOT_SIMILITUDES",
                form=None,
                residual=None,
                method="null-space-indefinite",
            )
    elif nullity == 0 and svals.size and svals[-1] > 1e-6 * max(1.0, sigma1):
        return SimilitudeCertificate(
            verdict="NOT_SIMILITUDES",
            form=None,
            residual=None,
            method="null-space-empty",
        )
    elif nullity > 2:
        # project the identity onto the invariant-form space
        x0 = np.array([float(np.sum(np.eye(d) * b)) for b in basis])
        proj = null_vecs.T @ (null_vecs @ x0)
        if np.linalg.norm(proj) > 0:
            definite, oriented = _spd_screen(vec_to_sym(proj))
            if definite:
                cert = finish(oriented, "null-space-projection")
                if cert is not None:
                    return cert

    # Cesaro averaging fallback
    p = np.eye(d)
    window: list[float] = []
    for _ in range(max(1, iters)):
        p_next = sum(h.T @ p @ h for h in hs) / len(hs)
        p_next = 0.5 * (p_next + p_next.T)
        norm = np.linalg.norm(p_next, 2)
        if norm == 0.0 or not np.isfinite(norm):
            return SimilitudeCertificate(
                verdict="NOT_SIMILITUDES", form=None, residual=None, method="iteration"
            )
        p = p_next / norm
        resid = _certificate_residual(hs, p)
        definite, oriented = _spd_screen(p)
        if resid <= tol and definite:
            cert = finish(oriented, "iteration")
            if cert is not None:
                return cert
        window.append(resid)
        if len(window) > 50:
            window.pop(0)
            if window[-1] > 10.0 * min(window) and window[-1] > 1.0:
                return SimilitudeCertificate(
                    verdict="NOT_SIMILITUDES",
                    form=None,
                    residual=resid,
                    method="iteration-diverged",
                )
    return SimilitudeCertificate(
        verdict="INCONCLUSIVE", form=None, residual=None, method="iteration-exhausted"
    )
