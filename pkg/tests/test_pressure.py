import math

import numpy as np
import pytest

from affpress import (
    AffineIFS,
    BernoulliMeasure,
    BudgetError,
    InputError,
    MatrixTuple,
    NormPower,
    SVF,
    affinity_dimension,
    eigen_moduli,
    gibbs_approx,
    gibbs_lyapunov_spectrum,
    lyapunov_spectrum,
    pressure_bracket,
    pressure_upper,
    quasimult_diagnostic,
    rotation,
    sample_self_affine,
    word_product,
)
from affpress.potentials import log_rho_form
from affpress.pressure import level_log_potentials, logsumexp, logsumexp_rows
from affpress.words import count_words, words_up_to_length

from conftest import random_tuple


# ---------------------------------------------------------------------------
# pressure brackets
# ---------------------------------------------------------------------------


def test_bracket_equal_similitudes_is_exact():
    t = MatrixTuple(np.stack([0.5 * np.eye(2)] * 2))
    for s in (0.4, 1.0, 1.7):
        expect = math.log(2) + s * math.log(0.5)
        for n in (1, 3, 6):
            br = pressure_bracket(t, SVF(s), n)
            assert br.upper == pytest.approx(expect, abs=1e-12)
            assert br.lower == pytest.approx(expect, abs=1e-12)


def test_bracket_scalar_system_exact_at_every_depth():
    t = MatrixTuple(np.array([[[0.5]], [[0.25]], [[0.75]]]))
    s = 0.9
    expect = math.log(0.5**s + 0.25**s + 0.75**s)
    for n in range(1, 10):
        br = pressure_bracket(t, SVF(s), n)
        assert br.upper == pytest.approx(expect, abs=1e-10)
        assert br.lower == pytest.approx(expect, abs=1e-10)


def test_bracket_single_matrix_collapses_to_rho_form():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 2)) * 0.6
    t = MatrixTuple(a[None])
    s = 1.3
    target = log_rho_form(SVF(s), t, (1,))
    widths = []
    for n in (2, 4, 8, 16):
        br = pressure_bracket(t, SVF(s), n)
        assert br.lower >= target - 1e-10
        assert br.upper >= br.lower
        widths.append(br.width)
    assert widths[-1] < widths[0]
    assert widths[-1] < 0.05


def test_upper_pressure_non_increasing_and_subadditive(plane_corpus):
    for t in plane_corpus:
        uppers = {n: pressure_upper(t, SVF(1.2), n) for n in range(1, 9)}
        for n in range(1, 8):
            assert uppers[n + 1] <= uppers[n] + 1e-12
        # log partition sums are subadditive: a_{n+m} <= a_n + a_m
        a = {n: n * uppers[n] for n in uppers}
        for n in range(1, 5):
            for m in range(1, 4):
                assert a[n + m] <= a[n] + a[m] + 1e-9


def test_bracket_orders_lower_below_upper(plane_corpus):
    for t in plane_corpus:
        for s in (0.7, 1.4):
            br = pressure_bracket(t, SVF(s), 6)
            assert br.lower <= br.upper
            assert br.lower_witness is not None


def test_budget_error_is_explicit():
    t = MatrixTuple(np.stack([0.5 * np.eye(2)] * 2))
    with pytest.raises(BudgetError):
        pressure_upper(t, SVF(1.0), 10, budget=100)


# ---------------------------------------------------------------------------
# affinity dimension
# ---------------------------------------------------------------------------


def test_affinity_two_half_similitudes():
    t = MatrixTuple(np.stack([0.5 * np.eye(2)] * 2))
    iv = affinity_dimension(t, 6, 1e-4)
    assert iv.s_lo <= 1.0 <= iv.s_hi
    assert iv.width <= 1e-4


def test_affinity_four_half_similitudes_clamps_at_dimension():
    t = MatrixTuple(np.stack([0.5 * np.eye(2)] * 4))
    iv = affinity_dimension(t, 4, 1e-4)
    assert iv.s_lo <= 2.0 <= iv.s_hi
    assert iv.s_hi <= 2.0


def test_affinity_three_third_similitudes():
    t = MatrixTuple(np.stack([np.eye(2) / 3] * 3))
    iv = affinity_dimension(t, 4, 1e-4)
    assert iv.s_lo <= 1.0 <= iv.s_hi
    assert iv.width <= 1e-4


def test_affinity_rejects_non_contractive():
    t = MatrixTuple(np.stack([np.diag([1.2, 0.5]), 0.5 * np.eye(2)]))
    with pytest.raises(InputError):
        affinity_dimension(t, 4, 1e-3)


# ---------------------------------------------------------------------------
# Lyapunov spectra
# ---------------------------------------------------------------------------


def test_lyapunov_exact_diagonal_values():
    t = MatrixTuple(np.stack([np.diag([0.5, 1 / 3]), np.diag([0.25, 0.2])]))
    mu = BernoulliMeasure(np.array([0.5, 0.5]))
    res = lyapunov_spectrum(t, mu, 100, 4)
    assert res.method == "exact-diagonal"
    assert res.exponents[0] == pytest.approx(-0.5 * math.log(8), rel=1e-12)
    assert res.exponents[1] == pytest.approx(-0.5 * math.log(15), rel=1e-12)
    assert np.all(res.stderr == 0.0)


def test_lyapunov_monte_carlo_matches_exact_on_diagonal():
    t = MatrixTuple(np.stack([np.diag([0.5, 1 / 3]), np.diag([0.25, 0.2])]))
    mu = BernoulliMeasure(np.array([0.5, 0.5]))
    exact = lyapunov_spectrum(t, mu, 10, 1).exponents
    mc = lyapunov_spectrum(t, mu, 2000, 16, seed=12345, method="monte-carlo")
    assert mc.method == "monte-carlo"
    for j in range(2):
        assert abs(mc.exponents[j] - exact[j]) <= 3 * mc.stderr[j]


def test_lyapunov_orthogonal_matrix_is_zero():
    t = MatrixTuple(rotation(0.9)[None])
    mu = BernoulliMeasure(np.array([1.0]))
    res = lyapunov_spectrum(t, mu, 500, 2, seed=3)
    assert np.allclose(res.exponents, 0.0, atol=1e-10)


def test_lyapunov_single_matrix_converges_to_eigen_moduli():
    a = np.array([[0.9, 0.4, 0.0], [0.0, 0.5, 0.3], [0.0, 0.0, 0.2]])
    t = MatrixTuple(a[None])
    mu = BernoulliMeasure(np.array([1.0]))
    res = lyapunov_spectrum(t, mu, 4000, 2, seed=1)
    expect = np.log(eigen_moduli(a))
    assert np.allclose(res.exponents, expect, atol=2e-3)


def test_lyapunov_partial_sums_match_exterior_top_exponent(plane_corpus):
    t = plane_corpus[0]
    mu = BernoulliMeasure(np.array([0.5, 0.5]))
    base = lyapunov_spectrum(t, mu, 1500, 12, seed=21)
    ext = lyapunov_spectrum(t.exterior(2), mu, 1500, 12, seed=22)
    lhs = base.exponents[0] + base.exponents[1]
    err = math.sqrt(
        base.stderr[0] ** 2 + base.stderr[1] ** 2 + ext.stderr[0] ** 2
    )
    assert abs(lhs - ext.exponents[0]) <= max(3 * err, 1e-9)


def test_lyapunov_validation():
    t = MatrixTuple(np.diag([0.5, 0.5])[None])
    mu = BernoulliMeasure(np.array([1.0]))
    with pytest.raises(InputError):
        lyapunov_spectrum(t, BernoulliMeasure(np.array([0.5, 0.5])), 10, 2)
    with pytest.raises(InputError):
        lyapunov_spectrum(t, mu, 0, 2)
    with pytest.raises(InputError):
        lyapunov_spectrum(t, mu, 10, 2, method="exact-diagonal")


# ---------------------------------------------------------------------------
# Gibbs approximation
# ---------------------------------------------------------------------------


def test_gibbs_scalar_system_is_bernoulli_closed_form():
    a = np.array([0.5, 0.3])
    t = MatrixTuple(a[:, None, None])
    s = 0.7
    n = 6
    g = gibbs_approx(t, SVF(s), n)
    p = np.abs(a) ** s
    p /= p.sum()
    # weights must be the i.i.d. product measure, word by word
    weights = np.exp(g.log_weights)
    from affpress.words import word_from_index

    for idx in range(2**n):
        word = word_from_index(idx, 2, n)
        expect = np.prod([p[s_ - 1] for s_ in word])
        assert weights[idx] == pytest.approx(expect, abs=1e-10)
    assert g.pressure_defect <= 1e-10
    assert g.entropy_estimate == pytest.approx(-(p * np.log(p)).sum(), abs=1e-10)


def test_gibbs_single_matrix_uniform_zero_entropy():
    rng = np.random.default_rng(5)
    t = random_tuple(rng, 2, 1, scale=0.7)
    g = gibbs_approx(t, SVF(1.1), 5)
    assert np.allclose(np.exp(g.log_weights), 1.0)
    assert g.entropy_estimate == pytest.approx(0.0, abs=1e-12)


def test_gibbs_scaled_identities_uniform():
    t = MatrixTuple(np.stack([0.6 * np.eye(2)] * 2))
    g = gibbs_approx(t, SVF(1.3), 6)
    assert np.allclose(np.exp(g.log_weights), 2.0**-6, atol=1e-12)
    assert g.entropy_estimate == pytest.approx(math.log(2), abs=1e-10)
    assert g.pressure_defect <= 1e-10


def test_gibbs_defect_small_and_shrinking_on_corpus(plane_corpus):
    for t in plane_corpus:
        d5 = gibbs_approx(t, SVF(1.2), 5).pressure_defect
        d10 = gibbs_approx(t, SVF(1.2), 10).pressure_defect
        assert d10 <= 0.05
        assert d10 <= d5


def test_gibbs_marginal_defect_bounded(plane_corpus):
    g = gibbs_approx(plane_corpus[0], SVF(1.0), 8)
    assert g.marginal_defect < 1.0


def test_gibbs_ratio_constant_does_not_grow(plane_corpus):
    # Gibbs property proxy: marginals of a deep level against e^{-mP} Phi(u)
    t = plane_corpus[0]
    s = 1.2
    n0 = 12
    logphi = level_log_potentials(t, SVF(s), n0)
    logw = logphi - logsumexp(logphi)
    p_hat = pressure_upper(t, SVF(s), n0)
    cur = logw
    c_hat = {}
    for m in range(n0 - 1, 2, -1):
        cur = logsumexp_rows(cur.reshape(count_words(t.n_maps, m), t.n_maps))
        if m <= 9:
            lp = level_log_potentials(t, SVF(s), m)
            c_hat[m] = float(np.max(np.abs(cur - (lp - m * p_hat))))
    ms = np.array(sorted(c_hat))
    cs = np.array([c_hat[m] for m in ms])
    slope = np.polyfit(ms, cs, 1)[0]
    assert slope < 0.01


def test_gibbs_lyapunov_spectrum_sane(plane_corpus):
    t = plane_corpus[0]
    res = gibbs_lyapunov_spectrum(t, SVF(1.2), 8, 200, seed=9)
    assert res.method == "gibbs-level-n"
    assert res.exponents[0] >= res.exponents[1]
    assert np.all(res.stderr >= 0)


# ---------------------------------------------------------------------------
# quasimultiplicativity diagnostic
# ---------------------------------------------------------------------------


def test_quasimult_scalar_system_delta_one():
    t = MatrixTuple(np.array([[[0.5]], [[0.25]]]))
    rep = quasimult_diagnostic(t, SVF(1.0), 3)
    assert rep.delta_hat == pytest.approx(1.0, abs=1e-12)


def test_quasimult_reducible_pair_detects_near_violation():
    eps = 1e-3
    t = MatrixTuple(np.stack([np.diag([1.0, eps]), np.diag([eps, 1.0])]))
    rep = quasimult_diagnostic(t, SVF(1.0), 2, bridge_len=2)

    # brute-force oracle in the linear domain over the same word sets
    def phi(word):
        m = np.eye(2)
        for s_ in word:
            m = t.mats[s_ - 1] @ m
        return np.linalg.norm(m, 2)

    words = list(words_up_to_length(2, 2))
    bridges = [()] + list(words_up_to_length(2, 2))
    delta_oracle = min(
        max(phi(u + k + v) / (phi(u) * phi(v)) for k in bridges)
        for u in words
        for v in words
    )
    assert rep.delta_hat == pytest.approx(delta_oracle, rel=1e-9)
    assert rep.delta_hat <= eps * 1.01


def test_quasimult_irreducible_pair_bounded_away(plane_corpus):
    rep = quasimult_diagnostic(plane_corpus[0], SVF(1.0), 3, bridge_len=2)
    assert rep.delta_hat > 0.05
    assert not rep.violations


# ---------------------------------------------------------------------------
# self-affine sampling
# ---------------------------------------------------------------------------


def test_sample_single_map_hits_fixed_point():
    t = MatrixTuple((0.5 * np.eye(2))[None])
    ifs = AffineIFS(tuple=t, translations=np.array([[1.0, 0.5]]))
    mu = BernoulliMeasure(np.array([1.0]))
    pts = sample_self_affine(ifs, mu, points=50, burn=100, seed=1)
    fixed = np.linalg.solve(np.eye(2) - 0.5 * np.eye(2), np.array([1.0, 0.5]))
    assert np.max(np.abs(pts - fixed)) <= 1e-9


def test_sample_sierpinski_stays_in_hull():
    mats = np.stack([0.5 * np.eye(2)] * 3)
    trans = np.array([[0.0, 0.0], [0.5, 0.0], [0.25, 0.5]])
    ifs = AffineIFS(tuple=MatrixTuple(mats), translations=trans)
    mu = BernoulliMeasure(np.ones(3) / 3)
    pts = sample_self_affine(ifs, mu, points=2000, burn=50, seed=7)
    # fixed points of the three maps are (0,0), (1,0), (0.5,1): hull checks
    assert np.all(pts[:, 1] >= -1e-12)
    assert np.all(pts[:, 1] <= 1.0 + 1e-12)
    assert np.all(pts[:, 0] >= pts[:, 1] / 2 - 0.5 - 1e-9)
    assert np.all(pts[:, 0] <= 1.0 - pts[:, 1] / 2 + 1e-9)


def test_sample_degenerate_weights_converge_to_first_fixed_point():
    mats = np.stack([0.5 * np.eye(1), 0.25 * np.eye(1)])
    trans = np.array([[1.0], [3.0]])
    ifs = AffineIFS(tuple=MatrixTuple(mats), translations=trans)
    mu = BernoulliMeasure(np.array([1.0 - 1e-15, 1e-15]))
    pts = sample_self_affine(ifs, mu, points=10, burn=200, seed=2)
    assert np.allclose(pts, 2.0, atol=1e-9)


def test_sample_deterministic_under_seed():
    mats = np.stack([0.5 * np.eye(2), 0.4 * rotation(1.0)])
    trans = np.array([[0.1, 0.0], [0.0, 0.3]])
    ifs = AffineIFS(tuple=MatrixTuple(mats), translations=trans)
    mu = BernoulliMeasure(np.array([0.5, 0.5]))
    a = sample_self_affine(ifs, mu, points=100, burn=10, seed=9)
    b = sample_self_affine(ifs, mu, points=100, burn=10, seed=9)
    c = sample_self_affine(ifs, mu, points=100, burn=10, seed=10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_rejects_expansive_maps():
    with pytest.raises(InputError):
        AffineIFS(
            tuple=MatrixTuple(np.diag([1.5, 0.5])[None]),
            translations=np.zeros((1, 2)),
        )


# ---------------------------------------------------------------------------
# enumeration internals
# ---------------------------------------------------------------------------


def test_level_log_potentials_matches_per_word_evaluation(plane_corpus):
    from affpress import eval_potential
    from affpress.words import word_from_index

    t = plane_corpus[1]
    spec = SVF(1.4)
    n = 5
    vals = level_log_potentials(t, spec, n)
    for idx in (0, 7, 13, 31):
        w = word_from_index(idx, t.n_maps, n)
        assert vals[idx] == pytest.approx(eval_potential(spec, t, w), abs=1e-9)


def test_norm_power_pressure_matches_svf_integer():
    rng = np.random.default_rng(11)
    t = random_tuple(rng, 3, 2, scale=0.6)
    for n in (2, 4):
        a = pressure_upper(t, NormPower(1.0, 2), n)
        b = pressure_upper(t, SVF(2.0), n)
        assert a == pytest.approx(b, abs=1e-10)
