import math

import numpy as np
import pytest

from affpress import (
    DegenerateError,
    InputError,
    MatrixTuple,
    MaxOf,
    NormPower,
    SVF,
    ScaledSVF,
    WeightedProduct,
    dualize,
    eval_potential,
    rotation,
    svf,
    svf_via_exterior,
    word_product,
    word_product_logsv,
)
from affpress.potentials import log_svf_from_log_alphas

from conftest import random_invertible, random_tuple, random_word


# ---------------------------------------------------------------------------
# singular value function
# ---------------------------------------------------------------------------


def test_svf_diagonal_fractional():
    assert svf(np.diag([4.0, 1.0]), 1.5) == pytest.approx(4.0)


def test_svf_determinant_branch():
    assert svf(np.diag([2.0, 3.0]), 4.0) == pytest.approx(36.0)


def test_svf_zero_exponent_is_one():
    rng = np.random.default_rng(0)
    assert svf(random_invertible(rng, 3), 0.0) == 1.0


def test_svf_continuous_at_integer_exponents():
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = random_invertible(rng, 4)
        for k in (1, 2, 3, 4):
            below = svf(a, k - 1e-9)
            at = svf(a, float(k))
            above = svf(a, k + 1e-9) if k < 4 else svf(a, 4.0 + 1e-9)
            assert math.log(below) == pytest.approx(math.log(at), abs=1e-7)
            assert math.log(above) == pytest.approx(math.log(at), abs=1e-7)


def test_svf_agreement_at_s_equal_d():
    rng = np.random.default_rng(2)
    a = random_invertible(rng, 3)
    direct = np.prod(np.linalg.svd(a, compute_uv=False))
    assert svf(a, 3.0) == pytest.approx(direct, rel=1e-10)
    assert svf(a, 3.0) == pytest.approx(abs(np.linalg.det(a)), rel=1e-9)


def test_svf_monotone_for_contractions():
    rng = np.random.default_rng(3)
    a = random_invertible(rng, 3, scale=0.2)
    values = [svf(a, s) for s in np.linspace(0.0, 3.0, 16)]
    assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


def test_log_svf_concave_in_exponent():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = random_invertible(rng, 4)
        grid = np.linspace(0.0, 4.0, 17)
        vals = np.array([math.log(svf(a, s)) for s in grid])
        second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
        assert np.all(second <= 1e-9)


def test_svf_rejects_negative_exponent():
    with pytest.raises(InputError):
        svf(np.eye(2), -0.5)


def test_svf_rejects_rank_deficient_when_needed():
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegenerateError):
        svf(a, 1.5)
    assert svf(a, 0.5) == pytest.approx(1.0)  # only the top value is needed


# ---------------------------------------------------------------------------
# exterior-power route
# ---------------------------------------------------------------------------


def test_svf_via_exterior_examples():
    assert svf_via_exterior(np.diag([4.0, 1.0]), 1.5) == pytest.approx(4.0)
    for s in (0.5, 1.7, 3.0):
        assert svf_via_exterior(np.eye(3), s) == pytest.approx(1.0)


def test_svf_via_exterior_matches_direct():
    rng = np.random.default_rng(5)
    for d in (2, 3, 4):
        for _ in range(25):
            a = random_invertible(rng, d)
            for s in rng.uniform(0.05, d, size=4):
                lhs = math.log(svf(a, float(s)))
                rhs = math.log(svf_via_exterior(a, float(s)))
                assert lhs == pytest.approx(rhs, abs=1e-9)


def test_svf_via_exterior_range_check():
    with pytest.raises(InputError):
        svf_via_exterior(np.eye(2), 0.0)
    with pytest.raises(InputError):
        svf_via_exterior(np.eye(2), 2.5)


# ---------------------------------------------------------------------------
# potential evaluation on words
# ---------------------------------------------------------------------------


def test_eval_potential_scalar_tuple_is_additive():
    t = MatrixTuple(np.array([[[0.5]], [[0.3]]]))
    w = (1, 2, 2, 1)
    s = 0.8
    expect = s * (2 * math.log(0.5) + 2 * math.log(0.3))
    assert eval_potential(SVF(s), t, w) == pytest.approx(expect, rel=1e-12)


def test_eval_potential_top_power_is_log_det():
    rng = np.random.default_rng(6)
    t = random_tuple(rng, 3, 2, scale=0.9)
    w = (1, 2, 1, 1, 2)
    got = eval_potential(NormPower(1.0, 3), t, w)
    # oracle: determinants multiply exactly
    expect = sum(np.linalg.slogdet(t.mats[s - 1])[1] for s in w)
    assert got == pytest.approx(expect, rel=1e-10)


def test_eval_potential_max_split_matches_block_svf():
    # svf of diag(b_i) + C_i block tuples equals the max of the three reduced
    # potentials evaluated on the small tuple alone
    rng = np.random.default_rng(7)
    s = 1.5
    c = random_tuple(rng, 3, 2, scale=0.8)
    b = np.array([0.9, 1.4])
    big = np.zeros((2, 4, 4))
    big[:, 0, 0] = b
    big[:, 1:, 1:] = c.mats
    big_t = MatrixTuple(big)
    k = math.floor(s)
    spec = MaxOf(
        (
            SVF(s),
            ScaledSVF(s - 1, tuple(np.abs(b))),
            ScaledSVF(float(k), tuple(np.abs(b) ** (s - k))),
        )
    )
    for _ in range(20):
        w = random_word(rng, 2, 8)
        direct = eval_potential(SVF(s), big_t, w)
        split = eval_potential(spec, c, w)
        assert split == pytest.approx(direct, abs=1e-9)


def test_spec_validation_errors():
    t = MatrixTuple(np.stack([np.eye(2) * 0.5, np.eye(2) * 0.4]))
    with pytest.raises(InputError):
        eval_potential(NormPower(1.0, 3), t, (1,))
    with pytest.raises(InputError):
        eval_potential(ScaledSVF(1.0, (0.5,)), t, (1,))
    with pytest.raises(InputError):
        MaxOf(())
    with pytest.raises(InputError):
        WeightedProduct(())
    with pytest.raises(InputError):
        ScaledSVF(1.0, (1.0, -2.0))


def test_submultiplicativity_across_spec_vocabulary():
    rng = np.random.default_rng(8)
    t = random_tuple(rng, 3, 2, scale=0.9)
    specs = [
        SVF(1.3),
        SVF(2.0),
        SVF(3.7),
        NormPower(0.7, 2),
        WeightedProduct(((1, 0.4), (2, 1.1))),
        ScaledSVF(1.2, (0.7, 1.9)),
        MaxOf((SVF(1.3), NormPower(0.7, 2))),
    ]
    for spec in specs:
        for _ in range(25):
            u = random_word(rng, 2, 5)
            v = random_word(rng, 2, 5)
            lhs = eval_potential(spec, t, u + v)
            rhs = eval_potential(spec, t, u) + eval_potential(spec, t, v)
            assert lhs <= rhs + 1e-9


def test_eval_potential_matches_svf_of_product_short_words():
    rng = np.random.default_rng(9)
    t = random_tuple(rng, 3, 2, scale=0.8)
    for _ in range(10):
        w = random_word(rng, 2, 5)
        s = float(rng.uniform(0.2, 2.8))
        m, logscale = word_product(t, w)
        # direct route: recover the product, evaluate svf in linear domain
        direct = math.log(svf(m, s)) + s * logscale
        assert eval_potential(SVF(s), t, w) == pytest.approx(direct, abs=1e-8)


# ---------------------------------------------------------------------------
# duality transform
# ---------------------------------------------------------------------------


def test_dualize_hand_example():
    t = MatrixTuple(np.diag([2.0, 0.5])[None])
    res = dualize(t, 1.0)
    assert np.allclose(res.tuple.mats[0], np.diag([0.5, 2.0]), rtol=1e-12)
    assert res.s_dual == pytest.approx(1.0)
    assert svf(res.tuple.mats[0], 1.0) == pytest.approx(svf(t.mats[0], 1.0))


def test_dualize_orthogonal_is_fixed():
    q = rotation(0.9)
    res = dualize(MatrixTuple(q[None]), 1.0)
    assert np.allclose(res.tuple.mats[0], q, atol=1e-12)


def test_dualize_entrywise_formula():
    rng = np.random.default_rng(10)
    for _ in range(10):
        a = random_invertible(rng, 3)
        s = float(rng.uniform(0.2, 2.8))
        res = dualize(MatrixTuple(a[None]), s)
        expect = abs(np.linalg.det(a)) ** (1.0 / (3 - s)) * np.linalg.inv(a).T
        assert np.allclose(res.tuple.mats[0], expect, rtol=1e-12)


def test_dualize_word_identity():
    rng = np.random.default_rng(11)
    for trial in range(10):
        d = 3
        t = random_tuple(rng, d, 2)
        s = float(rng.uniform(0.3, d - 0.3))
        dual = dualize(t, s)
        for _ in range(6):
            w = random_word(rng, 2, 6)
            lhs = eval_potential(SVF(d - s), dual.tuple, w)
            rhs = eval_potential(SVF(s), t, w)
            assert lhs == pytest.approx(rhs, abs=1e-8)


def test_dualize_involution():
    rng = np.random.default_rng(12)
    for _ in range(10):
        d = 3
        t = random_tuple(rng, d, 2)
        s = float(rng.uniform(0.3, d - 0.3))
        back = dualize(dualize(t, s).tuple, d - s)
        assert np.allclose(back.tuple.mats, t.mats, atol=1e-8 * np.abs(t.mats).max())


def test_dualize_range_errors():
    t = MatrixTuple(np.eye(2)[None])
    with pytest.raises(InputError):
        dualize(t, 0.0)
    with pytest.raises(InputError):
        dualize(t, 2.0)


# ---------------------------------------------------------------------------
# log-domain svf helper
# ---------------------------------------------------------------------------


def test_log_svf_from_log_alphas_matches_linear_domain():
    rng = np.random.default_rng(13)
    for _ in range(20):
        a = random_invertible(rng, 4)
        la = np.log(np.linalg.svd(a, compute_uv=False))
        for s in rng.uniform(0.0, 5.0, size=5):
            got = log_svf_from_log_alphas(la, float(s))
            assert got == pytest.approx(math.log(svf(a, float(s))), abs=1e-9)
