import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import avcstein as av
from avcstein.divergence import kl, cond_kl, mutual_info, phi_t, kl_joint_to_channel

# manual reference implementations kept deliberately tiny


def ref_kl(p, q):
    total = 0.0
    for a, b in zip(p, q):
        if a > 0:
            if b <= 0:
                return math.inf
            total += a * math.log(a / b)
    return total


def simplex(rng, k):
    v = rng.dirichlet(np.ones(k))
    return v / v.sum()


# ---------------------------------------------------------------------------
# kl
# ---------------------------------------------------------------------------


def test_kl_golden_bsc_rows():
    p = np.array([0.9, 0.1])
    q = np.array([0.7, 0.3])
    assert kl(p, q) == pytest.approx(0.1163217565860046, abs=1e-15)


def test_kl_matches_reference_on_seeded_draws():
    rng = np.random.default_rng(42)
    for _ in range(200):
        k = rng.integers(2, 6)
        p, q = simplex(rng, k), simplex(rng, k)
        assert kl(p, q) == pytest.approx(ref_kl(p, q), abs=1e-12)


def test_kl_zero_iff_equal():
    p = np.array([0.3, 0.7])
    assert kl(p, p) == 0.0
    assert kl(p, np.array([0.31, 0.69])) > 0


def test_kl_infinite_on_support_mismatch():
    assert kl(np.array([0.5, 0.5]), np.array([1.0, 0.0])) == math.inf
    # q may have extra support without penalty
    assert math.isfinite(kl(np.array([1.0, 0.0]), np.array([0.5, 0.5])))


def test_kl_rejects_mismatched_alphabets():
    a = av.Distribution(("x", "y"), np.array([0.5, 0.5]))
    b = av.Distribution(("u", "v"), np.array([0.5, 0.5]))
    with pytest.raises(av.PairValidationError):
        kl(a, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kl_nonnegative_property(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 7))
    p, q = simplex(rng, k), simplex(rng, k)
    assert kl(p, q) >= -1e-15


# ---------------------------------------------------------------------------
# conditional divergence
# ---------------------------------------------------------------------------


def test_cond_kl_is_px_weighted_row_kl():
    rng = np.random.default_rng(7)
    w = np.stack([simplex(rng, 3) for _ in range(2)])
    wb = np.stack([simplex(rng, 3) for _ in range(2)])
    px = np.array([0.25, 0.75])
    want = 0.25 * ref_kl(w[0], wb[0]) + 0.75 * ref_kl(w[1], wb[1])
    assert cond_kl(w, wb, px) == pytest.approx(want, abs=1e-12)


def test_cond_kl_skips_zero_mass_inputs():
    w = np.array([[1.0, 0.0], [0.5, 0.5]])
    wb = np.array([[0.0, 1.0], [0.5, 0.5]])
    # the infinite row carries no input mass
    assert cond_kl(w, wb, np.array([0.0, 1.0])) == 0.0
    assert cond_kl(w, wb, np.array([0.5, 0.5])) == math.inf


# ---------------------------------------------------------------------------
# phi_t
# ---------------------------------------------------------------------------


def test_phi_t_zero_at_t0():
    rng = np.random.default_rng(3)
    w = np.stack([simplex(rng, 3) for _ in range(2)])
    wb = np.stack([simplex(rng, 3) for _ in range(2)])
    assert phi_t(w, wb, np.array([0.5, 0.5]), 0.0) == pytest.approx(0.0, abs=1e-14)


def test_phi_t_matches_manual_sum():
    w = np.array([[0.9, 0.1], [0.1, 0.9]])
    wb = np.array([[0.7, 0.3], [0.3, 0.7]])
    px = np.array([0.5, 0.5])
    t = -0.5
    manual = math.log(
        sum(
            px[x] * sum(w[x, y] ** (1 - t) * wb[x, y] ** t for y in range(2))
            for x in range(2)
        )
    )
    assert phi_t(w, wb, px, t) == pytest.approx(manual, abs=1e-14)


def test_phi_t_infinite_when_alt_support_missing():
    w = np.array([[0.5, 0.5]])
    wb = np.array([[1.0, 0.0]])
    assert phi_t(w, wb, np.array([1.0]), -0.1) == math.inf


def test_phi_t_rejects_t_ge_1():
    w = np.array([[0.5, 0.5]])
    with pytest.raises(ValueError):
        phi_t(w, w, np.array([1.0]), 1.0)


# ---------------------------------------------------------------------------
# mutual information on joint tensors
# ---------------------------------------------------------------------------


def test_mutual_info_product_is_zero():
    p = np.outer([0.3, 0.7], [0.6, 0.4])
    assert mutual_info(p, 0, 1) == pytest.approx(0.0, abs=1e-14)


def test_mutual_info_perfect_copy_is_entropy():
    p = np.diag([0.5, 0.5])
    assert mutual_info(p, 0, 1) == pytest.approx(math.log(2), abs=1e-14)


def test_mutual_info_conditional_chain():
    rng = np.random.default_rng(11)
    joint = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
    # I(A;B,C) = I(A;C) + I(A;B|C)
    lhs = mutual_info(joint, 0, (1, 2))
    rhs = mutual_info(joint, 0, 2) + mutual_info(joint, 0, 1, given=(2,))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_kl_joint_to_channel_factorized_input():
    rng = np.random.default_rng(13)
    w = np.stack([simplex(rng, 2) for _ in range(2)])
    px = np.array([0.4, 0.6])
    joint = px[:, None] * w
    # a joint that already factorizes through the kernel has zero divergence
    assert kl_joint_to_channel(joint[:, None, :], w[None], (0,), (1,), (2,)) == (
        pytest.approx(0.0, abs=1e-14)
    )
