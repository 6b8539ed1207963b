import math

import numpy as np
import pytest

import avcstein as av
from avcstein import (
    d_opt_det,
    d_opt_shared,
    d_pvt_block,
    d_pvt_iid,
    min_kl_over_hulls,
    phi_star_shared,
    strong_converse_curve,
    weak_converse_bound,
)
from avcstein.divergence import kl
from avcstein.report import builtin_example
from avcstein import oracles

BSC_D = 0.11632175658600465  # kl(bsc(0.1) || bsc(0.3)) row divergence

# ---------------------------------------------------------------------------
# frozen values on the named examples
# ---------------------------------------------------------------------------


def test_bsc_exponents_all_collapse_to_row_kl(bsc):
    sh = d_opt_shared(bsc, restarts=8)
    det = d_opt_det(bsc)
    pvt = d_pvt_iid(bsc, restarts=8)
    assert sh.value == pytest.approx(BSC_D, abs=1e-9)
    assert det.value == pytest.approx(BSC_D, abs=1e-9)
    assert pvt.value == pytest.approx(BSC_D, abs=1e-9)
    assert sh.converged


def test_bec_shared_golden(bec):
    sol = d_opt_shared(bec, restarts=8)
    assert sol.value == pytest.approx(0.06676569631226131, abs=1e-8)
    assert not sol.unbounded_suspect


def test_bec_private_iid_vanishes(bec):
    assert d_pvt_iid(bec, restarts=8).value <= 1e-6


def test_bec_block_two_golden(bec):
    pb = av.Distribution(("00", "01", "10", "11"), np.array([0.5, 0.0, 0.0, 0.5]))
    sol = d_pvt_block(bec, pb, k=2)
    assert sol.value == pytest.approx(0.051909841194627104, rel=1e-6)
    # the optimal super-state attack splits evenly between the two
    # constant state strings
    probs = dict(zip(sol.mu_star.labels, sol.mu_star.probs))
    assert probs["00"] == pytest.approx(0.5, abs=1e-3)
    assert probs["11"] == pytest.approx(0.5, abs=1e-3)
    # the reported value is the raw divergence of the induced super laws
    q0 = np.einsum(
        "x,sxy->y",
        pb.probs,
        sol.pair_ext.h0.tensor,
    )
    mixed = np.einsum("s,sxy->xy", sol.mu_star.probs, sol.pair_ext.h1.tensor)
    q1 = pb.probs @ mixed
    assert sol.value == pytest.approx(kl(q0, q1), abs=1e-9)


def test_bec_adaptive_two_golden(bec):
    pb = av.Distribution(("00", "01", "10", "11"), np.array([0.5, 0.0, 0.0, 0.5]))
    sol = d_pvt_block(bec, pb, k=2, extension="adaptive2")
    assert sol.value == pytest.approx(0.02461001820346942, rel=1e-5)
    assert sol.pair_ext.h1.n_states == 16


def test_sep_deterministic_and_shared(sep):
    assert d_opt_det(sep).value <= 1e-8
    sol = d_opt_shared(sep, restarts=8)
    assert sol.value > 0.01
    assert sol.unbounded_suspect  # H0 support never covered, value floored


def test_phi_star_golden(bsc):
    sol = phi_star_shared(bsc, -1.0, restarts=8)
    assert sol.value == pytest.approx(0.17435338714477794, abs=1e-8)


def test_min_kl_over_hulls_bec_uniform(bec):
    unif = av.Distribution(("0", "1"), np.array([0.5, 0.5]))
    value, lam, mu = min_kl_over_hulls(bec, unif)
    assert value == pytest.approx(0.06676569631226131, abs=1e-7)
    assert np.allclose(mu, [0.5, 0.5], atol=1e-3)


# ---------------------------------------------------------------------------
# independent oracle spot checks
# ---------------------------------------------------------------------------


def test_solvers_match_grid_oracle_on_spot_pairs():
    for seed in (21, 22, 23):
        pair = builtin_example("random", seed=seed, nx=2, ny=2, ns0=2, ns1=2)
        assert d_opt_det(pair, max_iter=10000).value == pytest.approx(
            oracles.oracle_d_opt_det(pair), abs=2e-3
        )
        assert d_opt_shared(pair, restarts=6).value == pytest.approx(
            oracles.oracle_d_opt_shared(pair), abs=2e-3
        )
        assert d_pvt_iid(pair, restarts=6).value == pytest.approx(
            oracles.oracle_d_pvt_iid(pair), abs=2e-3
        )


# ---------------------------------------------------------------------------
# orderings and structural relations
# ---------------------------------------------------------------------------


def test_setting_ordering_on_spot_pairs():
    for seed in (31, 32, 33, 34):
        pair = builtin_example("random", seed=seed, nx=2, ny=3, ns0=2, ns1=2)
        det = d_opt_det(pair, max_iter=10000).value
        pvt = d_pvt_iid(pair, restarts=6).value
        sh = d_opt_shared(pair, restarts=6).value
        assert det <= pvt + 1e-6
        assert pvt <= sh + 1e-6


def test_intersecting_hulls_give_certificate_zero():
    # h1 hull contains h0 by construction: h1 = {h0 kernel, another}
    base = builtin_example("bsc", p0=0.2, p1=0.2)
    other = builtin_example("bsc", p0=0.2, p1=0.4)
    h1 = av.StateChannelFamily(
        ("a", "b"),
        base.input_labels,
        base.output_labels,
        np.stack([base.h0.tensor[0], other.h1.tensor[0]]),
    )
    pair = av.HypothesisPair(base.input_labels, base.output_labels, base.h0, h1)
    sol = d_opt_shared(pair)
    assert sol.value == 0.0
    assert sol.meta.get("certificate") == "hull-intersection"
    assert d_pvt_iid(pair).value == 0.0


def test_block_beats_single_letter_on_bec(bec):
    pb = av.Distribution(("00", "01", "10", "11"), np.array([0.5, 0.0, 0.0, 0.5]))
    per_letter = d_pvt_block(bec, pb, k=2).value / 2
    assert per_letter > d_pvt_iid(bec, restarts=6).value + 1e-3


def test_block_input_must_cover_extended_alphabet(bec):
    bad = av.Distribution(("00", "11"), np.array([0.5, 0.5]))
    with pytest.raises(av.PairValidationError):
        d_pvt_block(bec, bad, k=2)


# ---------------------------------------------------------------------------
# strong converse pieces
# ---------------------------------------------------------------------------


def test_phi_slope_approaches_shared_exponent(bsc):
    sol = phi_star_shared(bsc, -1e-4, restarts=8)
    assert sol.value / 1e-4 == pytest.approx(BSC_D, abs=1e-3)


def test_phi_star_requires_negative_t(bsc):
    with pytest.raises(ValueError):
        phi_star_shared(bsc, 0.0)


def test_strong_converse_positive_above_capacity(bsc):
    curve = strong_converse_curve(bsc, BSC_D + 0.05, (-0.25, -0.5, -1.0, -2.0))
    assert curve.bound > 0
    assert len(curve.points) == 4
    for p in curve.points:
        assert p.slope == pytest.approx(p.phi_star / (-p.t), abs=1e-12)


def test_strong_converse_nonpositive_below_capacity(bsc):
    curve = strong_converse_curve(bsc, BSC_D - 0.05, (-0.25, -0.5, -1.0))
    assert curve.bound <= 1e-9


def test_weak_converse_bound_golden():
    assert weak_converse_bound(BSC_D, 0.05) == pytest.approx(
        0.12244395430105748, abs=1e-12
    )
    with pytest.raises(ValueError):
        weak_converse_bound(0.1, 1.0)
    with pytest.raises(ValueError):
        weak_converse_bound(0.1, 0.0)
