import numpy as np
import pytest

import avcstein as av
from avcstein import PairValidationError
from avcstein.channels import product_labels

# ---------------------------------------------------------------------------
# distributions and kernels
# ---------------------------------------------------------------------------


def test_distribution_normalizes_and_indexes():
    d = av.Distribution(("a", "b"), np.array([0.25, 0.75]))
    assert d.index("b") == 1
    assert d.prob("a") == 0.25
    assert len(d) == 2


def test_distribution_rejects_bad_mass():
    with pytest.raises(PairValidationError):
        av.Distribution(("a", "b"), np.array([0.6, 0.6]))
    with pytest.raises(PairValidationError):
        av.Distribution(("a", "b"), np.array([-0.1, 1.1]))


def test_uniform_and_point_mass():
    u = av.Distribution.uniform(("x", "y", "z"))
    assert np.allclose(u.probs, 1 / 3)
    p = av.Distribution.point_mass(("x", "y"), "y")
    assert p.prob("y") == 1.0 and p.prob("x") == 0.0


def test_channel_rejects_bad_rows():
    with pytest.raises(PairValidationError):
        av.Channel(("0", "1"), ("0", "1"), np.array([[0.5, 0.4], [0.5, 0.5]]))


def test_family_from_kernels_matches_tensor():
    k0 = np.array([[0.9, 0.1], [0.1, 0.9]])
    k1 = np.array([[0.8, 0.2], [0.2, 0.8]])
    fam = av.StateChannelFamily.from_kernels(
        [av.Channel(("0", "1"), ("0", "1"), k0),
         av.Channel(("0", "1"), ("0", "1"), k1)],
        states=("s0", "s1"),
    )
    assert fam.n_states == 2
    assert np.allclose(fam.kernel("s1").kernel, k1)


# ---------------------------------------------------------------------------
# pair serialization
# ---------------------------------------------------------------------------


def test_pair_dict_round_trip(bec):
    doc = bec.to_dict()
    back = av.HypothesisPair.from_dict(doc)
    assert back.input_labels == bec.input_labels
    assert np.array_equal(back.h0.tensor, bec.h0.tensor)
    assert np.array_equal(back.h1.tensor, bec.h1.tensor)
    assert back.name == "bec"


def test_from_dict_missing_family_names_the_key(bec):
    doc = bec.to_dict()
    del doc["h1"]
    with pytest.raises(PairValidationError) as exc:
        av.HypothesisPair.from_dict(doc)
    assert any("h1" in e for e in exc.value.errors)


def test_validate_pair_lists_bad_rows(bec):
    doc = bec.to_dict()
    doc["h0"]["kernels"]["0"][0][0] = 0.9
    errors = av.validate_pair(doc)
    assert errors and any("sums to" in e for e in errors)


# ---------------------------------------------------------------------------
# extensions
# ---------------------------------------------------------------------------


def test_product_labels_single_char_join():
    assert product_labels(("0", "1"), 2) == ("00", "01", "10", "11")
    assert product_labels(("a", "bb"), 2) == ("a|a", "a|bb", "bb|a", "bb|bb")


def test_block_extend_kron_structure(bsc):
    ext = av.block_extend(bsc, 2)
    assert ext.nx == 4 and ext.ny == 4
    assert ext.h0.n_states == 1 and ext.h1.n_states == 1
    want = np.kron(bsc.h0.tensor[0], bsc.h0.tensor[0])
    assert np.allclose(ext.h0.tensor[0], want)


def test_block_extend_mixes_states(bec):
    ext = av.block_extend(bec, 2)
    # h1 gains all ordered state pairs
    assert ext.h1.n_states == 4
    want = np.kron(bec.h1.tensor[0], bec.h1.tensor[1])
    i = ext.h1.states.index("01")
    assert np.allclose(ext.h1.tensor[i], want)


def test_adaptive_extend_2_state_count(bec):
    ext = av.adaptive_extend_2(bec)
    # first-step state plus a map from first output to second-step state
    assert ext.h1.n_states == 2 * 2 ** len(bec.output_labels)
    assert ext.h0.n_states == 1
    assert ext.nx == 4 and ext.ny == 9


def test_block_extend_respects_alphabet_budget(bsc):
    with pytest.raises(av.BudgetExceededError):
        av.block_extend(bsc, 12, budget=1000)


# ---------------------------------------------------------------------------
# mixtures
# ---------------------------------------------------------------------------


def test_mixture_channel_averages(bec):
    w = av.Distribution(bec.h1.states, np.array([0.5, 0.5]))
    mix = av.mixture_channel(bec.h1, w)
    want = 0.5 * bec.h1.tensor[0] + 0.5 * bec.h1.tensor[1]
    assert np.allclose(mix.kernel, want)


def test_output_distribution_marginalizes(bsc):
    ch = av.mixture_channel(bsc.h0, av.Distribution(("0",), np.array([1.0])))
    px = av.Distribution(("0", "1"), np.array([0.25, 0.75]))
    out = av.output_distribution(ch, px)
    want = 0.25 * np.array([0.9, 0.1]) + 0.75 * np.array([0.1, 0.9])
    assert np.allclose(out.probs, want)
