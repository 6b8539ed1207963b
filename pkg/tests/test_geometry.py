import numpy as np
import pytest

import avcstein as av
from avcstein import hull_gap, hulls_intersect, is_trans_symmetrizable, transsym_gap
from avcstein.report import builtin_example

# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------


def test_sep_hull_gap_is_half(sep):
    cert = hull_gap(sep)
    assert cert.gap == pytest.approx(0.5, abs=1e-9)
    assert not hulls_intersect(sep)


def test_sep_transsym_gap_zero_with_identity_witnesses(sep):
    cert = transsym_gap(sep)
    assert cert.gap <= 1e-10
    assert is_trans_symmetrizable(sep)
    # conditioning the state on the input as a copy achieves the symmetry
    assert np.allclose(cert.witness_h0, np.eye(2), atol=1e-8)
    assert np.allclose(cert.witness_h1, np.eye(2), atol=1e-8)


def test_bec_gaps_positive(bec):
    assert hull_gap(bec).gap > 1e-3
    assert transsym_gap(bec).gap > 1e-3
    assert not is_trans_symmetrizable(bec)


def test_identical_families_intersect_but_need_not_symmetrize(bsc):
    twin = av.HypothesisPair(
        bsc.input_labels, bsc.output_labels, bsc.h0, bsc.h0, name="twin"
    )
    assert hull_gap(twin).gap <= 1e-10
    assert hulls_intersect(twin)
    # symmetrizing additionally demands input independence; a BSC(0.1)
    # cannot mimic its own swapped-word attack, and the residual is the
    # row difference |0.9 - 0.1|
    assert transsym_gap(twin).gap == pytest.approx(0.8, abs=1e-9)


# ---------------------------------------------------------------------------
# witness identities
# ---------------------------------------------------------------------------


def test_hull_witness_achieves_the_gap():
    pair = builtin_example("random", seed=5, nx=2, ny=3, ns0=2, ns1=2)
    cert = hull_gap(pair)
    mixed0 = np.einsum("s,sxy->xy", cert.witness_h0, pair.h0.tensor)
    mixed1 = np.einsum("s,sxy->xy", cert.witness_h1, pair.h1.tensor)
    assert float(np.abs(mixed0 - mixed1).max()) == pytest.approx(cert.gap, abs=1e-8)


def test_transsym_witness_achieves_the_gap():
    pair = builtin_example("random", seed=6, nx=2, ny=2, ns0=2, ns1=3)
    cert = transsym_gap(pair)
    t0 = np.einsum("xs,sqy->xqy", cert.witness_h0, pair.h0.tensor)
    t1 = np.einsum("qs,sxy->xqy", cert.witness_h1, pair.h1.tensor)
    assert float(np.abs(t0 - t1).max()) == pytest.approx(cert.gap, abs=1e-8)


def test_transsym_mimicry_swaps_word_roles(sep):
    # with the witness kernels, attacking word pairs under either hypothesis
    # induces the same output law once the word roles are exchanged
    cert = transsym_gap(sep)
    u, v = cert.witness_h0, cert.witness_h1
    w0, w1 = sep.h0.tensor, sep.h1.tensor
    # transmit x, attack with the other word xt
    for x in range(2):
        for xt in range(2):
            law0 = sum(u[xt, s] * w0[s, x] for s in range(2))
            law1 = sum(v[x, sb] * w1[sb, xt] for sb in range(2))
            assert np.allclose(law0, law1, atol=1e-8)


# ---------------------------------------------------------------------------
# structural invariances
# ---------------------------------------------------------------------------


def test_single_input_gaps_coincide():
    # with one input there is no conditioning, so both distances agree
    pair = builtin_example("random", seed=8, nx=1, ny=3, ns0=2, ns1=3)
    assert hull_gap(pair).gap == pytest.approx(transsym_gap(pair).gap, abs=1e-8)


def test_gap_invariant_under_state_permutation(bec):
    perm = av.StateChannelFamily(
        ("1", "0"),
        bec.input_labels,
        bec.output_labels,
        bec.h1.tensor[::-1].copy(),
    )
    shuffled = av.HypothesisPair(
        bec.input_labels, bec.output_labels, bec.h0, perm, name="bec-perm"
    )
    assert hull_gap(shuffled).gap == pytest.approx(hull_gap(bec).gap, abs=1e-10)
    assert transsym_gap(shuffled).gap == pytest.approx(
        transsym_gap(bec).gap, abs=1e-10
    )


def test_gap_invariant_under_output_permutation(bec):
    order = [2, 0, 1]
    relabeled = av.HypothesisPair(
        bec.input_labels,
        tuple(bec.output_labels[i] for i in order),
        av.StateChannelFamily(
            bec.h0.states, bec.input_labels,
            tuple(bec.output_labels[i] for i in order),
            bec.h0.tensor[:, :, order].copy(),
        ),
        av.StateChannelFamily(
            bec.h1.states, bec.input_labels,
            tuple(bec.output_labels[i] for i in order),
            bec.h1.tensor[:, :, order].copy(),
        ),
        name="bec-relabel",
    )
    assert hull_gap(relabeled).gap == pytest.approx(hull_gap(bec).gap, abs=1e-10)


def test_witnesses_are_proper_conditionals():
    for seed in range(20):
        pair = builtin_example("random", seed=100 + seed, nx=2, ny=2, ns0=3, ns1=2)
        cert = transsym_gap(pair)
        assert np.all(cert.witness_h0 >= -1e-10)
        assert np.allclose(cert.witness_h0.sum(axis=1), 1.0, atol=1e-8)
        assert np.all(cert.witness_h1 >= -1e-10)
        assert np.allclose(cert.witness_h1.sum(axis=1), 1.0, atol=1e-8)
