"""Slack scoring, certified triples, and the feasibility search."""

import math

import numpy as np
import pytest

from avcstein.errors import AvcsteinError, PairValidationError
from avcstein.eta import (
    EtaTriple,
    FiveWayJoint,
    NoViolationFound,
    ViolationFound,
    eta_certified_from_gaps,
    eta_feasibility_check,
    eta_slack,
    pvt_lower_bound,
)

UNIFORM2 = np.array([0.5, 0.5])
BSC_D = 0.1163217565860046


# ---------------------------------------------------------------- containers


def test_triple_requires_positive_entries():
    with pytest.raises(PairValidationError):
        EtaTriple(0.0, 0.01, 0.01, 0.01)
    with pytest.raises(PairValidationError):
        EtaTriple(0.01, 0.01, 0.01, -0.001)


def test_joint_validates_shape_and_margins():
    with pytest.raises(PairValidationError):
        FiveWayJoint(np.ones((2, 2, 1, 2)) / 8, UNIFORM2)
    bad = np.zeros((2, 2, 1, 1, 2))
    bad[0, 0, 0, 0, 0] = 1.0
    with pytest.raises(PairValidationError):
        FiveWayJoint(bad, UNIFORM2)
    neg = np.full((2, 2, 1, 1, 2), 0.125)
    neg[0, 0, 0, 0, 0] = -0.1
    neg[0, 0, 0, 0, 1] = 0.35
    with pytest.raises(PairValidationError):
        FiveWayJoint(neg, UNIFORM2)


def test_off_diagonal_mass():
    diag = np.zeros((2, 2, 1, 1, 2))
    diag[0, 0, 0, 0, 0] = 0.5
    diag[1, 1, 0, 0, 0] = 0.5
    assert FiveWayJoint(diag, UNIFORM2).off_diagonal_mass == pytest.approx(0.0)
    mixed = np.full((2, 2, 1, 1, 2), 0.125)
    assert FiveWayJoint(mixed, UNIFORM2).off_diagonal_mass == pytest.approx(0.5)


# ------------------------------------------------------------- slack scoring


def test_slack_on_diagonal_joint_matches_hand_margins(bsc):
    # X = X', singleton states, the channel output follows the h0 rows: the
    # only nonzero margin is the divergence to the h1 rows.
    W0 = bsc.h0.tensor
    J = np.zeros((2, 2, 1, 1, 2))
    for x in range(2):
        J[x, x, 0, 0, :] = 0.5 * W0[0, x, :]
    joint = FiveWayJoint(J, UNIFORM2)
    triple = EtaTriple(0.01, 0.01, 0.03, 0.001)
    assert eta_slack(bsc, joint, triple) == pytest.approx(BSC_D - 0.01, abs=1e-12)


def test_slack_includes_coupling_terms_off_diagonal(bsc):
    # Independent X, X' with the output still tied to X alone. The binding
    # margin is now the reverse-channel check: Y given X' is an even coin,
    # and its divergence to a 0.9/0.1 row is ln 5 - (ln 9) / 2.
    W0 = bsc.h0.tensor
    J = np.zeros((2, 2, 1, 1, 2))
    for x in range(2):
        for xp in range(2):
            J[x, xp, 0, 0, :] = 0.25 * W0[0, x, :]
    joint = FiveWayJoint(J, UNIFORM2)
    triple = EtaTriple(0.01, 0.01, 0.03, 0.001)
    expected = math.log(5.0) - 0.5 * math.log(9.0) - 0.001
    assert eta_slack(bsc, joint, triple) == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------- certified triple


def test_certified_triple_on_bec(bec):
    tri = eta_certified_from_gaps(bec, UNIFORM2)
    a = 0.00013951250943005543
    assert tri.eta1 == pytest.approx(a, rel=1e-10)
    assert tri.eta2 == pytest.approx(a, rel=1e-10)
    assert tri.eta3 == pytest.approx(3.0 * a, rel=1e-10)
    assert tri.delta == pytest.approx(a / 10.0, rel=1e-10)


def test_certified_triple_rejects_closed_gaps(sep):
    with pytest.raises(AvcsteinError):
        eta_certified_from_gaps(sep, UNIFORM2)


def test_certified_triple_rejects_partial_support(bec):
    with pytest.raises(AvcsteinError):
        eta_certified_from_gaps(bec, np.array([1.0, 0.0]))


# --------------------------------------------------------- feasibility check


def test_sep_violation_found_and_recomputes_negative(sep):
    triple = EtaTriple(0.01, 0.01, 0.01, 0.01)
    res = eta_feasibility_check(sep, UNIFORM2, triple, restarts=50, seed=0)
    assert isinstance(res, ViolationFound)
    assert res.slack < 0
    # independent rescoring of the returned joint stays negative
    assert eta_slack(sep, res.joint, triple) == pytest.approx(res.slack, abs=1e-12)
    assert eta_slack(sep, res.joint, triple) < 0


def test_bec_certified_triple_has_no_violation(bec):
    tri = eta_certified_from_gaps(bec, UNIFORM2)
    res = eta_feasibility_check(bec, UNIFORM2, tri, restarts=10, seed=0)
    assert isinstance(res, NoViolationFound)
    assert res.min_slack == pytest.approx(0.05251979240883898, rel=1e-6)
    assert res.min_slack > 0


# ---------------------------------------------------------------- lower bound


def test_lower_bound_sep_is_zero_with_reason(sep):
    value, record = pvt_lower_bound(sep)
    assert value == 0.0
    assert record["reason"] == "trans-symmetrizable"


def test_lower_bound_bec_is_certified(bec):
    value, record = pvt_lower_bound(bec)
    assert record["reason"] == "certified"
    assert value == pytest.approx(0.00013951250943005543, rel=1e-10)
    assert value > 0
