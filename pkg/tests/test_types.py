"""Joint types, the exhaustive detector, and codebook count checks."""

import itertools
import math

import numpy as np
import pytest

from avcstein.errors import BudgetExceededError, CodebookError, PairValidationError
from avcstein.eta import EtaTriple
from avcstein.report import builtin_example
from avcstein.types_tools import (
    Codebook,
    detector_events,
    generate_codebook,
    joint_type,
    types_detector,
    verify_codebook,
)

RATE4 = math.log(4.0) / 6.0


# ----------------------------------------------------------------- joint type


def test_joint_type_counts_by_hand():
    jt = joint_type(["0101", "0011"], [("0", "1"), ("0", "1")])
    assert jt.n == 4
    assert jt.counts.tolist() == [[1, 1], [1, 1]]
    three = joint_type(["00", "01", "11"], [("0", "1")] * 3)
    assert three.counts[0, 0, 1] == 1
    assert three.counts[0, 1, 1] == 1
    assert three.counts.sum() == 2


def test_joint_type_marginal_and_distribution():
    jt = joint_type(["0011", "0101"], [("0", "1"), ("0", "1")])
    assert jt.distribution.sum() == pytest.approx(1.0)
    m = jt.marginal((0,))
    assert m.counts.tolist() == [2, 2]
    assert m.alphabets == (("0", "1"),)


def test_joint_type_rejects_bad_input():
    with pytest.raises(PairValidationError):
        joint_type(["01", "0"], [("0", "1"), ("0", "1")])
    with pytest.raises(PairValidationError):
        joint_type(["", ""], [("0", "1"), ("0", "1")])
    with pytest.raises(PairValidationError):
        joint_type(["02"], [("0", "1")])
    with pytest.raises(PairValidationError):
        joint_type(["01"], [("0", "1"), ("0", "1")])


# -------------------------------------------------- independent detector oracle

MARGIN = 1e-12


def _emp_counts(rows):
    out = {}
    for tup in zip(*rows):
        out[tup] = out.get(tup, 0) + 1
    return out


def _info_xs(counts, n):
    pxs, px, ps = {}, {}, {}
    for (x, s, _), c in counts.items():
        pxs[(x, s)] = pxs.get((x, s), 0) + c
        px[x] = px.get(x, 0) + c
        ps[s] = ps.get(s, 0) + c
    total = 0.0
    for (x, s), c in pxs.items():
        total += (c / n) * math.log(c * n / (px[x] * ps[s]))
    return max(total, 0.0)


def _div_to_family(counts, n, W):
    pxs = {}
    for (x, s, _), c in counts.items():
        pxs[(x, s)] = pxs.get((x, s), 0) + c
    total = 0.0
    for (x, s, y), c in counts.items():
        w = W[s, x, y]
        if w <= 0:
            return math.inf
        total += (c / n) * math.log(c / (pxs[(x, s)] * w))
    return max(total, 0.0)


def _coupling(xi, sb, xj, y, n):
    full, p_sb, xp_sb, xy_sb = {}, {}, {}, {}
    for tup in zip(xi, sb, xj, y):
        x, s, xp, yy = tup
        full[tup] = full.get(tup, 0) + 1
        p_sb[s] = p_sb.get(s, 0) + 1
        xp_sb[(xp, s)] = xp_sb.get((xp, s), 0) + 1
        xy_sb[(x, yy, s)] = xy_sb.get((x, yy, s), 0) + 1
    total = 0.0
    for (x, s, xp, yy), c in full.items():
        total += (c / n) * math.log(
            c * p_sb[s] / (xp_sb[(xp, s)] * xy_sb[(x, yy, s)])
        )
    return max(total, 0.0)


def brute_detector(pair, cb, y, triple):
    """Dict-based re-derivation enumerating raw state strings."""
    n = cb.n
    y_idx = [pair.output_labels.index(sym) for sym in y]
    words = [[pair.input_labels.index(sym) for sym in w] for w in cb.codewords]
    ns, nsb = pair.h0.n_states, pair.h1.n_states
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    premise = []
    for j, xj in enumerate(words):
        for s in itertools.product(range(ns), repeat=n):
            counts = _emp_counts((xj, s, y_idx))
            if (_info_xs(counts, n) < triple.delta - MARGIN
                    and _div_to_family(counts, n, W0) < triple.delta - MARGIN):
                premise.append(j)
                break
    for xi in words:
        for sb in itertools.product(range(nsb), repeat=n):
            counts = _emp_counts((xi, sb, y_idx))
            if not (_info_xs(counts, n) < triple.eta1 - MARGIN
                    and _div_to_family(counts, n, W1) < triple.eta2 - MARGIN):
                continue
            if all(_coupling(xi, sb, words[j], y_idx, n) < triple.eta3 - MARGIN
                   for j in premise):
                return "H1"
    return "H0"


def test_detector_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(0)
    verdicts = {"H0": 0, "H1": 0}
    for trial in range(40):
        ns0 = int(rng.integers(1, 3))
        ns1 = int(rng.integers(1, 3))
        pair = builtin_example(
            "random", seed=20_000 + trial, nx=2, ny=2, ns0=ns0, ns1=ns1
        )
        n = 8
        base = [lab for lab, c in zip(pair.input_labels, (4, 4)) for _ in range(c)]
        N = int(rng.integers(2, 4))
        words = set()
        while len(words) < N:
            words.add(tuple(rng.permutation(base)))
        cb = Codebook(
            n=n,
            input_labels=pair.input_labels,
            codewords=tuple(sorted(words)),
            rate=math.log(N) / n,
            epsilon=0.1,
        )
        y = tuple(pair.output_labels[v] for v in rng.integers(0, 2, size=n))
        triple = EtaTriple(*(float(v) for v in rng.uniform(0.02, 0.5, size=4)))
        got = types_detector(pair, cb, y, triple)
        assert got == brute_detector(pair, cb, y, triple)
        verdicts[got] += 1
    assert verdicts["H0"] > 0 and verdicts["H1"] > 0


# -------------------------------------------------------------- error events


@pytest.fixture(scope="module")
def event_setup(bsc):
    cb = Codebook(
        n=8,
        input_labels=("0", "1"),
        codewords=(tuple("00001111"), tuple("11110000")),
        rate=math.log(2.0) / 8.0,
        epsilon=0.1,
    )
    sbar = tuple(bsc.h1.states[0] for _ in range(8))
    y = tuple("01001110")  # one flip in each half of the first word
    return cb, sbar, y


def test_events_all_clear_with_tolerant_triple(bsc, event_setup):
    cb, sbar, y = event_setup
    # empirical divergence of the flip pattern: to the h1 rows 0.00616,
    # to the h0 rows 0.0923, so delta = 0.05 keeps the premise empty
    flags = detector_events(bsc, cb, 0, sbar, y, EtaTriple(0.5, 0.05, 0.5, 0.05))
    assert flags == {"E1": False, "E2": False, "E3": False, "E4": False}


def test_events_tight_divergence_raises_e2(bsc, event_setup):
    cb, sbar, y = event_setup
    flags = detector_events(bsc, cb, 0, sbar, y, EtaTriple(0.5, 0.001, 0.5, 0.05))
    assert flags["E2"] and not flags["E1"] and not flags["E3"] and not flags["E4"]


def test_events_loose_premise_raises_e3_and_e4(bsc, event_setup):
    cb, sbar, y = event_setup
    # delta = 5 admits both words under the h0 family; the second word is
    # the complement of the first, so the coupling information is ln 2
    flags = detector_events(bsc, cb, 0, sbar, y, EtaTriple(0.5, 0.05, 0.5, 5.0))
    assert flags == {"E1": False, "E2": False, "E3": True, "E4": True}
    above = detector_events(bsc, cb, 0, sbar, y, EtaTriple(0.5, 0.05, 0.8, 5.0))
    assert above == {"E1": False, "E2": False, "E3": False, "E4": True}


# ----------------------------------------------------------------- codebooks


def test_generate_codebook_golden(bsc):
    cb = generate_codebook(
        bsc, np.array([0.5, 0.5]), n=6, rate=RATE4, epsilon=0.2, seed=7
    )
    assert ["".join(w) for w in cb.codewords] == [
        "100101", "101010", "101100", "101001",
    ]
    assert cb.attempts == 1
    assert cb.size == 4
    assert cb.composition.probs.tolist() == [0.5, 0.5]
    check = verify_codebook(bsc, cb, mode="exhaustive")
    assert check.passed
    assert check.worst_ratio == pytest.approx(0.9035826357366061, rel=1e-9)
    assert check.checks == 262


def test_generate_codebook_is_deterministic(bsc):
    kw = dict(n=6, rate=RATE4, epsilon=0.2)
    a = generate_codebook(bsc, np.array([0.5, 0.5]), seed=7, **kw)
    b = generate_codebook(bsc, np.array([0.5, 0.5]), seed=7, **kw)
    c = generate_codebook(bsc, np.array([0.5, 0.5]), seed=8, **kw)
    assert a.codewords == b.codewords
    assert a.codewords != c.codewords


def test_spot_check_agrees_on_small_space(bsc):
    cb = generate_codebook(
        bsc, np.array([0.5, 0.5]), n=6, rate=RATE4, epsilon=0.2, seed=7
    )
    spot = verify_codebook(bsc, cb, mode="spot", seed=3, samples=100)
    assert spot.passed
    assert spot.worst_ratio == pytest.approx(0.9035826357366061, rel=1e-9)
    with pytest.raises(PairValidationError):
        verify_codebook(bsc, cb, mode="full")


def test_generation_failure_carries_best_report(bec):
    with pytest.raises(CodebookError) as exc:
        generate_codebook(
            bec, np.array([0.5, 0.5]), n=6, rate=RATE4, epsilon=0.1,
            seed=7, max_attempts=3,
        )
    report = exc.value.report
    assert report is not None
    assert not report.passed
    assert report.worst_ratio > 1.0


def test_budget_errors(bsc):
    cb = generate_codebook(
        bsc, np.array([0.5, 0.5]), n=6, rate=RATE4, epsilon=0.2, seed=7
    )
    with pytest.raises(BudgetExceededError):
        verify_codebook(bsc, cb, mode="exhaustive", budget=10)
    with pytest.raises(BudgetExceededError):
        types_detector(bsc, cb, tuple("010101"), EtaTriple(0.1, 0.1, 0.1, 0.1),
                       budget=3)


def test_generation_input_validation(bsc):
    with pytest.raises(PairValidationError):
        generate_codebook(bsc, np.array([0.5, 0.5]), n=5, rate=math.log(2) / 5,
                          epsilon=0.1, seed=0)
    with pytest.raises(PairValidationError):
        generate_codebook(bsc, np.array([0.5, 0.5]), n=6, rate=0.05,
                          epsilon=0.2, seed=0)


def test_codebook_container_validation():
    kw = dict(n=2, input_labels=("0", "1"), rate=math.log(2) / 2, epsilon=0.1)
    with pytest.raises(PairValidationError):
        Codebook(codewords=(("0", "1"), ("0", "1", "1")), **kw)
    with pytest.raises(PairValidationError):
        Codebook(codewords=(("0", "1"),), **kw)
    with pytest.raises(PairValidationError):
        Codebook(codewords=(("0", "1"), ("1", "1")), **kw)


def test_single_codeword_edge():
    cb = Codebook(n=2, input_labels=("0", "1"), codewords=(("0", "1"),),
                  rate=0.0, epsilon=0.1)
    assert cb.size == 1
    round_trip = cb.to_dict()
    assert round_trip["codewords"] == [["0", "1"]]
    assert round_trip["n"] == 2
