"""Finite channel pairs whose acting kernel is picked by an adversary.

A hypothesis pair carries two families of discrete memoryless channels on a
common input/output alphabet. Under the null each letter passes through some
kernel of the first family, under the alternative through some kernel of the
second; the selecting state symbol is not observed by the detector.

Alphabets are ordered tuples of string labels. All tensors are indexed
positionally; label lookup happens only at the boundary.
"""

from __future__ import annotations

import itertools

import numpy as np

from .config import ALPHABET_BUDGET, resolve_budget
from .errors import BudgetExceededError, PairValidationError

ROW_TOL = 1e-9


def _as_labels(labels, what):
    labels = tuple(str(lab) for lab in labels)
    if not labels:
        raise PairValidationError(f"{what}: alphabet is empty")
    if len(set(labels)) != len(labels):
        raise PairValidationError(f"{what}: duplicate labels")
    return labels


def _clean_prob_vector(v, where, errors):
    """Validate one probability vector; renormalize inside tolerance only."""
    v = np.asarray(v, dtype=float).copy()
    if v.ndim != 1:
        errors.append(f"{where}: expected a vector, got shape {v.shape}")
        return v
    if np.any(v < -1e-12):
        errors.append(f"{where}: negative entry {float(v.min()):.6g}")
        return v
    s = float(v.sum())
    if not abs(s - 1.0) <= ROW_TOL:
        errors.append(f"{where}: sums to {s:.12g}, outside 1 +/- {ROW_TOL:g}")
        return v
    v = np.clip(v, 0.0, None)
    return v / v.sum()


class Distribution:
    """Probability vector over an ordered label alphabet."""

    def __init__(self, labels, probs):
        self.labels = _as_labels(labels, "distribution")
        errors = []
        probs = _clean_prob_vector(probs, "distribution", errors)
        if len(probs) != len(self.labels):
            errors.append(
                f"distribution: {len(self.labels)} labels but {len(probs)} entries"
            )
        if errors:
            raise PairValidationError(errors)
        probs.setflags(write=False)
        self.probs = probs
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    @classmethod
    def uniform(cls, labels):
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))

    @classmethod
    def point_mass(cls, labels, label):
        labels = tuple(labels)
        v = np.zeros(len(labels))
        v[labels.index(label)] = 1.0
        return cls(labels, v)

    def index(self, label):
        return self._index[label]

    def prob(self, label):
        return float(self.probs[self._index[label]])

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        inner = ", ".join(f"{l}:{p:.4g}" for l, p in zip(self.labels, self.probs))
        return f"Distribution({inner})"


class Channel:
    """Row-stochastic kernel from an input alphabet to an output alphabet."""

    def __init__(self, input_labels, output_labels, kernel):
        self.input_labels = _as_labels(input_labels, "channel inputs")
        self.output_labels = _as_labels(output_labels, "channel outputs")
        kernel = np.asarray(kernel, dtype=float).copy()
        errors = []
        if kernel.shape != (len(self.input_labels), len(self.output_labels)):
            raise PairValidationError(
                f"channel kernel shape {kernel.shape} does not match alphabets "
                f"({len(self.input_labels)}, {len(self.output_labels)})"
            )
        for i, lab in enumerate(self.input_labels):
            kernel[i] = _clean_prob_vector(kernel[i], f"row {lab!r}", errors)
        if errors:
            raise PairValidationError(errors)
        kernel.setflags(write=False)
        self.kernel = kernel

    def row(self, label):
        return Distribution(self.output_labels, self.kernel[self.input_labels.index(label)])

    def __repr__(self):
        return f"Channel({len(self.input_labels)}x{len(self.output_labels)})"


class StateChannelFamily:
    """One channel per state symbol, all over the same alphabets.

    tensor has shape (states, inputs, outputs).
    """

    def __init__(self, states, input_labels, output_labels, tensor):
        self.states = _as_labels(states, "state alphabet")
        self.input_labels = _as_labels(input_labels, "family inputs")
        self.output_labels = _as_labels(output_labels, "family outputs")
        tensor = np.asarray(tensor, dtype=float).copy()
        expect = (len(self.states), len(self.input_labels), len(self.output_labels))
        if tensor.shape != expect:
            raise PairValidationError(
                f"family tensor shape {tensor.shape}, expected {expect}"
            )
        errors = []
        for k, s in enumerate(self.states):
            for i, x in enumerate(self.input_labels):
                tensor[k, i] = _clean_prob_vector(
                    tensor[k, i], f"state {s!r} row {x!r}", errors
                )
        if errors:
            raise PairValidationError(errors)
        tensor.setflags(write=False)
        self.tensor = tensor

    @classmethod
    def from_kernels(cls, kernels, states=None):
        """Build from a list of Channels sharing alphabets."""
        chans = list(kernels)
        if states is None:
            states = tuple(str(i) for i in range(len(chans)))
        first = chans[0]
        for c in chans[1:]:
            if c.input_labels != first.input_labels or c.output_labels != first.output_labels:
                raise PairValidationError("family kernels disagree on alphabets")
        return cls(
            states,
            first.input_labels,
            first.output_labels,
            np.stack([c.kernel for c in chans]),
        )

    def kernel(self, state):
        return Channel(
            self.input_labels, self.output_labels, self.tensor[self.states.index(state)]
        )

    @property
    def n_states(self):
        return len(self.states)

    def __repr__(self):
        return f"StateChannelFamily(states={self.states})"


class HypothesisPair:
    """Null family h0 versus alternative family h1 on shared alphabets."""

    def __init__(self, input_labels, output_labels, h0, h1, name="pair"):
        self.name = str(name)
        self.input_labels = _as_labels(input_labels, "pair inputs")
        self.output_labels = _as_labels(output_labels, "pair outputs")
        self.h0 = h0
        self.h1 = h1
        errors = validate_pair(self)
        if errors:
            raise PairValidationError(errors)

    @property
    def nx(self):
        return len(self.input_labels)

    @property
    def ny(self):
        return len(self.output_labels)

    def to_dict(self):
        return {
            "name": self.name,
            "input_alphabet": list(self.input_labels),
            "output_alphabet": list(self.output_labels),
            "h0": {
                "states": list(self.h0.states),
                "kernels": {
                    s: self.h0.tensor[k].tolist() for k, s in enumerate(self.h0.states)
                },
            },
            "h1": {
                "states": list(self.h1.states),
                "kernels": {
                    s: self.h1.tensor[k].tolist() for k, s in enumerate(self.h1.states)
                },
            },
        }

    @classmethod
    def from_dict(cls, d):
        errors = _dict_errors(d)
        if errors:
            raise PairValidationError(errors)
        ins = tuple(d["input_alphabet"])
        outs = tuple(d["output_alphabet"])
        fams = {}
        for key in ("h0", "h1"):
            states = tuple(d[key]["states"])
            tensor = np.stack(
                [np.asarray(d[key]["kernels"][s], dtype=float) for s in states]
            )
            fams[key] = StateChannelFamily(states, ins, outs, tensor)
        return cls(ins, outs, fams["h0"], fams["h1"], name=d.get("name", "pair"))

    def __repr__(self):
        return (
            f"HypothesisPair({self.name!r}, |X|={self.nx}, |Y|={self.ny}, "
            f"|S|={self.h0.n_states}, |Sbar|={self.h1.n_states})"
        )


def _dict_errors(d):
    """Structural problems of a raw pair dict, without raising."""
    errors = []
    if not isinstance(d, dict):
        return [f"pair document must be an object, got {type(d).__name__}"]
    for key in ("input_alphabet", "output_alphabet", "h0", "h1"):
        if key not in d:
            errors.append(f"missing key {key!r}")
    if errors:
        return errors
    nx, ny = len(d["input_alphabet"]), len(d["output_alphabet"])
    for key in ("h0", "h1"):
        fam = d[key]
        if not isinstance(fam, dict) or "states" not in fam or "kernels" not in fam:
            errors.append(f"{key}: expected object with 'states' and 'kernels'")
            continue
        for s in fam["states"]:
            if s not in fam["kernels"]:
                errors.append(f"{key}: state {s!r} has no kernel")
                continue
            mat = np.asarray(fam["kernels"][s], dtype=float)
            if mat.shape != (nx, ny):
                errors.append(f"{key} state {s!r}: kernel shape {mat.shape} != ({nx},{ny})")
                continue
            for i, row in enumerate(mat):
                if np.any(row < -1e-12):
                    errors.append(f"{key} state {s!r} row {i}: negative entry")
                elif abs(float(row.sum()) - 1.0) > ROW_TOL:
                    errors.append(
                        f"{key} state {s!r} row {i}: sums to {float(row.sum()):.12g}"
                    )
    return errors


def validate_pair(pair):
    """List every invariant violation of a pair (or raw dict); empty = ok."""
    if isinstance(pair, dict):
        return _dict_errors(pair)
    errors = []
    for tag, fam in (("h0", pair.h0), ("h1", pair.h1)):
        if fam.input_labels != pair.input_labels:
            errors.append(f"{tag}: input alphabet mismatch")
        if fam.output_labels != pair.output_labels:
            errors.append(f"{tag}: output alphabet mismatch")
        sums = fam.tensor.sum(axis=2)
        bad = np.argwhere(np.abs(sums - 1.0) > ROW_TOL)
        for k, i in bad:
            errors.append(
                f"{tag} state {fam.states[k]!r} row {fam.input_labels[i]!r}: "
                f"sums to {sums[k, i]:.12g}"
            )
        if np.any(fam.tensor < 0):
            errors.append(f"{tag}: negative kernel entry")
    return errors


def mixture_channel(family, weights):
    """Average the family's kernels with the given state weights."""
    if isinstance(weights, Distribution):
        if weights.labels != family.states:
            raise PairValidationError("mixture weights indexed by a different state alphabet")
        w = weights.probs
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (family.n_states,):
            raise PairValidationError(
                f"mixture weights shape {w.shape} != ({family.n_states},)"
            )
    mat = np.einsum("s,sxy->xy", w, family.tensor)
    return Channel(family.input_labels, family.output_labels, mat)


def output_distribution(ch, input_dist):
    """Push an input distribution through a channel."""
    if isinstance(input_dist, Distribution):
        if input_dist.labels != ch.input_labels:
            raise PairValidationError("input distribution over a different alphabet")
        px = input_dist.probs
    else:
        px = np.asarray(input_dist, dtype=float)
        if px.shape != (len(ch.input_labels),):
            raise PairValidationError("input distribution has wrong length")
    return Distribution(ch.output_labels, px @ ch.kernel)


def product_labels(labels, k):
    """Ordered label alphabet for k-tuples (row-major product order)."""
    sep = "" if all(len(lab) == 1 for lab in labels) else "|"
    return tuple(sep.join(t) for t in itertools.product(labels, repeat=k))


def _check_alphabet_budget(sizes, budget):
    budget = resolve_budget(budget, ALPHABET_BUDGET)
    for what, size in sizes:
        if size > budget:
            raise BudgetExceededError(
                f"extended {what} alphabet would have {size} symbols, budget {budget}"
            )


def block_extend(pair, k, budget=None):
    """Memoryless k-letter extension; state weights over S^k may be any joint."""
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    k = int(k)
    if k == 1:
        return pair
    _check_alphabet_budget(
        [
            ("input", pair.nx**k),
            ("output", pair.ny**k),
            ("h0 state", pair.h0.n_states**k),
            ("h1 state", pair.h1.n_states**k),
        ],
        budget,
    )
    ins = product_labels(pair.input_labels, k)
    outs = product_labels(pair.output_labels, k)

    def extend(fam):
        states = product_labels(fam.states, k)
        mats = []
        for combo in itertools.product(range(fam.n_states), repeat=k):
            mat = np.ones((1, 1))
            for s in combo:
                mat = np.kron(mat, fam.tensor[s])
            mats.append(mat)
        return StateChannelFamily(states, ins, outs, np.stack(mats))

    return HypothesisPair(
        ins, outs, extend(pair.h0), extend(pair.h1), name=f"{pair.name}^(block{k})"
    )


def adaptive_extend_2(pair, budget=None):
    """Two-letter extension where the second state may depend on the first output.

    Extended states are pairs (s, sigma) with sigma mapping the first output
    letter to the state acting on the second letter. Both families are
    extended this way; a singleton family stays a singleton.
    """
    ny = pair.ny

    def count(fam):
        return fam.n_states * fam.n_states**ny

    _check_alphabet_budget(
        [
            ("input", pair.nx**2),
            ("output", pair.ny**2),
            ("h0 state", count(pair.h0)),
            ("h1 state", count(pair.h1)),
        ],
        budget,
    )
    ins = product_labels(pair.input_labels, 2)
    outs = product_labels(pair.output_labels, 2)

    def extend(fam):
        t = fam.tensor  # (S, X, Y)
        sep = "" if all(len(lab) == 1 for lab in fam.states) else ","
        states, mats = [], []
        for s1 in range(fam.n_states):
            for sigma in itertools.product(range(fam.n_states), repeat=ny):
                states.append(f"{fam.states[s1]}:{sep.join(fam.states[j] for j in sigma)}")
                # K[(x1,x2),(y1,y2)] = W(y1|x1,s1) * W(y2|x2,sigma(y1))
                mat = np.empty((pair.nx**2, ny**2))
                for y1 in range(ny):
                    block = np.einsum("x,zw->xzw", t[s1, :, y1], t[sigma[y1]])
                    # rows (x1,x2), columns fixed y1 with all y2
                    mat[:, y1 * ny : (y1 + 1) * ny] = block.reshape(pair.nx**2, ny)
                mats.append(mat)
        return StateChannelFamily(tuple(states), ins, outs, np.stack(mats))

    return HypothesisPair(
        ins, outs, extend(pair.h0), extend(pair.h1), name=f"{pair.name}^(adaptive2)"
    )
