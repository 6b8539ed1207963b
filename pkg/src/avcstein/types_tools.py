"""Joint types, the type-based detector, and codebook count checks.

Every information quantity here is empirical: an integer count tensor
divided by the block length, in nats. Strict inequalities are tested
with a small margin so that exact rational ties resolve toward "not
satisfied".
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import config
from .channels import Distribution
from .divergence import kl_joint_to_channel, mutual_info
from .errors import BudgetExceededError, CodebookError, PairValidationError


# -------------------------------------------------------------- joint types


def _index_seq(seq, labels, what):
    lookup = {lab: k for k, lab in enumerate(labels)}
    try:
        return np.array([lookup[sym] for sym in seq], dtype=np.intp)
    except KeyError as exc:
        raise PairValidationError(
            [f"{what}: symbol {exc.args[0]!r} not in alphabet {tuple(labels)}"]
        ) from exc


@dataclass(frozen=True, eq=False)
class JointTypeTensor:
    """Integer counts of aligned symbol tuples over a product alphabet."""

    counts: np.ndarray
    n: int
    alphabets: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if not np.issubdtype(counts.dtype, np.integer):
            raise PairValidationError(["joint type: counts must be integers"])
        alphabets = tuple(tuple(a) for a in self.alphabets)
        shape = tuple(len(a) for a in alphabets)
        errors = []
        if counts.shape != shape:
            errors.append(
                f"joint type: counts shape {counts.shape}, alphabets imply {shape}"
            )
        elif counts.min(initial=0) < 0 or int(counts.sum()) != self.n:
            errors.append("joint type: counts must be nonnegative and sum to n")
        if self.n <= 0:
            errors.append("joint type: n must be positive")
        if errors:
            raise PairValidationError(errors)
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "alphabets", alphabets)

    @property
    def distribution(self):
        return self.counts / self.n

    def mutual_info(self, axes_a, axes_b, given=()):
        return mutual_info(self.distribution, axes_a, axes_b, given)

    def kl_to_channel(self, kernel, input_axes, state_axes, output_axes):
        return kl_joint_to_channel(
            self.distribution, kernel, input_axes, state_axes, output_axes
        )

    def marginal(self, axes):
        """Marginal type over the kept axes (in tensor order)."""
        keep = sorted(set(axes))
        drop = tuple(k for k in range(self.counts.ndim) if k not in keep)
        return JointTypeTensor(
            self.counts.sum(axis=drop), self.n, tuple(self.alphabets[k] for k in keep)
        )


def joint_type(seqs, alphabets):
    """Count aligned tuples across equal-length sequences."""
    seqs = [tuple(s) for s in seqs]
    alphabets = tuple(tuple(a) for a in alphabets)
    if not seqs or len(seqs) != len(alphabets):
        raise PairValidationError(["joint_type: need one alphabet per sequence"])
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        raise PairValidationError(["joint_type: sequences have unequal lengths"])
    if n == 0:
        raise PairValidationError(["joint_type: sequences are empty"])
    shape = tuple(len(a) for a in alphabets)
    combined = np.zeros(n, dtype=np.intp)
    for seq, labels in zip(seqs, alphabets):
        combined = combined * len(labels) + _index_seq(seq, labels, "joint_type")
    counts = np.bincount(combined, minlength=int(np.prod(shape)))
    return JointTypeTensor(counts.reshape(shape), n, alphabets)


# ---------------------------------------------------------------- codebooks


def _codebook_size(n, rate):
    # tolerant ceiling: exp(n*rate) can land a few ulps above an integer
    return max(1, math.ceil(math.exp(n * rate) - 1e-9))


@dataclass(frozen=True)
class Codebook:
    """Equal-composition codewords with the rate and slack they target."""

    n: int
    input_labels: tuple
    codewords: tuple
    rate: float
    epsilon: float
    attempts: int = 0

    def __post_init__(self):
        labels = tuple(self.input_labels)
        words = tuple(tuple(w) for w in self.codewords)
        object.__setattr__(self, "input_labels", labels)
        object.__setattr__(self, "codewords", words)
        errors = []
        if not words:
            errors.append("codebook: no codewords")
        elif any(len(w) != self.n for w in words):
            errors.append("codebook: codeword length differs from n")
        else:
            want = _codebook_size(self.n, self.rate)
            if len(words) != want:
                errors.append(
                    f"codebook: {len(words)} codewords, rate implies {want}"
                )
        if errors:
            raise PairValidationError(errors)
        idx = np.stack([_index_seq(w, labels, "codeword") for w in words])
        comps = [np.bincount(row, minlength=len(labels)) for row in idx]
        if any(not np.array_equal(c, comps[0]) for c in comps[1:]):
            raise PairValidationError(
                ["codebook: codewords are not all of the same composition"]
            )
        idx.setflags(write=False)
        object.__setattr__(self, "_idx", idx)

    @property
    def size(self):
        return len(self.codewords)

    @property
    def composition(self):
        counts = np.bincount(self._idx[0], minlength=len(self.input_labels))
        return Distribution(self.input_labels, counts / self.n)

    def to_dict(self):
        return {
            "n": self.n,
            "rate": self.rate,
            "epsilon": self.epsilon,
            "attempts": self.attempts,
            "input_labels": list(self.input_labels),
            "codewords": [list(w) for w in self.codewords],
        }


def _check_codebook_pair(pair, cb):
    if tuple(cb.input_labels) != tuple(pair.input_labels):
        raise PairValidationError(
            ["codebook input alphabet differs from the pair inputs"]
        )


# ----------------------------------------------------------------- detector


def _family_xsy(family):
    """Family tensor transposed to (input, state, output)."""
    return np.transpose(family.tensor, (1, 0, 2))


def _batch_cond12(counts, n, w_xsy, thr1, thr2):
    """Conditions 1-2 over a batch of (input, state, output) count tensors.

    Returns (ok, info, div) where info is the empirical I between input
    and state, div the empirical divergence from the state channel, and
    ok marks members with info < thr1 and div < thr2 (margin applied).
    """
    m = config.DETECTOR_MARGIN
    J = counts / n
    Jxs = J.sum(axis=3)
    Jx = Jxs.sum(axis=2)
    Js = Jxs.sum(axis=1)
    den = Jx[:, :, None] * Js[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = Jxs * (np.log(Jxs) - np.log(den))
    info = np.maximum(np.where(Jxs > 0, t, 0.0).sum(axis=(1, 2)), 0.0)
    wden = Jxs[:, :, :, None] * w_xsy[None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = J * (np.log(J) - np.log(wden))
    div = np.maximum(np.where(J > 0, t, 0.0).sum(axis=(1, 2, 3)), 0.0)
    bad = ((J > 0) & (wden <= 0.0)).any(axis=(1, 2, 3))
    div = np.where(bad, np.inf, div)
    return (info < thr1 - m) & (div < thr2 - m), info, div


@lru_cache(maxsize=None)
def _compositions(total, parts):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 1:
        return ((total,),)
    out = []
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


def _exists_cond12_type(x_idx, y_idx, family, thr1, thr2, n, nx, ny):
    """Whether some state string meets conditions 1-2 against this family.

    Enumerates state count tensors consistent with the fixed (x, y) pair
    type; any consistent tensor is realizable by assigning states within
    the positions of each (x, y) cell, so this is exact.
    """
    na = family.n_states
    w = _family_xsy(family)
    pair_counts = np.bincount(x_idx * ny + y_idx, minlength=nx * ny).reshape(nx, ny)
    cells = [(x, y, int(c)) for (x, y), c in np.ndenumerate(pair_counts) if c > 0]
    options = [_compositions(c, na) for (_, _, c) in cells]
    combos = itertools.product(*options)
    while True:
        block = list(itertools.islice(combos, 4096))
        if not block:
            return False
        counts = np.zeros((len(block), nx, na, ny))
        for k, combo in enumerate(block):
            for (x, y, _), comp in zip(cells, combo):
                counts[k, x, :, y] = comp
        ok, _, _ = _batch_cond12(counts, n, w, thr1, thr2)
        if ok.any():
            return True


def _state_strings(na, n, ids):
    powers = na ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (ids[:, None] // powers) % na


def _coupling_info(pair, xi, sb_idx, xj, y_idx, n):
    """Empirical I(X'; X Y | Sbar) from the aligned four-way type."""
    nx, ny = pair.nx, pair.ny
    nsb = pair.h1.n_states
    combined = ((xi * nsb + sb_idx) * nx + xj) * ny + y_idx
    counts = np.bincount(combined, minlength=nx * nsb * nx * ny)
    joint = counts.reshape(nx, nsb, nx, ny) / n
    return mutual_info(joint, (2,), (0, 3), given=(1,))


def _cond3_holds(pair, cb, i, sb_idx, y_idx, triple, premise):
    m = config.DETECTOR_MARGIN
    xi = cb._idx[i]
    for j in premise:
        val = _coupling_info(pair, xi, sb_idx, cb._idx[j], y_idx, cb.n)
        if not val < triple.eta3 - m:
            return False
    return True


def _find_sbar(pair, cb, i, y_idx, triple, premise):
    """First H1 state string passing all three conditions for codeword i."""
    n = cb.n
    nsb = pair.h1.n_states
    nx, ny = pair.nx, pair.ny
    w1 = _family_xsy(pair.h1)
    xi = cb._idx[i]
    cellhot = np.zeros((n, nx * ny))
    cellhot[np.arange(n), xi * ny + y_idx] = 1.0
    total = nsb**n
    for start in range(0, total, 4096):
        ids = np.arange(start, min(start + 4096, total), dtype=np.int64)
        digits = _state_strings(nsb, n, ids)
        shot = np.zeros((len(ids), n, nsb))
        shot[np.arange(len(ids))[:, None], np.arange(n)[None, :], digits] = 1.0
        counts = np.einsum("kc,mks->mcs", cellhot, shot)
        counts = counts.reshape(len(ids), nx, ny, nsb).transpose(0, 1, 3, 2)
        ok, _, _ = _batch_cond12(counts, n, w1, triple.eta1, triple.eta2)
        for k in np.flatnonzero(ok):
            if _cond3_holds(pair, cb, i, digits[k], y_idx, triple, premise):
                return digits[k]
    return None


def types_detector(pair, codebook, y, triple, budget=None):
    """Decide H0 or H1 by exhaustive search over codewords and attacks.

    Declares H1 exactly when some codeword i and H1 state string give an
    aligned type with small input-state dependence (condition 1) and
    small divergence from the H1 family (condition 2), such that every
    codeword j explainable under the H0 family within delta (including
    j = i) stays weakly coupled given the state (condition 3).
    """
    _check_codebook_pair(pair, codebook)
    y_idx = _index_seq(y, pair.output_labels, "detector output sequence")
    n = codebook.n
    if len(y_idx) != n:
        raise PairValidationError(
            ["detector: output length differs from the codebook block length"]
        )
    ns, nsb = pair.h0.n_states, pair.h1.n_states
    N = codebook.size
    cost = (nsb**n) * (ns**n) * N * N
    cap = config.resolve_budget(budget, config.DETECTOR_BUDGET)
    if cost > cap:
        raise BudgetExceededError(
            f"detector enumeration needs {cost:.3g} elementary checks, budget {cap:.3g}"
        )
    nx, ny = pair.nx, pair.ny
    premise = [
        j
        for j in range(N)
        if _exists_cond12_type(
            codebook._idx[j], y_idx, pair.h0, triple.delta, triple.delta, n, nx, ny
        )
    ]
    for i in range(N):
        if not _exists_cond12_type(
            codebook._idx[i], y_idx, pair.h1, triple.eta1, triple.eta2, n, nx, ny
        ):
            continue
        if not premise:
            return "H1"
        if _find_sbar(pair, codebook, i, y_idx, triple, premise) is not None:
            return "H1"
    return "H0"


def detector_events(pair, codebook, i, sbar, y, triple):
    """Error-event flags for a known transmitted codeword and attack string.

    E1/E2: conditions 1/2 fail at the true (codeword, attack) alignment.
    E3: they hold, but some other codeword explainable under H0 within
    delta is strongly coupled. E4: they hold and the true codeword is
    itself explainable under H0 within delta.
    """
    _check_codebook_pair(pair, codebook)
    y_idx = _index_seq(y, pair.output_labels, "detector output sequence")
    sb_idx = _index_seq(sbar, pair.h1.states, "attack string")
    n = codebook.n
    if len(y_idx) != n or len(sb_idx) != n:
        raise PairValidationError(["detector events: sequence length differs from n"])
    nx, ny = pair.nx, pair.ny
    nsb = pair.h1.n_states
    m = config.DETECTOR_MARGIN
    xi = codebook._idx[i]
    combined = (xi * nsb + sb_idx) * ny + y_idx
    counts = np.bincount(combined, minlength=nx * nsb * ny).reshape(nx, nsb, ny)
    _, info, div = _batch_cond12(
        counts[None], n, _family_xsy(pair.h1), triple.eta1, triple.eta2
    )
    e1 = bool(info[0] >= triple.eta1 - m)
    e2 = bool(div[0] >= triple.eta2 - m)
    cond12 = not e1 and not e2
    in_premise = _exists_cond12_type(
        xi, y_idx, pair.h0, triple.delta, triple.delta, n, nx, ny
    )
    e4 = cond12 and in_premise
    e3 = False
    if cond12:
        for j in range(codebook.size):
            xj = codebook._idx[j]
            if np.array_equal(xj, xi):
                continue
            if not _exists_cond12_type(
                xj, y_idx, pair.h0, triple.delta, triple.delta, n, nx, ny
            ):
                continue
            if _coupling_info(pair, xi, sb_idx, xj, y_idx, n) >= triple.eta3 - m:
                e3 = True
                break
    return {"E1": e1, "E2": e2, "E3": e3, "E4": e4}


# --------------------------------------------------------- codebook checks


@dataclass(frozen=True)
class CodebookCheck:
    passed: bool
    worst_ratio: float
    worst: dict
    mode: str
    checks: int


def _multinomial(counts):
    total = int(sum(counts))
    out = 1
    for c in counts:
        out *= math.comb(total, int(c))
        total -= int(c)
    return out


def _verify_cost(pair, n):
    return (pair.nx**n) * (pair.h0.n_states**n + pair.h1.n_states**n)


def verify_codebook(pair, cb, mode="exhaustive", seed=0, samples=200, budget=None):
    """Check the three per-type count bounds, reporting the worst ratio.

    For every state string s (from either family) and realized joint
    type, the codebook must satisfy, with [u]+ = max(u, 0):
      eq1  |{j: (x, x_j, s) of type T}|        <= exp(n([R - I(X';XS)]+ + eps))
      eq2  |{i: (x_i, s) of type T}| / N       <= exp(n([R - I(X;S)]+ - R + eps))
      eq3  |{i: some j != i matches T}| / N    <= exp(n([R - I(X';S)]+ - I(X;X') + eps))
    Exhaustive mode sweeps all (x, s); spot mode samples them.
    """
    _check_codebook_pair(pair, cb)
    if mode not in ("exhaustive", "spot"):
        raise PairValidationError([f"verify mode {mode!r} not in (exhaustive, spot)"])
    n, N = cb.n, cb.size
    R, eps = cb.rate, cb.epsilon
    nx = pair.nx
    cw = cb._idx
    worst_ratio = 0.0
    worst = {}
    checks = 0
    cache = {}

    def mi(counts, axes_a, axes_b):
        key = (counts.tobytes(), counts.shape, axes_a, axes_b)
        if key not in cache:
            cache[key] = mutual_info(counts / n, axes_a, axes_b)
        return cache[key]

    def record(kind, value, bound, family, s_row):
        nonlocal worst_ratio, worst, checks
        checks += 1
        ratio = value / bound
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst = {
                "bound": kind,
                "value": value,
                "limit": bound,
                "state_family": family.states,
                "s": tuple(family.states[v] for v in s_row),
            }

    def check_state(family, s_row, x_rows):
        na = family.n_states
        groups = {}
        for i in range(N):
            c2 = np.bincount(cw[i] * na + s_row, minlength=nx * na).reshape(nx, na)
            groups.setdefault(c2.tobytes(), [c2, 0])[1] += 1
        for c2, cnt in groups.values():
            # a halved slack here is unsatisfiable at short blocklengths:
            # whenever two codewords share a zero (or a one) at two common
            # positions, the state string marking those positions puts both
            # words in one type class whose mutual information already
            # exceeds the rate, and count 2 then beats exp(n(eps/2 - R))
            bound = math.exp(n * (max(R - mi(c2, (0,), (1,)), 0.0) - R + eps))
            record("eq2", cnt / N, bound, family, s_row)
        members = {}
        for i in range(N):
            seen = set()
            for j in range(N):
                if j == i:
                    continue
                c3 = np.bincount(
                    (cw[i] * nx + cw[j]) * na + s_row, minlength=nx * nx * na
                ).reshape(nx, nx, na)
                key = c3.tobytes()
                if key not in seen:
                    seen.add(key)
                    members.setdefault(key, [c3, 0])[1] += 1
        for c3, cnt in members.values():
            # the coincidence penalty uses the state-free coupling I(X;X'):
            # penalizing I(X;X'S) is unattainable at any n, since a state
            # string marking where two codewords agree always drives it to
            # the full input entropy
            expo = max(R - mi(c3, (1,), (2,)), 0.0) - mi(c3, (0,), (1,)) + eps
            record("eq3", cnt / N, math.exp(n * expo), family, s_row)
        for x_row in x_rows:
            groups = {}
            for j in range(N):
                c3 = np.bincount(
                    (x_row * nx + cw[j]) * na + s_row, minlength=nx * nx * na
                ).reshape(nx, nx, na)
                groups.setdefault(c3.tobytes(), [c3, 0])[1] += 1
            for c3, cnt in groups.values():
                bound = math.exp(n * (max(R - mi(c3, (1,), (0, 2)), 0.0) + eps))
                record("eq1", cnt, bound, family, s_row)

    if mode == "exhaustive":
        cost = _verify_cost(pair, n)
        cap = config.resolve_budget(budget, config.VERIFY_BUDGET)
        if cost > cap:
            raise BudgetExceededError(
                f"exhaustive verification needs {cost:.3g} checks, budget {cap:.3g}"
            )
        all_x = _state_strings(nx, n, np.arange(nx**n, dtype=np.int64))
        for family in (pair.h0, pair.h1):
            na = family.n_states
            for s_row in _state_strings(na, n, np.arange(na**n, dtype=np.int64)):
                check_state(family, s_row, all_x)
    else:
        rng = np.random.default_rng(seed)
        sizes = np.array(
            [pair.h0.n_states**n, pair.h1.n_states**n], dtype=float
        )
        for _ in range(samples):
            family = (pair.h0, pair.h1)[rng.choice(2, p=sizes / sizes.sum())]
            s_row = rng.integers(0, family.n_states, size=n)
            x_row = rng.integers(0, nx, size=n)
            check_state(family, s_row, [x_row])

    return CodebookCheck(
        passed=bool(worst_ratio <= 1.0 + 1e-12),
        worst_ratio=float(worst_ratio),
        worst=worst,
        mode=mode,
        checks=checks,
    )


def generate_codebook(pair, p, n, rate, epsilon, seed, max_attempts=50, budget=None):
    """Sample constant-composition codebooks until one passes verification.

    Codewords are uniform draws from the type class of p (distinct draws
    whenever the class is large enough); each attempt is checked with
    verify_codebook and the first passing sample is returned with its
    attempt count recorded.
    """
    labels = tuple(pair.input_labels)
    if isinstance(p, Distribution):
        if tuple(p.labels) != labels:
            raise PairValidationError(
                ["codebook composition labels differ from the pair inputs"]
            )
        probs = p.probs
    else:
        probs = np.asarray(p, dtype=float)
    if probs.shape != (len(labels),):
        raise PairValidationError(
            [f"codebook composition needs {len(labels)} entries"]
        )
    scaled = probs * n
    counts = np.rint(scaled).astype(int)
    if np.abs(scaled - counts).max() > 1e-9 or counts.sum() != n:
        raise PairValidationError(
            [f"codebook composition is not a type with denominator {n}"]
        )
    if epsilon <= 0 or rate < epsilon:
        raise PairValidationError(
            ["codebook generation needs rate >= epsilon > 0"]
        )
    N = _codebook_size(n, rate)
    class_size = _multinomial(counts)
    distinct = N <= class_size
    base = np.repeat(np.arange(len(labels)), counts)
    rng = np.random.default_rng(seed)
    best = None
    for attempt in range(1, max_attempts + 1):
        words = []
        seen = set()
        guard = 0
        while len(words) < N:
            guard += 1
            if guard > 1000 * N + 1000:
                raise CodebookError(
                    "codebook: could not draw enough distinct codewords"
                )
            perm = tuple(int(v) for v in rng.permutation(base))
            if distinct and perm in seen:
                continue
            seen.add(perm)
            words.append(perm)
        cb = Codebook(
            n=n,
            input_labels=labels,
            codewords=tuple(tuple(labels[v] for v in w) for w in words),
            rate=rate,
            epsilon=epsilon,
            attempts=attempt,
        )
        cap = config.resolve_budget(budget, config.VERIFY_BUDGET)
        mode = "exhaustive" if _verify_cost(pair, n) <= cap else "spot"
        check = verify_codebook(
            pair, cb, mode=mode, seed=seed + attempt, samples=500, budget=budget
        )
        if check.passed:
            return cb
        if best is None or check.worst_ratio < best.worst_ratio:
            best = check
    raise CodebookError(
        f"codebook: no passing sample in {max_attempts} attempts", report=best
    )
