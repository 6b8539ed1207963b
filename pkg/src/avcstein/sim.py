"""Trial simulation of the transmitter / adversary / detector game."""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import Distribution, product_labels
from .config import EXACT_BUDGET, GAP_TOL, resolve_budget
from .divergence import cond_kl, kl
from .errors import BudgetExceededError, ConvergenceError, PairValidationError
from .exponents import min_kl_over_hulls
from .geometry import transsym_gap
from .types_tools import types_detector

WILSON_Z = 1.959963984540054
_CHUNK = 16384
_HYP = {"H0": 0, "H1": 1}


# ---------------------------------------------------------------------------
# strategy descriptions


@dataclass(frozen=True)
class Deterministic:
    """Fixed input word; a single label means that symbol repeated."""

    sequence: object


@dataclass(frozen=True)
class IIDPrivate:
    """Inputs drawn i.i.d. from a private source."""

    p: Distribution


@dataclass(frozen=True)
class BlockPrivate:
    """Inputs drawn block-i.i.d. from a law over k-tuples."""

    k: int
    p: Distribution


@dataclass(frozen=True)
class SharedCodeword:
    """Explicit word law; the realization is revealed to the detector."""

    words: tuple
    probs: tuple


@dataclass(frozen=True)
class CodebookUniform:
    """Uniform choice over the words of a codebook (not revealed)."""

    codebook: object


@dataclass(frozen=True)
class AdaptiveDeterministic:
    """Feedback transmitter: maps[i] sends the past outputs to an input."""

    maps: tuple


@dataclass(frozen=True)
class IIDState:
    """States drawn i.i.d. from a law over the active family's states."""

    p: Distribution


@dataclass(frozen=True)
class Memoryless:
    """Per-step state laws (one Distribution per step)."""

    steps: tuple


@dataclass(frozen=True)
class AdaptivePolicy:
    """State policy over a bounded window of past states and outputs.

    policy(i, s_window, y_window) returns a probability row over the
    active family's states; with wants_inputs the policy also receives
    the input window, which only the shared-codeword setting reveals.
    """

    history: int
    policy: object
    wants_inputs: bool = False


@dataclass(frozen=True)
class TransSymAttack:
    """Draw a fake word from (words, probs), feed it through kernel.

    kernel[x, s] is the chance of state s when the fake symbol is x.
    """

    words: tuple
    probs: tuple
    kernel: object


@dataclass(frozen=True)
class MimicHull:
    """I.i.d. states at weights that place the two hulls together."""

    weights: Distribution


# ---------------------------------------------------------------------------
# detectors


def _mix(family, weights, what):
    w = np.asarray(weights, dtype=float)
    if w.shape != (family.n_states,):
        raise PairValidationError(
            [f"{what} has {w.size} weights for {family.n_states} states"]
        )
    if w.min() < -1e-12 or abs(w.sum() - 1.0) > 1e-9:
        raise PairValidationError([f"{what} weights are not a distribution"])
    return np.einsum("s,sxy->xy", np.clip(w, 0.0, None), family.tensor)


@dataclass(frozen=True)
class DetLRT:
    """Log-likelihood ratio test against one reference mixture pair.

    The statistic sums per-letter log ratios of the lam-mixed null kernel
    to the mu-mixed alternative kernel and accepts H0 at or above
    theta = n * (D - slack), with D the matching divergence at input_law.
    Revealed inputs give the conditional form; hidden inputs fall back to
    the output-marginal form.
    """

    lam: tuple
    mu: tuple
    input_law: Distribution
    slack: float = 0.02
    use_inputs: object = None

    def accepts(self, pair, y, x=None):
        n = y.shape[1]
        w0 = _mix(pair.h0, self.lam, "lrt lam")
        w1 = _mix(pair.h1, self.mu, "lrt mu")
        px = self.input_law.probs
        if self.use_inputs is True and x is None:
            raise PairValidationError(
                ["lrt wants inputs but the transmitter does not reveal them"]
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            if x is not None and self.use_inputs is not False:
                table = np.log(w0) - np.log(w1)
                table[np.isnan(table)] = 0.0
                stat = table[x, y].sum(axis=1)
                ref = cond_kl(w0, w1, px)
            else:
                q0, q1 = px @ w0, px @ w1
                table = np.log(q0) - np.log(q1)
                table[np.isnan(table)] = 0.0
                stat = table[y].sum(axis=1)
                ref = kl(q0, q1)
        return stat >= n * (ref - self.slack)


_HULL_CACHE = {}


def _min_mix_kl(target, mats, tol=1e-11, max_iter=5000):
    """min over mixture weights w of D(target || w @ mats), certified by gap."""
    pos = target > 0
    if np.any(pos & ~(mats > 0).any(axis=0)):
        return math.inf
    k = mats.shape[0]
    t = target[pos]
    m = mats[:, pos]
    base = float(np.sum(t * np.log(t)))
    if k == 1:
        return max(base - float(np.sum(t * np.log(m[0]))), 0.0)
    lam = np.full(k, 1.0 / k)
    best = math.inf
    for it in range(1, max_iter + 1):
        q = lam @ m
        best = min(best, base - float(np.sum(t * np.log(q))))
        grad = -(m @ (t / q))
        if float(lam @ grad - grad.min()) < tol:
            break
        lam = lam * np.exp(-(0.5 / math.sqrt(it)) * (grad - grad.max()))
        lam /= lam.sum()
    return max(best, 0.0)


@dataclass(frozen=True)
class DetHullDivergence:
    """Accept H0 when the empirical type sits close to the null hull.

    With revealed inputs the statistic is the joint-type divergence to the
    best lam-mixed null channel at the empirical input type; with hidden
    inputs it is the output-type divergence to the mixed output laws at
    input_law. The default threshold shrinks like log(n + 1) / n scaled by
    the alphabet sizes and c0.
    """

    c0: float = 2.0
    gamma: object = None
    input_law: object = None

    def threshold(self, pair, n):
        if self.gamma is not None:
            return float(self.gamma)
        scale = pair.nx * pair.ny * max(pair.h0.n_states, pair.h1.n_states)
        return self.c0 * scale * math.log(n + 1.0) / n

    def accepts(self, pair, y, x=None):
        n = y.shape[1]
        w0 = pair.h0.tensor
        gamma = self.threshold(pair, n)
        if x is not None:
            code = x * pair.ny + y
            dim = pair.nx * pair.ny
            fam_key = (w0.tobytes(), b"joint")
        else:
            if self.input_law is None:
                raise PairValidationError(
                    ["hull detector with hidden inputs needs input_law"]
                )
            code = y
            dim = pair.ny
            law = self.input_law.probs
            out_rows = np.einsum("x,sxy->sy", law, w0)
            fam_key = (w0.tobytes(), law.tobytes())
        counts = np.zeros((code.shape[0], dim), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(code.shape[0]), n), code.ravel()), 1)
        uniq, inv = np.unique(counts, axis=0, return_inverse=True)
        stats = np.empty(uniq.shape[0])
        if len(_HULL_CACHE) > 200000:
            _HULL_CACHE.clear()
        for u in range(uniq.shape[0]):
            key = (fam_key, n, uniq[u].tobytes())
            if key not in _HULL_CACHE:
                t = uniq[u] / n
                if x is not None:
                    joint = t.reshape(pair.nx, pair.ny)
                    mats = (joint.sum(axis=1)[None, :, None] * w0).reshape(
                        w0.shape[0], -1
                    )
                    _HULL_CACHE[key] = _min_mix_kl(t, mats)
                else:
                    _HULL_CACHE[key] = _min_mix_kl(t, out_rows)
            stats[u] = _HULL_CACHE[key]
        return stats[inv] <= gamma


@dataclass(frozen=True)
class DetTypesDetector:
    """Wraps the joint-type detector built around a codebook."""

    codebook: object
    triple: object
    budget: object = None

    def accepts(self, pair, y, x=None):
        out = np.empty(y.shape[0], dtype=bool)
        for r in range(y.shape[0]):
            word = tuple(pair.output_labels[v] for v in y[r])
            verdict = types_detector(
                pair, self.codebook, word, self.triple, budget=self.budget
            )
            out[r] = verdict == "H0"
        return out


# ---------------------------------------------------------------------------
# sampling


def _idx_word(word, labels, what):
    lut = {lab: k for k, lab in enumerate(labels)}
    try:
        return np.array([lut[w] for w in word], dtype=np.intp)
    except KeyError as bad:
        raise PairValidationError([f"{what} uses unknown symbol {bad.args[0]!r}"])


def _check_law(d, labels, what):
    if not isinstance(d, Distribution):
        raise PairValidationError([f"{what} must be a Distribution"])
    if tuple(d.labels) != tuple(labels):
        raise PairValidationError([f"{what} labels do not match {list(labels)}"])
    return d.probs


def _word_table(words, probs, labels, n, what):
    if len(words) == 0:
        raise PairValidationError([f"{what} has no words"])
    if len(probs) != len(words):
        raise PairValidationError([f"{what} has {len(words)} words, {len(probs)} probs"])
    pr = np.asarray(probs, dtype=float)
    if pr.min() < 0 or abs(pr.sum() - 1.0) > 1e-9:
        raise PairValidationError([f"{what} probs are not a distribution"])
    rows = []
    for w in words:
        # a bare label stands for that symbol repeated to the full length
        if isinstance(w, str) and w in labels:
            rows.append(np.full(n, labels.index(w), dtype=np.intp))
        else:
            rows.append(_idx_word(w, labels, what))
    tab = np.stack(rows)
    if tab.shape[1] != n:
        raise PairValidationError([f"{what} words have length {tab.shape[1]}, not {n}"])
    return tab, pr


def _draw(rng, cdf, shape):
    u = rng.random(shape)
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def _draw_rows(rng, rows):
    """One index per leading cell of rows, each cell holding a prob row."""
    cdf = np.cumsum(rows, axis=-1)
    u = rng.random(rows.shape[:-1] + (1,))
    return np.minimum((u > cdf).sum(axis=-1), rows.shape[-1] - 1)


def _static_inputs(tx, pair, n, rng, b):
    labels = pair.input_labels
    if isinstance(tx, Deterministic):
        seq = tx.sequence
        if isinstance(seq, str) and seq in labels:
            row = np.full(n, labels.index(seq), dtype=np.intp)
        else:
            row = _idx_word(seq, labels, "deterministic word")
            if row.size != n:
                raise PairValidationError(
                    [f"deterministic word has length {row.size}, not {n}"]
                )
        return np.tile(row, (b, 1)), None
    if isinstance(tx, IIDPrivate):
        p = _check_law(tx.p, labels, "iid input law")
        return _draw(rng, np.cumsum(p), (b, n)), None
    if isinstance(tx, BlockPrivate):
        k = int(tx.k)
        if k < 1 or n % k:
            raise PairValidationError([f"block length {k} does not divide n={n}"])
        p = _check_law(tx.p, product_labels(labels, k), "block input law")
        digits = _digit_rows(len(labels), k)
        blocks = _draw(rng, np.cumsum(p), (b, n // k))
        return digits[blocks].reshape(b, n), None
    if isinstance(tx, SharedCodeword):
        tab, pr = _word_table(tx.words, tx.probs, labels, n, "shared codeword law")
        w = _draw(rng, np.cumsum(pr), (b,))
        return tab[w], w
    if isinstance(tx, CodebookUniform):
        cb = tx.codebook
        if cb.n != n:
            raise PairValidationError([f"codebook length {cb.n} does not match n={n}"])
        tab = np.stack([_idx_word(w, labels, "codebook word") for w in cb.codewords])
        w = rng.integers(0, tab.shape[0], size=b)
        return tab[w], w
    raise PairValidationError([f"unknown transmitter strategy {type(tx).__name__}"])


def _static_states(adv, fam, pair, n, rng, b):
    if isinstance(adv, (IIDState, MimicHull)):
        p = adv.p if isinstance(adv, IIDState) else adv.weights
        pr = _check_law(p, fam.states, "state law")
        return _draw(rng, np.cumsum(pr), (b, n)), None
    if isinstance(adv, Memoryless):
        if len(adv.steps) != n:
            raise PairValidationError(
                [f"memoryless strategy has {len(adv.steps)} steps for n={n}"]
            )
        rows = np.stack(
            [_check_law(d, fam.states, f"state law at step {i}") for i, d in enumerate(adv.steps)]
        )
        return _draw_rows(rng, np.broadcast_to(rows, (b, n, rows.shape[1]))), None
    if isinstance(adv, TransSymAttack):
        tab, pr = _word_table(adv.words, adv.probs, pair.input_labels, n, "attack law")
        ker = np.asarray(adv.kernel, dtype=float)
        if ker.shape != (pair.nx, fam.n_states):
            raise PairValidationError(
                [f"attack kernel shape {ker.shape} is not ({pair.nx}, {fam.n_states})"]
            )
        if ker.min() < -1e-12 or np.abs(ker.sum(axis=1) - 1.0).max() > 1e-9:
            raise PairValidationError(["attack kernel rows are not distributions"])
        w = _draw(rng, np.cumsum(pr), (b,))
        fake = tab[w]
        return _draw_rows(rng, np.clip(ker, 0.0, None)[fake]), w
    raise PairValidationError([f"unknown adversary strategy {type(adv).__name__}"])


def _sample_y_step(fam, x_col, s_col, rng):
    return _draw_rows(rng, fam.tensor[s_col, x_col])


def _window_codes(arr, i, h, base):
    w = min(i, h)
    code = np.zeros(arr.shape[0], dtype=np.int64)
    for j in range(i - w, i):
        code = code * base + arr[:, j]
    return code, w


def _decode(code, w, base):
    out = []
    for _ in range(w):
        out.append(int(code % base))
        code //= base
    return tuple(reversed(out))


def _policy_rows(adv, fam, pair, i, s_arr, y_arr, x_arr):
    h = int(adv.history)
    ns, ny, nx = fam.n_states, pair.ny, pair.nx
    sc, w = _window_codes(s_arr, i, h, ns)
    yc, _ = _window_codes(y_arr, i, h, ny)
    code = sc * (ny**w) + yc
    if adv.wants_inputs:
        if x_arr is None:
            raise PairValidationError(
                ["adaptive policy wants inputs outside the shared-codeword setting"]
            )
        xc, _ = _window_codes(x_arr, i, h, nx)
        code = code * (nx**w) + xc
    uniq, inv = np.unique(code, return_inverse=True)
    rows = np.empty((uniq.size, ns))
    for u, c in enumerate(uniq):
        if adv.wants_inputs:
            c, xc = divmod(int(c), nx**w)
            x_win = tuple(pair.input_labels[v] for v in _decode(xc, w, nx))
        sc, yc = divmod(int(c), ny**w)
        s_win = tuple(fam.states[v] for v in _decode(sc, w, ns))
        y_win = tuple(pair.output_labels[v] for v in _decode(yc, w, ny))
        if adv.wants_inputs:
            row = np.asarray(adv.policy(i, s_win, y_win, x_win), dtype=float)
        else:
            row = np.asarray(adv.policy(i, s_win, y_win), dtype=float)
        if row.shape != (ns,) or row.min() < -1e-12 or abs(row.sum() - 1.0) > 1e-9:
            raise PairValidationError([f"policy row at step {i} is not a distribution"])
        rows[u] = np.clip(row, 0.0, None)
    return rows[inv]


def _feedback_inputs(tx, pair, i, y_arr, n):
    maps = tx.maps
    if len(maps) != n:
        raise PairValidationError([f"feedback transmitter has {len(maps)} maps for n={n}"])
    hist = y_arr[:, :i]
    if i == 0:
        lab = maps[0](())
        return np.full(y_arr.shape[0], _label_index(lab, pair.input_labels), dtype=np.intp)
    uniq, inv = np.unique(hist, axis=0, return_inverse=True)
    vals = np.empty(uniq.shape[0], dtype=np.intp)
    for u in range(uniq.shape[0]):
        lab = maps[i](tuple(pair.output_labels[v] for v in uniq[u]))
        vals[u] = _label_index(lab, pair.input_labels)
    return vals[inv]


def _label_index(lab, labels):
    try:
        return labels.index(lab)
    except ValueError:
        raise PairValidationError([f"feedback map produced unknown symbol {lab!r}"])


def _sample_batch(pair, hypothesis, tx, adv, n, rng, b):
    if hypothesis not in _HYP:
        raise PairValidationError([f"hypothesis {hypothesis!r} is not 'H0' or 'H1'"])
    fam = pair.h0 if hypothesis == "H0" else pair.h1
    tx_adaptive = isinstance(tx, AdaptiveDeterministic)
    adv_adaptive = isinstance(adv, AdaptivePolicy)
    info = {"word_index": None, "attack_index": None}
    if not tx_adaptive:
        x, info["word_index"] = _static_inputs(tx, pair, n, rng, b)
    else:
        x = np.zeros((b, n), dtype=np.intp)
    if not adv_adaptive:
        s, info["attack_index"] = _static_states(adv, fam, pair, n, rng, b)
    else:
        s = np.zeros((b, n), dtype=np.intp)
    if not tx_adaptive and not adv_adaptive:
        y = _draw_rows(rng, fam.tensor[s, x])
        return x, s, y, info
    y = np.zeros((b, n), dtype=np.intp)
    x_seen = x if isinstance(tx, SharedCodeword) else None
    for i in range(n):
        if tx_adaptive:
            x[:, i] = _feedback_inputs(tx, pair, i, y, n)
        if adv_adaptive:
            rows = _policy_rows(adv, fam, pair, i, s, y, x_seen)
            s[:, i] = _draw_rows(rng, rows)
        y[:, i] = _sample_y_step(fam, x[:, i], s[:, i], rng)
    return x, s, y, info


def _reveals(tx):
    return isinstance(tx, SharedCodeword)


def run_trial(pair, hypothesis, tx, adv, det, n, rng):
    """Simulate one trial; returns the decision and a labeled transcript."""
    x, s, y, info = _sample_batch(pair, hypothesis, tx, adv, n, rng, 1)
    fam = pair.h0 if hypothesis == "H0" else pair.h1
    accept = det.accepts(pair, y, x if _reveals(tx) else None)[0]
    transcript = {
        "x": tuple(pair.input_labels[v] for v in x[0]),
        "s": tuple(fam.states[v] for v in s[0]),
        "y": tuple(pair.output_labels[v] for v in y[0]),
        "word_index": None if info["word_index"] is None else int(info["word_index"][0]),
        "attack_index": None if info["attack_index"] is None else int(info["attack_index"][0]),
    }
    return ("H0" if accept else "H1"), transcript


def _count_accepts(pair, hypothesis, tx, adv, det, n, trials, seed, jobs=1):
    """Accept-H0 count over independent trials, chunk-split streams.

    Streams are counter-based: chunk c under hypothesis h is generated from
    SeedSequence((seed, h, n, c)) and trials are rows within the chunk, so
    identical (seed, config) reproduce bit-exact transcripts and chunks are
    order-independent; with jobs > 1 the chunks run on a thread pool and the
    count is the same order-free sum.
    """

    def one(c, b):
        rng = np.random.default_rng(
            np.random.SeedSequence((seed, _HYP[hypothesis], n, c))
        )
        x, s, y, _ = _sample_batch(pair, hypothesis, tx, adv, n, rng, b)
        return int(det.accepts(pair, y, x if _reveals(tx) else None).sum())

    chunks = []
    done = 0
    while done < trials:
        b = min(_CHUNK, trials - done)
        chunks.append((len(chunks), b))
        done += b
    if jobs <= 1 or len(chunks) == 1:
        return sum(one(c, b) for c, b in chunks)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return sum(pool.map(lambda cb: one(*cb), chunks))


def wilson_interval(successes, trials, z=WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise PairValidationError(["wilson interval needs at least one trial"])
    p = successes / trials
    den = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / den
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class MonteCarloResult:
    alpha_hat: float
    beta_hat: float
    alpha_ci: tuple
    beta_ci: tuple
    alpha_count: int
    beta_count: int
    trials: int
    n: int
    seed: int


def monte_carlo(pair, tx, adv_h0, adv_h1, det, n, trials, seed, jobs=1):
    """Estimate both error rates with Wilson 95% intervals."""
    if trials < 1:
        raise PairValidationError(["monte_carlo needs trials >= 1"])
    acc0 = _count_accepts(pair, "H0", tx, adv_h0, det, n, trials, seed, jobs=jobs)
    acc1 = _count_accepts(pair, "H1", tx, adv_h1, det, n, trials, seed, jobs=jobs)
    rej0 = trials - acc0
    return MonteCarloResult(
        alpha_hat=rej0 / trials,
        beta_hat=acc1 / trials,
        alpha_ci=wilson_interval(rej0, trials),
        beta_ci=wilson_interval(acc1, trials),
        alpha_count=rej0,
        beta_count=acc1,
        trials=trials,
        n=n,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# exact enumeration


def _digit_rows(base, n):
    ids = np.arange(base**n)
    rows = np.empty((base**n, n), dtype=np.intp)
    for j in range(n - 1, -1, -1):
        rows[:, j] = ids % base
        ids = ids // base
    return rows


def _tx_words(tx, pair, n):
    """Explicit (word, prob) support of a non-feedback transmitter."""
    labels = pair.input_labels
    if isinstance(tx, Deterministic):
        seq = tx.sequence
        if isinstance(seq, str) and seq in labels:
            return np.full((1, n), labels.index(seq), dtype=np.intp), np.ones(1)
        row = _idx_word(seq, labels, "deterministic word")
        if row.size != n:
            raise PairValidationError([f"deterministic word has length {row.size}, not {n}"])
        return row[None, :], np.ones(1)
    if isinstance(tx, IIDPrivate):
        p = _check_law(tx.p, labels, "iid input law")
        rows = _digit_rows(len(labels), n)
        return rows, np.prod(p[rows], axis=1)
    if isinstance(tx, BlockPrivate):
        k = int(tx.k)
        if k < 1 or n % k:
            raise PairValidationError([f"block length {k} does not divide n={n}"])
        p = _check_law(tx.p, product_labels(labels, k), "block input law")
        digits = _digit_rows(len(labels), k)
        ids = _digit_rows(p.size, n // k)
        rows = digits[ids].reshape(ids.shape[0], n)
        return rows, np.prod(p[ids], axis=1)
    if isinstance(tx, SharedCodeword):
        tab, pr = _word_table(tx.words, tx.probs, labels, n, "shared codeword law")
        return tab, pr
    if isinstance(tx, CodebookUniform):
        cb = tx.codebook
        if cb.n != n:
            raise PairValidationError([f"codebook length {cb.n} does not match n={n}"])
        tab = np.stack([_idx_word(w, labels, "codebook word") for w in cb.codewords])
        return tab, np.full(tab.shape[0], 1.0 / tab.shape[0])
    raise PairValidationError(
        [f"exact enumeration does not support {type(tx).__name__} transmitters"]
    )


def _adv_components(adv, fam, pair, n):
    """(prob, per-step kernels (n, nx, ny)) pieces of an enumerable adversary."""
    if isinstance(adv, (IIDState, MimicHull)):
        p = adv.p if isinstance(adv, IIDState) else adv.weights
        pr = _check_law(p, fam.states, "state law")
        ker = np.einsum("s,sxy->xy", pr, fam.tensor)
        return [(1.0, np.broadcast_to(ker, (n,) + ker.shape))]
    if isinstance(adv, Memoryless):
        if len(adv.steps) != n:
            raise PairValidationError(
                [f"memoryless strategy has {len(adv.steps)} steps for n={n}"]
            )
        ker = np.stack(
            [
                np.einsum("s,sxy->xy", _check_law(d, fam.states, f"state law at step {i}"), fam.tensor)
                for i, d in enumerate(adv.steps)
            ]
        )
        return [(1.0, ker)]
    if isinstance(adv, TransSymAttack):
        tab, pr = _word_table(adv.words, adv.probs, pair.input_labels, n, "attack law")
        ker = np.asarray(adv.kernel, dtype=float)
        if ker.shape != (pair.nx, fam.n_states):
            raise PairValidationError(
                [f"attack kernel shape {ker.shape} is not ({pair.nx}, {fam.n_states})"]
            )
        mixed = np.einsum("ks,sxy->kxy", ker, fam.tensor)
        return [(float(pr[w]), mixed[tab[w]]) for w in range(tab.shape[0])]
    raise PairValidationError(
        [f"exact enumeration does not support {type(adv).__name__} adversaries"]
    )


def _word_law(x_row, kernels, ny):
    law = np.ones(1)
    for i in range(x_row.size):
        law = (law[:, None] * kernels[i, x_row[i]][None, :]).ravel()
    return law


def _feedback_law(tx, pair, kernels, n):
    """Output law when inputs are deterministic feedback maps."""
    ny = pair.ny
    law = np.ones(1)
    prefixes = np.zeros((1, 0), dtype=np.intp)
    for i in range(n):
        x_col = _feedback_inputs(tx, pair, i, prefixes, n)
        rows = kernels[i, x_col]
        law = (law[:, None] * rows).ravel()
        grown = np.repeat(prefixes, ny, axis=0)
        prefixes = np.concatenate(
            [grown, np.tile(np.arange(ny, dtype=np.intp), prefixes.shape[0])[:, None]],
            axis=1,
        )
    return law


def _tx_support_size(tx, pair, n):
    if isinstance(tx, Deterministic):
        return 1
    if isinstance(tx, IIDPrivate):
        return pair.nx**n
    if isinstance(tx, BlockPrivate):
        k = max(int(tx.k), 1)
        return (pair.nx**k) ** (n // k)
    if isinstance(tx, SharedCodeword):
        return len(tx.words)
    if isinstance(tx, CodebookUniform):
        return tx.codebook.size
    raise PairValidationError(
        [f"exact enumeration does not support {type(tx).__name__} transmitters"]
    )


def _exact_side(pair, hypothesis, tx, adv, n, budget):
    """Either (None, mixed law) or (word rows, probs, per-word laws)."""
    fam = pair.h0 if hypothesis == "H0" else pair.h1
    ny = pair.ny
    comps = _adv_components(adv, fam, pair, n)
    if isinstance(tx, AdaptiveDeterministic):
        _charge(budget, len(comps) * ny**n)
        law = np.zeros(ny**n)
        for apr, kernels in comps:
            law += apr * _feedback_law(tx, pair, kernels, n)
        return None, law
    _charge(budget, len(comps) * _tx_support_size(tx, pair, n) * ny**n)
    words, probs = _tx_words(tx, pair, n)
    if _reveals(tx):
        laws = np.zeros((words.shape[0], ny**n))
        for apr, kernels in comps:
            for w in range(words.shape[0]):
                laws[w] += apr * _word_law(words[w], kernels, ny)
        return words, probs, laws
    law = np.zeros(ny**n)
    for apr, kernels in comps:
        for w in range(words.shape[0]):
            law += apr * probs[w] * _word_law(words[w], kernels, ny)
    return None, law


class _Charge:
    def __init__(self, cap):
        self.cap = cap
        self.used = 0

    def add(self, amount):
        self.used += amount
        if self.used > self.cap:
            raise BudgetExceededError(
                f"exact enumeration needs {self.used} terms, budget {self.cap}"
            )


def _charge(budget, amount):
    budget.add(amount)


def exact_output_law(pair, hypothesis, tx, adv, n, budget=None):
    """Exact law of the output word as a vector over Y^n (row-major)."""
    cap = _Charge(resolve_budget(budget, EXACT_BUDGET))
    side = _exact_side(pair, hypothesis, tx, adv, n, cap)
    if side[0] is None:
        return side[1]
    words, probs, laws = side
    return probs @ laws


def exact_errors(pair, tx, adv_h0, adv_h1, det, n, budget=None):
    """Exact (alpha, beta) by enumerating outputs and strategy supports."""
    cap = _Charge(resolve_budget(budget, EXACT_BUDGET))
    sides = {}
    for hyp, adv in (("H0", adv_h0), ("H1", adv_h1)):
        sides[hyp] = _exact_side(pair, hyp, tx, adv, n, cap)
    y_all = _digit_rows(pair.ny, n)
    out = {}
    dec_hidden = None
    for hyp in ("H0", "H1"):
        side = sides[hyp]
        if side[0] is None:
            if dec_hidden is None:
                dec_hidden = det.accepts(pair, y_all, None)
            mass = float(side[1][dec_hidden].sum())
        else:
            words, probs, laws = side
            mass = 0.0
            for w in range(words.shape[0]):
                acc = det.accepts(pair, y_all, np.tile(words[w], (y_all.shape[0], 1)))
                mass += float(probs[w] * laws[w][acc].sum())
        out[hyp] = mass
    alpha = min(max(1.0 - out["H0"], 0.0), 1.0)
    beta = min(max(out["H1"], 0.0), 1.0)
    return alpha, beta


# ---------------------------------------------------------------------------
# exponent estimation


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    stderr: float
    points: tuple
    records: tuple
    dropped: tuple


def estimate_exponent(pair, tx, adv_h1, det, n_grid, trials, seed, jobs=1):
    """Least-squares slope of -ln(beta_hat) against n.

    Grid points with zero H0 acceptances are reported as "< 1/trials" and
    left out of the fit; fewer than two surviving points is an error.
    """
    records = []
    pts = []
    dropped = []
    for n in n_grid:
        count = _count_accepts(pair, "H1", tx, adv_h1, det, int(n), trials, seed, jobs=jobs)
        beta = count / trials
        records.append(
            {
                "n": int(n),
                "beta_hat": beta,
                "beta_ci": wilson_interval(count, trials),
                "beta_count": count,
                "trials": trials,
            }
        )
        if count == 0:
            warnings.warn(f"beta_hat < 1/{trials} at n={n}; point dropped from the fit")
            dropped.append(int(n))
        else:
            pts.append((int(n), -math.log(beta)))
    if len(pts) < 2:
        raise ConvergenceError(
            f"exponent fit needs two usable grid points, got {len(pts)}"
        )
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    sxx = float(np.sum((xs - xs.mean()) ** 2))
    slope = float(np.sum((xs - xs.mean()) * (ys - ys.mean())) / sxx)
    intercept = float(ys.mean() - slope * xs.mean())
    if xs.size > 2:
        ssr = float(np.sum((ys - slope * xs - intercept) ** 2))
        stderr = math.sqrt(ssr / (xs.size - 2) / sxx)
    else:
        stderr = float("nan")
    return ExponentFit(
        slope=slope,
        intercept=intercept,
        stderr=stderr,
        points=tuple(pts),
        records=tuple(records),
        dropped=tuple(dropped),
    )


# ---------------------------------------------------------------------------
# structured adversaries


@dataclass(frozen=True)
class ConverseAdversary:
    h0: Memoryless
    h1: Memoryless
    step_kl: tuple
    total_kl: float


def _static_marginals(tx, pair, n):
    if isinstance(tx, Deterministic):
        seq = tx.sequence
        if isinstance(seq, str) and seq in pair.input_labels:
            row = np.full(n, pair.input_labels.index(seq), dtype=np.intp)
        else:
            row = _idx_word(seq, pair.input_labels, "deterministic word")
            if row.size != n:
                raise PairValidationError(
                    [f"deterministic word has length {row.size}, not {n}"]
                )
        return np.eye(pair.nx)[row]
    if isinstance(tx, IIDPrivate):
        p = _check_law(tx.p, pair.input_labels, "iid input law")
        return np.tile(p, (n, 1))
    if isinstance(tx, BlockPrivate):
        k = int(tx.k)
        if k < 1 or n % k:
            raise PairValidationError([f"block length {k} does not divide n={n}"])
        p = _check_law(tx.p, product_labels(pair.input_labels, k), "block input law")
        digits = _digit_rows(pair.nx, k)
        per = np.zeros((k, pair.nx))
        for w, pr in enumerate(p):
            for j in range(k):
                per[j, digits[w, j]] += pr
        return np.tile(per, (n // k, 1))
    if isinstance(tx, (SharedCodeword, CodebookUniform)):
        words, probs = _tx_words(tx, pair, n)
        out = np.zeros((n, pair.nx))
        for w, pr in enumerate(probs):
            out[np.arange(n), words[w]] += pr
        return out
    return None


def _feedback_marginals(tx, pair, n, lam_rows, budget, seed):
    """Marginal of X_i under H0 against the adversary rows built so far."""
    cap = resolve_budget(budget, EXACT_BUDGET)
    ny = pair.ny
    if ny ** max(n - 1, 0) <= cap:
        law = np.ones(1)
        prefixes = np.zeros((1, 0), dtype=np.intp)

        def step(i):
            nonlocal law, prefixes
            x_col = _feedback_inputs(tx, pair, i, prefixes, n)
            q = np.zeros(pair.nx)
            np.add.at(q, x_col, law)
            return x_col, q

        def advance(i, x_col, ker):
            nonlocal law, prefixes
            rows = ker[x_col]
            law = (law[:, None] * rows).ravel()
            grown = np.repeat(prefixes, ny, axis=0)
            prefixes = np.concatenate(
                [grown, np.tile(np.arange(ny, dtype=np.intp), grown.shape[0] // ny)[:, None]],
                axis=1,
            )

        return step, advance
    m = max(int(cap // max(n, 1)), 1000)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 2, n, 0)))
    y_hist = np.zeros((m, 0), dtype=np.intp)

    def step(i):
        x_col = _feedback_inputs(tx, pair, i, y_hist, n)
        q = np.bincount(x_col, minlength=pair.nx) / m
        return x_col, q

    def advance(i, x_col, ker):
        nonlocal y_hist
        y_col = _draw_rows(rng, ker[x_col])
        y_hist = np.concatenate([y_hist, y_col[:, None]], axis=1)

    return step, advance


def converse_adversary(pair, tx, n, estimation_budget=None, seed=0):
    """Per-step hull minimizers at the transmitter's input marginals.

    Step i uses the minimizing mixture pair of the conditional divergence
    at the marginal law of X_i, so the per-step divergences sum to at most
    n times the shared-randomness exponent (up to solver tolerance).
    """
    marg = _static_marginals(tx, pair, n)
    rows0, rows1, kls = [], [], []
    cache = {}
    if marg is not None:
        for i in range(n):
            key = marg[i].tobytes()
            if key not in cache:
                cache[key] = min_kl_over_hulls(pair, marg[i])
            val, lam, mu = cache[key]
            rows0.append(Distribution(pair.h0.states, lam))
            rows1.append(Distribution(pair.h1.states, mu))
            kls.append(val)
    elif isinstance(tx, AdaptiveDeterministic):
        step, advance = _feedback_marginals(tx, pair, n, rows0, estimation_budget, seed)
        for i in range(n):
            x_col, q = step(i)
            key = q.tobytes()
            if key not in cache:
                cache[key] = min_kl_over_hulls(pair, q)
            val, lam, mu = cache[key]
            rows0.append(Distribution(pair.h0.states, lam))
            rows1.append(Distribution(pair.h1.states, mu))
            kls.append(val)
            advance(i, x_col, np.einsum("s,sxy->xy", lam, pair.h0.tensor))
    else:
        raise PairValidationError(
            [f"converse adversary does not support {type(tx).__name__} transmitters"]
        )
    return ConverseAdversary(
        h0=Memoryless(tuple(rows0)),
        h1=Memoryless(tuple(rows1)),
        step_kl=tuple(kls),
        total_kl=float(sum(kls)),
    )


def transsym_attack_pair(pair, tx_law, tol=GAP_TOL):
    """Attack pair from the trans-symmetrizability witnesses.

    tx_law is the explicit word law the adversary imitates (a SharedCodeword
    or a Deterministic word). Against a transmitter drawing from the same
    law, the H0-attacked and H1-attacked output laws coincide.
    """
    if isinstance(tx_law, SharedCodeword):
        words, probs = tuple(tx_law.words), tuple(tx_law.probs)
    elif isinstance(tx_law, Deterministic):
        words, probs = (tx_law.sequence,), (1.0,)
    else:
        raise PairValidationError(
            ["transsym attack needs a SharedCodeword or Deterministic word law"]
        )
    cert = transsym_gap(pair)
    if cert.gap > tol:
        raise PairValidationError(
            [f"pair is not trans-symmetrizable (gap {cert.gap:.3e})"]
        )
    return (
        TransSymAttack(words, probs, cert.witness_h0),
        TransSymAttack(words, probs, cert.witness_h1),
    )
