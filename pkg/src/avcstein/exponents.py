"""Saddle solvers for the operational exponents of a hypothesis pair.

Three regimes:

* shared randomness: compare mixtures of the two families as channels under
  an optimized input law (concave outer, jointly convex inner);
* deterministic codewords: the same inner problem per input row, maximized
  over single inputs;
* private randomness: compare induced output laws, with state weights chosen
  independently of the input (single-letter) or as arbitrary joints on the
  extended alphabets (block / adaptive variants).

Inner minimizations run exponentiated-gradient mirror descent with floored
logs; reported values are re-evaluated exactly at the returned witnesses,
with explicit +inf detection via a support test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import Distribution, adaptive_extend_2, block_extend
from .config import SOLVER_FLOOR
from .errors import PairValidationError
from .geometry import hull_gap
from .optim import block_pattern_min, simplex_grid

FLOOR = SOLVER_FLOOR


@dataclass
class SaddleSolution:
    value: float
    px_star: Distribution
    lambda_star: Distribution
    mu_star: Distribution
    converged: bool
    iterations: int
    duality_gap_estimate: float
    unbounded_suspect: bool = False
    meta: dict = field(default_factory=dict)


@dataclass
class DetSolution:
    value: float
    x_star: str
    x_index: int
    lambda_star: Distribution
    mu_star: Distribution
    converged: bool
    iterations: int
    per_input: np.ndarray = None


@dataclass
class BlockSolution:
    value: float
    lambda_star: Distribution
    mu_star: Distribution
    pair_ext: object
    converged: bool
    iterations: int
    unbounded_suspect: bool = False


@dataclass
class CurvePoint:
    t: float
    phi_star: float
    slope: float  # phi_star / (-t)
    bound: float


@dataclass
class CurveResult:
    bound: float
    points: list


# ---------------------------------------------------------------- exact evals


def kl_rows_batch(p, q):
    """Row KL over the last axis with +inf support detection; batched."""
    mask = p > 0
    bad = (mask & (q <= 0)).any(axis=-1)
    num = np.where(mask, p, 1.0)
    den = np.where(q > 0, q, 1.0)
    rows = np.where(mask, p * (np.log(num) - np.log(den)), 0.0).sum(axis=-1)
    return np.where(bad, np.inf, rows)


def weight_rows(rows, px):
    """Average per-input values with px; +inf propagates from supported rows."""
    active = np.where(px > 0, rows, 0.0)
    hit_inf = np.isinf(active).any(axis=-1)
    finite = np.where(np.isfinite(active), active, 0.0)
    vals = (px * finite).sum(axis=-1)
    return np.where(hit_inf, np.inf, vals)


def _mix(weights, tensor):
    """Mix a (S, nx, ny) family tensor with (..., S) weights -> (..., nx, ny)."""
    return np.einsum("...s,sxy->...xy", weights, tensor)


def exact_channel_kl(W0, W1, lam, mu, px):
    """Exact D(W_lam || Wbar_mu | px), batched over leading axes."""
    return weight_rows(kl_rows_batch(_mix(lam, W0), _mix(mu, W1)), px)


def exact_output_kl(W0, W1, lam, mu, px):
    """Exact KL between induced output laws, batched over leading axes."""
    q = np.einsum("...x,...xy->...y", px, _mix(lam, W0))
    qb = np.einsum("...x,...xy->...y", px, _mix(mu, W1))
    return kl_rows_batch(q, qb)


def exact_phi(W0, W1, lam, mu, px, t):
    """Exact pre-log sum of phi_t at mixture weights; +inf on support failure."""
    wl = _mix(lam, W0)
    wm = _mix(mu, W1)
    mask = wl > 0
    bad = ((mask & (wm <= 0)).any(axis=-1) & (px > 0)).any(axis=-1)
    terms = np.zeros_like(wl)
    sub = mask & (wm > 0)
    terms[sub] = np.exp((1.0 - t) * np.log(wl[sub]) + t * np.log(wm[sub]))
    total = np.einsum("...x,...xy->...", px, terms)
    return np.where(bad, np.inf, total)


def feasible_h0_states(W0, W1, px):
    """Boolean mask of h0 states usable without escaping the h1 output support.

    State s is usable when W(.|x,s) puts no mass on outputs unreachable by any
    h1 state at an input with px(x) > 0. The channel-level inner minimum is
    finite iff at least one state is usable.
    """
    ubar = (W1 > 0).any(axis=0)  # (nx, ny)
    bad_cells = (~ubar) & (np.asarray(px) > 0)[:, None]
    return ~((W0 > 0) & bad_cells[None, :, :]).any(axis=(1, 2))


# ------------------------------------------------------- mirror descent core


def _mirror_descent(obj_grad, lam, mu, max_iter=100000, check_every=100, tol=1e-10):
    """Exponentiated-gradient descent on a product of simplices, batched.

    Steps follow the 1/sqrt(iter) schedule. Every check window a member
    counts as converged when its objective moved less than tol, or when its
    linearization gap certifies it is within tol of the minimum (all three
    objectives are jointly convex in the weight pair, so the gap
    <g_lam, lam> - min_i g_lam[i] + <g_mu, mu> - min_j g_mu[j]
    upper-bounds the suboptimality). Runs until all members converge or the
    iteration cap is hit.
    """
    zl = np.log(np.maximum(lam, 1e-300))
    zm = np.log(np.maximum(mu, 1e-300))
    B = lam.shape[0]
    last = np.full(B, np.inf)
    it = 0
    converged = np.zeros(B, dtype=bool)
    while it < max_iter:
        it += 1
        lam = np.exp(zl - zl.max(axis=1, keepdims=True))
        lam /= lam.sum(axis=1, keepdims=True)
        mu = np.exp(zm - zm.max(axis=1, keepdims=True))
        mu /= mu.sum(axis=1, keepdims=True)
        obj, glam, gmu = obj_grad(lam, mu)
        if it % check_every == 0:
            fw_gap = (
                np.einsum("bs,bs->b", glam, lam) - glam.min(axis=1)
                + np.einsum("bs,bs->b", gmu, mu) - gmu.min(axis=1)
            )
            converged = (np.abs(obj - last) < tol) | (fw_gap < tol)
            last = obj
            if converged.all():
                break
        step = 1.0 / math.sqrt(it)
        zl -= step * glam
        zm -= step * gmu
    lam = np.exp(zl - zl.max(axis=1, keepdims=True))
    lam /= lam.sum(axis=1, keepdims=True)
    mu = np.exp(zm - zm.max(axis=1, keepdims=True))
    mu /= mu.sum(axis=1, keepdims=True)
    obj2, _, _ = obj_grad(lam, mu)
    return lam, mu, obj2, it, converged


def _channel_obj_grad(W0, W1, px):
    """Floored conditional-KL objective and gradients, batched over px rows."""

    def f(lam, mu):
        wl = np.einsum("bs,sxy->bxy", lam, W0)
        wm = np.einsum("bs,sxy->bxy", mu, W1)
        wlf = np.maximum(wl, FLOOR)
        wmf = np.maximum(wm, FLOOR)
        L = np.log(wlf) - np.log(wmf)
        obj = np.einsum("bx,bxy->b", px, wl * L)
        m = px[:, :, None] * (L + 1.0)
        glam = np.einsum("bxy,sxy->bs", m, W0)
        gmu = -np.einsum("bxy,sxy->bs", px[:, :, None] * (wl / wmf), W1)
        return obj, glam, gmu

    return f


def _output_obj_grad(W0, W1, px):
    """Floored output-law KL objective and gradients, batched over px rows."""
    a0 = np.einsum("bx,sxy->bsy", px, W0)
    a1 = np.einsum("bx,sxy->bsy", px, W1)

    def f(lam, mu):
        q = np.einsum("bs,bsy->by", lam, a0)
        qb = np.einsum("bs,bsy->by", mu, a1)
        qf = np.maximum(q, FLOOR)
        qbf = np.maximum(qb, FLOOR)
        L = np.log(qf) - np.log(qbf)
        obj = np.einsum("by,by->b", q, L)
        glam = np.einsum("bsy,by->bs", a0, L + 1.0)
        gmu = -np.einsum("bsy,by->bs", a1, q / qbf)
        return obj, glam, gmu

    return f


def _phi_obj_grad(W0, W1, px, t):
    """Floored pre-log phi_t objective and gradients (t < 0)."""

    def f(lam, mu):
        wl = np.einsum("bs,sxy->bxy", lam, W0)
        wm = np.einsum("bs,sxy->bxy", mu, W1)
        wlf = np.maximum(wl, FLOOR)
        wmf = np.maximum(wm, FLOOR)
        T = np.exp((1.0 - t) * np.log(wlf) + t * np.log(wmf))
        obj = np.einsum("bx,bxy->b", px, T)
        glam = np.einsum("bxy,sxy->bs", px[:, :, None] * ((1.0 - t) * T / wlf), W0)
        gmu = np.einsum("bxy,sxy->bs", px[:, :, None] * (t * T / wmf), W1)
        return obj, glam, gmu

    return f


_OBJECTIVES = {
    "channel": (_channel_obj_grad, exact_channel_kl),
    "output": (_output_obj_grad, exact_output_kl),
}


def _uniform(B, d):
    return np.full((B, d), 1.0 / d)


def _clean_weights(w, ok_mask):
    """Zero unusable-state dust from a weight vector, renormalizing."""
    w = np.where(ok_mask, w, 0.0)
    s = w.sum()
    return w / s if s > 0 else np.full_like(w, 1.0 / len(w))


def min_kl_over_hulls(pair, px, max_iter=100000):
    """Inner convex minimum over mixture weights at a fixed input law.

    Returns (value, lambda_star, mu_star); value is math.inf exactly when
    every mu leaves part of the supported h0 output mass uncovered.
    """
    pxv = px.probs if isinstance(px, Distribution) else np.asarray(px, dtype=float)
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    f = _channel_obj_grad(W0, W1, pxv[None, :])
    lam, mu, obj, it, conv = _mirror_descent(
        f, _uniform(1, W0.shape[0]), _uniform(1, W1.shape[0]), max_iter=max_iter
    )
    ok = feasible_h0_states(W0, W1, pxv)
    if not ok.any():
        return math.inf, lam[0], mu[0]
    lam0 = _clean_weights(lam[0], ok)
    value = float(exact_channel_kl(W0, W1, lam0[None], mu, pxv[None])[0])
    return value, lam0, mu[0]


def _polish(make, px, lam, mu, min_radius=1e-11, max_rounds=300):
    """Pattern-search cleanup of the inner weights at fixed px, batched.

    Mirror descent under the diminishing step schedule leaves a slow tail on
    flat objectives; a shrinking-radius edge search removes it cheaply. The
    objectives are jointly convex in the weights, so the search ends at the
    joint minimum.
    """
    if lam.shape[1] == 1 and mu.shape[1] == 1:
        o, _, _ = make(px)(lam, mu)
        return lam, mu, o
    cache = {}

    def ev(lams, mus):
        B, C, d1 = lams.shape
        if C not in cache:
            cache[C] = make(np.repeat(px, C, axis=0))
        o, _, _ = cache[C](lams.reshape(B * C, d1), mus.reshape(B * C, -1))
        return o.reshape(B, C)

    return block_pattern_min(ev, lam.copy(), mu.copy(), min_radius=min_radius,
                             max_rounds=max_rounds)


def _saddle(pair, kind, seed=0, restarts=20, grid_denom=64, coarse_iter=600,
            refine_iter=400, outer_iter=40, final_iter=5000, phi_t_value=None):
    """Shared outer-max / inner-min pipeline for the saddle quantities.

    Grid certificate over px (inputs of size <= 3), mirror ascent from the
    input vertices, the best grid points and random restarts, then a last
    solve plus pattern cleanup at the winner.
    """
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    nx = pair.nx
    ns, nsb = W0.shape[0], W1.shape[0]
    if kind == "phi":
        make = lambda px: _phi_obj_grad(W0, W1, px, phi_t_value)
        exact = lambda lam, mu, px: exact_phi(W0, W1, lam, mu, px, phi_t_value)
    else:
        make_raw, exact_raw = _OBJECTIVES[kind]
        make = lambda px: make_raw(W0, W1, px)
        exact = lambda lam, mu, px: exact_raw(W0, W1, lam, mu, px)

    total_iters = 0
    cand = [np.full((1, nx), 1.0 / nx), np.eye(nx)]
    if nx <= 3:
        G = simplex_grid(nx, grid_denom)
        lam, mu, obj, it, _ = _mirror_descent(
            make(G), _uniform(len(G), ns), _uniform(len(G), nsb), max_iter=coarse_iter
        )
        total_iters += it
        order = np.argsort(obj)
        cand.append(G[order[-4:]])
    rng = np.random.default_rng(seed)
    if restarts > 0:
        cand.append(rng.dirichlet(np.ones(nx), size=restarts))
    px = np.vstack(cand)
    B = len(px)

    # mirror ascent on px with warm-started inner solves
    lam, mu = _uniform(B, ns), _uniform(B, nsb)
    obj = None
    best_seen = -math.inf
    stall = 0
    for k in range(1, outer_iter + 1):
        cap = refine_iter if k > 1 else max(refine_iter, 2000)
        lam, mu, obj, it, _ = _mirror_descent(make(px), lam, mu, max_iter=cap)
        total_iters += it
        top = float(obj.max())
        if top < best_seen + 1e-10:
            stall += 1
            if stall >= 3 and k >= 8:
                break
        else:
            stall = 0
        best_seen = max(best_seen, top)
        # supergradient: per-input contribution of the floored objective
        wl = np.einsum("bs,sxy->bxy", lam, W0)
        wm = np.einsum("bs,sxy->bxy", mu, W1)
        wlf, wmf = np.maximum(wl, FLOOR), np.maximum(wm, FLOOR)
        if kind == "channel":
            rows = (wl * (np.log(wlf) - np.log(wmf))).sum(axis=2)
        elif kind == "phi":
            t = phi_t_value
            rows = np.exp((1.0 - t) * np.log(wlf) + t * np.log(wmf)).sum(axis=2)
        else:
            q = np.einsum("bx,bxy->by", px, wl)
            qb = np.einsum("bx,bxy->by", px, wm)
            qf, qbf = np.maximum(q, FLOOR), np.maximum(qb, FLOOR)
            L = np.log(qf) - np.log(qbf)
            rows = np.einsum("bxy,by->bx", wl, L + 1.0) - np.einsum(
                "bxy,by->bx", wm, q / qbf
            )
        step = 0.5 / math.sqrt(k)
        z = np.log(np.maximum(px, 1e-300)) + step * rows
        px = np.exp(z - z.max(axis=1, keepdims=True))
        px /= px.sum(axis=1, keepdims=True)

    # evaluation: refine and pattern-clean every candidate, then a final
    # solve plus cleanup at the winner
    lam, mu, obj, it, _ = _mirror_descent(make(px), lam, mu, max_iter=refine_iter)
    lam, mu, obj = _polish(make, px, lam, mu)
    best = int(np.argmax(obj))
    px_f = px[best : best + 1]
    lam_f, mu_f, obj_f, it_f, conv = _mirror_descent(
        make(px_f), lam[best : best + 1], mu[best : best + 1], max_iter=final_iter
    )
    lam_f, mu_f, obj_f = _polish(make, px_f, lam_f, mu_f, min_radius=1e-12)
    total_iters += it + it_f
    return px_f[0], lam_f[0], mu_f[0], float(obj_f[0]), bool(conv.all()), total_iters


def _dist(labels, vec):
    vec = np.clip(vec, 0.0, None)
    return Distribution(labels, vec / vec.sum())


def _intersection_certificate(pair):
    """Exact zero solution when the channel hulls meet.

    A common mixture makes the two attacked kernels coincide at every input
    simultaneously, so every randomness setting has exponent exactly 0; the
    LP witness replaces a slowly converging saddle iteration.
    """
    cert = hull_gap(pair)
    if cert.gap > 1e-9:
        return None
    return SaddleSolution(
        value=0.0,
        px_star=_dist(pair.input_labels, np.full(pair.nx, 1.0 / pair.nx)),
        lambda_star=_dist(pair.h0.states, np.asarray(cert.witness_h0, dtype=float)),
        mu_star=_dist(pair.h1.states, np.asarray(cert.witness_h1, dtype=float)),
        converged=True,
        iterations=0,
        duality_gap_estimate=0.0,
        meta={"certificate": "hull-intersection"},
    )


def d_opt_shared(pair, seed=0, restarts=20, **kw):
    """Shared-randomness exponent: sup over px of the channel-level inner min."""
    zero = _intersection_certificate(pair)
    if zero is not None:
        return zero
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    px, lam, mu, floored, conv, iters = _saddle(pair, "channel", seed=seed,
                                                restarts=restarts, **kw)
    ok = feasible_h0_states(W0, W1, np.full(pair.nx, 1.0 / pair.nx))
    suspect = not ok.any()
    if suspect:
        value = floored
        gap = math.inf
    else:
        lam = _clean_weights(lam, feasible_h0_states(W0, W1, px))
        value = float(exact_channel_kl(W0, W1, lam[None], mu[None], px[None])[0])
        rows = kl_rows_batch(_mix(lam, W0), _mix(mu, W1))
        upper = float(np.max(rows))  # sup over px at the witnesses
        gap = max(upper - value, 0.0)
    return SaddleSolution(
        value=value,
        px_star=_dist(pair.input_labels, px),
        lambda_star=_dist(pair.h0.states, lam),
        mu_star=_dist(pair.h1.states, mu),
        converged=conv,
        iterations=iters,
        duality_gap_estimate=gap,
        unbounded_suspect=suspect,
    )


def d_opt_det(pair, max_iter=100000):
    """Deterministic-input exponent: per-row inner minima, maximized over x.

    Ties at the maximum go to the lowest input index.
    """
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    nx = pair.nx
    px = np.eye(nx)
    f = _channel_obj_grad(W0, W1, px)
    lam, mu, obj, iters, conv = _mirror_descent(
        f, _uniform(nx, W0.shape[0]), _uniform(nx, W1.shape[0]), max_iter=max_iter
    )
    lam, mu, obj = _polish(lambda p: _channel_obj_grad(W0, W1, p), px, lam, mu,
                           min_radius=1e-12)
    per_x = np.empty(nx)
    lam_c = lam.copy()
    for x in range(nx):
        ok = feasible_h0_states(W0, W1, px[x])
        if not ok.any():
            per_x[x] = math.inf
            continue
        lam_c[x] = _clean_weights(lam[x], ok)
        per_x[x] = exact_channel_kl(W0, W1, lam_c[x][None], mu[x][None], px[x][None])[0]
    finite_max = per_x[np.isfinite(per_x)].max(initial=0.0)
    target = math.inf if np.isinf(per_x).any() else finite_max
    x_star = int(np.flatnonzero(per_x >= (target if math.isinf(target) else target - 1e-12))[0])
    return DetSolution(
        value=float(per_x[x_star]),
        x_star=pair.input_labels[x_star],
        x_index=x_star,
        lambda_star=_dist(pair.h0.states, lam_c[x_star]),
        mu_star=_dist(pair.h1.states, mu[x_star]),
        converged=bool(conv.all()),
        iterations=iters,
        per_input=per_x,
    )


def d_pvt_iid(pair, seed=0, restarts=20, **kw):
    """Private-randomness single-letter exponent over induced output laws."""
    zero = _intersection_certificate(pair)
    if zero is not None:
        return zero
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    px, lam, mu, floored, conv, iters = _saddle(pair, "output", seed=seed,
                                                restarts=restarts, **kw)
    # support test on the induced output atoms at full-support px
    full = np.full(pair.nx, 1.0 / pair.nx)
    a0 = np.einsum("x,sxy->sy", full, W0)[:, None, :]
    a1 = np.einsum("x,sxy->sy", full, W1)[:, None, :]
    ok = feasible_h0_states(a0, a1, np.ones(1))
    suspect = not ok.any()
    if suspect:
        value = floored
        gap = math.inf
    else:
        a0x = np.einsum("x,sxy->sy", px, W0)[:, None, :]
        a1x = np.einsum("x,sxy->sy", px, W1)[:, None, :]
        lam = _clean_weights(lam, feasible_h0_states(a0x, a1x, np.ones(1)))
        value = float(exact_output_kl(W0, W1, lam[None], mu[None], px[None])[0])
        # data processing: channel-level KL at the witnesses dominates the
        # output-level value, so it bounds the reporting slack from above
        chan = float(exact_channel_kl(W0, W1, lam[None], mu[None], px[None])[0])
        gap = max(chan - value, 0.0)
    return SaddleSolution(
        value=value,
        px_star=_dist(pair.input_labels, px),
        lambda_star=_dist(pair.h0.states, lam),
        mu_star=_dist(pair.h1.states, mu),
        converged=conv,
        iterations=iters,
        duality_gap_estimate=gap,
        unbounded_suspect=suspect,
    )


def d_pvt_block(pair, block_input, k=None, extension="block", max_iter=100000,
                budget=None):
    """Inner private exponent at a fixed block input with joint state weights.

    The pair is extended to k letters (memoryless product or the 2-step
    adaptive construction); state weights range over arbitrary joints on the
    extended state alphabets.
    """
    if extension == "adaptive2":
        if k not in (None, 2):
            raise ValueError("adaptive extension is defined for k = 2")
        ext = adaptive_extend_2(pair, budget=budget)
        k = 2
    else:
        if k is None:
            n = len(block_input.labels) if isinstance(block_input, Distribution) else len(block_input)
            k = round(math.log(n, pair.nx))
            if pair.nx**k != n:
                raise PairValidationError(
                    f"block input length {n} is not a power of |X|={pair.nx}"
                )
        ext = block_extend(pair, k, budget=budget)
    if isinstance(block_input, Distribution):
        if block_input.labels != ext.input_labels:
            raise PairValidationError(
                "block input labels do not match the extended inputs"
            )
        pxv = block_input.probs
    else:
        pxv = np.asarray(block_input, dtype=float)
        if pxv.shape != (len(ext.input_labels),):
            raise PairValidationError("block input has wrong length")
    W0, W1 = ext.h0.tensor, ext.h1.tensor
    f = _output_obj_grad(W0, W1, pxv[None])
    lam, mu, obj, iters, conv = _mirror_descent(
        f, _uniform(1, W0.shape[0]), _uniform(1, W1.shape[0]), max_iter=max_iter
    )
    lam, mu, obj = _polish(lambda p: _output_obj_grad(W0, W1, p), pxv[None],
                           lam, mu, min_radius=1e-12)
    a0 = np.einsum("x,sxy->sy", pxv, W0)[:, None, :]
    a1 = np.einsum("x,sxy->sy", pxv, W1)[:, None, :]
    ok = feasible_h0_states(a0, a1, np.ones(1))
    suspect = not ok.any()
    if suspect:
        value = float(obj[0])
        lam0 = lam[0]
    else:
        lam0 = _clean_weights(lam[0], ok)
        value = float(exact_output_kl(W0, W1, lam0[None], mu, pxv[None])[0])
    return BlockSolution(
        value=value,
        lambda_star=_dist(ext.h0.states, lam0),
        mu_star=_dist(ext.h1.states, mu[0]),
        pair_ext=ext,
        converged=bool(conv.all()),
        iterations=iters,
        unbounded_suspect=suspect,
    )


def phi_star_shared(pair, t, seed=0, restarts=20, **kw):
    """sup over px of the inner min of phi_t; the strong-converse ingredient."""
    if t >= 0:
        raise ValueError("phi_star_shared requires t < 0")
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    px, lam, mu, floored_prelog, conv, iters = _saddle(
        pair, "phi", seed=seed, restarts=restarts, phi_t_value=t, **kw
    )
    ok = feasible_h0_states(W0, W1, np.full(pair.nx, 1.0 / pair.nx))
    suspect = not ok.any()
    if suspect:
        value = math.log(max(floored_prelog, 1e-300))
        gap = math.inf
    else:
        lam = _clean_weights(lam, feasible_h0_states(W0, W1, px))
        prelog = float(exact_phi(W0, W1, lam[None], mu[None], px[None], t)[0])
        value = math.log(prelog) if prelog > 0 else -math.inf
        wl, wm = _mix(lam, W0), _mix(mu, W1)
        mask = wl > 0
        sub = mask & (wm > 0)
        terms = np.zeros_like(wl)
        terms[sub] = np.exp((1.0 - t) * np.log(wl[sub]) + t * np.log(wm[sub]))
        bad = (mask & (wm <= 0)).any(axis=-1)
        per_x = np.where(bad, np.inf, terms.sum(axis=-1))
        upper = float(np.max(per_x))
        gap = max(math.log(upper) - value, 0.0) if np.isfinite(upper) else math.inf
    return SaddleSolution(
        value=value,
        px_star=_dist(pair.input_labels, px),
        lambda_star=_dist(pair.h0.states, lam),
        mu_star=_dist(pair.h1.states, mu),
        converged=conv,
        iterations=iters,
        duality_gap_estimate=gap,
        unbounded_suspect=suspect,
        meta={"t": t},
    )


def strong_converse_curve(pair, r, t_grid, **kw):
    """Best certified decay of the H0 correct-decision probability at rate r.

    Each grid point t < 0 contributes (-t/(1-t)) * (r - phi*(t)/(-t)); the
    curve value is the maximum over the grid.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    t_grid = list(t_grid)
    if not t_grid or any(t >= 0 for t in t_grid):
        raise ValueError("t_grid must be nonempty with all entries < 0")
    points = []
    for t in t_grid:
        sol = phi_star_shared(pair, t, **kw)
        slope = sol.value / (-t) if np.isfinite(sol.value) else math.inf
        bound = (-t / (1.0 - t)) * (r - slope)
        if math.isinf(slope):
            bound = -math.inf
        points.append(CurvePoint(t=t, phi_star=sol.value, slope=slope, bound=bound))
    best = max(p.bound for p in points)
    return CurveResult(bound=best, points=points)


def weak_converse_bound(d, eps):
    """Upper bound d/(1-eps) on any achievable exponent at error level eps."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if d < 0:
        raise ValueError("d must be nonnegative")
    return d / (1.0 - eps)
