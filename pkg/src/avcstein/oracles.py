"""Slow grid-search references used by the tests to cross-check the solvers.

Everything here favors directness over speed: dense weight grids, exact
divergences with no floors, and a shrinking edge-move refinement. Meant for
small pairs only.
"""

from __future__ import annotations

import math

import numpy as np

from .optim import project_simplex, simplex_grid


def _kl_last(p, q):
    """Exact KL along the last axis; +inf where the support check fails."""
    pos = p > 0
    sp = np.where(pos, p, 1.0)
    sq = np.where(q > 0, q, 1.0)
    vals = np.where(pos, p * (np.log(sp) - np.log(sq)), 0.0).sum(axis=-1)
    bad = (pos & (q <= 0)).any(axis=-1)
    return np.where(bad, np.inf, vals)


def _channel_value(W0, W1, px, lam, mu):
    wl = np.einsum("s,sxy->xy", lam, W0)
    wm = np.einsum("s,sxy->xy", mu, W1)
    rows = _kl_last(wl, wm)
    sup = px > 0
    if np.isinf(rows[sup]).any():
        return math.inf
    return float(px[sup] @ rows[sup])


def _output_value(W0, W1, px, lam, mu):
    q0 = np.einsum("s,x,sxy->y", lam, px, W0)
    q1 = np.einsum("s,x,sxy->y", mu, px, W1)
    return float(_kl_last(q0, q1))


def _phi_prelog(W0, W1, px, lam, mu, t):
    wl = np.einsum("s,sxy->xy", lam, W0)
    wm = np.einsum("s,sxy->xy", mu, W1)
    both = (wl > 0) & (wm > 0)
    if ((wl > 0) & ~both).any():
        return math.inf
    terms = np.where(both, np.where(both, wl, 1.0) ** (1.0 - t) * np.where(both, wm, 1.0) ** t, 0.0)
    return float(px @ terms.sum(axis=1))


def _refine_two(fn, lam, mu, step0, min_step=1e-8, max_rounds=150):
    """Shrinking edge moves on two weight vectors, minimizing fn."""
    val = fn(lam, mu)
    step = step0
    for _ in range(max_rounds):
        improved = False
        for which in (0, 1):
            vec = lam if which == 0 else mu
            d = len(vec)
            for i in range(d):
                for j in range(d):
                    if i == j or vec[j] <= 0:
                        continue
                    cand = vec.copy()
                    m = min(step, cand[j])
                    cand[i] += m
                    cand[j] -= m
                    v = fn(cand, mu) if which == 0 else fn(lam, cand)
                    if v < val - 1e-15:
                        val = v
                        if which == 0:
                            lam = cand
                        else:
                            mu = cand
                        vec = cand
                        improved = True
        if not improved:
            step *= 0.5
            if step < min_step:
                break
    return val, lam, mu


def _mix_grid(weights, tensor):
    return np.einsum("gs,sxy->gxy", weights, tensor)


def _pair_tables(W0, W1, denom):
    gl = simplex_grid(W0.shape[0], denom)
    gm = simplex_grid(W1.shape[0], denom)
    return gl, gm, _mix_grid(gl, W0), _mix_grid(gm, W1)


def _channel_rows_table(WL, WM, chunk=32):
    """Row KL for every mixture combo: (A, B, nx) with +inf support misses."""
    A, nx, _ = WL.shape
    B = WM.shape[0]
    out = np.empty((A, B, nx))
    for a0 in range(0, A, chunk):
        p = WL[a0 : a0 + chunk, None, :, :]
        q = WM[None, :, :, :]
        out[a0 : a0 + chunk] = _kl_last(p, q)
    return out


def oracle_inner_channel(pair, px, denom=12):
    """Grid plus local search for the weighted row-KL inner minimum."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    px = np.asarray(px, dtype=float)
    gl, gm, WL, WM = _pair_tables(W0, W1, denom)
    rows = _channel_rows_table(WL, WM)
    finite = np.where(np.isinf(rows), 0.0, rows)
    V = np.einsum("x,abx->ab", px, finite)
    bad = np.einsum("x,abx->ab", (px > 0).astype(float), np.isinf(rows).astype(float)) > 0
    V = np.where(bad, np.inf, V)
    a, b = np.unravel_index(np.argmin(V), V.shape)
    fn = lambda l, m: _channel_value(W0, W1, px, l, m)
    return _refine_two(fn, gl[a].copy(), gm[b].copy(), 1.0 / denom)


def oracle_inner_output(pair, px, denom=12):
    """Grid plus local search for the induced output-law KL inner minimum."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    px = np.asarray(px, dtype=float)
    gl, gm, WL, WM = _pair_tables(W0, W1, denom)
    q0 = np.einsum("x,axy->ay", px, WL)
    q1 = np.einsum("x,bxy->by", px, WM)
    V = _kl_last(q0[:, None, :], q1[None, :, :])
    a, b = np.unravel_index(np.argmin(V), V.shape)
    fn = lambda l, m: _output_value(W0, W1, px, l, m)
    return _refine_two(fn, gl[a].copy(), gm[b].copy(), 1.0 / denom)


def oracle_inner_phi(pair, px, t, denom=12):
    """Grid plus local search for the inner phi pre-log minimum."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    px = np.asarray(px, dtype=float)
    gl, gm, WL, WM = _pair_tables(W0, W1, denom)
    A, B = len(gl), len(gm)
    V = np.empty((A, B))
    for a in range(A):
        wl = WL[a]
        both = (wl[None, :, :] > 0) & (WM > 0)
        miss = ((wl[None, :, :] > 0) & ~both).any(axis=(1, 2))
        terms = np.where(both, np.where(wl[None] > 0, wl[None], 1.0) ** (1.0 - t)
                         * np.where(WM > 0, WM, 1.0) ** t, 0.0)
        vals = np.einsum("x,bx->b", px, terms.sum(axis=2))
        V[a] = np.where(miss, np.inf, vals)
    a, b = np.unravel_index(np.argmin(V), V.shape)
    fn = lambda l, m: _phi_prelog(W0, W1, px, l, m, t)
    return _refine_two(fn, gl[a].copy(), gm[b].copy(), 1.0 / denom)


def _climb_px(nx, inner_fine, px0, step0, max_rounds=60, min_step=1e-5):
    """Local ascent on the input simplex with fine inner solves."""
    px = px0.copy()
    best_val = inner_fine(px)[0]
    step = step0
    for _ in range(max_rounds):
        improved = False
        for i in range(nx):
            for j in range(nx):
                if i == j or px[j] <= 0:
                    continue
                cand = px.copy()
                m = min(step, cand[j])
                cand[i] += m
                cand[j] -= m
                v = inner_fine(cand)[0]
                if v > best_val + 1e-15:
                    best_val, px = v, cand
                    improved = True
        if not improved:
            step *= 0.5
            if step < min_step:
                break
    return best_val, px


def oracle_d_opt_det(pair, denom=12):
    """Reference deterministic-input exponent: per-vertex inner minima."""
    per = []
    for x in range(pair.nx):
        px = np.zeros(pair.nx)
        px[x] = 1.0
        per.append(oracle_inner_channel(pair, px, denom=denom)[0])
    return max(per)


def oracle_d_opt_shared(pair, px_denom=32, denom=10):
    """Reference shared-randomness exponent by dense double grid search."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    _, _, WL, WM = _pair_tables(W0, W1, denom)
    rows = _channel_rows_table(WL, WM)
    G = simplex_grid(pair.nx, px_denom)
    finite = np.where(np.isinf(rows), 0.0, rows)
    V = np.einsum("px,abx->pab", G, finite)
    bad = np.einsum("px,abx->pab", (G > 0).astype(float),
                    np.isinf(rows).astype(float)) > 0
    per_px = np.where(bad, np.inf, V).min(axis=(1, 2))
    k = int(np.argmax(per_px))
    fine = lambda px: oracle_inner_channel(pair, px, denom=denom)
    val, _ = _climb_px(pair.nx, fine, G[k], 1.0 / px_denom)
    return val


def oracle_d_pvt_iid(pair, px_denom=32, denom=10):
    """Reference memoryless private exponent by dense double grid search."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    _, _, WL, WM = _pair_tables(W0, W1, denom)
    G = simplex_grid(pair.nx, px_denom)
    q0 = np.einsum("px,axy->pay", G, WL)
    q1 = np.einsum("px,bxy->pby", G, WM)
    per_px = np.empty(len(G))
    for p in range(len(G)):
        per_px[p] = _kl_last(q0[p][:, None, :], q1[p][None, :, :]).min()
    k = int(np.argmax(per_px))
    fine = lambda px: oracle_inner_output(pair, px, denom=denom)
    val, _ = _climb_px(pair.nx, fine, G[k], 1.0 / px_denom)
    return val


def oracle_phi_star(pair, t, px_denom=32, denom=10):
    """Reference phi-star by dense double grid search (t < 0)."""
    if t >= 0:
        raise ValueError("t must be negative")
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    _, _, WL, WM = _pair_tables(W0, W1, denom)
    A, B = len(WL), len(WM)
    terms = np.zeros((A, B, pair.nx))
    inf_mask = np.zeros((A, B, pair.nx), dtype=bool)
    for a in range(A):
        wl = WL[a][None, :, :]
        both = (wl > 0) & (WM > 0)
        inf_mask[a] = ((wl > 0) & ~both).any(axis=2)
        cell = np.where(both, np.where(wl > 0, wl, 1.0) ** (1.0 - t)
                        * np.where(WM > 0, WM, 1.0) ** t, 0.0)
        terms[a] = cell.sum(axis=2)
    G = simplex_grid(pair.nx, px_denom)
    V = np.einsum("px,abx->pab", G, terms)
    bad = np.einsum("px,abx->pab", (G > 0).astype(float),
                    inf_mask.astype(float)) > 0
    per_px = np.where(bad, np.inf, V).min(axis=(1, 2))
    k = int(np.argmax(per_px))
    fine = lambda px: oracle_inner_phi(pair, px, t, denom=denom)
    pre, _ = _climb_px(pair.nx, fine, G[k], 1.0 / px_denom)
    if pre <= 0:
        return -math.inf
    return math.log(pre) if not math.isinf(pre) else math.inf


def oracle_hull_gap(pair, denom=16):
    """Reference hull distance: dense grid over both mixtures, then moves."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    gl, gm, WL, WM = _pair_tables(W0, W1, denom)
    D = np.abs(WM[None, :, :, :] - WL[:, None, :, :]).max(axis=(2, 3))
    a, b = np.unravel_index(np.argmin(D), D.shape)

    def fn(lam, mu):
        diff = np.einsum("s,sxy->xy", mu, W1) - np.einsum("s,sxy->xy", lam, W0)
        return float(np.abs(diff).max())

    val, _, _ = _refine_two(fn, gl[a].copy(), gm[b].copy(), 1.0 / denom)
    return val


def oracle_transsym_gap(pair, denom=8, restarts=8, seed=0):
    """Reference two-sided symmetrizing distance by block descent.

    Starts at every deterministic kernel pair (when few), the uniform pair,
    and random draws; each start runs block passes with a per-row grid, then
    a joint shrinking edge-move polish.
    """
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    nx, ns, nsb = pair.nx, W0.shape[0], W1.shape[0]
    rng = np.random.default_rng(seed)

    def err_max(U, V):
        t0 = np.einsum("xs,sqy->xqy", U, W0)
        t1 = np.einsum("qs,sxy->xqy", V, W1)
        return float(np.abs(t0 - t1).max())

    starts = [(np.full((nx, ns), 1.0 / ns), np.full((nx, nsb), 1.0 / nsb))]
    if ns**nx * nsb**nx <= 256:
        combos_u = list(np.ndindex(*([ns] * nx)))
        combos_v = list(np.ndindex(*([nsb] * nx)))
        for cu in combos_u:
            for cv in combos_v:
                U = np.zeros((nx, ns))
                V = np.zeros((nx, nsb))
                for x, s in enumerate(cu):
                    U[x, s] = 1.0
                for x, s in enumerate(cv):
                    V[x, s] = 1.0
                starts.append((U, V))
    for _ in range(restarts):
        starts.append((rng.dirichlet(np.ones(ns), size=nx),
                       rng.dirichlet(np.ones(nsb), size=nx)))

    grid_u = simplex_grid(ns, denom)
    grid_v = simplex_grid(nsb, denom)
    best = (math.inf, None, None)
    for U0, V0 in starts:
        U, V = U0.copy(), V0.copy()
        val = err_max(U, V)
        for _ in range(20):
            moved = False
            for x in range(nx):
                for g, block in ((grid_u, "u"), (grid_v, "v")):
                    cur = U if block == "u" else V
                    vals = np.empty(len(g))
                    for kk, row in enumerate(g):
                        cur2 = cur.copy()
                        cur2[x] = row
                        vals[kk] = err_max(cur2 if block == "u" else U,
                                           V if block == "u" else cur2)
                    kk = int(np.argmin(vals))
                    if vals[kk] < val - 1e-15:
                        cur[x] = g[kk]
                        val = vals[kk]
                        moved = True
            if not moved:
                break
        if val < best[0]:
            best = (val, U.copy(), V.copy())
    val, U, V = best

    # joint shrinking edge moves across all rows
    step = 1.0 / denom
    for _ in range(200):
        improved = False
        for x in range(nx):
            for block in ("u", "v"):
                cur = U if block == "u" else V
                d = cur.shape[1]
                for i in range(d):
                    for j in range(d):
                        if i == j or cur[x, j] <= 0:
                            continue
                        cand = cur.copy()
                        m = min(step, cand[x, j])
                        cand[x, i] += m
                        cand[x, j] -= m
                        v = err_max(cand if block == "u" else U,
                                    V if block == "u" else cand)
                        if v < val - 1e-15:
                            val = v
                            if block == "u":
                                U = cand
                            else:
                                V = cand
                            improved = True
        if not improved:
            step *= 0.5
            if step < 1e-9:
                break

    # coordinate moves stall on ridges needing joint row changes; finish
    # with projected subgradient runs on the (convex) max objective
    def subgrad(U, V):
        t0 = np.einsum("xs,sqy->xqy", U, W0)
        t1 = np.einsum("qs,sxy->xqy", V, W1)
        d = t0 - t1
        x, q, y = np.unravel_index(np.argmax(np.abs(d)), d.shape)
        sgn = np.sign(d[x, q, y])
        gU = np.zeros_like(U)
        gV = np.zeros_like(V)
        gU[x, :] = sgn * W0[:, q, y]
        gV[q, :] = -sgn * W1[:, x, y]
        return gU, gV

    rng2 = np.random.default_rng(seed + 1)
    polish_starts = [(U.copy(), V.copy())]
    for _ in range(4):
        polish_starts.append((rng2.dirichlet(np.ones(ns), size=nx),
                              rng2.dirichlet(np.ones(nsb), size=nx)))
    for U2, V2 in polish_starts:
        for t in range(1, 4001):
            gU, gV = subgrad(U2, V2)
            h = 0.5 / math.sqrt(t)
            U2 = np.vstack([project_simplex(U2[x] - h * gU[x]) for x in range(nx)])
            V2 = np.vstack([project_simplex(V2[x] - h * gV[x]) for x in range(nx)])
            v = err_max(U2, V2)
            if v < val:
                val = v
    return val
