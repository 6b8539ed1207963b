"""Small optimization helpers shared by solvers and grid oracles."""

from __future__ import annotations

import itertools

import numpy as np


def simplex_grid(dim, denom):
    """All probability vectors with entries k/denom, as a (M, dim) array."""
    if dim == 1:
        return np.ones((1, 1))
    pts = []
    for combo in itertools.combinations(range(denom + dim - 1), dim - 1):
        prev = -1
        row = []
        for c in combo:
            row.append(c - prev - 1)
            prev = c
        row.append(denom + dim - 2 - prev)
        pts.append(row)
    return np.asarray(pts, dtype=float) / denom


def edge_directions(dim):
    """Simplex edge moves e_i - e_j for all ordered pairs, shape (d*(d-1), dim)."""
    dirs = []
    for i in range(dim):
        for j in range(dim):
            if i != j:
                v = np.zeros(dim)
                v[i], v[j] = 1.0, -1.0
                dirs.append(v)
    return np.asarray(dirs) if dirs else np.zeros((0, dim))


def pattern_candidates(points, radius, dirs):
    """Feasible simplex moves around each point: (B, C, d) with C = len(dirs)+1.

    Moves that would leave the simplex are replaced by the unmoved point.
    """
    B, d = points.shape
    cands = points[:, None, :] + radius[:, None, None] * dirs[None, :, :]
    bad = (cands < 0).any(axis=2)
    cands = np.where(bad[:, :, None], points[:, None, :], cands)
    return np.concatenate([points[:, None, :], cands], axis=1)


def block_pattern_min(eval_fn, lam, mu, r0=0.25, min_radius=1e-9, max_rounds=200):
    """Batched pattern search minimizing eval_fn over a product of simplices.

    eval_fn(lam (B,C,d1), mu (B,C,d2)) -> (B,C). Blocks move alternately along
    simplex edges with a per-instance shrinking radius. Smooth convex
    objectives end at the joint minimum (blockwise KKT = joint KKT here).
    """
    B, d1 = lam.shape
    d2 = mu.shape[1]
    dirs1, dirs2 = edge_directions(d1), edge_directions(d2)
    radius = np.full(B, r0)
    best = eval_fn(lam[:, None, :], mu[:, None, :])[:, 0]
    for _ in range(max_rounds):
        improved = np.zeros(B, dtype=bool)
        if d1 > 1:
            cands = pattern_candidates(lam, radius, dirs1)
            vals = eval_fn(cands, np.repeat(mu[:, None, :], cands.shape[1], axis=1))
            k = np.argmin(vals, axis=1)
            v = vals[np.arange(B), k]
            upd = v < best - 1e-15
            lam[upd] = cands[np.arange(B), k][upd]
            best = np.where(upd, v, best)
            improved |= upd
        if d2 > 1:
            cands = pattern_candidates(mu, radius, dirs2)
            vals = eval_fn(np.repeat(lam[:, None, :], cands.shape[1], axis=1), cands)
            k = np.argmin(vals, axis=1)
            v = vals[np.arange(B), k]
            upd = v < best - 1e-15
            mu[upd] = cands[np.arange(B), k][upd]
            best = np.where(upd, v, best)
            improved |= upd
        radius = np.where(improved, radius, radius * 0.5)
        if np.all(radius < min_radius):
            break
    return lam, mu, best


def project_simplex(v):
    """Euclidean projection of the last axis onto the probability simplex."""
    shape = v.shape
    v2 = v.reshape(-1, shape[-1])
    u = np.sort(v2, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, shape[-1] + 1)
    cond = u - css / idx > 0
    rho = shape[-1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(v2.shape[0]), rho] / (rho + 1)
    w = np.clip(v2 - theta[:, None], 0.0, None)
    return w.reshape(shape)
