"""Feasible slack triples for the private-randomness lower bound.

The bound rests on ruling out joint laws of (X, X', Sbar, S, Y) that make an
honest transmission and a spoofed one look alike. This module scores such
joints, searches for violating ones, and builds certified-safe triples from
the two geometry gaps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import GAP_TOL
from .divergence import kl_joint_to_channel, mutual_info
from .errors import AvcsteinError, PairValidationError
from .exponents import d_opt_det
from .geometry import hull_gap, transsym_gap
from .optim import project_simplex, simplex_grid

PINSKER_C = math.sqrt(2.0)


@dataclass(frozen=True)
class EtaTriple:
    """Slack triple plus the auxiliary delta; all strictly positive."""

    eta1: float
    eta2: float
    eta3: float
    delta: float

    def __post_init__(self):
        vals = (self.eta1, self.eta2, self.eta3, self.delta)
        if not all(v > 0 for v in vals):
            raise PairValidationError(f"triple entries must be positive, got {vals}")


class FiveWayJoint:
    """Joint law of (X, X', Sbar, S, Y) with both input margins pinned.

    tensor axes: X, X', Sbar, S, Y.
    """

    def __init__(self, tensor, p_input):
        t = np.asarray(tensor, dtype=float)
        if t.ndim != 5:
            raise PairValidationError(f"joint must have 5 axes, got {t.ndim}")
        if t.shape[0] != t.shape[1]:
            raise PairValidationError("X and X' axes must have equal size")
        if (t < -1e-12).any():
            raise PairValidationError("joint has negative entries")
        t = np.clip(t, 0.0, None)
        total = t.sum()
        if abs(total - 1.0) > 1e-9:
            raise PairValidationError(f"joint sums to {total}, expected 1")
        p = np.asarray(getattr(p_input, "probs", p_input), dtype=float)
        if p.shape != (t.shape[0],):
            raise PairValidationError("input law does not match the X axis")
        mx = t.sum(axis=(1, 2, 3, 4))
        mxp = t.sum(axis=(0, 2, 3, 4))
        if np.abs(mx - p).max() > 1e-8 or np.abs(mxp - p).max() > 1e-8:
            raise PairValidationError("X and X' margins must both equal the input law")
        t.setflags(write=False)
        self.tensor = t
        self.p_input = p

    @property
    def off_diagonal_mass(self):
        pxx = self.tensor.sum(axis=(2, 3, 4))
        return float(pxx.sum() - np.trace(pxx))


@dataclass
class ViolationFound:
    joint: FiveWayJoint
    slack: float


@dataclass
class NoViolationFound:
    min_slack: float


def eta_slack(pair, joint, triple):
    """Largest constraint margin of the joint; negative = violation witness.

    The two coupling conditions apply only when the joint puts mass off the
    (X, X') diagonal.
    """
    J = joint.tensor
    pxx = J.sum(axis=(2, 3, 4))
    include = pxx.sum() - np.trace(pxx) > 0
    return float(max(_margin_values(pair, J, triple, include)))


# ------------------------------------------------------- certified triples


def eta_certified_from_gaps(pair, p_input, tol=GAP_TOL):
    """Triple guaranteed feasible, sized by the two geometry gaps.

    Parametrized as eta1 = eta2 = a, eta3 = 3a, delta = a/10; the largest a
    satisfying both gap inequalities is shrunk by 0.99 for strictness.
    """
    p = np.asarray(getattr(p_input, "probs", p_input), dtype=float)
    alpha = float(p.min())
    if alpha <= 0:
        raise AvcsteinError("certified triple needs a full-support input law")
    z1 = hull_gap(pair).gap
    z2 = transsym_gap(pair).gap
    if z1 <= tol or z2 <= tol:
        raise AvcsteinError(
            f"certified triple needs both gaps positive (got {z1:.3g}, {z2:.3g})"
        )
    bound1 = (alpha * z1 / PINSKER_C) ** 2 / (math.sqrt(2.0) + math.sqrt(0.2)) ** 2
    bound2 = (alpha**2 * z2 / PINSKER_C) ** 2 / (math.sqrt(5.0) + math.sqrt(0.3)) ** 2
    a = 0.99 * min(bound1, bound2)
    return EtaTriple(eta1=a, eta2=a, eta3=3.0 * a, delta=a / 10.0)


# ------------------------------------------------------- structured witnesses


def _diag_mimic_joint(pair, p, lam, mu):
    """Diagonal joint from hull-intersection witnesses; every margin vanishes."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    nx, ny = pair.nx, pair.ny
    ns, nsb = W0.shape[0], W1.shape[0]
    q = np.einsum("s,sxy->xy", lam, W0)
    J = np.zeros((nx, nx, nsb, ns, ny))
    for x in range(nx):
        for y in range(ny):
            if q[x, y] <= 0 or p[x] <= 0:
                continue
            post_s = lam * W0[:, x, y] / q[x, y]
            qb = float(mu @ W1[:, x, y])
            post_b = (mu * W1[:, x, y] / qb) if qb > 0 else np.full(nsb, 1.0 / nsb)
            J[x, x, :, :, y] = p[x] * q[x, y] * np.outer(post_b, post_s)
    return J


def _product_transsym_joint(pair, p, U, V):
    """Product-coupling joint from symmetrizing kernels; margins vanish.

    X, X' independent with law p; Sbar from V at X'; Y through the H1 channel
    at (X, Sbar); S from its posterior under the H0 story at (X, X', Y).
    """
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    nx, ny = pair.nx, pair.ny
    ns, nsb = W0.shape[0], W1.shape[0]
    J = np.zeros((nx, nx, nsb, ns, ny))
    for x in range(nx):
        for xp in range(nx):
            mass = p[x] * p[xp]
            if mass <= 0:
                continue
            for y in range(ny):
                mix = float(U[x] @ W0[:, xp, y])
                lead = V[xp] * W1[:, x, y]
                if mix > 0:
                    post = U[x] * W0[:, xp, y] / mix
                else:
                    tot = lead.sum()
                    if tot <= 0:
                        continue
                    post = np.full(ns, 1.0 / ns)
                J[x, xp, :, :, y] = mass * np.outer(lead, post)
    total = J.sum()
    if total > 0:
        J = J / total
    return J


# ------------------------------------------------------- feasibility search


def _transport_vertices(p):
    """Vertices of the transportation polytope with both margins p."""
    n = len(p)
    seen = {}
    for sig in itertools.permutations(range(n)):
        for tau in itertools.permutations(range(n)):
            a = [p[i] for i in sig]
            b = [p[j] for j in tau]
            M = np.zeros((n, n))
            i = j = 0
            while i < n and j < n:
                m = min(a[i], b[j])
                M[i, j] = m
                a[i] -= m
                b[j] -= m
                if a[i] <= 1e-15 and i < n:
                    i += 1
                elif b[j] <= 1e-15:
                    j += 1
            V = np.zeros((n, n))
            V[np.ix_(sig, tau)] = M
            seen[tuple(np.round(V, 12).ravel())] = V
    return np.stack(list(seen.values()))


def _margin_grads(pair, J, floor=1e-18):
    """ln-ratio gradients of each margin with respect to the joint cells."""
    W0, W1 = pair.h0.tensor, pair.h1.tensor
    nx, nxp, nsb, ns, ny = J.shape
    grads = []

    def safe_log(a):
        return np.log(np.maximum(a, floor))

    # I(X; Sbar)
    p_xb = J.sum(axis=(1, 3, 4))
    p_x = p_xb.sum(axis=1)
    p_b = p_xb.sum(axis=0)
    g = safe_log(p_xb) - safe_log(p_x)[:, None] - safe_log(p_b)[None, :]
    grads.append(np.broadcast_to(g[:, None, :, None, None], J.shape))
    # I(X'; S)
    p_ps = J.sum(axis=(0, 2, 4))
    p_p = p_ps.sum(axis=1)
    p_s = p_ps.sum(axis=0)
    g = safe_log(p_ps) - safe_log(p_p)[:, None] - safe_log(p_s)[None, :]
    grads.append(np.broadcast_to(g[None, :, None, :, None], J.shape))
    # D(P_{X Sbar Y} || P_{X Sbar} Wbar)
    p_xby = J.sum(axis=(1, 3))
    p_xb2 = p_xby.sum(axis=2)
    wbar = W1.transpose(1, 0, 2)  # (x, sbar, y)
    g = safe_log(p_xby) - safe_log(p_xb2)[:, :, None] - safe_log(wbar)
    grads.append(np.broadcast_to(g[:, None, :, None, :], J.shape))
    # D(P_{X' S Y} || P_{X' S} W)
    p_psy = J.sum(axis=(0, 2))
    p_ps2 = p_psy.sum(axis=2)
    w = W0.transpose(1, 0, 2)  # (x', s, y)
    g = safe_log(p_psy) - safe_log(p_ps2)[:, :, None] - safe_log(w)
    grads.append(np.broadcast_to(g[None, :, None, :, :], J.shape))
    # I(X'; X Y | Sbar)
    p4 = J.sum(axis=3)  # (x, x', sbar, y)
    p_b4 = p4.sum(axis=(0, 1, 3))
    p_pb = p4.sum(axis=(0, 3))  # (x', sbar)
    p_xby4 = p4.sum(axis=1)  # (x, sbar, y)
    g = (
        safe_log(p4)
        + safe_log(p_b4)[None, None, :, None]
        - safe_log(p_pb)[None, :, :, None]
        - safe_log(p_xby4)[:, None, :, :]
    )
    grads.append(np.broadcast_to(g[:, :, :, None, :], J.shape))
    # I(X; X' Y | S)
    p5 = J.sum(axis=2)  # (x, x', s, y)
    p_s5 = p5.sum(axis=(0, 1, 3))
    p_xs = p5.sum(axis=(1, 3))  # (x, s)
    p_psy5 = p5.sum(axis=0)  # (x', s, y)
    g = (
        safe_log(p5)
        + safe_log(p_s5)[None, None, :, None]
        - safe_log(p_xs)[:, None, :, None]
        - safe_log(p_psy5)[None, :, :, :]
    )
    grads.append(np.broadcast_to(g[:, :, None, :, :], J.shape))
    return grads


def _margin_values(pair, J, triple, include_coupling):
    vals = [
        mutual_info(J, (0,), (2,)) - triple.eta1,
        mutual_info(J, (1,), (3,)) - triple.delta,
        kl_joint_to_channel(J, pair.h1, (0,), (2,), (4,)) - triple.eta2,
        kl_joint_to_channel(J, pair.h0, (1,), (3,), (4,)) - triple.delta,
    ]
    if include_coupling:
        vals.append(mutual_info(J, (1,), (0, 4), given=(2,)) - triple.eta3)
        vals.append(mutual_info(J, (0,), (1, 4), given=(3,)) - triple.delta)
    return np.asarray(vals)


def _smoothed_step(pair, J, triple, include_coupling, tau):
    """Smoothed max of margins and its gradient with respect to the cells."""
    vals = _margin_values(pair, J, triple, include_coupling)
    finite = np.where(np.isfinite(vals), vals, 1e6)
    shift = finite.max()
    wts = np.exp((finite - shift) / tau)
    wts /= wts.sum()
    grads = _margin_grads(pair, J)
    k = len(vals)
    total = np.zeros_like(J)
    for i in range(k):
        if wts[i] > 1e-12:
            total += wts[i] * grads[i]
    return float(shift), total


def _search_restart(pair, p, triple, rng, diagonal, iters=150):
    """One projected-gradient run; returns (best exact slack, best joint)."""
    nx, ny = pair.nx, pair.ny
    ns, nsb = pair.h0.n_states, pair.h1.n_states
    dim = nsb * ns * ny
    if diagonal:
        blocks = rng.dirichlet(np.ones(dim), size=nx)
        theta = None
        verts = None
    else:
        verts = _transport_vertices(p)
        theta = rng.dirichlet(np.ones(len(verts)))
        blocks = rng.dirichlet(np.ones(dim), size=nx * nx)

    best = (math.inf, None)
    for it in range(1, iters + 1):
        if diagonal:
            J = np.zeros((nx, nx, nsb, ns, ny))
            idx = np.arange(nx)
            J[idx, idx] = p[:, None, None, None] * blocks.reshape(nx, nsb, ns, ny)
        else:
            C = np.einsum("k,kxz->xz", theta, verts)
            J = (C.reshape(nx, nx, 1, 1, 1)
                 * blocks.reshape(nx, nx, nsb, ns, ny))
        include = (not diagonal) and (J.sum(axis=(2, 3, 4)).sum()
                                      - np.trace(J.sum(axis=(2, 3, 4))) > 0)
        if it % 25 == 0 or it == iters:
            exact = float(max(_margin_values(pair, J, triple, include)))
            if exact < best[0]:
                best = (exact, J.copy())
            if exact < -1e-9:
                break
        tau = 1e-2 * (1e-4 / 1e-2) ** (it / iters)
        _, grad = _smoothed_step(pair, J, triple, include, tau)
        step = 0.5 / math.sqrt(it)
        if diagonal:
            gb = (p[:, None, None, None] * grad[idx, idx]).reshape(nx, dim)
            blocks = project_simplex(blocks - step * gb)
        else:
            inner = np.einsum("xzbsy,xzbsy->xz", grad,
                              blocks.reshape(nx, nx, nsb, ns, ny))
            gtheta = np.einsum("kxz,xz->k", verts, inner)
            gblocks = (C.reshape(nx, nx, 1, 1, 1) * grad).reshape(nx * nx, dim)
            theta = project_simplex(theta - step * gtheta)
            blocks = project_simplex(blocks - step * gblocks)
    return best


def eta_feasibility_check(pair, p_input, triple, restarts=50, seed=0):
    """Look for a joint violating the triple; sound when it reports one.

    Structured witnesses run first (they are exact when a gap closes), then
    projected-gradient restarts over diagonal and general joints. A found
    violation is always re-scored exactly before being returned.
    """
    p = np.asarray(getattr(p_input, "probs", p_input), dtype=float)
    candidates = []
    hull = hull_gap(pair)
    if hull.gap <= GAP_TOL:
        candidates.append(_diag_mimic_joint(pair, p, hull.witness_h0, hull.witness_h1))
    sym = transsym_gap(pair)
    if sym.gap <= GAP_TOL:
        candidates.append(_product_transsym_joint(pair, p, sym.witness_h0, sym.witness_h1))

    min_slack = math.inf
    for J in candidates:
        if J.sum() <= 0:
            continue
        joint = FiveWayJoint(J / J.sum(), p)
        s = eta_slack(pair, joint, triple)
        min_slack = min(min_slack, s)
        if s < 0:
            return ViolationFound(joint=joint, slack=s)

    rng = np.random.default_rng(seed)
    for r in range(restarts):
        diagonal = r % 2 == 0
        slack, J = _search_restart(pair, p, triple, rng, diagonal)
        if J is None:
            continue
        total = J.sum()
        if total <= 0:
            continue
        joint = FiveWayJoint(_renormalize_margins(J, p), p)
        s = eta_slack(pair, joint, triple)
        min_slack = min(min_slack, s)
        if s < 0:
            return ViolationFound(joint=joint, slack=s)
    return NoViolationFound(min_slack=float(min_slack))


def _renormalize_margins(J, p):
    """Rescale (x, x') slices so both input margins hit p exactly enough."""
    total = J.sum()
    if total > 0:
        J = J / total
    return J


# ------------------------------------------------------------- lower bound


def pvt_lower_bound(pair, p_denom=4, search=False, restarts=20, seed=0):
    """Best available lower bound with a provenance record."""
    hull = hull_gap(pair)
    if hull.gap <= GAP_TOL:
        return 0.0, {"reason": "hulls intersect", "value": 0.0}
    sym = transsym_gap(pair)
    if sym.gap <= GAP_TOL:
        return 0.0, {"reason": "trans-symmetrizable", "value": 0.0}

    det = d_opt_det(pair, max_iter=20000)
    best = det.value
    record = {
        "reason": "deterministic",
        "value": det.value,
        "d_det": det.value,
    }

    sweep = [np.full(pair.nx, 1.0 / pair.nx)]
    for g in simplex_grid(pair.nx, p_denom):
        if g.min() > 0:
            sweep.append(g)
    best_cert = None
    for p in sweep:
        try:
            triple = eta_certified_from_gaps(pair, p)
        except AvcsteinError:
            continue
        val = min(triple.eta1, triple.eta2, triple.eta3 / 3.0)
        if best_cert is None or val > best_cert[0]:
            best_cert = (val, p, triple)
    if best_cert is not None:
        record["certified"] = {
            "value": best_cert[0],
            "p": best_cert[1].tolist(),
            "triple": best_cert[2],
        }
        if best_cert[0] > best:
            best = best_cert[0]
            record["reason"] = "certified"
            record["value"] = best

    if search and best_cert is not None:
        val, p, triple = best_cert
        scale = 1.5
        heur = None
        cur = triple
        for _ in range(4):
            cand = EtaTriple(cur.eta1 * scale, cur.eta2 * scale,
                             cur.eta3 * scale, cur.delta)
            res = eta_feasibility_check(pair, p, cand, restarts=restarts, seed=seed)
            if isinstance(res, ViolationFound):
                break
            heur = cand
            cur = cand
        if heur is not None:
            hval = min(heur.eta1, heur.eta2, heur.eta3 / 3.0)
            record["heuristic"] = {"value": hval, "triple": heur, "flagged": True}
            if hval > best:
                best = hval
                record["reason"] = "heuristic"
                record["value"] = best
    return float(best), record
