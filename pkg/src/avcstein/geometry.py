"""Geometric separation certificates for a hypothesis pair.

Two quantities, each the optimum of a small linear program:

* hull gap: how far apart the convex hulls of the two kernel families are in
  the max-abs entry metric; zero exactly when the hulls intersect.
* trans-symmetrizability gap: how close the adversary can come to making the
  two hypotheses mimic one another through input-dependent state kernels;
  zero exactly when the pair is trans-symmetrizable.

Barred states are always evaluated through the H1 family's kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import GAP_TOL
from .errors import ConvergenceError
from .lp import solve_lp


@dataclass
class GapCertificate:
    gap: float
    witness_h0: np.ndarray  # state weights (hull) or conditional kernel (trans-sym)
    witness_h1: np.ndarray
    solver_meta: dict = field(default_factory=dict)


def _hull_objective(pair, lam, mu):
    diff = np.einsum("s,sxy->xy", mu, pair.h1.tensor) - np.einsum(
        "s,sxy->xy", lam, pair.h0.tensor
    )
    return float(np.max(np.abs(diff)))


def hull_gap(pair):
    """min over state weights (lambda, mu) of max_{x,y} |Wbar_mu - W_lambda|."""
    ns, nsb = pair.h0.n_states, pair.h1.n_states
    nx, ny = pair.nx, pair.ny
    ncell = nx * ny
    # variables: lam (ns), mu (nsb), t, slacks (2*ncell)
    nvar = ns + nsb + 1 + 2 * ncell
    it = ns + nsb
    A = np.zeros((2 * ncell + 2, nvar))
    b = np.zeros(2 * ncell + 2)
    w0 = pair.h0.tensor.reshape(ns, ncell)
    w1 = pair.h1.tensor.reshape(nsb, ncell)
    for cell in range(ncell):
        r = 2 * cell
        #  (Wbar_mu - W_lam) - t + s1 = 0
        A[r, :ns] = -w0[:, cell]
        A[r, ns : ns + nsb] = w1[:, cell]
        A[r, it] = -1.0
        A[r, it + 1 + r] = 1.0
        # -(Wbar_mu - W_lam) - t + s2 = 0
        A[r + 1, :ns] = w0[:, cell]
        A[r + 1, ns : ns + nsb] = -w1[:, cell]
        A[r + 1, it] = -1.0
        A[r + 1, it + 1 + r + 1] = 1.0
    A[2 * ncell, :ns] = 1.0
    b[2 * ncell] = 1.0
    A[2 * ncell + 1, ns : ns + nsb] = 1.0
    b[2 * ncell + 1] = 1.0
    c = np.zeros(nvar)
    c[it] = 1.0
    res = solve_lp(c, A, b)
    if res.status != "optimal":
        raise ConvergenceError(f"hull gap LP ended with status {res.status}")
    lam = res.x[:ns] / res.x[:ns].sum()
    mu = res.x[ns : ns + nsb] / res.x[ns : ns + nsb].sum()
    gap = _hull_objective(pair, lam, mu)
    residual = abs(gap - res.value)
    if residual > 1e-8:
        raise ConvergenceError(
            f"hull gap witness reproduces {gap:.3e} vs LP optimum {res.value:.3e}"
        )
    return GapCertificate(
        gap=gap,
        witness_h0=lam,
        witness_h1=mu,
        solver_meta={"iterations": res.iterations, "residual": residual, "method": "simplex"},
    )


def _transsym_objective(pair, u, v):
    # e(x, xt, y) = sum_s u[x,s] W(y|xt,s) - sum_sb v[xt,sb] Wbar(y|x,sb)
    a = np.einsum("xs,szy->xzy", u, pair.h0.tensor)  # (x, xt, y)
    bb = np.einsum("zs,sxy->xzy", v, pair.h1.tensor)
    return float(np.max(np.abs(a - bb)))


def transsym_gap(pair):
    """min over conditional kernels (P_{S|X}, P_{Sbar|X}) of the mimicry error.

    Error at (x, xt, y): sum_s P_{S|X}(s|x) W(y|xt,s) minus
    sum_sb P_{Sbar|X}(sb|xt) Wbar(y|x,sb); the gap is the smallest achievable
    max-abs error.
    """
    ns, nsb = pair.h0.n_states, pair.h1.n_states
    nx, ny = pair.nx, pair.ny
    nu, nv = nx * ns, nx * nsb
    ncell = nx * nx * ny
    it = nu + nv
    nvar = nu + nv + 1 + 2 * ncell
    A = np.zeros((2 * ncell + 2 * nx, nvar))
    b = np.zeros(2 * ncell + 2 * nx)
    w0 = pair.h0.tensor  # (s, x, y)
    w1 = pair.h1.tensor
    r = 0
    for x in range(nx):
        for xt in range(nx):
            for y in range(ny):
                # +e - t + s1 = 0 ; -e - t + s2 = 0
                for sgn in (1.0, -1.0):
                    for s in range(ns):
                        A[r, x * ns + s] = sgn * w0[s, xt, y]
                    for sb in range(nsb):
                        A[r, nu + xt * nsb + sb] = -sgn * w1[sb, x, y]
                    A[r, it] = -1.0
                    A[r, it + 1 + r] = 1.0
                    r += 1
    for x in range(nx):
        A[r, x * ns : (x + 1) * ns] = 1.0
        b[r] = 1.0
        r += 1
    for x in range(nx):
        A[r, nu + x * nsb : nu + (x + 1) * nsb] = 1.0
        b[r] = 1.0
        r += 1
    c = np.zeros(nvar)
    c[it] = 1.0
    res = solve_lp(c, A, b)
    if res.status != "optimal":
        raise ConvergenceError(f"trans-sym gap LP ended with status {res.status}")
    u = res.x[:nu].reshape(nx, ns)
    v = res.x[nu : nu + nv].reshape(nx, nsb)
    u /= u.sum(axis=1, keepdims=True)
    v /= v.sum(axis=1, keepdims=True)
    gap = _transsym_objective(pair, u, v)
    residual = abs(gap - res.value)
    if residual > 1e-8:
        raise ConvergenceError(
            f"trans-sym witness reproduces {gap:.3e} vs LP optimum {res.value:.3e}"
        )
    return GapCertificate(
        gap=gap,
        witness_h0=u,
        witness_h1=v,
        solver_meta={"iterations": res.iterations, "residual": residual, "method": "simplex"},
    )


def hulls_intersect(pair, tol=GAP_TOL):
    """True when the convex hulls of the two families meet (gap <= tol)."""
    return hull_gap(pair).gap <= tol


def is_trans_symmetrizable(pair, tol=GAP_TOL):
    """True when input-dependent state kernels can equalize the two hypotheses."""
    return transsym_gap(pair).gap <= tol
