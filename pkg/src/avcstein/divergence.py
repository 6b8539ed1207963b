"""Information measures in nats.

All evaluators here are exact: no probability floors, and infinite values are
returned as the explicit sentinel ``math.inf`` (never a large float). Iterative
solvers elsewhere apply their own documented floors before calling logs.
"""

from __future__ import annotations

import math

import numpy as np

from .channels import Channel, Distribution, StateChannelFamily
from .errors import PairValidationError


def _vec(p):
    if isinstance(p, Distribution):
        return p.probs
    return np.asarray(p, dtype=float)


def _mat(w):
    if isinstance(w, Channel):
        return w.kernel
    return np.asarray(w, dtype=float)


def rel_entropy(p, q):
    """Sum p ln(p/q) over cells with p > 0; inf if q vanishes under p."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    pm = p[mask]
    return float(np.sum(pm * np.log(pm / q[mask])))


def kl(p, q):
    """KL divergence D(p || q) in nats; +inf iff p puts mass where q is 0."""
    if isinstance(p, Distribution) and isinstance(q, Distribution):
        if p.labels != q.labels:
            raise PairValidationError("kl: distributions over different alphabets")
    p, q = _vec(p), _vec(q)
    if p.shape != q.shape:
        raise PairValidationError(f"kl: shapes {p.shape} vs {q.shape}")
    return rel_entropy(p, q)


def cond_kl(w, wbar, px):
    """Conditional divergence D(W || Wbar | P_X) = sum_x px(x) D(row_x || rowbar_x)."""
    w, wbar, px = _mat(w), _mat(wbar), _vec(px)
    if w.shape != wbar.shape or w.shape[0] != px.shape[0]:
        raise PairValidationError("cond_kl: shape mismatch")
    total = 0.0
    for x in range(px.shape[0]):
        if px[x] <= 0:
            continue
        d = rel_entropy(w[x], wbar[x])
        if math.isinf(d):
            return math.inf
        total += px[x] * d
    return total


def phi_t(w, wbar, px, t):
    """ln sum_x px(x) sum_y w(y|x)^(1-t) wbar(y|x)^t.

    The strong-converse use has t < 0, where cells with w > 0 = wbar make the
    value +inf. For t in [0,1) the 0^0 convention follows the limit: terms with
    w(y|x) = 0 contribute nothing.
    """
    w, wbar, px = _mat(w), _mat(wbar), _vec(px)
    if t >= 1:
        raise ValueError("phi_t defined for t < 1")
    mask = w > 0
    if t < 0 and np.any(mask & (wbar <= 0) & (px[:, None] > 0)):
        return math.inf
    terms = np.zeros_like(w)
    if t == 0:
        terms[mask] = w[mask]
    else:
        sub = mask & (wbar > 0) if t > 0 else mask
        terms[sub] = np.exp((1.0 - t) * np.log(w[sub]) + t * np.log(wbar[sub]))
    total = float(px @ terms.sum(axis=1))
    if total <= 0:
        return -math.inf
    return math.log(total)


def _axes_tuple(axes):
    if isinstance(axes, (int, np.integer)):
        return (int(axes),)
    return tuple(int(a) for a in axes)


def _normalized_tensor(joint):
    t = np.asarray(getattr(joint, "counts", joint), dtype=float)
    s = t.sum()
    if s <= 0:
        raise PairValidationError("joint tensor has no mass")
    if abs(s - 1.0) > 1e-9 and not hasattr(joint, "counts"):
        raise PairValidationError(f"joint tensor sums to {s:.12g}, not 1")
    return t / s


def _marginal(t, keep):
    """Marginalize onto the listed axes, reordered to the listed order."""
    drop = tuple(a for a in range(t.ndim) if a not in keep)
    m = t.sum(axis=drop) if drop else t
    sorted_keep = sorted(keep)
    perm = [sorted_keep.index(k) for k in keep]
    if perm != list(range(len(keep))):
        m = np.transpose(m, perm)
    return m


def mutual_info(joint, axes_a, axes_b, given=()):
    """Mutual information I(A;B) or conditional I(A;B|C) from a joint tensor.

    ``joint`` is a probability tensor (or an object with integer ``counts``);
    axis groups select which coordinates form A, B, and the conditioning block.
    Axes outside the groups are marginalized out first.
    """
    t = _normalized_tensor(joint)
    a = _axes_tuple(axes_a)
    b = _axes_tuple(axes_b)
    c = _axes_tuple(given)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise PairValidationError("mutual_info: axis groups overlap")
    abc = _marginal(t, a + b + c)
    na, nb, nc = len(a), len(b), len(c)
    flat = abc.reshape(
        int(np.prod(abc.shape[:na], dtype=np.int64)),
        int(np.prod(abc.shape[na : na + nb], dtype=np.int64)),
        int(np.prod(abc.shape[na + nb :], dtype=np.int64)),
    )
    p_ac = flat.sum(axis=1)  # (A, C)
    p_bc = flat.sum(axis=0)  # (B, C)
    p_c = p_bc.sum(axis=0)  # (C,)
    num = flat * p_c[None, None, :]
    den = p_ac[:, None, :] * p_bc[None, :, :]
    mask = flat > 0
    # cells with positive joint mass always have positive marginals
    out = float(np.sum(flat[mask] * np.log(num[mask] / den[mask])))
    return max(out, 0.0)


def kl_joint_to_channel(joint, kernel, input_axes, state_axes, output_axes):
    """D(P_{XSY} || P_{XS} x W) = sum P(x,s,y) ln( P(y|x,s) / W(y|x,s) ).

    ``joint`` is a probability tensor whose axes are partitioned by the three
    groups (extra axes are marginalized out). ``kernel`` is either a
    StateChannelFamily (single input/state/output axes) or an ndarray indexed
    as (inputs..., states..., outputs...).
    """
    t = _normalized_tensor(joint)
    ia = _axes_tuple(input_axes)
    sa = _axes_tuple(state_axes)
    oa = _axes_tuple(output_axes)
    m = _marginal(t, ia + sa + oa)
    ni = int(np.prod(m.shape[: len(ia)], dtype=np.int64))
    ns = int(np.prod(m.shape[len(ia) : len(ia) + len(sa)], dtype=np.int64))
    no = int(np.prod(m.shape[len(ia) + len(sa) :], dtype=np.int64))
    p = m.reshape(ni, ns, no)
    if isinstance(kernel, StateChannelFamily):
        w = np.transpose(kernel.tensor, (1, 0, 2)).reshape(ni, ns, no)
    else:
        w = np.asarray(kernel, dtype=float).reshape(ni, ns, no)
    p_xs = p.sum(axis=2)
    num = p
    den = p_xs[:, :, None] * w
    mask = p > 0
    if np.any(den[mask] <= 0):
        return math.inf
    return max(float(np.sum(p[mask] * np.log(num[mask] / den[mask]))), 0.0)
