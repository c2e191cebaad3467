"""Numba kernels for log-kernel summation.

Points are carried as ``(zh, zl)`` pairs: ``zh`` is the working double
and ``zl`` an optional low-order correction (all zeros for plain input).
Near-field differences are formed as ``(zh_i - zh_j) + (zl_i - zl_j)``.

Expansions follow the classical 2D scheme for ``log(z - w)`` but every
coefficient is scaled by its cell radius, so that cells spanning many
orders of magnitude never overflow or underflow ``r**p``.

    multipole about c, scale rho:  Q log(z-c) + sum_k a_k (rho/(z-c))**k
    local about c, scale rho:      sum_l b_l ((z-c)/rho)**l
"""

import math

import numpy as np
from numba import njit

TINY_SCALE = 1e-300


@njit(cache=True, inline="always")
def _logabs(dx, dy):
    s = dx * dx + dy * dy
    if s < 1e-280 or s > 1e280:
        return math.log(math.hypot(dx, dy))
    return 0.5 * math.log(s)


@njit(cache=True)
def direct_self(zh, zl, y, want_imag):
    # each unordered pair is visited once; arg(z_j - z_i) is arg(z_i - z_j)
    # rotated by pi onto the principal branch
    n = zh.size
    re = np.zeros(n)
    im = np.zeros(n)
    for i in range(n):
        zi = zh[i]
        li = zl[i]
        yi = y[i]
        acc = 0.0
        for j in range(i + 1, n):
            d = (zi - zh[j]) + (li - zl[j])
            dx = d.real
            dy = d.imag
            lg = _logabs(dx, dy)
            acc += y[j] * lg
            re[j] += yi * lg
            if want_imag:
                ang = math.atan2(dy, dx)
                im[i] += y[j] * ang
                im[j] += yi * (ang - math.pi if ang > 0 else ang + math.pi)
        re[i] += acc
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        out[i] = complex(re[i], im[i])
    return out


@njit(cache=True)
def direct_targets(tz, sz, y, want_imag):
    nt = tz.size
    ns = sz.size
    out = np.zeros(nt, dtype=np.complex128)
    for i in range(nt):
        re = 0.0
        im = 0.0
        for j in range(ns):
            d = tz[i] - sz[j]
            dx = d.real
            dy = d.imag
            re += y[j] * _logabs(dx, dy)
            if want_imag:
                im += y[j] * math.atan2(dy, dx)
        out[i] = complex(re, im)
    return out


@njit(cache=True)
def min_pair_gap_sorted(zh):
    # zh sorted lexicographically; returns index of the first exact duplicate or -1
    for i in range(zh.size - 1):
        if zh[i] == zh[i + 1]:
            return i
    return -1


@njit(cache=True)
def build_tree(zh, zl, leaf_size):
    """Adaptive binary tree by bounding-box midpoint splits.

    Nodes are created in preorder, so every child id exceeds its parent
    id.  Returns the point permutation and per-node arrays.
    """
    n = zh.size
    perm = np.arange(n)
    cap = 2 * n + 1
    start = np.empty(cap, np.int64)
    stop = np.empty(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    center = np.empty(cap, np.complex128)
    radius = np.empty(cap, np.float64)
    nnodes = 1
    start[0] = 0
    stop[0] = n
    stack = np.empty(cap, np.int64)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        s0 = start[node]
        s1 = stop[node]
        xmin = np.inf
        xmax = -np.inf
        ymin = np.inf
        ymax = -np.inf
        for t in range(s0, s1):
            p = zh[perm[t]]
            xmin = min(xmin, p.real)
            xmax = max(xmax, p.real)
            ymin = min(ymin, p.imag)
            ymax = max(ymax, p.imag)
        cx = 0.5 * (xmin + xmax)
        cy = 0.5 * (ymin + ymax)
        c = complex(cx, cy)
        rad = 0.0
        for t in range(s0, s1):
            i = perm[t]
            d = (zh[i] - c) + zl[i]
            rad = max(rad, abs(d))
        center[node] = c
        radius[node] = rad
        if s1 - s0 <= leaf_size:
            continue
        along_x = (xmax - xmin) >= (ymax - ymin)
        # partition perm[s0:s1] by the split coordinate
        lo = s0
        hi = s1 - 1
        while lo <= hi:
            p = zh[perm[lo]]
            key = p.real if along_x else p.imag
            if key < (cx if along_x else cy):
                lo += 1
            else:
                tmp = perm[lo]
                perm[lo] = perm[hi]
                perm[hi] = tmp
                hi -= 1
        if lo == s0 or lo == s1:
            continue  # extent below resolution: keep as an oversized leaf
        a = nnodes
        b = nnodes + 1
        nnodes += 2
        start[a] = s0
        stop[a] = lo
        start[b] = lo
        stop[b] = s1
        left[node] = a
        right[node] = b
        stack[sp] = b
        sp += 1
        stack[sp] = a
        sp += 1
    return (
        perm,
        start[:nnodes].copy(),
        stop[:nnodes].copy(),
        left[:nnodes].copy(),
        right[:nnodes].copy(),
        center[:nnodes].copy(),
        radius[:nnodes].copy(),
    )


@njit(cache=True)
def order_for_ratio(alpha, eps, pmax):
    """Smallest order p with 2 alpha**(p+1) / (1 - alpha) <= eps."""
    if alpha <= 0.0:
        return 1
    target = eps * (1.0 - alpha) / 2.0
    p = int(math.ceil(math.log(target) / math.log(alpha))) - 1
    if p < 1:
        p = 1
    if p > pmax:
        p = pmax
    return p


@njit(cache=True)
def build_interactions(start, stop, left, right, center, radius, theta, eps, pmax, direct_work):
    """Symmetric dual-tree traversal.

    Returns M2L pairs with their truncation orders, near-field node pairs
    and the list of nodes whose internal interactions are summed directly.
    """
    cap = 64
    m2l_a = np.empty(cap, np.int64)
    m2l_b = np.empty(cap, np.int64)
    m2l_p = np.empty(cap, np.int64)
    nm2l = 0
    p2p_a = np.empty(cap, np.int64)
    p2p_b = np.empty(cap, np.int64)
    np2p = 0
    selfn = np.empty(cap, np.int64)
    nself = 0
    stack_a = np.empty(cap, np.int64)
    stack_b = np.empty(cap, np.int64)
    sp = 0
    stack_a[0] = 0
    stack_b[0] = 0
    sp = 1
    push_a = np.empty(3, np.int64)
    push_b = np.empty(3, np.int64)
    while sp > 0:
        sp -= 1
        a = stack_a[sp]
        b = stack_b[sp]
        na = stop[a] - start[a]
        nb = stop[b] - start[b]
        npush = 0
        if a == b:
            if left[a] < 0 or na * na <= direct_work:
                if nself == selfn.size:
                    selfn = _grow(selfn)
                selfn[nself] = a
                nself += 1
                continue
            l = left[a]
            r = right[a]
            push_a[0] = l
            push_b[0] = l
            push_a[1] = r
            push_b[1] = r
            push_a[2] = l
            push_b[2] = r
            npush = 3
        else:
            dist = abs(center[a] - center[b])
            sep = radius[a] + radius[b]
            if sep < theta * dist:
                p = order_for_ratio(sep / dist, eps, pmax)
                if 4 * na * nb <= (p + 1) * (p + 1):
                    if np2p == p2p_a.size:
                        p2p_a = _grow(p2p_a)
                        p2p_b = _grow(p2p_b)
                    p2p_a[np2p] = a
                    p2p_b[np2p] = b
                    np2p += 1
                else:
                    if nm2l == m2l_a.size:
                        m2l_a = _grow(m2l_a)
                        m2l_b = _grow(m2l_b)
                        m2l_p = _grow(m2l_p)
                    m2l_a[nm2l] = a
                    m2l_b[nm2l] = b
                    m2l_p[nm2l] = p
                    nm2l += 1
                continue
            a_leaf = left[a] < 0
            b_leaf = left[b] < 0
            if (a_leaf and b_leaf) or na * nb <= direct_work:
                if np2p == p2p_a.size:
                    p2p_a = _grow(p2p_a)
                    p2p_b = _grow(p2p_b)
                p2p_a[np2p] = a
                p2p_b[np2p] = b
                np2p += 1
                continue
            if b_leaf or (not a_leaf and radius[a] >= radius[b]):
                push_a[0] = left[a]
                push_b[0] = b
                push_a[1] = right[a]
                push_b[1] = b
            else:
                push_a[0] = a
                push_b[0] = left[b]
                push_a[1] = a
                push_b[1] = right[b]
            npush = 2
        for t in range(npush):
            if sp == stack_a.size:
                stack_a = _grow(stack_a)
                stack_b = _grow(stack_b)
            stack_a[sp] = push_a[t]
            stack_b[sp] = push_b[t]
            sp += 1
    return (
        m2l_a[:nm2l].copy(),
        m2l_b[:nm2l].copy(),
        m2l_p[:nm2l].copy(),
        p2p_a[:np2p].copy(),
        p2p_b[:np2p].copy(),
        selfn[:nself].copy(),
    )


@njit(cache=True)
def _grow(a):
    out = np.empty(2 * a.size, a.dtype)
    out[: a.size] = a
    return out


@njit(cache=True)
def binomial_table(nmax):
    c = np.zeros((nmax + 1, nmax + 1))
    for n in range(nmax + 1):
        c[n, 0] = 1.0
        for k in range(1, n + 1):
            c[n, k] = c[n - 1, k - 1] + (c[n - 1, k] if k <= n - 1 else 0.0)
    return c


@njit(cache=True)
def upward_pass(zh, zl, y, perm, start, stop, left, right, center, scale, p, binom):
    """P2M on leaves and M2M towards the root; returns (Q, scaled a_k)."""
    nn = start.size
    q = np.zeros(nn)
    a = np.zeros((nn, p + 1), dtype=np.complex128)
    sk = np.empty(p + 1, dtype=np.complex128)
    tk = np.empty(p + 1, dtype=np.complex128)
    for node in range(nn - 1, -1, -1):
        c = center[node]
        rho = scale[node]
        if left[node] < 0:
            for t in range(start[node], stop[node]):
                i = perm[t]
                w = ((zh[i] - c) + zl[i]) / rho
                yi = y[i]
                q[node] += yi
                pw = 1.0 + 0.0j
                for k in range(1, p + 1):
                    pw *= w
                    a[node, k] -= yi * pw / k
        else:
            for child in (left[node], right[node]):
                qc = q[child]
                q[node] += qc
                tt = (center[child] - c) / rho
                s = scale[child] / rho
                # b_l = -Q t**l / l + sum_{k<=l} a_k s**k t**(l-k) C(l-1, k-1)
                ac = a[child]
                sk[0] = 1.0
                tk[0] = 1.0
                for k in range(1, p + 1):
                    sk[k] = sk[k - 1] * s
                    tk[k] = tk[k - 1] * tt
                for l in range(1, p + 1):
                    acc = -qc * tk[l] / l
                    for k in range(1, l + 1):
                        acc += ac[k] * sk[k] * tk[l - k] * binom[l - 1, k - 1]
                    a[node, l] += acc
    return q, a


@njit(cache=True)
def m2l_pass(m2l_a, m2l_b, m2l_p, center, scale, q, a, p, binom):
    nn = center.size
    loc = np.zeros((nn, p + 1), dtype=np.complex128)
    up = np.empty(p + 2, dtype=np.complex128)
    vp = np.empty(p + 2, dtype=np.complex128)
    for t in range(m2l_a.size):
        order = m2l_p[t]
        for direction in range(2):
            if direction == 0:
                tgt = m2l_a[t]
                src = m2l_b[t]
            else:
                tgt = m2l_b[t]
                src = m2l_a[t]
            z0 = center[src] - center[tgt]
            u = scale[src] / z0
            v = scale[tgt] / z0
            up[0] = 1.0
            vp[0] = 1.0
            for k in range(1, order + 1):
                up[k] = -up[k - 1] * u  # (-u)**k
                vp[k] = vp[k - 1] * v
            qs = q[src]
            acoef = a[src]
            b0 = qs * np.log(-z0)
            for k in range(1, order + 1):
                b0 += acoef[k] * up[k]
            loc[tgt, 0] += b0
            for l in range(1, order + 1):
                acc = -qs / l
                for k in range(1, order + 1):
                    acc += acoef[k] * up[k] * binom[l + k - 1, k - 1]
                loc[tgt, l] += vp[l] * acc
    return loc


@njit(cache=True)
def downward_pass(zh, zl, perm, start, stop, left, right, center, scale, loc, p, binom, out):
    nn = start.size
    tp = np.empty(p + 1, dtype=np.complex128)
    sp = np.empty(p + 1)
    for node in range(nn):
        if left[node] >= 0:
            bp = loc[node]
            for child in (left[node], right[node]):
                tt = (center[child] - center[node]) / scale[node]
                s = scale[child] / scale[node]
                tp[0] = 1.0
                sp[0] = 1.0
                for k in range(1, p + 1):
                    tp[k] = tp[k - 1] * tt
                    sp[k] = sp[k - 1] * s
                for l in range(p + 1):
                    acc = 0.0 + 0.0j
                    for k in range(l, p + 1):
                        acc += bp[k] * binom[k, l] * tp[k - l]
                    loc[child, l] += acc * sp[l]
        else:
            c = center[node]
            rho = scale[node]
            bp = loc[node]
            for t in range(start[node], stop[node]):
                i = perm[t]
                w = ((zh[i] - c) + zl[i]) / rho
                acc = bp[p]
                for l in range(p - 1, -1, -1):
                    acc = acc * w + bp[l]
                out[i] += acc


@njit(cache=True)
def near_field(zh, zl, y, perm, start, stop, p2p_a, p2p_b, selfn, want_imag, out):
    for t in range(selfn.size):
        node = selfn[t]
        for u in range(start[node], stop[node]):
            i = perm[u]
            re = 0.0
            im = 0.0
            for v in range(start[node], stop[node]):
                if v == u:
                    continue
                j = perm[v]
                d = (zh[i] - zh[j]) + (zl[i] - zl[j])
                dx = d.real
                dy = d.imag
                re += y[j] * _logabs(dx, dy)
                if want_imag:
                    im += y[j] * math.atan2(dy, dx)
            out[i] += complex(re, im)
    for t in range(p2p_a.size):
        a = p2p_a[t]
        b = p2p_b[t]
        for u in range(start[a], stop[a]):
            i = perm[u]
            re = 0.0
            im = 0.0
            for v in range(start[b], stop[b]):
                j = perm[v]
                d = (zh[i] - zh[j]) + (zl[i] - zl[j])
                dx = d.real
                dy = d.imag
                lg = _logabs(dx, dy)
                re += y[j] * lg
                out[j] += y[i] * lg
                if want_imag:
                    ang = math.atan2(dy, dx)
                    im += y[j] * ang
                    # arg(z_j - z_i) is arg(z_i - z_j) rotated by pi
                    out[j] += 1j * y[i] * (ang - math.pi if ang > 0 else ang + math.pi)
            out[i] += complex(re, im)
