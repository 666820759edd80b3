"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``EMGCOMBO_DISABLE_NUMBA=1`` before import to force the numpy path.
Both paths return identical results; the tree builder uses its own
xorshift generator so that feature subsampling does not depend on which
path is active.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.spatial.distance import cdist, pdist

try:
    if os.environ.get("EMGCOMBO_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes"):
        raise ImportError("numba disabled by EMGCOMBO_DISABLE_NUMBA")
    from numba import njit

    USING_NUMBA = True
except ImportError:
    USING_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------- xorshift64*

def xorshift_next(state: int) -> tuple[int, int]:
    """One xorshift64* step on python ints -> (new_state, output)."""
    x = state
    x ^= x >> 12
    x ^= (x << 25) & _MASK64
    x ^= x >> 27
    return x, (x * 0x2545F4914F6CDD1D) & _MASK64


def _seed_state(seed: int) -> int:
    s = (int(seed) * 0x9E3779B97F4A7C15 + 0x632BE59BD9B4E019) & _MASK64
    return s or 0x9E3779B97F4A7C15


def _sample_features_py(state: int, perm: np.ndarray, n_pick: int) -> int:
    d = perm.shape[0]
    for j in range(n_pick):
        state, r = xorshift_next(state)
        k = j + r % (d - j)
        perm[j], perm[k] = perm[k], perm[j]
    return state


# ---------------------------------------------------------------- CART, numpy

def _best_split_np(x_node: np.ndarray, y_node: np.ndarray, n_classes: int, feats: np.ndarray):
    n = y_node.shape[0]
    best_score = -1.0
    best_feat = -1
    best_thr = 0.0
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    for f in feats:
        v = x_node[:, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        valid = np.nonzero(vs[:-1] != vs[1:])[0]
        if valid.size == 0:
            continue
        onehot[:] = 0
        onehot[np.arange(n), y_node[order]] = 1
        left = np.cumsum(onehot, axis=0)[valid]
        right = onehot.sum(axis=0) - left
        n_left = (valid + 1).astype(np.float64)
        n_right = n - n_left
        score = (left * left).sum(axis=1).astype(np.float64) / n_left + (right * right).sum(axis=1).astype(
            np.float64
        ) / n_right
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_score = score[i]
            best_feat = int(f)
            lo = vs[valid[i]]
            hi = vs[valid[i] + 1]
            thr = (lo + hi) / 2.0
            if thr >= hi:
                thr = lo
            best_thr = thr
    return best_feat, best_thr


def build_tree_np(X, y, n_classes, max_features, max_depth, min_samples_split, seed):
    """CART classification tree; returns (feature, threshold, left, right, counts)."""
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    counts = np.zeros((cap, n_classes), dtype=np.float64)
    idx = np.arange(n, dtype=np.int64)
    perm = np.arange(d, dtype=np.int64)
    state = _seed_state(seed)
    n_nodes = 1
    stack = [(0, 0, n, 0)]  # node, start, end, depth
    while stack:
        node, start, end, depth = stack.pop()
        rows = idx[start:end]
        yc = np.bincount(y[rows], minlength=n_classes)
        counts[node] = yc
        m = end - start
        if m < min_samples_split or (max_depth >= 0 and depth >= max_depth) or np.count_nonzero(yc) <= 1:
            continue
        state = _sample_features_py(state, perm, max_features)
        f, thr = _best_split_np(X[rows], y[rows], n_classes, perm[:max_features])
        if f < 0:
            continue
        go_left = X[rows, f] <= thr
        n_left = int(go_left.sum())
        idx[start:end] = np.concatenate([rows[go_left], rows[~go_left]])
        feature[node] = f
        threshold[node] = thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        stack.append((right[node], start + n_left, end, depth + 1))
        stack.append((left[node], start, start + n_left, depth + 1))
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], counts[:n_nodes]


def apply_tree_np(X, feature, threshold, left, right):
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = np.nonzero(feature[node] >= 0)[0]
    while active.size:
        f = feature[node[active]]
        go = X[active, f] <= threshold[node[active]]
        node[active] = np.where(go, left[node[active]], right[node[active]])
        active = active[feature[node[active]] >= 0]
    return node


# ---------------------------------------------------------------- CART, numba

@njit(cache=True)
def _xorshift_nb(state):
    x = state
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    return x, x * np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True)
def _build_tree_nb(X, y, n_classes, max_features, max_depth, min_samples_split, state):
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    counts = np.zeros((cap, n_classes), dtype=np.float64)
    idx = np.arange(n)
    perm = np.arange(d)
    buf = np.empty(n, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)
    lc = np.zeros(n_classes, dtype=np.int64)
    tot = np.zeros(n_classes, dtype=np.int64)
    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    sp = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        tot[:] = 0
        for i in range(start, end):
            tot[y[idx[i]]] += 1
        nz = 0
        for k in range(n_classes):
            counts[node, k] = tot[k]
            if tot[k] > 0:
                nz += 1
        m = end - start
        if m < min_samples_split or (max_depth >= 0 and depth >= max_depth) or nz <= 1:
            continue
        for j in range(max_features):
            state, r = _xorshift_nb(state)
            k = j + np.int64(r % np.uint64(d - j))
            tmp = perm[j]
            perm[j] = perm[k]
            perm[k] = tmp
        best_score = -1.0
        best_feat = -1
        best_thr = 0.0
        for jf in range(max_features):
            f = perm[jf]
            for i in range(m):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals[:m], kind="mergesort")
            lc[:] = 0
            for i in range(m - 1):
                r_i = idx[start + order[i]]
                lc[y[r_i]] += 1
                lo = vals[order[i]]
                hi = vals[order[i + 1]]
                if lo == hi:
                    continue
                sl = 0
                sr = 0
                for k in range(n_classes):
                    a = lc[k]
                    b = tot[k] - a
                    sl += a * a
                    sr += b * b
                nl = np.float64(i + 1)
                score = np.float64(sl) / nl + np.float64(sr) / (np.float64(m) - nl)
                if score > best_score:
                    best_score = score
                    best_feat = f
                    thr = (lo + hi) / 2.0
                    if thr >= hi:
                        thr = lo
                    best_thr = thr
        if best_feat < 0:
            continue
        nl = 0
        nr = 0
        for i in range(start, end):
            r_i = idx[i]
            if X[r_i, best_feat] <= best_thr:
                idx[start + nl] = r_i
                nl += 1
            else:
                buf[nr] = r_i
                nr += 1
        for i in range(nr):
            idx[start + nl + i] = buf[i]
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        st_node[sp] = right[node]
        st_start[sp] = start + nl
        st_end[sp] = end
        st_depth[sp] = depth + 1
        sp += 1
        st_node[sp] = left[node]
        st_start[sp] = start
        st_end[sp] = start + nl
        st_depth[sp] = depth + 1
        sp += 1
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], counts[:n_nodes]


def build_tree_nb(X, y, n_classes, max_features, max_depth, min_samples_split, seed):
    return _build_tree_nb(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        int(n_classes),
        int(max_features),
        int(max_depth),
        int(min_samples_split),
        np.uint64(_seed_state(seed)),
    )


@njit(cache=True)
def apply_tree_nb(X, feature, threshold, left, right):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


# ---------------------------------------------------------------- distances

def pairwise_sq_dists_np(X):
    """Condensed squared Euclidean distances over unordered distinct pairs."""
    return pdist(np.asarray(X, dtype=np.float64), "sqeuclidean")


@njit(cache=True)
def _pairwise_sq_dists_nb(X):
    n, d = X.shape
    out = np.empty(n * (n - 1) // 2, dtype=np.float64)
    p = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                t = X[i, k] - X[j, k]
                s += t * t
            out[p] = s
            p += 1
    return out


def pairwise_sq_dists_nb(X):
    return _pairwise_sq_dists_nb(np.ascontiguousarray(X, dtype=np.float64))


def mean_rbf_np(A, B, gamma, chunk=2048):
    """Mean of exp(-gamma*||a-b||^2) over all (a, b) in A x B."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    total = 0.0
    for s in range(0, A.shape[0], chunk):
        total += np.exp(-gamma * cdist(A[s : s + chunk], B, "sqeuclidean")).sum()
    return total / (A.shape[0] * B.shape[0])


@njit(cache=True)
def _mean_rbf_nb(A, B, gamma):
    na, d = A.shape
    nb = B.shape[0]
    total = 0.0
    for i in range(na):
        row = 0.0
        for j in range(nb):
            s = 0.0
            for k in range(d):
                t = A[i, k] - B[j, k]
                s += t * t
            row += np.exp(-gamma * s)
        total += row
    return total / (na * nb)


def mean_rbf_nb(A, B, gamma):
    return _mean_rbf_nb(np.ascontiguousarray(A, dtype=np.float64), np.ascontiguousarray(B, dtype=np.float64), float(gamma))


# ---------------------------------------------------------------- activation

def leaky_relu_np(a, leak):
    """Return (activation, slope) for a piecewise-linear unit; slope feeds backprop."""
    slope = np.where(a > 0, 1.0, leak)
    return a * slope, slope


@njit(cache=True)
def _leaky_relu_nb(a, leak, h, slope):
    flat_a = a.ravel()
    flat_h = h.ravel()
    flat_s = slope.ravel()
    for i in range(flat_a.shape[0]):
        v = flat_a[i]
        if v > 0:
            flat_h[i] = v
            flat_s[i] = 1.0
        else:
            flat_h[i] = leak * v
            flat_s[i] = leak


def leaky_relu_nb(a, leak):
    a = np.ascontiguousarray(a, dtype=np.float64)
    h = np.empty_like(a)
    slope = np.empty_like(a)
    _leaky_relu_nb(a, float(leak), h, slope)
    return h, slope


if USING_NUMBA:
    leaky_relu = leaky_relu_nb
    build_tree = build_tree_nb
    apply_tree = apply_tree_nb
    pairwise_sq_dists = pairwise_sq_dists_nb
    mean_rbf = mean_rbf_nb
else:
    leaky_relu = leaky_relu_np
    build_tree = build_tree_np
    apply_tree = apply_tree_np
    pairwise_sq_dists = pairwise_sq_dists_np
    mean_rbf = mean_rbf_np
