"""Hot numeric kernels in two interchangeable forms.

Each kernel has a ``_loops`` version compiled with numba and a ``_numpy``
version built from vectorized array operations. The public name binds to
one of them at import time based on :data:`spoofguard._accel.NUMBA_ENABLED`.
Both forms take and return identical array shapes; the consistency tests
compare them on random inputs.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, njit

__all__ = [
    "wpt_analysis_batch",
    "gmm_log_resp",
    "svm_dcd_epoch",
]


# -- wavelet packet analysis -------------------------------------------------

def _wpt_analysis_batch_numpy(frames, lo, hi, depth, gather):
    nf, n = frames.shape
    taps = lo.shape[0]
    nodes = frames[:, None, :]  # (F, n_nodes, node_len)
    for _ in range(depth):
        node_len = nodes.shape[2]
        half = node_len // 2
        idx = (2 * np.arange(half)[:, None] + np.arange(taps)[None, :]) % node_len
        windows = nodes[:, :, idx]  # (F, n_nodes, half, taps)
        low = windows @ lo
        high = windows @ hi
        # children of node j land at 2j (low) and 2j+1 (high)
        nodes = np.stack([low, high], axis=2).reshape(nf, -1, half)
    return np.ascontiguousarray(nodes[:, gather, :])


@njit(cache=True, nogil=True)
def _wpt_analysis_batch_loops(frames, lo, hi, depth, gather):
    nf, n = frames.shape
    taps = lo.shape[0]
    n_leaves = 1 << depth
    leaf_len = n >> depth
    out = np.empty((nf, n_leaves, leaf_len))
    cur = np.empty(n)
    nxt = np.empty(n)
    for f in range(nf):
        for i in range(n):
            cur[i] = frames[f, i]
        node_len = n
        n_nodes = 1
        for _ in range(depth):
            half = node_len // 2
            for j in range(n_nodes):
                off = j * node_len
                for i in range(half):
                    acc_l = 0.0
                    acc_h = 0.0
                    for k in range(taps):
                        v = cur[off + ((2 * i + k) % node_len)]
                        acc_l += lo[k] * v
                        acc_h += hi[k] * v
                    nxt[off + i] = acc_l
                    nxt[off + half + i] = acc_h
            tmp = cur
            cur = nxt
            nxt = tmp
            node_len = half
            n_nodes *= 2
        for r in range(n_leaves):
            p = gather[r]
            for i in range(leaf_len):
                out[f, r, i] = cur[p * leaf_len + i]
    return out


# -- diagonal GMM responsibilities -------------------------------------------

def _gmm_log_resp_numpy(x, log_w, means, inv_var, log_norm):
    const = log_w + log_norm - 0.5 * np.einsum("cd,cd->c", means ** 2, inv_var)
    logp = x @ (means * inv_var).T - 0.5 * (x ** 2) @ inv_var.T + const
    m = logp.max(axis=1)
    lse = m + np.log(np.exp(logp - m[:, None]).sum(axis=1))
    gamma = np.exp(logp - lse[:, None])
    return gamma, lse


@njit(cache=True, nogil=True)
def _gmm_log_resp_loops(x, log_w, means, inv_var, log_norm):
    n, d = x.shape
    c = means.shape[0]
    gamma = np.empty((n, c))
    lse = np.empty(n)
    logp = np.empty(c)
    for t in range(n):
        m = -np.inf
        for j in range(c):
            acc = 0.0
            for k in range(d):
                diff = x[t, k] - means[j, k]
                acc += diff * diff * inv_var[j, k]
            v = log_w[j] + log_norm[j] - 0.5 * acc
            logp[j] = v
            if v > m:
                m = v
        s = 0.0
        for j in range(c):
            s += np.exp(logp[j] - m)
        z = m + np.log(s)
        lse[t] = z
        for j in range(c):
            gamma[t, j] = np.exp(logp[j] - z)
    return gamma, lse


# -- linear SVM dual coordinate descent --------------------------------------

def _svm_dcd_epoch_numpy(xa, y, qdiag, cost, alpha, w, order):
    for i in order:
        xi = xa[i]
        g = y[i] * (w @ xi) - 1.0
        a_old = alpha[i]
        a_new = a_old - g / qdiag[i]
        if a_new < 0.0:
            a_new = 0.0
        elif a_new > cost[i]:
            a_new = cost[i]
        if a_new != a_old:
            w += (a_new - a_old) * y[i] * xi
            alpha[i] = a_new


@njit(cache=True, nogil=True)
def _svm_dcd_epoch_loops(xa, y, qdiag, cost, alpha, w, order):
    d = xa.shape[1]
    for t in range(order.shape[0]):
        i = order[t]
        dot = 0.0
        for k in range(d):
            dot += w[k] * xa[i, k]
        g = y[i] * dot - 1.0
        a_old = alpha[i]
        a_new = a_old - g / qdiag[i]
        if a_new < 0.0:
            a_new = 0.0
        elif a_new > cost[i]:
            a_new = cost[i]
        if a_new != a_old:
            step = (a_new - a_old) * y[i]
            for k in range(d):
                w[k] += step * xa[i, k]
            alpha[i] = a_new


if NUMBA_ENABLED:
    wpt_analysis_batch = _wpt_analysis_batch_loops
    gmm_log_resp = _gmm_log_resp_loops
    svm_dcd_epoch = _svm_dcd_epoch_loops
else:
    wpt_analysis_batch = _wpt_analysis_batch_numpy
    gmm_log_resp = _gmm_log_resp_numpy
    svm_dcd_epoch = _svm_dcd_epoch_numpy
