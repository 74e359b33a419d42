"""Vectorized numpy implementation of the hot kernels.

Used when the compiled extension is unavailable or when
``STARMEASURE_BACKEND=python``.  Arithmetic is ordered exactly as in
``_kernel.pyx`` so both backends agree bit for bit.
"""
import numpy as np
from scipy.spatial.distance import cdist

NAME = "python"
TIE_EPS = 1e-9
BATCH = 1 << 19

ENUM_FULL, ENUM_SORTED, ENUM_CANONICAL = 0, 1, 2


def _tn(code, a, b):
    if code == 0:
        return a * b
    if code == 1:
        return np.minimum(a, b)
    return np.maximum(a + b - 1.0, 0.0)


def _expand(cols, pv, uvals, mode, code, tau_supp, S):
    """Append one coordinate to every partial tuple, pruning dead prefixes."""
    K = pv.shape[0]
    if mode == ENUM_SORTED:
        first = cols[-1]
        counts = S - first
    else:
        first = np.zeros(K, dtype=np.int64)
        counts = np.full(K, S, dtype=np.int64)
    total = int(counts.sum())
    rows = np.repeat(np.arange(K), counts)
    starts = np.cumsum(counts) - counts
    nxt = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(first, counts)
    v = _tn(code, pv[rows], uvals[nxt])
    keep = v > tau_supp
    rows, nxt, v = rows[keep], nxt[keep], v[keep]
    return [c[rows] for c in cols] + [nxt], v


def _split(cols, pv, uvals, mode, S):
    """Yield row slices whose one-step expansion has at most BATCH entries."""
    K = pv.shape[0]
    counts = (S - cols[-1]) if mode == ENUM_SORTED else np.full(K, S, dtype=np.int64)
    csum = np.cumsum(counts)
    lo = 0
    while lo < K:
        base = csum[lo - 1] if lo else 0
        hi = int(np.searchsorted(csum, base + BATCH, side="right"))
        hi = max(hi, lo + 1)
        yield slice(lo, hi)
        lo = hi


def _enumerate(uvals, m, mode, code, tau_supp, start, stop, leaf):
    S = uvals.shape[0]
    first = np.arange(start, stop, dtype=np.int64)
    pv = uvals[first]
    keep = pv > tau_supp
    _walk([first[keep]], pv[keep], uvals, m, mode, code, tau_supp, S, leaf)


def _walk(cols, pv, uvals, m, mode, code, tau_supp, S, leaf):
    if len(cols) == m:
        if pv.shape[0]:
            return leaf(cols, pv)
        return None
    for sl in _split(cols, pv, uvals, mode, S):
        sub = [c[sl] for c in cols]
        ncols, npv = _expand(sub, pv[sl], uvals, mode, code, tau_supp, S)
        err = _walk(ncols, npv, uvals, m, mode, code, tau_supp, S, leaf)
        if err is not None:
            return err
    return None


def _canonical_mask(cols, perms):
    """True where the tuple is lexicographically minimal in its orbit."""
    X = np.stack(cols, axis=1)
    ok = np.ones(X.shape[0], dtype=bool)
    for s in perms:
        Y = X[:, s]
        diff = Y != X
        anyd = diff.any(axis=1)
        j = diff.argmax(axis=1)
        r = np.arange(X.shape[0])
        less = anyd & (Y[r, j] < X[r, j])
        ok &= ~less
    return ok


def psi_affine(uvals, m, mode, perms, code, alphas, contrib, offsets, lo, hi, step, res, strides,
               tau_box, tau_supp, start, stop, out):
    n, d = offsets.shape

    def leaf(cols, tv):
        if mode == ENUM_CANONICAL:
            mask = _canonical_mask(cols, perms)
            cols = [c[mask] for c in cols]
            tv = tv[mask]
        for i in range(n):
            val = _tn(code, alphas[i], tv)
            live = val > tau_supp
            if not live.any():
                continue
            cs = [c[live] for c in cols]
            val = val[live]
            c = np.broadcast_to(offsets[i], (val.shape[0], d))
            for j in range(m):
                c = c + contrib[i, j][cs[j]]
            bad = (c < lo - tau_box) | (c > hi + tau_box) | np.isnan(c)
            if bad.any():
                k = int(np.flatnonzero(bad.any(axis=1))[0])
                return i, tuple(int(cc[k]) for cc in cs), tuple(float(v) for v in c[k])
            t = (c - lo) / step
            kk = np.ceil(t - 0.5 - TIE_EPS).astype(np.int64)
            np.clip(kk, 0, res - 1, out=kk)
            y = kk @ strides
            np.maximum.at(out, y, val)
        return None

    return _enumerate(uvals, m, mode, code, tau_supp, start, stop, leaf)


def psi_table(uvals, sup, m, mode, perms, code, alphas, table, N, tau_supp, start, stop, out):
    n = table.shape[0]

    def leaf(cols, tv):
        if mode == ENUM_CANONICAL:
            mask = _canonical_mask(cols, perms)
            cols = [c[mask] for c in cols]
            tv = tv[mask]
        flat = np.zeros(tv.shape[0], dtype=np.int64)
        for j in range(m):
            flat = flat * N + sup[cols[j]]
        for i in range(n):
            val = _tn(code, alphas[i], tv)
            live = val > tau_supp
            np.maximum.at(out, table[i][flat[live]], val[live])
        return None

    return _enumerate(uvals, m, mode, code, tau_supp, start, stop, leaf)


def hypo_directed(xc, uv, yc, vv, own, metric, chunk=1024):
    name = "euclidean" if metric == 1 else "chebyshev"
    worst = 0.0
    for s in range(0, xc.shape[0], chunk):
        D = cdist(xc[s:s + chunk], yc, metric=name)
        lift = np.maximum(uv[s:s + chunk, None] - vv[None, :], 0.0)
        cand = np.minimum(np.maximum(D, lift).min(axis=1), own[s:s + chunk])
        worst = max(worst, float(cand.max()))
    return worst
