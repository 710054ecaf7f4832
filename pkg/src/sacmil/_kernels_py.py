"""Pure numpy versions of the compiled kernels.

Shift, FPS and assignment match the extension bitwise; GELU matches to the
last bit or two, since libm and numpy/scipy transcendentals may differ.
"""

import numpy as np


def shift_folds(x, k, scale, block, inverse):
    L, D = x.shape
    w = D // k
    out = np.empty_like(x)
    local = np.arange(block)
    for f in range(k):
        off = (f * scale) % block
        if inverse:
            off = (block - off) % block
        src = (local - off) % block
        cols = slice(f * w, (f + 1) * w)
        blocks = x[:, cols].reshape(L // block, block, w)
        out[:, cols] = blocks[:, src, :].reshape(L, w)
    return out


def fps(coords, count, seed):
    diff = coords - coords[seed]
    mind = (diff * diff).sum(axis=1)
    mind[seed] = -1
    centers = np.empty(count, dtype=np.int64)
    centers[0] = seed
    for r in range(1, count):
        best = int(np.argmax(mind))
        centers[r] = best
        mind[best] = -1
        diff = coords - coords[best]
        d = (diff * diff).sum(axis=1)
        live = mind >= 0
        mind[live] = np.minimum(mind[live], d[live])
    return centers


def assign_greedy(coords, centers, k):
    n = coords.shape[0]
    R = centers.shape[0]
    members = np.empty((R, k), dtype=np.int64)
    pad = np.zeros((R, k), dtype=bool)
    claimed = np.zeros(n, dtype=bool)
    claimed[centers] = True
    for r, c in enumerate(centers):
        cand = np.flatnonzero(~claimed)
        diff = coords[cand] - coords[c]
        d = (diff * diff).sum(axis=1)
        take = min(k - 1, cand.size)
        chosen = cand[np.argsort(d, kind="stable")[:take]]
        members[r, 0] = c
        members[r, 1 : take + 1] = chosen
        members[r, take + 1 :] = c
        pad[r, take + 1 :] = True
        claimed[chosen] = True
    return members, pad


def gelu(x):
    from scipy.special import erfc

    v = x.astype(np.float64)
    # erfc keeps full relative precision in the far negative tail
    cdf = 0.5 * erfc(-v * 0.7071067811865476)
    pdf = 0.3989422804014327 * np.exp(-0.5 * v * v)
    return (v * cdf).astype(x.dtype), (cdf + v * pdf).astype(x.dtype)
