"""Slow, obviously-correct reference implementations used only by tests."""

from __future__ import annotations

import itertools

import numpy as np


def fps_bruteforce(coords, count, seed=0):
    """Farthest point sampling by explicit max-min search, lowest index on ties."""
    pts = [tuple(int(v) for v in p) for p in coords]
    chosen = [seed]
    while len(chosen) < count:
        best, best_d = None, -1
        for i, p in enumerate(pts):
            if i in chosen:
                continue
            d = min((p[0] - pts[c][0]) ** 2 + (p[1] - pts[c][1]) ** 2 for c in chosen)
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)
    return chosen


def assign_bruteforce(coords, centers, k):
    """Greedy region claiming, one center at a time, returning member lists."""
    pts = np.asarray(coords, dtype=np.int64)
    claimed = set(int(c) for c in centers)
    regions = []
    for c in centers:
        cand = [i for i in range(len(pts)) if i not in claimed]
        cand.sort(key=lambda i: (int(((pts[i] - pts[c]) ** 2).sum()), i))
        members = [int(c)] + cand[: k - 1]
        claimed.update(members)
        regions.append(members)
    return regions


def auc_pairs(scores, labels):
    """Mann-Whitney AUC by counting every positive/negative pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p, n in itertools.product(pos, neg):
        total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def f1_acc_confusion(preds, labels, num_classes=2):
    preds, labels = list(preds), list(labels)
    acc = sum(p == y for p, y in zip(preds, labels)) / len(labels)

    def f1_for(c):
        tp = sum(p == c and y == c for p, y in zip(preds, labels))
        fp = sum(p == c and y != c for p, y in zip(preds, labels))
        fn = sum(p != c and y == c for p, y in zip(preds, labels))
        return 0.0 if 2 * tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn)

    if num_classes == 2:
        return acc, f1_for(1)
    return acc, float(np.mean([f1_for(c) for c in range(num_classes)]))


def shift_index_oracle(L, D, k, layer):
    """Source row of every (row, channel) under the forward fold shift.

    Fold ``f`` of row ``i`` reads from row ``i - f * k**layer`` taken
    cyclically inside the aligned block of size ``min(k**(layer+1), L)``.
    """
    scale, block = k**layer, min(k ** (layer + 1), L)
    width = D // k
    src = np.empty((L, D), dtype=np.int64)
    for i in range(L):
        start = (i // block) * block
        for c in range(D):
            f = c // width
            src[i, c] = start + (i - start - f * scale) % block
    return src


def dependency_closure(L, layers, reach_fn, start):
    """Indices reachable from ``start`` after composing one-layer reach sets."""
    live = {start}
    for _ in range(layers):
        live = {j for i in live for j in reach_fn(i)}
    return live
