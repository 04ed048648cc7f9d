"""CART regression trees grown with exhaustive variance-reduction splits.

The growth loop is the hot path of the whole toolkit (forests and boosting
both sit on top of it), so it is compiled with numba. Trees are grown
breadth first; each (level, feature) pass walks one presorted column once,
streaming per-node prefix sums, which keeps the cost at
O(depth * n * n_features) after a single presort.

Split contract:
  * candidate thresholds are midpoints of adjacent distinct sorted values;
  * the winning split minimizes the summed child SSE (equivalently maximizes
    variance reduction), ties broken by lowest column index then lowest
    threshold;
  * both children must keep at least min_samples_leaf rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

NO_FEATURE = -1


@njit(cache=True)
def _xorshift(state):
    state ^= state << np.uint64(13)
    state ^= state >> np.uint64(7)
    state ^= state << np.uint64(17)
    return state


@njit(cache=True)
def _grow(xb, yb, sorted_idx, max_depth, min_leaf, n_consider, rng_state):
    n, m = xb.shape
    max_nodes = 2 * n + 3
    feature = np.full(max_nodes, NO_FEATURE, dtype=np.int32)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int32)
    right = np.full(max_nodes, -1, dtype=np.int32)
    value = np.zeros(max_nodes, dtype=np.float64)

    node_of = np.zeros(n, dtype=np.int32)
    cnt = np.zeros(max_nodes, dtype=np.int64)
    s1 = np.zeros(max_nodes, dtype=np.float64)
    s2 = np.zeros(max_nodes, dtype=np.float64)
    depth_of = np.zeros(max_nodes, dtype=np.int32)

    cnt[0] = n
    for i in range(n):
        s1[0] += yb[i]
        s2[0] += yb[i] * yb[i]
    n_nodes = 1

    frontier = np.empty(max_nodes, dtype=np.int32)
    frontier[0] = 0
    n_frontier = 1

    best_sse = np.zeros(max_nodes, dtype=np.float64)
    best_f = np.full(max_nodes, -1, dtype=np.int32)
    best_thr = np.zeros(max_nodes, dtype=np.float64)

    run_c = np.zeros(max_nodes, dtype=np.int64)
    run_s1 = np.zeros(max_nodes, dtype=np.float64)
    run_s2 = np.zeros(max_nodes, dtype=np.float64)
    prev_v = np.zeros(max_nodes, dtype=np.float64)
    seen = np.zeros(max_nodes, dtype=np.uint8)

    active = np.zeros(max_nodes, dtype=np.uint8)
    consider = np.zeros((max_nodes, m), dtype=np.uint8)
    pool = np.empty(m, dtype=np.int32)

    while n_frontier > 0:
        n_active = 0
        for fi in range(n_frontier):
            nd = frontier[fi]
            sse = s2[nd] - (s1[nd] * s1[nd]) / cnt[nd]
            pure = sse <= 1e-12 * max(1.0, s2[nd])
            depth_stop = max_depth >= 0 and depth_of[nd] >= max_depth
            if cnt[nd] < 2 * min_leaf or pure or depth_stop:
                active[nd] = 0
                continue
            active[nd] = 1
            n_active += 1
            best_f[nd] = -1
            best_sse[nd] = np.inf
            if n_consider >= m:
                for f in range(m):
                    consider[nd, f] = 1
            else:
                # partial Fisher-Yates draw of n_consider columns
                for f in range(m):
                    consider[nd, f] = 0
                    pool[f] = f
                for j in range(n_consider):
                    rng_state = _xorshift(rng_state)
                    pick = j + int(rng_state % np.uint64(m - j))
                    tmp = pool[j]
                    pool[j] = pool[pick]
                    pool[pick] = tmp
                    consider[nd, pool[j]] = 1
        if n_active == 0:
            break

        for f in range(m):
            for fi in range(n_frontier):
                nd = frontier[fi]
                run_c[nd] = 0
                run_s1[nd] = 0.0
                run_s2[nd] = 0.0
                seen[nd] = 0
            col = sorted_idx[f]
            for pos in range(n):
                slot = col[pos]
                nd = node_of[slot]
                if active[nd] == 0 or consider[nd, f] == 0:
                    continue
                v = xb[slot, f]
                c = run_c[nd]
                if seen[nd] == 1 and v > prev_v[nd] and c >= min_leaf and cnt[nd] - c >= min_leaf:
                    ls1 = run_s1[nd]
                    ls2 = run_s2[nd]
                    rs1 = s1[nd] - ls1
                    rs2 = s2[nd] - ls2
                    rc = cnt[nd] - c
                    sse = (ls2 - ls1 * ls1 / c) + (rs2 - rs1 * rs1 / rc)
                    if sse < best_sse[nd]:
                        best_sse[nd] = sse
                        best_f[nd] = f
                        # midpoint, nudged down if rounding landed on the
                        # upper value so `x <= thr` reproduces this partition
                        thr = 0.5 * (prev_v[nd] + v)
                        if thr >= v:
                            thr = prev_v[nd]
                        best_thr[nd] = thr
                yv = yb[slot]
                run_c[nd] = c + 1
                run_s1[nd] += yv
                run_s2[nd] += yv * yv
                prev_v[nd] = v
                seen[nd] = 1

        new_frontier = np.empty(max_nodes, dtype=np.int32)
        n_new = 0
        for fi in range(n_frontier):
            nd = frontier[fi]
            if active[nd] == 0 or best_f[nd] < 0:
                continue
            lid = n_nodes
            rid = n_nodes + 1
            n_nodes += 2
            feature[nd] = best_f[nd]
            threshold[nd] = best_thr[nd]
            left[nd] = lid
            right[nd] = rid
            depth_of[lid] = depth_of[nd] + 1
            depth_of[rid] = depth_of[nd] + 1
            new_frontier[n_new] = lid
            new_frontier[n_new + 1] = rid
            n_new += 2
        if n_new == 0:
            break

        for slot in range(n):
            nd = node_of[slot]
            if feature[nd] < 0:
                continue
            if xb[slot, feature[nd]] <= threshold[nd]:
                child = left[nd]
            else:
                child = right[nd]
            node_of[slot] = child
            cnt[child] += 1
            yv = yb[slot]
            s1[child] += yv
            s2[child] += yv * yv
        frontier = new_frontier
        n_frontier = n_new

    for nd in range(n_nodes):
        if cnt[nd] > 0:
            value[nd] = s1[nd] / cnt[nd]
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True)
def _predict(feature, threshold, left, right, value, x):
    n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        nd = 0
        while feature[nd] >= 0:
            if x[i, feature[nd]] <= threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        out[i] = value[nd]
    return out


@dataclass(frozen=True)
class RegressionTree:
    """Flat-array binary regression tree; feature < 0 marks a leaf node."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_columns: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for nd in range(self.n_nodes):
            if self.feature[nd] >= 0:
                depths[self.left[nd]] = depths[nd] + 1
                depths[self.right[nd]] = depths[nd] + 1
        return int(depths.max(initial=0))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return _predict(self.feature, self.threshold, self.left, self.right,
                        self.value, np.ascontiguousarray(x, dtype=np.float64))

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_columns": self.n_columns,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(
            feature=np.array(d["feature"], dtype=np.int32),
            threshold=np.array(d["threshold"], dtype=np.float64),
            left=np.array(d["left"], dtype=np.int32),
            right=np.array(d["right"], dtype=np.int32),
            value=np.array(d["value"], dtype=np.float64),
            n_columns=int(d["n_columns"]),
        )


def grow_tree(x: np.ndarray, y: np.ndarray, max_depth: int | None = None,
              min_samples_leaf: int = 1, n_consider: int | None = None,
              rng_seed: int = 1) -> RegressionTree:
    """Grow one tree on (x, y); rng_seed only matters when n_consider < n_cols."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, m = x.shape
    sorted_idx = np.ascontiguousarray(np.argsort(x, axis=0, kind="stable").T)
    depth = -1 if max_depth is None else int(max_depth)
    nc = m if n_consider is None else max(1, min(int(n_consider), m))
    state = np.uint64((int(rng_seed) & 0xFFFFFFFFFFFFFFFF) | 1)
    arrays = _grow(x, y, sorted_idx, depth, int(min_samples_leaf), nc, state)
    return RegressionTree(*arrays, n_columns=m)
