"""Balanced range tree over vertex indices, stored as preorder arrays."""

from __future__ import annotations

import numpy as np


class RangeTree:
    """Node v owns vertices [lo[v], hi[v]); its subtree is the id range [v, end[v])."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("range tree over an empty range")
        lo, hi, left, right, depth, end = [], [], [], [], [], []
        stack = [(0, n, 0, -1, 0)]
        parent = []
        while stack:
            a, b, dep, par, side = stack.pop()
            v = len(lo)
            lo.append(a)
            hi.append(b)
            depth.append(dep)
            parent.append(par)
            left.append(-1)
            right.append(-1)
            end.append(-1)
            if par >= 0:
                if side == 0:
                    left[par] = v
                else:
                    right[par] = v
            if b - a > 1:
                m = (a + b) // 2
                stack.append((m, b, dep + 1, v, 1))
                stack.append((a, m, dep + 1, v, 0))
        # preorder: the subtree of v ends where the next node outside it starts
        size = len(lo)
        for v in range(size - 1, -1, -1):
            r = right[v]
            end[v] = v + 1 if r < 0 else end[r]
        self.n = n
        self.lo = lo
        self.hi = hi
        self.left = left
        self.right = right
        self.parent = parent
        self.depth = depth
        self.end = end
        self.size = size
        # leaf node of every vertex
        self.leaf_of = [0] * n
        for v in range(size):
            if hi[v] - lo[v] == 1:
                self.leaf_of[lo[v]] = v

    def count(self, v: int) -> int:
        return self.hi[v] - self.lo[v]

    def internal(self) -> list[int]:
        return [v for v in range(self.size) if self.left[v] >= 0]

    def canonical(self, i: int, j: int) -> list[int]:
        """Nodes whose ranges tile [i, j) from left to right.

        Climbs from the leaf at the current start to the highest ancestor that
        still starts there and fits, so the work depends on j - i, not n.
        """
        out = []
        lo, hi, parent, leaf_of = self.lo, self.hi, self.parent, self.leaf_of
        cur = i
        while cur < j:
            v = leaf_of[cur]
            while True:
                p = parent[v]
                if p < 0 or lo[p] != cur or hi[p] > j:
                    break
                v = p
            out.append(v)
            cur = hi[v]
        return out

    def depth_array(self) -> np.ndarray:
        return np.asarray(self.depth)
