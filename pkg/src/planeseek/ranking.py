"""Generalized spatial distance and labeled pairwise comparisons.

Temporal pairs are drawn within a single demonstration and labeled by
timestamp order; spatial pairs are drawn across all demonstrations and
labeled by each frame's generalized distance to its own demonstration's
ending pose, normalized by the global per-DoF maxima.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import wrap_angle_deg
from .validation import check_rng

TRANS = slice(0, 3)
ROT = slice(3, 6)


def pose_difference(frame_pose, end_pose):
    """Componentwise absolute pose difference, rotations wrapped to (-180, 180]."""
    frame_pose = np.asarray(frame_pose, float)
    end_pose = np.asarray(end_pose, float)
    d = np.empty(6)
    d[TRANS] = np.abs(frame_pose[TRANS] - end_pose[TRANS])
    d[ROT] = np.abs(wrap_angle_deg(frame_pose[ROT] - end_pose[ROT]))
    return d


@dataclass
class DistanceTable:
    """Per-frame generalized distances for a set of demonstrations."""

    d: list  # per demo: (n_k, 6) raw absolute differences
    d_max: np.ndarray  # (6,) global maxima
    normalized: list  # per demo: (n_k, 6), zero where d_max is zero
    weights: np.ndarray  # (6,) Eq-style DoF weights
    D: list  # per demo: (n_k,) scalar distances
    k_t: float
    k_r: float

    def flat_D(self):
        return np.concatenate(self.D)

    def frame_offsets(self):
        """Start index of each demonstration in the flattened frame ordering."""
        counts = [len(x) for x in self.D]
        return np.concatenate([[0], np.cumsum(counts)])


def _group_weights(d_max, k_t, k_r):
    w = np.zeros(6)
    for sl, k_group in ((TRANS, k_t), (ROT, k_r)):
        sq = d_max[sl] ** 2
        total = sq.sum()
        if total > 0:
            w[sl] = sq / total * k_group
    return w


def build_distance_table(demos, k_t=0.5, k_r=0.5):
    """Compute Eq-style scalar distances D for every frame of every demo.

    DoFs that never vary contribute zero (their weight mass is absorbed by
    the varying DoFs of the same group). A dataset where nothing varies at
    all is rejected.
    """
    if abs(k_t + k_r - 1.0) > 1e-12:
        raise ValueError(f"k_t + k_r must equal 1, got {k_t} + {k_r}")
    per_demo = []
    for demo in demos:
        end = demo.end_pose
        per_demo.append(np.stack([pose_difference(f.pose, end) for f in demo.frames]))
    d_max = np.max(np.concatenate(per_demo), axis=0)
    if d_max.max() == 0:
        raise ValueError(
            "degenerate demonstrations: no DoF varies in any demonstration"
        )
    scale = np.where(d_max > 0, d_max, 1.0)
    weights = _group_weights(d_max, k_t, k_r)
    normalized = [d / scale for d in per_demo]
    D = [np.sqrt((n**2 * weights).sum(axis=1)) for n in normalized]
    return DistanceTable(
        d=per_demo,
        d_max=d_max,
        normalized=normalized,
        weights=weights,
        D=D,
        k_t=k_t,
        k_r=k_r,
    )


@dataclass(frozen=True)
class PairComparison:
    demo_a: int
    frame_a: int
    demo_b: int
    frame_b: int
    label: int  # temporal: 1 iff t_a < t_b; spatial: 1 iff D_a >= D_b
    mode: str


def temporal_pairs(demo, demo_index=0):
    """All unordered within-demonstration pairs in index order (t_a < t_b)."""
    n = len(demo)
    return [
        PairComparison(demo_index, i, demo_index, j, 1, "temporal")
        for i in range(n)
        for j in range(i + 1, n)
    ]


def spatial_pairs(demos, table=None, drop_ties=False):
    """All unordered cross-demonstration pairs labeled by generalized distance."""
    if table is None:
        table = build_distance_table(demos)
    flat_D = table.flat_D()
    offsets = table.frame_offsets()
    lengths = [len(d) for d in table.D]
    pairs = []
    n_total = int(offsets[-1])
    demo_of = np.empty(n_total, dtype=int)
    frame_of = np.empty(n_total, dtype=int)
    for k, n_k in enumerate(lengths):
        demo_of[offsets[k] : offsets[k] + n_k] = k
        frame_of[offsets[k] : offsets[k] + n_k] = np.arange(n_k)
    for u in range(n_total):
        for v in range(u + 1, n_total):
            if drop_ties and flat_D[u] == flat_D[v]:
                continue
            label = 1 if flat_D[u] >= flat_D[v] else 0
            pairs.append(
                PairComparison(
                    int(demo_of[u]), int(frame_of[u]),
                    int(demo_of[v]), int(frame_of[v]),
                    label, "spatial",
                )
            )
    return pairs


def spatial_label(D_a, D_b):
    return 1 if D_a >= D_b else 0


def temporal_label(t_a, t_b):
    return 1 if t_a < t_b else 0


class PairSampler:
    """Seeded sampler over the implicit full pair set.

    Training never materializes all C(N, 2) pairs; each draw picks an
    unordered pair at random and emits it in random member order with the
    matching label. ``anchor_frac`` > 0 (spatial mode) draws that fraction
    of pairs with one member from the lowest-distance frames, which
    resolves the top of the ordering when those frames are rare.
    """

    def __init__(self, demos, mode, table=None, rng=None, drop_ties=False, anchor_frac=0.0):
        if not demos:
            raise ValueError("no demonstrations to sample pairs from")
        self.mode = mode
        self.rng = check_rng(rng)
        self.drop_ties = drop_ties
        self.anchor_frac = float(anchor_frac)
        self.images = np.concatenate([d.images() for d in demos])
        self.lengths = np.array([len(d) for d in demos])
        self.offsets = np.concatenate([[0], np.cumsum(self.lengths)])
        if mode == "spatial":
            self.table = table if table is not None else build_distance_table(demos)
            self.flat_D = self.table.flat_D()
            n_anchor = max(4, int(0.05 * len(self.flat_D)))
            self.anchor_idx = np.argsort(self.flat_D, kind="stable")[:n_anchor]
        elif mode == "temporal":
            # timestamps are strictly increasing, so frame index order is time order
            self.demo_weights = self.lengths * (self.lengths - 1) / 2.0
            if self.demo_weights.sum() == 0:
                raise ValueError("no demonstration has two frames to pair")
            self.demo_weights = self.demo_weights / self.demo_weights.sum()
        else:
            raise ValueError(f"unknown pair mode {mode!r}")

    @property
    def n_frames(self):
        return int(self.offsets[-1])

    def _draw_temporal(self):
        k = int(self.rng.choice(len(self.lengths), p=self.demo_weights))
        n_k = int(self.lengths[k])
        if self.anchor_frac and self.rng.random() < self.anchor_frac:
            # anchor on the demo's closing stretch; pairs stay within the demo
            lo = max(0, n_k - max(2, n_k // 10))
            i = int(self.rng.integers(lo, n_k))
            j = i
            while j == i:
                j = int(self.rng.integers(0, n_k))
            if self.rng.random() < 0.5:
                i, j = j, i
        else:
            i, j = (int(v) for v in self.rng.choice(n_k, size=2, replace=False))
        a, b = int(self.offsets[k] + i), int(self.offsets[k] + j)
        return a, b, temporal_label(i, j)

    def _draw_one(self):
        if self.mode == "temporal":
            return self._draw_temporal()
        while True:
            if self.anchor_frac and self.rng.random() < self.anchor_frac:
                a = int(self.anchor_idx[self.rng.integers(0, len(self.anchor_idx))])
                # half the anchored draws compare two top frames: that is the
                # ordering a stop policy actually depends on
                if self.rng.random() < 0.5:
                    b = int(self.anchor_idx[self.rng.integers(0, len(self.anchor_idx))])
                else:
                    b = int(self.rng.integers(0, self.n_frames))
                if b == a:
                    continue
                if self.rng.random() < 0.5:
                    a, b = b, a
            else:
                a, b = self.rng.choice(self.n_frames, size=2, replace=False)
                a, b = int(a), int(b)
            if self.drop_ties and self.flat_D[a] == self.flat_D[b]:
                continue
            return a, b, spatial_label(self.flat_D[a], self.flat_D[b])

    def batch(self, batch_size):
        """Return (images_a, images_b, labels) arrays for one training batch."""
        idx_a = np.empty(batch_size, dtype=int)
        idx_b = np.empty(batch_size, dtype=int)
        labels = np.empty(batch_size, dtype=np.float64)
        for n in range(batch_size):
            idx_a[n], idx_b[n], labels[n] = self._draw_one()
        return self.images[idx_a], self.images[idx_b], labels

    def total_pairs(self):
        if self.mode == "temporal":
            return int(sum(n * (n - 1) // 2 for n in self.lengths))
        n = self.n_frames
        return n * (n - 1) // 2


def dump_pairs_csv(path, pairs, table=None):
    """Optional pair dump: (demo_a, frame_a, demo_b, frame_b, D_a, D_b, g)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["demo_a", "frame_a", "demo_b", "frame_b", "D_a", "D_b", "g"])
        for p in pairs:
            if p.mode == "spatial" and table is not None:
                d_a = repr(float(table.D[p.demo_a][p.frame_a]))
                d_b = repr(float(table.D[p.demo_b][p.frame_b]))
            else:
                d_a = d_b = ""
            writer.writerow([p.demo_a, p.frame_a, p.demo_b, p.frame_b, d_a, d_b, p.label])
