"""Agglomerative clustering with spectral re-estimation (hierarchical
spectral merger).

Starting from one cluster per series, the pair of clusters with the smallest
total variation distance between representatives is merged at each step, and
the merged cluster's representative spectrum is re-estimated from all of its
members: either from the concatenated member signals (`single` variant) or
as the member-count-weighted average of the member spectra (`average`
variant).  The dissimilarity matrix therefore shrinks by one row and column
per merge instead of staying fixed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .distances import tv_value
from .spectra import (
    SpectralDensity,
    TimeSeries,
    align_grids,
    average_spectrum,
    concat_spectrum,
    normalize,
    smoothed_spectrum,
)

__all__ = ["MergeStep", "MergeHistory", "hsm_cluster", "tie_break"]

VARIANTS = ("single", "average")


@dataclass(frozen=True)
class MergeStep:
    """One agglomeration event: clusters `left` and `right` merge into
    `new_id` at dissimilarity `value`."""

    left: int
    right: int
    value: float
    new_id: int


@dataclass
class MergeHistory:
    """Complete record of an agglomerative run.

    Initial clusters carry ids ``0..N-1`` in input order; the cluster created
    at step ``s`` (0-based) has id ``N + s``.  `steps` lists the N-1 merges in
    order, and `labels_at(k)` unwinds them into the partition with k blocks.

    `step_representatives` optionally keeps, per step, the normalized
    representative spectra of the two merged clusters and of the merged
    result (needed by the bootstrap cluster-count test); it is not
    serialized.
    """

    series_ids: tuple[str, ...]
    steps: tuple[MergeStep, ...]
    method: str
    measure: str = "TV"
    series_length: int | None = None
    fs: float | None = None
    step_representatives: tuple | None = field(default=None, repr=False)

    @property
    def n_series(self) -> int:
        return len(self.series_ids)

    @property
    def trajectory(self) -> np.ndarray:
        """Merge dissimilarities in step order (resulting counts N-1..1)."""
        return np.array([s.value for s in self.steps])

    def merge_value_at(self, k: int) -> float:
        """Dissimilarity of the merge that produced the k-cluster partition."""
        n = self.n_series
        if not 1 <= k <= n - 1:
            raise ValueError(f"no merge produces k={k} clusters for N={n}")
        return self.steps[n - 1 - k].value

    def step_for(self, k: int) -> MergeStep:
        """The merge step whose result has k clusters."""
        n = self.n_series
        if not 1 <= k <= n - 1:
            raise ValueError(f"no merge produces k={k} clusters for N={n}")
        return self.steps[n - 1 - k]

    def cluster_members(self, cluster_id: int) -> list[int]:
        """Series indices belonging to a cluster id, in merge order."""
        n = self.n_series
        if 0 <= cluster_id < n:
            return [cluster_id]
        members: dict[int, list[int]] = {i: [i] for i in range(n)}
        for step in self.steps:
            merged = members.pop(step.left) + members.pop(step.right)
            members[step.new_id] = merged
            if step.new_id == cluster_id:
                return merged
        raise ValueError(f"unknown cluster id {cluster_id}")

    def labels_at(self, k: int) -> list[set[str]]:
        """Partition of the series ids into exactly k blocks.

        Blocks are ordered by their smallest member's input position.
        """
        n = self.n_series
        if not 1 <= k <= n:
            raise ValueError(f"cluster count k={k} out of range 1..{n}")
        members: dict[int, list[int]] = {i: [i] for i in range(n)}
        for step in self.steps[: n - k]:
            merged = members.pop(step.left) + members.pop(step.right)
            members[step.new_id] = merged
        blocks = sorted(members.values(), key=min)
        return [set(self.series_ids[i] for i in block) for block in blocks]

    def assignments_at(self, k: int) -> dict[str, int]:
        """Series id -> block index (blocks numbered as in `labels_at`)."""
        return {
            sid: idx for idx, block in enumerate(self.labels_at(k)) for sid in block
        }

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "measure": self.measure,
            "n_series": self.n_series,
            "series_ids": list(self.series_ids),
            "series_length": self.series_length,
            "fs": self.fs,
            "steps": [
                {"left": s.left, "right": s.right, "tv": s.value, "new_id": s.new_id}
                for s in self.steps
            ],
            "labels": {
                str(k): self.assignments_at(k) for k in range(self.n_series, 0, -1)
            },
        }

    def to_json(self, **dumps_kwargs) -> str:
        return json.dumps(self.to_json_dict(), **dumps_kwargs)

    @classmethod
    def from_json_dict(cls, payload: dict) -> "MergeHistory":
        steps = tuple(
            MergeStep(d["left"], d["right"], d["tv"], d["new_id"])
            for d in payload["steps"]
        )
        return cls(
            series_ids=tuple(payload["series_ids"]),
            steps=steps,
            method=payload["method"],
            measure=payload.get("measure", "TV"),
            series_length=payload.get("series_length"),
            fs=payload.get("fs"),
        )


def tie_break(pairs) -> tuple[int, int]:
    """Deterministic choice among equally distant pairs.

    Each pair is put in (small, large) id order and the lexicographically
    smallest pair wins.
    """
    ordered = [tuple(sorted(p)) for p in pairs]
    if not ordered:
        raise ValueError("no pairs to choose from")
    return min(ordered)


@dataclass
class _Cluster:
    members: list[int]  # series indices, in merge-accumulated order
    representative: SpectralDensity
    total_length: int


def _unique_ids(xs: list[TimeSeries]) -> tuple[str, ...]:
    ids = [x.id if x.id else f"s{i}" for i, x in enumerate(xs)]
    if len(set(ids)) != len(ids):
        raise ValueError("series ids must be unique for clustering")
    return tuple(ids)


def hsm_cluster(
    xs: list[TimeSeries],
    variant: str = "single",
    bandwidth: float | None = None,
) -> MergeHistory:
    """Run the hierarchical spectral merger over a set of series.

    Parameters
    ----------
    xs : list of TimeSeries
        At least two series sharing one sampling frequency.
    variant : {"single", "average"}
        Representative update rule for merged clusters: smoothed spectrum of
        the concatenated member signals, or member-count-weighted average of
        the member spectra.
    bandwidth : float, optional
        Fixed dimensionless smoothing bandwidth.  By default each estimate
        uses 100/length of the data it is computed from, so concatenated
        clusters are smoothed on their own scale.

    Returns
    -------
    MergeHistory
        The N-1 merge steps with representatives retained per step.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    n = len(xs)
    if n < 2:
        raise ValueError("clustering needs at least two series")
    fs = xs[0].fs
    if any(x.fs != fs for x in xs):
        raise ValueError("all series must share one sampling frequency")
    ids = _unique_ids(xs)

    reps = [normalize(smoothed_spectrum(x, bandwidth)) for x in xs]
    if variant == "average" and len({len(r) for r in reps}) > 1:
        # Unequal lengths: put every representative on the finest grid once,
        # so averaging stays a same-grid operation afterwards.
        finest = min(reps, key=lambda r: r.df)
        reps = [align_grids(finest, r)[1] for r in reps]

    clusters: dict[int, _Cluster] = {
        i: _Cluster([i], reps[i], len(xs[i])) for i in range(n)
    }
    dist: dict[tuple[int, int], float] = {}
    active = sorted(clusters)
    for a_pos, i in enumerate(active):
        for j in active[a_pos + 1 :]:
            dist[(i, j)] = tv_value(clusters[i].representative, clusters[j].representative)

    steps: list[MergeStep] = []
    step_reps: list[tuple[SpectralDensity, SpectralDensity, SpectralDensity]] = []
    next_id = n
    while len(clusters) > 1:
        best = min(dist, key=lambda p: (dist[p], p))
        value = dist[best]
        left, right = best
        merged_members = clusters[left].members + clusters[right].members
        if variant == "single":
            new_rep = normalize(
                concat_spectrum([xs[m] for m in merged_members], bandwidth)
            )
        else:
            new_rep = average_spectrum(
                [clusters[left].representative, clusters[right].representative],
                [len(clusters[left].members), len(clusters[right].members)],
            )
        step_reps.append(
            (clusters[left].representative, clusters[right].representative, new_rep)
        )
        new_cluster = _Cluster(
            merged_members,
            new_rep,
            clusters[left].total_length + clusters[right].total_length,
        )
        del clusters[left], clusters[right]
        dist = {
            p: d for p, d in dist.items() if left not in p and right not in p
        }
        for other in sorted(clusters):
            dist[(other, next_id)] = tv_value(
                clusters[other].representative, new_rep
            )
        clusters[next_id] = new_cluster
        steps.append(MergeStep(left, right, value, next_id))
        next_id += 1

    return MergeHistory(
        series_ids=ids,
        steps=tuple(steps),
        method=f"hsm-{variant}",
        measure="TV",
        series_length=max(len(x) for x in xs),
        fs=fs,
        step_representatives=tuple(step_reps),
    )
