"""Finite codebook construction and Monte Carlo distortion measurement.

``build_stratified`` realizes a point density xi as a concrete codebook: the
support box is split into congruent half-open cells, each cell receives a
locally optimal uniform pattern carrying floor(n * cell-mass) points (d = 1:
midpoint grid; d = 2: hexagonal lattice patch under the Euclidean norm,
square grid under the sup norm), and a coarse safety lattice
kappa * n^(-1/d) * Z^d is unioned in so regions whose floor truncates to
zero still have a bounded worst-case distance.  Cell counts use plain floor
with no global rebalancing; the safety lattice absorbs the underflow.

``build_tail_net`` covers the complement of the core box by shell nets:
shell k (while its budget floor(alpha_k * N) is at least one point) covers
the ball of radius r_{k+1} with a uniform grid, and the origin is always
included.

``mc_distortion`` estimates the Orlicz norm of the nearest-point distance
under the source by pooling independent sample shards (Philox streams
jumped per shard) and reports a leave-one-shard-out jackknife standard
error.  ``run_convergence_study`` drives the whole pipeline along a size
schedule.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .orlicz import orlicz_norm
from .sources import TailSpec


class BucketIndex:
    """Uniform-grid bucket index for nearest-neighbor queries (d >= 2).

    Points are hashed into a regular grid of buckets; a query expands
    square rings of buckets around its own bucket until the nearest point
    found so far is provably closer than any unexplored bucket.
    """

    def __init__(self, points, space, buckets_per_axis=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        self.points = pts
        self.space = space
        d = pts.shape[1]
        if buckets_per_axis is None:
            buckets_per_axis = max(1, int(round(len(pts) ** (1.0 / d))))
        self.buckets = int(buckets_per_axis)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-300)
        self.lo = lo - 1e-9 * span
        self.width = span * (1.0 + 2e-9) / self.buckets
        self.min_width = float(self.width.min())
        coords = self._coords(pts)
        table = {}
        for i, c in enumerate(map(tuple, coords)):
            table.setdefault(c, []).append(i)
        self.table = {c: np.array(ix) for c, ix in table.items()}

    def _coords(self, x):
        c = np.floor((np.atleast_2d(x) - self.lo) / self.width).astype(int)
        return np.clip(c, 0, self.buckets - 1)

    def _ring(self, center, radius):
        d = len(center)
        if radius == 0:
            yield tuple(center)
            return
        for offset in itertools.product(range(-radius, radius + 1), repeat=d):
            if max(abs(o) for o in offset) == radius:
                yield tuple(center[k] + offset[k] for k in range(d))

    def query_one(self, x):
        """Distance from one point to its nearest codebook point."""
        x = np.asarray(x, dtype=float)
        center = self._coords(x)[0]
        best = math.inf
        radius = 0
        while True:
            found = []
            for cell in self._ring(center, radius):
                if all(0 <= cell[k] < self.buckets for k in range(len(cell))):
                    idx = self.table.get(cell)
                    if idx is not None:
                        found.append(idx)
            if found:
                cand = self.points[np.concatenate(found)]
                dist = self.space.norm(cand - x[None, :])
                best = min(best, float(np.min(dist)))
            # any point in a farther ring is at least radius * min_width
            # away in every supported norm (sup <= euclidean)
            if best <= radius * self.min_width or radius > 2 * self.buckets:
                return best
            radius += 1

    def query(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.array([self.query_one(row) for row in x])


@dataclass
class Codebook:
    """A finite set of reproduction points with norm geometry attached."""
    points: np.ndarray
    space: object
    construction: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.points)

    @property
    def index(self):
        """Nearest-neighbor accelerator, built on first use."""
        if getattr(self, "_index", None) is None:
            if self.space.dimension == 1:
                self._index = np.sort(
                    np.asarray(self.points, dtype=float).reshape(-1))
            else:
                self._index = BucketIndex(self.points, self.space)
        return self._index

    def nearest_distances(self, samples):
        """Distance from each sample to its nearest codebook point."""
        if self.space.dimension == 1:
            flat = self.index
            x = np.asarray(samples, dtype=float).reshape(-1)
            pos = np.clip(np.searchsorted(flat, x), 1, len(flat) - 1)
            return np.minimum(np.abs(x - flat[pos - 1]),
                              np.abs(x - flat[pos]))
        return self.index.query(samples)


def _cell_mass_1d(xi, a, b, nodes=16):
    xs = np.linspace(a, b, nodes + 1)
    dens = np.array([xi(float(x)) for x in xs])
    return float(np.trapezoid(dens, xs))


def _cell_mass_2d(xi, x0, x1, y0, y1, nodes=5):
    gx = np.linspace(x0, x1, 2 * nodes + 1)[1::2]
    gy = np.linspace(y0, y1, 2 * nodes + 1)[1::2]
    vals = [[xi((float(a), float(b))) for a in gx] for b in gy]
    return float(np.mean(vals)) * (x1 - x0) * (y1 - y0)


def _hex_patch(x0, x1, y0, y1, count):
    """About ``count`` points of a hexagonal lattice clipped to a rectangle."""
    area = (x1 - x0) * (y1 - y0)
    if count < 1 or area <= 0:
        return np.empty((0, 2))
    # one point per s^2 sqrt(3)/2 of area at lattice constant s
    s = math.sqrt(area / (count * math.sqrt(3.0) / 2.0))
    rows = max(1, int(math.ceil((y1 - y0) / (s * math.sqrt(3.0) / 2.0))))
    pts = []
    for j in range(rows):
        y = y0 + (j + 0.5) * (y1 - y0) / rows
        off = 0.25 * s if j % 2 else -0.25 * s
        ncol = max(1, int(math.ceil((x1 - x0) / s)))
        for i in range(ncol):
            x = x0 + (i + 0.5) * (x1 - x0) / ncol + off
            if x0 <= x <= x1:
                pts.append((x, y))
    return np.array(pts)


def _square_patch(x0, x1, y0, y1, count):
    """About ``count`` points of a square grid clipped to a rectangle."""
    if count < 1:
        return np.empty((0, 2))
    aspect = (x1 - x0) / max(y1 - y0, 1e-300)
    nx = max(1, int(round(math.sqrt(count * aspect))))
    ny = max(1, int(round(count / nx)))
    gx = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    gy = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    return np.array([(x, y) for x in gx for y in gy])


def _safety_lattice_1d(lo, hi, spacing):
    j0 = int(math.ceil(lo / spacing))
    j1 = int(math.floor(hi / spacing))
    if j1 < j0:
        return np.empty(0)
    return spacing * np.arange(j0, j1 + 1, dtype=float)


def build_stratified(xi, n, support_box, m, safety_kappa, geometry):
    """Stratified codebook for the density ``xi`` at resolution ``n``.

    The support box is split into 2^((m+1)d) congruent half-open cells;
    cell i carries floor(n * integral of xi over cell i) points in a
    locally optimal uniform pattern.  A safety lattice with spacing
    safety_kappa * n^(-1/d), intersected with the box, is unioned in
    (pass safety_kappa=None to disable it).
    """
    if n <= 0:
        raise ValueError("resolution n must be positive")
    if m < 0:
        raise ValueError("subdivision level m must be >= 0")
    d = geometry.dimension
    per_axis = 2 ** (int(m) + 1)
    if d == 1:
        lo, hi = float(support_box[0]), float(support_box[1])
        edges = np.linspace(lo, hi, per_axis + 1)
        parts = []
        for i in range(per_axis):
            a, b = float(edges[i]), float(edges[i + 1])
            count = int(math.floor(n * _cell_mass_1d(xi, a, b)))
            if count >= 1:
                parts.append(a + (2.0 * np.arange(count) + 1.0)
                             * (b - a) / (2.0 * count))
        if safety_kappa is not None and math.isfinite(safety_kappa):
            parts.append(_safety_lattice_1d(lo, hi, safety_kappa / n))
        points = np.unique(np.concatenate(parts)) if parts else np.empty(0)
    elif d == 2:
        (x_lo, y_lo), (x_hi, y_hi) = support_box
        xe = np.linspace(float(x_lo), float(x_hi), per_axis + 1)
        ye = np.linspace(float(y_lo), float(y_hi), per_axis + 1)
        patches = []
        for i in range(per_axis):
            for j in range(per_axis):
                mass = _cell_mass_2d(xi, xe[i], xe[i + 1], ye[j], ye[j + 1])
                count = int(math.floor(n * mass))
                if count < 1:
                    continue
                patch = (_hex_patch if geometry.kind == "euclidean"
                         else _square_patch)(
                    xe[i], xe[i + 1], ye[j], ye[j + 1], count)
                if len(patch):
                    patches.append(patch)
        if safety_kappa is not None and math.isfinite(safety_kappa):
            spacing = safety_kappa * n ** (-0.5)
            gx = _safety_lattice_1d(float(x_lo), float(x_hi), spacing)
            gy = _safety_lattice_1d(float(y_lo), float(y_hi), spacing)
            if len(gx) and len(gy):
                patches.append(np.array([(a, b) for a in gx for b in gy]))
        points = (np.unique(np.vstack(patches), axis=0) if patches
                  else np.empty((0, 2)))
    else:
        raise ValueError("stratified construction supports d in {1, 2}")
    construction = {"target_n": float(n), "cells": per_axis ** d,
                    "subdivision": int(m), "safety_kappa": safety_kappa,
                    "support_box": support_box}
    return Codebook(points=points, space=geometry,
                    construction=construction)


def build_tail_net(geometry, budget_n, tail=None, shell_start=3):
    """Shell nets covering balls of growing radius, plus the origin.

    Shell k (k >= shell_start, while floor(alpha_k * budget_n) >= 1)
    places a uniform grid of that many points over the ball of radius
    r_{k+1}; the covering radius of shell k is of order r_{k+1} divided
    by the per-axis point count.
    """
    tail = tail or TailSpec()
    d = geometry.dimension
    shells = []
    k = shell_start
    while True:
        budget = int(math.floor(tail.budget(k) * budget_n))
        if budget < 1:
            break
        r = tail.radius(k + 1)
        if d == 1:
            shells.append(-r + (2.0 * np.arange(budget) + 1.0) * r / budget)
        else:
            per_axis = max(1, int(math.floor(budget ** (1.0 / d))))
            axis = -r + (2.0 * np.arange(per_axis) + 1.0) * r / per_axis
            shells.append(np.array([(x, y) for x in axis for y in axis]))
        k += 1
    origin = np.zeros(1) if d == 1 else np.zeros((1, 2))
    if not shells:
        return origin
    return np.concatenate([origin] + shells, axis=0)


def _mass_outside_box(source, box, d):
    """Source mass outside the core box (0 for compact support inside it)."""
    if d == 1:
        try:
            return max(0.0, source.cdf(float(box[0]))
                       + 1.0 - source.cdf(float(box[1])))
        except (AttributeError, ValueError):
            return 1.0
    lo, hi = getattr(source, "lo", None), getattr(source, "hi", None)
    if lo is not None and hi is not None:
        inside = all(box[0][k] <= float(lo[k]) and float(hi[k]) <= box[1][k]
                     for k in range(d))
        return 0.0 if inside else 1.0
    return 1.0


def build_codebook(xi, point_mass, source, space, size_target, tail=None,
                   shell_start=3, core_fraction=0.97, safety_fraction=0.01,
                   subdivision=None, include_tail=None):
    """Assemble stratified core + safety lattice + tail net for a size budget.

    The stratified resolution is core_fraction * size_target / point_mass
    so the core holds about core_fraction of the budget; the safety lattice
    is sized to about safety_fraction of the budget; tail shells follow
    their own schedule against the full budget.  ``subdivision`` defaults
    to max(0, log2(size_target) - 6) so cells refine as the budget grows.
    ``include_tail=None`` adds tail shells exactly when the source carries
    mass outside the core box.
    """
    tail = tail or TailSpec()
    if subdivision is None:
        subdivision = max(0, int(round(math.log2(size_target))) - 6)
    d = space.dimension
    if d == 1:
        box = source.core_interval
    else:
        box = ((float(source.lo[0]), float(source.lo[1])),
               (float(source.hi[0]), float(source.hi[1])))
    if include_tail is None:
        include_tail = _mass_outside_box(source, box, d) > 0.0
    if include_tail:
        # extend the core box to the first tail shell radius, so the
        # stratified core hands off exactly where shell coverage begins
        r0 = tail.radius(shell_start)
        if d == 1:
            box = (min(box[0], -r0), max(box[1], r0))
        else:
            box = ((min(box[0][0], -r0), min(box[0][1], -r0)),
                   (max(box[1][0], r0), max(box[1][1], r0)))
    side = (box[1] - box[0] if d == 1
            else max(box[1][0] - box[0][0], box[1][1] - box[0][1]))
    n = core_fraction * size_target / point_mass
    safety_count = max(1.0, math.ceil(safety_fraction * size_target))
    # lattice spacing kappa * n^(-1/d) tuned to hold about safety_count points
    kappa = side * n ** (1.0 / d) / safety_count ** (1.0 / d)
    core = build_stratified(xi, n, box, subdivision, kappa, space)
    if include_tail:
        tail_pts = build_tail_net(space, size_target, tail=tail,
                                  shell_start=shell_start)
    else:
        tail_pts = np.empty(0) if d == 1 else np.empty((0, 2))
    pts = np.concatenate([core.points, tail_pts], axis=0)
    pts = np.unique(pts) if d == 1 else np.unique(pts, axis=0)
    construction = dict(core.construction)
    construction.update({
        "size_target": int(size_target),
        "core_points": int(core.size),
        "tail_points": int(len(tail_pts)),
        "tail_params": {"shell_start": int(shell_start),
                        "radius_scale": tail.radius_scale,
                        "radius_rate": tail.radius_rate,
                        "budget_gamma": tail.budget_gamma},
    })
    return Codebook(points=pts, space=space, construction=construction)


def mc_distortion(codebook, source, phi, n_samples=25000, shards=8, seed=0,
                  threads=1):
    """Monte Carlo Orlicz-norm distortion with a jackknife standard error.

    Each shard draws ``n_samples`` source points from an independent Philox
    stream (base key = seed, jumped per shard); the estimate is the Orlicz
    norm of the pooled nearest-distance sample and the standard error
    comes from leave-one-shard-out norms.  Shards may be evaluated by a
    thread pool; results are merged in shard order, so the estimate does
    not depend on ``threads``.
    """
    if shards < 2:
        raise ValueError("need at least 2 shards for a jackknife error")
    base = np.random.Philox(key=seed)

    def eval_shard(s):
        rng = np.random.Generator(base.jumped(s))
        return codebook.nearest_distances(source.sample(n_samples, rng))

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        codebook.index  # build once before sharing across threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shard_dists = list(pool.map(eval_shard, range(shards)))
    else:
        shard_dists = [eval_shard(s) for s in range(shards)]
    pooled = np.concatenate(shard_dists)
    estimate = orlicz_norm(phi, pooled)
    leave_out = []
    for s in range(shards):
        rest = np.concatenate([d for t, d in enumerate(shard_dists)
                               if t != s])
        leave_out.append(orlicz_norm(phi, rest))
    theta = np.asarray(leave_out)
    se = math.sqrt((shards - 1) / shards
                   * float(np.sum((theta - theta.mean()) ** 2)))
    return estimate, se


def empirical_histogram(points, edges):
    """Mass of codebook points per bin, normalized by the full point count."""
    pts = np.asarray(points, dtype=float).reshape(-1)
    counts, _ = np.histogram(pts, bins=edges)
    return counts / max(1, len(pts))


def profile_histogram(xi, edges, point_mass, per_bin=64):
    """xi-mass fraction per bin: the density the codebook should follow."""
    out = np.empty(len(edges) - 1)
    for i in range(len(edges) - 1):
        xs = np.linspace(edges[i], edges[i + 1], per_bin + 1)
        dens = np.array([xi(float(x)) for x in xs])
        out[i] = float(np.trapezoid(dens, xs))
    return out / point_mass


def histogram_l1(freq_a, freq_b):
    """L1 distance between two bin-mass vectors."""
    return float(np.sum(np.abs(np.asarray(freq_a) - np.asarray(freq_b))))


def run_convergence_study(xi, point_mass, source, space, phi, sizes,
                          tail=None, shell_start=3, n_samples=25000,
                          shards=8, seed=0, threads=1, histogram_edges=None,
                          **build_kw):
    """Distortion scaling and histogram agreement along a size schedule.

    Returns one row per size with the realized codebook size, the Monte
    Carlo distortion and its jackknife error, the product
    size^(1/d) * distortion (which approaches the allocation mass from
    above as the budget grows), and, when histogram_edges is given
    (d = 1), the L1 distance between the codebook histogram and the
    normalized density xi / point_mass.
    """
    if histogram_edges is None and space.dimension == 1:
        histogram_edges = np.linspace(-6.0, 6.0, 25)
    reference = (profile_histogram(xi, histogram_edges, point_mass)
                 if histogram_edges is not None else None)
    rows = []
    for i, size in enumerate(sizes):
        cb = build_codebook(xi, point_mass, source, space, size, tail=tail,
                            shell_start=shell_start, **build_kw)
        est, se = mc_distortion(cb, source, phi, n_samples=n_samples,
                                shards=shards, seed=seed + i, threads=threads)
        row = {
            "size_target": int(size),
            "size": cb.size,
            "distortion": est,
            "distortion_se": se,
            "product": size ** (1.0 / space.dimension) * est,
            "construction": cb.construction,
        }
        if reference is not None:
            emp = empirical_histogram(cb.points, histogram_edges)
            row["histogram_l1"] = histogram_l1(emp, reference)
        rows.append(row)
    return rows


def save_codebook_csv(path, codebook, extra_meta=None):
    """Write points as CSV with '#'-prefixed metadata lines (RFC 4180 rows)."""
    meta = {k: v for k, v in codebook.construction.items()
            if not isinstance(v, (dict, tuple, list))}
    meta["size"] = codebook.size
    meta.update(extra_meta or {})
    d = codebook.space.dimension
    with open(path, "w", newline="") as f:
        for key in sorted(meta):
            f.write(f"# {key}={meta[key]}\r\n")
        writer = csv.writer(f)
        writer.writerow(["x"] if d == 1 else ["x", "y"])
        for p in codebook.points:
            writer.writerow([repr(float(p))] if d == 1
                            else [repr(float(p[0])), repr(float(p[1]))])
    return path
