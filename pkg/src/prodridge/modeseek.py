"""Mean shift on product spaces: simultaneous and componentwise iterations,
per-point runs, low-density denoising, and mode merging."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .density import KdeModel
from .geometry import geodesic_pairwise, normalize_point

VARIANTS = ("simultaneous", "componentwise")


class EmptyResultError(RuntimeError):
    """Every trajectory was denoised or failed to converge."""


@dataclass(frozen=True)
class MeanShiftConfig:
    variant: str = "simultaneous"
    tolerance: float = 1e-7
    max_iterations: int = 5000
    denoise_quantile: float = 0.05
    merge_radius: Optional[float] = None  # None -> min(h1, h2) / 2

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ValueError("tolerance must be positive and max_iterations >= 1")
        if not (0.0 <= self.denoise_quantile < 1.0):
            raise ValueError("denoise_quantile must lie in [0, 1)")


@dataclass
class RunReport:
    """Trajectory summary for one start point."""

    index: int
    converged: bool
    iterations: int
    final_point: np.ndarray
    final_density: float


@dataclass
class ModeSet:
    """Merged modes with per-start basin labels (-1 for dropped starts)."""

    modes: np.ndarray
    density_values: np.ndarray
    basin_labels: np.ndarray
    reports: list[RunReport] = field(default_factory=list)


def mean_shift_vector(model: KdeModel, z: np.ndarray) -> np.ndarray:
    """Mean shift vector: blockwise weighted sample mean minus the point.

    Not parallel to the density gradient in general, but D(z) Xi(z) recovers
    it exactly, with D the blockwise diagonal of (G_x, G_y).
    """
    z = np.asarray(z, dtype=float)
    return model.block_means(z) - z


def mean_shift_step(model: KdeModel, z: np.ndarray, variant: str = "simultaneous") -> np.ndarray:
    """One mean-shift update of a single point (spherical blocks renormalized)."""
    out = _step_batch(model, np.asarray(z, dtype=float)[None, :], variant)
    return out[0]


def _step_batch(model: KdeModel, P: np.ndarray, variant: str) -> np.ndarray:
    space = model.space
    if variant == "simultaneous":
        return normalize_point(space, model.block_means(P))
    if variant != "componentwise":
        raise ValueError(f"variant must be one of {VARIANTS}")
    s1, s2 = space.slices
    half = P.copy()
    half[:, s1] = model.block_means(P)[:, s1]
    half = normalize_point(space, half)
    out = half.copy()
    out[:, s2] = model.block_means(half)[:, s2]
    return normalize_point(space, out)


def iterate_batched(
    starts: np.ndarray,
    step_fn: Callable[[np.ndarray], np.ndarray],
    tolerance: float,
    max_iterations: int,
    threads: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run independent trajectories until the ambient step norm drops below tolerance.

    Returns (final points, iteration counts, converged flags).  Trajectories
    share no state, so the start set can be split across threads freely.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if threads is None:
        threads = default_thread_count()
    if threads > 1 and starts.shape[0] > 1:
        chunks = np.array_split(np.arange(starts.shape[0]), min(threads, starts.shape[0]))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda idx: iterate_batched(
                        starts[idx], step_fn, tolerance, max_iterations, threads=1
                    ),
                    chunks,
                )
            )
        pts = np.vstack([r[0] for r in results])
        iters = np.concatenate([r[1] for r in results])
        conv = np.concatenate([r[2] for r in results])
        return pts, iters, conv

    pts = starts.copy()
    m = pts.shape[0]
    iters = np.zeros(m, dtype=int)
    conv = np.zeros(m, dtype=bool)
    active = np.arange(m)
    for _ in range(max_iterations):
        if active.size == 0:
            break
        new = step_fn(pts[active])
        step = np.linalg.norm(new - pts[active], axis=1)
        pts[active] = new
        iters[active] += 1
        done = step <= tolerance
        conv[active[done]] = True
        active = active[~done]
    return pts, iters, conv


def default_thread_count() -> int:
    env = os.environ.get("PRODRIDGE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _log_values_chunked(model: KdeModel, P: np.ndarray, chunk: int = 2048) -> np.ndarray:
    out = np.empty(P.shape[0])
    for lo in range(0, P.shape[0], chunk):
        out[lo : lo + chunk] = model.log_values(P[lo : lo + chunk])
    return out


def _single_linkage(space, points: np.ndarray, radius: float) -> np.ndarray:
    """Connected components of the radius graph under geodesic distance."""
    m = points.shape[0]
    parent = np.arange(m)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    D = geodesic_pairwise(space, points, points)
    for i, j in np.argwhere(np.triu(D <= radius, k=1)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    return np.array([find(i) for i in range(m)])


def find_modes(
    model: KdeModel,
    starts: np.ndarray,
    config: MeanShiftConfig = MeanShiftConfig(),
    threads: Optional[int] = None,
) -> ModeSet:
    """Run mean shift from every start, drop noise and non-convergent
    trajectories, and merge the endpoints into a deduplicated mode set.

    Starts whose density falls below the denoise quantile of the dataset's
    density values are skipped before iterating.  Converged endpoints within
    the merge radius (geodesic, single linkage) collapse to the
    highest-density member.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[0] == 0:
        raise ValueError("starts must be nonempty")
    m = starts.shape[0]

    keep = np.arange(m)
    if config.denoise_quantile > 0.0:
        data_logf = _log_values_chunked(model, model.data)
        threshold = np.quantile(data_logf, config.denoise_quantile)
        start_logf = _log_values_chunked(model, starts)
        keep = np.flatnonzero(start_logf >= threshold)
    if keep.size == 0:
        raise EmptyResultError("all starts fell below the denoise quantile")

    pts, iters, conv = iterate_batched(
        starts[keep],
        lambda P: _step_batch(model, P, config.variant),
        config.tolerance,
        config.max_iterations,
        threads=threads,
    )

    reports = [
        RunReport(int(keep[i]), bool(conv[i]), int(iters[i]), pts[i], float(model.values(pts[i])))
        for i in range(keep.size)
    ]
    good = np.flatnonzero(conv)
    if good.size == 0:
        raise EmptyResultError("no trajectory converged within max_iterations")

    ends = pts[good]
    dens = np.exp(_log_values_chunked(model, ends))
    # canonical endpoint order so merging is independent of trajectory order
    order = np.lexsort(ends.T[::-1])
    ends, dens, good = ends[order], dens[order], good[order]

    radius = config.merge_radius
    if radius is None:
        radius = min(model.h.h1, model.h.h2) / 2.0
    roots = _single_linkage(model.space, ends, radius)

    modes, mode_dens = [], []
    labels = np.full(m, -1, dtype=int)
    for root in np.unique(roots):
        member = np.flatnonzero(roots == root)
        best = member[np.argmax(dens[member])]
        modes.append(ends[best])
        mode_dens.append(dens[best])
        labels[keep[good[member]]] = len(modes) - 1

    modes = np.array(modes)
    mode_dens = np.array(mode_dens)
    # present modes in descending density order
    rank = np.argsort(-mode_dens, kind="stable")
    remap = np.empty_like(rank)
    remap[rank] = np.arange(rank.size)
    labels[labels >= 0] = remap[labels[labels >= 0]]
    return ModeSet(modes[rank], mode_dens[rank], labels, reports)
