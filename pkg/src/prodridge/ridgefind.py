"""Subspace constrained mean shift on product spaces.

The proposed iteration moves along eta * V_d V_d^T H^-1 Xi(z), the mean shift
vector prewhitened by the bandwidth matrix, with V_d the tail eigenvectors of
the Riemannian Hessian inside the tangent space.  A naive variant that
projects the raw mean shift vector is kept for pitfall comparisons: its fixed
points form a blockwise-rescaled (wrong) ridge whenever the two factors carry
different gradient scales.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .density import KdeModel
from .geometry import ProductSpace, normalize_point
from .kernels import Bandwidths
from .modeseek import EmptyResultError, RunReport, iterate_batched

VARIANTS = ("proposed", "naive")
_EIGENGAP_WARN = 1e-10


class RadialLeakageError(RuntimeError):
    """Radial filtering did not find exactly one zero eigenvector per sphere."""


@dataclass(frozen=True)
class ScmsConfig:
    ridge_dim: int
    step_size: Union[float, str] = "auto"  # 'auto' -> min(h1 h2, 1)
    tolerance: float = 1e-7
    max_iterations: int = 5000
    use_log_density: bool = True
    variant: str = "proposed"

    def __post_init__(self):
        if self.ridge_dim < 0:
            raise ValueError("ridge_dim must be nonnegative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.step_size != "auto" and not self.step_size > 0:
            raise ValueError("step_size must be positive or 'auto'")

    def resolve_step(self, h: Bandwidths) -> float:
        return default_step_size(h) if self.step_size == "auto" else float(self.step_size)


@dataclass
class TangentSpectrum:
    """Tangent-space eigenstructure of a Riemannian Hessian at one point.

    Eigenvalues are sorted descending; columns of V_d span the
    (intrinsic_dim - d) smallest directions.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    V_d: np.ndarray


def default_step_size(h: Bandwidths) -> float:
    """Bandwidth-adaptive step size min(h1 h2, 1); the cap keeps it sane for
    oversmoothed fits."""
    return min(h.h1 * h.h2, 1.0)


def _tail_eigvecs_batched(
    space: ProductSpace, P: np.ndarray, hessians: np.ndarray, d: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked tail eigenvectors of tangent-space Hessians.

    Returns (V_d of shape (m, a, DT - d), tangent eigenvalues (m, DT)
    descending).  Eigenvectors aligned with a radial direction (overlap above
    0.5) are filtered out; exactly one per spherical factor must appear.
    """
    DT = space.intrinsic_dim
    if not 0 <= d < DT:
        raise ValueError(f"ridge_dim must lie in [0, {DT})")
    w, V = np.linalg.eigh(hessians)  # ascending eigenvalues
    m, a = P.shape
    overlap2 = np.zeros((m, a))
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            proj = np.einsum("mk,mkv->mv", P[:, sl], V[:, sl, :])
            overlap2 += proj * proj
    radial = overlap2 > 0.25
    counts = radial.sum(axis=1)
    if np.any(counts != space.n_spheres):
        bad = int(np.flatnonzero(counts != space.n_spheres)[0])
        raise RadialLeakageError(
            f"expected {space.n_spheres} radial eigenvectors, found {counts[bad]} "
            f"at point index {bad}"
        )
    # push radial vectors past the tangent ones, then pick the smallest DT - d
    key = np.where(radial, np.inf, w)
    order = np.argsort(key, axis=1)
    tail_idx = order[:, : DT - d]
    Vd = np.take_along_axis(V, tail_idx[:, None, :], axis=2)
    tangent_w = np.take_along_axis(w, order[:, :DT], axis=1)[:, ::-1]
    return Vd, tangent_w


def tangent_eigendecomposition(
    hessian: np.ndarray, space: ProductSpace, z: np.ndarray, d: int
) -> TangentSpectrum:
    """Eigendecompose an ambient symmetric Hessian restricted to the tangent space.

    The ambient matrix must annihilate radial directions (as the Riemannian
    Hessian does); the corresponding near-zero eigenvectors are removed and
    the remaining intrinsic_dim pairs are sorted by descending eigenvalue.
    """
    z = np.asarray(z, dtype=float)
    H = np.asarray(hessian, dtype=float)
    Vd, wdesc = _tail_eigvecs_batched(space, z[None, :], H[None, :, :], d)
    DT = space.intrinsic_dim
    if d >= 1 and d < DT and wdesc[0, d - 1] - wdesc[0, d] < _EIGENGAP_WARN:
        warnings.warn(
            f"eigengap below {_EIGENGAP_WARN:g} at the ridge order boundary; "
            "V_d is not well determined here",
            RuntimeWarning,
        )
    w, V = np.linalg.eigh(H)
    overlap2 = np.zeros(z.shape[0])
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            proj = z[sl] @ V[sl, :]
            overlap2 += proj * proj
    keep = overlap2 <= 0.25
    vecs = V[:, keep][:, ::-1]
    return TangentSpectrum(wdesc[0], vecs, Vd[0])


def _scms_move(model: KdeModel, P: np.ndarray, config: ScmsConfig, eta: float) -> np.ndarray:
    """The SCMS displacement for a batch of points (before renormalization)."""
    use_log = config.use_log_density
    _, _, g, _, _, rh = model.batch_jets(P, log=use_log, hessian=True)
    Vd, _ = _tail_eigvecs_batched(model.space, P, rh, config.ridge_dim)
    if use_log:
        glog = g
    else:
        f = model.values(P)
        glog = g / f[:, None]
    if config.variant == "proposed":
        vec = eta * glog
    else:
        # naive pitfall: project the raw mean shift vector Xi = H glog
        vec = glog / model.hinv2
    coeff = np.einsum("mav,ma->mv", Vd, vec)
    return np.einsum("mav,mv->ma", Vd, coeff)


def scms_step(model: KdeModel, z: np.ndarray, config: ScmsConfig) -> np.ndarray:
    """One SCMS update of a single point (spherical blocks renormalized)."""
    P = np.asarray(z, dtype=float)[None, :]
    eta = config.resolve_step(model.h)
    out = normalize_point(model.space, P + _scms_move(model, P, config, eta))
    return out[0]


def find_ridge(
    model: KdeModel,
    starts: np.ndarray,
    config: ScmsConfig,
    threads: Optional[int] = None,
) -> tuple[np.ndarray, list[RunReport]]:
    """Iterate SCMS from every start and return the converged ridge sample.

    Non-convergent trajectories are dropped from the returned points but kept
    in the reports.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[0] == 0:
        raise ValueError("starts must be nonempty")
    eta = config.resolve_step(model.h)

    def step(P):
        return normalize_point(model.space, P + _scms_move(model, P, config, eta))

    pts, iters, conv = iterate_batched(
        starts, step, config.tolerance, config.max_iterations, threads=threads
    )
    logf = model.log_values(pts)
    reports = [
        RunReport(i, bool(conv[i]), int(iters[i]), pts[i], float(np.exp(logf[i])))
        for i in range(pts.shape[0])
    ]
    if not conv.any():
        raise EmptyResultError("no SCMS trajectory converged within max_iterations")
    return pts[conv], reports
