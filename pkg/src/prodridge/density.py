"""Product-kernel KDE: values, total/Riemannian gradients and Hessians, log jets.

All query machinery accepts either a single ambient point (1-d array) or a
batch of points (m, ambient_dim).  Sums over the sample are evaluated with a
per-query exponent shift so small bandwidths never underflow, and value,
gradient, and Hessian come out of one pass over the data.

Total derivatives are ambient derivatives of the quadratic-form kernel sum
itself; the Riemannian Hessian is assembled through the tangent projector
with the radial correction term on spherical blocks, which makes the result
independent of how the sum is extended off the spheres.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ProductSpace, check_point, project_tangent
from .kernels import Bandwidths, KernelProfile, default_profile, log_kde_normalizing_constant

_UNDERFLOW_FLOOR = 1e-300
_CHUNK_FLOATS = 8_000_000


class DegenerateWeightsError(ArithmeticError):
    """Every kernel weight vanished; the query is unusably far from the data."""


class DensityUnderflowError(ArithmeticError):
    """Density below the representable floor; log-density queries are meaningless."""


@dataclass
class DensityJet:
    """Value with total and tangent-space derivatives at one point."""

    value: float
    total_gradient: np.ndarray
    total_hessian: np.ndarray
    riem_gradient: np.ndarray
    riem_hessian: np.ndarray


class KdeModel:
    """Dataset + bandwidths + kernel profiles; immutable after construction.

    All queries are read-only and callable concurrently; batch queries
    vectorize over query points.
    """

    def __init__(
        self,
        space: ProductSpace,
        data: np.ndarray,
        h: Bandwidths,
        profiles: Optional[tuple[KernelProfile, KernelProfile]] = None,
    ):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.shape[0] < 1:
            raise ValueError("need at least one sample")
        check_point(space, data)
        if profiles is None:
            profiles = (default_profile(space.factor1), default_profile(space.factor2))
        self.space = space
        self.data = data
        self.h = h
        self.profiles = profiles
        self.n = data.shape[0]
        # per-coordinate 1/h^2, matching the block-diagonal bandwidth matrix
        hinv2 = np.empty(space.ambient_dim)
        for sl, hj in zip(space.slices, h):
            hinv2[sl] = 1.0 / (hj * hj)
        self.hinv2 = hinv2
        self.exponential = profiles[0].exponential and profiles[1].exponential
        # custom profiles have no closed-form normalizer; leave the sum unnormalized
        self.log_norm = log_kde_normalizing_constant(space, h) if self.exponential else 0.0

    # ------------------------------------------------------------------
    # shared plumbing

    def _as_batch(self, z: np.ndarray) -> tuple[np.ndarray, bool]:
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return z[None, :], True
        return z, False

    def _exponents(self, P: np.ndarray) -> np.ndarray:
        """-(z - Z_i)^T H^-1 (z - Z_i) / 2 for every query/sample pair, (m, n)."""
        Zw = self.data * self.hinv2
        zz = np.sum(P * P * self.hinv2, axis=1)
        ZZ = np.sum(self.data * Zw, axis=1)
        return -0.5 * (zz[:, None] + ZZ[None, :] - 2.0 * P @ Zw.T)

    def _shifted_weights(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Relative kernel weights exp(s - max s) with the shift and log-sum."""
        S = self._exponents(P)
        if not np.all(np.isfinite(S)):
            raise DegenerateWeightsError("non-finite kernel exponents")
        shift = S.max(axis=1)
        W = np.exp(S - shift[:, None])
        lse = np.log(W.sum(axis=1)) + shift
        return W, shift, lse

    # ------------------------------------------------------------------
    # density values

    def log_values(self, z: np.ndarray) -> np.ndarray:
        """log f_hat at one point or a batch of points."""
        P, single = self._as_batch(z)
        if self.exponential:
            _, _, lse = self._shifted_weights(P)
            out = self.log_norm - np.log(self.n) + lse
        else:
            out = np.log(self.values(P))
        return out[0] if single else out

    def values(self, z: np.ndarray) -> np.ndarray:
        P, single = self._as_batch(z)
        if self.exponential:
            out = np.exp(self.log_norm - np.log(self.n) + self._shifted_weights(P)[2])
        else:
            k1, k2 = (p.k for p in self.profiles)
            s1, s2 = self._factor_args(P)
            out = np.mean(k1(s1) * k2(s2), axis=1)
        return out[0] if single else out

    def kde_value(self, z: np.ndarray) -> float:
        """f_hat(z); strictly positive under the exponential kernels."""
        return float(self.values(np.asarray(z, dtype=float)))

    # ------------------------------------------------------------------
    # custom-profile lane

    def _factor_args(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-factor profile arguments s_j = |block diff|^2 / (2 h_j^2), each (m, n)."""
        args = []
        for sl, hj in zip(self.space.slices, self.h):
            diff = P[:, None, sl] - self.data[None, :, sl]
            args.append(np.sum(diff * diff, axis=2) / (2.0 * hj * hj))
        return args[0], args[1]

    def block_weights(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nonnegative per-block mean-shift weights (w_x, w_y), each (m, n).

        Under the exponential kernels both blocks share the kernel weights;
        for general profiles the x block weighs by -k1' k2 and the y block by
        -k1 k2'.
        """
        P, _ = self._as_batch(z)
        if self.exponential:
            W = self._shifted_weights(P)[0]
            return W, W
        k1, dk1 = self.profiles[0].k, self.profiles[0].dk
        k2, dk2 = self.profiles[1].k, self.profiles[1].dk
        s1, s2 = self._factor_args(P)
        return -dk1(s1) * k2(s2), -k1(s1) * dk2(s2)

    def g_factors(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """The nonnegative scalars (G_x, G_y) scaling each gradient block."""
        P, single = self._as_batch(z)
        if self.exponential:
            f = self.values(P)
            gx = f / (self.h.h1 ** 2)
            gy = f / (self.h.h2 ** 2)
        else:
            wx, wy = self.block_weights(P)
            c = 1.0 / self.n
            gx = c * wx.sum(axis=1) / (self.h.h1 ** 2)
            gy = c * wy.sum(axis=1) / (self.h.h2 ** 2)
        if single:
            return float(gx[0]), float(gy[0])
        return gx, gy

    def block_means(self, z: np.ndarray) -> np.ndarray:
        """Blockwise weighted sample means (m, ambient); the mean-shift target."""
        P, single = self._as_batch(z)
        wx, wy = self.block_weights(P)
        out = np.empty_like(P)
        s1, s2 = self.space.slices
        sx = wx.sum(axis=1)
        sy = wy.sum(axis=1)
        if np.any(sx <= 0.0) or np.any(sy <= 0.0):
            raise DegenerateWeightsError("mean-shift weights degenerate at a query point")
        out[:, s1] = (wx @ self.data[:, s1]) / sx[:, None]
        out[:, s2] = (wy @ self.data[:, s2]) / sy[:, None]
        return out[0] if single else out

    # ------------------------------------------------------------------
    # derivatives

    def gradients(self, z: np.ndarray) -> np.ndarray:
        """Total gradient of f_hat at one point or a batch, ambient coordinates."""
        P, single = self._as_batch(z)
        if self.exponential:
            f = self.values(P)
            out = (self.block_means(P) - P) * self.hinv2 * f[:, None]
        else:
            wx, wy = self.block_weights(P)
            out = np.empty_like(P)
            s1, s2 = self.space.slices
            c = 1.0 / self.n
            out[:, s1] = c * (wx @ self.data[:, s1] - wx.sum(axis=1)[:, None] * P[:, s1])
            out[:, s2] = c * (wy @ self.data[:, s2] - wy.sum(axis=1)[:, None] * P[:, s2])
            out *= self.hinv2
        return out[0] if single else out

    def kde_total_gradient(self, z: np.ndarray) -> np.ndarray:
        return self.gradients(np.asarray(z, dtype=float))

    def _hessians_exponential(self, P: np.ndarray, W: np.ndarray, f: np.ndarray) -> np.ndarray:
        m, a = P.shape
        sumW = W.sum(axis=1)
        H = np.empty((m, a, a))
        chunk = max(1, _CHUNK_FLOATS // (self.n * a))
        for lo in range(0, m, chunk):
            hi = min(m, lo + chunk)
            diff = (P[lo:hi, None, :] - self.data[None, :, :]) * self.hinv2
            H[lo:hi] = np.einsum("mi,mia,mib->mab", W[lo:hi], diff, diff)
        H /= sumW[:, None, None]
        H -= np.diag(self.hinv2)
        H *= f[:, None, None]
        return H

    def hessians(self, z: np.ndarray) -> np.ndarray:
        """Total Hessian of f_hat, (m, a, a) symmetric."""
        P, single = self._as_batch(z)
        if self.exponential:
            W, _, lse = self._shifted_weights(P)
            f = np.exp(self.log_norm - np.log(self.n) + lse)
            out = self._hessians_exponential(P, W, f)
        else:
            out = self._hessians_generic(P)
        return out[0] if single else out

    def _hessians_generic(self, P: np.ndarray) -> np.ndarray:
        d2k1, d2k2 = self.profiles[0].d2k, self.profiles[1].d2k
        if d2k1 is None or d2k2 is None:
            raise ValueError("custom profiles need d2k for Hessian queries")
        k1, dk1 = self.profiles[0].k, self.profiles[0].dk
        k2, dk2 = self.profiles[1].k, self.profiles[1].dk
        s1, s2 = self._factor_args(P)
        m, a = P.shape
        s1sl, s2sl = self.space.slices
        d1 = (P[:, None, s1sl] - self.data[None, :, s1sl]) / (self.h.h1 ** 2)
        d2 = (P[:, None, s2sl] - self.data[None, :, s2sl]) / (self.h.h2 ** 2)
        out = np.zeros((m, a, a))
        c = 1.0 / self.n
        out[:, s1sl, s1sl] = c * np.einsum("mi,mia,mib->mab", d2k1(s1) * k2(s2), d1, d1)
        out[:, s2sl, s2sl] = c * np.einsum("mi,mia,mib->mab", k1(s1) * d2k2(s2), d2, d2)
        cross = c * np.einsum("mi,mia,mib->mab", dk1(s1) * dk2(s2), d1, d2)
        out[:, s1sl, s2sl] = cross
        out[:, s2sl, s1sl] = np.swapaxes(cross, 1, 2)
        diag_x = c * np.sum(dk1(s1) * k2(s2), axis=1) / (self.h.h1 ** 2)
        diag_y = c * np.sum(k1(s1) * dk2(s2), axis=1) / (self.h.h2 ** 2)
        idx = np.arange(a)
        for i in idx[s1sl]:
            out[:, i, i] += diag_x
        for i in idx[s2sl]:
            out[:, i, i] += diag_y
        return out

    def kde_total_hessian(self, z: np.ndarray) -> np.ndarray:
        return self.hessians(np.asarray(z, dtype=float))

    # ------------------------------------------------------------------
    # Riemannian quantities

    def riemannian_gradient(self, z: np.ndarray) -> np.ndarray:
        """Tangent projection of the total gradient; radial components vanish."""
        P, single = self._as_batch(z)
        out = project_tangent(self.space, P, self.gradients(P))
        return out[0] if single else out

    def _riemannian_from_totals(
        self, P: np.ndarray, grads: np.ndarray, hessians: np.ndarray
    ) -> np.ndarray:
        """P_z [hess - Diag(A_1, A_2)] P_z with A_j = (x_j . grad_j) I on spheres."""
        m, a = P.shape
        M = hessians.copy()
        for f, sl in zip(self.space.factors, self.space.slices):
            if f.is_sphere:
                alpha = np.sum(P[:, sl] * grads[:, sl], axis=1)
                for i in range(sl.start, sl.stop):
                    M[:, i, i] -= alpha
        proj = np.broadcast_to(np.eye(a), (m, a, a)).copy()
        for f, sl in zip(self.space.factors, self.space.slices):
            if f.is_sphere:
                proj[:, sl, sl] -= np.einsum("mi,mj->mij", P[:, sl], P[:, sl])
        out = np.einsum("mab,mbc,mcd->mad", proj, M, proj)
        return 0.5 * (out + np.swapaxes(out, 1, 2))

    def riemannian_hessian(self, z: np.ndarray) -> np.ndarray:
        """Riemannian Hessian of f_hat as an ambient symmetric matrix.

        Symmetric, and every radial direction of a spherical block is in its
        kernel.
        """
        P, single = self._as_batch(z)
        out = self._riemannian_from_totals(P, self.gradients(P), self.hessians(P))
        return out[0] if single else out

    # ------------------------------------------------------------------
    # jets

    def batch_jets(self, z: np.ndarray, log: bool = False, hessian: bool = True):
        """One-pass value/gradient(/Hessian) arrays for a batch of queries.

        Returns (values, log_values, grads, hessians, riem_grads, riem_hess);
        the Hessian entries are None when hessian=False.  With log=True the
        gradient/Hessian entries differentiate log f_hat instead.
        """
        P, _ = self._as_batch(z)
        if not self.exponential:
            return self._batch_jets_generic(P, log=log, hessian=hessian)
        W, _, lse = self._shifted_weights(P)
        logf = self.log_norm - np.log(self.n) + lse
        f = np.exp(logf)
        sumW = W.sum(axis=1)
        s1, s2 = self.space.slices
        means = np.empty_like(P)
        means[:, s1] = (W @ self.data[:, s1]) / sumW[:, None]
        means[:, s2] = (W @ self.data[:, s2]) / sumW[:, None]
        glog = (means - P) * self.hinv2  # H^-1 Xi = grad log f_hat
        grads = glog * f[:, None]
        H = Hlog = None
        if hessian:
            H = self._hessians_exponential(P, W, f)
            if log:
                Hlog = H / f[:, None, None] - np.einsum("ma,mb->mab", glog, glog)
        if log:
            g, h2 = glog, Hlog
            val = logf
        else:
            g, h2 = grads, H
            val = f
        rg = project_tangent(self.space, P, g)
        rh = self._riemannian_from_totals(P, g, h2) if hessian else None
        return val, logf, g, h2, rg, rh

    def _batch_jets_generic(self, P: np.ndarray, log: bool, hessian: bool):
        f = self.values(P)
        grads = self.gradients(P)
        logf = np.log(f)
        H = self.hessians(P) if hessian else None
        if log:
            g = grads / f[:, None]
            h2 = None
            if hessian:
                h2 = H / f[:, None, None] - np.einsum("ma,mb->mab", g, g)
            val = logf
        else:
            g, h2, val = grads, H, f
        rg = project_tangent(self.space, P, g)
        rh = self._riemannian_from_totals(P, g, h2) if hessian else None
        return val, logf, g, h2, rg, rh

    def density_jet(self, z: np.ndarray) -> DensityJet:
        """Value, total gradient/Hessian, and Riemannian gradient/Hessian of f_hat."""
        P, _ = self._as_batch(np.asarray(z, dtype=float))
        val, _, g, h2, rg, rh = self.batch_jets(P, log=False, hessian=True)
        return DensityJet(float(val[0]), g[0], h2[0], rg[0], rh[0])

    def log_density_jet(self, z: np.ndarray) -> DensityJet:
        """DensityJet of log f_hat; raises once the density underflows doubles."""
        P, _ = self._as_batch(np.asarray(z, dtype=float))
        val, logf, g, h2, rg, rh = self.batch_jets(P, log=True, hessian=True)
        if logf[0] < np.log(_UNDERFLOW_FLOOR):
            raise DensityUnderflowError(f"f_hat = exp({logf[0]:.1f}) below 1e-300")
        return DensityJet(float(val[0]), g[0], h2[0], rg[0], rh[0])
