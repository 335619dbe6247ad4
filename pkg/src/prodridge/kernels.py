"""Kernel profiles, modified Bessel functions, and KDE normalizing constants.

Profile convention: a kernel on a factor is evaluated as C * k(s) with
s = |u|^2 / 2, u the bandwidth-scaled ambient difference.  The Gaussian and
von Mises kernels share the profile k(s) = exp(-s), so the product KDE
collapses to a single quadratic-form exponential across both blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import Factor, ProductSpace

# power series below this argument, large-argument expansion above
_BESSEL_SWITCH = 30.0
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


def _log_bessel_i_series(order: float, x: float) -> float:
    """log I_order(x) by the ascending power series (converges for all x)."""
    if x == 0.0:
        return 0.0 if order == 0.0 else -math.inf
    # log of the leading factor (x/2)^order / Gamma(order+1)
    log_term = order * math.log(x / 2.0) - math.lgamma(order + 1.0)
    q = 0.25 * x * x
    total = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + order))
        total += term
        if term < 1e-18 * total or k > 1000:
            break
    return log_term + math.log(total)


def _log_bessel_i_asymptotic(order: float, x: float) -> float:
    """log I_order(x) by the large-argument expansion, truncated at its smallest term."""
    mu = 4.0 * order * order
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 40):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * x * k)
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if abs(term) < 1e-17 * abs(total):
            break
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(total)


def log_bessel_i(order: float, x: float) -> float:
    """Natural log of the modified Bessel function of the first kind I_order(x).

    Safe for arguments far beyond the overflow point of I itself.
    """
    if order < 0 or x < 0:
        raise ValueError("order and argument must be nonnegative")
    if x <= _BESSEL_SWITCH:
        return _log_bessel_i_series(order, x)
    return _log_bessel_i_asymptotic(order, x)


def bessel_i(order: float, x: float) -> float:
    """Modified Bessel function of the first kind, I_order(x).

    Power series for x <= 30, large-argument expansion beyond; relative error
    below 1e-10 through x = 700.  Raises OverflowError once the value exceeds
    the double range.
    """
    lv = log_bessel_i(order, x)
    if lv > _LOG_FLOAT_MAX:
        raise OverflowError(f"I_{order}({x}) exceeds the double-precision range")
    return math.exp(lv)


def sphere_surface_area(q: int) -> float:
    """Surface area of the unit sphere S^q in R^(q+1)."""
    return 2.0 * math.pi ** ((q + 1) / 2.0) / math.gamma((q + 1) / 2.0)


def vmf_normalizer(q: int, kappa: float) -> float:
    """von Mises-Fisher normalizing constant C_q(kappa) on S^q.

    C_q(k) = k^((q-1)/2) / ((2 pi)^((q+1)/2) I_((q-1)/2)(k)), with the
    kappa -> 0 limit handled analytically (reciprocal sphere area).
    """
    if q < 1:
        raise ValueError("q must be a positive integer")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if kappa == 0.0:
        return 1.0 / sphere_surface_area(q)
    return math.exp(log_vmf_normalizer(q, kappa))


def log_vmf_normalizer(q: int, kappa: float) -> float:
    """log C_q(kappa); log-domain so huge concentrations stay finite."""
    if kappa == 0.0:
        return -math.log(sphere_surface_area(q))
    nu = (q - 1) / 2.0
    return nu * math.log(kappa) - (q + 1) / 2.0 * math.log(2.0 * math.pi) - log_bessel_i(nu, kappa)


@dataclass(frozen=True)
class Bandwidths:
    """Per-factor bandwidths (h1, h2), both strictly positive."""

    h1: float
    h2: float

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError("bandwidths must be positive")

    def __iter__(self):
        return iter((self.h1, self.h2))


@dataclass(frozen=True)
class KernelProfile:
    """Kernel profile k(s) with derivative, evaluated at s = |u|^2 / 2.

    The built-in Gaussian/von Mises profile is exp(-s); arbitrary convex
    (k, dk) pairs can be injected for ascent experiments, but normalizing
    constants are exact only for the built-in pair.
    """

    name: str
    k: Callable[[np.ndarray], np.ndarray]
    dk: Callable[[np.ndarray], np.ndarray]
    d2k: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exponential: bool = False


def _exp_neg(s):
    return np.exp(-s)


def _neg_exp_neg(s):
    return -np.exp(-s)


def gaussian_profile() -> KernelProfile:
    """Gaussian profile exp(-s) for Euclidean factors."""
    return KernelProfile("gaussian", _exp_neg, _neg_exp_neg, _exp_neg, exponential=True)


def von_mises_profile() -> KernelProfile:
    """von Mises profile exp(-s) for spherical factors."""
    return KernelProfile("von_mises", _exp_neg, _neg_exp_neg, _exp_neg, exponential=True)


def default_profile(factor: Factor) -> KernelProfile:
    return von_mises_profile() if factor.is_sphere else gaussian_profile()


def log_factor_normalizer(factor: Factor, h: float) -> float:
    """log of the exponential kernel's normalizing constant on one factor.

    Gaussian on R^D: (2 pi)^(-D/2) h^(-D).  von Mises on S^q: C_q(1/h^2)
    e^(1/h^2), since exp(-|x-mu|^2/(2 h^2)) = exp((mu.x - 1)/h^2) on the
    sphere.  Computed in log form because e^(1/h^2) overflows for small h.
    """
    if factor.is_sphere:
        kappa = 1.0 / (h * h)
        return log_vmf_normalizer(factor.dim, kappa) + kappa
    return -0.5 * factor.dim * math.log(2.0 * math.pi) - factor.dim * math.log(h)


def log_kde_normalizing_constant(space: ProductSpace, h: Bandwidths) -> float:
    """log C(H) for the product of exponential kernels on the given space."""
    return log_factor_normalizer(space.factor1, h.h1) + log_factor_normalizer(
        space.factor2, h.h2
    )


def kde_normalizing_constant(space: ProductSpace, h: Bandwidths) -> float:
    """C(H), the constant making the summed exponential kernel a density.

    Raises OverflowError when a spherical factor's e^(1/h^2) term exceeds the
    double range; density evaluation itself works in the log domain and is
    not subject to this limit.
    """
    lc = log_kde_normalizing_constant(space, h)
    if lc > _LOG_FLOAT_MAX:
        raise OverflowError("normalizing constant overflows; use the log-domain value")
    return math.exp(lc)
