"""Seeded samplers and simulation scenarios.

Every generator is deterministic under its seed: the same Scenario yields a
bit-identical dataset.  Curve and surface scenarios also carry a dense
uniform sample of the hidden manifold for error measurement; mixture
scenarios carry their nominal mode locations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .geometry import ProductSpace, euclidean, sphere

SCENARIOS = (
    "vmf_gauss_mixture",
    "product_vmf_mixture",
    "spiral",
    "spherical_cone",
    "cylinder",
    "torus",
)

_DEFAULT_MANIFOLD_POINTS = 2000


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    noise_sigma: Optional[float] = None  # None -> the scenario's own default
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {SCENARIOS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.noise_sigma is not None and self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


@dataclass
class GroundTruth:
    """Whatever the scenario defines: nominal modes and/or a manifold sample.

    manifold_kind is 'cartesian' when the sample lives in R^3 (radial
    embedding of sphere-times-radius data) and 'ambient' when it shares the
    dataset's ambient product coordinates.
    """

    true_modes: Optional[np.ndarray] = None
    manifold_sample: Optional[np.ndarray] = None
    manifold_kind: Optional[str] = None


@dataclass
class GeneratedData:
    space: ProductSpace
    points: np.ndarray
    truth: GroundTruth


def _rng(seed_or_rng: Union[int, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def sample_vmf(
    mu: np.ndarray, kappa: float, n: int, rng: Union[int, np.random.Generator]
) -> np.ndarray:
    """i.i.d. von Mises-Fisher sample on the sphere containing mu.

    Tangent-normal construction with the usual beta-envelope rejection step
    for the cosine against the mean direction; kappa = 0 falls back to the
    uniform distribution on the sphere.
    """
    rng = _rng(rng)
    mu = np.asarray(mu, dtype=float)
    p = mu.shape[0]
    if abs(np.linalg.norm(mu) - 1.0) > 1e-9:
        raise ValueError("mu must be a unit vector")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if kappa == 0.0:
        x = rng.standard_normal((n, p))
        return x / np.linalg.norm(x, axis=1, keepdims=True)

    dim = p - 1
    b = dim / (math.sqrt(4.0 * kappa * kappa + dim * dim) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + dim * math.log(1.0 - x0 * x0)

    w = np.empty(n)
    filled = 0
    while filled < n:
        todo = n - filled
        z = rng.beta(dim / 2.0, dim / 2.0, size=todo)
        cand = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = rng.uniform(size=todo)
        ok = kappa * cand + dim * np.log(1.0 - x0 * cand) - c >= np.log(u)
        take = cand[ok]
        w[filled : filled + take.size] = take
        filled += take.size

    v = rng.standard_normal((n, p))
    v -= (v @ mu)[:, None] * mu
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return w[:, None] * mu + np.sqrt(np.clip(1.0 - w * w, 0.0, None))[:, None] * v


# ----------------------------------------------------------------------
# angle conversions (astronomical convention: azimuth xi, elevation phi)


def circle_point(theta) -> np.ndarray:
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def circle_angle(xy: np.ndarray) -> np.ndarray:
    xy = np.asarray(xy, dtype=float)
    return np.arctan2(xy[..., 1], xy[..., 0])


def sphere2_point(xi, phi) -> np.ndarray:
    return np.stack(
        [np.cos(phi) * np.cos(xi), np.cos(phi) * np.sin(xi), np.sin(phi)], axis=-1
    )


def sphere2_angles(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    return np.arctan2(X[..., 1], X[..., 0]), np.arcsin(np.clip(X[..., 2], -1.0, 1.0))


# ----------------------------------------------------------------------
# scenarios


def _gen_vmf_gauss_mixture(sc: Scenario, rng: np.random.Generator) -> GeneratedData:
    # 2/5 vMF((1,0),3) N(0,1/4) + 1/5 vMF((0,1),10) N(1,1) + 2/5 vMF((-1,0),3) N(2,1)
    # (the Gaussian scale parameters are standard deviations)
    space = ProductSpace(sphere(1), euclidean(1))
    weights = [0.4, 0.2, 0.4]
    mus = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([-1.0, 0.0])]
    kappas = [3.0, 10.0, 3.0]
    means = [0.0, 1.0, 2.0]
    sds = [0.25, 1.0, 1.0]
    labels = rng.choice(3, size=sc.n, p=weights)
    pts = np.empty((sc.n, 3))
    for j in range(3):
        idx = np.flatnonzero(labels == j)
        if idx.size:
            pts[idx, :2] = sample_vmf(mus[j], kappas[j], idx.size, rng)
            pts[idx, 2] = means[j] + sds[j] * rng.standard_normal(idx.size)
    modes = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [-1.0, 0.0, 2.0]])
    return GeneratedData(space, pts, GroundTruth(true_modes=modes))


def _gen_product_vmf_mixture(sc: Scenario, rng: np.random.Generator) -> GeneratedData:
    # independent product of two equal-weight circular vMF mixtures; the
    # factor-2 components sit at angles 0 and 3pi/4
    space = ProductSpace(sphere(1), sphere(1))
    w = [0.5, 0.5]
    mus1 = [circle_point(0.0), circle_point(math.pi / 2)]
    mus2 = [circle_point(0.0), circle_point(3 * math.pi / 4)]
    pts = np.empty((sc.n, 4))
    lab1 = rng.choice(2, size=sc.n, p=w)
    for j in range(2):
        idx = np.flatnonzero(lab1 == j)
        if idx.size:
            pts[idx, :2] = sample_vmf(mus1[j], 5.0, idx.size, rng)
    lab2 = rng.choice(2, size=sc.n, p=w)
    for j in range(2):
        idx = np.flatnonzero(lab2 == j)
        if idx.size:
            pts[idx, 2:] = sample_vmf(mus2[j], 7.0, idx.size, rng)
    angles = [(0.0, 0.0), (0.0, 3 * math.pi / 4), (math.pi / 2, 0.0), (math.pi / 2, 3 * math.pi / 4)]
    modes = np.array([np.concatenate([circle_point(a), circle_point(b)]) for a, b in angles])
    return GeneratedData(space, pts, GroundTruth(true_modes=modes))


def _spiral_curve_cartesian(t: np.ndarray) -> np.ndarray:
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    return np.stack([t * c * np.cos(5 * t), t * c * np.sin(5 * t), t * s], axis=-1)


def _gen_spiral(sc: Scenario, rng: np.random.Generator) -> GeneratedData:
    # spiral (xi, phi, R) = (5t, pi/6, t) on S^2 x R with angular-linear noise
    space = ProductSpace(sphere(2), euclidean(1))
    sigma = 0.2 if sc.noise_sigma is None else sc.noise_sigma
    t = rng.uniform(0.0, 4.0, size=sc.n)
    xi = 5.0 * t + sigma * rng.standard_normal(sc.n)
    phi = math.pi / 6 + sigma * rng.standard_normal(sc.n)
    R = t + sigma * rng.standard_normal(sc.n)
    pts = np.column_stack([sphere2_point(xi, phi), R])
    grid = np.linspace(0.0, 4.0, _DEFAULT_MANIFOLD_POINTS)
    truth = GroundTruth(
        manifold_sample=_spiral_curve_cartesian(grid), manifold_kind="cartesian"
    )
    return GeneratedData(space, pts, truth)


def _gen_spherical_cone(sc: Scenario, rng: np.random.Generator) -> GeneratedData:
    # latitude-45 circle on S^2 with Cartesian noise renormalized to the
    # sphere, radius uniform on [0, 2]; the hidden surface is a cone of
    # apex angle pi/2
    space = ProductSpace(sphere(2), euclidean(1))
    sigma = 0.1 if sc.noise_sigma is None else sc.noise_sigma
    theta = rng.uniform(0.0, 2.0 * math.pi, size=sc.n)
    base = sphere2_point(theta, math.pi / 4)
    noisy = base + sigma * rng.standard_normal((sc.n, 3))
    noisy /= np.linalg.norm(noisy, axis=1, keepdims=True)
    R = rng.uniform(0.0, 2.0, size=sc.n)
    pts = np.column_stack([noisy, R])

    k = _DEFAULT_MANIFOLD_POINTS
    ang = rng.uniform(0.0, 2.0 * math.pi, size=k)
    rad = 2.0 * np.sqrt(rng.uniform(size=k))  # area-uniform on the cone
    surf = rad[:, None] * sphere2_point(ang, math.pi / 4)
    return GeneratedData(space, pts, GroundTruth(manifold_sample=surf, manifold_kind="cartesian"))


def _gen_cylinder(sc: Scenario, rng: np.random.Generator) -> GeneratedData:
    # curve (cos t, sin t, t/2) on S^1 x R, t in [-pi, pi), noise on angle and height
    space = ProductSpace(sphere(1), euclidean(1))
    sigma = 0.3 if sc.noise_sigma is None else sc.noise_sigma
    t = rng.uniform(-math.pi, math.pi, size=sc.n)
    ang = t + sigma * rng.standard_normal(sc.n)
    y = t / 2.0 + sigma * rng.standard_normal(sc.n)
    pts = np.column_stack([circle_point(ang), y])
    grid = np.linspace(-math.pi, math.pi, _DEFAULT_MANIFOLD_POINTS, endpoint=False)
    curve = np.column_stack([circle_point(grid), grid / 2.0])
    return GeneratedData(space, pts, GroundTruth(manifold_sample=curve, manifold_kind="ambient"))


def _gen_torus(sc: Scenario, rng: np.random.Generator) -> GeneratedData:
    # two toroidal circles theta in {0, 3pi/4}, phi uniform, both angles noisy
    space = ProductSpace(sphere(1), sphere(1))
    sigma = 0.3 if sc.noise_sigma is None else sc.noise_sigma
    branch = rng.choice(2, size=sc.n)
    theta = np.where(branch == 0, 0.0, 3 * math.pi / 4) + sigma * rng.standard_normal(sc.n)
    phi = rng.uniform(-math.pi, math.pi, size=sc.n) + sigma * rng.standard_normal(sc.n)
    pts = np.column_stack([circle_point(theta), circle_point(phi)])
    k = _DEFAULT_MANIFOLD_POINTS
    grid = np.linspace(-math.pi, math.pi, k // 2, endpoint=False)
    curves = [
        np.column_stack([np.tile(circle_point(th), (k // 2, 1)), circle_point(grid)])
        for th in (0.0, 3 * math.pi / 4)
    ]
    return GeneratedData(
        space, pts, GroundTruth(manifold_sample=np.vstack(curves), manifold_kind="ambient")
    )


_GENERATORS = {
    "vmf_gauss_mixture": _gen_vmf_gauss_mixture,
    "product_vmf_mixture": _gen_product_vmf_mixture,
    "spiral": _gen_spiral,
    "spherical_cone": _gen_spherical_cone,
    "cylinder": _gen_cylinder,
    "torus": _gen_torus,
}


def generate(scenario: Scenario) -> GeneratedData:
    """Generate a scenario's dataset and ground truth, deterministic under seed."""
    rng = np.random.default_rng(scenario.seed)
    return _GENERATORS[scenario.name](scenario, rng)
