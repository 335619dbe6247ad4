"""Product-space geometry: factors, tangent projectors, geodesics, exponential maps.

A product space has two factors, each either a Euclidean space R^D or a unit
sphere S^q embedded in R^(q+1).  Points live in the concatenated ambient
coordinates, spherical block first when mixing (but any order is allowed);
every formula downstream is written in this ambient embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_NORM_TOL = 1e-12
TANGENT_TOL = 1e-10


class DimensionMismatchError(ValueError):
    """Point or vector length does not match the space's ambient dimension."""


class TangentError(ValueError):
    """Vector is not in the tangent space at the given point."""


@dataclass(frozen=True)
class Factor:
    """One factor of the product: 'euclidean' with dim D or 'sphere' with dim q."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("euclidean", "sphere"):
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("factor dimension must be a positive integer")

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1 if self.kind == "sphere" else self.dim

    @property
    def intrinsic_dim(self) -> int:
        return self.dim

    @property
    def is_sphere(self) -> bool:
        return self.kind == "sphere"


def euclidean(dim: int) -> Factor:
    return Factor("euclidean", dim)


def sphere(dim: int) -> Factor:
    return Factor("sphere", dim)


@dataclass(frozen=True)
class ProductSpace:
    """Two-factor product space with ambient/intrinsic dimension bookkeeping."""

    factor1: Factor
    factor2: Factor

    @property
    def factors(self) -> tuple[Factor, Factor]:
        return (self.factor1, self.factor2)

    @property
    def ambient_dim(self) -> int:
        return self.factor1.ambient_dim + self.factor2.ambient_dim

    @property
    def intrinsic_dim(self) -> int:
        return self.factor1.intrinsic_dim + self.factor2.intrinsic_dim

    @property
    def slices(self) -> tuple[slice, slice]:
        a1 = self.factor1.ambient_dim
        return (slice(0, a1), slice(a1, a1 + self.factor2.ambient_dim))

    @property
    def n_spheres(self) -> int:
        return sum(f.is_sphere for f in self.factors)

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s1, s2 = self.slices
        return z[..., s1], z[..., s2]

    def __str__(self) -> str:
        def tag(f: Factor) -> str:
            return f"{'s' if f.is_sphere else 'r'}{f.dim}"

        return f"{tag(self.factor1)}x{tag(self.factor2)}"


def parse_space(spec: str) -> ProductSpace:
    """Parse a space string like 's2xr1', 's1xs1', or 'r2xr1'."""
    import re

    m = re.fullmatch(r"([rs])(\d+)x([rs])(\d+)", spec.strip().lower())
    if m is None:
        raise ValueError(f"bad space spec {spec!r}; expected e.g. 's2xr1'")
    kinds = {"r": "euclidean", "s": "sphere"}
    return ProductSpace(
        Factor(kinds[m.group(1)], int(m.group(2))),
        Factor(kinds[m.group(3)], int(m.group(4))),
    )


def check_point(space: ProductSpace, z: np.ndarray, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    """Validate a point (or batch of points) against the space invariants."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != space.ambient_dim:
        raise DimensionMismatchError(
            f"point has {z.shape[-1]} coordinates, space {space} needs {space.ambient_dim}"
        )
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            norms = np.linalg.norm(z[..., sl], axis=-1)
            if not np.all(np.abs(norms - 1.0) <= tol):
                raise ValueError(
                    f"spherical block {sl} is not unit-norm within {tol:g} "
                    f"(max deviation {np.max(np.abs(norms - 1.0)):.3e})"
                )
    return z


def normalize_point(space: ProductSpace, z: np.ndarray) -> np.ndarray:
    """Renormalize every spherical block of z (or a batch) to unit norm."""
    z = np.array(z, dtype=float, copy=True)
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            norms = np.linalg.norm(z[..., sl], axis=-1, keepdims=True)
            if np.any(norms < 1e-300):
                raise ZeroDivisionError("spherical block has vanishing norm")
            z[..., sl] /= norms
    return z


def tangent_projector(space: ProductSpace, z: np.ndarray) -> np.ndarray:
    """Projection matrix onto the tangent space at z.

    Block diagonal with I - x x^T on spherical blocks and I on Euclidean
    blocks; symmetric and idempotent.
    """
    z = check_point(space, z)
    a = space.ambient_dim
    P = np.eye(a)
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            x = z[sl]
            P[sl, sl] -= np.outer(x, x)
    return P


def project_tangent(space: ProductSpace, z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply the tangent projector at z to v without forming the matrix.

    Works on batches: z and v of shape (..., ambient_dim).
    """
    out = np.array(v, dtype=float, copy=True)
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            x = z[..., sl]
            out[..., sl] -= x * np.sum(x * v[..., sl], axis=-1, keepdims=True)
    return out


def geodesic_distance(space: ProductSpace, z1: np.ndarray, z2: np.ndarray) -> float:
    """Geodesic distance sqrt(d1^2 + d2^2) of the product metric."""
    z1 = check_point(space, z1)
    z2 = check_point(space, z2)
    total = 0.0
    for f, sl in zip(space.factors, space.slices):
        if f.is_sphere:
            c = float(np.clip(np.dot(z1[sl], z2[sl]), -1.0, 1.0))
            d = np.arccos(c)
        else:
            d = float(np.linalg.norm(z1[sl] - z2[sl]))
        total += d * d
    return float(np.sqrt(total))


def geodesic_pairwise(space: ProductSpace, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise geodesic distance matrix between row-point arrays A (m,) and B (k,)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    total = np.zeros((A.shape[0], B.shape[0]))
    for f, sl in zip(space.factors, space.slices):
        Ab, Bb = A[:, sl], B[:, sl]
        if f.is_sphere:
            d = np.arccos(np.clip(Ab @ Bb.T, -1.0, 1.0))
        else:
            d = np.linalg.norm(Ab[:, None, :] - Bb[None, :, :], axis=-1)
        total += d * d
    return np.sqrt(total)


def exp_map(space: ProductSpace, z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Exponential map at z applied to a tangent vector v.

    Per factor: Euclidean blocks translate, spherical blocks follow the great
    circle cos(|v|) x + sin(|v|) v/|v|.  The product factorizes blockwise.
    """
    z = check_point(space, z)
    v = np.asarray(v, dtype=float)
    if v.shape != z.shape:
        raise DimensionMismatchError("tangent vector shape does not match point")
    out = np.empty_like(z)
    for f, sl in zip(space.factors, space.slices):
        x, vx = z[sl], v[sl]
        if f.is_sphere:
            radial = abs(float(np.dot(x, vx)))
            if radial > TANGENT_TOL:
                raise TangentError(
                    f"vector has radial component {radial:.3e} > {TANGENT_TOL:g} on block {sl}"
                )
            t = float(np.linalg.norm(vx))
            if t == 0.0:
                out[sl] = x
            else:
                out[sl] = np.cos(t) * x + np.sin(t) * (vx / t)
        else:
            out[sl] = x + vx
    return normalize_point(space, out)
