"""Set-to-set error measures between point clouds.

Point sets carry their own metric: geodesic on a product space, or plain
Euclidean distance in whatever ambient space the points live in (used for all
curve/surface comparisons after embedding into R^3).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ProductSpace, geodesic_pairwise


@dataclass(frozen=True)
class PointSet:
    """Nonempty point cloud with an attached metric.

    space=None means ambient Euclidean distance; otherwise distances are
    geodesic on the given product space.
    """

    points: np.ndarray
    space: Optional[ProductSpace] = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("point set must be nonempty")
        object.__setattr__(self, "points", pts)


def _cross_distances(A: PointSet, B: PointSet) -> np.ndarray:
    if (A.space is None) != (B.space is None) or A.space != B.space:
        raise ValueError("point sets carry different metrics")
    if A.space is not None:
        return geodesic_pairwise(A.space, A.points, B.points)
    return np.linalg.norm(A.points[:, None, :] - B.points[None, :, :], axis=-1)


def hausdorff_distance(A: PointSet, B: PointSet) -> float:
    """max of the two directed sup-nearest-neighbor distances."""
    D = _cross_distances(A, B)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def manifold_recovering_error(estimate: PointSet, truth_sample: PointSet) -> float:
    """Symmetric average of mean nearest-neighbor distances.

    Half the sum of (mean distance from estimate points to the truth sample)
    and (mean distance from truth points to the estimate), so both inaccuracy
    and incomplete coverage are penalized.
    """
    D = _cross_distances(estimate, truth_sample)
    return float(0.5 * (D.min(axis=1).mean() + D.min(axis=0).mean()))


def radial_embedding(points: np.ndarray) -> np.ndarray:
    """Map (unit vector, radius) rows on S^(k-2) x R to R^(k-1) via r * u.

    The standard Cartesian comparison space for sphere-times-radius data,
    e.g. (x1, x2, x3, r) -> r * (x1, x2, x3).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts[:, :-1] * pts[:, -1:]
