"""1D interval meshes of affine elements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIRICHLET = "dirichlet"
TRACTION = "traction"
PERIODIC = "periodic"
BOUNDARY_KINDS = (DIRICHLET, TRACTION, PERIODIC)

#: face-record tags for the domain ends
LEFT_BOUNDARY = -1
RIGHT_BOUNDARY = -2


@dataclass(frozen=True)
class Mesh1D:
    element_breaks: np.ndarray
    boundary_kind: tuple[str, str]

    def __post_init__(self):
        breaks = np.asarray(self.element_breaks, dtype=float)
        object.__setattr__(self, "element_breaks", breaks)
        if breaks.ndim != 1 or breaks.size < 2:
            raise ValueError("need at least two element breaks")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("element breaks must be strictly increasing")
        kinds = tuple(self.boundary_kind)
        if len(kinds) != 2 or any(k not in BOUNDARY_KINDS for k in kinds):
            raise ValueError(f"boundary_kind must be two of {BOUNDARY_KINDS}, got {kinds}")
        if (kinds[0] == PERIODIC) != (kinds[1] == PERIODIC):
            raise ValueError("periodic tagging must apply to both ends or neither")
        object.__setattr__(self, "boundary_kind", kinds)

    @property
    def x_left(self) -> float:
        return float(self.element_breaks[0])

    @property
    def x_right(self) -> float:
        return float(self.element_breaks[-1])

    @property
    def K(self) -> int:
        return self.element_breaks.size - 1

    @property
    def periodic(self) -> bool:
        return self.boundary_kind[0] == PERIODIC

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.element_breaks)

    @property
    def jacobians(self) -> np.ndarray:
        return 0.5 * self.widths

    @property
    def faces(self) -> list[tuple[int, int]]:
        """(left element, right element) per face; boundary ends use the tags.

        Periodic meshes have K faces, face 0 joining element K-1 to element 0.
        """
        K = self.K
        if self.periodic:
            return [((f - 1) % K, f) for f in range(K)]
        recs = [(LEFT_BOUNDARY, 0)]
        recs += [(f - 1, f) for f in range(1, K)]
        recs.append((K - 1, RIGHT_BOUNDARY))
        return recs

    @property
    def face_coordinates(self) -> np.ndarray:
        return self.element_breaks[:-1] if self.periodic else self.element_breaks.copy()

    def element_centers(self) -> np.ndarray:
        b = self.element_breaks
        return 0.5 * (b[:-1] + b[1:])

    def map_points(self, r: np.ndarray) -> np.ndarray:
        """Physical coordinates (K, len(r)) of reference points ``r``."""
        b = self.element_breaks
        return b[:-1, None] + 0.5 * (np.asarray(r)[None, :] + 1.0) * self.widths[:, None]

    def bisect(self) -> "Mesh1D":
        b = self.element_breaks
        mid = 0.5 * (b[:-1] + b[1:])
        new = np.empty(2 * b.size - 1)
        new[0::2], new[1::2] = b, mid
        return Mesh1D(new, self.boundary_kind)


def uniform_mesh(x_left: float, x_right: float, K: int, boundary_kind="dirichlet") -> Mesh1D:
    """K equal elements on [x_left, x_right]; ``boundary_kind`` is one kind or a (left, right) pair."""
    if int(K) != K or K < 1:
        raise ValueError(f"element count K must be >= 1, got {K!r}")
    if not x_left < x_right:
        raise ValueError(f"inverted interval ({x_left}, {x_right})")
    if isinstance(boundary_kind, str):
        boundary_kind = (boundary_kind, boundary_kind)
    breaks = np.linspace(x_left, x_right, int(K) + 1)
    return Mesh1D(breaks, boundary_kind)


def outward_normals(mesh: Mesh1D, element: int) -> tuple[int, int]:
    if not 0 <= element < mesh.K:
        raise IndexError(f"element {element} out of range for K={mesh.K}")
    return (-1, 1)
