"""Conversion between Bezier patches of degree <= 3x3 and ANCF plate elements.

A degree (m, n) net is packed into 16 slots (:func:`pack_net`). Along each
direction the four slots hold control indices (0, 1, m, m-1): the two points
that fix the value and slope at the near edge, then the two that fix them at
the far edge. Below degree 3 some indices repeat, so some net points are used
twice. The forward map is then the Kronecker product of two 4x4 blocks, one
per direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import (
    GEOM_TOL,
    MAX_DEGREE,
    AncfSurfaceElement,
    BezierSurface,
    ConversionMatrix,
    DomainError,
    ensure_valid,
)


class DegreeTooLowError(ValueError):
    """The element cannot be represented at the requested Bezier degrees."""

    def __init__(self, degrees, residual: float, worst_slot: int):
        self.degrees = tuple(degrees)
        self.residual = residual
        self.worst_slot = worst_slot
        super().__init__(
            f"degree too low for this element: {degrees[0]}x{degrees[1]} leaves residual "
            f"{residual:.3e} (worst at nodal slot {worst_slot})"
        )


def _check_degrees(m: int, n: int) -> None:
    if not (1 <= m <= MAX_DEGREE and 1 <= n <= MAX_DEGREE):
        raise DomainError(f"Bezier degrees must be in 1..{MAX_DEGREE}, got {m}x{n}")


def slot_indices(degree: int) -> tuple[int, int, int, int]:
    """Control-point indices packed along one direction."""
    return 0, 1, degree, degree - 1


def slot_layout(m: int, n: int) -> list[tuple[int, int]]:
    """(i, j) net index held by each of the 16 packed slots."""
    _check_degrees(m, n)
    iu, iv = slot_indices(m), slot_indices(n)
    return [(iu[su], iv[sv]) for sv in range(4) for su in range(4)]


@dataclass(frozen=True)
class BezierSlotVector:
    """A Bezier net packed into the 16-slot layout used by :func:`general_T`."""

    degrees: tuple[int, int]
    slots: np.ndarray

    def to_net(self) -> np.ndarray:
        """Unpack to an (m+1, n+1, 3) net; repeated slots are averaged."""
        m, n = self.degrees
        net = np.zeros((m + 1, n + 1, 3))
        count = np.zeros((m + 1, n + 1, 1))
        for (i, j), p in zip(slot_layout(m, n), self.slots):
            net[i, j] += p
            count[i, j] += 1
        return net / count


def pack_net(surface: BezierSurface) -> BezierSlotVector:
    m, n = surface.degrees
    slots = np.array([surface.net[i, j] for i, j in slot_layout(m, n)])
    return BezierSlotVector((m, n), slots)


def _forward_block(degree: int, length: float) -> np.ndarray:
    s = degree / length
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-s, s, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, s, -s],
    ])


def _inverse_block(degree: int, length: float) -> np.ndarray:
    s = length / degree
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [1.0, s, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, -s],
    ])


def general_T(m: int, n: int, a: float = 1.0, b: float = 1.0) -> ConversionMatrix:
    """Matrix taking a packed degree (m, n) net to the ANCF nodal vector.

    Row and column ordering both have the u-direction index running fastest,
    so the matrix is ``kron(block_v, block_u)``; the two 8x8 diagonal blocks
    correspond to the y=0 and y=b edges.
    """
    _check_degrees(m, n)
    if not (a > 0 and b > 0):
        raise DomainError("element dimensions must be positive")
    T = np.kron(_forward_block(n, b), _forward_block(m, a))
    return ConversionMatrix(T, "bezier_forward", {"degrees": (m, n), "a": a, "b": b})


def general_T_inv(m: int, n: int, a: float = 1.0, b: float = 1.0) -> ConversionMatrix:
    """Closed-form inverse of :func:`general_T`."""
    _check_degrees(m, n)
    if not (a > 0 and b > 0):
        raise DomainError("element dimensions must be positive")
    T = np.kron(_inverse_block(n, b), _inverse_block(m, a))
    return ConversionMatrix(T, "bezier_inverse", {"degrees": (m, n), "a": a, "b": b})


def bezier_to_ancf(surface: BezierSurface, a: float = 1.0, b: float = 1.0) -> AncfSurfaceElement:
    """ANCF element of size a x b describing the same surface, with x = a*u, y = b*v."""
    ensure_valid(surface)
    m, n = surface.degrees
    nodes = general_T(m, n, a, b).apply(pack_net(surface).slots)
    return AncfSurfaceElement(a, b, nodes)


def _round_trip(element: AncfSurfaceElement, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    slots = general_T_inv(m, n, element.a, element.b).apply(element.nodes)
    net = BezierSlotVector((m, n), slots).to_net()
    back = bezier_to_ancf(BezierSurface(net), element.a, element.b).nodes
    return net, np.abs(back - element.nodes).max(axis=1)


def ancf_to_bezier(
    element: AncfSurfaceElement, m: int = 3, n: int = 3, tol: float = GEOM_TOL
) -> BezierSurface:
    """Bezier patch of degrees (m, n) equal to the element under x = a*u, y = b*v.

    Below 3x3 the element must satisfy the nodal dependencies implied by the
    lower degrees; otherwise :class:`DegreeTooLowError` reports the residual.
    """
    ensure_valid(element)
    _check_degrees(m, n)
    net, dev = _round_trip(element, m, n)
    if (m, n) != (3, 3) and dev.max() > tol:
        raise DegreeTooLowError((m, n), float(dev.max()), int(dev.argmax()))
    return BezierSurface(net)


def candidate_degrees() -> list[tuple[int, int]]:
    """All degree pairs, by ascending m+n with lower m first on ties."""
    return sorted(product(range(1, MAX_DEGREE + 1), repeat=2), key=lambda mn: (sum(mn), mn[0]))


@dataclass(frozen=True)
class DegreeReport:
    degrees: tuple[int, int]
    residuals: dict

    def table(self) -> list[tuple[int, int, float]]:
        return [(m, n, self.residuals[(m, n)]) for m, n in candidate_degrees()]


def detect_optimal_degrees(element: AncfSurfaceElement, tol: float = GEOM_TOL) -> DegreeReport:
    """Lowest Bezier degrees that reproduce the element within ``tol``.

    Each candidate is tested by converting to that degree and back; the
    residual is the largest nodal-coordinate deviation.
    """
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    ensure_valid(element)
    residuals = {}
    for mn in candidate_degrees():
        residuals[mn] = float(_round_trip(element, *mn)[1].max())
    best = next((mn for mn in candidate_degrees() if residuals[mn] <= tol), (3, 3))
    return DegreeReport(best, residuals)


def degree_elevate(surface: BezierSurface, dm: int = 0, dn: int = 0) -> BezierSurface:
    """Raise the degrees by (dm, dn) without changing the surface."""
    m, n = surface.degrees
    if dm < 0 or dn < 0:
        raise DomainError("degree increments must be non-negative")
    if m + dm > MAX_DEGREE or n + dn > MAX_DEGREE:
        raise DomainError(f"target degree {m + dm}x{n + dn} exceeds {MAX_DEGREE}")
    net = np.array(surface.net)
    for _ in range(dm):
        net = _elevate_axis(net, axis=0)
    for _ in range(dn):
        net = _elevate_axis(net, axis=1)
    return BezierSurface(net)


def _elevate_axis(net: np.ndarray, axis: int) -> np.ndarray:
    pts = np.moveaxis(net, axis, 0)
    p = pts.shape[0] - 1
    out = np.empty((p + 2,) + pts.shape[1:])
    out[0], out[-1] = pts[0], pts[-1]
    for i in range(1, p + 1):
        t = i / (p + 1)
        out[i] = t * pts[i - 1] + (1 - t) * pts[i]
    return np.moveaxis(out, 0, axis)
