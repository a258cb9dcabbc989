"""Value types shared by every conversion: surfaces, ANCF elements, matrices.

All types are frozen dataclasses holding read-only numpy arrays, so values can
be shared freely. Constructors only coerce shapes and dtypes; invariant checks
live in :func:`validate` so that malformed inputs can still be inspected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

GEOM_TOL = 1e-9
MATRIX_TOL = 1e-12
MAX_DEGREE = 3

# Nodal slot order of the ANCF element. Each entry is
# (corner_u, corner_v, du, dv): corner 0 is the near edge (x=0 / y=0), corner 1
# the far edge (x=a / y=b); du, dv are derivative orders w.r.t. x and y.
ANCF_SLOTS: tuple[tuple[int, int, int, int], ...] = (
    (0, 0, 0, 0), (0, 0, 1, 0), (1, 0, 0, 0), (1, 0, 1, 0),
    (0, 0, 0, 1), (0, 0, 1, 1), (1, 0, 0, 1), (1, 0, 1, 1),
    (0, 1, 0, 0), (0, 1, 1, 0), (1, 1, 0, 0), (1, 1, 1, 0),
    (0, 1, 0, 1), (0, 1, 1, 1), (1, 1, 0, 1), (1, 1, 1, 1),
)

SLOT_NAMES: tuple[str, ...] = tuple(
    "r{}{}^{}{}".format("0a"[cu], "0b"[cv], du, dv) for cu, cv, du, dv in ANCF_SLOTS
)

_CORNER_CODES = {"00": (0, 0), "a0": (1, 0), "0b": (0, 1), "ab": (1, 1)}


def hermite_row(corner: int, order: int) -> int:
    """Position of (corner, derivative order) in the 1D Hermite ordering.

    The 1D ordering is (value at 0, slope at 0, value at end, slope at end),
    matching the four beam functions.
    """
    return 2 * corner + order


def slot_index(corner_u: int, corner_v: int, du: int, dv: int) -> int:
    """Index of a nodal coordinate inside the 16-slot ANCF vector."""
    return 4 * hermite_row(corner_v, dv) + hermite_row(corner_u, du)


class ValidationError(ValueError):
    """Raised when an operation receives a value that breaks its invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(ValueError):
    """Raised for parameters outside the domain of a function."""


def _frozen(values: Any, shape_tail: tuple[int, ...] = ()) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if shape_tail and arr.shape[-len(shape_tail):] != shape_tail:
        raise ValueError(f"expected trailing shape {shape_tail}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BezierSurface:
    """Tensor-product Bezier patch over the unit square.

    ``net[i, j]`` is the control point b_ij, ``i`` running along u.
    """

    net: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "net", _frozen(self.net, (3,)))
        if self.net.ndim != 3:
            raise ValueError(f"control net must be a 2D grid of 3D points, got shape {self.net.shape}")

    @property
    def degrees(self) -> tuple[int, int]:
        return self.net.shape[0] - 1, self.net.shape[1] - 1

    @property
    def degree_u(self) -> int:
        return self.net.shape[0] - 1

    @property
    def degree_v(self) -> int:
        return self.net.shape[1] - 1


@dataclass(frozen=True)
class BSplineSurface:
    """Non-rational tensor-product B-spline surface.

    ``net`` has shape (m+1, n+1, 3); ``knots_u`` must hold m+k+2 values and
    ``knots_v`` n+l+2 values.
    """

    degree_u: int
    degree_v: int
    knots_u: np.ndarray
    knots_v: np.ndarray
    net: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "degree_u", int(self.degree_u))
        object.__setattr__(self, "degree_v", int(self.degree_v))
        object.__setattr__(self, "knots_u", _frozen(self.knots_u))
        object.__setattr__(self, "knots_v", _frozen(self.knots_v))
        object.__setattr__(self, "net", _frozen(self.net, (3,)))
        if self.net.ndim != 3:
            raise ValueError(f"control net must be a 2D grid of 3D points, got shape {self.net.shape}")

    @property
    def degrees(self) -> tuple[int, int]:
        return self.degree_u, self.degree_v

    @property
    def domain_u(self) -> tuple[float, float]:
        return float(self.knots_u[self.degree_u]), float(self.knots_u[self.net.shape[0]])

    @property
    def domain_v(self) -> tuple[float, float]:
        return float(self.knots_v[self.degree_v]), float(self.knots_v[self.net.shape[1]])


@dataclass(frozen=True)
class AncfSurfaceElement:
    """Bicubic ANCF plate element of size a x b.

    ``nodes`` holds the 16 nodal coordinates in the order of :data:`ANCF_SLOTS`.
    Use :meth:`node` instead of raw indexing.
    """

    a: float
    b: float
    nodes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "nodes", _frozen(self.nodes, (3,)))
        if self.nodes.ndim != 2:
            raise ValueError(f"nodes must be a list of 3D points, got shape {self.nodes.shape}")

    def node(self, corner: str, du: int = 0, dv: int = 0) -> np.ndarray:
        """Nodal coordinate at ``corner`` ('00', 'a0', '0b', 'ab') with the given derivative orders."""
        cu, cv = _CORNER_CODES[corner]
        return self.nodes[slot_index(cu, cv, du, dv)]

    def named_nodes(self) -> Iterator[tuple[str, np.ndarray]]:
        yield from zip(SLOT_NAMES, self.nodes)


@dataclass(frozen=True)
class KnotSpan:
    """Indices (e, f) of the knot intervals [u_e, u_e+1) x [v_f, v_f+1)."""

    e: int
    f: int


@dataclass(frozen=True)
class ConversionMatrix:
    """16x16 scalar map between a packed control vector and the ANCF nodal vector.

    Applied to each coordinate column independently.
    """

    entries: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    KINDS = ("bezier_forward", "bezier_inverse", "bspline_forward", "bspline_inverse")

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")

    def __matmul__(self, other):
        if isinstance(other, ConversionMatrix):
            return self.entries @ other.entries
        return self.entries @ np.asarray(other)

    def apply(self, slots: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(slots, dtype=float)

    def condition(self) -> float:
        return float(np.linalg.cond(self.entries))


def _finite_violations(arr: np.ndarray, path: str) -> list[str]:
    bad = np.argwhere(~np.isfinite(arr))
    return [f"{path}[{', '.join(str(int(k)) for k in idx)}] is not finite" for idx in bad[:5]]


def _degree_violations(degree: int, name: str) -> list[str]:
    if not 1 <= degree <= MAX_DEGREE:
        return [f"{name} must be in 1..{MAX_DEGREE}, got {degree}"]
    return []


def _knot_violations(knots: np.ndarray, degree: int, n_ctrl: int, name: str) -> list[str]:
    out = []
    if knots.ndim != 1:
        return [f"{name} must be a flat list"]
    expected = n_ctrl + degree + 1
    if knots.size != expected:
        out.append(f"{name} has {knots.size} values, expected {expected} for {n_ctrl} control points of degree {degree}")
    out += _finite_violations(knots, name)
    if np.any(np.diff(knots) < 0):
        out.append(f"{name} not non-decreasing")
    elif knots.size:
        _, counts = np.unique(knots, return_counts=True)
        if counts.max() > degree + 1:
            out.append(f"{name} has a knot of multiplicity {counts.max()} > degree+1")
        if knots.size == expected and not knots[degree] < knots[n_ctrl]:
            out.append(f"{name} has an empty parameter range")
    return out


def validate(obj) -> list[str]:
    """Return every invariant violation of a domain value; empty list means ok."""
    if isinstance(obj, BezierSurface):
        m, n = obj.degrees
        return (
            _degree_violations(m, "degree_u")
            + _degree_violations(n, "degree_v")
            + _finite_violations(obj.net, "net")
        )
    if isinstance(obj, BSplineSurface):
        k, l = obj.degrees
        out = _degree_violations(k, "degree_u") + _degree_violations(l, "degree_v")
        if out:
            return out + _finite_violations(obj.net, "net")
        out += _knot_violations(obj.knots_u, k, obj.net.shape[0], "knots_u")
        out += _knot_violations(obj.knots_v, l, obj.net.shape[1], "knots_v")
        return out + _finite_violations(obj.net, "net")
    if isinstance(obj, AncfSurfaceElement):
        out = []
        if not obj.a > 0:
            out.append("a must be positive")
        if not obj.b > 0:
            out.append("b must be positive")
        if obj.nodes.shape[0] != 16:
            out.append(f"nodes must have exactly 16 slots, got {obj.nodes.shape[0]}")
        return out + _finite_violations(obj.nodes, "nodes")
    if isinstance(obj, ConversionMatrix):
        out = []
        if obj.entries.shape != (16, 16):
            return [f"entries must be 16x16, got {obj.entries.shape}"]
        out += _finite_violations(obj.entries, "entries")
        if out:
            return out
        if not abs(np.linalg.det(obj.entries)) > 0:
            out.append("matrix is singular")
        if obj.kind.startswith("bezier"):
            if np.any(obj.entries[:8, 8:]) or np.any(obj.entries[8:, :8]):
                out.append("bezier matrix has entries outside its two 8x8 diagonal blocks")
        return out
    if isinstance(obj, KnotSpan):
        return [] if obj.e >= 0 and obj.f >= 0 else ["span indices must be non-negative"]
    return [f"cannot validate object of type {type(obj).__name__}"]


def span_violations(surface: BSplineSurface, span: KnotSpan) -> list[str]:
    """Violations of ``span`` with respect to a particular surface."""
    out = []
    for name, knots, idx, deg, n_ctrl in (
        ("e", surface.knots_u, span.e, surface.degree_u, surface.net.shape[0]),
        ("f", surface.knots_v, span.f, surface.degree_v, surface.net.shape[1]),
    ):
        if not deg <= idx < n_ctrl:
            out.append(f"span index {name}={idx} outside {deg}..{n_ctrl - 1}")
        elif not knots[idx] < knots[idx + 1]:
            out.append(f"span index {name}={idx} is a zero-length interval")
    return out


def ensure_valid(obj) -> None:
    violations = validate(obj)
    if violations:
        raise ValidationError(violations)
