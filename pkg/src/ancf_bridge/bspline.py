"""Per-span conversion between B-spline surfaces and ANCF elements.

Each non-empty knot span [u_e, u_e+1] x [v_f, v_f+1] becomes one element. The
ANCF nodal values at the span corners are linear in the (k+1) x (l+1) window of
control points d[e-k..e, f-l..f]; that map is the 16x16 matrix built by
:func:`psi_matrix` from closed-form basis values at the span ends.

The window is packed into 16 slots with the v-index running fastest. For
degree 3 the window fills the four slots of a direction as is. Below degree 3
the slots are padded: the first two slots hold the points that act at the
span start, the last two those that act at the span end. That gives indices
(0, 1, 1, 2) for degree 2 and (0, 1, 0, 1) for degree 1.

Knot insertion (:func:`insert_knot`, :func:`decompose_to_bezier`) gives an
independent route through composite Bezier patches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .basis import find_span, span_endpoint_values
from .bezier import DegreeTooLowError
from .core import (
    GEOM_TOL,
    AncfSurfaceElement,
    BezierSurface,
    BSplineSurface,
    ConversionMatrix,
    DomainError,
    KnotSpan,
    ValidationError,
    ensure_valid,
    span_violations,
)

LengthRule = Union[None, float, Callable[[float], float]]

MAX_CONDITION = 1e12


class IllConditionedError(ValueError):
    """The conversion matrix of a span is numerically singular."""

    def __init__(self, condition: float):
        self.condition = condition
        super().__init__(f"ill-conditioned knot configuration (condition estimate {condition:.3e})")


def window_padding(degree: int) -> tuple[int, int, int, int]:
    """Window index stored in each of the four slots along one direction."""
    return {3: (0, 1, 2, 3), 2: (0, 1, 1, 2), 1: (0, 1, 0, 1)}[degree]


@dataclass(frozen=True)
class SpanControlVector:
    """Control points of one span window packed into 16 slots (v fastest)."""

    degrees: tuple[int, int]
    slots: np.ndarray

    @classmethod
    def from_window(cls, window: np.ndarray) -> "SpanControlVector":
        k, l = window.shape[0] - 1, window.shape[1] - 1
        pu, pv = window_padding(k), window_padding(l)
        slots = np.array([window[pu[su], pv[sv]] for su in range(4) for sv in range(4)])
        return cls((k, l), slots)

    def window(self) -> np.ndarray:
        """(k+1, l+1, 3) window; repeated slots are averaged."""
        k, l = self.degrees
        pu, pv = window_padding(k), window_padding(l)
        out = np.zeros((k + 1, l + 1, 3))
        count = np.zeros((k + 1, l + 1, 1))
        for su in range(4):
            for sv in range(4):
                out[pu[su], pv[sv]] += self.slots[4 * su + sv]
                count[pu[su], pv[sv]] += 1
        return out / count


@dataclass(frozen=True)
class PatchScalars:
    """Chain-rule factors from span parameters to element coordinates."""

    nu: float
    zeta: float

    @classmethod
    def for_span(cls, knots_u, knots_v, span: KnotSpan, a: float, b: float) -> "PatchScalars":
        if not (a > 0 and b > 0):
            raise DomainError("element dimensions must be positive")
        return cls((knots_u[span.e + 1] - knots_u[span.e]) / a, (knots_v[span.f + 1] - knots_v[span.f]) / b)


def list_spans(surface: BSplineSurface) -> list[KnotSpan]:
    """All non-empty knot spans inside the valid parameter range, lexicographic."""
    ensure_valid(surface)
    (k, l), (nu, nv) = surface.degrees, surface.net.shape[:2]
    es = [e for e in range(k, nu) if surface.knots_u[e] < surface.knots_u[e + 1]]
    fs = [f for f in range(l, nv) if surface.knots_v[f] < surface.knots_v[f + 1]]
    return [KnotSpan(e, f) for e in es for f in fs]


def span_window(surface: BSplineSurface, span: KnotSpan) -> np.ndarray:
    k, l = surface.degrees
    if span.e - k < 0 or span.f - l < 0 or span.e >= surface.net.shape[0] or span.f >= surface.net.shape[1]:
        raise IndexError(f"window of span ({span.e}, {span.f}) exceeds the control net")
    return surface.net[span.e - k: span.e + 1, span.f - l: span.f + 1]


def extract_span_points(surface: BSplineSurface, span: KnotSpan) -> SpanControlVector:
    return SpanControlVector.from_window(span_window(surface, span))


def _direction_block(knots, index: int, degree: int, scale: float) -> np.ndarray:
    """4x4 map from padded slots of one direction to (value, slope) at both span ends."""
    ends = span_endpoint_values(knots, index, degree)
    rows = [ends.at_left, scale * ends.d_at_left, ends.at_right, scale * ends.d_at_right]
    pad = window_padding(degree)
    block = np.zeros((4, 4))
    for r, vec in enumerate(rows):
        allowed = range(4) if degree == 3 else ((0, 1) if r < 2 else (2, 3))
        for s in allowed:
            block[r, s] = vec[pad[s]]
    return block


def psi_matrix(
    knots_u, knots_v, span: KnotSpan, degrees: tuple[int, int], a: float, b: float
) -> ConversionMatrix:
    """Matrix taking a :class:`SpanControlVector` to the ANCF nodal vector.

    Rows follow the ANCF slot order; each entry is a product of one u-factor
    and one v-factor (end value or nu/zeta-scaled end slope).
    """
    k, l = degrees
    knots_u = np.asarray(knots_u, dtype=float)
    knots_v = np.asarray(knots_v, dtype=float)
    scal = PatchScalars.for_span(knots_u, knots_v, span, a, b)
    bu = _direction_block(knots_u, span.e, k, scal.nu)
    bv = _direction_block(knots_v, span.f, l, scal.zeta)
    # [row_v, row_u, slot_u, slot_v] -> row 4*row_v + row_u, column 4*slot_u + slot_v
    psi = np.einsum("rs,qt->qrst", bu, bv).reshape(16, 16)
    meta = {"span": (span.e, span.f), "degrees": (k, l), "a": a, "b": b, "nu": scal.nu, "zeta": scal.zeta}
    return ConversionMatrix(psi, "bspline_forward", meta)


def _resolve_length(rule: LengthRule, span_length: float) -> float:
    if rule is None:
        return span_length
    if callable(rule):
        return float(rule(span_length))
    return float(rule)


def span_dimensions(surface: BSplineSurface, span: KnotSpan, a_rule: LengthRule = None, b_rule: LengthRule = None):
    du = surface.knots_u[span.e + 1] - surface.knots_u[span.e]
    dv = surface.knots_v[span.f + 1] - surface.knots_v[span.f]
    return _resolve_length(a_rule, du), _resolve_length(b_rule, dv)


def span_to_ancf(surface: BSplineSurface, span: KnotSpan, a: float, b: float) -> AncfSurfaceElement:
    problems = span_violations(surface, span)
    if problems:
        raise ValidationError(problems)
    psi = psi_matrix(surface.knots_u, surface.knots_v, span, surface.degrees, a, b)
    return AncfSurfaceElement(a, b, psi.apply(extract_span_points(surface, span).slots))


def bspline_to_ancf(
    surface: BSplineSurface, a_rule: LengthRule = None, b_rule: LengthRule = None
) -> list[tuple[KnotSpan, AncfSurfaceElement]]:
    """One ANCF element per non-empty span.

    ``a_rule``/``b_rule`` choose the element size: ``None`` uses the span
    length (so nodal slopes equal parametric derivatives), a number fixes it,
    a callable maps span length to element size.
    """
    out = []
    for span in list_spans(surface):
        a, b = span_dimensions(surface, span, a_rule, b_rule)
        out.append((span, span_to_ancf(surface, span, a, b)))
    return out


def ancf_to_bspline_span(
    element: AncfSurfaceElement,
    knots_u,
    knots_v,
    span: KnotSpan,
    degrees: tuple[int, int] = (3, 3),
    tol: float = GEOM_TOL,
) -> SpanControlVector:
    """Control window of one span reproducing the element (inverse of :func:`psi_matrix`)."""
    ensure_valid(element)
    psi = psi_matrix(knots_u, knots_v, span, degrees, element.a, element.b)
    cond = psi.condition()
    if not cond < MAX_CONDITION:
        raise IllConditionedError(cond)
    slots = np.linalg.solve(psi.entries, element.nodes)
    vec = SpanControlVector.from_window(SpanControlVector(tuple(degrees), slots).window())
    dev = np.abs(psi.apply(vec.slots) - element.nodes).max(axis=1)
    if tuple(degrees) != (3, 3) and dev.max() > tol:
        raise DegreeTooLowError(degrees, float(dev.max()), int(dev.argmax()))
    return vec


# ---------------------------------------------------------------------------
# Knot insertion route

def _insert_curve(knots: np.ndarray, degree: int, pts: np.ndarray, value: float):
    """Boehm single knot insertion on control points along axis 0."""
    n_ctrl = pts.shape[0]
    r = find_span(knots, degree, n_ctrl, value)
    new = np.empty((n_ctrl + 1,) + pts.shape[1:])
    new[: r - degree + 1] = pts[: r - degree + 1]
    for i in range(r - degree + 1, r + 1):
        alpha = (value - knots[i]) / (knots[i + degree] - knots[i])
        new[i] = alpha * pts[i] + (1 - alpha) * pts[i - 1]
    new[r + 1:] = pts[r:]
    return np.insert(knots, r + 1, value), new


def insert_knot(surface: BSplineSurface, direction: str, value: float) -> BSplineSurface:
    """Insert ``value`` once into the u or v knot vector without changing the surface.

    ``value`` must lie in the valid parameter range (end values included, for
    unclamped knot vectors) and its multiplicity may not exceed degree+1.
    """
    ensure_valid(surface)
    if direction not in ("u", "v"):
        raise DomainError("direction must be 'u' or 'v'")
    axis = 0 if direction == "u" else 1
    knots = surface.knots_u if axis == 0 else surface.knots_v
    degree = surface.degrees[axis]
    lo, hi = (surface.domain_u if axis == 0 else surface.domain_v)
    if not lo <= value <= hi:
        raise DomainError(f"knot {value} outside the parameter range [{lo}, {hi}]")
    if np.count_nonzero(knots == value) + 1 > degree + 1:
        raise DomainError(f"inserting {value} would exceed multiplicity {degree + 1}")
    pts = np.moveaxis(surface.net, axis, 0)
    new_knots, new_pts = _insert_curve(np.array(knots), degree, pts, value)
    net = np.moveaxis(new_pts, 0, axis)
    if axis == 0:
        return BSplineSurface(surface.degree_u, surface.degree_v, new_knots, surface.knots_v, net)
    return BSplineSurface(surface.degree_u, surface.degree_v, surface.knots_u, new_knots, net)


def _saturate(surface: BSplineSurface, direction: str) -> BSplineSurface:
    axis = 0 if direction == "u" else 1
    degree = surface.degrees[axis]
    lo, hi = surface.domain_u if axis == 0 else surface.domain_v
    knots = surface.knots_u if axis == 0 else surface.knots_v
    for value in np.unique(knots[(knots >= lo) & (knots <= hi)]):
        knots = surface.knots_u if axis == 0 else surface.knots_v
        for _ in range(degree - np.count_nonzero(knots == value)):
            surface = insert_knot(surface, direction, float(value))
    return surface


def decompose_to_bezier(surface: BSplineSurface) -> list[tuple[KnotSpan, BezierSurface]]:
    """Split into one Bezier patch per span by repeated knot insertion.

    The returned spans index the input surface's knot vectors.
    """
    spans = list_spans(surface)
    refined = _saturate(_saturate(surface, "u"), "v")
    k, l = refined.degrees
    patches = [BezierSurface(span_window(refined, s)) for s in list_spans(refined)]
    if len(patches) != len(spans):
        raise ValidationError([f"decomposition produced {len(patches)} patches for {len(spans)} spans"])
    return list(zip(spans, patches))
