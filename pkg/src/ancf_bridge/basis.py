"""Basis functions: Bernstein, ANCF beam functions, B-spline bases.

Two independent B-spline routes live here. :func:`cox_de_boor` is the plain
recursion and serves as the reference; :func:`span_basis` and
:func:`span_endpoint_values` are the closed-form per-span expressions used to
assemble conversion matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .core import (
    MAX_DEGREE,
    AncfSurfaceElement,
    BezierSurface,
    BSplineSurface,
    DomainError,
)

_PARAM_SLACK = 1e-12


def _check_degree(m: int) -> None:
    if not 1 <= m <= MAX_DEGREE:
        raise DomainError(f"degree must be in 1..{MAX_DEGREE}, got {m}")


def _check_unit(u, name="u"):
    u = np.asarray(u, dtype=float)
    if np.any(u < -_PARAM_SLACK) or np.any(u > 1 + _PARAM_SLACK) or not np.all(np.isfinite(u)):
        raise DomainError(f"{name} outside [0, 1]")
    return np.clip(u, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Bernstein / Bezier

def bernstein_row(m: int, u) -> np.ndarray:
    """Bernstein polynomials [B_0,m(u), ..., B_m,m(u)].

    ``u`` may be an array; the basis index is the last axis of the result.
    """
    _check_degree(m)
    u = _check_unit(u)[..., None]
    i = np.arange(m + 1)
    coeffs = np.array([comb(m, k) for k in i], dtype=float)
    return coeffs * u**i * (1.0 - u) ** (m - i)


def bernstein_derivative_row(m: int, u) -> np.ndarray:
    """First derivatives of the Bernstein polynomials with respect to u."""
    _check_degree(m)
    u = _check_unit(u)
    lower = np.zeros(np.shape(u) + (m + 1,))
    if m == 0:
        return lower
    lower[..., :m] = bernstein_row(m - 1, u) if m > 1 else 1.0
    out = np.zeros_like(lower)
    out[..., 1:] += m * lower[..., :m]
    out[..., :m] -= m * lower[..., :m]
    return out


def hermite_matrix(m: int) -> np.ndarray:
    """Lower-triangular matrix M with [1, u, ..., u^m] @ M == bernstein_row(m, u)."""
    _check_degree(m)
    M = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        for j in range(i + 1):
            M[i, j] = (-1) ** (i + j) * comb(m, i) * comb(i, j)
    return M


def bezier_eval(surface: BezierSurface, u, v) -> np.ndarray:
    """Point(s) on a Bezier patch; ``u`` and ``v`` broadcast against each other."""
    m, n = surface.degrees
    bu = bernstein_row(m, u)
    bv = bernstein_row(n, v)
    bu, bv = np.broadcast_arrays(bu[..., :, None], bv[..., None, :])
    return np.einsum("...ij,ijc->...c", bu * bv, surface.net)


def bezier_grid(surface: BezierSurface, us, vs) -> np.ndarray:
    """Evaluate on the tensor grid ``us x vs``; result has shape (len(us), len(vs), 3)."""
    m, n = surface.degrees
    return np.einsum("gi,hj,ijc->ghc", bernstein_row(m, us), bernstein_row(n, vs), surface.net)


# ---------------------------------------------------------------------------
# ANCF beam functions

def beam_shape(index: int, w, length: float, derivative: int = 0):
    """Cubic Hermite beam function s_index(w, length) or its first derivative in w.

    s1, s3 interpolate values at w=0 and w=length; s2, s4 interpolate slopes.
    """
    if not length > 0:
        raise DomainError("beam length must be positive")
    if index not in (1, 2, 3, 4):
        raise DomainError(f"beam function index must be 1..4, got {index}")
    lam = np.asarray(w, dtype=float) / length
    if derivative == 0:
        return {
            1: lambda t: 1 - 3 * t**2 + 2 * t**3,
            2: lambda t: length * (t - 2 * t**2 + t**3),
            3: lambda t: 3 * t**2 - 2 * t**3,
            4: lambda t: length * (t**3 - t**2),
        }[index](lam)
    if derivative == 1:
        return {
            1: lambda t: (-6 * t + 6 * t**2) / length,
            2: lambda t: 1 - 4 * t + 3 * t**2,
            3: lambda t: (6 * t - 6 * t**2) / length,
            4: lambda t: 3 * t**2 - 2 * t,
        }[index](lam)
    raise DomainError("only value and first derivative of beam functions are supported")


def beam_row(w, length: float, derivative: int = 0) -> np.ndarray:
    """The four beam functions stacked along a trailing axis."""
    return np.stack([beam_shape(i, w, length, derivative) for i in (1, 2, 3, 4)], axis=-1)


def _check_range(x, upper: float, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    slack = _PARAM_SLACK * max(1.0, upper)
    if np.any(x < -slack) or np.any(x > upper + slack) or not np.all(np.isfinite(x)):
        raise DomainError(f"{name} outside [0, {upper}]")
    return x


def _node_grid(element: AncfSurfaceElement) -> np.ndarray:
    # slot = 4 * row_v + row_u, so reshaping gives [row_v, row_u, xyz]
    return element.nodes.reshape(4, 4, 3)


def ancf_eval(element: AncfSurfaceElement, x, y, dx: int = 0, dy: int = 0) -> np.ndarray:
    """Position r(x, y) of the element (or a first/mixed derivative when dx/dy = 1)."""
    x = _check_range(x, element.a, "x")
    y = _check_range(y, element.b, "y")
    sx = beam_row(x, element.a, dx)
    sy = beam_row(y, element.b, dy)
    sx, sy = np.broadcast_arrays(sx[..., None, :], sy[..., :, None])
    return np.einsum("...ji,jic->...c", sx * sy, _node_grid(element))


def ancf_grid(element: AncfSurfaceElement, xs, ys, dx: int = 0, dy: int = 0) -> np.ndarray:
    """Evaluate on the tensor grid ``xs x ys``; shape (len(xs), len(ys), 3)."""
    xs = _check_range(xs, element.a, "x")
    ys = _check_range(ys, element.b, "y")
    return np.einsum(
        "gi,hj,jic->ghc", beam_row(xs, element.a, dx), beam_row(ys, element.b, dy), _node_grid(element)
    )


# ---------------------------------------------------------------------------
# B-spline bases: recursive reference

def _ratio(num, den):
    # 0/0 := 0 convention of the recursion; a zero denominator only occurs with a zero basis
    if den == 0:
        return np.zeros_like(num)
    return num / den


def cox_de_boor(knots, i: int, degree: int, u, span: int | None = None):
    """B-spline basis B_{i,degree}(u) by the Cox-de Boor recursion.

    Without ``span`` the degree-0 functions are half-open indicators, with the
    last non-empty interval closed on the right. With ``span`` the degree-0
    function of that interval is taken as identically one, which yields the
    polynomial piece of B_{i,degree} on that span, extended to all u.
    """
    knots = np.asarray(knots, dtype=float)
    if degree < 0 or i < 0 or i + degree + 1 >= knots.size:
        raise DomainError(f"basis index {i} of degree {degree} out of range for {knots.size} knots")
    u = np.asarray(u, dtype=float)
    if degree == 0:
        if span is not None:
            return np.full(u.shape, 1.0 if i == span else 0.0)
        lo, hi = knots[i], knots[i + 1]
        inside = (lo <= u) & (u < hi)
        if lo < hi and hi == knots[-1]:
            inside |= u == hi
        return inside.astype(float)
    left = _ratio(u - knots[i], knots[i + degree] - knots[i]) * cox_de_boor(knots, i, degree - 1, u, span)
    right = _ratio(knots[i + degree + 1] - u, knots[i + degree + 1] - knots[i + 1]) * cox_de_boor(
        knots, i + 1, degree - 1, u, span
    )
    return left + right


def cox_de_boor_derivative(knots, i: int, degree: int, u, span: int | None = None):
    """First derivative of :func:`cox_de_boor` from the standard difference formula."""
    knots = np.asarray(knots, dtype=float)
    if degree == 0:
        return np.zeros(np.shape(u))
    a = _ratio(np.array(float(degree)), knots[i + degree] - knots[i])
    b = _ratio(np.array(float(degree)), knots[i + degree + 1] - knots[i + 1])
    return a * cox_de_boor(knots, i, degree - 1, u, span) - b * cox_de_boor(knots, i + 1, degree - 1, u, span)


def find_span(knots, degree: int, n_ctrl: int, u: float) -> int:
    """Index e with knots[e] <= u < knots[e+1] inside the valid range (last span closed)."""
    knots = np.asarray(knots, dtype=float)
    lo, hi = knots[degree], knots[n_ctrl]
    if u < lo - _PARAM_SLACK or u > hi + _PARAM_SLACK:
        raise DomainError(f"parameter {u} outside [{lo}, {hi}]")
    if u >= hi:
        e = n_ctrl - 1
        while knots[e] == knots[e + 1]:
            e -= 1
        return e
    e = int(np.searchsorted(knots, u, side="right")) - 1
    return max(e, degree)


def bspline_eval(surface: BSplineSurface, u, v, span=None) -> np.ndarray:
    """Evaluate a B-spline surface with the recursive bases.

    ``u`` and ``v`` are 1D arrays giving a tensor grid; the result has shape
    (len(u), len(v), 3). When ``span`` is given, the polynomial piece of that
    span is evaluated (useful at knots of full multiplicity).
    """
    k, l = surface.degrees
    us = np.atleast_1d(np.asarray(u, dtype=float))
    vs = np.atleast_1d(np.asarray(v, dtype=float))
    se = sf = None
    if span is not None:
        se, sf = span.e, span.f
    nu, nv = surface.net.shape[:2]
    bu = np.stack([cox_de_boor(surface.knots_u, i, k, us, se) for i in range(nu)], axis=-1)
    bv = np.stack([cox_de_boor(surface.knots_v, j, l, vs, sf) for j in range(nv)], axis=-1)
    return np.einsum("gi,hj,ijc->ghc", bu, bv, surface.net)


# ---------------------------------------------------------------------------
# B-spline bases: closed-form per-span expressions

class _SpanKnots:
    """F, G, H quantities for the span starting at knot index ``alpha``."""

    def __init__(self, knots, alpha: int, degree: int):
        knots = np.asarray(knots, dtype=float)
        if not 0 <= alpha < knots.size - 1:
            raise DomainError(f"span index {alpha} out of range")
        if alpha - degree + 1 < 0 or alpha + degree >= knots.size:
            raise DomainError(f"span {alpha} lacks the neighbour knots needed for degree {degree}")
        if not knots[alpha] < knots[alpha + 1]:
            raise DomainError(f"span {alpha} has zero length")
        self.knots = knots
        self.alpha = alpha

    def H(self, beta: int, gamma: int) -> float:
        return self.knots[self.alpha + beta] - self.knots[self.alpha + gamma]

    def F(self, beta: int, lam):
        return self.knots[self.alpha + beta] - lam

    def G(self, gamma: int, lam):
        return lam - self.knots[self.alpha + gamma]


def span_basis(knots, span_index: int, degree: int, lam) -> np.ndarray:
    """The degree+1 non-zero B-spline bases on one span, in closed form.

    Returns values of B_{alpha-degree}, ..., B_alpha (alpha = span_index) along
    the last axis. ``lam`` may lie anywhere; the span polynomial is evaluated.
    """
    _check_degree(degree)
    s = _SpanKnots(knots, span_index, degree)
    lam = np.asarray(lam, dtype=float)
    H, F, G = s.H, s.F, s.G
    if degree == 1:
        vals = [F(1, lam) / H(1, 0), G(0, lam) / H(1, 0)]
    elif degree == 2:
        vals = [
            F(1, lam) ** 2 / (H(1, -1) * H(1, 0)),
            F(1, lam) * G(-1, lam) / (H(1, 0) * H(1, -1)) + F(2, lam) * G(0, lam) / (H(2, 0) * H(1, 0)),
            G(0, lam) ** 2 / (H(2, 0) * H(1, 0)),
        ]
    else:
        f1, f2, f3 = F(1, lam), F(2, lam), F(3, lam)
        g0, gm1, gm2 = G(0, lam), G(-1, lam), G(-2, lam)
        vals = [
            f1**3 / (H(1, -2) * H(1, -1) * H(1, 0)),
            f1**2 * gm2 / (H(1, -2) * H(1, -1) * H(1, 0))
            + f1 * f2 * gm1 / (H(2, -1) * H(1, -1) * H(1, 0))
            + f2**2 * g0 / (H(2, -1) * H(2, 0) * H(1, 0)),
            f1 * gm1**2 / (H(2, -1) * H(1, -1) * H(1, 0))
            + f2 * g0 * gm1 / (H(2, -1) * H(2, 0) * H(1, 0))
            + f3 * g0**2 / (H(3, 0) * H(2, 0) * H(1, 0)),
            g0**3 / (H(3, 0) * H(2, 0) * H(1, 0)),
        ]
    return np.stack(np.broadcast_arrays(*vals), axis=-1)


@dataclass(frozen=True)
class SpanBasisValues:
    """Values and slopes of the span bases at the two ends of a span.

    Every array has length degree+1 and is aligned with the span window
    B_{alpha-degree}, ..., B_alpha. The basis that vanishes at an end is stored
    as an explicit zero value; its slope is zero too except for degree 1.
    """

    degree: int
    at_left: np.ndarray
    at_right: np.ndarray
    d_at_left: np.ndarray
    d_at_right: np.ndarray


def span_endpoint_values(knots, span_index: int, degree: int) -> SpanBasisValues:
    """Closed-form basis values/slopes at u_alpha and u_alpha+1 for one span."""
    _check_degree(degree)
    s = _SpanKnots(knots, span_index, degree)
    H = s.H
    if degree == 1:
        h = H(1, 0)
        left, right = [1.0, 0.0], [0.0, 1.0]
        d_left = d_right = [-1.0 / h, 1.0 / h]
    elif degree == 2:
        left = [H(1, 0) / H(1, -1), H(0, -1) / H(1, -1), 0.0]
        d_left = [-2.0 / H(1, -1), 2.0 / H(1, -1), 0.0]
        right = [0.0, H(2, 1) / H(2, 0), H(1, 0) / H(2, 0)]
        d_right = [0.0, -2.0 / H(2, 0), 2.0 / H(2, 0)]
    else:
        left = [
            H(1, 0) ** 2 / (H(1, -2) * H(1, -1)),
            H(0, -2) * H(1, 0) / (H(1, -2) * H(1, -1)) + H(0, -1) * H(2, 0) / (H(2, -1) * H(1, -1)),
            H(0, -1) ** 2 / (H(2, -1) * H(1, -1)),
            0.0,
        ]
        d_left = [
            -3 * H(1, 0) / (H(1, -2) * H(1, -1)),
            (H(1, 0) - 2 * H(0, -2)) / (H(1, -2) * H(1, -1)) + (H(-1, 0) + 2 * H(2, 0)) / (H(2, -1) * H(1, -1)),
            3 * H(0, -1) / (H(2, -1) * H(1, -1)),
            0.0,
        ]
        right = [
            0.0,
            H(2, 1) ** 2 / (H(2, -1) * H(2, 0)),
            H(1, -1) * H(2, 1) / (H(2, -1) * H(2, 0)) + H(3, 1) * H(1, 0) / (H(3, 0) * H(2, 0)),
            H(1, 0) ** 2 / (H(3, 0) * H(2, 0)),
        ]
        d_right = [
            0.0,
            -3 * H(2, 1) / (H(2, -1) * H(2, 0)),
            (H(2, 1) - 2 * H(1, -1)) / (H(2, -1) * H(2, 0)) + (2 * H(3, 1) - H(1, 0)) / (H(3, 0) * H(2, 0)),
            3 * H(1, 0) / (H(3, 0) * H(2, 0)),
        ]
    return SpanBasisValues(
        degree=degree,
        at_left=np.array(left),
        at_right=np.array(right),
        d_at_left=np.array(d_left),
        d_at_right=np.array(d_right),
    )
