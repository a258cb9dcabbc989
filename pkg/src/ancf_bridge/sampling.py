"""Grid sampling of any supported surface value, deviation reports, mesh export."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import ancf_grid, bezier_grid, bspline_eval
from .bspline import list_spans
from .core import AncfSurfaceElement, BezierSurface, BSplineSurface
from .io import SpanPatch


class IncompatibleInputs(ValueError):
    pass


@dataclass(frozen=True)
class Patch:
    """One polynomial piece, sampled through normalized coordinates (s, t) in [0, 1]^2.

    ``native`` maps (s, t) to the piece's own parameters (u, v for surfaces,
    x, y for ANCF elements).
    """

    label: str
    points: Callable[[np.ndarray, np.ndarray], np.ndarray]
    native: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _element_patch(el: AncfSurfaceElement, label: str) -> Patch:
    return Patch(
        label,
        lambda s, t: ancf_grid(el, s * el.a, t * el.b),
        lambda s, t: (s * el.a, t * el.b),
    )


def _span_lerp(lo, hi):
    return lambda s: lo + s * (hi - lo)


def patches_of(obj) -> list[Patch]:
    """Split a loaded surface value into its polynomial pieces."""
    if isinstance(obj, BezierSurface):
        return [Patch("bezier", lambda s, t: bezier_grid(obj, s, t), lambda s, t: (s, t))]
    if isinstance(obj, AncfSurfaceElement):
        return [_element_patch(obj, "ancf")]
    if isinstance(obj, BSplineSurface):
        out = []
        for span in list_spans(obj):
            fu = _span_lerp(obj.knots_u[span.e], obj.knots_u[span.e + 1])
            fv = _span_lerp(obj.knots_v[span.f], obj.knots_v[span.f + 1])
            out.append(Patch(
                f"span({span.e},{span.f})",
                lambda s, t, fu=fu, fv=fv, span=span: bspline_eval(obj, fu(s), fv(t), span=span),
                lambda s, t, fu=fu, fv=fv: (fu(s), fv(t)),
            ))
        return out
    if isinstance(obj, list) and all(isinstance(p, SpanPatch) for p in obj):
        out = []
        for p in obj:
            patch = _element_patch(p.element, f"span({p.span.e},{p.span.f})")
            fu, fv = _span_lerp(*p.u_range), _span_lerp(*p.v_range)
            out.append(Patch(patch.label, patch.points, lambda s, t, fu=fu, fv=fv: (fu(s), fv(t))))
        return out
    raise TypeError(f"cannot sample {type(obj).__name__}")


@dataclass(frozen=True)
class VerifyReport:
    grid: int
    max_deviation: float
    location: tuple[str, float, float]
    tolerance: float
    elapsed: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def summary(self) -> str:
        label, s, t = self.location
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict}: max deviation {self.max_deviation:.3e} (tol {self.tolerance:.1e}) "
            f"at {label} s={s:.4f} t={t:.4f}; grid {self.grid}x{self.grid}; {self.elapsed * 1e3:.1f} ms"
        )


def compare(left, right, grid: int = 21, tol: float = 1e-9) -> VerifyReport:
    """Largest pointwise distance between two surfaces sampled patch by patch."""
    start = time.perf_counter()
    lp, rp = patches_of(left), patches_of(right)
    if len(lp) != len(rp):
        raise IncompatibleInputs(f"patch counts differ: {len(lp)} vs {len(rp)}")
    s = np.linspace(0.0, 1.0, grid)
    worst, where = 0.0, (lp[0].label, 0.0, 0.0)
    for a, b in zip(lp, rp):
        dev = np.linalg.norm(a.points(s, s) - b.points(s, s), axis=-1)
        idx = np.unravel_index(np.argmax(dev), dev.shape)
        if dev[idx] > worst:
            worst, where = float(dev[idx]), (a.label, float(s[idx[0]]), float(s[idx[1]]))
    return VerifyReport(grid, worst, where, tol, time.perf_counter() - start)


def sample(obj, grid: int) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per patch: native parameter grids (U, V) and points, each shaped (grid, grid[, 3])."""
    s = np.linspace(0.0, 1.0, grid)
    out = []
    for patch in patches_of(obj):
        pu, pv = patch.native(s, s)
        U, V = np.meshgrid(pu, pv, indexing="ij")
        out.append((U, V, patch.points(s, s)))
    return out


def to_obj(samples) -> str:
    """ASCII OBJ: all vertices, then quad faces with 1-based indices."""
    verts, faces = [], []
    offset = 0
    for _, _, pts in samples:
        g, h = pts.shape[:2]
        verts.extend(pts.reshape(-1, 3))
        for i in range(g - 1):
            for j in range(h - 1):
                q = offset + i * h + j + 1
                faces.append((q, q + h, q + h + 1, q + 1))
        offset += g * h
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in (map(float, p) for p in verts)]
    lines += [f"f {a} {b} {c} {d}" for a, b, c, d in faces]
    return "\n".join(lines) + "\n"


def to_csv(samples) -> str:
    rows = ["u,v,x,y,z"]
    for U, V, pts in samples:
        for u, v, p in zip(U.ravel(), V.ravel(), pts.reshape(-1, 3)):
            rows.append(",".join(repr(float(c)) for c in (u, v, *p)))
    return "\n".join(rows) + "\n"
