"""JSON surface files.

Every document has a ``type`` field:

* ``bezier_surface``: ``degree_u``, ``degree_v``, ``control_points`` (nested
  [i][j] -> [x, y, z], i along u)
* ``bspline_surface``: as above plus ``knots_u`` and ``knots_v`` (flat, with
  repeats)
* ``ancf_patch``: ``a``, ``b``, ``nodes`` (16 x [x, y, z] in nodal slot order)
* ``ancf_patch_list``: ``patches``, each an ancf_patch payload plus
  ``span`` [e, f], ``u_range`` and ``v_range``

Floats go through ``json`` unchanged, so every double round-trips exactly.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    AncfSurfaceElement,
    BezierSurface,
    BSplineSurface,
    KnotSpan,
    ValidationError,
    ensure_valid,
)

FILE_TYPES = ("bezier_surface", "bspline_surface", "ancf_patch", "ancf_patch_list")


@dataclass(frozen=True)
class SpanPatch:
    """An ANCF element tied to a span of a B-spline parameter domain."""

    element: AncfSurfaceElement
    span: KnotSpan
    u_range: tuple[float, float]
    v_range: tuple[float, float]


def _points(values, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError([f"{name}: {exc}"]) from None
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise ValidationError([f"{name} must contain [x, y, z] triples"])
    return arr


def _field(doc: dict, key: str, ctx: str):
    if key not in doc:
        raise ValidationError([f"{ctx}: missing field {key!r}"])
    return doc[key]


def _element(doc: dict, ctx: str) -> AncfSurfaceElement:
    nodes = _points(_field(doc, "nodes", ctx), f"{ctx}.nodes")
    if nodes.ndim != 2:
        raise ValidationError([f"{ctx}.nodes must be a list of 16 points"])
    el = AncfSurfaceElement(float(_field(doc, "a", ctx)), float(_field(doc, "b", ctx)), nodes)
    ensure_valid(el)
    return el


def from_dict(doc: dict):
    """Build a domain value from a parsed document; raises ValidationError."""
    if not isinstance(doc, dict):
        raise ValidationError(["document must be a JSON object"])
    kind = doc.get("type")
    if kind not in FILE_TYPES:
        raise ValidationError([f"unknown type {kind!r}; expected one of {', '.join(FILE_TYPES)}"])
    if kind == "bezier_surface":
        net = _points(_field(doc, "control_points", kind), "control_points")
        if net.ndim != 3:
            raise ValidationError(["control_points must be a 2D grid of points"])
        surface = BezierSurface(net)
        declared = (doc.get("degree_u", surface.degree_u), doc.get("degree_v", surface.degree_v))
        if tuple(declared) != surface.degrees:
            raise ValidationError([f"declared degrees {tuple(declared)} do not match net shape"])
        ensure_valid(surface)
        return surface
    if kind == "bspline_surface":
        net = _points(_field(doc, "control_points", kind), "control_points")
        if net.ndim != 3:
            raise ValidationError(["control_points must be a 2D grid of points"])
        surface = BSplineSurface(
            int(_field(doc, "degree_u", kind)),
            int(_field(doc, "degree_v", kind)),
            np.array(_field(doc, "knots_u", kind), dtype=float),
            np.array(_field(doc, "knots_v", kind), dtype=float),
            net,
        )
        ensure_valid(surface)
        return surface
    if kind == "ancf_patch":
        return _element(doc, kind)
    patches = []
    entries = _field(doc, "patches", kind)
    if not isinstance(entries, list):
        raise ValidationError(["patches must be a list"])
    for idx, p in enumerate(entries):
        ctx = f"patches[{idx}]"
        if not isinstance(p, dict):
            raise ValidationError([f"{ctx} must be an object"])
        e, f = _field(p, "span", ctx)
        u_range = tuple(float(x) for x in _field(p, "u_range", ctx))
        v_range = tuple(float(x) for x in _field(p, "v_range", ctx))
        if not (len(u_range) == 2 and u_range[0] < u_range[1] and len(v_range) == 2 and v_range[0] < v_range[1]):
            raise ValidationError([f"{ctx}: u_range/v_range must be increasing pairs"])
        patches.append(SpanPatch(_element(p, ctx), KnotSpan(int(e), int(f)), u_range, v_range))
    if not patches:
        raise ValidationError(["ancf_patch_list has no patches"])
    return patches


def _element_dict(el: AncfSurfaceElement) -> dict:
    return {"a": el.a, "b": el.b, "nodes": el.nodes.tolist()}


def to_dict(obj) -> dict:
    if isinstance(obj, BezierSurface):
        return {
            "type": "bezier_surface",
            "degree_u": obj.degree_u,
            "degree_v": obj.degree_v,
            "control_points": obj.net.tolist(),
        }
    if isinstance(obj, BSplineSurface):
        return {
            "type": "bspline_surface",
            "degree_u": obj.degree_u,
            "degree_v": obj.degree_v,
            "knots_u": obj.knots_u.tolist(),
            "knots_v": obj.knots_v.tolist(),
            "control_points": obj.net.tolist(),
        }
    if isinstance(obj, AncfSurfaceElement):
        return {"type": "ancf_patch", **_element_dict(obj)}
    if isinstance(obj, list) and all(isinstance(p, SpanPatch) for p in obj):
        return {
            "type": "ancf_patch_list",
            "patches": [
                {
                    "span": [p.span.e, p.span.f],
                    "u_range": list(p.u_range),
                    "v_range": list(p.v_range),
                    **_element_dict(p.element),
                }
                for p in obj
            ],
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


_NUM = r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_FLAT = re.compile(rf"\[\s*({_NUM}(?:,\s*{_NUM})*)\s*\]")


def dumps(obj) -> str:
    """Indented JSON with flat number lists (points, knots, ranges) kept on one line."""
    text = json.dumps(to_dict(obj), indent=2)
    return _FLAT.sub(lambda m: "[" + ", ".join(re.split(r",\s*", m.group(1))) + "]", text) + "\n"


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"invalid JSON: {exc}"]) from None
    return from_dict(doc)


def load(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError([f"cannot read {path}: {exc.strerror}"]) from None
    return loads(text)


def write_text_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the result the usual umask-based mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(obj, path) -> None:
    write_text_atomic(path, dumps(obj))
