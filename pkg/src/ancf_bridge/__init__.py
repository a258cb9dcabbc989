"""Conversion between ANCF plate elements and Bezier / B-spline surfaces."""

from .basis import (
    SpanBasisValues,
    ancf_eval,
    ancf_grid,
    beam_shape,
    bernstein_row,
    bezier_eval,
    bezier_grid,
    bspline_eval,
    cox_de_boor,
    cox_de_boor_derivative,
    hermite_matrix,
    span_basis,
    span_endpoint_values,
)
from .bezier import (
    BezierSlotVector,
    DegreeReport,
    DegreeTooLowError,
    ancf_to_bezier,
    bezier_to_ancf,
    degree_elevate,
    detect_optimal_degrees,
    general_T,
    general_T_inv,
    pack_net,
)
from .bspline import (
    IllConditionedError,
    PatchScalars,
    SpanControlVector,
    ancf_to_bspline_span,
    bspline_to_ancf,
    decompose_to_bezier,
    extract_span_points,
    insert_knot,
    list_spans,
    psi_matrix,
)
from .core import (
    ANCF_SLOTS,
    SLOT_NAMES,
    AncfSurfaceElement,
    BezierSurface,
    BSplineSurface,
    ConversionMatrix,
    DomainError,
    KnotSpan,
    ValidationError,
    slot_index,
    validate,
)

__version__ = "0.1.0"
