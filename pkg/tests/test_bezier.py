from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ancf_bridge import (
    AncfSurfaceElement,
    BezierSurface,
    DegreeTooLowError,
    DomainError,
    ancf_eval,
    ancf_grid,
    ancf_to_bezier,
    bezier_eval,
    bezier_grid,
    bezier_to_ancf,
    degree_elevate,
    detect_optimal_degrees,
    general_T,
    general_T_inv,
    pack_net,
)
from ancf_bridge.bezier import BezierSlotVector, candidate_degrees, slot_indices, slot_layout
from conftest import random_bezier

DEGREES = list(product((1, 2, 3), repeat=2))


def _published_blocks(a, b):
    """The two 8x8 blocks of the bicubic transformation, entered by hand.

    Row 7 of the first block is printed with b/3 where every other
    v-derivative row uses 3/b; the latter is what reproduces the surface.
    """
    p, q, r = 3 / a, 3 / b, 9 / (a * b)
    A = np.array([
        [1, 0, 0, 0, 0, 0, 0, 0],
        [-p, p, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, p, -p, 0, 0, 0, 0],
        [-q, 0, 0, 0, q, 0, 0, 0],
        [r, -r, 0, 0, -r, r, 0, 0],
        [0, 0, -q, 0, 0, 0, q, 0],
        [0, 0, -r, r, 0, 0, r, -r],
    ])
    B = np.array([
        [1, 0, 0, 0, 0, 0, 0, 0],
        [-p, p, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, p, -p, 0, 0, 0, 0],
        [q, 0, 0, 0, -q, 0, 0, 0],
        [-r, r, 0, 0, r, -r, 0, 0],
        [0, 0, q, 0, 0, 0, -q, 0],
        [0, 0, r, -r, 0, 0, -r, r],
    ])
    return A, B


def _published_inverse_blocks(a, b):
    p, q, r = a / 3, b / 3, a * b / 9
    Ai = np.array([
        [1, 0, 0, 0, 0, 0, 0, 0],
        [1, p, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 1, -p, 0, 0, 0, 0],
        [1, 0, 0, 0, q, 0, 0, 0],
        [1, p, 0, 0, q, r, 0, 0],
        [0, 0, 1, 0, 0, 0, q, 0],
        [0, 0, 1, -p, 0, 0, q, -r],
    ])
    Bi = np.array([
        [1, 0, 0, 0, 0, 0, 0, 0],
        [1, p, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 1, -p, 0, 0, 0, 0],
        [1, 0, 0, 0, -q, 0, 0, 0],
        [1, p, 0, 0, -q, -r, 0, 0],
        [0, 0, 1, 0, 0, 0, -q, 0],
        [0, 0, 1, -p, 0, 0, -q, r],
    ])
    return Ai, Bi


class TestTransformationMatrix:
    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.5, 0.4), (0.1, 10.0)])
    def test_bicubic_blocks_match_published_entries(self, a, b):
        T = general_T(3, 3, a, b).entries
        A, B = _published_blocks(a, b)
        np.testing.assert_allclose(T[:8, :8], A, atol=1e-12)
        np.testing.assert_allclose(T[8:, 8:], B, atol=1e-12)

    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.5, 0.4)])
    def test_bicubic_inverse_blocks_match_published_entries(self, a, b):
        Ti = general_T_inv(3, 3, a, b).entries
        Ai, Bi = _published_inverse_blocks(a, b)
        np.testing.assert_allclose(Ti[:8, :8], Ai, atol=1e-12)
        np.testing.assert_allclose(Ti[8:, 8:], Bi, atol=1e-12)

    def test_packed_order_of_bicubic_net(self):
        # first block: b00 b10 b30 b20 b01 b11 b31 b21, second: the j=3 and j=2 rows
        assert slot_layout(3, 3) == [
            (0, 0), (1, 0), (3, 0), (2, 0), (0, 1), (1, 1), (3, 1), (2, 1),
            (0, 3), (1, 3), (3, 3), (2, 3), (0, 2), (1, 2), (3, 2), (2, 2),
        ]

    def test_layout_for_3x2_repeats_rows(self):
        # the j=1 row fills both the near-edge and far-edge slope slots
        layout = slot_layout(3, 2)
        assert layout[4:8] == [(0, 1), (1, 1), (3, 1), (2, 1)]
        assert layout[12:16] == layout[4:8]
        assert layout[8:12] == [(0, 2), (1, 2), (3, 2), (2, 2)]

    def test_first_u_gradient_row(self, rng):
        s = random_bezier(rng, 3, 3)
        el = bezier_to_ancf(s)
        np.testing.assert_allclose(el.node("00", 1, 0), 3 * (s.net[1, 0] - s.net[0, 0]), atol=1e-12)

    def test_inner_control_point_from_nodes(self, rng):
        a, b = 1.7, 0.6
        s = random_bezier(rng, 3, 3)
        el = bezier_to_ancf(s, a, b)
        recon = el.node("00") + a / 3 * el.node("00", 1, 0) + b / 3 * el.node("00", 0, 1) + a * b / 9 * el.node("00", 1, 1)
        np.testing.assert_allclose(recon, s.net[1, 1], atol=1e-12)

    @pytest.mark.parametrize("m,n", DEGREES)
    def test_inverse_products(self, m, n):
        a, b = 0.37, 4.2
        T, Ti = general_T(m, n, a, b), general_T_inv(m, n, a, b)
        np.testing.assert_allclose(T @ Ti, np.eye(16), atol=1e-12)
        np.testing.assert_allclose(Ti @ T, np.eye(16), atol=1e-12)
        np.testing.assert_allclose(Ti.entries, np.linalg.inv(T.entries), atol=1e-10)

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            general_T(4, 3)
        with pytest.raises(DomainError):
            general_T(3, 3, 0.0, 1.0)


def test_padding_layout_is_forced_by_the_edge_conditions():
    """Re-derive the per-direction slot indices by brute force.

    For a degree-p curve on [0, L] the four Hermite quantities are the value
    and slope at each end. Among all 4-tuples of control indices, the one that
    lets a fixed 4x4 block (1, -p/L, p/L pattern) produce those quantities for
    every net is the layout used for packing.
    """
    L = 1.3
    for p in (1, 2, 3):
        rng = np.random.default_rng(p)
        pts = rng.normal(size=(p + 1,))
        want = [pts[0], p / L * (pts[1] - pts[0]), pts[p], p / L * (pts[p] - pts[p - 1])]
        s = p / L
        block = np.array([[1, 0, 0, 0], [-s, s, 0, 0], [0, 0, 1, 0], [0, 0, s, -s]])
        hits = [
            idx for idx in product(range(p + 1), repeat=4)
            if np.allclose(block @ pts[list(idx)], want, atol=1e-12)
        ]
        assert hits == [slot_indices(p)]


class TestConversion:
    @pytest.mark.parametrize("m,n", DEGREES)
    def test_invariance(self, rng, m, n):
        g = np.linspace(0, 1, 21)
        for _ in range(5):
            s = random_bezier(rng, m, n)
            a, b = rng.uniform(0.1, 10, 2)
            el = bezier_to_ancf(s, a, b)
            np.testing.assert_allclose(ancf_grid(el, a * g, b * g), bezier_grid(s, g, g), atol=1e-9)

    @pytest.mark.parametrize("m,n", DEGREES)
    def test_net_round_trip(self, rng, m, n):
        s = random_bezier(rng, m, n)
        back = ancf_to_bezier(bezier_to_ancf(s, 2.0, 0.5), m, n)
        np.testing.assert_allclose(back.net, s.net, atol=1e-9)

    def test_element_round_trip(self, rng):
        el = AncfSurfaceElement(1.4, 3.3, rng.uniform(-10, 10, (16, 3)))
        back = bezier_to_ancf(ancf_to_bezier(el), el.a, el.b)
        np.testing.assert_allclose(back.nodes, el.nodes, atol=1e-9)

    def test_pack_unpack(self, rng):
        for m, n in DEGREES:
            s = random_bezier(rng, m, n)
            np.testing.assert_array_equal(pack_net(s).to_net(), s.net)

    def test_unpack_averages_duplicates(self):
        slots = np.zeros((16, 3))
        slots[4] = 1.0  # (0, 1) in the near-edge copy
        slots[12] = 3.0  # (0, 1) in the far-edge copy
        net = BezierSlotVector((3, 2), slots).to_net()
        np.testing.assert_array_equal(net[0, 1], [2.0, 2.0, 2.0])

    def test_flat_plane_stays_planar(self, rng):
        # control points on z = 0.3x - 0.2y + 1 give an element whose every sample is on that plane
        xy = rng.uniform(-5, 5, (4, 4, 2))
        net = np.concatenate([xy, (0.3 * xy[..., :1] - 0.2 * xy[..., 1:] + 1)], axis=-1)
        el = bezier_to_ancf(BezierSurface(net), 2.0, 3.0)
        pts = ancf_grid(el, np.linspace(0, 2, 9), np.linspace(0, 3, 9))
        np.testing.assert_allclose(pts[..., 2], 0.3 * pts[..., 0] - 0.2 * pts[..., 1] + 1, atol=1e-12)
        assert np.abs(el.nodes[[1, 3, 4, 6, 8 + 1, 8 + 4], 2]).max() > 0


def _dependency_residuals(el):
    """The four nodal relations of an element converted from a degree (3, 2) net.

    The last relation is printed with r_00^01 in place of r_a0^10; the
    corrected form mirrors the third relation at the x = a corner.
    """
    b = el.b
    r = el.node
    return [
        r("0b", 0, 1) - (2 / b * r("0b") - 2 / b * r("00") - r("00", 0, 1)),
        r("ab", 0, 1) - (2 / b * r("ab") - 2 / b * r("a0") - r("a0", 0, 1)),
        r("0b", 1, 1) - (2 / b * r("0b", 1, 0) - 2 / b * r("00", 1, 0) - r("00", 1, 1)),
        r("ab", 1, 1) - (2 / b * r("ab", 1, 0) - 2 / b * r("a0", 1, 0) - r("a0", 1, 1)),
    ]


class TestDependencies:
    def test_relations_hold_for_3x2_nets(self, rng):
        for _ in range(20):
            a, b = rng.uniform(0.1, 10, 2)
            el = bezier_to_ancf(random_bezier(rng, 3, 2), a, b)
            for res in _dependency_residuals(el):
                assert np.abs(res).max() <= 1e-12 * max(1.0, np.abs(el.nodes).max())

    def test_printed_fourth_relation_fails(self, rng):
        el = bezier_to_ancf(random_bezier(rng, 3, 2), 1.0, 2.0)
        r, b = el.node, el.b
        printed = r("ab", 1, 1) - (2 / b * r("ab", 1, 0) - 2 / b * r("00", 0, 1) - r("a0", 1, 1))
        assert np.abs(printed).max() > 1e-3

    def test_detect_3x2(self, rng):
        for _ in range(20):
            el = bezier_to_ancf(random_bezier(rng, 3, 2), *rng.uniform(0.1, 10, 2))
            assert detect_optimal_degrees(el).degrees == (3, 2)

    def test_detect_generic(self, rng):
        el = AncfSurfaceElement(1.0, 1.0, rng.uniform(-10, 10, (16, 3)))
        report = detect_optimal_degrees(el)
        assert report.degrees == (3, 3)
        assert report.residuals[(3, 3)] < 1e-12

    @pytest.mark.parametrize("m,n", DEGREES)
    def test_detect_each_pair(self, rng, m, n):
        el = bezier_to_ancf(random_bezier(rng, m, n), 0.8, 1.9)
        assert detect_optimal_degrees(el).degrees == (m, n)

    def test_candidate_order(self):
        assert candidate_degrees() == [(1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1), (2, 3), (3, 2), (3, 3)]

    def test_too_low(self, rng):
        el = AncfSurfaceElement(1.0, 1.0, rng.uniform(-10, 10, (16, 3)))
        with pytest.raises(DegreeTooLowError) as info:
            ancf_to_bezier(el, 3, 2)
        assert info.value.degrees == (3, 2)
        assert info.value.residual > 1e-9
        assert 0 <= info.value.worst_slot < 16

    def test_reduced_net_reproduces_element(self, rng):
        s = random_bezier(rng, 3, 2)
        el = bezier_to_ancf(s, 1.5, 0.5)
        reduced = ancf_to_bezier(el, 3, 2)
        np.testing.assert_allclose(reduced.net, s.net, atol=1e-9)

    def test_bilinear_detected(self):
        net = np.array([[[0, 0, 0], [0, 1, 0.5]], [[1, 0, 0.2], [1, 1, 2.0]]])
        assert detect_optimal_degrees(bezier_to_ancf(BezierSurface(net), 3.0, 3.0)).degrees == (1, 1)


class TestElevation:
    def test_corners_fixed(self, rng):
        s = random_bezier(rng, 1, 2)
        e = degree_elevate(s, 2, 1)
        assert e.degrees == (3, 3)
        for i, j in ((0, 0), (-1, 0), (0, -1), (-1, -1)):
            np.testing.assert_allclose(e.net[i, j], s.net[i, j], atol=1e-15)

    @pytest.mark.parametrize("m,n", DEGREES)
    def test_same_surface(self, rng, m, n):
        s = random_bezier(rng, m, n)
        e = degree_elevate(s, 3 - m, 3 - n)
        g = np.linspace(0, 1, 13)
        np.testing.assert_allclose(bezier_grid(e, g, g), bezier_grid(s, g, g), atol=1e-12)

    def test_elevated_and_direct_elements_agree(self, rng):
        s = random_bezier(rng, 3, 2)
        direct = bezier_to_ancf(s, 1.2, 0.7)
        lifted = bezier_to_ancf(degree_elevate(s, 0, 1), 1.2, 0.7)
        np.testing.assert_allclose(lifted.nodes, direct.nodes, atol=1e-12)

    def test_limits(self, rng):
        with pytest.raises(DomainError):
            degree_elevate(random_bezier(rng, 3, 1), 1, 0)
        with pytest.raises(DomainError):
            degree_elevate(random_bezier(rng, 2, 1), -1, 0)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(DEGREES),
    st.floats(0.1, 10),
    st.floats(0.1, 10),
    st.floats(0, 1),
    st.floats(0, 1),
    st.integers(0, 2**32 - 1),
)
def test_pointwise_invariance(mn, a, b, u, v, seed):
    s = random_bezier(np.random.default_rng(seed), *mn)
    el = bezier_to_ancf(s, a, b)
    np.testing.assert_allclose(ancf_eval(el, a * u, b * v), bezier_eval(s, u, v), atol=1e-9)


def test_symbolic_polynomial_identity():
    """Compare the two surfaces coefficient by coefficient with exact arithmetic."""
    sp = pytest.importorskip("sympy")
    u, v, a, b = sp.symbols("u v a b", positive=True)
    x, y = a * u, b * v
    m, n = 3, 2
    ctrl = sp.Matrix(m + 1, n + 1, lambda i, j: sp.Symbol(f"p{i}{j}"))

    def bern(p, i, t):
        return sp.binomial(p, i) * t**i * (1 - t) ** (p - i)

    bez = sum(ctrl[i, j] * bern(m, i, u) * bern(n, j, v) for i in range(m + 1) for j in range(n + 1))

    def fwd(p, L):
        s = sp.Integer(p) / L
        return sp.Matrix([[1, 0, 0, 0], [-s, s, 0, 0], [0, 0, 1, 0], [0, 0, s, -s]])

    T = sp.kronecker_product(fwd(n, b), fwd(m, a))
    packed = sp.Matrix([ctrl[i, j] for i, j in slot_layout(m, n)])
    nodes = T * packed

    def beam(t, L):
        w = t / L
        return [1 - 3 * w**2 + 2 * w**3, L * (w - 2 * w**2 + w**3), 3 * w**2 - 2 * w**3, L * (w**3 - w**2)]

    sx, sy = beam(x, a), beam(y, b)
    ancf = sum(nodes[4 * j + i] * sx[i] * sy[j] for i in range(4) for j in range(4))
    assert sp.expand(sp.simplify(ancf - bez)) == 0

    # numeric agreement of the symbolic matrix with the library
    num = np.array(T.subs({a: 1.3, b: 0.7}), dtype=float)
    np.testing.assert_allclose(num, general_T(m, n, 1.3, 0.7).entries, atol=1e-14)
