import math

import numpy as np
import pytest

from fmnet.fmm import (
    Box,
    PointCharge,
    Expansion,
    eval_direct_arrays,
    evaluate_local,
    evaluate_multipole,
    expansion_order,
    fundamental_solution,
    l2l,
    m2l,
    m2m,
    p2m,
)


def raw_direct(charges, targets):
    """Summed-kernel field (the quantity the expansions represent)."""
    phi, grad = eval_direct_arrays(charges, targets)
    return -phi, -grad


class TestFundamentalSolution:
    def test_log_one_is_zero(self):
        assert fundamental_solution(1.0) == 0.0

    def test_log_e(self):
        assert fundamental_solution(math.e) == pytest.approx(1.0 / (2 * math.pi))

    def test_half(self):
        # closed form: -ln 2 / (2 pi)
        expected = -math.log(2.0) / (2 * math.pi)
        assert fundamental_solution(0.5) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(-0.110318, abs=1e-6)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fundamental_solution(0.0)
        with pytest.raises(ValueError):
            fundamental_solution(-2.0)

    def test_vectorized(self):
        r = np.array([1.0, math.e])
        out = fundamental_solution(r)
        assert out == pytest.approx([0.0, 1.0 / (2 * math.pi)])


class TestExpansionOrder:
    @pytest.mark.parametrize(
        "eps,expected", [(1e-3, 10), (1e-6, 20), (1e-9, 30), (0.1, 4), (0.5, 3)]
    )
    def test_order(self, eps, expected):
        assert expansion_order(eps) == expected

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            expansion_order(0.0)
        with pytest.raises(ValueError):
            expansion_order(1.5)


class TestP2M:
    def test_monopole_at_center(self):
        e = p2m([PointCharge(np.zeros(2), 1.0)], np.zeros(2), 8)
        assert e.coeffs[0] == 1.0
        assert np.all(e.coeffs[1:] == 0.0)

    def test_dipole_cancellation(self):
        charges = [PointCharge([0.1, 0.0], 1.0), PointCharge([-0.1, 0.0], -1.0)]
        e = p2m(charges, np.zeros(2), 8)
        assert e.coeffs[0] == 0.0
        assert e.coeffs[1] != 0.0

    def test_empty_list_gives_zero_expansion(self):
        e = p2m([], np.zeros(2), 5)
        assert np.all(e.coeffs == 0.0)

    def test_total_charge_is_sum_of_strengths(self):
        rng = np.random.default_rng(1)
        charges = [PointCharge(rng.uniform(-0.1, 0.1, 2), s) for s in rng.uniform(-2, 2, 15)]
        e = p2m(charges, np.zeros(2), 12)
        assert e.coeffs[0].real == pytest.approx(sum(c.strength for c in charges), abs=1e-14)

    def test_far_field_matches_direct(self):
        rng = np.random.default_rng(9)
        pos = rng.uniform(-0.1, 0.1, (10, 2))
        charges = [PointCharge(pos[i], s) for i, s in enumerate(rng.uniform(-1, 1, 10))]
        radius = float(np.hypot(pos[:, 0], pos[:, 1]).max())
        p = expansion_order(1e-9)
        e = p2m(charges, np.zeros(2), p)
        theta = rng.uniform(0, 2 * math.pi, 30)
        targets = 5 * radius * np.column_stack([np.cos(theta), np.sin(theta)])
        phi_e, grad_e = evaluate_multipole(e, targets)
        phi_d, grad_d = raw_direct(charges, targets)
        scale = np.abs(phi_d).max()
        assert np.abs(phi_e - phi_d).max() <= 1e-9 * scale
        assert np.abs(grad_e - grad_d).max() <= 1e-9 * max(scale, np.abs(grad_d).max())


class TestTranslations:
    def test_m2m_preserves_monopole(self):
        coeffs = np.zeros(9, dtype=complex)
        coeffs[0] = 2.5
        e = Expansion(np.zeros(2), 8, coeffs)
        shifted = m2m(e, np.array([0.3, -0.4]))
        assert shifted.coeffs[0] == 2.5
        assert np.any(shifted.coeffs[1:] != 0.0)  # shifted monopole gains higher terms

    def test_m2m_chain_preserves_total_charge(self):
        rng = np.random.default_rng(4)
        charges = [PointCharge(rng.uniform(-0.05, 0.05, 2), s) for s in rng.uniform(-1, 1, 8)]
        e = p2m(charges, np.zeros(2), 10)
        for center in ([0.1, 0.0], [0.3, 0.2], [0.7, 0.6]):
            e = m2m(e, np.array(center))
        assert e.coeffs[0].real == pytest.approx(sum(c.strength for c in charges), abs=1e-13)

    def test_l2l_of_zero_is_zero(self):
        e = Expansion(np.zeros(2), 6, np.zeros(7, dtype=complex))
        shifted = l2l(e, np.array([0.2, 0.1]))
        assert np.all(shifted.coeffs == 0.0)

    def test_l2l_is_exact_for_polynomials(self):
        rng = np.random.default_rng(8)
        coeffs = rng.normal(size=7) + 1j * rng.normal(size=7)
        e = Expansion(np.zeros(2), 6, coeffs)
        moved = l2l(e, np.array([0.05, -0.03]))
        pts = rng.uniform(-0.02, 0.02, (20, 2))
        phi_a, grad_a = evaluate_local(e, pts)
        phi_b, grad_b = evaluate_local(moved, pts)
        np.testing.assert_allclose(phi_b, phi_a, atol=1e-13)
        np.testing.assert_allclose(grad_b, grad_a, atol=1e-12)

    def test_m2l_rejects_non_separated_boxes(self):
        root = Box(np.zeros(2), 1.0)
        a, b = root.child(0), root.child(3)  # touching diagonal quadrants
        e = p2m([PointCharge(a.center, 1.0)], a.center, 6)
        with pytest.raises(ValueError, match="well separated"):
            m2l(e, b.center, source_box=a, target_box=b)

    def test_full_translation_chain_matches_direct(self):
        # well-separated source/target parent boxes, as the interaction
        # lists would pair them
        rng = np.random.default_rng(21)
        src_child = np.array([-0.875, -0.875])
        src_parent = np.array([-0.75, -0.75])
        tgt_parent = np.array([0.75, 0.75])
        tgt_child = np.array([0.875, 0.875])

        pos = src_child + rng.uniform(-0.125, 0.125, (100, 2))
        charges = [PointCharge(pos[i], s) for i, s in enumerate(rng.uniform(-1, 1, 100))]
        p = expansion_order(1e-9)

        e = p2m(charges, src_child, p)
        e = m2m(e, src_parent)
        loc = m2l(e, tgt_parent)
        loc = l2l(loc, tgt_child)

        targets = tgt_child + rng.uniform(-0.125, 0.125, (50, 2))
        phi_e, grad_e = evaluate_local(loc, targets)
        phi_d, grad_d = raw_direct(charges, targets)
        scale = np.abs(phi_d).max()
        assert np.abs(phi_e - phi_d).max() <= 1e-9 * scale
        assert np.abs(grad_e - grad_d).max() <= 1e-9 * np.abs(grad_d).max()
