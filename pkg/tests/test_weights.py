"""Muckenhoupt constants and the weight-algebra identity checks."""

import math

import numpy as np
import pytest

from varleb import (ArityMismatchError, Box, DyadicCubeSet, ExponentField,
                    Grid, QuadrupleSpec, RangeError, SpecMismatchError,
                    WeightField, ap_constant, ap_constant_density,
                    blend_constant_check, componentwise_characterize,
                    containment_check, density_from_weight, multilinear_constant,
                    two_to_one_check, weight_from_density)

from _support import UNIT, SYM, rand_weight

GRID = Grid(UNIT, (1025,))
CUBES = DyadicCubeSet(UNIT, 3)

# an even node count keeps the singularity of |x|^a off the lattice
SGRID = Grid(SYM, (2048,))
SCUBES = DyadicCubeSet(SYM, 3)


def const_p(value, box=UNIT):
    return ExponentField.constant(box, value)


def abs_power_weight(grid, exponent):
    return WeightField(grid, np.abs(grid.coords[..., 0]) ** exponent)


# -- apConstant ---------------------------------------------------------


def test_ap_constant_unit_weight():
    rep = ap_constant(WeightField.ones(GRID), const_p(2.0), CUBES)
    assert rep.constant == pytest.approx(1.0, abs=1e-9)
    assert rep.cube_count == CUBES.count()


def test_ap_constant_scalar_weight_cancels():
    w = WeightField(GRID, np.full(GRID.shape, 37.5))
    rep = ap_constant(w, const_p(3.0), CUBES)
    assert rep.constant == pytest.approx(1.0, abs=1e-9)


def test_ap_constant_power_weight_depth_stable():
    w = abs_power_weight(SGRID, 0.25)
    c6 = ap_constant(w, const_p(2.0, SYM), DyadicCubeSet(SYM, 6)).constant
    c7 = ap_constant(w, const_p(2.0, SYM), DyadicCubeSet(SYM, 7)).constant
    assert math.isfinite(c6) and c6 > 1.0
    assert c7 >= c6 - 1e-12          # deeper scan never loses cubes
    assert c7 <= c6 * 1.02


def test_ap_constant_per_cube_floor_constant_exponent():
    rng = np.random.default_rng(21)
    w = rand_weight(GRID, rng)
    rep = ap_constant(w, const_p(2.5), CUBES)
    assert min(rep.per_cube) >= 1.0 - 1e-9
    assert rep.constant == pytest.approx(max(rep.per_cube))


def test_ap_constant_dilation_invariance():
    rng = np.random.default_rng(22)
    w = rand_weight(GRID, rng)
    p = const_p(2.0)
    base = ap_constant(w, p, CUBES).constant
    scaled = ap_constant(w * 5.0, p, CUBES).constant
    assert scaled == pytest.approx(base, rel=1e-10)


def test_ap_constant_monotone_in_cube_set():
    rng = np.random.default_rng(23)
    w = rand_weight(GRID, rng)
    p = ExponentField.affine(UNIT, 2.0, (0.5,))
    shallow = ap_constant(w, p, DyadicCubeSet(UNIT, 2)).constant
    deep = ap_constant(w, p, DyadicCubeSet(UNIT, 4)).constant
    assert deep >= shallow - 1e-12


def test_ap_constant_density_convention_matches():
    rng = np.random.default_rng(24)
    w = rand_weight(GRID, rng)
    p = const_p(2.0)
    u = density_from_weight(w, p)
    assert np.allclose(weight_from_density(u, p).values, w.values)
    sym = ap_constant(w, p, CUBES)
    dens = ap_constant_density(u, p, CUBES)
    assert dens.constant == pytest.approx(sym.constant, rel=1e-12)
    assert dens.convention == "nonsymmetric-density"


# -- multilinear constant ------------------------------------------------


def test_multilinear_all_ones_cancels():
    spec = QuadrupleSpec((const_p(4.0), const_p(4.0)), const_p(2.0),
                         (1.0, 1.0), math.inf)
    ones = WeightField.ones(GRID)
    rep = multilinear_constant((ones, ones), spec, CUBES)
    assert rep.constant == pytest.approx(1.0, abs=1e-9)


def test_multilinear_reduces_to_ap_constant():
    rng = np.random.default_rng(31)
    for _ in range(20):
        w = rand_weight(GRID, rng)
        p = const_p(float(rng.uniform(1.5, 4.0)))
        spec = QuadrupleSpec((p,), p, (1.0,), math.inf)
        two_index = multilinear_constant((w,), spec, CUBES)
        classical = ap_constant(w, p, CUBES)
        assert two_index.constant == pytest.approx(classical.constant, rel=1e-9)


def test_multilinear_unit_factor_drops_out():
    """With w2 = 1 the bilinear constant of (w1, 1) equals the 1-linear
    two-index constant of w1 against (p1, q, r1, s): the extra factor
    only contributes a power of |Q| that the cube-measure prefactor
    absorbs."""
    w1 = abs_power_weight(SGRID, 0.125)
    ones = WeightField.ones(SGRID)
    p4 = const_p(4.0, SYM)
    spec2 = QuadrupleSpec((p4, p4), const_p(2.0, SYM), (1.0, 1.0), math.inf)
    spec1 = QuadrupleSpec((p4,), const_p(2.0, SYM), (1.0,), math.inf)
    rep2 = multilinear_constant((w1, ones), spec2, SCUBES)
    rep1 = multilinear_constant((w1,), spec1, SCUBES)
    assert rep2.constant == pytest.approx(rep1.constant, rel=1e-9)
    for a, b in zip(rep2.per_cube, rep1.per_cube):
        assert a == pytest.approx(b, rel=1e-9)


def test_multilinear_arity_mismatch():
    spec = QuadrupleSpec((const_p(4.0), const_p(4.0)), const_p(2.0),
                         (1.0, 1.0), math.inf)
    with pytest.raises(ArityMismatchError):
        multilinear_constant((WeightField.ones(GRID),), spec, CUBES)


# -- two-to-one identity -------------------------------------------------


def test_two_to_one_degenerate_a_equals_one():
    rng = np.random.default_rng(41)
    w = rand_weight(GRID, rng)
    p = const_p(2.0)
    spec = QuadrupleSpec((p,), p, (1.0,), math.inf)   # gamma = 0, a = 1
    rep = two_to_one_check(w, spec, CUBES)
    assert rep.a == pytest.approx(1.0)
    assert rep.rel_error <= 1e-9


def test_two_to_one_fractional_example():
    w = abs_power_weight(SGRID, 0.125)
    q = const_p(4.0, SYM)                              # 1/q = 1/2 - 1/4
    spec = QuadrupleSpec((const_p(2.0, SYM),), q, (1.0,), math.inf)
    rep = two_to_one_check(w, spec, SCUBES)
    assert rep.a == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert rep.rel_error <= 1e-6
    assert rep.max_cube_rel_error <= 1e-6


def test_two_to_one_unit_weight():
    q = const_p(4.0)
    spec = QuadrupleSpec((const_p(2.0),), q, (1.0,), math.inf)
    rep = two_to_one_check(WeightField.ones(GRID), spec, CUBES)
    assert rep.lhs_constant == pytest.approx(1.0, abs=1e-9)
    assert rep.rhs_constant == pytest.approx(1.0, abs=1e-9)


def test_two_to_one_random_suite():
    rng = np.random.default_rng(42)
    for _ in range(6):
        w = rand_weight(GRID, rng)
        p_val = float(rng.uniform(1.6, 3.0))
        gamma = float(rng.uniform(0.0, 0.25))
        q_val = 1.0 / (1.0 / p_val - gamma)
        spec = QuadrupleSpec((const_p(p_val),), const_p(q_val), (1.0,), math.inf)
        rep = two_to_one_check(w, spec, CUBES)
        assert rep.rel_error <= 1e-6


# -- containment ----------------------------------------------------------


def test_containment_unit_weights():
    spec = QuadrupleSpec((const_p(4.0), const_p(4.0)), const_p(2.0),
                         (1.0, 1.0), 8.0)
    ones = WeightField.ones(GRID)
    rep = containment_check((ones, ones), spec, CUBES)
    assert rep.holder_c == pytest.approx(1.0)
    assert rep.passed and rep.global_ratio <= 1.0 + 1e-9


def test_containment_power_weight():
    w = abs_power_weight(SGRID, 0.125)
    spec = QuadrupleSpec((const_p(2.0, SYM),), const_p(4.0, SYM), (1.0,), 8.0)
    rep = containment_check((w,), spec, SCUBES)
    assert rep.passed
    assert rep.max_cube_ratio <= 1.0 + 1e-9


def test_containment_random_step_weights():
    rng = np.random.default_rng(51)
    for _ in range(20):
        steps = rng.uniform(0.2, 5.0, size=8)
        edges = np.linspace(0.0, 1.0, 9)
        x = GRID.coords[..., 0]
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, 7)
        w = WeightField(GRID, steps[idx])
        spec = QuadrupleSpec((const_p(3.0),), const_p(6.0), (1.0,), 12.0)
        rep = containment_check((w,), spec, CUBES)
        assert rep.passed


def test_containment_rejects_infinite_s():
    spec = QuadrupleSpec((const_p(2.0),), const_p(4.0), (1.0,), math.inf)
    with pytest.raises(SpecMismatchError):
        containment_check((WeightField.ones(GRID),), spec, CUBES)


# -- blend ------------------------------------------------------------------


def test_blend_fixed_point_equality():
    rng = np.random.default_rng(61)
    w = rand_weight(GRID, rng)
    spec = QuadrupleSpec((const_p(3.0),), const_p(3.0), (1.0,), math.inf)
    rep = blend_constant_check((w,), (w,), spec, spec, 0.4, CUBES)
    assert rep.passed
    assert rep.blended.constant == pytest.approx(rep.endpoint0.constant, rel=1e-9)
    assert rep.ratio * rep.holder_factor == pytest.approx(1.0, abs=1e-9)


def test_blend_constant_exponent_weighted():
    w0 = abs_power_weight(SGRID, 0.125)
    w1 = WeightField.ones(SGRID)
    spec0 = QuadrupleSpec((const_p(2.0, SYM),), const_p(2.0, SYM), (1.0,), math.inf)
    spec1 = QuadrupleSpec((const_p(4.0, SYM),), const_p(4.0, SYM), (1.0,), math.inf)
    rep = blend_constant_check((w0,), (w1,), spec0, spec1, 0.5, SCUBES)
    assert rep.holder_factor == pytest.approx(1.0)
    assert rep.passed and rep.ratio <= 1.0 + 1e-9
    assert rep.blended_admissible


def test_blend_bilinear_constant_exponents():
    w0 = (abs_power_weight(SGRID, 0.125), WeightField.ones(SGRID))
    w1 = (WeightField.ones(SGRID), WeightField.ones(SGRID))
    p4 = const_p(4.0, SYM)
    spec = QuadrupleSpec((p4, p4), const_p(2.0, SYM), (1.0, 1.0), math.inf)
    rep = blend_constant_check(w0, w1, spec, spec, 0.3, SCUBES)
    assert rep.passed and rep.ratio <= 1.0 + 1e-9


def test_blend_rejects_gamma_mismatch():
    spec0 = QuadrupleSpec((const_p(2.0),), const_p(2.0), (1.0,), math.inf)
    spec1 = QuadrupleSpec((const_p(2.0),), const_p(4.0), (1.0,), math.inf)
    ones = WeightField.ones(GRID)
    with pytest.raises(SpecMismatchError):
        blend_constant_check((ones,), (ones,), spec0, spec1, 0.5, CUBES)


def test_blend_rejects_mismatched_rs():
    spec0 = QuadrupleSpec((const_p(3.0),), const_p(3.0), (1.0,), math.inf)
    spec1 = QuadrupleSpec((const_p(3.0),), const_p(3.0), (1.5,), math.inf)
    ones = WeightField.ones(GRID)
    with pytest.raises(SpecMismatchError):
        blend_constant_check((ones,), (ones,), spec0, spec1, 0.5, CUBES)


# -- componentwise characterization ------------------------------------------


def test_componentwise_unit_weights():
    spec = QuadrupleSpec((const_p(5.0), const_p(5.0)), const_p(1.25),
                         (4.0, 4.0), 4.0 / 3.0)
    ones = WeightField.ones(GRID)
    rep = componentwise_characterize((ones, ones), spec, CUBES)
    assert rep.sigma_vec == (2.0, 2.0)
    for comp in rep.component_reports:
        assert comp.constant == pytest.approx(1.0, abs=1e-9)
    assert rep.nu_report.constant == pytest.approx(1.0, abs=1e-9)
    assert rep.consistent


def test_componentwise_unary_tautology():
    rng = np.random.default_rng(71)
    w = rand_weight(GRID, rng)
    p = const_p(3.0)
    spec = QuadrupleSpec((p,), p, (1.0,), 6.0)      # gamma = 0, sigma = s
    rep = componentwise_characterize((w,), spec, CUBES)
    assert rep.sigma_vec[0] == pytest.approx(6.0)
    assert rep.component_reports[0].constant == pytest.approx(
        rep.multilinear_report.constant, rel=1e-9)
    assert rep.nu_report.constant == pytest.approx(
        rep.multilinear_report.constant, rel=1e-9)


def test_componentwise_step_weights_consistent():
    rng = np.random.default_rng(72)
    x = GRID.coords[..., 0]
    w_vec = []
    for _ in range(2):
        steps = rng.uniform(0.5, 2.0, size=4)
        idx = np.clip((x * 4).astype(int), 0, 3)
        w_vec.append(WeightField(GRID, steps[idx]))
    spec = QuadrupleSpec((const_p(5.0), const_p(5.0)), const_p(1.25),
                         (4.0, 4.0), 4.0 / 3.0)
    rep = componentwise_characterize(tuple(w_vec), spec, CUBES)
    assert rep.all_parts_finite == rep.multilinear_finite
    assert rep.consistent


def test_componentwise_refuses_negative_sigma():
    spec = QuadrupleSpec((const_p(4.0), const_p(4.0)), const_p(2.0),
                         (1.0, 1.0), math.inf)      # 1/sigma_j = 1 - 2 < 0
    ones = WeightField.ones(GRID)
    with pytest.raises(RangeError):
        componentwise_characterize((ones, ones), spec, CUBES)
