"""Maximal operator, oscillation averages, and the boundedness probe."""

import math

import numpy as np
import pytest

from varleb import (Box, DomainError, DyadicCubeSet, ExponentField, Grid,
                    GridFunction, HypothesisFailureError, RadiusSweep,
                    WeightField, ball_mean, maximal_boundedness_probe,
                    maximal_function, oscillation_average)

from _support import UNIT, grid1d


def indicator(grid, lo, hi):
    return GridFunction.from_callable(
        grid, lambda pts: ((pts[..., 0] >= lo) & (pts[..., 0] <= hi)).astype(float))


# -- radius sweeps -------------------------------------------------------


def test_sweep_geometric_spans_grid():
    g = grid1d(257)
    sweep = RadiusSweep.geometric(g)
    assert len(sweep.radii) == 64
    assert sweep.radii[0] == pytest.approx(g.max_step)
    assert sweep.radii[-1] == pytest.approx(g.box.diameter)
    sweep.validate_for(g)


def test_sweep_with_required_radii():
    g = Grid(Box((-0.5,), (8.5,)), (1025,))
    sweep = RadiusSweep.with_radii(g, 64, (1.5, 2.0, 4.0))
    assert {1.5, 2.0, 4.0} <= set(sweep.radii)


def test_sweep_rejects_disorder():
    with pytest.raises(DomainError):
        RadiusSweep((0.2, 0.1))
    with pytest.raises(DomainError):
        RadiusSweep(())
    with pytest.raises(DomainError):
        RadiusSweep((-1.0, 1.0))


def test_sweep_validation_against_grid():
    g = grid1d(257)
    with pytest.raises(DomainError):
        RadiusSweep((g.max_step / 10.0, 1.0)).validate_for(g)
    with pytest.raises(DomainError):
        RadiusSweep((g.max_step, 5.0)).validate_for(g)


# -- maximal function -----------------------------------------------------


def test_maximal_constant():
    g = grid1d(513)
    f = GridFunction(g, np.full(g.shape, 2.5))
    mf = maximal_function(f, 1.0, RadiusSweep.geometric(g, 16))
    assert np.allclose(mf.values, 2.5, atol=1e-12)


def test_maximal_indicator_analytic_profile():
    """M chi_[0,1] at qtilde = 1 equals 1/(2x) for x >= 1: the optimal
    ball radius is r = x, just covering the support."""
    g = Grid(Box((-0.5,), (8.5,)), (8193,))
    chi = indicator(g, 0.0, 1.0)
    sweep = RadiusSweep.with_radii(g, 64, (1.5, 2.0, 4.0))
    mf = maximal_function(chi, 1.0, sweep)
    x = g.coords[..., 0]
    for point in (1.5, 2.0, 4.0):
        idx = int(np.argmin(np.abs(x - point)))
        assert mf.values[idx] == pytest.approx(1.0 / (2.0 * point), abs=1e-3)


def test_maximal_dominates_pointwise():
    g = grid1d(1025)
    f = GridFunction.from_callable(
        g, lambda pts: np.exp(-(((pts[..., 0] - 0.5) / 0.15) ** 2)))
    mf = maximal_function(f, 1.0, RadiusSweep.geometric(g, 32))
    assert np.all(mf.values >= np.abs(f.values) - 1e-9)


def test_maximal_sublinear_at_qtilde_one():
    g = grid1d(513)
    rng = np.random.default_rng(5)
    f = GridFunction(g, rng.normal(size=g.shape))
    h = GridFunction(g, rng.normal(size=g.shape))
    sweep = RadiusSweep.geometric(g, 16)
    m_sum = maximal_function(f + h, 1.0, sweep)
    m_split = maximal_function(f, 1.0, sweep) + maximal_function(h, 1.0, sweep)
    assert np.all(m_sum.values <= m_split.values + 1e-9)


def test_maximal_monotone_in_sweep():
    g = grid1d(513)
    rng = np.random.default_rng(6)
    f = GridFunction(g, rng.normal(size=g.shape))
    few = RadiusSweep.geometric(g, 8)
    more = RadiusSweep(tuple(sorted(set(few.radii) | {0.1, 0.3, 0.7})))
    m_few = maximal_function(f, 1.0, few)
    m_more = maximal_function(f, 1.0, more)
    assert np.all(m_more.values >= m_few.values - 1e-12)


def test_maximal_scale_equivariance():
    g = grid1d(513)
    rng = np.random.default_rng(7)
    f = GridFunction(g, rng.normal(size=g.shape))
    sweep = RadiusSweep.geometric(g, 16)
    lhs = maximal_function(f * (-3.0), 1.0, sweep)
    rhs = maximal_function(f, 1.0, sweep) * 3.0
    assert np.allclose(lhs.values, rhs.values, rtol=1e-12, atol=1e-12)


def test_maximal_rejects_bad_qtilde():
    g = grid1d(65)
    f = GridFunction(g, np.ones(g.shape))
    with pytest.raises(DomainError):
        maximal_function(f, 0.0, RadiusSweep.geometric(g, 8))


def test_ball_mean_keeps_sign():
    g = grid1d(513)
    f = GridFunction.from_callable(g, lambda pts: pts[..., 0] - 0.5)
    avg = ball_mean(f, 0.1)
    mid = g.shape[0] // 2
    assert avg.values[mid] == pytest.approx(0.0, abs=1e-12)
    assert avg.values[0] < 0.0 < avg.values[-1]


# -- oscillation average ----------------------------------------------------


def test_oscillation_constant_is_zero():
    g = grid1d(513)
    f = GridFunction(g, np.full(g.shape, 4.2))
    osc = oscillation_average(f, 1.0, 0.05)
    assert np.allclose(osc.values, 0.0, atol=1e-14)


def test_oscillation_linear_half_radius():
    g = grid1d(4097)
    f = GridFunction.from_callable(g, lambda pts: pts[..., 0])
    r = 0.0625
    osc = oscillation_average(f, 1.0, r)
    interior = (g.coords[..., 0] > 2 * r) & (g.coords[..., 0] < 1.0 - 2 * r)
    assert np.allclose(osc.values[interior], r / 2.0, atol=2.0 * g.max_step)


def test_oscillation_indicator_deep_inside():
    g = grid1d(2049)
    chi = indicator(g, 0.25, 0.75)
    osc = oscillation_average(chi, 1.0, 0.01)
    mid = g.shape[0] // 2
    assert osc.values[mid] == pytest.approx(0.0, abs=1e-12)


def test_oscillation_lipschitz_bound():
    g = grid1d(2049)
    f = GridFunction.from_callable(g, lambda pts: np.sin(3.0 * pts[..., 0]))
    r = 0.03
    osc = oscillation_average(f, 2.0, r)
    assert float(osc.values.max()) <= 3.0 * r + 2.0 * g.max_step


# -- boundedness probe ---------------------------------------------------------


def test_probe_constant_corpus_unit_ratios():
    g = grid1d(1025)
    p = ExponentField.constant(UNIT, 2.0)
    w = WeightField.ones(g)
    corpus = [GridFunction(g, np.full(g.shape, c)) for c in (1.0, 2.0, 5.0)]
    rep = maximal_boundedness_probe(corpus, p, w, 1.0,
                                    RadiusSweep.geometric(g, 16),
                                    DyadicCubeSet(UNIT, 3))
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-9)
    assert all(r == pytest.approx(1.0, abs=1e-9) for r in rep.ratios)


def test_probe_indicator_ratio_finite():
    g = Grid(Box((-0.5,), (8.5,)), (2049,))
    box = g.box
    p = ExponentField.constant(box, 2.0)
    w = WeightField.ones(g)
    rep = maximal_boundedness_probe([indicator(g, 0.0, 1.0)], p, w, 1.0,
                                    RadiusSweep.geometric(g, 32),
                                    DyadicCubeSet(box, 3))
    assert math.isfinite(rep.max_ratio)
    assert rep.max_ratio > 1.0
    assert math.isfinite(rep.gate.constant)


def test_probe_gate_rejects_large_qtilde():
    g = grid1d(257)
    p = ExponentField.constant(UNIT, 2.0)
    w = WeightField.ones(g)
    corpus = [GridFunction(g, np.ones(g.shape))]
    with pytest.raises(HypothesisFailureError):
        maximal_boundedness_probe(corpus, p, w, 2.5,
                                  RadiusSweep.geometric(g, 8),
                                  DyadicCubeSet(UNIT, 2))
