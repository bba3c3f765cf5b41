"""Discrete maximal operators and oscillation averages.

The q-mean maximal function of a grid function is

    M_q f(x) = sup_r ( (1/|B(x,r)|) int_{B(x,r)} |f|^q )^(1/q),

with the supremum taken over a finite radius sweep and every ball
truncated to the grid box (the measure in the average is the
quadrature measure of the in-box discrete ball).  Balls are open with
the same deterministic shrink as the field module, so the smallest
admissible radius (one grid step) reduces the ball to its center node
and ``M_q f >= |f|`` holds exactly at the nodes.

The oscillation average pairs with the equicontinuity condition of the
compactness criterion:

    osc_{q,r} f(x) = ( (1/|B(x,r)|) int_{B(x,r)} |f(x) - f(y)|^q dy )^(1/q).

Ball sums for the maximal function are evaluated by FFT convolution
against a 0/1 ball kernel, which is exact up to floating-point
roundoff and keeps a 64-radius sweep cheap at the default resolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, HypothesisFailureError, OverflowToInfinityError
from .exponent import ExponentField, scale_exponent
from .field import BALL_SHRINK, DyadicCubeSet, Grid, GridFunction, WeightField
from .norms import weighted_norm
from .weights import WeightConstantReport, ap_constant


@dataclass(frozen=True)
class RadiusSweep:
    """Strictly increasing positive radii for ball suprema."""

    radii: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if not self.radii:
            raise DomainError("radius sweep must be nonempty")
        if self.radii[0] <= 0.0:
            raise DomainError("radii must be positive")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise DomainError("radii must increase strictly")

    @classmethod
    def geometric(cls, grid: Grid, count: int = 64,
                  r_min: float | None = None, r_max: float | None = None) -> "RadiusSweep":
        """Geometric ladder from the grid step to the box diameter."""
        lo = grid.max_step if r_min is None else r_min
        hi = grid.box.diameter if r_max is None else r_max
        if count < 2 or hi <= lo:
            raise DomainError("need count >= 2 and r_max > r_min")
        return cls(tuple(np.geomspace(lo, hi, count)))

    @classmethod
    def with_radii(cls, grid: Grid, count: int, required: Sequence[float]) -> "RadiusSweep":
        """Geometric ladder thinned to make room for required radii."""
        base = np.geomspace(grid.max_step, grid.box.diameter, count - len(required))
        merged = sorted(set(map(float, base)) | set(map(float, required)))
        return cls(tuple(merged))

    def validate_for(self, grid: Grid) -> None:
        if self.radii[0] < grid.max_step * (1.0 - 1e-9):
            raise DomainError(
                f"smallest radius {self.radii[0]} is below the grid step {grid.max_step}")
        if self.radii[-1] > grid.box.diameter * (1.0 + 1e-9):
            raise DomainError(
                f"largest radius {self.radii[-1]} exceeds the box diameter")


def _ball_kernel(grid: Grid, radius: float) -> np.ndarray:
    r_eff = radius * BALL_SHRINK
    ks = []
    for h in grid.steps:
        k = int(math.floor(r_eff / h))
        ks.append(np.arange(-k, k + 1) * h)
    if grid.dim == 1:
        mask = np.abs(ks[0]) < r_eff
    else:
        d2 = ks[0][:, None] ** 2 + ks[1][None, :] ** 2
        mask = d2 < r_eff ** 2
    return mask.astype(float)


def _convolve_same(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    shape = tuple(n + k - 1 for n, k in zip(arr.shape, kernel.shape))
    axes = tuple(range(arr.ndim))
    fa = np.fft.rfftn(arr, shape, axes)
    fk = np.fft.rfftn(kernel, shape, axes)
    full = np.fft.irfftn(fa * fk, shape, axes)
    sl = tuple(slice((k - 1) // 2, (k - 1) // 2 + n) for n, k in zip(arr.shape, kernel.shape))
    return full[sl]


def ball_sums(arr: np.ndarray, grid: Grid, radius: float) -> np.ndarray:
    """For every node x, the sum of ``arr`` over in-box nodes of the
    open ball B(x, radius)."""
    kernel = _ball_kernel(grid, radius)
    if kernel.size == 1:
        return arr.copy()
    return _convolve_same(arr, kernel)


def ball_mean(f: GridFunction, radius: float) -> GridFunction:
    """Signed in-box ball average of f at every node (linear in f)."""
    qw = f.grid.quad_weights
    num = ball_sums(qw * f.values, f.grid, radius)
    den = ball_sums(qw, f.grid, radius)
    return GridFunction(f.grid, num / np.maximum(den, 1e-300))


def maximal_function(f: GridFunction, qtilde: float, sweep: RadiusSweep) -> GridFunction:
    if qtilde <= 0.0 or not math.isfinite(qtilde):
        raise DomainError("qtilde must be a finite positive constant")
    sweep.validate_for(f.grid)
    qw = f.grid.quad_weights
    powed = qw * np.abs(f.values) ** qtilde
    best = np.zeros(f.grid.shape)
    for r in sweep.radii:
        num = np.maximum(ball_sums(powed, f.grid, r), 0.0)
        den = ball_sums(qw, f.grid, r)
        np.maximum(best, num / np.maximum(den, 1e-300), out=best)
    return GridFunction(f.grid, best ** (1.0 / qtilde))


def oscillation_average(f: GridFunction, qtilde: float, radius: float) -> GridFunction:
    """``osc_{qtilde, radius} f`` at every node, in-box truncated."""
    if qtilde <= 0.0 or not math.isfinite(qtilde):
        raise DomainError("qtilde must be a finite positive constant")
    if radius < f.grid.max_step * (1.0 - 1e-9):
        raise DomainError("oscillation radius must be at least the grid step")
    grid = f.grid
    # Closed offset ball, unlike the open balls elsewhere: at the
    # smallest admissible radius (one grid step) the open convention
    # would leave only the zero offset and a vacuous oscillation.
    r_eff = radius * (1.0 + 1e-9)
    vals = f.values
    qw = grid.quad_weights
    num = np.zeros(grid.shape)
    den = np.zeros(grid.shape)
    offsets = _offset_list(grid, r_eff)
    for delta in offsets:
        dst, src = _shift_slices(grid.shape, delta)
        num[dst] += qw[src] * np.abs(vals[dst] - vals[src]) ** qtilde
        den[dst] += qw[src]
    return GridFunction(grid, (num / np.maximum(den, 1e-300)) ** (1.0 / qtilde))


def _offset_list(grid: Grid, r_eff: float):
    axes = []
    for h in grid.steps:
        k = int(math.floor(r_eff / h))
        axes.append(range(-k, k + 1))
    if grid.dim == 1:
        return [(k,) for k in axes[0] if abs(k) * grid.steps[0] < r_eff]
    h1, h2 = grid.steps
    return [(k1, k2) for k1 in axes[0] for k2 in axes[1]
            if (k1 * h1) ** 2 + (k2 * h2) ** 2 < r_eff ** 2]


def _shift_slices(shape, delta):
    dst, src = [], []
    for n, k in zip(shape, delta):
        if k >= 0:
            dst.append(slice(0, n - k))
            src.append(slice(k, n))
        else:
            dst.append(slice(-k, n))
            src.append(slice(0, n + k))
    return tuple(dst), tuple(src)


@dataclass(frozen=True)
class ProbeReport:
    gate: WeightConstantReport
    qtilde: float
    ratios: tuple[float, ...]
    max_ratio: float


def maximal_boundedness_probe(corpus: Sequence[GridFunction], p: ExponentField,
                              w: WeightField, qtilde: float, sweep: RadiusSweep,
                              cubes: DyadicCubeSet, rel_tol: float = 1e-10) -> ProbeReport:
    """Empirical norm ratios ``||M_q f|| / ||f||`` under the gating
    weight condition ``w^qtilde`` in the class at exponent ``p/qtilde``.

    Raises HypothesisFailureError when the gate constant overflows or
    the scaled exponent leaves the class P.
    """
    if qtilde >= p.p_minus:
        raise HypothesisFailureError(
            f"qtilde = {qtilde} is not below p_- = {p.p_minus}")
    gate_p = scale_exponent(p, 1.0 / qtilde)
    try:
        gate = ap_constant(w.power(qtilde), gate_p, cubes, rel_tol, allow_overflow=False)
    except OverflowToInfinityError as exc:
        raise HypothesisFailureError(f"gate weight condition fails: {exc}") from exc
    ratios = []
    for f in corpus:
        fn = weighted_norm(f, p, w, rel_tol=rel_tol).value
        if fn <= 0.0:
            continue
        mf = maximal_function(f, qtilde, sweep)
        ratios.append(weighted_norm(mf, p, w, rel_tol=rel_tol).value / fn)
    if not ratios:
        raise DomainError("probe corpus contains only zero functions")
    return ProbeReport(gate, qtilde, tuple(ratios), max(ratios))
