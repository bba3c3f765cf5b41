"""Modulars and Luxemburg norms for variable exponents.

The modular of ``f`` against an exponent field ``p`` is ``rho(f) = int
|f(x)|^p(x) dx`` (a trapezoid sum here).  The norm is the Luxemburg
functional

    ||f||_p = inf { lam > 0 : rho(f / lam) <= 1 },

computed by bracketing and bisection on ``lam -> rho(f/lam)``, which is
strictly decreasing, continuous, and spans (0, inf) for nonzero ``f``
with finite exponents.  Weighted norms follow the convention
``||f||_{p,w} = || f w ||_p`` (the weight multiplies the function, it
does not change the measure).

A mixed norm of a bivariate function first reduces the second axis by a
constant-exponent integral norm, then applies a variable-exponent
Luxemburg norm in the first axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, EmptyRegionError
from .exponent import ExponentField, dual_exponent
from .field import (Box, Grid, GridFunction, WeightField, box_slices,
                    random_simple_function)

MAX_BRACKET_STEPS = 200

# Function values whose magnitude stays below this (after the volume
# scale) are treated as exact zeros by the norm solver.
ZERO_FLOOR = 1e-250


@dataclass(frozen=True)
class NormResult:
    """Outcome of a Luxemburg solve: the norm value, the iteration
    count (bracketing plus bisection), the final bracket, and the
    modular of ``f / value``."""

    value: float
    iterations: int
    bracket: tuple[float, float]
    modular_at_value: float

    def __float__(self) -> float:
        return self.value


def _region_arrays(f: GridFunction, p: ExponentField, region):
    """Flat (|f|, p, weights) arrays over the region's nodes."""
    if p.box != f.grid.box:
        raise DomainError("exponent domain does not match the function's box")
    vals = f.values
    pv = p.values_on(f.grid)
    qw = f.grid.quad_weights
    if region is None:
        return np.abs(vals).ravel(), pv.ravel(), qw.ravel()
    if isinstance(region, Box):
        sl = box_slices(f.grid, region)
        sub = vals[sl]
        if sub.size == 0:
            raise EmptyRegionError(f"no grid node inside region {region.as_pairs()}")
        return np.abs(sub).ravel(), pv[sl].ravel(), qw[sl].ravel()
    mask = np.asarray(region, dtype=bool)
    if mask.shape != f.grid.shape:
        raise DomainError("region mask shape does not match grid")
    if not mask.any():
        raise EmptyRegionError("region mask selects no grid node")
    return np.abs(vals[mask]), pv[mask], qw[mask]


def modular_flat(a: np.ndarray, p: np.ndarray, qw: np.ndarray) -> float:
    nz = a > 0.0
    if not nz.any():
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.sum(qw[nz] * np.exp(p[nz] * np.log(a[nz]))))


def modular(f: GridFunction, p: ExponentField, region=None) -> float:
    """``int_region |f|^p(x) dx``; may overflow to inf."""
    a, pv, qw = _region_arrays(f, p, region)
    return modular_flat(a, pv, qw)


def lux_flat(a: np.ndarray, p: np.ndarray, qw: np.ndarray,
             rel_tol: float = 1e-10, scale: float = 1.0) -> NormResult:
    """Luxemburg solve on flat node data.

    ``scale`` seeds the initial bracket guess ``lam_0 = max(1e-300,
    sup|f| * scale)``; any positive value works, a volume-like scale
    just shortens the bracketing walk.
    """
    if not 0.0 < rel_tol <= 1e-2:
        raise DomainError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")
    nz = a > 0.0
    if not nz.any():
        return NormResult(0.0, 0, (0.0, 0.0), 0.0)
    if float(a.max()) * max(scale, 1.0) < ZERO_FLOOR:
        # Underflowed slivers (for example the far tail of a gaussian)
        # would drag the bracketing iteration into subnormal territory;
        # anything this small is an exact zero for every caller.
        return NormResult(0.0, 0, (0.0, 0.0), 0.0)
    a = a[nz]
    p = p[nz]
    qw = qw[nz]
    la = np.log(a)

    if float(np.ptp(p)) == 0.0:
        # constant exponent: rho(lam) = S * lam^(-p) with one reduction
        pc = float(p[0])
        log_s = math.log(float(np.sum(qw * np.exp(pc * (la - la.max()))))) + pc * float(la.max())

        def rho(lam: float) -> float:
            with np.errstate(over="ignore"):
                return math.exp(min(log_s - pc * math.log(lam), 709.0)) if lam > 0 else math.inf
    else:
        def rho(lam: float) -> float:
            with np.errstate(over="ignore"):
                return float(np.sum(qw * np.exp(p * (la - math.log(lam)))))

    lam = max(1e-300, float(a.max()) * scale)
    iters = 1
    r = rho(lam)
    if r > 1.0:
        for _ in range(MAX_BRACKET_STEPS):
            lam *= 2.0
            iters += 1
            r = rho(lam)
            if r <= 1.0:
                break
        else:
            raise ConvergenceError("no upper bracket for the Luxemburg norm in 200 doublings")
        lo, hi = lam / 2.0, lam
    elif r < 1.0:
        for _ in range(MAX_BRACKET_STEPS):
            lam /= 2.0
            iters += 1
            r = rho(lam)
            if r >= 1.0:
                break
        else:
            raise ConvergenceError("no lower bracket for the Luxemburg norm in 200 halvings")
        lo, hi = lam, lam * 2.0
    else:
        return NormResult(lam, iters, (lam, lam), 1.0)

    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        iters += 1
        if iters > 5000:
            raise ConvergenceError("Luxemburg bisection failed to contract; "
                                   f"bracket ({lo:.6g}, {hi:.6g})")
        if rho(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    value = 0.5 * (lo + hi)
    return NormResult(value, iters, (lo, hi), rho(value))


def luxemburg_norm(f: GridFunction, p: ExponentField, region=None,
                   rel_tol: float = 1e-10) -> NormResult:
    a, pv, qw = _region_arrays(f, p, region)
    return lux_flat(a, pv, qw, rel_tol, scale=f.grid.box.volume)


def weighted_norm(f: GridFunction, p: ExponentField, w: WeightField | None = None,
                  region=None, rel_tol: float = 1e-10) -> NormResult:
    """``|| f w ||_p``; with ``w`` omitted this is the plain norm."""
    g = f if w is None else f * w
    return luxemburg_norm(g, p, region, rel_tol)


def weight_measure(w: WeightField, p: ExponentField, region=None) -> float:
    """``w(A) = int_A w(x)^p(x) dx``, the measure a weight induces."""
    return modular(w, p, region)


def mixed_norm(F: GridFunction, inner_exponent: float, outer_p: ExponentField,
               outer_weight: WeightField | None = None,
               rel_tol: float = 1e-10) -> NormResult:
    """Norm of ``x -> ||F(x, .)||_{L^inner}`` in ``L^outer_p(v)``.

    ``F`` lives on a 2D grid whose first axis is the outer variable.
    The inner exponent is a positive constant; the outer exponent and
    weight live on the first-axis 1D grid.
    """
    if F.grid.dim != 2:
        raise DomainError("mixed norms need a bivariate grid function")
    if inner_exponent <= 0.0 or not math.isfinite(inner_exponent):
        raise DomainError("inner exponent must be a finite positive constant")
    x_grid = F.grid.axis_grid(0)
    y_grid = F.grid.axis_grid(1)
    wy = y_grid.quad_weights
    with np.errstate(over="ignore"):
        inner = np.sum(wy[None, :] * np.abs(F.values) ** inner_exponent, axis=1) ** (
            1.0 / inner_exponent)
    g = GridFunction(x_grid, inner)
    return weighted_norm(g, outer_p, outer_weight, rel_tol=rel_tol)


def holder_constant(p: ExponentField) -> float:
    """Working convention for the two-factor Hoelder constant:
    ``1/p_- - 1/p_+ + 1`` (equal to 1 exactly when p is constant, and
    invariant under duality)."""
    return 1.0 / p.p_minus - 1.0 / p.p_plus + 1.0


def pairing(f: GridFunction, g: GridFunction) -> float:
    """``int |f g|`` over the shared grid."""
    if g.grid != f.grid:
        raise DomainError("pairing requires a shared grid")
    return float(np.sum(f.grid.quad_weights * np.abs(f.values * g.values)))


def duality_pairing_lower_bound(f: GridFunction, p: ExponentField,
                                trials: int = 16, seed: int = 0,
                                rel_tol: float = 1e-10) -> float:
    """Best pairing ``int |f g|`` over candidates with ``||g||_{p'} = 1``.

    Always includes the classical norming candidate ``|f|^{p(.)-1}``,
    which attains ``||f||_p`` exactly for constant exponents, plus
    seeded random simple functions.  The result is a certified lower
    bound for the dual norm of ``f`` up to normalization error.
    """
    p.require_P("duality pairing")
    pd = dual_exponent(p)
    candidates = [f.power(p.values_on(f.grid) - 1.0)]
    rng = np.random.default_rng(seed)
    candidates.extend(random_simple_function(f.grid, rng, signed=False)
                      for _ in range(trials))
    best = 0.0
    for g in candidates:
        gn = luxemburg_norm(g, pd, rel_tol=rel_tol).value
        if gn <= 0.0 or not math.isfinite(gn):
            continue
        best = max(best, pairing(f, g * (1.0 / gn)))
    return best
