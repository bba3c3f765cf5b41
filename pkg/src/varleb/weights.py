"""Weight constants over dyadic cube families.

The symmetric constant of a weight ``w`` against an exponent ``p`` is

    [w]_p = sup_Q |Q|^(-1) ||w chi_Q||_p ||w^(-1) chi_Q||_p',

and the two-index m-linear constant of a weight vector against an
admissible quadruple ``(p_vec, q, r_vec, s)`` with gamma = 1/p - 1/q is

    sup_Q |Q|^(gamma - (1/r - 1/s)) ||nu chi_Q||_{1/(1/q - 1/s)}
          prod_j ||w_j^(-1) chi_Q||_{1/(1/r_j - 1/p_j)},

with ``nu = prod_j w_j``.  Three conventions are fixed throughout:

* ``|Q|`` is the quadrature measure of the cube's node set, the same
  measure the norms integrate against, so identities that hold per
  cube in the continuum hold per cube here too.
* The supremum runs over a finite dyadic-plus-shift cube family, so
  every reported constant is a certified lower bound for the continuum
  supremum.
* A per-cube norm beyond 1e150 is read as an infinite constant; by
  default that raises, and with ``allow_overflow=True`` the report
  carries ``constant = inf`` plus an overflow flag instead.

The non-symmetric convention, where a density ``u = w^p(.)`` is tested
through ``u^(1/p(.))``, is exposed via the density conversion helpers
and produces the same constant as the symmetric form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ArityMismatchError, DomainError, EmptyRegionError,
                     OverflowToInfinityError, RangeError, SpecMismatchError)
from .exponent import (ExponentField, QuadrupleSpec, blend_quadruple,
                       component_exponent, dual_exponent, nu_exponent,
                       reciprocal_affine, two_to_one_data, validate_quadruple)
from .field import Cube, DyadicCubeSet, Grid, WeightField, box_slices
from .norms import holder_constant, lux_flat

OVERFLOW_THRESHOLD = 1e150


@dataclass(frozen=True)
class WeightConstantReport:
    constant: float
    overflow: bool
    argmax_cube: Cube | None
    cube_count: int
    per_cube: tuple[float, ...]
    convention: str


def _factor_arrays(grid: Grid, factors):
    """Evaluate (values, exponent) pairs once on the grid."""
    out = []
    for factor in factors:
        wf, ef = factor[:2]
        # an optional third element of -1.0 divides by the factor norm
        # instead of multiplying (the negative-reciprocal-exponent
        # convention ||f||_t = ||1/f||_that^-1 for 1/t < 0)
        sign = factor[2] if len(factor) > 2 else 1.0
        out.append((np.abs(wf.values), ef.values_on(grid), sign))
    return out


def _cube_scan(grid: Grid, cubes: DyadicCubeSet, factors, measure_power: float,
               rel_tol: float, allow_overflow: bool, convention: str) -> WeightConstantReport:
    if not grid.box.contains_box(cubes.root):
        raise DomainError("cube family root box must lie inside the grid box")
    arrays = _factor_arrays(grid, factors)
    qw = grid.quad_weights
    best = -math.inf
    best_cube = None
    per_cube = []
    overflow = False
    count = 0
    for cube in cubes.cubes():
        count += 1
        sl = box_slices(grid, cube.box)
        wq = qw[sl].ravel()
        if wq.size == 0:
            raise EmptyRegionError(
                f"cube {cube.label()} contains no grid node; lower max_depth or refine the grid")
        measure = float(np.sum(wq))
        value = measure ** measure_power
        for vals, pv, sign in arrays:
            nrm = lux_flat(vals[sl].ravel(), pv[sl].ravel(), wq, rel_tol,
                           scale=cube.box.volume).value
            eff = math.inf if (nrm == 0.0 and sign < 0) else nrm ** sign
            if eff > OVERFLOW_THRESHOLD:
                if not allow_overflow:
                    raise OverflowToInfinityError(
                        f"per-cube norm factor {eff:.3e} beyond {OVERFLOW_THRESHOLD:.0e} "
                        f"on cube {cube.label()}")
                overflow = True
                value = math.inf
                break
            value *= eff
        per_cube.append(value)
        if value > best:
            best = value
            best_cube = cube
    return WeightConstantReport(best, overflow, best_cube, count, tuple(per_cube), convention)


def ap_constant(w: WeightField, p: ExponentField, cubes: DyadicCubeSet,
                rel_tol: float = 1e-10, allow_overflow: bool = False) -> WeightConstantReport:
    """Symmetric variable-exponent Muckenhoupt constant of ``w``."""
    p.require_P("Muckenhoupt constant")
    pd = dual_exponent(p)
    factors = [(w, p), (w.inverse(), pd)]
    return _cube_scan(w.grid, cubes, factors, -1.0, rel_tol, allow_overflow, "symmetric")


def weight_from_density(u: WeightField, p: ExponentField) -> WeightField:
    """``w = u^(1/p(.))`` for a density u = w^p(.)."""
    return u.power(1.0 / p.values_on(u.grid))


def density_from_weight(w: WeightField, p: ExponentField) -> WeightField:
    return w.power(p.values_on(w.grid))


def ap_constant_density(u: WeightField, p: ExponentField, cubes: DyadicCubeSet,
                        rel_tol: float = 1e-10, allow_overflow: bool = False) -> WeightConstantReport:
    """Non-symmetric form: the constant of a density ``u = w^p(.)``,
    computed through ``u^(1/p(.))`` and ``u^(-1/p(.))``; coincides with
    the symmetric constant of ``w``."""
    rep = ap_constant(weight_from_density(u, p), p, cubes, rel_tol, allow_overflow)
    return WeightConstantReport(rep.constant, rep.overflow, rep.argmax_cube,
                                rep.cube_count, rep.per_cube, "nonsymmetric-density")


def multilinear_constant(w_vec, spec: QuadrupleSpec, cubes: DyadicCubeSet,
                         rel_tol: float = 1e-10,
                         allow_overflow: bool = False) -> WeightConstantReport:
    """Two-index m-linear constant of a weight vector."""
    w_vec = tuple(w_vec)
    if len(w_vec) != spec.m:
        raise ArityMismatchError(f"{len(w_vec)} weights against arity {spec.m}")
    grid = w_vec[0].grid
    for w in w_vec[1:]:
        if w.grid != grid:
            raise DomainError("weight components live on different grids")
    nu = w_vec[0]
    for w in w_vec[1:]:
        nu = nu * w
    e_nu = nu_exponent(spec.q, spec.s)
    factors = [(nu, e_nu)]
    for w, p_j, r_j in zip(w_vec, spec.p_vec, spec.r_vec):
        factors.append((w.inverse(), component_exponent(p_j, r_j)))
    inv_s = 0.0 if math.isinf(spec.s) else 1.0 / spec.s
    power = spec.gamma - (1.0 / spec.r - inv_s)
    return _cube_scan(grid, cubes, factors, power, rel_tol, allow_overflow, "two-index")


# ---------------------------------------------------------------------------
# lemma-shaped checks


@dataclass(frozen=True)
class TwoToOneReport:
    lhs: WeightConstantReport
    rhs_inner: WeightConstantReport
    a: float
    lhs_constant: float
    rhs_constant: float
    rel_error: float
    max_cube_rel_error: float


def two_to_one_check(w: WeightField, spec: QuadrupleSpec, cubes: DyadicCubeSet,
                     rel_tol: float = 1e-10) -> TwoToOneReport:
    """Compare the 1-linear two-index constant with the classical
    constant of ``w^a`` at the exponent ``t``, raised to ``1/a``.

    The identity is exact cube by cube, so both the suprema and the
    per-cube values must agree to solver tolerance.
    """
    lhs = multilinear_constant((w,), spec, cubes, rel_tol)
    a, t = two_to_one_data(spec)
    rhs_inner = ap_constant(w.power(a), t, cubes, rel_tol)
    rhs = rhs_inner.constant ** (1.0 / a)
    rel = abs(lhs.constant - rhs) / max(abs(lhs.constant), abs(rhs), 1e-300)
    per = [abs(l - ri ** (1.0 / a)) / max(l, ri ** (1.0 / a), 1e-300)
           for l, ri in zip(lhs.per_cube, rhs_inner.per_cube)]
    return TwoToOneReport(lhs, rhs_inner, a, lhs.constant, rhs, rel, max(per))


@dataclass(frozen=True)
class ContainmentReport:
    lhs: WeightConstantReport          # constant at (r_vec, inf)
    rhs: WeightConstantReport          # constant at (r_vec, s)
    holder_c: float
    global_ratio: float
    max_cube_ratio: float
    passed: bool
    tol: float


def containment_check(w_vec, spec: QuadrupleSpec, cubes: DyadicCubeSet,
                      rel_tol: float = 1e-10, tol: float = 1e-9) -> ContainmentReport:
    """Check ``[w]_{(r, inf)} <= C_H [w]_{(r, s)}`` cube by cube.

    Replacing ``s`` by ``inf`` keeps gamma and the inverse-weight
    factors; the product-weight factor splits by the two-factor Hoelder
    inequality at the target exponent ``q``, whose working constant
    ``holder_constant(q)`` collapses to 1 for constant exponents.
    """
    if math.isinf(spec.s):
        raise SpecMismatchError("containment compares a finite s against s = inf")
    spec_inf = QuadrupleSpec(spec.p_vec, spec.q, spec.r_vec, math.inf)
    lhs = multilinear_constant(w_vec, spec_inf, cubes, rel_tol)
    rhs = multilinear_constant(w_vec, spec, cubes, rel_tol)
    c_h = holder_constant(spec.q)
    ratios = [l / (c_h * r) if r > 0 else math.inf
              for l, r in zip(lhs.per_cube, rhs.per_cube)]
    global_ratio = lhs.constant / (c_h * rhs.constant)
    passed = global_ratio <= 1.0 + tol and max(ratios) <= 1.0 + tol
    return ContainmentReport(lhs, rhs, c_h, global_ratio, max(ratios), passed, tol)


@dataclass(frozen=True)
class BlendReport:
    blended: WeightConstantReport
    endpoint0: WeightConstantReport
    endpoint1: WeightConstantReport
    holder_factor: float
    bound: float
    ratio: float
    passed: bool
    blended_admissible: bool
    gamma: float
    tol: float


def blend_constant_check(w_vec0, w_vec1, spec0: QuadrupleSpec, spec1: QuadrupleSpec,
                         theta: float, cubes: DyadicCubeSet,
                         rel_tol: float = 1e-10, tol: float = 1e-9,
                         gamma_tol: float = 1e-9) -> BlendReport:
    """Check the constant of blended weights against the geometric mean
    of the endpoint constants.

    The blended weight vector is ``w_j = w_{0,j}^(1-theta) w_{1,j}^theta``
    and the allowed loss is one two-factor Hoelder constant per norm
    factor: ``prod_j holder_constant(e_j) * holder_constant(e_nu)`` at
    the blended factor exponents (exactly 1 when everything is
    constant).
    """
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    w_vec0, w_vec1 = tuple(w_vec0), tuple(w_vec1)
    if len(w_vec0) != spec0.m or len(w_vec1) != spec1.m:
        raise ArityMismatchError("weight vector arity does not match its quadruple")
    g0, g1 = spec0.gamma, spec1.gamma
    if abs(g0 - g1) > gamma_tol:
        raise SpecMismatchError(f"endpoints have different gamma: {g0} vs {g1}")
    spec = blend_quadruple(spec0, spec1, theta)
    w_vec = tuple(w0.power(1.0 - theta) * w1.power(theta)
                  for w0, w1 in zip(w_vec0, w_vec1))

    blended = multilinear_constant(w_vec, spec, cubes, rel_tol)
    c0 = multilinear_constant(w_vec0, spec0, cubes, rel_tol)
    c1 = multilinear_constant(w_vec1, spec1, cubes, rel_tol)

    factor = holder_constant(nu_exponent(spec.q, spec.s))
    for p_j, r_j in zip(spec.p_vec, spec.r_vec):
        factor *= holder_constant(component_exponent(p_j, r_j))

    bound = factor * c0.constant ** (1.0 - theta) * c1.constant ** theta
    ratio = blended.constant / bound
    verdict = validate_quadruple(spec, tol=max(gamma_tol, 1e-9))
    return BlendReport(blended, c0, c1, factor, bound, ratio, ratio <= 1.0 + tol,
                       verdict.admissible, verdict.gamma, tol)


@dataclass(frozen=True)
class ComponentwiseReport:
    sigma_vec: tuple[float, ...]
    component_reports: tuple[WeightConstantReport, ...]
    component_admissible: tuple[bool, ...]
    nu_report: WeightConstantReport
    multilinear_report: WeightConstantReport
    all_parts_finite: bool
    multilinear_finite: bool
    consistent: bool


def componentwise_characterize(w_vec, spec: QuadrupleSpec, cubes: DyadicCubeSet,
                               rel_tol: float = 1e-10) -> ComponentwiseReport:
    """Split a joint weight condition into per-component conditions.

    Component ``j`` is tested in the 1-linear class with exponents
    ``(p_j, p_j)``, indices ``(r_j, sigma_j)`` and ``1/sigma_j = 1/r_j -
    (1/r - 1/s)``; the product weight ``nu`` is tested in the 1-linear
    class with the combined input exponent.  Finiteness of all parts is
    expected to coincide with finiteness of the joint constant.

    When ``sigma_j < (p_j)_-`` the weight factor of the component class
    carries a negative reciprocal exponent ``1/p_j - 1/sigma_j``; it is
    evaluated as ``||w chi_Q||_t = ||w^-1 chi_Q||_that^-1`` with ``1/that
    = -1/t``, the reading under which ``||chi_Q||_t = |Q|^(1/t)`` keeps
    holding.  A sign change of ``1/p_j - 1/sigma_j`` inside the box has
    no convention to fall back on and is refused.
    """
    w_vec = tuple(w_vec)
    if len(w_vec) != spec.m:
        raise ArityMismatchError(f"{len(w_vec)} weights against arity {spec.m}")
    inv_s = 0.0 if math.isinf(spec.s) else 1.0 / spec.s
    gap = 1.0 / spec.r - inv_s

    sigma_vec = []
    comp_reports = []
    comp_adm = []
    for w, p_j, r_j in zip(w_vec, spec.p_vec, spec.r_vec):
        inv_sigma = 1.0 / r_j - gap
        if inv_sigma < 0.0:
            raise RangeError(f"1/sigma_j = {inv_sigma} is negative; the component "
                             "scale is outside this implementation's range")
        sigma = math.inf if inv_sigma == 0.0 else 1.0 / inv_sigma
        sigma_vec.append(sigma)
        comp_spec = QuadrupleSpec((p_j,), p_j, (r_j,), sigma)
        comp_adm.append(validate_quadruple(comp_spec).admissible)
        if p_j.p_plus < sigma:
            w_factor = (w, nu_exponent(p_j, sigma))
        elif inv_sigma > 1.0 / p_j.p_minus:
            reflected = reciprocal_affine((p_j,), (-1.0,), inv_sigma,
                                          what="reflected component exponent")
            w_factor = (w.inverse(), reflected, -1.0)
        else:
            raise RangeError(
                f"1/p_j - 1/sigma_j changes sign over the box for component "
                f"exponent [{p_j.p_minus}, {p_j.p_plus}] against sigma = {sigma}")
        inv_factor = (w.inverse(), component_exponent(p_j, r_j))
        comp_reports.append(_cube_scan(w.grid, cubes, [w_factor, inv_factor],
                                       -(1.0 / r_j - inv_sigma), rel_tol,
                                       True, "two-index"))

    nu = w_vec[0]
    for w in w_vec[1:]:
        nu = nu * w
    nu_spec = QuadrupleSpec((spec.p_combined,), spec.q, (spec.r,), spec.s)
    nu_report = multilinear_constant((nu,), nu_spec, cubes, rel_tol, allow_overflow=True)
    joint = multilinear_constant(w_vec, spec, cubes, rel_tol, allow_overflow=True)

    all_finite = (not nu_report.overflow) and all(not r.overflow for r in comp_reports)
    joint_finite = not joint.overflow
    return ComponentwiseReport(tuple(sigma_vec), tuple(comp_reports), tuple(comp_adm),
                               nu_report, joint, all_finite, joint_finite,
                               all_finite == joint_finite)
