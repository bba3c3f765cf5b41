"""Totally-bounded-or-not diagnostics for families of grid functions.

A family F in a weighted space ``L^p(.)(w)`` is probed through the
three conditions of the compactness criterion:

(i)   uniform bound:        sup_f ||f w||_p < inf,
(ii)  equicontinuity:       sup_f || osc_{q,r} f ||_{p,w} -> 0 as r -> 0,
(iii) uniform vanishing:    sup_f || f chi_{outside B(x0,R)} ||_{p,w} -> 0,

under the gating hypothesis that ``w^q`` satisfies the Muckenhoupt
condition at exponent ``p(.)/q`` for some ``0 < q < p_-``.  On a finite
grid none of these are limits, so the diagnostic reports profiles over
finite ladders and thresholds them, and cross-checks the verdict with
a covering-net oracle: greedy farthest-point covering numbers over an
epsilon ladder ``diam * 2^-k``.  A family whose net sizes stop growing
strictly below the family size compresses (evidence for total
boundedness); a family that stays fully separated at the smallest
epsilon does not.

Verdicts are "consistent-compact", "consistent-noncompact", or
"inconclusive"; they are evidence statements about the sampled family,
never theorems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, HypothesisFailureError, OverflowToInfinityError
from .exponent import ExponentField, scale_exponent
from .field import (Box, DyadicCubeSet, Grid, GridFunction, WeightField,
                    ball_mask, shift_function)
from .maximal import RadiusSweep, oscillation_average
from .norms import weight_measure, weighted_norm
from .weights import WeightConstantReport, ap_constant


@dataclass(frozen=True)
class FunctionFamily:
    members: tuple[GridFunction, ...]
    label: str = ""

    def __post_init__(self):
        if not self.members:
            raise DomainError("family must have at least one member")
        grid = self.members[0].grid
        for f in self.members[1:]:
            if f.grid != grid:
                raise DomainError("family members live on different grids")

    @property
    def grid(self) -> Grid:
        return self.members[0].grid

    def __len__(self) -> int:
        return len(self.members)


# ---------------------------------------------------------------------------
# family generators


def translate_family(base: GridFunction, count: int, step: float,
                     label: str = "translates") -> FunctionFamily:
    """Shifted copies ``f(x - k step)`` along axis 0, zero filled."""
    members = []
    for k in range(count):
        shift = [0.0] * base.grid.dim
        shift[0] = k * step
        members.append(shift_function(base, shift))
    return FunctionFamily(tuple(members), label)


def modulate_family(base: GridFunction, count: int, base_frequency: float = 1.0,
                    growth: float = 2.0, label: str = "modulates") -> FunctionFamily:
    """``f(x) sin(2 pi w_k x_0)`` with frequencies ``w_k = growth^k w_0``.

    The top frequency must stay resolvable (at least four nodes per
    period), otherwise aliasing would silently collapse members; pick a
    growth factor below 2 to enlarge the family on a fixed grid.
    """
    if growth <= 1.0:
        raise DomainError("frequency growth factor must exceed 1")
    top = base_frequency * growth ** (count - 1)
    if top > 1.0 / (4.0 * base.grid.max_step):
        raise DomainError(
            f"top frequency {top:.6g} exceeds a quarter of the grid rate; "
            "refine the grid or lower the growth factor")
    x0 = base.grid.coords[..., 0]
    members = []
    for k in range(count):
        osc = np.sin(2.0 * np.pi * base_frequency * growth ** k * x0)
        members.append(GridFunction(base.grid, base.values * osc))
    return FunctionFamily(tuple(members), label)


def dilate_family(base: GridFunction, count: int, ratio: float = 0.5,
                  label: str = "dilates") -> FunctionFamily:
    """``f(x / ratio^k)`` on a 1D grid, zero beyond the box."""
    if base.grid.dim != 1:
        raise DomainError("dilate families are 1D only")
    x = base.grid.axes[0]
    members = []
    for k in range(count):
        members.append(GridFunction(
            base.grid, np.interp(x / ratio ** k, x, base.values, left=0.0, right=0.0)))
    return FunctionFamily(tuple(members), label)


def mollify(f: GridFunction, sigma: float) -> GridFunction:
    """Gaussian smoothing at scale sigma (1D); sigma below the grid
    step returns the function unchanged, matching the identity limit."""
    if f.grid.dim != 1:
        raise DomainError("mollification is 1D only")
    h = f.grid.steps[0]
    if sigma < h:
        return GridFunction(f.grid, f.values.copy())
    k = int(math.ceil(4.0 * sigma / h))
    t = np.arange(-k, k + 1) * h
    kernel = np.exp(-0.5 * (t / sigma) ** 2)
    kernel /= kernel.sum()
    # pad-then-valid keeps the output aligned with the grid even when the
    # kernel is longer than the signal, where mode="same" would not
    smoothed = np.convolve(np.pad(f.values, k), kernel, mode="valid")
    return GridFunction(f.grid, smoothed)


def mollify_family(base: GridFunction, count: int, sigma: float, ratio: float = 0.1,
                   label: str = "mollified") -> FunctionFamily:
    """Mollifications at scales ``sigma * ratio^k``; the scales collapse
    below the grid step, so the tail of the family is Cauchy by
    construction (a sampled convergent sequence).  The smoothing bias
    shrinks like the scale squared, so the default ratio keeps the
    distinct head members separated by whole rungs of the dyadic eps
    ladder used by `classify`."""
    members = tuple(mollify(base, sigma * ratio ** k) for k in range(count))
    return FunctionFamily(members, label)


# ---------------------------------------------------------------------------
# condition profiles


@dataclass(frozen=True)
class UniformBoundReport:
    per_member: tuple[float, ...]
    sup: float


@dataclass(frozen=True)
class EquicontinuityReport:
    radii: tuple[float, ...]
    profile: tuple[float, ...]
    threshold: float
    passed: bool


@dataclass(frozen=True)
class VanishingReport:
    center: tuple[float, ...]
    radii: tuple[float, ...]
    profile: tuple[float, ...]
    threshold: float
    passed: bool


@dataclass(frozen=True)
class EquiIntegrabilityReport:
    w_measures: tuple[float, ...]
    profile: tuple[float, ...]


def uniform_bound_profile(family: FunctionFamily, p: ExponentField,
                          w: WeightField | None = None,
                          rel_tol: float = 1e-10) -> UniformBoundReport:
    norms = tuple(weighted_norm(f, p, w, rel_tol=rel_tol).value for f in family.members)
    return UniformBoundReport(norms, max(norms))


def equicontinuity_profile(family: FunctionFamily, p: ExponentField,
                           w: WeightField | None, qtilde: float,
                           sweep: RadiusSweep, threshold: float,
                           rel_tol: float = 1e-10) -> EquicontinuityReport:
    """Sup over members of the weighted norm of the oscillation average,
    per sweep radius; passes when the smallest radius lands below the
    threshold."""
    profile = []
    for r in sweep.radii:
        worst = 0.0
        for f in family.members:
            osc = oscillation_average(f, qtilde, r)
            worst = max(worst, weighted_norm(osc, p, w, rel_tol=rel_tol).value)
        profile.append(worst)
    return EquicontinuityReport(sweep.radii, tuple(profile), threshold,
                                profile[0] < threshold)


def vanishing_profile(family: FunctionFamily, p: ExponentField,
                      w: WeightField | None, radii: Sequence[float],
                      threshold: float, center: Sequence[float] | None = None,
                      rel_tol: float = 1e-10) -> VanishingReport:
    """Sup over members of the norm outside balls B(center, R); the
    profile is nonincreasing in R and passes when the largest R lands
    below the threshold."""
    grid = family.grid
    center = tuple(center) if center is not None else grid.box.center
    radii = tuple(sorted(float(r) for r in radii))
    profile = []
    for R in radii:
        outside = ~ball_mask(grid, center, R)
        worst = max(weighted_norm(f.restrict(outside), p, w, rel_tol=rel_tol).value
                    for f in family.members)
        profile.append(worst)
    return VanishingReport(center, radii, tuple(profile), threshold,
                           profile[-1] < threshold)


def equi_integrability_measure(family: FunctionFamily, p: ExponentField,
                               w: WeightField, shrinking_sets: Sequence[Box],
                               rel_tol: float = 1e-10) -> EquiIntegrabilityReport:
    """Sup of ``||f chi_E||_{p,w}`` along sets of shrinking w-measure
    ``w(E) = int_E w^p(x) dx``."""
    measures = [weight_measure(w, p, E) for E in shrinking_sets]
    if any(m2 > m1 * (1.0 + 1e-9) for m1, m2 in zip(measures, measures[1:])):
        raise DomainError("shrinking sets must have nonincreasing w-measure")
    profile = []
    for E in shrinking_sets:
        from .field import box_mask
        mask = box_mask(family.grid, E)
        profile.append(max(weighted_norm(f.restrict(mask), p, w, rel_tol=rel_tol).value
                           for f in family.members))
    return EquiIntegrabilityReport(tuple(measures), tuple(profile))


# ---------------------------------------------------------------------------
# covering-net oracle


@dataclass(frozen=True)
class NetReport:
    eps: float
    size: int
    centers: tuple[int, ...]
    assignment: tuple[int, ...]
    max_distance: float


def family_distance_matrix(family: FunctionFamily, p: ExponentField,
                           w: WeightField | None = None,
                           rel_tol: float = 1e-10) -> np.ndarray:
    n = len(family)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = weighted_norm(
                family.members[i] - family.members[j], p, w, rel_tol=rel_tol).value
    return d


def eps_net_oracle(family: FunctionFamily, p: ExponentField, w: WeightField | None,
                   eps: float, rel_tol: float = 1e-10,
                   distances: np.ndarray | None = None) -> NetReport:
    """Greedy farthest-point covering net at radius eps.

    Starts from member 0, repeatedly promotes the member farthest from
    the current net until everything is within eps of a center.  The
    greedy size is within the usual factor-2 of the optimal covering
    number, which is all the plateau heuristics need.
    """
    if eps < 0.0:
        raise DomainError("eps must be nonnegative")
    d = family_distance_matrix(family, p, w, rel_tol) if distances is None else distances
    n = len(family)
    centers = [0]
    nearest = d[0].copy()
    assignment = np.zeros(n, dtype=int)
    while True:
        far = int(np.argmax(nearest))
        if nearest[far] <= eps:
            break
        centers.append(far)
        closer = d[far] < nearest
        nearest[closer] = d[far][closer]
        assignment[closer] = far
        if len(centers) == n:
            break
    return NetReport(eps, len(centers), tuple(centers),
                     tuple(int(a) for a in assignment), float(nearest.max()))


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class RKReport:
    gate: WeightConstantReport
    qtilde: float
    uniform: UniformBoundReport
    equicontinuity: EquicontinuityReport
    vanishing: VanishingReport
    diameter: float
    eps_ladder: tuple[float, ...]
    net_sizes: tuple[int, ...]
    plateau: bool
    growth: bool
    verdict: str

    @property
    def conditions_pass(self) -> bool:
        return self.equicontinuity.passed and self.vanishing.passed


def classify(family: FunctionFamily, p: ExponentField, w: WeightField,
             qtilde: float, *, cubes: DyadicCubeSet | None = None,
             eq_sweep: RadiusSweep | None = None,
             tail_radii: Sequence[float] | None = None,
             center: Sequence[float] | None = None,
             threshold_factor: float = 1e-2,
             ladder_depth: int = 8,
             rel_tol: float = 1e-10) -> RKReport:
    """Run the three-condition diagnostic plus the net oracle.

    Gate: ``w^qtilde`` must have a finite constant at exponent
    ``p/qtilde`` (HypothesisFailureError otherwise).  Thresholds for
    (ii) and (iii) default to ``threshold_factor`` times the uniform
    bound.  Verdict logic: all conditions pass and the net sizes
    plateau below the family size -> consistent-compact; a condition
    fails and the family stays fully separated at the smallest eps ->
    consistent-noncompact; anything else -> inconclusive.
    """
    grid = family.grid
    if qtilde >= p.p_minus:
        raise HypothesisFailureError(f"qtilde = {qtilde} is not below p_- = {p.p_minus}")
    gate_p = scale_exponent(p, 1.0 / qtilde)
    cubes = cubes or DyadicCubeSet(grid.box, 3)
    try:
        gate = ap_constant(w.power(qtilde), gate_p, cubes, rel_tol, allow_overflow=False)
    except OverflowToInfinityError as exc:
        raise HypothesisFailureError(f"gate weight condition fails: {exc}") from exc

    uniform = uniform_bound_profile(family, p, w, rel_tol)
    threshold = threshold_factor * uniform.sup

    if eq_sweep is None:
        h = grid.max_step
        eq_sweep = RadiusSweep(tuple(h * 2.0 ** k for k in range(7)))
    equicont = equicontinuity_profile(family, p, w, qtilde, eq_sweep, threshold, rel_tol)

    if tail_radii is None:
        diam = grid.box.diameter
        tail_radii = tuple(diam * t for t in (0.125, 0.1875, 0.25, 0.3125, 0.375, 0.4375))
    vanishing = vanishing_profile(family, p, w, tail_radii, threshold, center, rel_tol)

    d = family_distance_matrix(family, p, w, rel_tol)
    diameter = float(d.max())
    ladder = tuple(diameter * 2.0 ** (-k) for k in range(ladder_depth + 1))
    sizes = tuple(eps_net_oracle(family, p, w, eps, rel_tol, distances=d).size
                  for eps in ladder)

    n = len(family)
    plateau = len(sizes) >= 3 and sizes[-1] == sizes[-2] == sizes[-3] and sizes[-1] < n
    growth = sizes[-1] == n
    all_pass = equicont.passed and vanishing.passed
    if all_pass and plateau:
        verdict = "consistent-compact"
    elif not all_pass and growth:
        verdict = "consistent-noncompact"
    else:
        verdict = "inconclusive"
    return RKReport(gate, qtilde, uniform, equicont, vanishing, diameter,
                    ladder, sizes, plateau, growth, verdict)
