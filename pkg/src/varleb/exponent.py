"""Variable exponents: fields, duals, blends, and admissible quadruples.

An exponent field is a function ``p : box -> (0, inf)`` backed by a
closed-form evaluator.  The class P0 collects fields with ``0 < p_- <=
p_+ < inf``; the class P additionally demands ``p_- > 1`` so that the
pointwise dual ``1/p(x) + 1/p'(x) = 1`` stays finite.

Bounds policy
-------------
Every field carries certified bounds ``(p_minus, p_plus)``.  For the
primitive descriptor kinds (constant, affine, log_decay, piecewise,
grid) the bounds are exact.  Derived fields built through reciprocal
arithmetic get outer interval bounds when the interval stays positive,
and otherwise fall back to a dense scan widened by a relative 1e-6.
Outer bounds only ever widen the interval, which keeps every inequality
that consumes them (norm sandwiches, Hoelder constants, admissibility
thresholds) on the safe side.

Pointwise feasibility (for example positivity of an inverted blend
``1/p_0 = (1/p - theta/p_1) / (1 - theta)``) is checked on the field's
scan grid and reported with the violating point; strictly between scan
nodes the sign is not certified, which is the usual grid-scale caveat.

Infinite exponents are not representable as fields; the only place
``inf`` is accepted is the outer integrability parameter ``s`` of a
quadruple, which enters formulas through ``1/s = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, RangeError, SchemaError, SpecMismatchError
from .field import Box, Grid

DEFAULT_SCAN_1D = 4096
DEFAULT_SCAN_2D = 256
_SCAN_WIDEN = 1e-6


def default_scan_shape(box: Box) -> tuple[int, ...]:
    return (DEFAULT_SCAN_1D,) if box.dim == 1 else (DEFAULT_SCAN_2D,) * box.dim


@dataclass(frozen=True)
class ExponentField:
    """Exponent function on a box with certified bounds."""

    box: Box
    # fn takes part in equality/hash so that value caches keyed by the
    # field never identify two different formulas with equal bounds
    fn: Callable[[np.ndarray], np.ndarray]
    p_minus: float
    p_plus: float
    scan_shape: tuple[int, ...]
    descriptor: dict | None = field(default=None, compare=False)
    p_infinity: float | None = None

    def __post_init__(self):
        if not (0.0 < self.p_minus <= self.p_plus < math.inf):
            raise RangeError(
                f"exponent bounds [{self.p_minus}, {self.p_plus}] leave the class P0"
            )

    # -- evaluation --------------------------------------------------

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.box.dim:
            raise DomainError("point dimension does not match exponent domain")
        return np.asarray(self.fn(pts), dtype=float)

    def values_on(self, grid: Grid) -> np.ndarray:
        if grid.box != self.box:
            raise DomainError("grid box does not match exponent domain")
        return _values_on(self, grid)

    @property
    def scan_grid(self) -> Grid:
        return Grid(self.box, self.scan_shape)

    # -- classes -----------------------------------------------------

    @property
    def in_P(self) -> bool:
        return self.p_minus > 1.0

    def require_P(self, what: str = "exponent") -> None:
        if not self.in_P:
            raise RangeError(f"{what} needs p_- > 1, got p_- = {self.p_minus}")

    @property
    def is_constant(self) -> bool:
        return self.p_minus == self.p_plus

    # -- constructors ------------------------------------------------

    @classmethod
    def constant(cls, box: Box, value: float, scan_shape=None) -> "ExponentField":
        value = float(value)
        return cls(
            box,
            lambda pts, v=value: np.full(pts.shape[:-1], v),
            value,
            value,
            scan_shape or default_scan_shape(box),
            descriptor={"kind": "constant", "box": box.as_pairs(), "value": value},
            p_infinity=value,
        )

    @classmethod
    def affine(cls, box: Box, base: float, slopes: Sequence[float], scan_shape=None) -> "ExponentField":
        slopes = tuple(float(s) for s in slopes)
        if len(slopes) != box.dim:
            raise SchemaError("affine exponent needs one slope per axis")
        corners = [()]
        for a, b in zip(box.lo, box.hi):
            corners = [c + (v,) for c in corners for v in (a, b)]
        corner_vals = [base + sum(s * x for s, x in zip(slopes, c)) for c in corners]

        def fn(pts, base=float(base), slopes=slopes):
            return base + sum(s * pts[..., i] for i, s in enumerate(slopes))

        return cls(
            box, fn, min(corner_vals), max(corner_vals),
            scan_shape or default_scan_shape(box),
            descriptor={"kind": "affine", "box": box.as_pairs(), "base": float(base),
                        "slopes": list(slopes)},
        )

    @classmethod
    def log_decay(cls, box: Box, p_infinity: float, amplitude: float, scan_shape=None) -> "ExponentField":
        """``p(x) = p_inf + amplitude / log(e + |x|)``, the model field
        with exact log-Hoelder decay at infinity."""
        p_inf, amp = float(p_infinity), float(amplitude)
        r_min, r_max = _radial_range(box)
        g = lambda r: p_inf + amp / math.log(math.e + r)
        lo, hi = sorted((g(r_min), g(r_max)))

        def fn(pts, p_inf=p_inf, amp=amp):
            r = np.sqrt(np.sum(pts ** 2, axis=-1))
            return p_inf + amp / np.log(math.e + r)

        return cls(
            box, fn, lo, hi, scan_shape or default_scan_shape(box),
            descriptor={"kind": "log_decay", "box": box.as_pairs(),
                        "p_infinity": p_inf, "amplitude": amp},
            p_infinity=p_inf,
        )

    @classmethod
    def piecewise(cls, box: Box, breakpoints: Sequence[float], values: Sequence[float],
                  scan_shape=None) -> "ExponentField":
        """Step function along axis 0: ``values[i]`` on
        ``[breakpoints[i-1], breakpoints[i])``."""
        breaks = tuple(float(b) for b in breakpoints)
        vals = tuple(float(v) for v in values)
        if len(vals) != len(breaks) + 1:
            raise SchemaError("piecewise exponent needs len(values) == len(breakpoints) + 1")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise SchemaError("piecewise breakpoints must increase strictly")

        def fn(pts, breaks=np.array(breaks), vals=np.array(vals)):
            idx = np.searchsorted(breaks, pts[..., 0], side="right")
            return vals[idx]

        return cls(
            box, fn, min(vals), max(vals), scan_shape or default_scan_shape(box),
            descriptor={"kind": "piecewise", "box": box.as_pairs(),
                        "breakpoints": list(breaks), "values": list(vals)},
        )

    @classmethod
    def from_grid(cls, box: Box, values, scan_shape=None) -> "ExponentField":
        """Multilinear interpolation of node values on the box."""
        arr = np.asarray(values, dtype=float)
        if arr.ndim != box.dim:
            raise SchemaError("grid exponent values must match box dimension")
        sample = Grid(box, arr.shape)

        def fn(pts, arr=arr, sample=sample):
            return _multilinear(sample, arr, pts)

        return cls(
            box, fn, float(arr.min()), float(arr.max()),
            scan_shape or default_scan_shape(box),
            descriptor={"kind": "grid", "box": box.as_pairs(),
                        "resolution": list(arr.shape), "values": arr.tolist()},
        )

    @classmethod
    def from_descriptor(cls, desc: dict) -> "ExponentField":
        if not isinstance(desc, dict) or "kind" not in desc or "box" not in desc:
            raise SchemaError("exponent descriptor needs 'kind' and 'box'")
        box = Box.from_pairs(desc["box"])
        scan = tuple(desc["scan_resolution"]) if "scan_resolution" in desc else None
        kind = desc["kind"]
        known = {"kind", "box", "scan_resolution"}
        if kind == "constant":
            _strict(desc, known | {"value"})
            return cls.constant(box, desc["value"], scan)
        if kind == "affine":
            _strict(desc, known | {"base", "slopes"})
            return cls.affine(box, desc["base"], desc["slopes"], scan)
        if kind == "log_decay":
            _strict(desc, known | {"p_infinity", "amplitude"})
            return cls.log_decay(box, desc["p_infinity"], desc["amplitude"], scan)
        if kind == "piecewise":
            _strict(desc, known | {"breakpoints", "values"})
            return cls.piecewise(box, desc["breakpoints"], desc["values"], scan)
        if kind == "grid":
            _strict(desc, known | {"values", "resolution"})
            arr = np.asarray(desc["values"], dtype=float)
            if "resolution" in desc:
                arr = arr.reshape(tuple(desc["resolution"]))
            return cls.from_grid(box, arr, scan)
        if kind == "shifted_reciprocal":
            # 1/result = 1/inner - gamma; how an output exponent with a
            # constant smoothing offset from the input is written down
            _strict(desc, known | {"inner", "gamma"})
            inner = cls.from_descriptor({**desc["inner"], "box": desc["box"]})
            return reciprocal_affine((inner,), (1.0,), -float(desc["gamma"]),
                                     what="shifted reciprocal exponent")
        raise SchemaError(f"unknown exponent kind '{kind}'")


def _strict(desc: dict, allowed: set[str]) -> None:
    unknown = set(desc) - allowed
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)} in exponent descriptor")


def _radial_range(box: Box) -> tuple[float, float]:
    r2_min = 0.0
    r2_max = 0.0
    for a, b in zip(box.lo, box.hi):
        r2_max += max(a * a, b * b)
        if a > 0.0:
            r2_min += a * a
        elif b < 0.0:
            r2_min += b * b
    return math.sqrt(r2_min), math.sqrt(r2_max)


def _multilinear(sample: Grid, arr: np.ndarray, pts: np.ndarray) -> np.ndarray:
    out = None
    idx_frac = []
    for axis in range(sample.dim):
        ax = sample.axes[axis]
        t = (pts[..., axis] - ax[0]) / (ax[-1] - ax[0]) * (len(ax) - 1)
        t = np.clip(t, 0.0, len(ax) - 1)
        i0 = np.minimum(t.astype(int), len(ax) - 2)
        idx_frac.append((i0, t - i0))
    if sample.dim == 1:
        i0, f = idx_frac[0]
        out = arr[i0] * (1 - f) + arr[i0 + 1] * f
    else:
        (i0, fx), (j0, fy) = idx_frac
        out = (arr[i0, j0] * (1 - fx) * (1 - fy) + arr[i0 + 1, j0] * fx * (1 - fy)
               + arr[i0, j0 + 1] * (1 - fx) * fy + arr[i0 + 1, j0 + 1] * fx * fy)
    return out


@lru_cache(maxsize=256)
def _values_on(p: ExponentField, grid: Grid) -> np.ndarray:
    out = np.asarray(p.fn(grid.coords), dtype=float)
    out = np.broadcast_to(out, grid.shape).copy()
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# reciprocal arithmetic


def reciprocal_affine(fields: Sequence[ExponentField], coeffs: Sequence[float],
                      offset: float = 0.0, p_infinity: float | None = None,
                      what: str = "derived exponent") -> ExponentField:
    """Field with ``1/p_new(x) = offset + sum_j coeffs[j] / p_j(x)``.

    Single positive-coefficient terms give exact bounds (the transform
    is monotone); general combinations get outer interval bounds, with
    a widened scan as fallback when the interval cannot certify
    positivity.  A scan that actually exhibits a nonpositive reciprocal
    raises RangeError with the violating point.
    """
    fields = tuple(fields)
    coeffs = tuple(float(c) for c in coeffs)
    if not fields or len(fields) != len(coeffs):
        raise DomainError("need one coefficient per field")
    box = fields[0].box
    for f in fields[1:]:
        if f.box != box:
            raise DomainError(f"{what}: component fields live on different boxes")

    r_lo = r_hi = float(offset)
    for f, c in zip(fields, coeffs):
        t1, t2 = c / f.p_plus, c / f.p_minus
        r_lo += min(t1, t2)
        r_hi += max(t1, t2)

    scan_shape = tuple(max(s) for s in zip(*(f.scan_shape for f in fields)))

    def fn(pts, fields=fields, coeffs=coeffs, offset=offset):
        recip = np.full(pts.shape[:-1], float(offset))
        for f, c in zip(fields, coeffs):
            recip = recip + c / f(pts)
        return 1.0 / recip

    if r_lo > 0.0:
        lo, hi = 1.0 / r_hi, 1.0 / r_lo
    else:
        scan = Grid(box, scan_shape)
        with np.errstate(divide="ignore"):
            recip = np.full(scan.shape, float(offset))
            for f, c in zip(fields, coeffs):
                recip = recip + c / f.values_on(scan)
        worst = int(np.argmin(recip))
        if recip.reshape(-1)[worst] <= 0.0:
            point = tuple(scan.coords.reshape(-1, scan.dim)[worst])
            raise RangeError(f"{what} has nonpositive reciprocal", point=point)
        lo = (1.0 / float(recip.max())) * (1.0 - _SCAN_WIDEN)
        hi = (1.0 / float(recip.min())) * (1.0 + _SCAN_WIDEN)

    if p_infinity is None and all(f.p_infinity is not None for f in fields):
        r_inf = offset + sum(c / f.p_infinity for f, c in zip(fields, coeffs))
        if r_inf > 0.0:
            p_infinity = 1.0 / r_inf

    return ExponentField(box, fn, lo, hi, scan_shape, p_infinity=p_infinity)


def dual_exponent(p: ExponentField) -> ExponentField:
    """Pointwise conjugate ``p'(x) = p(x) / (p(x) - 1)``; needs p in P."""
    p.require_P("dual exponent")
    return reciprocal_affine((p,), (-1.0,), 1.0, what="dual exponent")


def harmonic_combine(p_vec: Sequence[ExponentField]) -> ExponentField:
    """``1/p = sum_j 1/p_j``, the natural exponent of an m-fold product."""
    if not p_vec:
        raise DomainError("harmonic_combine needs at least one field")
    return reciprocal_affine(tuple(p_vec), (1.0,) * len(p_vec), 0.0,
                             what="harmonic combination")


def theta_blend(p0: ExponentField, p1: ExponentField, theta: float) -> ExponentField:
    """``1/p_theta = (1-theta)/p_0 + theta/p_1`` for theta in [0, 1]."""
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    return reciprocal_affine((p0, p1), (1.0 - theta, theta), 0.0, what="theta blend")


def theta_invert(p: ExponentField, p1: ExponentField, theta: float) -> ExponentField:
    """Solve the blend for the missing endpoint:
    ``1/p_0 = (1/p - theta/p_1) / (1 - theta)``, theta in [0, 1)."""
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"theta must lie in [0, 1) for inversion, got {theta}")
    return reciprocal_affine((p, p1), (1.0 / (1.0 - theta), -theta / (1.0 - theta)), 0.0,
                             what="inverted blend endpoint")


def scale_exponent(p: ExponentField, factor: float) -> ExponentField:
    """``p(x) * factor``, used for powers ``|f|^s`` and ratios ``p/qtilde``."""
    if factor <= 0.0:
        raise DomainError("scale factor must be positive")
    return reciprocal_affine((p,), (1.0 / factor,), 0.0, what="scaled exponent")


def nu_exponent(q: ExponentField, s: float) -> ExponentField:
    """``1/(1/q - 1/s)``: the norm exponent carried by a product weight."""
    inv_s = 0.0 if math.isinf(s) else 1.0 / s
    if q.p_plus >= s:
        raise RangeError(f"need q_+ < s, got q_+ = {q.p_plus}, s = {s}")
    return reciprocal_affine((q,), (1.0,), -inv_s, what="nu exponent")


def component_exponent(p_j: ExponentField, r_j: float) -> ExponentField:
    """``1/(1/r_j - 1/p_j)``: the norm exponent of an inverse weight factor."""
    if not 0.0 < r_j < p_j.p_minus:
        raise RangeError(f"need 0 < r_j < (p_j)_-, got r_j = {r_j}, (p_j)_- = {p_j.p_minus}")
    return reciprocal_affine((p_j,), (-1.0,), 1.0 / r_j, what="component exponent")


# ---------------------------------------------------------------------------
# log-Hoelder continuity estimates


@dataclass(frozen=True)
class LogHolderReport:
    c0_estimate: float
    c_infinity_estimate: float
    pairs_used: int
    p_infinity: float
    p_infinity_declared: bool

    @property
    def c_log(self) -> float:
        return max(self.c0_estimate, self.c_infinity_estimate)


def log_holder_estimate(p: ExponentField, budget: int = 2000, seed: int = 0) -> LogHolderReport:
    """Sampled lower estimates of the log-Hoelder constants.

    The local constant is ``sup |p(x)-p(y)| * (-log|x-y|)`` over pairs
    with ``|x-y| < 1/2``; the decay constant is ``sup |p(x)-p_inf| *
    log(e+|x|)``.  Estimates are suprema over a deterministic pair
    sample extended by a seeded stream, so a larger budget never lowers
    them.  Fields without a declared limit use the value at the far
    corner of the box as the ``p_inf`` proxy.
    """
    if budget < 1:
        raise DomainError("budget must be positive")
    box = p.box
    diam = box.diameter
    corners = np.array(np.meshgrid(*(np.array([a, b]) for a, b in zip(box.lo, box.hi)),
                                   indexing="ij")).reshape(box.dim, -1).T
    r_corners = np.sqrt(np.sum(corners ** 2, axis=1))
    far_corner = corners[int(np.argmax(r_corners))]
    if p.p_infinity is not None:
        p_inf, declared = float(p.p_infinity), True
    else:
        p_inf, declared = float(p(np.array([far_corner]))[0]), False

    # structured pairs: dyadic separations along each axis from fixed anchors
    anchors = [np.array(box.center)] + [0.75 * np.array(box.center) + 0.25 * c for c in corners]
    xs, ys = [], []
    for anchor in anchors:
        for k in range(1, 24):
            d = diam * 2.0 ** (-k)
            for axis in range(box.dim):
                step = np.zeros(box.dim)
                step[axis] = d
                y = np.clip(anchor + step, box.lo, box.hi)
                xs.append(anchor)
                ys.append(y)

    rng = np.random.default_rng(seed)
    draws = rng.uniform(size=(budget, 2 * box.dim + 1))
    x_rand = np.array(box.lo) + draws[:, : box.dim] * np.array(box.widths)
    direction = draws[:, box.dim: 2 * box.dim] - 0.5
    norms = np.maximum(np.sqrt(np.sum(direction ** 2, axis=1)), 1e-12)
    direction = direction / norms[:, None]
    d_rand = diam * np.exp(draws[:, -1] * (math.log(1e-9) - math.log(0.5)) + math.log(0.5))
    y_rand = np.clip(x_rand + direction * d_rand[:, None], box.lo, box.hi)
    xs.extend(x_rand)
    ys.extend(y_rand)

    X = np.asarray(xs)
    Y = np.asarray(ys)
    dist = np.sqrt(np.sum((X - Y) ** 2, axis=1))
    px = p(X)
    py = p(Y)
    near = (dist > 0.0) & (dist < 0.5)
    c0 = float(np.max(np.abs(px - py)[near] * (-np.log(dist[near])))) if near.any() else 0.0
    r_all = np.sqrt(np.sum(X ** 2, axis=1))
    c_inf = float(np.max(np.abs(px - p_inf) * np.log(math.e + r_all)))
    return LogHolderReport(c0, c_inf, int(near.sum()), p_inf, declared)


# ---------------------------------------------------------------------------
# admissible quadruples


@dataclass(frozen=True)
class QuadrupleSpec:
    """Input/output exponent data ``(p_vec, q, r_vec, s)`` of an
    m-linear bound.  ``s = inf`` is allowed and means ``1/s = 0``."""

    p_vec: tuple[ExponentField, ...]
    q: ExponentField
    r_vec: tuple[float, ...]
    s: float
    # a declared gamma is validated against the derived profile; left
    # as None the profile alone decides admissibility
    gamma_declared: float | None = None

    def __post_init__(self):
        if not self.p_vec:
            raise SpecMismatchError("quadruple needs at least one input exponent")
        if len(self.r_vec) != len(self.p_vec):
            raise SpecMismatchError("r_vec length must match p_vec length")
        box = self.q.box
        for p in self.p_vec:
            if p.box != box:
                raise DomainError("quadruple exponents live on different boxes")
        for r in self.r_vec:
            if not (0.0 < r < math.inf):
                raise RangeError(f"r components must be finite and positive, got {r}")
        if not self.s > 0.0:
            raise RangeError(f"s must be positive (inf allowed), got {self.s}")

    @property
    def m(self) -> int:
        return len(self.p_vec)

    @property
    def box(self) -> Box:
        return self.q.box

    @property
    def r(self) -> float:
        return 1.0 / sum(1.0 / rj for rj in self.r_vec)

    @property
    def p_combined(self) -> ExponentField:
        return harmonic_combine(self.p_vec)

    def gamma_profile(self, grid: Grid | None = None) -> np.ndarray:
        grid = grid or self.q.scan_grid
        return 1.0 / self.p_combined.values_on(grid) - 1.0 / self.q.values_on(grid)

    @property
    def gamma(self) -> float:
        prof = self.gamma_profile()
        return float(0.5 * (prof.min() + prof.max()))


@dataclass(frozen=True)
class QuadrupleVerdict:
    admissible: bool
    proper: bool
    gamma: float
    clauses: dict
    failures: tuple[str, ...]


def validate_quadruple(spec: QuadrupleSpec, tol: float = 1e-9,
                       lh_budget: int = 2000, lh_threshold: float = 10.0) -> QuadrupleVerdict:
    """Check m-admissibility clause by clause.

    Admissible means: every ``r_j < (p_j)_-``, ``q_+ < s``, and
    ``1/p - 1/q`` is a nonnegative constant gamma (within ``tol`` on
    the scan grid).  Proper additionally demands that every exponent
    pass the log-Hoelder estimate below ``lh_threshold``.
    """
    clauses: dict = {}
    failures: list[str] = []

    ok = all(rj < p.p_minus for rj, p in zip(spec.r_vec, spec.p_vec))
    clauses["r_below_p_minus"] = ok
    if not ok:
        bad = [(j, rj, p.p_minus) for j, (rj, p) in enumerate(zip(spec.r_vec, spec.p_vec))
               if rj >= p.p_minus]
        failures.append(f"r_j < (p_j)_- fails at components {bad}")

    ok = spec.q.p_plus < spec.s
    clauses["q_plus_below_s"] = ok
    if not ok:
        failures.append(f"q_+ = {spec.q.p_plus} is not below s = {spec.s}")

    prof = spec.gamma_profile()
    gamma = float(0.5 * (prof.min() + prof.max()))
    spread = float(prof.max() - prof.min())
    clauses["gamma_constant"] = spread <= tol
    if spread > tol:
        failures.append(f"1/p - 1/q varies by {spread:.3e} (> tol {tol:.1e})")
    clauses["gamma_nonnegative"] = gamma >= -tol
    if gamma < -tol:
        failures.append(f"gamma = {gamma:.3e} is negative")
    if spec.gamma_declared is not None:
        ok = abs(gamma - spec.gamma_declared) <= tol
        clauses["gamma_matches_declared"] = ok
        if not ok:
            failures.append(f"derived gamma {gamma:.6g} does not match the "
                            f"declared value {spec.gamma_declared:.6g}")

    lh_reports = [log_holder_estimate(f, lh_budget) for f in (*spec.p_vec, spec.q)]
    proper = all(r.c_log <= lh_threshold for r in lh_reports)
    clauses["log_holder"] = proper
    if not proper:
        worst = max(r.c_log for r in lh_reports)
        failures.append(f"log-Hoelder estimate {worst:.3g} exceeds threshold {lh_threshold:g}")

    admissible = (clauses["r_below_p_minus"] and clauses["q_plus_below_s"]
                  and clauses["gamma_constant"] and clauses["gamma_nonnegative"]
                  and clauses.get("gamma_matches_declared", True))
    return QuadrupleVerdict(admissible, proper, max(gamma, 0.0), clauses, tuple(failures))


def blend_quadruple(spec0: QuadrupleSpec, spec1: QuadrupleSpec, theta: float) -> QuadrupleSpec:
    """Componentwise theta blend of two quadruples sharing (r_vec, s)."""
    if spec0.m != spec1.m:
        raise SpecMismatchError("quadruples have different arity")
    if spec0.r_vec != spec1.r_vec or spec0.s != spec1.s:
        raise SpecMismatchError("blend requires shared (r_vec, s)")
    if spec0.box != spec1.box:
        raise DomainError("quadruples live on different boxes")
    p_vec = tuple(theta_blend(a, b, theta) for a, b in zip(spec0.p_vec, spec1.p_vec))
    return QuadrupleSpec(p_vec, theta_blend(spec0.q, spec1.q, theta), spec0.r_vec, spec0.s)


def two_to_one_data(spec: QuadrupleSpec):
    """The scalar ``a`` and field ``t`` that turn a 1-linear two-index
    constant into a classical one: ``a = 1/(1/r - 1/s - gamma)`` and
    ``t = (1/r - 1/s - gamma) / (1/q - 1/s)``, so that ``a t = 1/(1/q -
    1/s)`` and ``a t' = 1/(1/r - 1/p)``."""
    if spec.m != 1:
        raise SpecMismatchError("two-to-one reduction is stated for m = 1")
    inv_s = 0.0 if math.isinf(spec.s) else 1.0 / spec.s
    gamma = spec.gamma
    denom = 1.0 / spec.r - inv_s - gamma
    if denom <= 0.0:
        raise RangeError(f"need 1/r - 1/s - gamma > 0, got {denom}")
    a = 1.0 / denom
    # 1/t = a * (1/q - 1/s)
    t = reciprocal_affine((spec.q,), (a,), -a * inv_s, what="two-to-one exponent t")
    t.require_P("two-to-one exponent t")
    return a, t
