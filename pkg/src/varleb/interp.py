"""Empirical interpolation bounds and extrapolation of weighted spaces.

An m-linear operator certified at two endpoint space tuples
``(L^{p_ij}(w_ij)) -> L^{q_i}(v_i)`` with bounds ``M_i`` is expected to
satisfy the blended bound

    ||T(f_1, .., f_m)||_{q_th, v_th}
        <= M_0^(1-th) M_1^th  prod_j ||f_j||_{p_th_j, w_th_j}

where reciprocal exponents and weights blend geometrically at parameter
``th``.  This module certifies the endpoint bounds over a random corpus
(inflating a supplied ``M_i`` when the corpus exceeds it), then asserts
the blended inequality trial by trial, with a small multiplicative
slack for norm-solver tolerance.  A mixed-norm variant runs the same
pipeline on difference fields ``S(x, y) = T(x) - T(x + y)``.

The extrapolation half inverts the blend: given a target space tuple, a
second endpoint, and ``th``, it reconstructs the other endpoint (spaces
and weights), validates it, and round-trips the blend back to the
target.  The workflow driver chains that construction with a
compactness classification of the operator outputs at the target space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (ArityMismatchError, DomainError, RangeError,
                     SchemaError, SpecMismatchError)
from .exponent import (ExponentField, QuadrupleSpec, QuadrupleVerdict,
                       blend_quadruple, theta_blend, theta_invert,
                       validate_quadruple)
from .field import Box, DyadicCubeSet, Grid, GridFunction, WeightField
from .maximal import ball_mean
from .norms import mixed_norm, weighted_norm
from .rk import FunctionFamily, RKReport, classify
from .weights import WeightConstantReport, multilinear_constant


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True)
class OperatorSpec:
    """A pointwise-defined m-linear operator on grid functions.

    kinds:
      product              prod_j f_j(x)
      ball_average_product mean of prod_j f_j over B(x, radius)
      fractional_kernel    int (sum_j |x - y_j|)^(alpha - m) prod f_j(y_j) dy
                           (1D, m <= 2, 0 < alpha < m, diagonal cell dropped)
    """
    kind: str
    arity: int
    alpha: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("product", "ball_average_product", "fractional_kernel"):
            raise SchemaError(f"unknown operator kind '{self.kind}'")
        if self.arity < 1:
            raise SchemaError("operator arity must be at least 1")
        if self.kind == "fractional_kernel":
            if self.arity > 2:
                raise SchemaError("fractional kernels are implemented for m <= 2")
            if not 0.0 < self.alpha < self.arity:
                raise RangeError(f"alpha must lie in (0, {self.arity}), got {self.alpha}")
        if self.kind == "ball_average_product" and self.radius <= 0.0:
            raise SchemaError("ball averaging needs a positive radius")

    @property
    def gamma(self) -> float:
        """Smoothing order 1/p - 1/q the operator is expected to realize."""
        return self.alpha if self.kind == "fractional_kernel" else 0.0


def apply_operator(op: OperatorSpec, fs: Sequence[GridFunction]) -> GridFunction:
    if len(fs) != op.arity:
        raise ArityMismatchError(f"operator takes {op.arity} inputs, got {len(fs)}")
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid:
            raise DomainError("operator inputs live on different grids")

    if op.kind == "product":
        vals = fs[0].values.copy()
        for f in fs[1:]:
            vals = vals * f.values
        return GridFunction(grid, vals)

    if op.kind == "ball_average_product":
        prod = fs[0]
        for f in fs[1:]:
            prod = prod * f
        return ball_mean(prod, op.radius)

    if grid.dim != 1:
        raise DomainError("fractional kernels are 1D only")
    x = grid.axes[0]
    qw = grid.quad_weights
    if op.arity == 1:
        dist = np.abs(x[:, None] - x[None, :])
        np.fill_diagonal(dist, 1.0)
        kernel = dist ** (op.alpha - 1.0)
        np.fill_diagonal(kernel, 0.0)
        return GridFunction(grid, kernel @ (fs[0].values * qw))
    a = fs[0].values * qw
    b = fs[1].values * qw
    out = np.empty_like(x)
    power = op.alpha - 2.0
    for i in range(x.size):
        d = np.abs(x[i] - x)
        d[i] = 1.0
        pair = d[:, None] + d[None, :]
        pair[i, i] = np.inf  # the only genuinely singular cell
        out[i] = a @ (pair ** power) @ b
    return GridFunction(grid, out)


# ---------------------------------------------------------------------------
# endpoint spaces and the blended bound


@dataclass(frozen=True)
class EndpointSpace:
    """Input exponents/weights and the output space of one endpoint."""
    p_vec: tuple[ExponentField, ...]
    q: ExponentField
    w_vec: tuple[WeightField, ...]
    v: WeightField
    bound: float | None = None

    def __post_init__(self):
        if len(self.p_vec) != len(self.w_vec):
            raise ArityMismatchError("one weight per input exponent is required")
        grid = self.v.grid
        for w in self.w_vec:
            if w.grid != grid:
                raise DomainError("endpoint weights live on different grids")
        for p in self.p_vec + (self.q,):
            if p.box != grid.box:
                raise DomainError("endpoint exponents live on a different box")

    @property
    def m(self) -> int:
        return len(self.p_vec)

    @property
    def grid(self) -> Grid:
        return self.v.grid


def blend_spaces(space0: EndpointSpace, space1: EndpointSpace,
                 theta: float) -> EndpointSpace:
    if space0.m != space1.m:
        raise ArityMismatchError("endpoints have different arity")
    if space0.grid != space1.grid:
        raise DomainError("endpoints live on different grids")
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    p_vec = tuple(theta_blend(a, b, theta) for a, b in zip(space0.p_vec, space1.p_vec))
    q = theta_blend(space0.q, space1.q, theta)
    w_vec = tuple(a.power(1.0 - theta) * b.power(theta)
                  for a, b in zip(space0.w_vec, space1.w_vec))
    v = space0.v.power(1.0 - theta) * space1.v.power(theta)
    return EndpointSpace(p_vec, q, w_vec, v)


@dataclass(frozen=True)
class EndpointCertificate:
    supplied: float | None
    max_ratio: float
    bound: float
    inflated: bool


@dataclass(frozen=True)
class Violation:
    trial: int
    ratio: float
    support_cells: int


@dataclass(frozen=True)
class InterpolationReport:
    theta: float
    trials: int
    certificates: tuple[EndpointCertificate, EndpointCertificate]
    worst_ratio: float
    violations: tuple[Violation, ...]
    slack: float

    @property
    def passed(self) -> bool:
        return not self.violations


def _draw_corpus(grid: Grid, m: int, trials: int, seed: int):
    rng = np.random.default_rng(seed)
    from .field import random_simple_function
    return [tuple(random_simple_function(grid, rng) for _ in range(m))
            for _ in range(trials)]


def _certify(space: EndpointSpace, corpus, outputs, norm_out, safety: float,
             rel_tol: float) -> EndpointCertificate:
    worst = 0.0
    for fs, Tf in zip(corpus, outputs):
        den = 1.0
        for f, p, w in zip(fs, space.p_vec, space.w_vec):
            den *= weighted_norm(f, p, w, rel_tol=rel_tol).value
        if den <= 0.0:
            continue
        worst = max(worst, norm_out(Tf, space) / den)
    if space.bound is not None and worst <= space.bound:
        return EndpointCertificate(space.bound, worst, space.bound, False)
    return EndpointCertificate(space.bound, worst, safety * worst,
                               space.bound is not None)


def _shrink_witness(op: OperatorSpec, fs, violates) -> tuple:
    """Chop supports in half while the inequality still fails, to hand
    back the smallest witness the reduction finds."""
    fs = list(fs)
    improved = True
    while improved:
        improved = False
        for j, f in enumerate(fs):
            support = np.flatnonzero(np.abs(f.values).reshape(-1))
            if support.size < 2:
                continue
            for half in (support[:support.size // 2], support[support.size // 2:]):
                vals = np.zeros(f.values.size)
                vals[half] = f.values.reshape(-1)[half]
                cand = GridFunction(f.grid, vals.reshape(f.grid.shape))
                if cand.values.any():
                    trial = fs[:j] + [cand] + fs[j + 1:]
                    if violates(tuple(trial)):
                        fs = trial
                        improved = True
                        break
    return tuple(fs)


def verify_interpolation_bound(op: OperatorSpec, space0: EndpointSpace,
                               space1: EndpointSpace, theta: float,
                               trials: int = 100, seed: int = 0,
                               safety: float = 1.05, slack: float = 1e-6,
                               rel_tol: float = 1e-10) -> InterpolationReport:
    """Certify both endpoints over one random corpus, then assert the
    blended bound on every corpus member.

    Endpoint bounds are the supplied values inflated to ``safety``
    times the observed worst ratio when the corpus beats them.  The
    blended inequality then has no free constant left; violations
    beyond ``1 + slack`` are reported with shrunken witnesses.
    """
    if op.arity != space0.m:
        raise ArityMismatchError("operator arity does not match the endpoint spaces")
    blended = blend_spaces(space0, space1, theta)
    grid = blended.grid
    corpus = _draw_corpus(grid, op.arity, trials, seed)
    outputs = [apply_operator(op, fs) for fs in corpus]

    def norm_out(Tf, space):
        return weighted_norm(Tf, space.q, space.v, rel_tol=rel_tol).value

    certs = (_certify(space0, corpus, outputs, norm_out, safety, rel_tol),
             _certify(space1, corpus, outputs, norm_out, safety, rel_tol))
    m_blend = certs[0].bound ** (1.0 - theta) * certs[1].bound ** theta

    def ratio_of(fs, Tf=None):
        Tf = apply_operator(op, fs) if Tf is None else Tf
        den = m_blend
        for f, p, w in zip(fs, blended.p_vec, blended.w_vec):
            den *= weighted_norm(f, p, w, rel_tol=rel_tol).value
        if den <= 0.0:
            return 0.0
        return norm_out(Tf, blended) / den

    worst = 0.0
    violations = []
    for t, (fs, Tf) in enumerate(zip(corpus, outputs)):
        ratio = ratio_of(fs, Tf)
        worst = max(worst, ratio)
        if ratio > 1.0 + slack:
            small = _shrink_witness(op, fs, lambda g: ratio_of(g) > 1.0 + slack)
            cells = sum(int(np.count_nonzero(f.values)) for f in small)
            violations.append(Violation(t, ratio, cells))
    return InterpolationReport(theta, trials, certs, worst, tuple(violations), slack)


# ---------------------------------------------------------------------------
# mixed-norm variant on difference fields


@dataclass(frozen=True)
class MixedInterpolationReport:
    theta: float
    qtilde: float
    offsets: int
    trials: int
    certificates: tuple[EndpointCertificate, EndpointCertificate]
    worst_ratio: float
    violations: tuple[Violation, ...]
    slack: float

    @property
    def passed(self) -> bool:
        return not self.violations


def difference_field(Tf: GridFunction, offset_count: int) -> GridFunction:
    """``S(x, y) = T(x) - T(x + y)`` for node-aligned offsets
    ``y = k h``, ``|k| <= offset_count``, zero extension past the box."""
    grid = Tf.grid
    if grid.dim != 1:
        raise DomainError("difference fields start from 1D outputs")
    if offset_count < 1:
        raise DomainError("need at least one offset")
    h = grid.steps[0]
    n = grid.size
    padded = np.concatenate([np.zeros(offset_count), Tf.values, np.zeros(offset_count)])
    cols = [Tf.values - padded[offset_count + k + np.arange(n)]
            for k in range(-offset_count, offset_count + 1)]
    ybox = Box((grid.box.lo[0], -offset_count * h), (grid.box.hi[0], offset_count * h))
    ygrid = Grid(ybox, (n, 2 * offset_count + 1))
    return GridFunction(ygrid, np.stack(cols, axis=1))


def verify_mixed_interpolation_bound(op: OperatorSpec, space0: EndpointSpace,
                                     space1: EndpointSpace, theta: float,
                                     qtilde: float, offset_count: int = 8,
                                     trials: int = 100, seed: int = 0,
                                     safety: float = 1.05, slack: float = 1e-6,
                                     rel_tol: float = 1e-10) -> MixedInterpolationReport:
    """Blended bound for ``x -> ||S(x, .)||_{qtilde}`` where S differences
    the operator output over node-aligned offsets; requires ``qtilde``
    below both endpoint output lower bounds."""
    limit = min(space0.q.p_minus, space1.q.p_minus)
    if not 0.0 < qtilde < limit:
        raise DomainError(f"qtilde must lie in (0, {limit}), got {qtilde}")
    if op.arity != space0.m:
        raise ArityMismatchError("operator arity does not match the endpoint spaces")
    blended = blend_spaces(space0, space1, theta)
    grid = blended.grid
    corpus = _draw_corpus(grid, op.arity, trials, seed)
    fields = [difference_field(apply_operator(op, fs), offset_count) for fs in corpus]

    def norm_out(S, space):
        return mixed_norm(S, qtilde, space.q, space.v, rel_tol=rel_tol).value

    certs = (_certify(space0, corpus, fields, norm_out, safety, rel_tol),
             _certify(space1, corpus, fields, norm_out, safety, rel_tol))
    m_blend = certs[0].bound ** (1.0 - theta) * certs[1].bound ** theta

    worst = 0.0
    violations = []
    for t, (fs, S) in enumerate(zip(corpus, fields)):
        den = m_blend
        for f, p, w in zip(fs, blended.p_vec, blended.w_vec):
            den *= weighted_norm(f, p, w, rel_tol=rel_tol).value
        if den <= 0.0:
            continue
        ratio = norm_out(S, blended) / den
        worst = max(worst, ratio)
        if ratio > 1.0 + slack:
            violations.append(Violation(t, ratio, -1))
    return MixedInterpolationReport(theta, qtilde, offset_count, trials, certs,
                                    worst, tuple(violations), slack)


# ---------------------------------------------------------------------------
# extrapolation: rebuild the missing endpoint


@dataclass(frozen=True)
class ExtrapolationBuild:
    theta: float
    spec0: QuadrupleSpec
    w0_vec: tuple[WeightField, ...]
    verdict0: QuadrupleVerdict
    roundtrip_exponent_error: float
    roundtrip_weight_error: float
    constant0: WeightConstantReport


def build_extrapolation_family(target: QuadrupleSpec, w_vec, spec1: QuadrupleSpec,
                               w1_vec, theta: float,
                               cubes: DyadicCubeSet | None = None,
                               rel_tol: float = 1e-10) -> ExtrapolationBuild:
    """Invert the blend at ``theta``: recover the endpoint-0 quadruple
    and weights that blend with ``(spec1, w1_vec)`` into the target.

    Raises RangeError when the inverted exponents leave the admissible
    range (the target is then not reachable at this theta) and checks
    the reconstruction by blending forward again.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie strictly in (0, 1), got {theta}")
    if target.m != spec1.m or len(tuple(w_vec)) != target.m or len(tuple(w1_vec)) != target.m:
        raise ArityMismatchError("target and endpoint arities disagree")
    if target.r_vec != spec1.r_vec or target.s != spec1.s:
        raise SpecMismatchError("extrapolation needs shared (r_vec, s)")
    if target.box != spec1.box:
        raise SpecMismatchError("target and endpoint live on different boxes")

    p0_vec = tuple(theta_invert(p, p1, theta) for p, p1 in zip(target.p_vec, spec1.p_vec))
    q0 = theta_invert(target.q, spec1.q, theta)
    spec0 = QuadrupleSpec(p0_vec, q0, target.r_vec, target.s)
    verdict0 = validate_quadruple(spec0)

    inv = 1.0 / (1.0 - theta)
    w0_vec = tuple(w.power(inv) * w1.power(-theta * inv)
                   for w, w1 in zip(w_vec, w1_vec))

    back = blend_quadruple(spec0, spec1, theta)
    grid = w0_vec[0].grid
    exp_err = 0.0
    for a, b in zip(back.p_vec + (back.q,), target.p_vec + (target.q,)):
        exp_err = max(exp_err, float(np.max(np.abs(
            1.0 / a.values_on(grid) - 1.0 / b.values_on(grid)))))
    w_err = 0.0
    for w0, w1, w in zip(w0_vec, w1_vec, w_vec):
        again = w0.power(1.0 - theta) * w1.power(theta)
        w_err = max(w_err, float(np.max(np.abs(again.values / w.values - 1.0))))

    cubes = cubes or DyadicCubeSet(grid.box, 3)
    constant0 = multilinear_constant(w0_vec, spec0, cubes, rel_tol, allow_overflow=True)
    return ExtrapolationBuild(theta, spec0, tuple(w0_vec), verdict0,
                              exp_err, w_err, constant0)


@dataclass(frozen=True)
class ThetaEntry:
    theta: float
    built: bool
    admissible: bool
    proper: bool
    roundtrip_ok: bool
    constant0: float
    constant0_overflow: bool
    endpoint_max_ratio: float
    error: str = ""


@dataclass(frozen=True)
class WorkflowReport:
    qtilde: float
    entries: tuple[ThetaEntry, ...]
    rk: RKReport

    @property
    def verdict(self) -> str:
        return self.rk.verdict


def run_extrapolation_workflow(op: OperatorSpec, inputs, target: QuadrupleSpec,
                               w_vec, spec1: QuadrupleSpec, w1_vec,
                               thetas: Sequence[float], qtilde: float | None = None,
                               cubes: DyadicCubeSet | None = None,
                               roundtrip_tol: float = 1e-10,
                               rel_tol: float = 1e-10,
                               classify_kwargs: dict | None = None) -> WorkflowReport:
    """Sweep a theta ladder: rebuild endpoint 0 at each theta, certify
    the operator against it over the given inputs, and classify the
    operator outputs in the target output space.

    ``inputs`` is a sequence of m-tuples of grid functions; the default
    ``qtilde = 1 / (1/r - gamma)`` always sits below the target output
    lower bound for admissible targets.
    """
    w_vec = tuple(w_vec)
    w1_vec = tuple(w1_vec)
    grid = w_vec[0].grid
    outputs = FunctionFamily(tuple(apply_operator(op, fs) for fs in inputs),
                             "operator outputs")
    nu = w_vec[0]
    for w in w_vec[1:]:
        nu = nu * w
    if qtilde is None:
        qtilde = 1.0 / (1.0 / target.r - target.gamma)
    rk = classify(outputs, target.q, nu, qtilde, cubes=cubes, rel_tol=rel_tol,
                  **(classify_kwargs or {}))

    entries = []
    for theta in thetas:
        try:
            built = build_extrapolation_family(target, w_vec, spec1, w1_vec,
                                               theta, cubes, rel_tol)
        except (RangeError, SpecMismatchError) as exc:
            entries.append(ThetaEntry(theta, False, False, False, False,
                                      float("nan"), False, float("nan"), str(exc)))
            continue
        space0 = EndpointSpace(built.spec0.p_vec, built.spec0.q, built.w0_vec,
                               _product(built.w0_vec))
        worst = 0.0
        for fs, Tf in zip(inputs, outputs.members):
            den = 1.0
            for f, p, w in zip(fs, space0.p_vec, space0.w_vec):
                den *= weighted_norm(f, p, w, rel_tol=rel_tol).value
            if den > 0.0:
                worst = max(worst, weighted_norm(Tf, space0.q, space0.v,
                                                 rel_tol=rel_tol).value / den)
        ok = (built.roundtrip_exponent_error <= roundtrip_tol
              and built.roundtrip_weight_error <= roundtrip_tol)
        entries.append(ThetaEntry(theta, True, built.verdict0.admissible,
                                  built.verdict0.proper, ok,
                                  built.constant0.constant,
                                  built.constant0.overflow, worst))
    return WorkflowReport(qtilde, tuple(entries), rk)


def _product(weights) -> WeightField:
    out = weights[0]
    for w in weights[1:]:
        out = out * w
    return out
