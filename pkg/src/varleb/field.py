"""Grids, grid functions, weights, regions and dyadic cube families.

Conventions
-----------
All computations live on an axis-aligned box ``[lo_1, hi_1] x ... x
[lo_n, hi_n]`` with ``n <= 2``, discretized by an inclusive tensor grid
of ``shape_i`` nodes per axis (node spacing ``h_i = (hi_i - lo_i) /
(shape_i - 1)``).  Integrals are composite trapezoid sums: every node
carries the tensor-product weight ``prod_i h_i`` except on the box
faces, where the 1D factor drops to ``h_i / 2``.  For the full box this
is exact on affine integrands; sub-regions are handled by node
membership masking, so region boundaries carry an O(h) error that the
resolution-convergence tests are expected to absorb.

Balls are open: a node belongs to ``B(c, r)`` when ``|x - c| <
r * (1 - 1e-12)``.  The deterministic shrink keeps nodes that sit
exactly on the sphere out of the ball regardless of floating-point
noise, so a radius equal to the grid step reduces the ball to its
center node.

Functions are extended by zero outside the box wherever a construction
(shifts, mollification) would need exterior values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ArityMismatchError, DomainError, EmptyRegionError, SchemaError

BALL_SHRINK = 1.0 - 1e-12
_BOX_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by per-axis bounds."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DomainError("box lo/hi dimension mismatch")
        if not self.lo:
            raise DomainError("box must have at least one axis")
        object.__setattr__(self, "lo", tuple(float(a) for a in self.lo))
        object.__setattr__(self, "hi", tuple(float(b) for b in self.hi))
        for a, b in zip(self.lo, self.hi):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise DomainError(f"degenerate box axis [{a}, {b}]")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "Box":
        return cls(tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def diameter(self) -> float:
        return float(np.hypot.reduce(self.widths)) if self.dim > 1 else self.widths[0]

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    def as_pairs(self) -> list[list[float]]:
        return [[a, b] for a, b in zip(self.lo, self.hi)]

    def contains_box(self, other: "Box", tol: float = 1e-9) -> bool:
        return all(
            a - tol * w <= oa and ob <= b + tol * w
            for a, b, oa, ob, w in zip(self.lo, self.hi, other.lo, other.hi, self.widths)
        )


@dataclass(frozen=True)
class Grid:
    """Inclusive tensor grid on a box; nodes per axis given by shape."""

    box: Box
    shape: tuple[int, ...]

    def __post_init__(self):
        if len(self.shape) != self.box.dim:
            raise DomainError("grid shape dimension does not match box")
        if self.box.dim > 2:
            raise DomainError("grids support at most two axes")
        for n in self.shape:
            if n < 2:
                raise DomainError("need at least 2 nodes per axis")

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(w / (n - 1) for w, n in zip(self.box.widths, self.shape))

    @property
    def max_step(self) -> float:
        return max(self.steps)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return _axes(self)

    @property
    def quad_weights(self) -> np.ndarray:
        return _quad_weights(self)

    @property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``grid.shape + (dim,)``."""
        return _coords(self)

    def refine(self, factor: int = 2) -> "Grid":
        """Halve the step: a node count of n becomes ``factor*(n-1)+1``."""
        return Grid(self.box, tuple(factor * (n - 1) + 1 for n in self.shape))

    def axis_grid(self, axis: int) -> "Grid":
        """The 1D grid along one axis of a 2D grid."""
        return Grid(Box((self.box.lo[axis],), (self.box.hi[axis],)), (self.shape[axis],))


@lru_cache(maxsize=128)
def _axes(grid: Grid) -> tuple[np.ndarray, ...]:
    out = []
    for a, b, n in zip(grid.box.lo, grid.box.hi, grid.shape):
        ax = np.linspace(a, b, n)
        ax.flags.writeable = False
        out.append(ax)
    return tuple(out)


@lru_cache(maxsize=128)
def _quad_weights(grid: Grid) -> np.ndarray:
    factors = []
    for h, n in zip(grid.steps, grid.shape):
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        factors.append(w)
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=128)
def _coords(grid: Grid) -> np.ndarray:
    mesh = np.meshgrid(*_axes(grid), indexing="ij")
    out = np.stack(mesh, axis=-1)
    out.flags.writeable = False
    return out


class GridFunction:
    """Real values at the nodes of a grid, with pointwise algebra."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise DomainError(
                f"value shape {values.shape} does not match grid shape {grid.shape}"
            )
        self.grid = grid
        self.values = values

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        vals = np.asarray(fn(grid.coords), dtype=float)
        return cls(grid, np.broadcast_to(vals, grid.shape).copy())

    def _check_same_grid(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise DomainError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values - other.values)
        return GridFunction(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values / other.values)
        return GridFunction(self.grid, self.values / other)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def power(self, exponent) -> "GridFunction":
        """Pointwise ``|f|^e``; the exponent may vary over the grid."""
        e = exponent.values if isinstance(exponent, GridFunction) else exponent
        return GridFunction(self.grid, np.abs(self.values) ** np.asarray(e, dtype=float))

    def restrict(self, mask: np.ndarray) -> "GridFunction":
        """Zero the function outside a boolean node mask."""
        if mask.shape != self.grid.shape:
            raise DomainError("mask shape does not match grid")
        return GridFunction(self.grid, np.where(mask, self.values, 0.0))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


class WeightField(GridFunction):
    """Strictly positive grid function, closed under power and product."""

    def __init__(self, grid: Grid, values: np.ndarray):
        super().__init__(grid, values)
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0.0):
            bad = np.argwhere(~(np.isfinite(self.values) & (self.values > 0.0)))[0]
            raise DomainError(
                f"weight must satisfy 0 < w < inf at every node; offending index {tuple(bad)}"
            )

    def power(self, exponent) -> "WeightField":
        e = exponent.values if isinstance(exponent, GridFunction) else exponent
        return WeightField(self.grid, self.values ** np.asarray(e, dtype=float))

    def inverse(self) -> "WeightField":
        return WeightField(self.grid, 1.0 / self.values)

    def __mul__(self, other):
        if isinstance(other, WeightField):
            self._check_same_grid(other)
            return WeightField(self.grid, self.values * other.values)
        if np.isscalar(other) and float(other) > 0.0:
            return WeightField(self.grid, self.values * float(other))
        return super().__mul__(other)

    __rmul__ = __mul__

    @classmethod
    def ones(cls, grid: Grid) -> "WeightField":
        return cls(grid, np.ones(grid.shape))


# ---------------------------------------------------------------------------
# regions


def box_slices(grid: Grid, box: Box) -> tuple[slice, ...]:
    """Index slices of the nodes lying in an axis-aligned sub-box.

    Nodes on the sub-box boundary are included (up to a 1e-12 relative
    tolerance, so dyadic corners computed two different ways agree).
    """
    if box.dim != grid.dim:
        raise DomainError("region dimension does not match grid")
    out = []
    for ax, lo, hi, w in zip(grid.axes, box.lo, box.hi, grid.box.widths):
        tol = _BOX_EDGE_TOL * w
        i0 = int(np.searchsorted(ax, lo - tol, side="left"))
        i1 = int(np.searchsorted(ax, hi + tol, side="right"))
        out.append(slice(i0, i1))
    return tuple(out)


def box_mask(grid: Grid, box: Box) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    mask[box_slices(grid, box)] = True
    return mask


def ball_mask(grid: Grid, center: Sequence[float], radius: float) -> np.ndarray:
    if len(center) != grid.dim:
        raise DomainError("ball center dimension does not match grid")
    if radius <= 0.0:
        raise DomainError("ball radius must be positive")
    d2 = np.zeros(grid.shape)
    for axis in range(grid.dim):
        ax = grid.axes[axis] - center[axis]
        shape = [1] * grid.dim
        shape[axis] = -1
        d2 = d2 + (ax ** 2).reshape(shape)
    return d2 < (radius * BALL_SHRINK) ** 2


def integrate(f: GridFunction, region: Box | np.ndarray | None = None) -> float:
    """Trapezoid-weighted sum of ``f`` over the box or a masked region."""
    qw = f.grid.quad_weights
    if region is None:
        return float(np.sum(qw * f.values))
    if isinstance(region, Box):
        sl = box_slices(f.grid, region)
        sub = qw[sl] * f.values[sl]
        if sub.size == 0:
            raise EmptyRegionError(f"no grid node inside region {region.as_pairs()}")
        return float(np.sum(sub))
    mask = np.asarray(region, dtype=bool)
    if mask.shape != f.grid.shape:
        raise DomainError("region mask shape does not match grid")
    if not mask.any():
        raise EmptyRegionError("region mask selects no grid node")
    return float(np.sum(qw[mask] * f.values[mask]))


def region_measure(grid: Grid, region: Box | np.ndarray | None = None) -> float:
    """Quadrature measure of a region (the discrete stand-in for |Q|)."""
    return integrate(GridFunction(grid, np.ones(grid.shape)), region)


def ball_average(f: GridFunction, center: Sequence[float], radius: float, qtilde: float) -> float:
    """``((1/|B|) * int_B |f|^qtilde)^(1/qtilde)`` over the discrete ball.

    ``|B|`` is the quadrature measure of the ball intersected with the
    grid, so averages near the box boundary see only in-box nodes.
    """
    if qtilde <= 0.0:
        raise DomainError("qtilde must be positive")
    mask = ball_mask(f.grid, center, radius)
    if not mask.any():
        raise EmptyRegionError(f"ball B({tuple(center)}, {radius}) captures no node")
    qw = f.grid.quad_weights[mask]
    vals = np.abs(f.values[mask])
    measure = float(np.sum(qw))
    return float((np.sum(qw * vals ** qtilde) / measure) ** (1.0 / qtilde))


# ---------------------------------------------------------------------------
# dyadic cubes


@dataclass(frozen=True)
class Cube:
    box: Box
    depth: int
    shifted: bool
    index: tuple[int, ...]

    def label(self) -> str:
        tag = "s" if self.shifted else "u"
        return f"d{self.depth}{tag}{'.'.join(map(str, self.index))}"


@dataclass(frozen=True)
class DyadicCubeSet:
    """Dyadic subcubes of a root box up to a depth, plus shifted copies.

    At depth ``d`` the root splits into ``2^d`` pieces per axis.  The
    shifted family translates each depth-``d`` cube by half its side
    along every axis and keeps the translates that stay inside the root
    box; it is the discrete surrogate for a supremum over all cubes, so
    the scanned constant is a certified lower bound for the true one.
    """

    root: Box
    max_depth: int
    shifted: bool = True

    def __post_init__(self):
        if self.max_depth < 0:
            raise DomainError("max_depth must be nonnegative")

    def cubes(self) -> Iterator[Cube]:
        n = self.root.dim
        lo = np.array(self.root.lo)
        widths = np.array(self.root.widths)
        for depth in range(self.max_depth + 1):
            k = 2 ** depth
            side = widths / k
            for idx in np.ndindex(*([k] * n)):
                c_lo = lo + np.array(idx) * side
                yield Cube(Box(tuple(c_lo), tuple(c_lo + side)), depth, False, idx)
            if self.shifted and depth >= 1:
                for idx in np.ndindex(*([k - 1] * n)):
                    c_lo = lo + (np.array(idx) + 0.5) * side
                    yield Cube(Box(tuple(c_lo), tuple(c_lo + side)), depth, True, idx)

    def count(self) -> int:
        return sum(1 for _ in self.cubes())


# ---------------------------------------------------------------------------
# function descriptors

_FUNCTION_KINDS = {
    "gaussian": {"center", "width", "amplitude"},
    "indicator": {"box"},
    "power": {"exponent", "center", "floor"},
    "bump": {"center", "radius", "amplitude"},
    "sine": {"frequency", "phase", "amplitude"},
    "translate": {"inner", "shift"},
    "dilate": {"inner", "scale"},
    "sum": {"terms"},
    "product": {"terms"},
    "grid_csv": {"path"},
}


def _require_keys(desc: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(desc) - allowed
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)} in {where}")
    missing = required - set(desc)
    if missing:
        raise SchemaError(f"missing keys {sorted(missing)} in {where}")


def _radial(coords: np.ndarray, center: Sequence[float]) -> np.ndarray:
    delta = coords - np.asarray(center, dtype=float)
    return np.sqrt(np.sum(delta ** 2, axis=-1))


def realize_function(desc: dict, grid: Grid) -> GridFunction:
    """Build a grid function from a JSON-style descriptor.

    Unknown keys are rejected; see the CLI schema notes in the README
    for the per-kind parameter lists.
    """
    if not isinstance(desc, dict) or "kind" not in desc:
        raise SchemaError("function descriptor must be a dict with a 'kind'")
    kind = desc["kind"]
    if kind not in _FUNCTION_KINDS:
        raise SchemaError(f"unknown function kind '{kind}'")
    params = {k: v for k, v in desc.items() if k != "kind"}
    _require_keys(params | {"kind": kind}, _FUNCTION_KINDS[kind] | {"kind"}, set(), f"function '{kind}'")
    coords = grid.coords

    if kind == "gaussian":
        center = params.get("center", grid.box.center)
        width = float(params.get("width", 1.0))
        amp = float(params.get("amplitude", 1.0))
        if width <= 0:
            raise SchemaError("gaussian width must be positive")
        r = _radial(coords, center)
        return GridFunction(grid, amp * np.exp(-((r / width) ** 2)))

    if kind == "indicator":
        if "box" not in params:
            raise SchemaError("indicator needs a 'box'")
        mask = box_mask(grid, Box.from_pairs(params["box"]))
        return GridFunction(grid, mask.astype(float))

    if kind == "power":
        e = float(params["exponent"]) if "exponent" in params else 1.0
        center = params.get("center", (0.0,) * grid.dim)
        floor = float(params.get("floor", 0.0))
        r = _radial(coords, center)
        with np.errstate(divide="ignore"):
            vals = np.where(r > 0, r, 1.0) ** e
            vals = np.where(r > 0, vals, 0.0 if e > 0 else np.inf)
        if floor > 0:
            vals = np.maximum(vals, floor)
        return GridFunction(grid, vals)

    if kind == "bump":
        center = params.get("center", grid.box.center)
        radius = float(params.get("radius", 1.0))
        amp = float(params.get("amplitude", 1.0))
        if radius <= 0:
            raise SchemaError("bump radius must be positive")
        t2 = (_radial(coords, center) / radius) ** 2
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(t2 < 1.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - t2, 1e-300)), 0.0)
        return GridFunction(grid, amp * vals)

    if kind == "sine":
        freq = params.get("frequency", (1.0,) * grid.dim)
        if np.isscalar(freq):
            freq = (float(freq),) * grid.dim
        phase = float(params.get("phase", 0.0))
        amp = float(params.get("amplitude", 1.0))
        arg = phase
        for axis, om in enumerate(freq):
            arg = arg + 2.0 * np.pi * om * coords[..., axis]
        return GridFunction(grid, amp * np.sin(arg))

    if kind == "translate":
        shift = params["shift"]
        if np.isscalar(shift):
            shift = (float(shift),) * grid.dim
        inner = realize_function(params["inner"], grid)
        return shift_function(inner, shift)

    if kind == "dilate":
        scale = float(params["scale"])
        if scale <= 0:
            raise SchemaError("dilate scale must be positive")
        if grid.dim != 1:
            raise SchemaError("dilate descriptors are 1D only")
        inner = realize_function(params["inner"], grid)
        x = grid.axes[0]
        vals = np.interp(x / scale, x, inner.values, left=0.0, right=0.0)
        return GridFunction(grid, vals)

    if kind in ("sum", "product"):
        terms = params.get("terms", [])
        if not terms:
            raise SchemaError(f"'{kind}' needs a nonempty 'terms' list")
        acc = realize_function(terms[0], grid)
        for t in terms[1:]:
            nxt = realize_function(t, grid)
            acc = acc + nxt if kind == "sum" else acc * nxt
        return acc

    # grid_csv
    return read_grid_csv(params["path"], grid)


def shift_function(f: GridFunction, shift: Sequence[float]) -> GridFunction:
    """Translate by a node-aligned shift, filling with zeros.

    The shift is rounded to the nearest whole number of grid steps per
    axis so translated copies stay exactly on the node lattice.
    """
    vals = f.values
    for axis, (s, h) in enumerate(zip(shift, f.grid.steps)):
        k = int(round(s / h))
        if k == 0:
            continue
        vals = np.roll(vals, k, axis=axis)
        sl = [slice(None)] * vals.ndim
        sl[axis] = slice(0, k) if k > 0 else slice(k, None)
        vals = vals.copy()
        vals[tuple(sl)] = 0.0
    return GridFunction(f.grid, vals)


def random_simple_function(grid: Grid, rng: np.random.Generator,
                           max_terms: int = 8, signed: bool = True) -> GridFunction:
    """Random finite sum of scaled box indicators.

    Uses at most ``max_terms`` boxes with coefficients log-uniform in
    [1e-2, 1e2]; always returns a function that is nonzero somewhere.
    """
    n_terms = int(rng.integers(1, max_terms + 1))
    vals = np.zeros(grid.shape)
    for _ in range(n_terms):
        pairs = []
        for a, b in zip(grid.box.lo, grid.box.hi):
            u, v = np.sort(rng.uniform(a, b, size=2))
            if v - u < 0.05 * (b - a):  # keep every box wide enough to catch nodes
                mid = 0.5 * (u + v)
                half = 0.025 * (b - a)
                u, v = max(a, mid - half), min(b, mid + half)
            pairs.append((u, v))
        coeff = 10.0 ** rng.uniform(-2.0, 2.0)
        if signed and rng.random() < 0.5:
            coeff = -coeff
        vals[box_slices(grid, Box.from_pairs(pairs))] += coeff
    if not vals.any():
        vals[box_slices(grid, Box.from_pairs([[a, (a + b) / 2] for a, b in
                                              zip(grid.box.lo, grid.box.hi)]))] += 1.0
    return GridFunction(grid, vals)


# ---------------------------------------------------------------------------
# CSV grid i/o: header "x[,y],value", row-major node order


def write_grid_csv(f: GridFunction, path: str) -> None:
    coords = f.grid.coords.reshape(-1, f.grid.dim)
    vals = f.values.reshape(-1)
    header = ["x", "y"][: f.grid.dim] + ["value"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for pt, v in zip(coords, vals):
            writer.writerow([repr(float(c)) for c in pt] + [repr(float(v))])


def read_grid_csv(path: str, grid: Grid) -> GridFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-1] != "value":
        raise SchemaError(f"{path}: expected a 'x[,y],value' CSV header")
    body = np.array([[float(c) for c in row] for row in rows[1:]])
    if body.shape[0] != grid.size or body.shape[1] != grid.dim + 1:
        raise SchemaError(
            f"{path}: got {body.shape[0]} rows of width {body.shape[1]}, "
            f"grid wants {grid.size} rows of width {grid.dim + 1}"
        )
    coords = grid.coords.reshape(-1, grid.dim)
    scale = max(grid.box.widths)
    if not np.allclose(body[:, : grid.dim], coords, atol=1e-9 * scale, rtol=0.0):
        raise SchemaError(f"{path}: node coordinates do not match the grid (row-major order)")
    return GridFunction(grid, body[:, -1].reshape(grid.shape))


def as_tuple(fs) -> tuple:
    """Normalize an input collection to a tuple, for arity checks."""
    if isinstance(fs, (list, tuple)):
        return tuple(fs)
    raise ArityMismatchError("expected a list or tuple of inputs")
