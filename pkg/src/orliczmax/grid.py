"""Grids, index rectangles, summed-area tables, and Orlicz norms on rectangles.

A GridFunction samples a nonnegative function at cell centers of a uniform
grid over an axis-parallel box (midpoint convention: sample k on axis d sits
at origin[d] + (k + 1/2) * spacing[d]). Index rectangles are half-open per
axis. All rectangle sums go through the summed-area table with a fixed
first-axis-to-last differencing order so that every code path that averages
the same rectangle produces bit-identical floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyRect, GeometryMismatch, DimensionError
from .young import YoungFunction

__all__ = [
    "GridFunction",
    "Rect",
    "SummedAreaTable",
    "rect_average",
    "luxemburg_norm",
    "norm_lp",
    "write_grid",
    "read_grid",
]

_MAX_DIM = 3


@dataclass(frozen=True)
class GridFunction:
    """Nonnegative samples on a uniform grid, dimensions 1 to 3.

    Values are clamped to >= 0 at ingestion; NaN/inf are rejected. The
    stored array is read-only.
    """

    shape: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(h) for h in self.spacing)
        if not (1 <= len(shape) <= _MAX_DIM):
            raise DimensionError(f"dimension {len(shape)} unsupported (1..{_MAX_DIM})")
        if len(origin) != len(shape) or len(spacing) != len(shape):
            raise GeometryMismatch("shape/origin/spacing length mismatch")
        if any(s < 1 for s in shape):
            raise ValueError("all axis sizes must be >= 1")
        if any(not np.isfinite(h) or h <= 0 for h in spacing):
            raise ValueError("spacing must be positive and finite")
        vals = np.asarray(self.values, dtype=float)
        if vals.size != int(np.prod(shape)):
            raise GeometryMismatch(f"expected {int(np.prod(shape))} values, got {vals.size}")
        if np.any(~np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals = np.maximum(vals.reshape(shape), 0.0)
        vals.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, d: int) -> np.ndarray:
        return self.origin[d] + (np.arange(self.shape[d]) + 0.5) * self.spacing[d]

    def same_geometry(self, other: "GridFunction") -> bool:
        return (
            self.shape == other.shape
            and self.origin == other.origin
            and self.spacing == other.spacing
        )

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.shape, self.origin, self.spacing, values)

    @staticmethod
    def sample(fn: Callable[..., np.ndarray], shape, origin, spacing) -> "GridFunction":
        """Sample fn(x1, ..., xn) at cell centers (fn must broadcast)."""
        g = GridFunction(tuple(shape), tuple(origin), tuple(spacing),
                         np.zeros(tuple(int(s) for s in shape)))
        axes = np.meshgrid(*[g.axis_centers(d) for d in range(g.ndim)], indexing="ij")
        return g.with_values(np.asarray(fn(*axes), dtype=float))

    @staticmethod
    def indicator_box(shape, origin, spacing, lo: Sequence[float], hi: Sequence[float]) -> "GridFunction":
        """Indicator of an axis box, sampled at cell centers."""
        g = GridFunction(tuple(shape), tuple(origin), tuple(spacing),
                         np.zeros(tuple(int(s) for s in shape)))
        mask = np.ones(g.shape, dtype=bool)
        for d in range(g.ndim):
            c = g.axis_centers(d)
            m = (c >= lo[d]) & (c <= hi[d])
            sh = [1] * g.ndim
            sh[d] = -1
            mask &= m.reshape(sh)
        return g.with_values(mask.astype(float))


@dataclass(frozen=True)
class Rect:
    """Half-open index rectangle: cells lo[d] <= i < hi[d] on each axis."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(a) for a in self.lo)
        hi = tuple(int(b) for b in self.hi)
        if len(lo) != len(hi):
            raise GeometryMismatch("lo/hi length mismatch")
        if any(a < 0 for a in lo) or any(b <= a for a, b in zip(lo, hi)):
            raise EmptyRect(f"empty or negative index range {lo}..{hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def ndim(self) -> int:
        return len(self.lo)

    @property
    def ncells(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a
        return n

    @property
    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, b) for a, b in zip(self.lo, self.hi))

    def sides(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def check_within(self, shape: Sequence[int]) -> None:
        if len(shape) != self.ndim:
            raise GeometryMismatch("rect dimension does not match grid")
        if any(b > s for b, s in zip(self.hi, shape)):
            raise GeometryMismatch(f"rect {self.lo}..{self.hi} exceeds grid shape {tuple(shape)}")

    def contains_cell(self, idx: Sequence[int]) -> bool:
        return all(a <= i < b for a, i, b in zip(self.lo, idx, self.hi))

    def volume(self, spacing: Sequence[float]) -> float:
        return self.ncells * float(np.prod(spacing))


class SummedAreaTable:
    """Padded cumulative sums; rectangle sums by nested axis differencing.

    table has shape+1 per axis with a zero slab in front, so the sum over a
    half-open rectangle is obtained by differencing axis 0 first, then axis
    1, and so on. That fixed order is the package's canonical averaging
    arithmetic.
    """

    def __init__(self, f: GridFunction):
        t = f.values
        for ax in range(f.ndim):
            t = np.cumsum(t, axis=ax)
            pad = [(0, 0)] * f.ndim
            pad[ax] = (1, 0)
            t = np.pad(t, pad)
        t.setflags(write=False)
        self.table = t
        self.shape = f.shape
        self.cell_volume = f.cell_volume

    def rect_sum(self, rect: Rect) -> float:
        rect.check_within(self.shape)
        a = self.table
        for lo, hi in zip(rect.lo, rect.hi):
            a = a[hi] - a[lo]
        return float(a)


def rect_average(sat: SummedAreaTable, rect: Rect) -> float:
    """Mean of the covered samples: rect_sum / cell count.

    Equal to (sum of value * cellvol) / rect volume since the cell volume
    cancels; the division by the integer count is the canonical form.
    """
    return sat.rect_sum(rect) / rect.ncells


def _phi_mean(phi: YoungFunction, mat: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """mean_j Phi(mat[i, j] / lam[i]) with rows as independent problems."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        scaled = mat / lam[:, None]
        vals = phi.eval(scaled.ravel()).reshape(scaled.shape)
    return np.mean(vals, axis=1)


def luxemburg_batch(rows: np.ndarray, phi: YoungFunction, tol: float = 1e-9,
                    lo_hint: np.ndarray | None = None,
                    hi_hint: np.ndarray | None = None,
                    max_iter: int = 200) -> np.ndarray:
    """Luxemburg norms of the rows of a matrix under the normalized mean.

    Returns per-row inf{lam > 0 : mean Phi(row / lam) <= 1}; all-zero rows
    give 0. Optional bracket hints must satisfy G(lo) >= 1 >= G(hi); they
    tighten the start bracket without changing the limit.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2d matrix")
    n = rows.shape[0]
    out = np.zeros(n)
    vmax = rows.max(axis=1)
    active = vmax > 0
    if not np.any(active):
        return out
    sub = rows[active]
    m = vmax[active]

    lo = (m * 1e-14) if lo_hint is None else np.asarray(lo_hint, dtype=float)[active]
    hi = (m * 1e3) if hi_hint is None else np.asarray(hi_hint, dtype=float)[active]
    lo = np.minimum(np.maximum(lo, 1e-300), hi)

    # geometric expansion until the bracket is certified
    for _ in range(60):
        bad = _phi_mean(phi, sub, hi) > 1.0
        if not np.any(bad):
            break
        hi = np.where(bad, hi * 10.0, hi)
    floor_rows = np.zeros(lo.shape, dtype=bool)
    for _ in range(60):
        low = _phi_mean(phi, sub, lo) <= 1.0
        if not np.any(low):
            break
        hit = low & (lo <= 1e-280)
        floor_rows |= hit
        lo = np.where(low & ~hit, lo * 0.1, lo)
        if np.all(floor_rows | ~low):
            break

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        pred = _phi_mean(phi, sub, mid) <= 1.0
        hi = np.where(pred, mid, hi)
        lo = np.where(pred, lo, mid)
        if np.all(hi - lo <= tol * hi):
            break
    res = hi
    # Phi vanishing on the whole bracket means the true infimum is 0
    res = np.where(floor_rows, 0.0, res)
    out[active] = res
    return out


def luxemburg_norm(f: GridFunction, rect: Rect, phi: YoungFunction,
                   tol: float = 1e-9) -> float:
    """Luxemburg norm of f over a rectangle w.r.t. the normalized mean.

    inf{lam > 0 : (1/|r|) sum_r Phi(f/lam) <= 1}, found by bracketing
    bisection; the returned value is the certified-feasible upper end of
    the final bracket, so it never undershoots the true norm by more than
    the bracket width.
    """
    rect.check_within(f.shape)
    vals = f.values[rect.slices].reshape(1, -1)
    return float(luxemburg_batch(vals, phi, tol=tol)[0])


def norm_lp(f: GridFunction, p: float, weight: GridFunction | None = None) -> float:
    """(sum f^p * w * cellvol)^(1/p) with the weight optional."""
    if p <= 0:
        raise ValueError("p must be positive")
    arr = f.values**p
    if weight is not None:
        if not f.same_geometry(weight):
            raise GeometryMismatch("weight grid does not match f")
        arr = arr * weight.values
    return float((arr.sum() * f.cell_volume) ** (1.0 / p))


def write_grid(f: GridFunction, path: str) -> None:
    """One-line JSON header, then whitespace-separated row-major values."""
    header = {
        "dim": f.ndim,
        "shape": list(f.shape),
        "origin": list(f.origin),
        "spacing": list(f.spacing),
    }
    flat = f.values.ravel()
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for start in range(0, flat.size, 8):
            fh.write(" ".join(repr(float(v)) for v in flat[start:start + 8]) + "\n")


def read_grid(path: str) -> GridFunction:
    with open(path) as fh:
        header = json.loads(fh.readline())
        body = fh.read()
    vals = np.array([float(tok) for tok in body.split()])
    shape = tuple(int(s) for s in header["shape"])
    if int(header.get("dim", len(shape))) != len(shape):
        raise GeometryMismatch("header dim disagrees with shape")
    return GridFunction(shape, tuple(header["origin"]), tuple(header["spacing"]), vals)
