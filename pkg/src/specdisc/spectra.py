"""Spectra as set-valued objects: clustering, radius, Hausdorff distance,
raster hole detection, polynomial hulls and pseudospectrum grids.

Topology (holes, hulls) is computed on a raster: spectrum points are thickened
into Euclidean disks on a node grid, and connected components of the
complement are found with 4-connectivity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import ndimage

from . import io
from ._parallel import pmap
from .errors import InputError
from .numkernel import as_matrix, eig

Window = tuple[float, float, float, float]

#: Default clip for log10 resolvent norms (a singular cell maps to this value).
PSEUDO_CAP = 16.0

_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


# ---------------------------------------------------------------------------
# SpectrumSet
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumSet:
    """Finite multiset of complex points with the tolerance used to merge them."""

    points: np.ndarray
    mults: np.ndarray
    cluster_tol: float = 0.0

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
        mul = np.atleast_1d(np.asarray(self.mults, dtype=int))
        if pts.shape != mul.shape:
            raise InputError("points and mults must have equal length")
        if np.any(mul < 1):
            raise InputError("multiplicities must be >= 1")
        if self.cluster_tol < 0:
            raise InputError("cluster_tol must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mults", mul)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def total_multiplicity(self) -> int:
        return int(self.mults.sum())

    def nonzero(self, tol: float) -> "SpectrumSet":
        """Drop points with ``|lam| <= tol``."""
        keep = np.abs(self.points) > tol
        return SpectrumSet(self.points[keep], self.mults[keep], self.cluster_tol)

    def to_dict(self) -> dict:
        return {
            "cluster_tol": float(self.cluster_tol),
            "points": [
                {"re": p.real, "im": p.imag, "mult": int(m)}
                for p, m in zip(self.points, self.mults)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumSet":
        pts = [complex(p["re"], p["im"]) for p in d["points"]]
        mul = [int(p["mult"]) for p in d["points"]]
        return cls(np.array(pts, dtype=complex), np.array(mul, dtype=int), float(d["cluster_tol"]))

    @classmethod
    def from_values(cls, values, cluster_tol: float = 0.0) -> "SpectrumSet":
        return cluster(values, cluster_tol)


def _merge_order(values: np.ndarray) -> np.ndarray:
    # ascending modulus, ties by argument
    return np.lexsort((np.angle(values), np.abs(values)))


def cluster(values, tol: float) -> SpectrumSet:
    """Greedy deterministic clustering of a list of complex numbers.

    Values are visited in ascending ``|lam|`` (ties by argument).  A value joins
    the first existing cluster whose members all lie within ``tol`` of it
    (so clusters have diameter ``<= tol``), otherwise it opens a new cluster.
    A final pass merges clusters whose representatives (multiplicity-weighted
    means) are still within ``tol`` of each other, so distinct output points
    are always more than ``tol`` apart.
    """
    vals = np.atleast_1d(np.asarray(values, dtype=complex))
    if tol < 0:
        raise InputError("cluster tolerance must be nonnegative")
    if vals.size == 0:
        return SpectrumSet(np.zeros(0, complex), np.zeros(0, int), tol)
    groups: list[list[complex]] = []
    seeds = np.empty(vals.size, dtype=complex)
    for v in vals[_merge_order(vals)]:
        # a member of a diameter-tol cluster is within tol of its seed
        cand = np.flatnonzero(np.abs(seeds[: len(groups)] - v) <= tol)
        for k in cand:
            g = groups[k]
            if all(abs(v - w) <= tol for w in g):
                g.append(v)
                break
        else:
            seeds[len(groups)] = v
            groups.append([v])
    reps = [complex(np.mean(g)) for g in groups]
    mults = [len(g) for g in groups]

    merged = True
    while merged and len(reps) > 1:
        merged = False
        R = np.array(reps)
        D = np.abs(R[:, None] - R[None, :])
        np.fill_diagonal(D, np.inf)
        i, j = np.unravel_index(np.argmin(D), D.shape)
        if D[i, j] <= tol:
            i, j = min(i, j), max(i, j)
            mi, mj = mults[i], mults[j]
            reps[i] = (reps[i] * mi + reps[j] * mj) / (mi + mj)
            mults[i] = mi + mj
            del reps[j], mults[j]
            merged = True

    R = np.array(reps, dtype=complex)
    M = np.array(mults, dtype=int)
    order = _merge_order(R)
    return SpectrumSet(R[order], M[order], tol)


def spectrum(M, cluster_tol: float = 1e-8) -> SpectrumSet:
    """Eigenvalues of ``M`` merged into a :class:`SpectrumSet`."""
    if cluster_tol < 0:
        raise InputError("cluster_tol must be nonnegative")
    return cluster(eig(M), cluster_tol)


def _points(S) -> np.ndarray:
    if isinstance(S, SpectrumSet):
        return S.points
    return np.atleast_1d(np.asarray(S, dtype=complex))


def spectral_radius(S) -> float:
    pts = _points(S)
    if pts.size == 0:
        raise InputError("spectral radius of an empty set")
    return float(np.abs(pts).max())


def directed_distance(A, B, chunk: int = 2048) -> float:
    """``sup_{a in A} dist(a, B)``."""
    a, b = _points(A), _points(B)
    best = 0.0
    for k in range(0, a.size, chunk):
        d = np.abs(a[k : k + chunk, None] - b[None, :]).min(axis=1)
        best = max(best, float(d.max()))
    return best


def hausdorff(S1, S2) -> float:
    """Hausdorff distance between two finite point sets (multiplicities ignored)."""
    if _points(S1).size == 0 or _points(S2).size == 0:
        raise InputError("Hausdorff distance needs nonempty sets")
    return max(directed_distance(S1, S2), directed_distance(S2, S1))


def dist_to_set(z: complex, S) -> float:
    pts = _points(S)
    if pts.size == 0:
        return float("inf")
    return float(np.abs(pts - z).min())


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def _check_window(window) -> Window:
    try:
        a, b, c, d = (float(v) for v in window)
    except (TypeError, ValueError) as exc:
        raise InputError(f"window must be 4 numbers, got {window!r}") from exc
    if not (np.isfinite([a, b, c, d]).all() and a < b and c < d):
        raise InputError(f"degenerate window {window!r}")
    return (a, b, c, d)


def _check_resolution(resolution) -> tuple[int, int]:
    if np.ndim(resolution) == 0:
        nx = ny = int(resolution)
    else:
        nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise InputError("resolution must be at least 2 in each direction")
    return nx, ny


@dataclass
class GridRegion:
    """Scalar field sampled on the nodes of a rectangular complex grid.

    ``field[j, i]`` is the value at ``xs[i] + 1j * ys[j]``; rows go upward in
    the imaginary part.
    """

    window: Window
    resolution: tuple[int, int]
    field: np.ndarray
    kind: str = "field"
    clipped: np.ndarray | None = None

    def __post_init__(self):
        self.window = _check_window(self.window)
        self.resolution = _check_resolution(self.resolution)
        nx, ny = self.resolution
        self.field = np.asarray(self.field, dtype=float)
        if self.field.shape != (ny, nx):
            raise InputError(f"field shape {self.field.shape} != {(ny, nx)}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.window[0], self.window[1], self.resolution[0])

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.window[2], self.window[3], self.resolution[1])

    @property
    def step(self) -> tuple[float, float]:
        return grid_step(self.window, self.resolution)

    def nodes(self) -> np.ndarray:
        return self.xs[None, :] + 1j * self.ys[:, None]

    @property
    def cell_area(self) -> float:
        dx, dy = self.step
        return dx * dy

    def to_csv(self, path) -> None:
        a, b, c, d = self.window
        nx, ny = self.resolution
        header = ["re_min", "re_max", "im_min", "im_max", "nx", "ny"]
        rows = [[io.fmt(a), io.fmt(b), io.fmt(c), io.fmt(d), str(nx), str(ny)]]
        rows += [list(r) for r in self.field]
        io.write_csv_rows(path, header, rows)

    @classmethod
    def from_csv(cls, path, kind: str = "field") -> "GridRegion":
        lines = open(path).read().split("\n")
        meta = lines[1].split(",")
        window = tuple(float(v) for v in meta[:4])
        nx, ny = int(meta[4]), int(meta[5])
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2 : 2 + ny]])
        return cls(window, (nx, ny), data, kind)

    def to_image(self, vmin: float | None = None, vmax: float | None = None) -> np.ndarray:
        """Linear map of ``[vmin, vmax]`` onto ``[0, 255]`` with clipping; top row = ``im_max``."""
        f = self.field
        lo = float(f.min()) if vmin is None else float(vmin)
        hi = float(f.max()) if vmax is None else float(vmax)
        if hi <= lo:
            img = np.zeros_like(f)
        else:
            img = np.clip((f - lo) / (hi - lo), 0.0, 1.0) * 255.0
        return np.round(img[::-1]).astype(np.uint8)

    def to_pgm(self, path, vmin: float | None = None, vmax: float | None = None) -> None:
        io.write_pgm(path, self.to_image(vmin, vmax))


def grid_step(window, resolution) -> tuple[float, float]:
    a, b, c, d = _check_window(window)
    nx, ny = _check_resolution(resolution)
    return (b - a) / (nx - 1), (d - c) / (ny - 1)


def suggest_thickening(S, window, resolution) -> float:
    """Thickening that closes gaps between neighbouring samples of a curve.

    ``max(3 grid steps, 0.6 * largest nearest-neighbour distance)``.  This is
    a convention for sampled curves, not a canonical value.
    """
    step = max(grid_step(window, resolution))
    pts = _points(S)
    if pts.size < 2:
        return 3 * step
    D = np.abs(pts[:, None] - pts[None, :])
    # repeated eigenvalues are one spectral point
    D[D <= 1e-12 * max(1.0, float(np.abs(pts).max()))] = np.inf
    nn = D.min(axis=1)
    nn = nn[np.isfinite(nn)]
    if nn.size == 0:
        return 3 * step
    return float(max(3 * step, 0.6 * nn.max()))


def rasterize(S, window, resolution, thickening: float) -> np.ndarray:
    """Boolean ``(ny, nx)`` mask of grid nodes within ``thickening`` of a point of ``S``."""
    a, b, c, d = _check_window(window)
    nx, ny = _check_resolution(resolution)
    dx, dy = grid_step(window, resolution)
    xs = np.linspace(a, b, nx)
    ys = np.linspace(c, d, ny)
    mask = np.zeros((ny, nx), dtype=bool)
    for p in _points(S):
        i0 = max(0, int(np.floor((p.real - thickening - a) / dx)))
        i1 = min(nx - 1, int(np.ceil((p.real + thickening - a) / dx)))
        j0 = max(0, int(np.floor((p.imag - thickening - c) / dy)))
        j1 = min(ny - 1, int(np.ceil((p.imag + thickening - c) / dy)))
        if i0 > i1 or j0 > j1:
            continue
        sub = np.abs(xs[None, i0 : i1 + 1] + 1j * ys[j0 : j1 + 1, None] - p) <= thickening
        mask[j0 : j1 + 1, i0 : i1 + 1] |= sub
    return mask


def _check_hole_preconditions(S, window, resolution, thickening) -> None:
    a, b, c, d = _check_window(window)
    step = max(grid_step(window, resolution))
    if thickening < 2 * step - 1e-12 * step:
        raise InputError(
            f"thickening {thickening:.3g} must be at least 2 grid steps ({2 * step:.3g})"
        )
    pts = _points(S)
    if pts.size == 0:
        raise InputError("empty spectrum")
    margin = 2 * thickening
    if (
        pts.real.min() - margin < a
        or pts.real.max() + margin > b
        or pts.imag.min() - margin < c
        or pts.imag.max() + margin > d
    ):
        raise InputError("window must contain the spectrum with margin >= 2 * thickening")


def label_complement(mask: np.ndarray) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Label 4-connected components of ``~mask``.

    Returns ``(labels, hole_labels, outer)`` where ``outer`` marks the
    components touching the grid boundary (the unbounded component).
    """
    labels, _ = ndimage.label(~mask, structure=_FOUR_CONNECTED)
    border = np.unique(
        np.concatenate([labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])
    )
    border = border[border > 0]
    outer = np.isin(labels, border)
    present = np.unique(labels)
    holes = [int(k) for k in present if k > 0 and k not in set(border.tolist())]
    return labels, holes, outer


@dataclass
class Hole:
    representative_point: complex
    cell_count: int
    area_estimate: float
    label: int = field(default=0, repr=False)

    def to_dict(self) -> dict:
        return {
            "representative": io.cplx(self.representative_point),
            "cell_count": int(self.cell_count),
            "area_estimate": float(self.area_estimate),
        }


@dataclass
class HoleReport:
    holes: list[Hole]
    unbounded_component_cells: int
    window: Window
    resolution: tuple[int, int]
    thickening: float
    labels: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.holes)

    def hole_at(self, z: complex) -> Hole | None:
        """The hole whose raster contains the node nearest ``z`` (or ``None``)."""
        if self.labels is None:
            return None
        a, b, c, d = self.window
        dx, dy = grid_step(self.window, self.resolution)
        i = int(round((z.real - a) / dx))
        j = int(round((z.imag - c) / dy))
        nx, ny = self.resolution
        if not (0 <= i < nx and 0 <= j < ny):
            return None
        lab = self.labels[j, i]
        for h in self.holes:
            if h.label == lab:
                return h
        return None

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "resolution": list(self.resolution),
            "thickening": float(self.thickening),
            "hole_count": len(self.holes),
            "holes": [h.to_dict() for h in self.holes],
            "unbounded_component_cells": int(self.unbounded_component_cells),
        }


def detect_holes(S, window, resolution, thickening: float) -> HoleReport:
    """Bounded components of the thickened spectrum's complement on a raster."""
    window = _check_window(window)
    resolution = _check_resolution(resolution)
    _check_hole_preconditions(S, window, resolution, thickening)
    mask = rasterize(S, window, resolution, thickening)
    labels, hole_labels, outer = label_complement(mask)
    dx, dy = grid_step(window, resolution)
    xs = np.linspace(window[0], window[1], resolution[0])
    ys = np.linspace(window[2], window[3], resolution[1])
    holes = []
    for lab in hole_labels:
        jj, ii = np.nonzero(labels == lab)
        cells = xs[ii] + 1j * ys[jj]
        centroid = cells.mean()
        rep = cells[np.argmin(np.abs(cells - centroid))]
        holes.append(Hole(complex(rep), int(ii.size), float(ii.size * dx * dy), lab))
    return HoleReport(holes, int(outer.sum()), window, resolution, float(thickening), labels)


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Complement of the boundary-connected component of ``~mask``."""
    _, _, outer = label_complement(np.asarray(mask, dtype=bool))
    return ~outer


def polynomial_hull(
    S: Union[SpectrumSet, Sequence[complex], GridRegion],
    window=None,
    resolution=None,
    thickening: float | None = None,
) -> GridRegion:
    """Raster polynomially convex hull: thickened spectrum plus all its holes.

    Passing a membership :class:`GridRegion` (e.g. a previous hull) fills its
    holes on the same raster without re-thickening, which makes the operation
    idempotent.
    """
    if isinstance(S, GridRegion):
        return GridRegion(S.window, S.resolution, fill_holes(S.field > 0.5).astype(float), "membership")
    window = _check_window(window)
    resolution = _check_resolution(resolution)
    if thickening is None:
        raise InputError("thickening is required when hulling a point set")
    _check_hole_preconditions(S, window, resolution, thickening)
    mask = rasterize(S, window, resolution, thickening)
    return GridRegion(window, resolution, fill_holes(mask).astype(float), "membership")


def spectrum_region(S, window, resolution, thickening: float) -> GridRegion:
    mask = rasterize(S, _check_window(window), _check_resolution(resolution), thickening)
    return GridRegion(window, resolution, mask.astype(float), "membership")


# ---------------------------------------------------------------------------
# Pseudospectra
# ---------------------------------------------------------------------------


def _log_resolvent_row(A: np.ndarray, xs: np.ndarray, y: float, cap: float):
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    vals = np.empty(xs.size)
    flags = np.zeros(xs.size, dtype=bool)
    for i, x in enumerate(xs):
        try:
            s = np.linalg.svd((x + 1j * y) * eye - A, compute_uv=False)[-1]
        except np.linalg.LinAlgError:
            vals[i], flags[i] = cap, True
            continue
        if s <= 0.0:
            vals[i], flags[i] = cap, True
            continue
        v = -np.log10(s)
        if v >= cap:
            vals[i], flags[i] = cap, True
        else:
            vals[i] = v
    return vals, flags


def pseudospectrum(M, window, resolution, cap: float = PSEUDO_CAP) -> GridRegion:
    """``log10(1 / smin(lam*I - M))`` on the grid nodes, clipped at ``cap``.

    Rows are independent work items (see :func:`specdisc._parallel.pmap`);
    cells where the SVD fails or ``smin`` underflows are set to ``cap`` and
    flagged in ``clipped``.
    """
    A = as_matrix(M)
    window = _check_window(window)
    nx, ny = _check_resolution(resolution)
    xs = np.linspace(window[0], window[1], nx)
    ys = np.linspace(window[2], window[3], ny)
    rows = pmap(lambda y: _log_resolvent_row(A, xs, y, cap), ys)
    field_ = np.vstack([r[0] for r in rows])
    clipped = np.vstack([r[1] for r in rows])
    return GridRegion(window, (nx, ny), field_, "log10_resolvent", clipped)
