"""Anisotropic dyadic partitions of [-1,1]^k and piecewise polynomial spaces.

A partition is produced by recursively splitting hyperrectangles in half
along one axis.  On each partition, tensor polynomials of coordinate degree
<= r span a linear model; complexity weights over a collection satisfy a
Kraft inequality by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import BudgetError, CertificateError, DomainError, StructuralError
from .functions import DesignMeasure, GridFunction

# A cell is one (level, index) pair per axis; the axis interval at (m, j) is
# [j*2^(1-m) - 1, (j+1)*2^(1-m) - 1).  Level 0 index 0 is [-1, 1).
Cell = tuple[tuple[int, int], ...]

# A split tree is None (leaf) or (axis, left_tree, right_tree).
SplitTree = tuple | None

_ROOT_SHAPE_CAP = 2_000_000


def _axis_interval(level: int, index: int) -> tuple[float, float]:
    width = 2.0 ** (1 - level)
    lo = index * width - 1.0
    return lo, lo + width


def cell_bounds(cell: Cell) -> tuple[np.ndarray, np.ndarray]:
    lows, highs = [], []
    for level, index in cell:
        lo, hi = _axis_interval(level, index)
        lows.append(lo)
        highs.append(hi)
    return np.array(lows), np.array(highs)


def _tree_cells(tree: SplitTree, cell: Cell) -> list[Cell]:
    if tree is None:
        return [cell]
    axis, left, right = tree
    level, index = cell[axis]
    lcell = cell[:axis] + ((level + 1, 2 * index),) + cell[axis + 1:]
    rcell = cell[:axis] + ((level + 1, 2 * index + 1),) + cell[axis + 1:]
    return _tree_cells(left, lcell) + _tree_cells(right, rcell)


@dataclass(frozen=True)
class DyadicPartition:
    """Partition of [-1,1]^k into dyadic hyperrectangles via axis splits."""

    dim_k: int
    split_tree: SplitTree

    def __post_init__(self):
        root: Cell = tuple((0, 0) for _ in range(self.dim_k))
        cells = tuple(sorted(_tree_cells(self.split_tree, root)))
        object.__setattr__(self, "_cells", cells)

    @property
    def cells(self) -> tuple[Cell, ...]:
        return self._cells

    @property
    def n_cells(self) -> int:
        return len(self._cells)

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Index of the cell containing each point (top edges closed)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim_k:
            raise StructuralError(
                f"points have dim {pts.shape[1]}, partition has {self.dim_k}"
            )
        out = np.full(pts.shape[0], -1, dtype=int)
        for ci, cell in enumerate(self._cells):
            lows, highs = cell_bounds(cell)
            mask = np.ones(pts.shape[0], dtype=bool)
            for a in range(self.dim_k):
                upper = (
                    pts[:, a] <= highs[a] + 1e-12
                    if highs[a] >= 1.0 - 1e-12
                    else pts[:, a] < highs[a]
                )
                mask &= (pts[:, a] >= lows[a]) & upper
            if np.any(out[mask] >= 0):
                raise StructuralError("overlapping cells in partition")
            out[mask] = ci
        if np.any(out < 0):
            raise StructuralError("point not covered by any cell")
        return out

    def refine(self, cell_index: int, axis: int) -> "DyadicPartition":
        """New partition with one cell split in half along one axis."""
        target = self._cells[cell_index]

        def rebuild(tree: SplitTree, cell: Cell) -> SplitTree:
            if tree is None:
                if cell == target:
                    return (axis, None, None)
                return None
            ax, left, right = tree
            level, index = cell[ax]
            lcell = cell[:ax] + ((level + 1, 2 * index),) + cell[ax + 1:]
            rcell = cell[:ax] + ((level + 1, 2 * index + 1),) + cell[ax + 1:]
            return (ax, rebuild(left, lcell), rebuild(right, rcell))

        root: Cell = tuple((0, 0) for _ in range(self.dim_k))
        return DyadicPartition(self.dim_k, rebuild(self.split_tree, root))


def root_partition(dim_k: int) -> DyadicPartition:
    return DyadicPartition(dim_k, None)


def uniform_refinement(dim_k: int, levels) -> DyadicPartition:
    """Partition splitting axis a ``levels[a]`` times (scalar = all axes)."""
    if np.isscalar(levels):
        levels = [int(levels)] * dim_k
    levels = list(levels)

    def build(rem: list[int]) -> SplitTree:
        for a in range(dim_k):
            if rem[a] > 0:
                child = rem.copy()
                child[a] -= 1
                sub = build(child)
                return (a, sub, sub)
        return None

    return DyadicPartition(dim_k, build(levels))


@lru_cache(maxsize=None)
def _shape_count(dim_k: int, m: int) -> int:
    # ordered split trees with m leaves: Catalan(m-1) * k^(m-1)
    if m == 1:
        return 1
    return dim_k * sum(
        _shape_count(dim_k, i) * _shape_count(dim_k, m - i) for i in range(1, m)
    )


def enumerate_partitions(
    dim_k: int, cell_budget: int, cap: int = 100_000
) -> list[DyadicPartition]:
    """All distinct dyadic partitions with at most ``cell_budget`` cells.

    Distinctness is at the cell-set level: split orders producing the same
    tiling are merged.  Raises BudgetError (naming the count) when the
    enumeration would exceed ``cap``.
    """
    if dim_k < 1 or cell_budget < 1:
        raise DomainError("dim_k and cell_budget must be >= 1")
    total_shapes = sum(_shape_count(dim_k, m) for m in range(1, cell_budget + 1))
    if total_shapes > _ROOT_SHAPE_CAP:
        raise BudgetError(
            "partition shape enumeration too large", total_shapes, _ROOT_SHAPE_CAP
        )

    seen: dict[tuple[Cell, ...], SplitTree] = {}

    def shapes(budget: int) -> list[SplitTree]:
        out: list[SplitTree] = [None]
        if budget >= 2:
            for axis in range(dim_k):
                for left_budget in range(1, budget):
                    for lt in shapes(left_budget):
                        lsize = _tree_size(lt)
                        if lsize != left_budget:
                            continue
                        for rt in shapes(budget - left_budget):
                            out.append((axis, lt, rt))
        return out

    @lru_cache(maxsize=None)
    def _tree_size(tree: SplitTree) -> int:
        if tree is None:
            return 1
        return _tree_size(tree[1]) + _tree_size(tree[2])

    root: Cell = tuple((0, 0) for _ in range(dim_k))
    for tree in shapes(cell_budget):
        key = tuple(sorted(_tree_cells(tree, root)))
        if key not in seen:
            seen[key] = tree
            if len(seen) > cap:
                raise BudgetError("distinct partition count", len(seen), cap)
    parts = [DyadicPartition(dim_k, t) for t in seen.values()]
    parts.sort(key=lambda p: (p.n_cells, p.cells))
    return parts


def partition_census(
    partitions: Iterable[DyadicPartition],
) -> tuple[dict[int, int], float]:
    """Counts by cell number and the growth constant they certify.

    Returns (census, c) with census[m] = number of partitions having m
    cells and c = max_m log(census[m]) / (m + 1), so that
    census[m] <= exp[c (m+1)] for every observed m.
    """
    census: dict[int, int] = {}
    for p in partitions:
        census[p.n_cells] = census.get(p.n_cells, 0) + 1
    c = max(math.log(cnt) / (m + 1) for m, cnt in census.items())
    return census, max(c, 0.0)


# ---------------------------------------------------------------------------
# Piecewise polynomial spaces
# ---------------------------------------------------------------------------


def _multidegrees(dim_k: int, r: int) -> list[tuple[int, ...]]:
    degs = [()]
    for _ in range(dim_k):
        degs = [d + (j,) for d in degs for j in range(r + 1)]
    return sorted(degs)


def _raw_cell_values(
    points: np.ndarray, cell: Cell, degrees: Sequence[tuple[int, ...]]
) -> np.ndarray:
    """Tensor Legendre values on cell-local coordinates; zero off cell."""
    lows, highs = cell_bounds(cell)
    k = len(cell)
    local = (2.0 * points - (lows + highs)) / (highs - lows)
    inside = np.all((local >= -1 - 1e-12) & (local <= 1 + 1e-12), axis=1)
    n = points.shape[0]
    max_deg = max(max(d) for d in degrees) if degrees else 0
    # per-axis Legendre values up to max degree
    leg = np.zeros((k, max_deg + 1, n))
    for a in range(k):
        for d in range(max_deg + 1):
            coef = np.zeros(d + 1)
            coef[d] = 1.0
            leg[a, d] = np.polynomial.legendre.legval(local[:, a], coef)
    out = np.empty((n, len(degrees)))
    for j, deg in enumerate(degrees):
        v = np.ones(n)
        for a in range(k):
            v = v * leg[a, deg[a]]
        out[:, j] = np.where(inside, v, 0.0)
    return out


@dataclass(frozen=True)
class PolySpace:
    """Piecewise polynomials of coordinate degree <= r on a dyadic partition.

    ``dimension`` is the nominal count |cells| * (r+1)^k and is what the
    selection penalty charges; ``realized_dim`` can be smaller when cells are
    empty under an empirical measure or degenerate node layouts drop rank.
    """

    partition: DyadicPartition
    degree_r: int
    measure: DesignMeasure
    basis: tuple[GridFunction, ...]
    cell_combos: tuple[tuple[int, np.ndarray], ...]  # (cell index, combo matrix)
    dimension: int
    delta: float | None = None

    @property
    def realized_dim(self) -> int:
        return len(self.basis)

    def evaluate_basis(self, points: np.ndarray) -> np.ndarray:
        """Orthonormal basis values at arbitrary points of [-1,1]^k."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        degrees = _multidegrees(self.partition.dim_k, self.degree_r)
        cols = []
        for ci, combo in self.cell_combos:
            raw = _raw_cell_values(pts, self.partition.cells[ci], degrees)
            cols.append(raw @ combo)
        if not cols:
            return np.zeros((pts.shape[0], 0))
        return np.concatenate(cols, axis=1)

    def with_delta(self, delta: float) -> "PolySpace":
        return replace(self, delta=float(delta))


def build_poly_space(
    partition: DyadicPartition,
    degree_r: int,
    measure: DesignMeasure,
    pivot_tol: float = 1e-10,
) -> PolySpace:
    """Orthonormal piecewise polynomial space w.r.t. a design measure.

    Cells holding no nodes contribute nothing; within-cell rank drops (too
    few nodes for the polynomial degree) shed the dependent functions.  The
    nominal dimension |cells|*(r+1)^k is retained for penalty accounting.
    """
    if degree_r < 0 or degree_r > 6:
        raise DomainError("degree must lie in 0..6 (conditioning cap)")
    if partition.dim_k != measure.dim_k:
        raise StructuralError("partition/measure dimension mismatch")
    degrees = _multidegrees(partition.dim_k, degree_r)
    w = measure.weights
    sqrt_w = np.sqrt(w)
    basis_vals: list[np.ndarray] = []
    combos: list[tuple[int, np.ndarray]] = []
    for ci, cell in enumerate(partition.cells):
        raw = _raw_cell_values(measure.nodes, cell, degrees)
        a = sqrt_w[:, None] * raw
        if not np.any(np.abs(a) > 0):
            continue  # empty cell under this measure
        _q, r_mat, piv = scipy.linalg.qr(a, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r_mat))
        rank = int(np.sum(diag > pivot_tol * max(diag[0], 1e-300)))
        if rank == 0:
            continue
        r_inv = scipy.linalg.solve_triangular(
            r_mat[:rank, :rank], np.eye(rank), lower=False
        )
        combo = np.zeros((len(degrees), rank))
        combo[np.asarray(piv[:rank]), :] = r_inv
        combos.append((ci, combo))
        basis_vals.append(raw @ combo)
    basis = tuple(
        GridFunction(measure, basis_vals_block[:, j])
        for basis_vals_block in basis_vals
        for j in range(basis_vals_block.shape[1])
    )
    nominal = partition.n_cells * (degree_r + 1) ** partition.dim_k
    return PolySpace(
        partition=partition,
        degree_r=degree_r,
        measure=measure,
        basis=basis,
        cell_combos=tuple(combos),
        dimension=nominal,
    )


def assign_priors(
    collection: Sequence[PolySpace], scheme: str = "exact-count"
) -> list[PolySpace]:
    """Attach Kraft-valid complexity weights to a collection.

    ``exact-count``: Delta(S) = log(#same cell count in the collection) + m.
    ``paper-c``: Delta(S) = (c+1)(m+1) with c the certified growth constant.
    Both yield sum exp(-Delta) <= sum_m exp(-m) < 1; this is asserted.
    """
    if not collection:
        raise DomainError("empty collection")
    census, c = partition_census([s.partition for s in collection])
    out = []
    for s in collection:
        m = s.partition.n_cells
        if scheme == "exact-count":
            delta = math.log(census[m]) + m
        elif scheme == "paper-c":
            delta = (c + 1.0) * (m + 1.0)
        else:
            raise DomainError(f"unknown prior scheme {scheme!r}")
        out.append(s.with_delta(delta))
    total = kraft_sum(out)
    if total > 1.0 + 1e-12:
        raise CertificateError(
            f"prior scheme {scheme!r} violates Kraft: sum = {total:.6f}"
        )
    return out


def kraft_sum(collection: Iterable) -> float:
    """Sum of exp(-Delta) over models carrying a ``delta`` attribute."""
    total = 0.0
    for s in collection:
        if s.delta is None:
            raise CertificateError("model lacks a complexity weight")
        total += math.exp(-s.delta)
    return total


def best_approx_error(target: GridFunction, space: PolySpace, norm=2) -> float:
    """Distance from a target to a space: L2 projection residual.

    ``norm=2`` is the exact best error.  ``norm=inf`` reports the sup
    residual of the L2 projection, an upper bound on the best sup error.
    """
    if target.measure != space.measure:
        raise StructuralError("target and space live on different measures")
    w = space.measure.weights
    fitted = np.zeros_like(target.values)
    for e in space.basis:
        fitted += float(np.dot(w, target.values * e.values)) * e.values
    resid = target.values - fitted
    if norm == 2:
        return math.sqrt(max(float(np.dot(w, resid * resid)), 0.0))
    if norm == math.inf or norm == "inf":
        return float(np.max(np.abs(resid)))
    raise DomainError("norm must be 2 or inf")


def census_rows(dim_k: int, cell_budget: int, cap: int = 100_000):
    """CSV-ready census rows: (k, cells, count, c_estimate)."""
    parts = enumerate_partitions(dim_k, cell_budget, cap)
    census, c = partition_census(parts)
    return [(dim_k, m, census[m], c) for m in sorted(census)]
