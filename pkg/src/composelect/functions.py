"""Sampled functions on probability designs, norms, moduli of continuity.

Everything downstream works with functions represented by their values on a
finite node set carrying a probability measure: quadrature grids for Lebesgue
cases, data designs for regression.  Norms, inner products and projections are
weighted sums under that measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, RankDeficiencyError, StructuralError

LEBESGUE_QUADRATURE = "lebesgue-quadrature"
EMPIRICAL_DESIGN = "empirical-design"

_WEIGHT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DesignMeasure:
    """Probability measure supported on finitely many nodes in [-1,1]^k.

    Parameters
    ----------
    nodes : ndarray, shape (n, k)
        Node coordinates, each in [-1,1]^k.
    weights : ndarray, shape (n,)
        Nonnegative weights summing to one.
    kind : str
        ``"lebesgue-quadrature"`` or ``"empirical-design"``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = LEBESGUE_QUADRATURE

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.shape[0] != weights.shape[0]:
            raise StructuralError(
                f"{nodes.shape[0]} nodes but {weights.shape[0]} weights"
            )
        if self.kind not in (LEBESGUE_QUADRATURE, EMPIRICAL_DESIGN):
            raise StructuralError(f"unknown measure kind {self.kind!r}")
        if np.any(weights < 0):
            raise StructuralError("negative weight")
        if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
            raise StructuralError(
                f"weights sum to {weights.sum():.17g}, expected 1"
            )
        if nodes.size and (nodes.min() < -1 - 1e-12 or nodes.max() > 1 + 1e-12):
            raise DomainError("node outside [-1,1]^k")
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def dim_k(self) -> int:
        return self.nodes.shape[1]

    def dot(self, a: np.ndarray, b: np.ndarray) -> float:
        """Weighted inner product of two value arrays."""
        return float(np.dot(self.weights, np.asarray(a) * np.asarray(b)))


def uniform_grid(dim_k: int, nodes_per_axis: int) -> DesignMeasure:
    """Equal-weight tensor grid including endpoints (linspace per axis)."""
    axes = [np.linspace(-1.0, 1.0, nodes_per_axis)] * dim_k
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    n = nodes.shape[0]
    return DesignMeasure(nodes, np.full(n, 1.0 / n), LEBESGUE_QUADRATURE)


def lebesgue_quadrature(
    dim_k: int, nodes_per_axis: int = 64, seed: int = 0, mc_nodes: int = 65536
) -> DesignMeasure:
    """Quadrature proxy for the Lebesgue probability on [-1,1]^k.

    Tensor midpoint rule for k <= 3; seeded Monte Carlo beyond that (the
    tensor grid would explode).
    """
    if dim_k <= 3:
        step = 2.0 / nodes_per_axis
        axis = -1.0 + step * (np.arange(nodes_per_axis) + 0.5)
        mesh = np.meshgrid(*([axis] * dim_k), indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=1)
        n = nodes.shape[0]
        return DesignMeasure(nodes, np.full(n, 1.0 / n), LEBESGUE_QUADRATURE)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    nodes = rng.uniform(-1.0, 1.0, size=(mc_nodes, dim_k))
    return DesignMeasure(
        nodes, np.full(mc_nodes, 1.0 / mc_nodes), LEBESGUE_QUADRATURE
    )


def empirical_design(points: np.ndarray) -> DesignMeasure:
    """Uniform empirical measure on given design points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    return DesignMeasure(points, np.full(n, 1.0 / n), EMPIRICAL_DESIGN)


@dataclass(frozen=True)
class GridFunction:
    """Real function represented by one value per node of a measure."""

    measure: DesignMeasure
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.shape[0] != self.measure.n_nodes:
            raise StructuralError(
                f"{values.shape[0]} values for {self.measure.n_nodes} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise StructuralError("non-finite function value")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def from_callable(cls, measure: DesignMeasure, fn: Callable) -> "GridFunction":
        pts = measure.nodes
        vals = np.asarray(fn(pts), dtype=float).ravel()
        return cls(measure, vals)


def lp_norm(f: GridFunction, p) -> float:
    """Weighted L_p norm under the function's measure; p in {1, 2, inf}."""
    v = np.abs(f.values)
    if p == 1:
        return float(np.dot(f.measure.weights, v))
    if p == 2:
        return math.sqrt(float(np.dot(f.measure.weights, v * v)))
    if p == math.inf or p == "inf":
        return float(v.max()) if v.size else 0.0
    raise DomainError(f"p must be 1, 2 or inf, got {p!r}")


def orthonormalize(
    basis: Sequence[GridFunction], tol: float = 1e-10
) -> list[GridFunction]:
    """Modified Gram-Schmidt under the shared measure's inner product.

    Raises
    ------
    RankDeficiencyError
        If some input function is within ``tol`` (relative) of the span of
        its predecessors; the offending index is reported.
    """
    if not basis:
        return []
    measure = basis[0].measure
    out_vals: list[np.ndarray] = []
    w = measure.weights
    for idx, f in enumerate(basis):
        if f.measure is not measure and f.measure != measure:
            raise StructuralError("mixed measures in basis")
        v = f.values.copy()
        scale = math.sqrt(float(np.dot(w, v * v)))
        for _ in range(2):  # re-orthogonalized MGS for numerical safety
            for q in out_vals:
                v -= np.dot(w, v * q) * q
        nrm = math.sqrt(float(np.dot(w, v * v)))
        if nrm <= tol * max(scale, 1.0):
            raise RankDeficiencyError(idx, nrm)
        out_vals.append(v / nrm)
    return [GridFunction(measure, v) for v in out_vals]


# ---------------------------------------------------------------------------
# Moduli of continuity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Modulus:
    """Concave nondecreasing modulus of continuity w on [0,2], w(0)=0.

    Two forms: ``holder`` with w(z) = L z**alpha, alpha in (0,1], and
    ``tabulated``, a piecewise-linear concave interpolant.
    """

    form: str
    L: float = 0.0
    alpha: float = 0.0
    knots: np.ndarray = field(default_factory=lambda: np.zeros(0))
    knot_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def holder(cls, L: float, alpha: float) -> "Modulus":
        if not (L > 0):
            raise DomainError(f"Holder constant must be positive, got {L}")
        if not (0 < alpha <= 1):
            raise DomainError(f"Holder exponent must lie in (0,1], got {alpha}")
        return cls("holder", L=float(L), alpha=float(alpha))

    @classmethod
    def tabulated(cls, knots, values) -> "Modulus":
        z = np.asarray(knots, dtype=float).ravel()
        v = np.asarray(values, dtype=float).ravel()
        if z.shape != v.shape or z.size < 2:
            raise StructuralError("need matching knot/value arrays, >= 2 knots")
        if z[0] != 0.0 or abs(v[0]) > 0:
            raise DomainError("tabulated modulus must start at (0, 0)")
        if np.any(np.diff(z) <= 0):
            raise DomainError("knots must be strictly increasing")
        if z[-1] > 2.0 + 1e-12:
            raise DomainError("knots must lie in [0, 2]")
        if np.any(np.diff(v) < -1e-12):
            raise DomainError("tabulated modulus must be nondecreasing")
        slopes = np.diff(v) / np.diff(z)
        if np.any(np.diff(slopes) > 1e-10):
            raise DomainError("tabulated modulus must be concave")
        if z[-1] < 2.0:  # extend flat to cover [0,2]; keeps concavity
            z = np.append(z, 2.0)
            v = np.append(v, v[-1])
        return cls("tabulated", knots=_frozen(z), knot_values=_frozen(v))

    def __call__(self, z) -> np.ndarray | float:
        return modulus_eval(self, z)


def modulus_eval(w: Modulus, z):
    """Evaluate a modulus at z in [0, 2] (scalar or array)."""
    arr = np.asarray(z, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 2 + 1e-12):
        raise DomainError("modulus argument outside [0, 2]")
    arr = np.clip(arr, 0.0, 2.0)
    if w.form == "holder":
        out = w.L * np.power(arr, w.alpha)
    else:
        out = np.interp(arr, w.knots, w.knot_values)
    return float(out) if np.isscalar(z) else out


def least_concave_majorant(z: np.ndarray, values: np.ndarray) -> Modulus:
    """Least concave majorant of sampled increments, as a tabulated modulus.

    Input points must include z=0 with value 0.  The majorant is the upper
    convex hull of the graph, so for a genuine (subadditive) raw modulus it
    stays below twice the raw values.
    """
    z = np.asarray(z, dtype=float).ravel()
    v = np.asarray(values, dtype=float).ravel()
    order = np.argsort(z)
    z, v = z[order], v[order]
    if z[0] != 0.0:
        z = np.concatenate([[0.0], z])
        v = np.concatenate([[0.0], v])
    # monotone-chain upper hull over (z, v)
    hull: list[tuple[float, float]] = []
    for zi, vi in zip(z, np.maximum.accumulate(v)):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (zi - x2) <= (vi - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((zi, vi))
    hz = np.array([p[0] for p in hull])
    hv = np.array([p[1] for p in hull])
    keep = np.concatenate([[True], np.diff(hz) > 0])
    return Modulus.tabulated(hz[keep], hv[keep])


@dataclass(frozen=True)
class TransportReport:
    lhs: float
    rhs: float
    holds: bool


def concave_transport_check(w: Modulus, h: GridFunction, p) -> TransportReport:
    """Check ||w(|h|)||_p <= 2^(1/p) w(||h||_p) (with 2^(1/inf) = 1)."""
    wh = GridFunction(h.measure, modulus_eval(w, np.abs(h.values)))
    lhs = lp_norm(wh, p)
    factor = 1.0 if p == math.inf or p == "inf" else 2.0 ** (1.0 / p)
    rhs = factor * float(modulus_eval(w, min(lp_norm(h, p), 2.0)))
    return TransportReport(lhs, rhs, lhs <= rhs + 1e-10)


# ---------------------------------------------------------------------------
# Dimension trade-off bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoptResult:
    d_star: int
    value: float
    paper_bound: float


def lopt_optimize(a: float, b: float, theta: float, d_max: int) -> LoptResult:
    """Minimize a*D**(-theta) + b*D over integers 1..d_max.

    Also returns max{3 a^(1/(theta+1)) b^(theta/(theta+1)), 2b}, which
    dominates the minimum whenever d_max >= ceil((a/b)^(1/(theta+1))) + 1.
    """
    if not (a > 0 and b > 0 and theta > 0):
        raise DomainError("a, b, theta must be positive")
    if d_max < 1:
        raise DomainError(f"d_max must be >= 1, got {d_max}")
    ds = np.arange(1, d_max + 1, dtype=float)
    vals = a * ds ** (-theta) + b * ds
    i = int(np.argmin(vals))
    bound = max(
        3.0 * a ** (1.0 / (theta + 1.0)) * b ** (theta / (theta + 1.0)),
        2.0 * b,
    )
    return LoptResult(i + 1, float(vals[i]), bound)
