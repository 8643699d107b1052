"""Composite models f(t(x)), their error calculus and smoothness arithmetic.

Composing an outer polynomial space with a fixed inner map gives a linear
model on the design; its complexity charge stacks the outer weight, the
product-net weight and the net log-cardinality bound.  The scalar rules
(critical net resolution, Holder index bound, smoothness comparison) live
here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, StructuralError
from .functions import DesignMeasure, GridFunction, Modulus, modulus_eval
from .partitions import PolySpace


def _inner_values(inner, measure: DesignMeasure) -> np.ndarray:
    if isinstance(inner, np.ndarray):
        vals = np.atleast_2d(inner.T).T if inner.ndim == 1 else inner
    else:
        vals = np.column_stack([g.values for g in inner])
    if vals.shape[0] != measure.n_nodes:
        raise StructuralError("inner values do not match the design size")
    return vals


def _weighted_orthonormal(
    mat: np.ndarray, weights: np.ndarray, tol: float = 1e-10
) -> np.ndarray:
    """Orthonormal column span of ``mat`` under the weighted inner product."""
    sqrt_w = np.sqrt(weights)
    a = sqrt_w[:, None] * mat
    q, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((mat.shape[0], 0))
    rank = int(np.sum(diag > tol * diag[0]))
    return q[:, :rank] / np.maximum(sqrt_w[:, None], 1e-300)


@dataclass(frozen=True)
class CompositeModel:
    """Linear model spanned by an outer basis composed with an inner map."""

    model_id: str
    outer: PolySpace
    inner_values: np.ndarray
    measure: DesignMeasure
    q_matrix: np.ndarray  # orthonormal columns under the design weights
    dim_charged: int
    delta_pi: float

    @property
    def realized_dim(self) -> int:
        return self.q_matrix.shape[1]

    @property
    def rank_drop(self) -> int:
        return self.dim_charged - self.realized_dim


def compose_model(
    outer: PolySpace,
    inner,
    measure: DesignMeasure,
    *,
    delta_gamma: float = 0.0,
    delta_lambda: float = 0.0,
    log_card_bound: float = 0.0,
    model_id: str = "composite",
) -> CompositeModel:
    """Evaluate the outer basis along the inner map and re-orthonormalize.

    The realized dimension can drop when the inner image misses cells; the
    complexity charge keeps the outer nominal dimension regardless, and
    ``delta_pi`` stacks the three weight contributions it was handed.
    """
    vals = _inner_values(inner, measure)
    if vals.shape[1] != outer.partition.dim_k:
        raise StructuralError(
            f"inner map has {vals.shape[1]} components, outer space expects "
            f"{outer.partition.dim_k}"
        )
    if np.any(np.abs(vals) > 1 + 1e-9):
        raise DomainError("inner values leave [-1,1]^l")
    vals = np.clip(vals, -1.0, 1.0)
    composed = outer.evaluate_basis(vals)
    q = _weighted_orthonormal(composed, measure.weights)
    return CompositeModel(
        model_id=model_id,
        outer=outer,
        inner_values=vals,
        measure=measure,
        q_matrix=q,
        dim_charged=outer.dimension,
        delta_pi=float(delta_gamma + delta_lambda + log_card_bound),
    )


# ---------------------------------------------------------------------------
# Composition error bound
# ---------------------------------------------------------------------------


def _pnorm(vals: np.ndarray, weights: np.ndarray, p) -> float:
    a = np.abs(vals)
    if p == 1:
        return float(np.dot(weights, a))
    if p == 2:
        return math.sqrt(float(np.dot(weights, a * a)))
    if p == math.inf or p == "inf":
        return float(a.max()) if a.size else 0.0
    raise DomainError("p must be 1, 2 or inf")


@dataclass(frozen=True)
class GapReport:
    bound: float
    measured_gap: float
    holds: bool


def composition_gap_bound(
    g: Callable,
    f: Callable,
    u,
    t,
    moduli: Sequence[Modulus],
    p,
    measure: DesignMeasure,
    sup_grid: int = 4096,
) -> GapReport:
    """Check |g(u) - f(t)|_p <= sup|g - f| + 2^(1/p) sum_j w_j(|u_j - t_j|_p).

    The sup of |g - f| is taken over a quasi-dense grid of [-1,1]^l joined
    with the values of u and t, which is what the triangle-inequality proof
    consumes, so the inequality is exact up to float noise whenever each
    w_j really is a coordinate-j modulus for g.
    """
    uv = _inner_values(u, measure)
    tv = _inner_values(t, measure)
    l = uv.shape[1]
    if len(moduli) != l:
        raise StructuralError("need one modulus per inner component")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(7)))
    grid = rng.uniform(-1.0, 1.0, size=(sup_grid, l))
    eval_pts = np.vstack([grid, uv, tv])
    d_inf = float(np.max(np.abs(np.asarray(g(eval_pts)) - np.asarray(f(eval_pts)))))
    factor = 1.0 if p == math.inf or p == "inf" else 2.0 ** (1.0 / p)
    w_term = 0.0
    for j in range(l):
        dist_j = min(_pnorm(uv[:, j] - tv[:, j], measure.weights, p), 2.0)
        w_term += float(modulus_eval(moduli[j], dist_j))
    bound = d_inf + factor * w_term
    gap_vals = np.asarray(g(uv)).ravel() - np.asarray(f(tv)).ravel()
    measured = _pnorm(gap_vals, measure.weights, p)
    return GapReport(bound, measured, measured <= bound + 1e-9)


# ---------------------------------------------------------------------------
# Critical net resolution
# ---------------------------------------------------------------------------


def critical_index(
    w: Modulus, l: int, tau: float, dim: int, i_cap: int = 200
) -> int:
    """Smallest i >= 1 with l w(e^{-i})^2 <= tau i dim (1 when dim = 0)."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    if dim == 0:
        return 1
    for i in range(1, i_cap + 1):
        if l * float(modulus_eval(w, math.exp(-i))) ** 2 <= tau * i * dim:
            return i
    raise DomainError(
        f"no critical index up to {i_cap}; modulus does not vanish at 0?"
    )


def holder_index_bound(
    alpha: float, L: float, l: int, tau: float, dim: int
) -> float:
    """Closed-form dominator of the critical index for Holder moduli."""
    if dim < 1:
        raise DomainError("dimension must be >= 1 for the closed form")
    if not (0 < alpha <= 1) or L <= 0 or tau <= 0 or l < 1:
        raise DomainError("need alpha in (0,1], L > 0, tau > 0, l >= 1")
    return max(math.log(l * L * L / (tau * dim)) / alpha, 1.0)


# ---------------------------------------------------------------------------
# Smoothness arithmetic
# ---------------------------------------------------------------------------


def phi(x: float, y: float) -> float:
    """Composite smoothness of exponents x and y: xy if both <= 1, else min."""
    if x <= 0 or y <= 0:
        raise DomainError("phi needs positive arguments")
    return x * y if max(x, y) <= 1 else min(x, y)


def _harmonic_mean(vals: Sequence[float]) -> float:
    vals = list(vals)
    return len(vals) / sum(1.0 / v for v in vals)


@dataclass(frozen=True)
class SmoothnessSpec:
    """Outer/inner Holder exponents and constants of a composite target."""

    alpha: tuple[float, ...]          # outer exponents, one per inner component
    beta: tuple[tuple[float, ...], ...]  # inner exponents, one vector per j
    L: float = 1.0
    R: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.alpha) != len(self.beta) or not self.alpha:
            raise StructuralError("need one beta vector per alpha entry")
        if any(a <= 0 for a in self.alpha) or self.L <= 0:
            raise DomainError("exponents and constants must be positive")
        for b in self.beta:
            if not b or any(x <= 0 for x in b):
                raise DomainError("inner exponents must be positive")

    @property
    def l(self) -> int:
        return len(self.alpha)

    @property
    def k(self) -> int:
        return len(self.beta[0])

    @property
    def alpha_bar(self) -> float:
        return _harmonic_mean(self.alpha)

    def beta_bar(self, j: int) -> float:
        return _harmonic_mean(self.beta[j])


@dataclass(frozen=True)
class SmoothnessComparison:
    theta: tuple[float, ...]
    theta_bar: float
    beta_bar_times_min: float
    holds: bool
    equality: bool


def smoothness_compare(alpha: float, beta: Sequence[float]) -> SmoothnessComparison:
    """Composite exponents theta_i = phi(beta_i, alpha) vs beta_bar (alpha^1).

    The harmonic mean of theta never exceeds beta_bar * min(alpha, 1), with
    equality exactly when every beta_i <= max(alpha, 1).
    """
    theta = tuple(phi(b, alpha) for b in beta)
    theta_bar = _harmonic_mean(theta)
    rhs = _harmonic_mean(beta) * min(alpha, 1.0)
    return SmoothnessComparison(
        theta=theta,
        theta_bar=theta_bar,
        beta_bar_times_min=rhs,
        holds=theta_bar <= rhs + 1e-12,
        equality=max(beta) <= max(alpha, 1.0) + 1e-12,
    )


def rate_exponent(scenario: str, spec: SmoothnessSpec, j: int = 0) -> float:
    """Risk decay exponent in tau for the supported structural scenarios."""
    if scenario == "composite-smooth":
        s = 2.0 * spec.beta_bar(j) * min(spec.alpha[j], 1.0)
        return s / (s + spec.k)
    if scenario == "outer-only":
        return 2.0 * spec.alpha_bar / (2.0 * spec.alpha_bar + spec.l)
    if scenario == "additive":
        s = 2.0 * min(spec.alpha[0], 1.0) * spec.beta_bar(j)
        return s / (s + 1.0)
    if scenario == "plain-holder":
        if spec.l != 1:
            raise DomainError("plain-holder comparison is for l = 1")
        cmp = smoothness_compare(spec.alpha[0], spec.beta[0])
        return 2.0 * cmp.theta_bar / (2.0 * cmp.theta_bar + spec.k)
    raise DomainError(f"unknown scenario {scenario!r}")
