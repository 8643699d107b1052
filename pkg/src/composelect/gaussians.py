"""Hellinger geometry of multivariate Gaussians and parameter nets.

The closed-form distance works on covariance matrices directly; matrix
square roots only enter through the parameter metric |theta| = (mean,
sqrt-covariance entries).  The embedding constants (b, M, R) derive from
the mean radius and covariance spectrum box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructuralError
from .nets import CoefficientDomain, greedy_pack

_SYM_TOL = 1e-10


def frobenius_norm(a: np.ndarray) -> float:
    """Entrywise l2 norm; submultiplicative and orthogonally invariant."""
    return float(np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2)))


@dataclass(frozen=True)
class GaussianBounds:
    """Parameter box: |mean| <= r, sqrt-covariance spectrum in [rho_low, rho_high]."""

    r: float
    rho_low: float
    rho_high: float

    def __post_init__(self):
        if not (0 < self.rho_low < self.rho_high) or self.r <= 0:
            raise DomainError("need 0 < rho_low < rho_high and r > 0")

    def b(self, k: int) -> float:
        return self.r**2 / (2 * self.rho_high**2) + k * math.log(
            math.sqrt(2.0) * self.rho_high / self.rho_low
        )

    def m_radius(self, k: int) -> float:
        return math.sqrt(k) * self.rho_high + self.r

    def lipschitz_const(self, k: int) -> float:
        return math.sqrt(k / 2.0) * math.exp(-self.b(k) / 2.0) / self.rho_low


@dataclass(frozen=True)
class GaussianParam:
    """Mean and covariance of one Gaussian component, optionally box-checked."""

    mean: np.ndarray
    cov: np.ndarray
    bounds: GaussianBounds | None = None

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise StructuralError("covariance shape does not match the mean")
        if np.max(np.abs(cov - cov.T)) > _SYM_TOL:
            raise StructuralError("covariance must be symmetric (tol 1e-10)")
        vals = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        if vals.min() <= 0:
            raise DomainError("covariance must be positive definite")
        if self.bounds is not None:
            bb = self.bounds
            if np.linalg.norm(mean) > bb.r + 1e-9:
                raise DomainError("mean outside the radius-r ball")
            lo, hi = math.sqrt(vals.min()), math.sqrt(vals.max())
            if lo < bb.rho_low - 1e-9 or hi > bb.rho_high + 1e-9:
                raise DomainError("covariance spectrum outside [rho_low^2, rho_high^2]")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @property
    def k(self) -> int:
        return self.mean.size

    def sqrt_cov(self) -> np.ndarray:
        vals, vecs = np.linalg.eigh(self.cov)
        return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T

    def pdf(self, x: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(x)
        diff = pts - self.mean
        sol = np.linalg.solve(self.cov, diff.T).T
        quad = (diff * sol).sum(axis=1)
        _, logdet = np.linalg.slogdet(self.cov)
        log_norm = -0.5 * (self.k * math.log(2 * math.pi) + logdet)
        return np.exp(log_norm - 0.5 * quad)


def param_distance(p0: GaussianParam, p1: GaussianParam) -> float:
    """Euclidean metric on (mean, sqrt-covariance) parameter vectors."""
    dm = float(np.linalg.norm(p0.mean - p1.mean))
    ds = frobenius_norm(p0.sqrt_cov() - p1.sqrt_cov())
    return math.sqrt(dm * dm + ds * ds)


def hellinger_gaussian(p0: GaussianParam, p1: GaussianParam) -> float:
    """Closed-form Hellinger distance between two Gaussians, in [0,1]."""
    if p0.k != p1.k:
        raise StructuralError("dimension mismatch")
    avg = 0.5 * (p0.cov + p1.cov)
    _, ld0 = np.linalg.slogdet(p0.cov)
    _, ld1 = np.linalg.slogdet(p1.cov)
    sa, lda = np.linalg.slogdet(avg)
    if sa <= 0:
        raise AssertionError("average covariance must stay positive definite")
    dm = p1.mean - p0.mean
    quad = float(dm @ np.linalg.solve(avg, dm))
    h2 = 1.0 - math.exp(0.25 * ld0 + 0.25 * ld1 - 0.5 * lda - 0.125 * quad)
    return math.sqrt(min(max(h2, 0.0), 1.0))


def hellinger_quadrature(
    p0: GaussianParam, p1: GaussianParam, nodes_per_axis: int = 2000
) -> float:
    """Direct quadrature of the Hellinger integral (k <= 2 grids).

    For k > 2 a seeded importance-sampling estimate is returned together
    with its standard error via :func:`hellinger_monte_carlo`.
    """
    k = p0.k
    sig = math.sqrt(
        max(np.linalg.eigvalsh(p0.cov).max(), np.linalg.eigvalsh(p1.cov).max())
    )
    lo = np.minimum(p0.mean, p1.mean) - 10 * sig
    hi = np.maximum(p0.mean, p1.mean) + 10 * sig
    if k == 1:
        xs = np.linspace(lo[0], hi[0], nodes_per_axis)[:, None]
        integrand = np.sqrt(p0.pdf(xs) * p1.pdf(xs))
        integral = float(np.trapz(integrand, xs[:, 0]))
    elif k == 2:
        m = max(int(math.sqrt(nodes_per_axis * 200)), 400)
        ax0 = np.linspace(lo[0], hi[0], m)
        ax1 = np.linspace(lo[1], hi[1], m)
        g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
        pts = np.column_stack([g0.ravel(), g1.ravel()])
        vals = np.sqrt(p0.pdf(pts) * p1.pdf(pts)).reshape(m, m)
        integral = float(np.trapz(np.trapz(vals, ax1, axis=1), ax0))
    else:
        raise DomainError("grid quadrature supports k <= 2; use hellinger_monte_carlo")
    return math.sqrt(min(max(1.0 - integral, 0.0), 1.0))


def hellinger_monte_carlo(
    p0: GaussianParam, p1: GaussianParam, n: int = 200_000, seed: int = 0
) -> tuple[float, float]:
    """Seeded Monte Carlo Hellinger estimate (h, stderr of h^2) for any k."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    mean = 0.5 * (p0.mean + p1.mean)
    cov = p0.cov + p1.cov  # wide proposal
    chol = np.linalg.cholesky(cov)
    x = mean + rng.standard_normal((n, p0.k)) @ chol.T
    qp = GaussianParam(mean, cov)
    ratio = np.sqrt(p0.pdf(x) * p1.pdf(x)) / qp.pdf(x)
    est = float(ratio.mean())
    se = float(ratio.std(ddof=1) / math.sqrt(n))
    h2 = min(max(1.0 - est, 0.0), 1.0)
    return math.sqrt(h2), se


@dataclass(frozen=True)
class LipschitzReport:
    lhs: float
    rhs: float
    holds: bool
    intermediate_holds: bool


def mixture_param_lipschitz_check(
    p0: GaussianParam, p1: GaussianParam, bounds: GaussianBounds
) -> LipschitzReport:
    """Check the parametrization bound d(u0, u1) <= R |theta0 - theta1|.

    The left side is sqrt(2) e^{-b/2} h; the intermediate inequality
    4 h^2 <= (k / rho_low^2) |theta0 - theta1|^2 is asserted alongside.
    """
    for p in (p0, p1):
        GaussianParam(p.mean, p.cov, bounds)  # revalidate against the box
    k = p0.k
    h = hellinger_gaussian(p0, p1)
    dist = param_distance(p0, p1)
    lhs = math.sqrt(2.0) * math.exp(-bounds.b(k) / 2.0) * h
    rhs = bounds.lipschitz_const(k) * dist
    inter = 4.0 * h * h <= (k / bounds.rho_low**2) * dist * dist + 1e-9
    return LipschitzReport(lhs, rhs, lhs <= rhs + 1e-9, inter)


def embedding_sup(
    p: GaussianParam, bounds: GaussianBounds, points: np.ndarray
) -> float:
    """Max of e^{-b} dN(m,C)/dmu over probe points, mu = N(0, 2 rho_high^2 I).

    Values never exceed 1, which is what keeps the embedded parametrization
    inside the unit-range function class.
    """
    k = p.k
    mu = GaussianParam(np.zeros(k), 2.0 * bounds.rho_high**2 * np.eye(k))
    ratio = p.pdf(points) / mu.pdf(points)
    return float(np.max(math.exp(-bounds.b(k)) * ratio))


# ---------------------------------------------------------------------------
# Parameter nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaNet:
    points: np.ndarray
    eta: float
    log_card: float
    log_card_bound: float
    delta: float
    separation: float
    covering_radius: float


def theta_net(
    m_radius: float,
    beta: float,
    lip_r: float,
    i: int,
    k: int,
    seed: int = 0,
    cloud_factor: int = 2048,
) -> ThetaNet:
    """Separated net of the radius-M parameter ball at eta = (R e^i)^(-1/beta).

    log-cardinality is bounded by k [log(1 + 2 M R^(1/beta)) + i / beta] and
    the attached weight adds i on top of that bound.
    """
    if not (0 < beta <= 1):
        raise DomainError("beta must lie in (0,1]")
    if i < 1 or m_radius <= 0 or lip_r <= 0 or k < 1:
        raise DomainError("need i >= 1 and positive M, R, k")
    eta = (lip_r * math.exp(i)) ** (-1.0 / beta)
    pack = greedy_pack(
        CoefficientDomain("ball", m_radius),
        k,
        eta,
        seed,
        cloud_factor=cloud_factor,
    )
    log_card = math.log(pack.points.shape[0])
    bound = k * (math.log(1.0 + 2.0 * m_radius * lip_r ** (1.0 / beta)) + i / beta)
    if log_card > bound + 1e-9:
        raise AssertionError("theta net exceeded its log-cardinality bound")
    return ThetaNet(
        points=pack.points,
        eta=eta,
        log_card=log_card,
        log_card_bound=bound,
        delta=bound + i,
        separation=pack.separation,
        covering_radius=pack.covering_radius,
    )


def hellinger_table_rows(
    n_pairs: int, bounds: GaussianBounds, k: int = 2, seed: int = 0
) -> list[tuple]:
    """CSV rows (pair, h, h2, lhs, rhs, holds) over random in-box pairs."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    rows = []
    for idx in range(n_pairs):
        p0 = random_param(bounds, k, rng)
        p1 = random_param(bounds, k, rng)
        rep = mixture_param_lipschitz_check(p0, p1, bounds)
        h = hellinger_gaussian(p0, p1)
        rows.append((idx, repr(h), repr(h * h), repr(rep.lhs), repr(rep.rhs), rep.holds))
    return rows


def random_param(
    bounds: GaussianBounds, k: int, rng: np.random.Generator
) -> GaussianParam:
    """Uniform-ish sample of the parameter box (means in the ball, spectra in range)."""
    direction = rng.standard_normal(k)
    direction /= np.linalg.norm(direction)
    mean = bounds.r * rng.uniform() ** (1.0 / k) * direction
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    rho = rng.uniform(bounds.rho_low, bounds.rho_high, size=k)
    sqrt_cov = (q * rho) @ q.T
    return GaussianParam(mean, sqrt_cov @ sqrt_cov.T, bounds)
