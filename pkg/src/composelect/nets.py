"""Model clamping and finite eta-net construction in coefficient space.

Bases are orthonormal under the design measure, so Euclidean geometry on
coefficients equals L2(mu) geometry on functions.  A net is an eta-separated
subset of a model's coefficient domain built by greedy farthest-point
packing over a quasi-random cloud; packing is then driven to saturation
(fresh batches plus projected ascent toward the deepest holes) so that the
emitted net carries a covering certificate: probes of the domain sit within
eta of the net.  Separation strictly exceeds eta throughout, which is what
caps the cardinality at (5/eta)^D.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import BudgetError, DomainError, StructuralError
from .functions import DesignMeasure, GridFunction

LOG5 = math.log(5.0)

_ORTHO_TOL = 1e-8


# ---------------------------------------------------------------------------
# Coefficient domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientDomain:
    """Subset of coefficient space a model is restricted to.

    ``kind`` is one of ``ball`` (Euclidean, the clamped radius-2 case),
    ``l1ball`` or ``sphere``.  ``transform`` maps an underlying parameter
    space onto coefficient space when the two differ (e.g. direction vectors
    onto coefficients of linear functionals); it must be square invertible.
    """

    kind: str
    radius: float
    transform: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("ball", "l1ball", "sphere"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.transform is not None:
            t = np.asarray(self.transform, dtype=float)
            if t.ndim != 2 or t.shape[0] != t.shape[1]:
                raise StructuralError("domain transform must be square")
            object.__setattr__(self, "transform", t)

    def sample(self, dim: int, n: int, seed) -> np.ndarray:
        """Quasi-random points of the domain (Sobol-driven)."""
        sob = qmc.Sobol(d=2 * dim + 1, scramble=True, seed=seed)
        u = np.clip(sob.random(n), 1e-12, 1 - 1e-12)
        if self.kind == "l1ball":
            g = -np.log(u[:, :dim])
            signs = np.where(u[:, dim:2 * dim] > 0.5, 1.0, -1.0)
            pts = signs * g / g.sum(axis=1, keepdims=True)
            pts *= self.radius * u[:, -1:] ** (1.0 / dim)
        else:
            z = ndtri(u[:, :dim])
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            if self.kind == "sphere":
                pts = self.radius * z
            else:
                pts = self.radius * u[:, -1:] ** (1.0 / dim) * z
        if self.transform is not None:
            pts = pts @ self.transform.T
        return pts

    def project(self, pts: np.ndarray) -> np.ndarray:
        """Retract points into the domain (used by the hole-seeking ascent)."""
        pts = np.atleast_2d(pts)
        if self.transform is not None:
            param = np.linalg.solve(self.transform, pts.T).T
        else:
            param = pts
        if self.kind == "ball":
            nrm = np.linalg.norm(param, axis=1, keepdims=True)
            param = param * np.minimum(1.0, self.radius / np.maximum(nrm, 1e-300))
        elif self.kind == "sphere":
            nrm = np.linalg.norm(param, axis=1, keepdims=True)
            safe = np.where(nrm > 1e-300, nrm, 1.0)
            param = np.where(nrm > 1e-300, self.radius * param / safe, 0.0)
            param[np.all(pts == 0, axis=1), 0] = self.radius
        else:
            param = _project_l1(param, self.radius)
        if self.transform is not None:
            param = param @ self.transform.T
        return param


def _project_l1(pts: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball, row-wise."""
    out = pts.copy()
    norms = np.abs(pts).sum(axis=1)
    for i in np.nonzero(norms > radius)[0]:
        v = np.abs(pts[i])
        u = np.sort(v)[::-1]
        css = np.cumsum(u)
        rho = np.nonzero(u * np.arange(1, len(v) + 1) > css - radius)[0][-1]
        theta = (css[rho] - radius) / (rho + 1.0)
        out[i] = np.sign(pts[i]) * np.maximum(v - theta, 0.0)
    return out


# ---------------------------------------------------------------------------
# Linear models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearModel:
    """Finite-dimensional function set used to approximate inner components.

    Either a singleton (empty basis, ``offset`` holds the one member,
    dimension 0) or a subset of the span of an orthonormal basis, cut down
    to ``domain`` in coefficient space once clamped.
    """

    model_id: str
    measure: DesignMeasure
    basis: tuple[GridFunction, ...]
    offset: GridFunction | None = None
    domain: CoefficientDomain | None = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((self.measure.n_nodes, 0))
        return np.column_stack([e.values for e in self.basis])

    def gram_defect(self) -> float:
        b = self.basis_matrix()
        g = b.T @ (self.measure.weights[:, None] * b)
        return float(np.max(np.abs(g - np.eye(b.shape[1])))) if b.size else 0.0


def clamp_model(model: LinearModel) -> LinearModel:
    """Restrict a model to the radius-2 coefficient ball (zero stays inside).

    Models that already carry a domain contained in the ball are returned
    with that domain kept.  Requires an orthonormal basis so that the
    coefficient ball is the function-space ball.
    """
    if model.dimension == 0:
        if model.offset is None:
            raise StructuralError("dimension-0 model without its singleton")
        return model
    defect = model.gram_defect()
    if defect > _ORTHO_TOL:
        raise StructuralError(
            f"basis not orthonormal (Gram defect {defect:.2e}); "
            "orthonormalize before clamping"
        )
    if model.domain is not None:
        return model
    return replace(model, domain=CoefficientDomain("ball", 2.0))


# ---------------------------------------------------------------------------
# Packing engine
# ---------------------------------------------------------------------------


@dataclass
class PackResult:
    points: np.ndarray
    separation: float
    covering_radius: float


def _min_dists(pts: np.ndarray, members: np.ndarray) -> np.ndarray:
    if members.shape[0] > 64:
        tree = cKDTree(members)
        return tree.query(pts, k=1)[0]
    diff = pts[:, None, :] - members[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2)).min(axis=1)


def greedy_pack(
    domain: CoefficientDomain,
    dim: int,
    eta: float,
    seed: int,
    *,
    cloud_factor: int = 4096,
    rounds_cap: int = 200,
    include_origin: bool = True,
    initial_points: np.ndarray | None = None,
) -> PackResult:
    """Saturated eta-separated packing of a coefficient domain.

    Greedy farthest-point packing over a Sobol cloud, then repeated fresh
    batches with projected ascent toward the deepest uncovered holes; any
    probe farther than eta joins the net (preserving separation > eta).
    Stops after two consecutive all-covered verification rounds, whose
    largest probe distance becomes the covering certificate.
    """
    ss = np.random.SeedSequence(entropy=(int(seed), 0x9E3779B9))
    _rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))
    batch = 2 ** int(math.ceil(math.log2(max(cloud_factor * dim, 512))))
    members: list[np.ndarray] = []
    separation = math.inf

    if include_origin:
        members.append(np.zeros(dim))

    def absorb(batch_pts: np.ndarray) -> int:
        """Farthest-first additions from a batch; returns number added."""
        nonlocal separation
        if batch_pts.size == 0:
            return 0
        marr = np.array(members) if members else np.zeros((0, dim))
        d = (
            _min_dists(batch_pts, marr)
            if marr.size
            else np.full(batch_pts.shape[0], math.inf)
        )
        added = 0
        while True:
            i = int(np.argmax(d))
            if d[i] <= eta:
                break
            if math.isfinite(d[i]):
                separation = min(separation, float(d[i]))
            members.append(batch_pts[i].copy())
            added += 1
            delta = batch_pts - batch_pts[i]
            d = np.minimum(d, np.sqrt((delta * delta).sum(axis=1)))
        return added

    def ascend(pts: np.ndarray, tree: cKDTree, steps: int = 24) -> np.ndarray:
        x = pts.copy()
        d, idx = tree.query(x, k=1)
        marr = tree.data
        for step in eta * 0.6 * (0.82 ** np.arange(steps)):
            direction = x - marr[idx]
            nrm = np.linalg.norm(direction, axis=1, keepdims=True)
            rnd = _rng.standard_normal(x.shape)
            rnd /= np.linalg.norm(rnd, axis=1, keepdims=True)
            direction = np.where(nrm > 1e-12, direction / np.maximum(nrm, 1e-300), rnd)
            cand = domain.project(x + step * direction)
            d_new, idx_new = tree.query(cand, k=1)
            better = d_new > d
            x[better] = cand[better]
            d[better] = d_new[better]
            idx[better] = idx_new[better]
        return x

    if initial_points is not None:
        # seed points join first (separation permitting), e.g. anchor
        # directions a benchmark truth is built from
        absorb(np.atleast_2d(np.asarray(initial_points, dtype=float)))
    absorb(domain.sample(dim, batch, seed=int(seed) * 2 + 1))

    clean = 0
    covering = 0.0
    for rnd_idx in range(1, rounds_cap + 1):
        fresh = domain.sample(dim, batch, seed=int(seed) * 2 + 1 + 2 * rnd_idx)
        marr = np.array(members)
        tree = cKDTree(marr)
        d = tree.query(fresh, k=1)[0]
        top = fresh[np.argsort(d)[-128:]]
        pair_idx = _rng.integers(0, marr.shape[0], size=(128, 2))
        mids = domain.project(0.5 * (marr[pair_idx[:, 0]] + marr[pair_idx[:, 1]]))
        climbed = ascend(np.concatenate([top, mids]), tree)
        d_climb = tree.query(climbed, k=1)[0]
        dmax = float(max(d.max(), d_climb.max()))
        if dmax > eta:
            viol = np.concatenate([fresh[d > eta], climbed[d_climb > eta]])
            absorb(viol)
            clean = 0
        else:
            clean += 1
            covering = max(covering, dmax)
            if clean >= 2:
                return PackResult(np.array(members), separation, covering)
    raise BudgetError("packing failed to saturate", rounds_cap, rounds_cap)


# ---------------------------------------------------------------------------
# Clamp nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClampNet:
    """Finite eta-net of a clamped model, members cut into [-1,1]."""

    model: LinearModel
    eta: float
    coef: np.ndarray
    members: tuple[GridFunction, ...]
    separation: float
    covering_radius: float

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def card_bound(self) -> float:
        return (5.0 / self.eta) ** self.model.dimension

    def member_matrix(self) -> np.ndarray:
        return np.column_stack([m.values for m in self.members])

    def sidecar(self) -> dict:
        return {
            "eta": self.eta,
            "dimension": self.model.dimension,
            "cardinality": self.size,
            "bound": self.card_bound,
            "separation": self.separation,
            "covering_radius": self.covering_radius,
        }


def build_eta_net(
    model: LinearModel,
    eta: float,
    seed: int = 0,
    *,
    cloud_factor: int = 4096,
    member_cap: float = 1e6,
    initial_points: np.ndarray | None = None,
) -> ClampNet:
    """Eta-net of a clamped model with separation and covering certificates."""
    if not (0 < eta <= 1):
        raise DomainError(f"eta must lie in (0,1], got {eta}")
    d = model.dimension
    if d == 0:
        if model.offset is None:
            raise StructuralError("dimension-0 model without its singleton")
        member = GridFunction(
            model.measure, np.clip(model.offset.values, -1.0, 1.0)
        )
        return ClampNet(
            model=model,
            eta=eta,
            coef=np.zeros((1, 0)),
            members=(member,),
            separation=math.inf,
            covering_radius=0.0,
        )
    if d > 8:
        raise DomainError(f"net dimension cap is 8, got {d}")
    if model.domain is None:
        raise StructuralError("model must be clamped before netting")
    bound = (5.0 / eta) ** d
    if bound > member_cap:
        raise BudgetError("projected net cardinality", bound, member_cap)
    pack = greedy_pack(
        model.domain,
        d,
        eta,
        seed,
        cloud_factor=cloud_factor,
        initial_points=initial_points,
    )
    if pack.points.shape[0] > bound:
        raise AssertionError("packing exceeded its cardinality bound")
    b = model.basis_matrix()
    vals = np.clip(pack.points @ b.T, -1.0, 1.0)
    members = tuple(GridFunction(model.measure, v) for v in vals)
    return ClampNet(
        model=model,
        eta=eta,
        coef=pack.points,
        members=members,
        separation=pack.separation,
        covering_radius=pack.covering_radius,
    )


@dataclass(frozen=True)
class NetApproxReport:
    net_dist: float
    model_dist: float
    allowance: float
    holds: bool


def net_approx_check(
    net: ClampNet, v: GridFunction, slack: float = 1e-9
) -> NetApproxReport:
    """Check d(v, net) <= d(v, model) + (eta ^ D) + slack for v in [-1,1].

    The model distance is the coefficient-space projection clipped to the
    ball; only ball domains (and singletons) support it exactly.
    """
    if np.any(np.abs(v.values) > 1 + 1e-12):
        raise DomainError("target must take values in [-1,1]")
    w = net.model.measure.weights
    mm = net.member_matrix()
    diff = mm - v.values[:, None]
    net_dist = float(np.sqrt((w[:, None] * diff * diff).sum(axis=0)).min())
    d = net.model.dimension
    if d == 0:
        resid = net.model.offset.values - v.values
        model_dist = math.sqrt(float(np.dot(w, resid * resid)))
    else:
        dom = net.model.domain
        if dom is None or dom.kind != "ball" or dom.transform is not None:
            raise DomainError("exact model distance needs a plain ball domain")
        b = net.model.basis_matrix()
        coefs = b.T @ (w * v.values)
        nrm2 = float(np.dot(w, v.values * v.values))
        resid2 = max(nrm2 - float(coefs @ coefs), 0.0)
        excess = max(float(np.linalg.norm(coefs)) - dom.radius, 0.0)
        model_dist = math.sqrt(resid2 + excess * excess)
    allowance = min(net.eta, d)
    return NetApproxReport(
        net_dist=net_dist,
        model_dist=model_dist,
        allowance=allowance,
        holds=net_dist <= model_dist + allowance + slack,
    )


# ---------------------------------------------------------------------------
# Product nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductNet:
    """Product of per-component nets at resolutions eta_j = exp(-i_j).

    ``delta_lambda`` accumulates each factor's own weight plus i_j * D_j;
    ``log_card_bound`` is sum_j D_j (i_j + log 5) and always dominates the
    realized log-cardinality.
    """

    factors: tuple[ClampNet, ...]
    indices: tuple[int, ...]
    delta_lambda: float
    log_card_bound: float

    @property
    def size(self) -> int:
        n = 1
        for f in self.factors:
            n *= f.size
        return n

    def members(self) -> Iterator[tuple[GridFunction, ...]]:
        return itertools.product(*[f.members for f in self.factors])

    def member_value_tuples(self) -> Iterator[np.ndarray]:
        for combo in self.members():
            yield np.column_stack([g.values for g in combo])


def build_product_net(
    factors: Sequence[tuple[LinearModel, float, int]],
    seed: int = 0,
    *,
    cloud_factor: int = 4096,
    member_cap: float = 1e6,
    product_cap: float = 1e6,
) -> ProductNet:
    """Assemble per-factor nets (eta_j = e^{-i_j}) into a product net."""
    nets = []
    delta_lambda = 0.0
    log_bound = 0.0
    for j, (model, delta_j, i_j) in enumerate(factors):
        if i_j < 1:
            raise DomainError(f"net index must be >= 1, got {i_j}")
        if delta_j < 0:
            raise DomainError("factor weight must be nonnegative")
        net = build_eta_net(
            clamp_model(model),
            math.exp(-i_j),
            seed=(int(seed) * 1000003 + j),
            cloud_factor=cloud_factor,
            member_cap=member_cap,
        )
        nets.append(net)
        delta_lambda += delta_j + i_j * model.dimension
        log_bound += model.dimension * (i_j + LOG5)
    pn = ProductNet(
        factors=tuple(nets),
        indices=tuple(int(i) for _, _, i in factors),
        delta_lambda=delta_lambda,
        log_card_bound=log_bound,
    )
    if pn.size > product_cap:
        raise BudgetError("product net cardinality", pn.size, product_cap)
    if math.log(pn.size) > pn.log_card_bound + 1e-9:
        raise AssertionError("product net exceeded its log-cardinality bound")
    return pn


def net_csv_rows(net: ClampNet):
    """Dump rows: member index followed by its coefficient vector."""
    return [(i,) + tuple(net.coef[i]) for i in range(net.size)]
