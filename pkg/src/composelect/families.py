"""Ready-made model streams: smooth composites, additive and index models,
principal-component regression, and the network budget planner.

Every stream carries an analytic Kraft certificate assembled from its
component weights; enumeration caps are hard errors, never silent cuts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .composite import compose_model, _weighted_orthonormal
from .errors import (
    BudgetError,
    CertificateError,
    ComposelectError,
    DomainError,
    StructuralError,
)
from .functions import (
    DesignMeasure,
    GridFunction,
    lebesgue_quadrature,
    orthonormalize,
)
from .nets import (
    LOG5,
    ClampNet,
    CoefficientDomain,
    LinearModel,
    ProductNet,
    build_eta_net,
    clamp_model,
)
from .partitions import (
    DyadicPartition,
    PolySpace,
    assign_priors,
    build_poly_space,
    enumerate_partitions,
    root_partition,
    uniform_refinement,
)
from .selection import Candidate, ModelStream, mix_streams

CONFIG_SCHEMA_VERSION = 1


def _child_seed(seed: int, *tags: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(t) for t in tags))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class FamilyConfig:
    """Configuration of one model family (JSON-loadable, schema version 1)."""

    family: str
    l: int = 1
    k: int = 1
    degree_r: int = 0
    inner_degree_r: int | None = None
    max_cells_outer: int = 4
    max_cells_inner: int = 1
    i_cap: int = 1
    kappa: float = 3.0
    seed: int = 0
    outer_chain: str = "full"  # "full" enumeration or "uniform" refinements
    anchor_directions: tuple = ()
    pca_l_max: int = 2
    pca_d_cap: int = 4
    pca_known_mu: bool = True
    cloud_factor: int = 4096
    member_cap: float = 1e6
    product_cap: float = 1e6

    def __post_init__(self):
        if self.l < 1 or self.k < 1:
            raise DomainError("l and k must be >= 1")
        if self.max_cells_outer < 1 or self.max_cells_inner < 1 or self.i_cap < 1:
            raise DomainError("caps must be positive")
        if self.outer_chain not in ("full", "uniform"):
            raise DomainError(f"unknown outer_chain {self.outer_chain!r}")

    @property
    def r_inner(self) -> int:
        return self.degree_r if self.inner_degree_r is None else self.inner_degree_r

    @classmethod
    def from_dict(cls, d: dict) -> "FamilyConfig":
        d = dict(d)
        version = d.pop("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise StructuralError(f"unsupported config schema {version}")
        if "anchor_directions" in d:
            d["anchor_directions"] = tuple(tuple(a) for a in d["anchor_directions"])
        return cls(**d)

    @classmethod
    def from_json(cls, path: str) -> "FamilyConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Outer and inner collections
# ---------------------------------------------------------------------------


def _outer_partitions(cfg: FamilyConfig, dim: int) -> list[DyadicPartition]:
    if cfg.outer_chain == "uniform":
        parts = [root_partition(dim)]
        level = 1
        while 2 ** (level * dim) <= cfg.max_cells_outer:
            parts.append(uniform_refinement(dim, level))
            level += 1
        return parts
    return enumerate_partitions(dim, cfg.max_cells_outer)


def _reference_quadrature(dim: int) -> DesignMeasure:
    per_axis = {1: 512, 2: 48, 3: 16}.get(dim, 8)
    return lebesgue_quadrature(dim, per_axis)


def outer_spaces(cfg: FamilyConfig) -> list[PolySpace]:
    """Priored outer collection on [-1,1]^l (reference quadrature)."""
    ref = _reference_quadrature(cfg.l)
    spaces = [
        build_poly_space(p, cfg.degree_r, ref) for p in _outer_partitions(cfg, cfg.l)
    ]
    return assign_priors(spaces, "exact-count")


def _inner_spaces(cfg: FamilyConfig, measure: DesignMeasure) -> list[PolySpace]:
    parts = enumerate_partitions(cfg.k, cfg.max_cells_inner)
    spaces = [build_poly_space(p, cfg.r_inner, measure) for p in parts]
    return assign_priors(spaces, "exact-count")


def _poly_to_inner_model(space: PolySpace, label: str) -> LinearModel:
    return LinearModel(
        model_id=label,
        measure=space.measure,
        basis=space.basis,
        offset=None,
    )


def _candidate_from_composite(cm, model_id: str, meta: dict) -> Candidate:
    return Candidate(
        model_id=model_id,
        delta=cm.delta_pi,
        dim_charged=cm.dim_charged,
        q_matrix=cm.q_matrix,
        meta=meta,
    )


def _geom_sum(dim: int, i_cap: int) -> float:
    # sum_{i=1..cap} exp(-i * dim), dim >= 1
    return sum(math.exp(-i * dim) for i in range(1, i_cap + 1))


# ---------------------------------------------------------------------------
# Smooth composite stream
# ---------------------------------------------------------------------------


def smooth_composite_stream(
    cfg: FamilyConfig, measure: DesignMeasure
) -> ModelStream:
    """All composites of dyadic outer spaces with netted dyadic inner maps."""
    outers = outer_spaces(cfg)
    inners = _inner_spaces(cfg, measure)
    inner_models = [
        (_poly_to_inner_model(s, f"T{ti}"), s.delta) for ti, s in enumerate(inners)
    ]

    net_cache: dict[tuple[int, int, int], ClampNet] = {}

    def net_for(j: int, ti: int, i: int) -> ClampNet:
        key = (j, ti, i)
        if key not in net_cache:
            model, _ = inner_models[ti]
            net_cache[key] = build_eta_net(
                clamp_model(model),
                math.exp(-i),
                seed=_child_seed(cfg.seed, 1, j, ti, i),
                cloud_factor=cfg.cloud_factor,
                member_cap=cfg.member_cap,
            )
        return net_cache[key]

    choices = [
        [(ti, i) for ti in range(len(inner_models)) for i in range(1, cfg.i_cap + 1)]
        for _ in range(cfg.l)
    ]

    def gen() -> Iterator[Candidate]:
        combos = [[]]
        for per_j in choices:
            combos = [c + [x] for c in combos for x in per_j]
        for combo in combos:
            nets = [net_for(j, ti, i) for j, (ti, i) in enumerate(combo)]
            delta_lambda = sum(
                inner_models[ti][1] + i * inner_models[ti][0].dimension
                for ti, i in combo
            )
            log_card = sum(
                inner_models[ti][0].dimension * (i + LOG5) for ti, i in combo
            )
            pn = ProductNet(
                factors=tuple(nets),
                indices=tuple(i for _, i in combo),
                delta_lambda=delta_lambda,
                log_card_bound=log_card,
            )
            if pn.size > cfg.product_cap:
                raise BudgetError("product net cardinality", pn.size, cfg.product_cap)
            combo_id = ",".join(f"T{ti}i{i}" for ti, i in combo)
            for mi, member in enumerate(pn.members()):
                vals = np.column_stack([g.values for g in member])
                for fi, outer in enumerate(outers):
                    cm = compose_model(
                        outer,
                        vals,
                        measure,
                        delta_gamma=outer.delta,
                        delta_lambda=pn.delta_lambda,
                        log_card_bound=pn.log_card_bound,
                        model_id=f"F{fi}|{combo_id}|m{mi}",
                    )
                    yield _candidate_from_composite(
                        cm,
                        cm.model_id,
                        {"family": "smooth-composite", "outer": fi, "member": mi},
                    )

    gamma_sum = sum(math.exp(-s.delta) for s in outers)
    factor = sum(
        math.exp(-d) * _geom_sum(max(m.dimension, 1), cfg.i_cap)
        for m, d in inner_models
    )
    bound = gamma_sum * factor ** cfg.l
    return ModelStream("smooth-composite", gen, bound)


# ---------------------------------------------------------------------------
# Additive models
# ---------------------------------------------------------------------------


def additive_stream(cfg: FamilyConfig, measure: DesignMeasure) -> ModelStream:
    """Inner maps t_1(x_1) + ... + t_k(x_k), one netted factor (l = 1)."""
    if cfg.k < 2:
        raise DomainError("additive structure needs k >= 2")
    outers = outer_spaces(replace(cfg, l=1))
    # univariate collections per coordinate, then combined additive spaces
    per_coord: list[list[PolySpace]] = []
    for j in range(cfg.k):
        coord_measure = DesignMeasure(
            measure.nodes[:, j : j + 1], measure.weights, measure.kind
        )
        parts = enumerate_partitions(1, cfg.max_cells_inner)
        spaces = [build_poly_space(p, cfg.r_inner, coord_measure) for p in parts]
        per_coord.append(assign_priors(spaces, "exact-count"))

    combos = [[]]
    for j in range(cfg.k):
        combos = [c + [s] for c in combos for s in per_coord[j]]

    additive_models: list[tuple[LinearModel, float]] = []
    for ci, combo in enumerate(combos):
        mat = np.column_stack(
            [e.values for space in combo for e in space.basis]
        )
        q = _weighted_orthonormal(mat, measure.weights)
        basis = tuple(GridFunction(measure, q[:, i]) for i in range(q.shape[1]))
        model = LinearModel(model_id=f"Add{ci}", measure=measure, basis=basis)
        delta = sum(space.delta for space in combo)
        additive_models.append((model, delta))

    net_cache: dict[tuple[int, int], ClampNet] = {}

    def net_for(ci: int, i: int) -> ClampNet:
        if (ci, i) not in net_cache:
            model, _ = additive_models[ci]
            net_cache[(ci, i)] = build_eta_net(
                clamp_model(model),
                math.exp(-i),
                seed=_child_seed(cfg.seed, 2, ci, i),
                cloud_factor=cfg.cloud_factor,
                member_cap=cfg.member_cap,
            )
        return net_cache[(ci, i)]

    def gen() -> Iterator[Candidate]:
        for ci, (model, delta_l) in enumerate(additive_models):
            for i in range(1, cfg.i_cap + 1):
                net = net_for(ci, i)
                d = model.dimension
                delta_lambda = delta_l + i * d
                log_card = d * (i + LOG5)
                for mi, member in enumerate(net.members):
                    for fi, outer in enumerate(outers):
                        cm = compose_model(
                            outer,
                            member.values[:, None],
                            measure,
                            delta_gamma=outer.delta,
                            delta_lambda=delta_lambda,
                            log_card_bound=log_card,
                            model_id=f"F{fi}|Add{ci}i{i}|m{mi}",
                        )
                        yield _candidate_from_composite(
                            cm,
                            cm.model_id,
                            {"family": "additive", "combo": ci, "member": mi},
                        )

    gamma_sum = sum(math.exp(-s.delta) for s in outers)
    factor = sum(
        math.exp(-d) * _geom_sum(max(m.dimension, 1), cfg.i_cap)
        for m, d in additive_models
    )
    return ModelStream("additive", gen, gamma_sum * factor)


# ---------------------------------------------------------------------------
# Multiple index models
# ---------------------------------------------------------------------------


def linear_index_model(
    measure: DesignMeasure, anchor_free: bool = False
) -> LinearModel:
    """Functions x -> <theta, x> with |theta|_1 <= 1, as a netted model."""
    k = measure.dim_k
    coords = [GridFunction(measure, measure.nodes[:, a]) for a in range(k)]
    basis = orthonormalize(coords)
    b = np.column_stack([e.values for e in basis])
    coord_mat = measure.nodes  # (n, k)
    transform = b.T @ (measure.weights[:, None] * coord_mat)  # coeffs of coords
    domain = CoefficientDomain("l1ball", 1.0, transform=transform)
    return LinearModel(
        model_id="T0",
        measure=measure,
        basis=tuple(basis),
        domain=domain,
    )


def multi_index_stream(cfg: FamilyConfig, measure: DesignMeasure) -> ModelStream:
    """Composites over netted linear index maps <theta_j, x>, |theta_j|_1 <= 1."""
    if cfg.l > 3:
        raise DomainError("multi-index stream caps l at 3")
    outers = outer_spaces(cfg)
    t0 = linear_index_model(measure)
    d = t0.dimension

    anchors = None
    if cfg.anchor_directions:
        theta = np.array(cfg.anchor_directions, dtype=float)
        if theta.shape[1] != measure.dim_k:
            raise StructuralError("anchor direction dimension mismatch")
        if np.any(np.abs(theta).sum(axis=1) > 1 + 1e-12):
            raise DomainError("anchor directions must lie in the l1 unit ball")
        anchors = theta @ t0.domain.transform.T

    net_cache: dict[int, ClampNet] = {}

    def net_for(i: int) -> ClampNet:
        if i not in net_cache:
            net_cache[i] = build_eta_net(
                clamp_model(t0),
                math.exp(-i),
                seed=_child_seed(cfg.seed, 3, i),
                cloud_factor=cfg.cloud_factor,
                member_cap=cfg.member_cap,
                initial_points=anchors,
            )
        return net_cache[i]

    def gen() -> Iterator[Candidate]:
        per_j = [(i,) for i in range(1, cfg.i_cap + 1)]
        combos = [[]]
        for _ in range(cfg.l):
            combos = [c + [x] for c in combos for x in per_j]
        for combo in combos:
            nets = [net_for(i) for (i,) in combo]
            delta_lambda = sum(i * d for (i,) in combo)
            log_card = sum(d * (i + LOG5) for (i,) in combo)
            pn = ProductNet(
                factors=tuple(nets),
                indices=tuple(i for (i,) in combo),
                delta_lambda=delta_lambda,
                log_card_bound=log_card,
            )
            if pn.size > cfg.product_cap:
                raise BudgetError("product net cardinality", pn.size, cfg.product_cap)
            combo_id = ",".join(f"i{i}" for (i,) in combo)
            for mi, member in enumerate(pn.members()):
                vals = np.column_stack([g.values for g in member])
                for fi, outer in enumerate(outers):
                    cm = compose_model(
                        outer,
                        vals,
                        measure,
                        delta_gamma=outer.delta,
                        delta_lambda=pn.delta_lambda,
                        log_card_bound=pn.log_card_bound,
                        model_id=f"F{fi}|{combo_id}|m{mi}",
                    )
                    yield _candidate_from_composite(
                        cm,
                        cm.model_id,
                        {"family": "multi-index", "outer": fi, "member": mi},
                    )

    gamma_sum = sum(math.exp(-s.delta) for s in outers)
    bound = gamma_sum * _geom_sum(max(d, 1), cfg.i_cap) ** cfg.l
    return ModelStream("multi-index", gen, bound)


# ---------------------------------------------------------------------------
# Plain smoothness baseline
# ---------------------------------------------------------------------------


def plain_holder_stream(cfg: FamilyConfig, measure: DesignMeasure) -> ModelStream:
    """Dyadic piecewise polynomials on the design itself (no structure)."""
    parts = (
        [root_partition(cfg.k)]
        + [
            uniform_refinement(cfg.k, lvl)
            for lvl in range(1, 10)
            if 2 ** (lvl * cfg.k) <= cfg.max_cells_outer
        ]
        if cfg.outer_chain == "uniform"
        else enumerate_partitions(cfg.k, cfg.max_cells_outer)
    )
    spaces = assign_priors(
        [build_poly_space(p, cfg.degree_r, measure) for p in parts], "exact-count"
    )
    cands = []
    for si, s in enumerate(spaces):
        q = np.column_stack([e.values for e in s.basis]) if s.basis else np.zeros(
            (measure.n_nodes, 0)
        )
        cands.append(
            Candidate(
                model_id=f"H{si}",
                delta=s.delta,
                dim_charged=s.dimension,
                q_matrix=q,
                meta={"family": "plain-holder", "cells": s.partition.n_cells},
            )
        )
    bound = sum(math.exp(-s.delta) for s in spaces)
    return ModelStream("plain-holder", tuple(cands), bound)


# ---------------------------------------------------------------------------
# PCA regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PcaDecomposition:
    """Centered second-moment eigenstructure of a design cloud."""

    center: np.ndarray
    gamma: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray  # columns, matching eigvals sorted nonincreasing

    def tail_sum(self, l: int) -> float:
        return float(self.eigvals[l:].sum())


def pca_decompose(measure: DesignMeasure) -> PcaDecomposition:
    """Weighted mean and eigendecomposition of the scatter matrix."""
    x = measure.nodes
    norms = np.linalg.norm(x, axis=1)
    if norms.size and norms.max() > 1 + 1e-9:
        raise DomainError("PCA nodes must lie in the unit ball; rescale upstream")
    w = measure.weights
    center = w @ x
    centered = x - center
    gamma = (centered * w[:, None]).T @ centered
    gamma = 0.5 * (gamma + gamma.T)
    vals, vecs = np.linalg.eigh(gamma)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    if np.any(vals < -1e-10):
        raise StructuralError("scatter matrix has a significantly negative eigenvalue")
    vals = np.clip(vals, 0.0, None)
    return PcaDecomposition(center=center, gamma=gamma, eigvals=vals, eigvecs=vecs)


def pca_residual(
    measure: DesignMeasure, l: int, decomposition: PcaDecomposition | None = None
) -> float:
    """Tail eigenvalue sum, verified against the projection integral.

    Checks that sum_{j>l} lambda_j equals the mean squared distance to the
    affine span of the top l eigendirections, within 1e-8.
    """
    dec = decomposition if decomposition is not None else pca_decompose(measure)
    k = measure.dim_k
    if not (0 <= l <= k):
        raise DomainError(f"l must lie in 0..{k}")
    tail = dec.tail_sum(l)
    u = dec.eigvecs[:, :l]
    centered = measure.nodes - dec.center
    resid = centered - (centered @ u) @ u.T
    direct = float(np.dot(measure.weights, (resid * resid).sum(axis=1)))
    if abs(tail - direct) > 1e-8:
        raise ComposelectError(
            f"PCA residual identity violated: tail {tail:.12g} vs direct "
            f"{direct:.12g}"
        )
    return tail


def _cube_partition_eval(points: np.ndarray, d: int) -> np.ndarray:
    """Indicator columns of the d^l cube partition of [-1,1]^l."""
    pts = np.atleast_2d(points)
    idx = np.clip(np.floor((pts + 1.0) * 0.5 * d), 0, d - 1).astype(int)
    flat = np.zeros(pts.shape[0], dtype=int)
    for a in range(pts.shape[1]):
        flat = flat * d + idx[:, a]
    out = np.zeros((pts.shape[0], d ** pts.shape[1]))
    out[np.arange(pts.shape[0]), flat] = 1.0
    return out


def pca_stream(
    cfg: FamilyConfig,
    measure: DesignMeasure,
    decomposition: PcaDecomposition | None = None,
) -> ModelStream:
    """Piecewise-constant regression on leading principal directions.

    Known-mu variant: inner maps are the exact eigenprojections (point
    nets).  Unknown-mu variant: each inner map is replaced by a net of the
    unit sphere of directions (dimension k).  Either way the result is
    mixed over l with weights nu(l) = l^{-2}/2.
    """
    dec = decomposition if decomposition is not None else pca_decompose(measure)
    k = measure.dim_k
    l_max = min(cfg.pca_l_max, k, 3)
    per_l: list[tuple[ModelStream, float]] = []
    for l in range(1, l_max + 1):
        per_l.append(
            (
                _pca_stream_one_l(cfg, measure, dec, l),
                math.log(2.0 * l * l),
            )
        )
    return mix_streams(per_l, label="pca")


def _pca_stream_one_l(
    cfg: FamilyConfig, measure: DesignMeasure, dec: PcaDecomposition, l: int
) -> ModelStream:
    if cfg.pca_known_mu:
        inner_vals = measure.nodes @ dec.eigvecs[:, :l]  # values in [-1,1]
        nets = None
        delta_lambda = 0.0
        log_card = 0.0
    else:
        t_sphere = _sphere_direction_model(measure)
        d = t_sphere.dimension
        nets = {
            i: build_eta_net(
                clamp_model(t_sphere),
                math.exp(-i),
                seed=_child_seed(cfg.seed, 4, l, i),
                cloud_factor=cfg.cloud_factor,
                member_cap=cfg.member_cap,
            )
            for i in range(1, cfg.i_cap + 1)
        }

    def gen() -> Iterator[Candidate]:
        for dd in range(1, cfg.pca_d_cap + 1):
            dim = dd**l
            if cfg.pca_known_mu:
                combos = [((), inner_vals, 0.0, 0.0)]
            else:
                combos = []
                idx_lists = [[]]
                for _ in range(l):
                    idx_lists = [
                        c + [(i, mi)]
                        for c in idx_lists
                        for i in range(1, cfg.i_cap + 1)
                        for mi in range(nets[i].size)
                    ]
                for c in idx_lists:
                    vals = np.column_stack(
                        [nets[i].members[mi].values for i, mi in c]
                    )
                    dl = sum(i * t_sphere.dimension for i, _ in c)
                    lc = sum(t_sphere.dimension * (i + LOG5) for i, _ in c)
                    combos.append((tuple(c), vals, dl, lc))
            for tag, vals, dl, lc in combos:
                composed = _cube_partition_eval(np.clip(vals, -1, 1), dd)
                q = _weighted_orthonormal(composed, measure.weights)
                member_id = "known" if cfg.pca_known_mu else str(tag)
                yield Candidate(
                    model_id=f"l{l}D{dd}|{member_id}",
                    delta=float(dd) + dl + lc,
                    dim_charged=dim,
                    q_matrix=q,
                    meta={"family": "pca", "l": l, "D": dd},
                )

    if cfg.pca_known_mu:
        bound = sum(math.exp(-dd) for dd in range(1, cfg.pca_d_cap + 1))
    else:
        bound = sum(math.exp(-dd) for dd in range(1, cfg.pca_d_cap + 1)) * (
            _geom_sum(max(measure.dim_k, 1), cfg.i_cap) ** l
        )
    return ModelStream(f"pca-l{l}", gen, bound)


def _sphere_direction_model(measure: DesignMeasure) -> LinearModel:
    k = measure.dim_k
    coords = [GridFunction(measure, measure.nodes[:, a]) for a in range(k)]
    basis = orthonormalize(coords)
    b = np.column_stack([e.values for e in basis])
    transform = b.T @ (measure.weights[:, None] * measure.nodes)
    return LinearModel(
        model_id="Tsphere",
        measure=measure,
        basis=tuple(basis),
        domain=CoefficientDomain("sphere", 1.0, transform=transform),
    )


# ---------------------------------------------------------------------------
# Network budget planner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnBudget:
    l_star: int
    q_star: int
    bound_terms: dict


def ann_budget(
    K: float,
    R: float,
    L: float,
    alpha: float,
    gamma_psi: float,
    q_psi: int,
    k: int,
    tau: float,
    scan_cap: int = 10_000,
) -> AnnBudget:
    """Width/resolution split for ridge-combination budgets.

    If R K <= sqrt(q_psi k tau), a single unit suffices at base resolution.
    Otherwise q* is the smallest q >= q_psi with 2^(-2 q gamma) <=
    (R/K) sqrt(q k tau), found by scan, and l* = ceil(R K / sqrt(q* k tau)).
    """
    if min(K, R, L, alpha, gamma_psi, tau) <= 0 or q_psi < 1 or k < 1:
        raise DomainError("all planner inputs must be positive")
    if alpha > 1:
        raise DomainError("alpha must lie in (0,1]")
    base = math.sqrt(q_psi * k * tau)
    if R * K <= base:
        l_star, q_star = 1, int(q_psi)
    else:
        q = int(q_psi)
        while 2.0 ** (-2.0 * q * gamma_psi) > (R / K) * math.sqrt(q * k * tau):
            q += 1
            if q - q_psi > scan_cap:
                raise DomainError(f"resolution scan exceeded {scan_cap}")
        q_star = q
        l_star = int(math.ceil(R * K / math.sqrt(q_star * k * tau)))
    stat_log = max(math.log(l_star * R * R * L * L / (k * tau)), 0.0)
    terms = {
        "approx": 2.0 ** (-2.0 * q_star * gamma_psi),
        "width": R * R / l_star,
        "stat": l_star * k * tau * q_star * (1.0 + stat_log / (q_star * alpha)) / K**2,
    }
    return AnnBudget(l_star=l_star, q_star=q_star, bound_terms=terms)


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


def family_stream(cfg: FamilyConfig, measure: DesignMeasure) -> ModelStream:
    builders = {
        "smooth-composite": smooth_composite_stream,
        "additive": additive_stream,
        "multi-index": multi_index_stream,
        "plain-holder": plain_holder_stream,
        "pca": pca_stream,
    }
    if cfg.family not in builders:
        raise DomainError(f"unknown family {cfg.family!r}")
    return builders[cfg.family](cfg, measure)
