"""Experiment harness: synthetic composite-truth regression benchmarks.

Draws a fixed design per sample size, replays seeded noise replications
through one or more family streams, and reports empirical risks, selected
model histograms and log-log slope fits.  All randomness descends from one
seed through named substreams, and noise draws are shared across families
within a replication (paired comparisons).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import BudgetError, DomainError, StructuralError
from .families import FamilyConfig, family_stream
from .functions import DesignMeasure, empirical_design
from .selection import (
    DEFAULT_MODEL_BUDGET,
    ModelStream,
    RegressionData,
    penalized_select,
)

CONFIG_SCHEMA_VERSION = 1


def _rng(seed: int, *tags: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(t) for t in tags))
    return np.random.Generator(np.random.PCG64(ss))


# truth registry: name -> values on design nodes
def truth_values(name: str, nodes: np.ndarray, params: dict) -> np.ndarray:
    scale = float(params.get("scale", 1.0))
    if name == "constant":
        return np.full(nodes.shape[0], float(params.get("value", 0.0)))
    if name == "single-index-abs":
        theta = np.asarray(params["theta"], dtype=float)
        return scale * np.abs(nodes @ theta)
    if name == "single-index-square":
        theta = np.asarray(params["theta"], dtype=float)
        return scale * (nodes @ theta) ** 2
    if name == "additive-abs":
        return scale * np.abs(nodes.sum(axis=1))
    if name == "ridge-lipschitz":
        direction = np.asarray(params["direction"], dtype=float)
        return scale * np.abs(nodes @ direction)
    raise DomainError(f"unknown truth {name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark run: truth, families, sample sizes, replications."""

    truth: str
    families: tuple[FamilyConfig, ...]
    n_grid: tuple[int, ...]
    replications: int = 50
    sigma: float = 1.0
    kappa: float = 3.0
    seed: int = 0
    design_dim: int = 1
    truth_params: dict = field(default_factory=dict)
    model_budget: int = DEFAULT_MODEL_BUDGET

    def __post_init__(self):
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise DomainError("n_grid must be strictly increasing")
        if self.replications < 1:
            raise DomainError("need at least one replication")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        version = d.pop("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise StructuralError(f"unsupported config schema {version}")
        fams = tuple(FamilyConfig.from_dict(f) for f in d.pop("families"))
        d["families"] = fams
        d["n_grid"] = tuple(int(n) for n in d.pop("n_grid"))
        return cls(**d)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class RiskRow:
    family: str
    n: int
    mean_risk: float
    stderr: float
    replications: int


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float


def slope_fit(points) -> SlopeFit:
    """OLS slope with standard error over (log n, log risk) points."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 3:
        raise DomainError("slope fit needs at least 3 points")
    x, y = pts[:, 0], pts[:, 1]
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx <= 1e-14:
        raise DomainError("degenerate abscissae in slope fit")
    slope = float(np.dot(xc, y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    dof = max(pts.shape[0] - 2, 1)
    sigma2 = float(np.dot(resid, resid)) / dof
    return SlopeFit(slope, math.sqrt(sigma2 / sxx))


@dataclass
class RiskReport:
    rows: list[RiskRow]
    histograms: dict
    slopes: dict
    noise_checksums: dict

    def slope(self, family: str) -> SlopeFit:
        return self.slopes[family]

    def mean_risks(self, family: str) -> list[tuple[int, float]]:
        return [(r.n, r.mean_risk) for r in self.rows if r.family == family]

    def risks_csv(self) -> str:
        lines = ["family,n,mean_risk,stderr,replications"]
        for r in self.rows:
            lines.append(
                f"{r.family},{r.n},{r.mean_risk!r},{r.stderr!r},{r.replications}"
            )
        return "\n".join(lines) + "\n"

    def slopes_csv(self) -> str:
        lines = ["family,slope,stderr"]
        for fam, fit in self.slopes.items():
            lines.append(f"{fam},{fit.slope!r},{fit.stderr!r}")
        return "\n".join(lines) + "\n"

    def histogram_csv(self) -> str:
        lines = ["family,n,model_id,count"]
        for (fam, n), hist in self.histograms.items():
            for mid in sorted(hist):
                lines.append(f"{fam},{n},{mid},{hist[mid]}")
        return "\n".join(lines) + "\n"


def _design_for(cfg: ExperimentConfig, n_index: int, n: int) -> DesignMeasure:
    rng = _rng(cfg.seed, 101, n_index)
    return empirical_design(rng.uniform(-1.0, 1.0, size=(n, cfg.design_dim)))


def run_experiment(
    cfg: ExperimentConfig, stream_builder: Callable | None = None
) -> RiskReport:
    """Run the full benchmark described by ``cfg``.

    ``stream_builder(family_cfg, measure)`` may override stream assembly
    (tests use it to wire bespoke collections); defaults to the family
    dispatcher.  Deterministic given ``cfg.seed``.
    """
    builder = stream_builder or (lambda fc, m: family_stream(fc, m))
    rows: list[RiskRow] = []
    histograms: dict = {}
    slopes: dict = {}
    checksums: dict = {}
    per_family_points: dict[str, list[tuple[float, float]]] = {}

    for ni, n in enumerate(cfg.n_grid):
        design = _design_for(cfg, ni, n)
        truth = truth_values(cfg.truth, design.nodes, cfg.truth_params)
        noise = {}
        for rep in range(cfg.replications):
            noise[rep] = _rng(cfg.seed, 202, ni, rep).standard_normal(n)
            checksums[(n, rep)] = float(noise[rep].sum())
        for fam_cfg in cfg.families:
            fam_seeded = replace(fam_cfg, seed=_child(cfg.seed, 303, ni, fam_cfg.seed))
            stream = builder(fam_seeded, design)
            try:
                materialized = stream.materialize()
            except BudgetError:
                raise
            count = len(materialized.candidates)
            if count > cfg.model_budget:
                raise BudgetError(
                    f"family {stream.label!r} at n={n}", count, cfg.model_budget
                )
            risks = np.empty(cfg.replications)
            hist: dict[str, int] = {}
            for rep in range(cfg.replications):
                y = truth + cfg.sigma * noise[rep]
                data = RegressionData(design, y, cfg.sigma)
                sel = penalized_select(
                    materialized,
                    data,
                    kappa=cfg.kappa,
                    model_budget=cfg.model_budget,
                    keep_table=False,
                )
                diff = truth - sel.fitted.values
                risks[rep] = float(np.dot(design.weights, diff * diff))
                hist[sel.chosen_id] = hist.get(sel.chosen_id, 0) + 1
            mean = float(risks.mean())
            se = (
                float(risks.std(ddof=1) / math.sqrt(cfg.replications))
                if cfg.replications > 1
                else 0.0
            )
            rows.append(RiskRow(stream.label, n, mean, se, cfg.replications))
            histograms[(stream.label, n)] = hist
            per_family_points.setdefault(stream.label, []).append(
                (math.log(n), math.log(max(mean, 1e-300)))
            )

    for fam, pts in per_family_points.items():
        if len(pts) >= 3:
            slopes[fam] = slope_fit(pts)
    return RiskReport(rows, histograms, slopes, checksums)


def _child(seed: int, *tags: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(t) for t in tags))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
