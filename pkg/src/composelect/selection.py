"""Penalized least-squares selection over certified model streams.

A stream is a lazily enumerable family of candidate models together with a
proven bound on its Kraft sum; selection refuses streams without one.  The
criterion is rss + kappa * tau * ((D v 1) + Delta) with deterministic
tie-breaking, so parallel or repeated runs agree bitwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetError, CertificateError, DomainError, StructuralError
from .functions import EMPIRICAL_DESIGN, DesignMeasure, GridFunction

DEFAULT_KAPPA = 3.0
DEFAULT_MODEL_BUDGET = 200_000


@dataclass(frozen=True)
class RegressionData:
    """Fixed-design observations Y_i = s(x_i) + eps_i with known sigma."""

    design: DesignMeasure
    y: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        if y.shape[0] != self.design.n_nodes:
            raise StructuralError("response length differs from design size")
        if self.design.kind != EMPIRICAL_DESIGN:
            raise StructuralError("regression data needs an empirical design")
        if self.sigma < 0:
            raise DomainError("sigma must be nonnegative")
        yy = np.ascontiguousarray(y)
        yy.flags.writeable = False
        object.__setattr__(self, "y", yy)

    @property
    def n(self) -> int:
        return self.design.n_nodes

    @property
    def tau(self) -> float:
        return self.sigma**2 / self.n


@dataclass(frozen=True)
class Candidate:
    """One selectable model: orthonormal columns plus its charges."""

    model_id: str
    delta: float
    dim_charged: int
    q_matrix: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    fitted: np.ndarray
    rss: float


def fit_projection(candidate: Candidate, data: RegressionData) -> FitResult:
    """Weighted least squares onto the candidate's orthonormal columns."""
    q = candidate.q_matrix
    if q.shape[0] != data.n:
        raise StructuralError("candidate basis does not match the design")
    w = data.design.weights
    coef = q.T @ (w * data.y)
    fitted = q @ coef
    resid = data.y - fitted
    rss = float(np.dot(w, resid * resid))
    return FitResult(coef, fitted, rss)


@dataclass(frozen=True)
class ModelStream:
    """Enumerable candidate family carrying its Kraft certificate."""

    label: str
    candidates: Callable[[], Iterator[Candidate]] | Sequence[Candidate]
    kraft_bound: float

    def __iter__(self) -> Iterator[Candidate]:
        if callable(self.candidates):
            return self.candidates()
        return iter(self.candidates)

    def materialize(self) -> "ModelStream":
        return ModelStream(self.label, tuple(self), self.kraft_bound)


def stream_from_candidates(
    label: str, candidates: Sequence[Candidate]
) -> ModelStream:
    """Certify a concrete candidate list by summing exp(-Delta) directly."""
    bound = float(sum(math.exp(-c.delta) for c in candidates))
    return ModelStream(label, tuple(candidates), bound)


@dataclass(frozen=True)
class SelectionRow:
    model_id: str
    dim_charged: int
    delta: float
    rss: float
    criterion: float


@dataclass(frozen=True)
class SelectionResult:
    chosen_id: str
    fitted: GridFunction
    criterion: float
    table: tuple[SelectionRow, ...]
    kappa: float
    tau: float
    chosen_meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "chosen_model": self.chosen_id,
                "criterion": self.criterion,
                "kappa": self.kappa,
                "tau": self.tau,
                "meta": {k: str(v) for k, v in self.chosen_meta.items()},
            },
            sort_keys=True,
        )

    def table_rows(self):
        return [
            (r.model_id, r.dim_charged, repr(r.delta), repr(r.rss), repr(r.criterion))
            for r in self.table
        ]


def penalized_select(
    stream: ModelStream,
    data: RegressionData,
    kappa: float = DEFAULT_KAPPA,
    model_budget: int = DEFAULT_MODEL_BUDGET,
    keep_table: bool = True,
) -> SelectionResult:
    """Minimize rss(S) + kappa tau ((D(S) v 1) + Delta(S)) over the stream.

    Ties break toward smaller Delta, then lexicographic model id.  The
    stream is consumed lazily and counted against ``model_budget``;
    exceeding it is an error, never a silent truncation.
    """
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    if stream.kraft_bound is None or not math.isfinite(stream.kraft_bound):
        raise CertificateError("stream lacks a Kraft certificate")
    if stream.kraft_bound > 1.0 + 1e-12:
        raise CertificateError(
            f"stream Kraft bound {stream.kraft_bound:.6f} exceeds 1"
        )
    tau = data.tau
    best_key = None
    best_fit: FitResult | None = None
    best: SelectionRow | None = None
    best_meta: dict = {}
    table: list[SelectionRow] = []
    count = 0
    for cand in stream:
        count += 1
        if count > model_budget:
            raise BudgetError("stream model count", count, model_budget)
        fit = fit_projection(cand, data)
        crit = fit.rss + kappa * tau * (max(cand.dim_charged, 1) + cand.delta)
        row = SelectionRow(
            cand.model_id, cand.dim_charged, cand.delta, fit.rss, crit
        )
        if keep_table:
            table.append(row)
        key = (crit, cand.delta, cand.model_id)
        if best_key is None or key < best_key:
            best_key = key
            best_fit = fit
            best = row
            best_meta = cand.meta
    if best is None:
        raise DomainError("empty model stream")
    return SelectionResult(
        chosen_id=best.model_id,
        fitted=GridFunction(data.design, best_fit.fitted),
        criterion=best.criterion,
        table=tuple(table),
        kappa=kappa,
        tau=tau,
        chosen_meta=dict(best_meta),
    )


def mix_streams(
    streams: Sequence[tuple[ModelStream, float]], label: str = "mixture"
) -> ModelStream:
    """Concatenate streams, adding each one's mixture charge Delta_nu.

    Requires sum exp(-Delta_nu) <= 1; the mixed Kraft bound is then
    sum_l exp(-Delta_nu(l)) * kraft_l <= 1.
    """
    nu_sum = sum(math.exp(-dn) for _, dn in streams)
    if nu_sum > 1.0 + 1e-12:
        raise CertificateError(f"mixture weights sum to {nu_sum:.6f} > 1")
    bound = 0.0
    for s, dn in streams:
        if s.kraft_bound > 1.0 + 1e-12:
            raise CertificateError(f"stream {s.label!r} violates Kraft")
        bound += math.exp(-dn) * s.kraft_bound

    parts = [(s, float(dn)) for s, dn in streams]

    def gen() -> Iterator[Candidate]:
        for s, dn in parts:
            for cand in s:
                yield Candidate(
                    model_id=f"{s.label}/{cand.model_id}",
                    delta=cand.delta + dn,
                    dim_charged=cand.dim_charged,
                    q_matrix=cand.q_matrix,
                    meta=cand.meta,
                )

    return ModelStream(label, gen, bound)


def stream_census_rows(stream: ModelStream) -> list[tuple]:
    """CSV-ready census of a stream: (model_id, dim, delta)."""
    return [(c.model_id, c.dim_charged, repr(c.delta)) for c in stream]
