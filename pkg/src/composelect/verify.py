"""Property battery behind the acceptance suite and the ``verify`` command.

Each check is deterministic, self-contained, and returns a CheckResult; the
acceptance tests assert on these, and the CLI prints one line per check.
Fast checks run in seconds; the empirical oracle and rate-slope checks are
the two slow ones and sit behind the ``full`` flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import bench as bench_mod
from .bench import ExperimentConfig, run_experiment, slope_fit
from .composite import (
    composition_gap_bound,
    critical_index,
    holder_index_bound,
)
from .errors import ComposelectError
from .families import (
    FamilyConfig,
    ann_budget,
    family_stream,
    pca_decompose,
    pca_residual,
)
from .functions import (
    GridFunction,
    Modulus,
    concave_transport_check,
    empirical_design,
    lopt_optimize,
    lp_norm,
    orthonormalize,
    uniform_grid,
)
from .gaussians import (
    GaussianBounds,
    GaussianParam,
    hellinger_gaussian,
    hellinger_quadrature,
    mixture_param_lipschitz_check,
    random_param,
)
from .nets import LinearModel, build_eta_net, clamp_model, net_approx_check
from .partitions import assign_priors, build_poly_space, enumerate_partitions
from .selection import Candidate, RegressionData, penalized_select, stream_from_candidates


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail}"


def _rng(*tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(tuple(tags))))


def _poly_model(measure, dim: int, label: str = "poly") -> LinearModel:
    xs = measure.nodes[:, 0]
    raw = [GridFunction(measure, xs**j) for j in range(dim)]
    return LinearModel(label, measure, tuple(orthonormalize(raw)))


# ---------------------------------------------------------------------------
# 1. Kraft certificates
# ---------------------------------------------------------------------------


def check_kraft() -> CheckResult:
    worst = 0.0
    tested = 0
    for k, budget in [(1, 4), (2, 3)]:
        parts = enumerate_partitions(k, budget)
        grid = uniform_grid(k, 33 if k == 1 else 9)
        spaces = [build_poly_space(p, 0, grid) for p in parts]
        for scheme in ("exact-count", "paper-c"):
            priored = assign_priors(spaces, scheme)
            total = sum(math.exp(-s.delta) for s in priored)
            worst = max(worst, total)
            tested += 1
    design = empirical_design(_rng(11).uniform(-1, 1, size=(150, 2)))
    unit_ball = design.nodes / max(np.linalg.norm(design.nodes, axis=1).max(), 1.0)
    ball_design = empirical_design(unit_ball)
    streams = [
        family_stream(FamilyConfig("smooth-composite", l=1, k=2, seed=5), design),
        family_stream(
            FamilyConfig("additive", l=1, k=2, max_cells_outer=2, seed=5), design
        ),
        family_stream(
            FamilyConfig("multi-index", l=1, k=2, max_cells_outer=2, seed=5), design
        ),
        family_stream(FamilyConfig("plain-holder", k=2, seed=5), design),
        family_stream(
            FamilyConfig("pca", k=2, pca_l_max=2, pca_d_cap=3, seed=5), ball_design
        ),
        family_stream(
            FamilyConfig(
                "pca", k=2, pca_l_max=2, pca_d_cap=2, pca_known_mu=False, seed=5
            ),
            ball_design,
        ),
    ]
    for s in streams:
        tested += 1
        empirical = sum(math.exp(-c.delta) for c in s)
        worst = max(worst, empirical, s.kraft_bound)
        if empirical > s.kraft_bound + 1e-12:
            return CheckResult(
                "kraft", False, f"{s.label} empirical {empirical} > bound"
            )
    ok = worst <= 1.0 + 1e-12
    return CheckResult(
        "kraft", ok, f"{tested} collections/streams, worst sum {worst:.6f}"
    )


# ---------------------------------------------------------------------------
# 2. Net suite
# ---------------------------------------------------------------------------


def check_net_suite(
    n_cases: int = 200, approx_targets: int = 500, fresh_per_case: int = 50
) -> CheckResult:
    rng = _rng(22)
    measure = uniform_grid(1, 65)
    violations = []
    sep_margin = math.inf
    cover_worst = -math.inf
    target_budget = approx_targets
    for case in range(n_cases):
        dim = int(rng.integers(0, 5))
        eta = float(rng.choice([1.0, 0.5, 0.25]))
        if dim == 0:
            offset = GridFunction(
                measure, np.clip(rng.normal(0, 0.7, measure.n_nodes), -1.5, 1.5)
            )
            model = LinearModel(f"s{case}", measure, (), offset=offset)
        else:
            model = _poly_model(measure, dim, f"m{case}")
        net = build_eta_net(
            clamp_model(model), eta, seed=1000 + case, cloud_factor=2048
        )
        if net.size > net.card_bound:
            violations.append(f"case {case}: cardinality {net.size}")
        if dim >= 1:
            if not net.separation > eta:
                violations.append(f"case {case}: separation {net.separation}")
            sep_margin = min(sep_margin, net.separation - eta)
            fresh = net.model.domain.sample(dim, fresh_per_case, seed=77_000 + case)
            diff = fresh[:, None, :] - net.coef[None, :, :]
            d = np.sqrt((diff * diff).sum(axis=2)).min(axis=1)
            cover_worst = max(cover_worst, float(d.max()) - eta)
            if d.max() > eta + 1e-9:
                violations.append(f"case {case}: covering slack {d.max() - eta:.2e}")
        n_t = min(3, target_budget)
        for t in range(n_t):
            smooth = np.tanh(
                rng.normal(0, 1) * measure.nodes[:, 0] + rng.normal(0, 0.5)
            )
            v = GridFunction(measure, np.clip(smooth + rng.normal(0, 0.2, measure.n_nodes), -1, 1))
            rep = net_approx_check(net, v)
            if not rep.holds:
                violations.append(f"case {case} target {t}: approx gap")
        target_budget -= n_t
    ok = not violations
    detail = (
        f"{n_cases} nets, min separation margin {sep_margin:.3e}, "
        f"worst fresh covering slack {cover_worst:.3e}"
    )
    if violations:
        detail = "; ".join(violations[:4])
    return CheckResult("net-suite", ok, detail)


# ---------------------------------------------------------------------------
# 3. Composition bound
# ---------------------------------------------------------------------------


def _random_coordinate_holder(rng, l):
    """Random g(y) = sum_j c_j |y_j - a_j|^alpha_j with exact moduli."""
    cs = rng.uniform(-2, 2, size=l)
    anchors = rng.uniform(-0.8, 0.8, size=l)
    alphas = rng.uniform(0.3, 1.0, size=l)

    def g(y):
        y = np.atleast_2d(y)
        return sum(
            cs[j] * np.abs(y[:, j] - anchors[j]) ** alphas[j] for j in range(l)
        )

    moduli = [Modulus.holder(abs(cs[j]) + 1e-9, alphas[j]) for j in range(l)]
    return g, moduli


def check_composition(n_cases: int = 300) -> CheckResult:
    rng = _rng(33)
    measure = uniform_grid(1, 257)
    xs = measure.nodes[:, 0]
    fails = 0
    for case in range(n_cases):
        l = int(rng.integers(1, 3))
        g, moduli = _random_coordinate_holder(rng, l)
        shift = rng.normal(0, 0.05)

        def f(y, _g=g, _s=shift):
            return _g(y) + _s

        u = np.column_stack(
            [
                0.9 * np.sin(rng.normal(0, 1.2) * xs + rng.normal(0, 1))
                for _ in range(l)
            ]
        )
        t = np.clip(u + rng.normal(0, 0.1, size=u.shape), -1, 1)
        p = [1, 2, math.inf][case % 3]
        rep = composition_gap_bound(g, f, u, t, moduli, p, measure)
        if not rep.holds:
            fails += 1
    # tight linear case: identity outer, linear modulus
    ident = lambda y: np.atleast_2d(y)[:, 0]
    u = 0.8 * np.sin(2 * xs)[:, None]
    t = np.clip(u + 0.07 * np.cos(3 * xs)[:, None], -1, 1)
    w = [Modulus.holder(1.0, 1.0)]
    rep_inf = composition_gap_bound(ident, ident, u, t, w, math.inf, measure)
    diff = GridFunction(measure, (u - t)[:, 0])
    tight_inf = abs(rep_inf.bound - rep_inf.measured_gap) < 1e-12
    rep2 = composition_gap_bound(ident, ident, u, t, w, 2, measure)
    tight_gap = abs(rep2.measured_gap - lp_norm(diff, 2)) < 1e-12
    ok = fails == 0 and tight_inf and tight_gap
    return CheckResult(
        "composition-bound",
        ok,
        f"{n_cases} random cases, {fails} violations; tight linear case "
        f"{'exact' if tight_inf and tight_gap else 'NOT exact'}",
    )


# ---------------------------------------------------------------------------
# 4. Scalar lemmas
# ---------------------------------------------------------------------------


def check_scalar_lemmas() -> CheckResult:
    # dimension trade-off on the exhaustive grid
    worst_gap = -math.inf
    for ea in range(-6, 7):
        for eb in range(-6, 7):
            a, b = 2.0**ea, 2.0**eb
            for theta in (0.25, 0.5, 1.0, 2.0, 4.0):
                d_need = int(math.ceil((a / b) ** (1.0 / (theta + 1)))) + 1
                res = lopt_optimize(a, b, theta, max(d_need, 2))
                worst_gap = max(worst_gap, res.value - res.paper_bound)
                if res.value > res.paper_bound + 1e-12:
                    return CheckResult(
                        "scalar-lemmas", False, f"trade-off fails at a={a}, b={b}"
                    )
    # concave transport on random moduli
    rng = _rng(44)
    measure = uniform_grid(1, 201)
    for case in range(200):
        zs = np.sort(np.concatenate([[0.0], rng.uniform(0, 2, 6), [2.0]]))
        slopes = np.sort(rng.uniform(0.1, 3.0, zs.size - 1))[::-1]
        vals = np.concatenate([[0.0], np.cumsum(slopes * np.diff(zs))])
        w = Modulus.tabulated(zs, vals)
        h = GridFunction(
            measure, np.clip(rng.normal(0, 0.7, measure.n_nodes), -2, 2)
        )
        rep = concave_transport_check(w, h, [1, 2, math.inf][case % 3])
        if not rep.holds:
            return CheckResult("scalar-lemmas", False, f"transport fails case {case}")
    # critical index minimality and closed-form domination
    for case in range(100):
        alpha = float(rng.uniform(0.2, 1.0))
        big_l = float(rng.uniform(0.2, 8.0))
        l = int(rng.integers(1, 4))
        tau = float(10 ** rng.uniform(-6, -1))
        dim = int(rng.integers(1, 6))
        w = Modulus.holder(big_l, alpha)
        i = critical_index(w, l, tau, dim)
        good = l * w(math.exp(-i)) ** 2 <= tau * i * dim + 1e-15
        minimal = i == 1 or l * w(math.exp(-(i - 1))) ** 2 > tau * (i - 1) * dim
        dominated = i <= math.ceil(holder_index_bound(alpha, big_l, l, tau, dim) + 1e-12)
        if not (good and minimal and dominated):
            return CheckResult(
                "scalar-lemmas", False, f"critical index fails case {case}"
            )
    return CheckResult(
        "scalar-lemmas",
        True,
        f"845 trade-off cells (worst value-bound gap {worst_gap:.3f}), "
        "200 transport cases, 100 index cases",
    )


# ---------------------------------------------------------------------------
# 5. Hellinger geometry
# ---------------------------------------------------------------------------


def check_hellinger(n_quad: int = 50, n_lip: int = 500) -> CheckResult:
    bounds = GaussianBounds(r=1.5, rho_low=0.5, rho_high=1.6)
    rng = _rng(55)
    worst_quad = 0.0
    for case in range(n_quad):
        k = 1 if case % 2 == 0 else 2
        p0 = random_param(bounds, k, rng)
        p1 = random_param(bounds, k, rng)
        h_closed = hellinger_gaussian(p0, p1)
        h_quad = hellinger_quadrature(p0, p1)
        worst_quad = max(worst_quad, abs(h_closed**2 - h_quad**2))
        if abs(h_closed**2 - h_quad**2) > 1e-4:
            return CheckResult(
                "hellinger", False, f"quadrature mismatch {worst_quad:.2e}"
            )
    for case in range(n_lip):
        k = int(rng.integers(1, 4))
        p0 = random_param(bounds, k, rng)
        p1 = random_param(bounds, k, rng)
        rep = mixture_param_lipschitz_check(p0, p1, bounds)
        if not (rep.holds and rep.intermediate_holds):
            return CheckResult("hellinger", False, f"Lipschitz bound fails case {case}")
    return CheckResult(
        "hellinger",
        True,
        f"{n_quad} quadrature pairs (worst h^2 gap {worst_quad:.2e}), "
        f"{n_lip} Lipschitz pairs",
    )


# ---------------------------------------------------------------------------
# 6. PCA identity
# ---------------------------------------------------------------------------


def check_pca(n_clouds: int = 100, n_subspaces: int = 50) -> CheckResult:
    rng = _rng(66)
    for cloud in range(n_clouds):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(20, 80))
        pts = rng.normal(0, 1, size=(n, k))
        pts *= rng.uniform(0.2, 1.0, size=k)
        norms = np.linalg.norm(pts, axis=1)
        pts /= max(norms.max(), 1.0) * 1.01
        measure = empirical_design(pts)
        dec = pca_decompose(measure)
        if abs(dec.eigvals.sum() - np.trace(dec.gamma)) > 1e-10:
            return CheckResult("pca", False, f"trace identity fails cloud {cloud}")
        l = int(rng.integers(0, k + 1))
        try:
            tail = pca_residual(measure, l, dec)
        except ComposelectError as exc:
            return CheckResult("pca", False, f"cloud {cloud}: {exc}")
        if l in (0, k):
            continue
        centered = measure.nodes - dec.center
        for _ in range(n_subspaces):
            q, _ = np.linalg.qr(rng.normal(0, 1, size=(k, l)))
            resid = centered - (centered @ q) @ q.T
            val = float(np.dot(measure.weights, (resid * resid).sum(axis=1)))
            if val < tail - 1e-9:
                return CheckResult(
                    "pca", False, f"random subspace beat the eigen tail by {tail-val:.2e}"
                )
    return CheckResult(
        "pca", True, f"{n_clouds} clouds, {n_subspaces} subspaces each"
    )


# ---------------------------------------------------------------------------
# 7. Empirical oracle inequality
# ---------------------------------------------------------------------------


def nested_polynomial_candidates(design, max_degree: int = 8):
    """Tensor-Legendre total-degree chain with weights Delta_d = d + 1."""
    from .composite import _weighted_orthonormal

    nodes = design.nodes
    k = nodes.shape[1]
    cols, degrees = [], []
    for total in range(max_degree + 1):
        if k == 1:
            combos = [(total,)]
        else:
            combos = [(i, total - i) for i in range(total + 1)]
        for combo in combos:
            col = np.ones(nodes.shape[0])
            for a, d in enumerate(combo):
                coef = np.zeros(d + 1)
                coef[d] = 1.0
                col = col * np.polynomial.legendre.legval(nodes[:, a], coef)
            cols.append(col)
        degrees.append(len(cols))
    cands = []
    for d, ncols in enumerate(degrees):
        q = _weighted_orthonormal(np.column_stack(cols[:ncols]), design.weights)
        cands.append(
            Candidate(
                model_id=f"P{d}",
                delta=float(d + 1),
                dim_charged=ncols,
                q_matrix=q,
                meta={"degree": d},
            )
        )
    return cands


def check_oracle(n: int = 400, reps: int = 100, kappa: float = 3.0) -> CheckResult:
    rng = _rng(77)
    design = empirical_design(rng.uniform(-1, 1, size=(n, 2)))
    theta = np.array([0.6, 0.4])
    truth = np.abs(design.nodes @ theta)
    cands = nested_polynomial_candidates(design)
    stream = stream_from_candidates("nested-poly", cands)
    sigma = 1.0
    tau = sigma**2 / n
    # oracle: exact bias via projection plus the penalty shape
    oracle = math.inf
    w = design.weights
    for c in cands:
        proj = c.q_matrix @ (c.q_matrix.T @ (w * truth))
        bias2 = float(np.dot(w, (truth - proj) ** 2))
        oracle = min(oracle, bias2 + tau * (max(c.dim_charged, 1) + c.delta))
    risks = np.empty(reps)
    for rep in range(reps):
        y = truth + sigma * _rng(78, rep).standard_normal(n)
        sel = penalized_select(
            stream, RegressionData(design, y, sigma), kappa=kappa, keep_table=False
        )
        diff = truth - sel.fitted.values
        risks[rep] = float(np.dot(w, diff * diff))
    ratio = risks.mean() / oracle
    return CheckResult(
        "oracle-inequality",
        ratio <= 10.0,
        f"mean risk {risks.mean():.5f} vs oracle {oracle:.5f} (ratio {ratio:.2f}, "
        "ceiling 10)",
    )


# ---------------------------------------------------------------------------
# 8. Rate slopes
# ---------------------------------------------------------------------------


def rate_experiment_config(
    replications: int = 50, n_grid=(100, 200, 400, 800, 1600), seed: int = 2024
) -> ExperimentConfig:
    theta = (0.7, 0.2, 0.1, 0.0, 0.0)
    multi = FamilyConfig(
        "multi-index",
        l=1,
        k=5,
        degree_r=0,
        max_cells_outer=16,
        i_cap=1,
        outer_chain="uniform",
        anchor_directions=(theta,),
        seed=1,
    )
    plain = FamilyConfig(
        "plain-holder", k=5, degree_r=0, max_cells_outer=4, outer_chain="full", seed=2
    )
    return ExperimentConfig(
        truth="single-index-abs",
        truth_params={"theta": list(theta)},
        families=(multi, plain),
        n_grid=tuple(n_grid),
        replications=replications,
        sigma=1.0,
        kappa=3.0,
        seed=seed,
        design_dim=5,
    )


def check_rate_slopes(replications: int = 50) -> CheckResult:
    report = run_experiment(rate_experiment_config(replications))
    multi = report.slope("multi-index")
    plain = report.slope("plain-holder")
    ok = multi.slope <= -0.55 and multi.slope < plain.slope
    return CheckResult(
        "rate-slope",
        ok,
        f"multi-index slope {multi.slope:.3f} (needs <= -0.55), plain "
        f"{plain.slope:.3f} (must be shallower)",
    )


# ---------------------------------------------------------------------------
# 9. Network budget planner
# ---------------------------------------------------------------------------


def check_ann() -> CheckResult:
    # degenerate branch
    small = ann_budget(K=0.01, R=1.0, L=1.0, alpha=1.0, gamma_psi=1.0, q_psi=2, k=1, tau=1e-2)
    if (small.l_star, small.q_star) != (1, 2):
        return CheckResult("ann-planner", False, "degenerate branch mis-set")
    plan = ann_budget(K=1.0, R=1.0, L=1.0, alpha=1.0, gamma_psi=1.0, q_psi=1, k=1, tau=1e-4)
    # independent scan
    q = 1
    while 2.0 ** (-2 * q) > math.sqrt(q * 1e-4):
        q += 1
    l = math.ceil(1.0 / math.sqrt(q * 1e-4))
    ok = (plan.q_star, plan.l_star) == (q, l) == (3, 58)
    if plan.q_star > 1:
        qm = plan.q_star - 1
        ok = ok and 2.0 ** (-2 * qm) > math.sqrt(qm * 1e-4)
    return CheckResult(
        "ann-planner", ok, f"worked example gives (l*, q*) = ({plan.l_star}, {plan.q_star})"
    )


# ---------------------------------------------------------------------------
# 10. Determinism
# ---------------------------------------------------------------------------


def quick_bench_config(seed: int = 7) -> ExperimentConfig:
    theta = (0.7, 0.3)
    multi = FamilyConfig(
        "multi-index",
        l=1,
        k=2,
        degree_r=0,
        max_cells_outer=4,
        i_cap=1,
        outer_chain="uniform",
        anchor_directions=(theta,),
        seed=1,
    )
    plain = FamilyConfig("plain-holder", k=2, degree_r=0, max_cells_outer=4, seed=2)
    return ExperimentConfig(
        truth="single-index-abs",
        truth_params={"theta": list(theta)},
        families=(multi, plain),
        n_grid=(50, 100, 200),
        replications=5,
        sigma=1.0,
        kappa=3.0,
        seed=seed,
        design_dim=2,
    )


def check_determinism() -> CheckResult:
    r1 = run_experiment(quick_bench_config())
    r2 = run_experiment(quick_bench_config())
    same = (
        r1.risks_csv() == r2.risks_csv()
        and r1.slopes_csv() == r2.slopes_csv()
        and r1.histogram_csv() == r2.histogram_csv()
    )
    paired = all(
        r1.noise_checksums[key] == r2.noise_checksums[key]
        for key in r1.noise_checksums
    )
    return CheckResult(
        "determinism",
        same and paired,
        "bench CSVs bit-identical across two runs at a fixed seed",
    )


FAST_CHECKS = [
    check_kraft,
    check_net_suite,
    check_composition,
    check_scalar_lemmas,
    check_hellinger,
    check_pca,
    check_ann,
    check_determinism,
]

SLOW_CHECKS = [check_oracle, check_rate_slopes]


def run_battery(full: bool = False) -> list[CheckResult]:
    checks = list(FAST_CHECKS) + (list(SLOW_CHECKS) if full else [])
    return [c() for c in checks]
