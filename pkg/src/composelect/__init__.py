"""Model selection engine and benchmark harness for composite-function
regression: sampled-function core, dyadic polynomial collections, eta-nets,
composite model assembly, penalized selection, ready-made families, and the
Gaussian parameter geometry."""

from .functions import (
    DesignMeasure,
    GridFunction,
    Modulus,
    empirical_design,
    lebesgue_quadrature,
    lp_norm,
    orthonormalize,
    uniform_grid,
)
from .partitions import (
    DyadicPartition,
    PolySpace,
    assign_priors,
    best_approx_error,
    build_poly_space,
    enumerate_partitions,
    kraft_sum,
)
from .nets import (
    ClampNet,
    LinearModel,
    ProductNet,
    build_eta_net,
    build_product_net,
    clamp_model,
    net_approx_check,
)
from .composite import (
    CompositeModel,
    SmoothnessSpec,
    compose_model,
    composition_gap_bound,
    critical_index,
    holder_index_bound,
    phi,
    rate_exponent,
    smoothness_compare,
)
from .selection import (
    Candidate,
    ModelStream,
    RegressionData,
    SelectionResult,
    fit_projection,
    mix_streams,
    penalized_select,
)
from .families import (
    FamilyConfig,
    PcaDecomposition,
    additive_stream,
    ann_budget,
    family_stream,
    multi_index_stream,
    pca_decompose,
    pca_residual,
    pca_stream,
    plain_holder_stream,
    smooth_composite_stream,
)
from .gaussians import (
    GaussianBounds,
    GaussianParam,
    frobenius_norm,
    hellinger_gaussian,
    mixture_param_lipschitz_check,
    theta_net,
)
from .bench import ExperimentConfig, RiskReport, run_experiment, slope_fit

__version__ = "0.1.0"
