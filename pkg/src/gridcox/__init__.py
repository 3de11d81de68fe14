"""Gridded log-Gaussian Cox process fitting and cross-validated model ranking.

The pieces compose left to right: rasters and point tables (``geodata``),
the Matern field on a padded lattice (``gmrf``), model structure
(``model``), Laplace-within-grid posterior fitting (``inference``), survey
simulation (``simulate``) and thinning-based K-fold scoring (``crossval``).
``gridcox.cli`` wraps the same calls behind a config-file workflow.
"""

from .crossval import (
    CrpsTable,
    FoldAssignment,
    ResidualTensor,
    aggregate_crps,
    assign_folds,
    build_partitions,
    crps_empirical,
    derive_rng,
    rank_models,
    run_study,
    split,
    thin_intensity,
    validation_residuals,
)
from .geodata import (
    CovariateStack,
    DomainMask,
    PartitionScheme,
    PointPattern,
    QuadratureScheme,
    RasterGrid,
    build_partition,
    build_quadrature,
    campaign_masks,
    habitat_domains,
    load_raster,
    read_campaign_domains,
    read_legend,
    read_points,
    write_points,
    write_raster,
    zonal_aggregate,
)
from .gmrf import (
    LatticeMesh,
    MaternHyper,
    PcPriorSpec,
    SparsePrecision,
    build_precision,
    pc_prior_logdensity,
    sample_field,
)
from .inference import (
    DicResult,
    FitError,
    FitSummary,
    GriddedLikelihood,
    PosteriorDraws,
    bin_points,
    compute_dic,
    fit,
    inner_objective_grad,
    summarize,
)
from .model import (
    CellDesign,
    EffectVector,
    ModelSpec,
    build_design,
    decompose_intensity,
    log_intensity,
)
from .simulate import Scenario, SimulatedSurvey, expected_count, simulate_lgcp

__version__ = "0.1.0"

__all__ = [
    "CellDesign",
    "CovariateStack",
    "CrpsTable",
    "DicResult",
    "DomainMask",
    "EffectVector",
    "FitError",
    "FitSummary",
    "FoldAssignment",
    "GriddedLikelihood",
    "LatticeMesh",
    "MaternHyper",
    "ModelSpec",
    "PartitionScheme",
    "PcPriorSpec",
    "PointPattern",
    "PosteriorDraws",
    "QuadratureScheme",
    "RasterGrid",
    "ResidualTensor",
    "Scenario",
    "SimulatedSurvey",
    "SparsePrecision",
    "aggregate_crps",
    "assign_folds",
    "bin_points",
    "build_design",
    "build_partition",
    "build_partitions",
    "build_precision",
    "build_quadrature",
    "campaign_masks",
    "compute_dic",
    "crps_empirical",
    "decompose_intensity",
    "derive_rng",
    "expected_count",
    "fit",
    "habitat_domains",
    "inner_objective_grad",
    "load_raster",
    "log_intensity",
    "pc_prior_logdensity",
    "rank_models",
    "read_campaign_domains",
    "read_legend",
    "read_points",
    "run_study",
    "sample_field",
    "simulate_lgcp",
    "split",
    "summarize",
    "thin_intensity",
    "validation_residuals",
    "write_points",
    "write_raster",
    "zonal_aggregate",
    "__version__",
]
