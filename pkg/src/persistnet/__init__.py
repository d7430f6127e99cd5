"""Long-memory analysis of dependency structure in multivariate time series.

The package measures soft persistence of edges and simplicial motifs
(triangles, separators, tetrahedra) in filtered correlation networks built
over rolling windows, ranks real data against generative null-model
ensembles, fits the two-regime power-law decay of persistence curves, and
turns persistent motifs into systemic-risk analytics.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .analytics import (
    PortfolioReport,
    RankedMotifs,
    map_table_to_indices,
    motif_portfolio_volatility,
    persistence_vs_strength,
    random_portfolio_test,
    rank_persistent_motifs,
    sector_purity,
    top_triplets,
    triplet_overlap,
)
from .correlation import (
    CorrelationLayer,
    ExpWeights,
    LayerSequence,
    correlation_layer,
    exp_weights,
    layer_sequence,
    weighted_kendall,
    weighted_pearson,
)
from .decay import DecayFit, fit_curve, power_law_fit, two_regime_fit
from .errors import ConfigError, DataError, NumericError, PersistnetError, StageError
from .filtering import (
    CliqueTree,
    FilteredGraph,
    MotifInventory,
    average_clustering,
    enumerate_triangles,
    is_perfect_elimination_order,
    matching_edge_count,
    motif_inventory,
    quantile_threshold,
    tmfg,
)
from .nullmodels import (
    MODEL_KINDS,
    NullModelSpec,
    SurrogateEnsemble,
    generate_ensemble,
    generate_member,
    member_entropy,
    rolling_multivariate_gaussian,
    rolling_univariate_gaussian,
    shuffle_returns,
    stable_multivariate_gaussian,
)
from .panel import (
    PricePanel,
    ReturnMatrix,
    attach_metadata,
    compute_log_returns,
    load_metadata,
    load_prices,
)
from .pipeline import RunConfig, desk_preset, run
from .persistence import (
    MOTIF_CLASSES,
    MotifPersistenceTable,
    PersistenceCurve,
    canonical_key,
    class_independence_null,
    edge_independence_null,
    independence_adjusted_exponent,
    motif_component_edges,
    per_motif_curves,
    persistence_curve,
    plateau_persistence,
    soft_persistence,
)
from .synthetic import synthetic_panel
