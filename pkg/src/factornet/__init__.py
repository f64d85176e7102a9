"""factornet: risk-network analytics for factoring transaction ledgers.

Pipeline: ingest a ledger -> score arcs and nodes -> build four risk
networks -> per-client centrality metrics -> logistic risk models and
client ranking -> tacit-link cluster alerts.
"""

__version__ = "0.1.0"

from .alerts import Alert, TacitComponent, components, propagate_alerts
from .correlation import CorrelationReport, pearson_matrix
from .errors import CollinearityError, FactorNetError, NumericalError, ValidationError
from .ledger import (
    Party,
    ThresholdResult,
    TransactionRecord,
    apply_recording_threshold,
    load_labels,
    load_ledger,
)
from .logit import (
    LogitModel,
    RiskLogit,
    fit_logit,
    load_model,
    load_reference_model,
    predict,
    rank_clients,
    save_model,
)
from .metrics import (
    FEATURE_COLUMNS,
    ClientFeatureRow,
    assemble_features,
    betweenness,
    closeness,
    missing_id,
    network_constraint,
    weighted_degrees,
)
from .networks import (
    Arc,
    NetworkKind,
    RiskNetwork,
    build_analytic_networks,
    build_attribute_network,
    build_tacit_network,
    build_transactions_network,
    filter_high_risk,
)
from .scoring import (
    RegionRiskEntry,
    arc_score,
    bin_amount,
    country_score,
    node_geo_score,
    node_sector_score,
    region_scores,
)
from .synth import PAPER_SCALE, ScenarioConfig, generate, write_scenario
from .tables import (
    FOREIGN,
    CountryIndicators,
    RegionIndicators,
    RiskTables,
    default_tables,
)

__all__ = [
    "__version__",
    "Alert",
    "Arc",
    "ClientFeatureRow",
    "CollinearityError",
    "CorrelationReport",
    "CountryIndicators",
    "FEATURE_COLUMNS",
    "FOREIGN",
    "FactorNetError",
    "LogitModel",
    "NetworkKind",
    "NumericalError",
    "PAPER_SCALE",
    "Party",
    "RegionIndicators",
    "RegionRiskEntry",
    "RiskLogit",
    "RiskNetwork",
    "RiskTables",
    "ScenarioConfig",
    "TacitComponent",
    "ThresholdResult",
    "TransactionRecord",
    "ValidationError",
    "apply_recording_threshold",
    "arc_score",
    "assemble_features",
    "betweenness",
    "bin_amount",
    "build_analytic_networks",
    "build_attribute_network",
    "build_tacit_network",
    "build_transactions_network",
    "closeness",
    "components",
    "country_score",
    "default_tables",
    "filter_high_risk",
    "fit_logit",
    "generate",
    "load_labels",
    "load_ledger",
    "load_model",
    "load_reference_model",
    "missing_id",
    "network_constraint",
    "node_geo_score",
    "node_sector_score",
    "pearson_matrix",
    "predict",
    "propagate_alerts",
    "rank_clients",
    "region_scores",
    "save_model",
    "weighted_degrees",
    "write_scenario",
]
