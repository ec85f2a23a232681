"""Model-agnostic post-hoc interpretability for black-box tabular predictors.

Global explainers (permutation importance, PDP/ICE, ALE, M-plots), interaction
statistics, and local attributions (LIME, LIVE, Monte-Carlo and exact Shapley)
over a typed tabular data model and a batch prediction contract.
"""

from .curves import CurveSeries, GroupedCurves, IceBundle, ale, grouped_curves, ice, mplot, pdp
from .errors import (
    DataError,
    ModelError,
    PosthocError,
    ProtocolError,
    SchemaError,
    UndefinedInteractionError,
)
from .importance import (
    ImportanceRow,
    ImportanceTable,
    permutation_importance,
    permutation_importance_per_modality,
)
from .interactions import InteractionMatrix, h_matrix, h_pairwise, h_total
from .local import (
    Attribution,
    GowerKernel,
    Neighborhood,
    RbfKernel,
    efficiency_gap,
    kernel_weights,
    lime_explain,
    lime_sample_neighborhood,
    live_explain,
    live_neighborhood,
    shap_mc,
    shapley_exact,
)
from .metrics import LossKind, loss
from .models import (
    ExternalPredictor,
    FittedGlm,
    FittedLinear,
    FunctionPredictor,
    Predictor,
    RuleTable,
    external_predictor,
    fit_poisson_glm,
    fit_ridge,
    rule_table_model,
    synthetic_grouping_example,
    synthetic_pdp_example,
)
from .tabular import (
    Dataset,
    Feature,
    FeatureSchema,
    Instance,
    empirical_moments,
    load_csv,
    quantile_bins,
    sample_rows,
    split_dataset,
    write_csv,
)

__version__ = "0.1.0"
