"""Nash-Sutcliffe losses, climatologies and regression."""

from .core import Orientation, Panel, SplitSpec, concat, split, transpose_orientation
from .estimators import (
    ClimatologyRegressor,
    LagFeatures,
    NashSutcliffeRegression,
    OrdinaryLeastSquares,
    PerSeriesOLS,
)
from .exceptions import NSLearnError
from .functionals import (
    componentwise_mean_climatology,
    empirical_identification,
    m_estimate,
    ns_climatology,
    per_series_means,
    per_series_means_panel,
)
from .losses import (
    EN,
    NS,
    SE,
    Loss,
    loss_en,
    loss_ns,
    loss_ns_extended,
    loss_se,
    ns_weight,
    nse,
    nse_ext,
    realized_loss,
    realized_nse,
    skill_score,
)
from .regression import (
    FitResult,
    fit_forecast_model_with_columnwise_ns,
    fit_multi_ols,
    fit_ns_regression,
    fit_ols_1d,
    fit_per_component_ols,
    predict,
)

__version__ = "0.1.0"

__all__ = [
    "Orientation",
    "Panel",
    "SplitSpec",
    "split",
    "concat",
    "transpose_orientation",
    "NSLearnError",
    "Loss",
    "SE",
    "EN",
    "NS",
    "nse_ext",
    "loss_se",
    "loss_en",
    "loss_ns",
    "loss_ns_extended",
    "ns_weight",
    "nse",
    "realized_loss",
    "realized_nse",
    "skill_score",
    "componentwise_mean_climatology",
    "ns_climatology",
    "per_series_means",
    "per_series_means_panel",
    "empirical_identification",
    "m_estimate",
    "FitResult",
    "fit_ols_1d",
    "fit_multi_ols",
    "fit_per_component_ols",
    "fit_ns_regression",
    "fit_forecast_model_with_columnwise_ns",
    "predict",
    "OrdinaryLeastSquares",
    "NashSutcliffeRegression",
    "PerSeriesOLS",
    "ClimatologyRegressor",
    "LagFeatures",
]
