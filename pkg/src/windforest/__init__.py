"""Wind-speed forecasting with delay embedding and a from-scratch random forest."""

from .analysis import DelayProfile, LagSelector, autocorrelation, mi_profile, mutual_information, select_embedding_lag
from .embedding import DelayEmbedder, EmbeddingDataset, SplitPlan, embed, plan_split
from .forecast import (
    EvalReport,
    persistence_forecast,
    predict_horizon,
    predict_one_step,
    rmse,
    rolling_evaluate,
    trend_fit,
)
from .forest import ForestConfig, RandomForestModel, RandomForestRegressor, load_model, save_model, train_forest
from .timeseries import IngestConfig, IngestError, IngestReport, WindSeries, parse_csv, slice_series, write_csv

__version__ = "0.1.0"

__all__ = [
    "DelayEmbedder",
    "DelayProfile",
    "EmbeddingDataset",
    "EvalReport",
    "ForestConfig",
    "IngestConfig",
    "IngestError",
    "IngestReport",
    "LagSelector",
    "RandomForestModel",
    "RandomForestRegressor",
    "SplitPlan",
    "WindSeries",
    "autocorrelation",
    "embed",
    "load_model",
    "mi_profile",
    "mutual_information",
    "parse_csv",
    "persistence_forecast",
    "plan_split",
    "predict_horizon",
    "predict_one_step",
    "rmse",
    "rolling_evaluate",
    "save_model",
    "select_embedding_lag",
    "slice_series",
    "train_forest",
    "trend_fit",
    "write_csv",
]
