from .estimator import LstmForecaster
from .network import backward, forward, init_params
from .persistence import load, save
from .spec import ARCHITECTURES, ModelSpec, TrainConfig, canonical_architecture
from .training import (
    LossHistory,
    TrainedModel,
    UntrainedModel,
    build,
    predict_one_step_series,
    train,
)

__all__ = [
    "ARCHITECTURES", "LossHistory", "LstmForecaster", "ModelSpec", "TrainConfig",
    "TrainedModel", "UntrainedModel", "backward", "build", "canonical_architecture",
    "forward", "init_params", "load", "predict_one_step_series", "save", "train",
]
