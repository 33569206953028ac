from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import InvalidSpec

ARCHITECTURES = ("SingleLstm", "DualLstm", "BiLstm", "CnnLstm")
ALIASES = {
    "single": "SingleLstm", "dual": "DualLstm", "stacked": "DualLstm",
    "bi": "BiLstm", "bidirectional": "BiLstm", "cnn": "CnnLstm", "cnn-lstm": "CnnLstm",
}


def canonical_architecture(name: str) -> str:
    if name in ARCHITECTURES:
        return name
    try:
        return ALIASES[name.lower()]
    except KeyError:
        raise InvalidSpec(f"unknown architecture {name!r}; expected one of "
                          f"{', '.join(ARCHITECTURES)}") from None


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description.

    ``units2`` is only read by ``DualLstm``; ``filters`` and ``kernel_width``
    only by ``CnnLstm``.
    """
    architecture: str = "SingleLstm"
    units: int = 64
    units2: int = 64
    filters: int = 64
    kernel_width: int = 2
    window: int = 3

    def __post_init__(self):
        object.__setattr__(self, "architecture", canonical_architecture(self.architecture))
        for name in ("units", "units2", "filters", "kernel_width", "window"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise InvalidSpec(f"{name} must be a positive integer, got {value!r}")
        if self.architecture == "CnnLstm" and self.window < self.kernel_width:
            raise InvalidSpec(f"window {self.window} is shorter than kernel width "
                              f"{self.kernel_width}")

    @property
    def head_inputs(self):
        if self.architecture == "BiLstm":
            return 2 * self.units
        if self.architecture == "DualLstm":
            return self.units2
        return self.units

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    early_stop_patience: int = 10
    validation_fraction: float = 0.1
    clip_norm: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidSpec("epochs must be >= 1")
        if not self.learning_rate >= 0:
            raise InvalidSpec("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise InvalidSpec("batch_size must be >= 1")
        if self.early_stop_patience < 1:
            raise InvalidSpec("early_stop_patience must be >= 1")
        if not 0.0 <= self.validation_fraction < 0.5:
            raise InvalidSpec("validation_fraction must lie in [0, 0.5)")
        if not self.clip_norm > 0:
            raise InvalidSpec("clip_norm must be > 0")

    def as_dict(self):
        return asdict(self)
