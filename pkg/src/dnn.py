"""
Five-layer fully connected regressor: embedding -> 64 -> 32 -> 16 -> 1.

Hidden layers use ReLU, the head is logistic so predictions stay in (0, 1).
Inputs are standardised with the mean and scale of the training fold.
Training minimises the MSE of the training fold with momentum SGD.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.graphsage import EmbeddingMatrix
from src.helpers.constants import DEFAULT_SEED, FORMAT_VERSION
from src.helpers.enums import Fold
from src.helpers.errors import ConfigError, DataError, DatasetError, DimensionError, TrainingDivergenceError

logger = logging.getLogger(__name__)

SCALE_FLOOR = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 16
    seed: int = DEFAULT_SEED
    train_fraction: float = 0.40
    momentum: float = 0.9
    hidden: Tuple[int, ...] = (64, 32, 16)

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.learning_rate > 0:
            raise ConfigError("train.learning_rate must be positive")
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train.train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("train.epochs must be >= 0 and train.batch_size >= 1")
        if not 0 <= self.momentum < 1:
            raise ConfigError("train.momentum must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class MlpParams:
    weights: Tuple[np.ndarray, ...]  # (out, in) per layer
    biases: Tuple[np.ndarray, ...]
    input_mean: np.ndarray
    input_scale: np.ndarray

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionError("every layer needs one weight matrix and one bias")
        width = self.weights[0].shape[1]
        if self.input_mean.shape != (width,) or self.input_scale.shape != (width,):
            raise DimensionError("input standardisation does not match the input width")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[1] != width or b.shape != (w.shape[0],):
                raise DimensionError(f"layer {i} does not chain: {w.shape} after width {width}")
            width = w.shape[0]
        if width != 1:
            raise DimensionError("the regressor must end in a single output")

    @property
    def d_in(self) -> int:
        return int(self.weights[0].shape[1])

    def arrays(self) -> List[np.ndarray]:
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    def copy(self) -> "MlpParams":
        return MlpParams(
            tuple(w.copy() for w in self.weights),
            tuple(b.copy() for b in self.biases),
            self.input_mean.copy(),
            self.input_scale.copy(),
        )


def init_mlp(d_in: int, hidden: Sequence[int], seed: int) -> MlpParams:
    rng = np.random.default_rng(seed)
    sizes = [d_in, *hidden, 1]
    weights = tuple(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
                    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]))
    biases = tuple(np.zeros(fan_out) for fan_out in sizes[1:])
    return MlpParams(weights, biases, np.zeros(d_in), np.ones(d_in))


@dataclass(eq=False)
class MlpCache:
    activations: List[np.ndarray] = field(default_factory=list)  # input of every layer
    pre: List[np.ndarray] = field(default_factory=list)

    def activation_pattern(self) -> List[np.ndarray]:
        return [z > 0 for z in self.pre[:-1]]


OPEN_UNIT_INTERVAL = (np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # large |z| rounds the logistic to exactly 0 or 1
    return np.clip(np.exp(-np.logaddexp(0.0, -z)), *OPEN_UNIT_INTERVAL)


def _forward(params: MlpParams, x: np.ndarray) -> Tuple[np.ndarray, MlpCache]:
    cache = MlpCache()
    a = (x - params.input_mean) / params.input_scale
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.activations.append(a)
        z = a @ w.T + b
        cache.pre.append(z)
        a = _sigmoid(z) if i == last else np.maximum(z, 0.0)
    return a[:, 0], cache


def _as_batch(params: MlpParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    x = x[None, :] if x.ndim == 1 else x
    if x.ndim != 2 or x.shape[1] != params.d_in:
        raise DimensionError(f"expected inputs of width {params.d_in}, got shape {x.shape}")
    return x


def forward(params: MlpParams, x) -> np.ndarray:
    """Predictions for one embedding (returns shape (1,)) or a batch of rows."""
    return _forward(params, _as_batch(params, x))[0]


def loss_and_grads(params: MlpParams, x: np.ndarray, y: np.ndarray) -> Tuple[float, List[np.ndarray], MlpCache]:
    """MSE over the rows and its gradient, ordered like `params.arrays()`."""
    pred, cache = _forward(params, _as_batch(params, x))
    diff = pred - y
    loss = float(np.mean(diff * diff))
    g = (2.0 * diff / len(y) * pred * (1.0 - pred))[:, None]
    grads: List[np.ndarray] = []
    for i in range(len(params.weights) - 1, -1, -1):
        grads[:0] = [g.T @ cache.activations[i], g.sum(axis=0)]
        if i:
            g = (g @ params.weights[i]) * (cache.pre[i - 1] > 0)
    return loss, grads, cache


@dataclass(frozen=True, eq=False)
class Dataset:
    names: Tuple[str, ...]
    features: np.ndarray  # (N, d_emb)
    targets: np.ndarray  # (N,)
    folds: Tuple[Fold, ...]

    def __post_init__(self):
        n = len(self.names)
        if self.features.ndim != 2 or self.features.shape[0] != n or self.targets.shape != (n,) or len(self.folds) != n:
            raise DatasetError("dataset columns differ in length")
        if len(set(self.names)) != n:
            raise DatasetError("a flip-flop appears more than once in the dataset")
        if np.any(~np.isfinite(self.targets)) or np.any((self.targets < 0) | (self.targets > 1)):
            raise DatasetError("targets must lie in [0, 1]")

    def __len__(self):
        return len(self.names)

    def fold_rows(self, fold: Fold) -> np.ndarray:
        return np.array([i for i, f in enumerate(self.folds) if f is fold], dtype=np.int64)


def build_dataset(targets: Mapping[str, float], embeddings: EmbeddingMatrix) -> Dataset:
    """Join per-flip-flop targets with their embedding rows; every row starts in the train fold."""
    by_name = embeddings.as_dict()
    missing = [name for name in targets if name not in by_name]
    if missing:
        raise DatasetError(f"no embedding for flip-flops {missing[:5]}")
    names = tuple(targets)
    return Dataset(
        names,
        np.array([by_name[name] for name in names], dtype=np.float64).reshape(len(names), embeddings.values.shape[1]),
        np.array([float(targets[name]) for name in names], dtype=np.float64),
        tuple(Fold.train for _ in names),
    )


def split_dataset(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    n = len(dataset)
    if n < 2:
        raise DatasetError(f"cannot split {n} rows into two folds")
    if not 0 < fraction < 1:
        raise ConfigError(f"train fraction must lie in (0, 1), got {fraction}")
    n_train = math.ceil(round(fraction * n, 9))
    if n_train >= n:
        raise DatasetError(f"a train fraction of {fraction} leaves no test rows out of {n}")
    chosen = set(np.random.default_rng(seed).permutation(n)[:n_train].tolist())
    folds = tuple(Fold.train if i in chosen else Fold.test for i in range(n))
    return replace(dataset, folds=folds)


@dataclass(frozen=True, eq=False)
class TrainResult:
    params: MlpParams
    loss_history: Tuple[float, ...]  # [0] before any update, then one per epoch


def train(
    dataset: Dataset,
    cfg: TrainConfig,
    on_gradient: Optional[Callable[[np.ndarray], None]] = None,
) -> TrainResult:
    """
    Momentum SGD on the train fold. `on_gradient` receives the dataset row
    indices of every minibatch before its update is applied.
    """
    rows = dataset.fold_rows(Fold.train)
    if len(rows) == 0:
        raise DatasetError("the train fold is empty")
    x, y = dataset.features[rows], dataset.targets[rows]
    params = init_mlp(dataset.features.shape[1], cfg.hidden, cfg.seed)
    params = replace(params, input_mean=x.mean(axis=0), input_scale=np.maximum(x.std(axis=0), SCALE_FLOOR))
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
    velocity = [np.zeros_like(a) for a in params.arrays()]

    history = [loss_and_grads(params, x, y)[0]]
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(rows))
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            if on_gradient is not None:
                on_gradient(rows[batch])
            loss, grads, _ = loss_and_grads(params, x[batch], y[batch])
            if not math.isfinite(loss):
                raise TrainingDivergenceError("regressor", epoch, loss)
            for a, g, v in zip(params.arrays(), grads, velocity):
                v *= cfg.momentum
                v -= cfg.learning_rate * g
                a += v
        epoch_loss = loss_and_grads(params, x, y)[0]
        if not math.isfinite(epoch_loss):
            raise TrainingDivergenceError("regressor", epoch, epoch_loss)
        history.append(epoch_loss)
    logger.info(f"Regressor train MSE {history[0]:.6f} -> {history[-1]:.6f} after {cfg.epochs} epochs")
    return TrainResult(params, tuple(history))


@dataclass(frozen=True)
class Prediction:
    name: str
    fold: Fold
    target: float
    predicted: float


def predict(params: MlpParams, dataset: Dataset) -> List[Prediction]:
    if len(dataset) == 0:
        return []
    predicted = forward(params, dataset.features)
    return [
        Prediction(name, fold, float(target), float(p))
        for name, fold, target, p in zip(dataset.names, dataset.folds, dataset.targets, predicted)
    ]


def _encode(array: np.ndarray) -> dict:
    return {"shape": list(array.shape), "data": array.reshape(-1).tolist()}


def _decode(blob: dict) -> np.ndarray:
    return np.array(blob["data"], dtype=np.float64).reshape(blob["shape"])


def save_model(params: MlpParams, cfg: TrainConfig, path: str):
    document = {
        "format_version": FORMAT_VERSION,
        "train_config": {**asdict(cfg), "hidden": list(cfg.hidden)},
        "input_mean": _encode(params.input_mean),
        "input_scale": _encode(params.input_scale),
        "layers": [{"weight": _encode(w), "bias": _encode(b)} for w, b in zip(params.weights, params.biases)],
    }
    with open(path, mode="w", encoding="utf-8", newline="\n") as model_buffer:
        json.dump(document, model_buffer)
        model_buffer.write("\n")
    logger.info(f"Results written to {path}")


def load_model(path: str) -> Tuple[MlpParams, TrainConfig]:
    try:
        with open(path, mode="r", encoding="utf-8") as model_buffer:
            document = json.load(model_buffer)
    except OSError as err:
        raise DataError(f"cannot read model {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise DataError(f"{path} is not valid JSON: {err}") from err
    if document.get("format_version") != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {document.get('format_version')!r}")
    try:
        params = MlpParams(
            tuple(_decode(layer["weight"]) for layer in document["layers"]),
            tuple(_decode(layer["bias"]) for layer in document["layers"]),
            _decode(document["input_mean"]),
            _decode(document["input_scale"]),
        )
        cfg = TrainConfig(**document["train_config"])
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"{path}: malformed model field {err}") from err
    return params, cfg


def write_dataset_csv(dataset: Dataset, path: str):
    frame = pd.DataFrame(dataset.features, columns=[f"e{i}" for i in range(dataset.features.shape[1])])
    frame.insert(0, "target_ffr", dataset.targets)
    frame.insert(0, "fold", [fold.value for fold in dataset.folds])
    frame.insert(0, "ff_name", list(dataset.names))
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Results written to {path}")


def read_dataset_csv(path: str) -> Dataset:
    try:
        frame = pd.read_csv(
            path, dtype={"ff_name": str, "fold": str}, keep_default_na=False, float_precision="round_trip"
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataError(f"cannot read dataset {path}: {err}") from err
    if list(frame.columns[:3]) != ["ff_name", "fold", "target_ffr"]:
        raise DatasetError(f"{path}: expected columns ff_name,fold,target_ffr,e0,...")
    try:
        folds = tuple(Fold(value) for value in frame["fold"])
    except ValueError as err:
        raise DatasetError(f"{path}: {err}") from err
    return Dataset(
        tuple(frame["ff_name"]),
        frame.iloc[:, 3:].to_numpy(dtype=np.float64),
        frame["target_ffr"].to_numpy(dtype=np.float64),
        folds,
    )
