"""The model zoo behind one train/predict/save interface.

Kinds: persistence (repeat the most recent load), svr (one linear predictor
per look-ahead hour on the flattened window), fcnn, lstm, and lrcn. Networks
train with mini-batch Adam on MSE over normalized targets, early stopping on
validation loss, and best-epoch parameter restore.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import svr as svr_solvers
from .artifact import read_artifact, write_artifact
from .dataset import Normalizer, WindowConfig, WindowedDataset
from .errors import (
    CorruptArtifact,
    EmptySplit,
    EmptyWindow,
    InvalidSpec,
    NonFiniteLoss,
    NotContiguous,
    ShapeMismatch,
)
from .features import FeatureSelector, assemble
from .ingest import AlignedSeries, HourStamp
from .neural import LSTM, Adam, Conv1D, Dense, Dropout, Flatten, Network, mse_loss

MODEL_KINDS = ("persistence", "svr", "fcnn", "lstm", "lrcn")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture plus training hyperparameters for one model kind."""

    kind: str
    # network architecture
    fcnn_hidden: tuple[int, ...] = (128, 128, 64)
    lstm_hidden: int = 64
    lstm_layers: int = 2
    conv_filters: int = 32
    conv_kernel: int = 3
    conv_layers: int = 1
    dense_size: int = 128
    dropout: float = 0.2
    width_multiplier: int = 1
    # training
    epochs: int = 200
    batch_size: int = 256
    patience: int = 10
    base_lr: float = 1e-3
    lr_decay: float = 0.96
    seed: int = 0
    # svr solver
    svr_mode: str = "epsilon"
    svr_epsilon: float = 0.01
    svr_c: float = 1.0
    svr_lambda: float = 1e-6
    svr_max_iter: int = 20000

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidSpec(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.svr_mode not in ("epsilon", "ridge"):
            raise InvalidSpec(f"svr_mode must be 'epsilon' or 'ridge', got {self.svr_mode!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidSpec(f"dropout must be in [0, 1), got {self.dropout}")
        if self.width_multiplier < 1:
            raise InvalidSpec("width_multiplier must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidSpec("epochs and batch_size must be >= 1")
        if self.patience < 0:
            raise InvalidSpec("patience must be >= 0")

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["fcnn_hidden"] = list(self.fcnn_hidden)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidSpec(f"unknown ModelSpec keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "fcnn_hidden" in kwargs:
            kwargs["fcnn_hidden"] = tuple(kwargs["fcnn_hidden"])
        return cls(**kwargs)


@dataclass
class TrainedModel:
    """Spec, learned parameters, and everything needed to predict raw rows."""

    spec: ModelSpec
    selector: FeatureSelector
    window: WindowConfig
    normalizer: Normalizer
    channel_names: tuple[str, ...]
    load_channel: int
    params: dict[str, np.ndarray] = field(default_factory=dict)
    history: list[tuple[int, float, float]] = field(default_factory=list)


def persistence_predict(window_loads, t2: int) -> np.ndarray:
    """Repeat the most recent observed load for all t2 look-ahead hours."""
    loads = np.asarray(window_loads, dtype=np.float64)
    if loads.size == 0:
        raise EmptyWindow("persistence needs at least one load value")
    return np.full(t2, loads[-1])


def build_model(spec: ModelSpec, t1: int, channels: int, t2: int,
                rng: np.random.Generator | None = None) -> Network:
    """Construct an untrained network for the fcnn/lstm/lrcn kinds."""
    rng = rng or np.random.default_rng(spec.seed)
    m = spec.width_multiplier
    layers = []
    if spec.kind == "fcnn":
        layers.append(Flatten())
        width_in = t1 * channels
        for width in spec.fcnn_hidden:
            layers.append(Dense(width_in, width * m, "relu", rng))
            width_in = width * m
        layers.append(Dense(width_in, t2, "identity", rng))
    elif spec.kind == "lstm":
        width_in = channels
        for _ in range(spec.lstm_layers):
            layers.append(LSTM(width_in, spec.lstm_hidden * m, rng))
            width_in = spec.lstm_hidden * m
        layers.append(Flatten())
        layers.append(Dense(t1 * width_in, spec.dense_size * m, "relu", rng))
        layers.append(Dropout(spec.dropout))
        layers.append(Dense(spec.dense_size * m, t2, "identity", rng))
    elif spec.kind == "lrcn":
        steps = t1
        width_in = channels
        for _ in range(spec.conv_layers):
            if steps < spec.conv_kernel:
                raise InvalidSpec(
                    f"conv stack consumes the {t1}-hour window: {steps} steps left "
                    f"for kernel {spec.conv_kernel}")
            layers.append(Conv1D(width_in, spec.conv_filters * m, spec.conv_kernel, rng))
            width_in = spec.conv_filters * m
            steps = steps - spec.conv_kernel + 1
        for _ in range(spec.lstm_layers):
            layers.append(LSTM(width_in, spec.lstm_hidden * m, rng))
            width_in = spec.lstm_hidden * m
        layers.append(Flatten())
        layers.append(Dense(steps * width_in, spec.dense_size * m, "relu", rng))
        layers.append(Dropout(spec.dropout))
        layers.append(Dense(spec.dense_size * m, t2, "identity", rng))
    else:
        raise InvalidSpec(f"{spec.kind!r} has no network architecture")
    return Network(layers)


def _batches(n: int, batch_size: int, order=None):
    idx = np.arange(n) if order is None else order
    for start in range(0, n, batch_size):
        yield idx[start:start + batch_size]


def _dataset_loss(net: Network, x: np.ndarray, y: np.ndarray, batch_size: int) -> float:
    chunk = max(batch_size, 1024)  # no backward pass; larger chunks are cheaper
    total = 0.0
    for idx in _batches(len(x), chunk):
        pred = net.forward(x[idx], training=False)
        loss, _ = mse_loss(pred, y[idx])
        total += loss * len(idx)
    return total / len(x)


def _train_network(dataset: WindowedDataset, spec: ModelSpec, norm: Normalizer):
    if dataset.n_train == 0 or dataset.n_val == 0:
        raise EmptySplit("network training needs non-empty train and val splits")
    xtr, ytr_raw = dataset.split_arrays("train")
    xva, yva_raw = dataset.split_arrays("val")
    xtr = norm.transform(xtr)
    ytr = norm.transform_target(ytr_raw)
    xva = norm.transform(xva)
    yva = norm.transform_target(yva_raw)

    rng = np.random.default_rng(spec.seed)
    net = build_model(spec, dataset.cfg.t1, len(dataset.channel_names), dataset.cfg.t2, rng)
    optimizer = Adam(base_lr=spec.base_lr, decay_rate=spec.lr_decay)

    history: list[tuple[int, float, float]] = []
    best_val = np.inf
    best_params = net.get_params()
    wait = 0
    for epoch in range(spec.epochs):
        order = rng.permutation(len(xtr))
        total = 0.0
        for idx in _batches(len(xtr), spec.batch_size, order):
            pred = net.forward(xtr[idx], training=True, rng=rng)
            loss, grad = mse_loss(pred, ytr[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"training loss became {loss} at epoch {epoch}")
            net.zero_grads()
            net.backward(grad)
            optimizer.step(net.named_params(), net.named_grads(), epoch)
            total += loss * len(idx)
        train_loss = total / len(xtr)
        val_loss = _dataset_loss(net, xva, yva, spec.batch_size)
        if not np.isfinite(val_loss):
            raise NonFiniteLoss(f"validation loss became {val_loss} at epoch {epoch}")
        history.append((epoch, train_loss, val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_params = net.get_params()
            wait = 0
        else:
            wait += 1
            if wait > spec.patience:
                break
    net.set_params(best_params)
    return best_params, history


def _train_svr(dataset: WindowedDataset, spec: ModelSpec, norm: Normalizer):
    if dataset.n_train == 0:
        raise EmptySplit("svr training needs a non-empty train split")
    x_raw, y_raw = dataset.split_arrays("train")
    x = norm.transform(x_raw).reshape(len(x_raw), -1)
    y = norm.transform_target(y_raw)
    t2 = dataset.cfg.t2
    w = np.zeros((t2, x.shape[1]))
    b = np.zeros(t2)
    for h in range(t2):
        if spec.svr_mode == "ridge":
            w[h], b[h] = svr_solvers.fit_ridge(x, y[:, h], spec.svr_lambda)
        else:
            w[h], b[h] = svr_solvers.fit_epsilon(
                x, y[:, h], epsilon=spec.svr_epsilon, c=spec.svr_c,
                max_iter=spec.svr_max_iter)
    return {"svr_w": w, "svr_b": b}


def train(dataset: WindowedDataset, spec: ModelSpec, selector: FeatureSelector) -> TrainedModel:
    """Fit one model of the requested kind; the normalizer is fitted on the
    train split and baked into the returned model."""
    norm = Normalizer.fit(dataset)
    params: dict[str, np.ndarray] = {}
    history: list[tuple[int, float, float]] = []
    if spec.kind == "persistence":
        pass
    elif spec.kind == "svr":
        params = _train_svr(dataset, spec, norm)
    else:
        params, history = _train_network(dataset, spec, norm)
    return TrainedModel(spec, selector, dataset.cfg, norm, dataset.channel_names,
                        dataset.load_channel, params, history)


def _network_for(model: TrainedModel) -> Network:
    net = build_model(model.spec, model.window.t1, len(model.channel_names),
                      model.window.t2, np.random.default_rng(model.spec.seed))
    net.set_params(model.params)
    return net


def predict_batch(model: TrainedModel, raw_inputs: np.ndarray) -> np.ndarray:
    """Raw (n, t1, channels) feature windows -> (n, t2) megawatt forecasts."""
    raw_inputs = np.asarray(raw_inputs, dtype=np.float64)
    expected = (model.window.t1, len(model.channel_names))
    if raw_inputs.ndim != 3 or raw_inputs.shape[1:] != expected:
        raise ShapeMismatch(
            f"expected (n, {expected[0]}, {expected[1]}) inputs, got {raw_inputs.shape}")
    t2 = model.window.t2
    if model.spec.kind == "persistence":
        last = raw_inputs[:, -1, model.load_channel]
        return np.repeat(last[:, None], t2, axis=1)
    if model.spec.kind == "svr":
        x = model.normalizer.transform(raw_inputs).reshape(len(raw_inputs), -1)
        y_norm = x @ model.params["svr_w"].T + model.params["svr_b"]
        return model.normalizer.inverse_transform_load(y_norm)
    net = _network_for(model)
    x = model.normalizer.transform(raw_inputs)
    y_norm = net.forward(x, training=False)
    return model.normalizer.inverse_transform_load(y_norm)


def predict_window(model: TrainedModel, raw_window: np.ndarray) -> np.ndarray:
    """Single raw (t1, channels) window -> (t2,) megawatt forecast."""
    return predict_batch(model, np.asarray(raw_window)[None, ...])[0]


def predict_at(model: TrainedModel, series: AlignedSeries, end: HourStamp) -> np.ndarray:
    """Forecast the t2 hours after `end` from the t1 hours ending at `end`.

    The t1 input hours must be a gap-free run inside one segment.
    """
    t1 = model.window.t1
    try:
        end_idx = series.stamps.index(end)
    except ValueError:
        raise NotContiguous(f"{end} is not present in the aligned series") from None
    start_idx = end_idx - t1 + 1
    if start_idx < 0:
        raise NotContiguous(f"fewer than {t1} hours available before {end}")
    inside = any(s <= start_idx and end_idx < s + length for s, length in series.segments)
    if not inside:
        raise NotContiguous(f"the {t1} hours ending at {end} cross a gap")
    matrix = assemble(series, model.selector)
    return predict_window(model, matrix.values[start_idx:end_idx + 1])


def save(model: TrainedModel, path) -> None:
    header = {
        "spec": model.spec.to_dict(),
        "selector": model.selector.to_dict(),
        "window": {"t1": model.window.t1, "t2": model.window.t2},
        "normalizer": model.normalizer.to_dict(),
        "channel_names": list(model.channel_names),
        "load_channel": model.load_channel,
        "history": [[e, tr, va] for e, tr, va in model.history],
    }
    write_artifact(path, header, model.params)


def load(path) -> TrainedModel:
    header, arrays = read_artifact(path)
    try:
        spec = ModelSpec.from_dict(header["spec"])
        selector = FeatureSelector.from_dict(header["selector"])
        window = WindowConfig(**header["window"])
        norm = Normalizer.from_dict(header["normalizer"])
        channel_names = tuple(header["channel_names"])
        load_channel = int(header["load_channel"])
        history = [(int(e), float(tr), float(va)) for e, tr, va in header["history"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"malformed artifact header: {exc}") from None
    return TrainedModel(spec, selector, window, norm, channel_names,
                        load_channel, arrays, history)
