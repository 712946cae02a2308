"""LSTM forecaster written directly in numpy.

Two variants share one code path:

* ``univariate``: 2 stacked LSTM layers -> activation -> dense head.
* ``multivariate``: a same-padded 1-D convolution over time (mixing all input
  channels) in front of the same stack.

Inverted dropout sits after the convolution, after the first LSTM layer and
between the activation and the dense head; it is active only in training
passes. Gradients are exact (full backpropagation through the lookback window).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import IO

import numpy as np

from .series import Scaler, WindowedDataset, apply, invert

UNIVARIATE = "univariate"
MULTIVARIATE = "multivariate"
CHECKPOINT_FORMAT = "workload-lab-model/1"
_ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass(frozen=True)
class NetworkSpec:
    variant: str = UNIVARIATE
    lookback: int = 24
    hidden: tuple[int, int] = (64, 64)
    activation: str = "relu"
    dropout: float = 0.2
    conv_width: int | None = None
    conv_channels: int | None = None

    def __post_init__(self):
        if self.variant not in (UNIVARIATE, MULTIVARIATE):
            raise ValueError(f"unknown variant {self.variant!r}")
        if len(self.hidden) != 2 or min(self.hidden) < 1:
            raise ValueError("exactly two LSTM layers with positive widths are required")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.lookback < 1:
            raise ValueError("lookback must be >= 1")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        if self.variant == MULTIVARIATE:
            if self.conv_width is None:
                object.__setattr__(self, "conv_width", 3)
            if self.conv_channels is None:
                object.__setattr__(self, "conv_channels", 16)
            if self.conv_width < 1 or self.conv_width % 2 == 0:
                raise ValueError("conv width must be a positive odd integer")
            if self.conv_channels < 1:
                raise ValueError("conv channels must be >= 1")
        elif self.conv_width is not None or self.conv_channels is not None:
            raise ValueError("the univariate network has no convolution")

    @property
    def input_dims(self) -> int:
        return 1 if self.variant == UNIVARIATE else 3

    @property
    def output_dims(self) -> int:
        return self.input_dims

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        d = dict(d)
        d["hidden"] = tuple(d["hidden"])
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 150
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    validation_fraction: float = 0.2
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation fraction must lie in [0, 1)")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")


@dataclass
class LstmLayerParams:
    """Gate weights stacked as [input, forget, output, candidate] over [x_t, h_{t-1}]."""

    W: np.ndarray  # (input_size + hidden_size, 4 * hidden_size)
    b: np.ndarray  # (4 * hidden_size,)

    @property
    def hidden_size(self) -> int:
        return self.b.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.W.shape[0] - self.hidden_size

    def __post_init__(self):
        if self.b.ndim != 1 or self.b.shape[0] % 4 or self.W.shape != (self.W.shape[0], self.b.shape[0]):
            raise ValueError("inconsistent LSTM parameter shapes")
        if self.W.shape[0] <= self.hidden_size:
            raise ValueError("LSTM weight matrix is missing input rows")


Params = dict[str, np.ndarray]


def param_shapes(spec: NetworkSpec) -> dict[str, tuple[int, ...]]:
    h0, h1 = spec.hidden
    shapes: dict[str, tuple[int, ...]] = {}
    in0 = spec.input_dims
    if spec.variant == MULTIVARIATE:
        shapes["conv.kernel"] = (spec.conv_width, spec.input_dims, spec.conv_channels)
        shapes["conv.bias"] = (spec.conv_channels,)
        in0 = spec.conv_channels
    shapes["lstm0.W"] = (in0 + h0, 4 * h0)
    shapes["lstm0.b"] = (4 * h0,)
    shapes["lstm1.W"] = (h0 + h1, 4 * h1)
    shapes["lstm1.b"] = (4 * h1,)
    shapes["dense.W"] = (h1, spec.output_dims)
    shapes["dense.b"] = (spec.output_dims,)
    return shapes


def init_params(spec: NetworkSpec, seed: int = 0, forget_bias: float = 1.0) -> Params:
    """Uniform(-s, s) weights with s = 1/sqrt(fan_in); zero biases except the forget gate."""
    rng = np.random.default_rng(seed)
    params: Params = {}
    for name, shape in param_shapes(spec).items():
        if name.endswith(".b") or name.endswith(".bias"):
            params[name] = np.zeros(shape)
            continue
        fan_in = shape[0] if len(shape) == 2 else shape[0] * shape[1]
        s = 1.0 / math.sqrt(fan_in)
        params[name] = rng.uniform(-s, s, size=shape)
    for layer, h in zip(("lstm0", "lstm1"), spec.hidden):
        params[f"{layer}.b"][h:2 * h] = forget_bias
    return params


def zero_params(spec: NetworkSpec) -> Params:
    return {name: np.zeros(shape) for name, shape in param_shapes(spec).items()}


def _check_params(spec: NetworkSpec, params: Params) -> None:
    for name, shape in param_shapes(spec).items():
        if name not in params:
            raise ValueError(f"missing parameter {name}")
        if params[name].shape != shape:
            raise ValueError(f"parameter {name} has shape {params[name].shape}, expected {shape}")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# -- LSTM cell ---------------------------------------------------------------------

def lstm_cell_forward(x, h_prev, c_prev, params: LstmLayerParams):
    """One step. Works on single vectors or on batches (leading axes)."""
    x = np.asarray(x, dtype=float)
    H = params.hidden_size
    if x.shape[-1] != params.input_size or np.shape(h_prev)[-1] != H or np.shape(c_prev)[-1] != H:
        raise ValueError("input or state width does not match the layer parameters")
    zin = np.concatenate([x, h_prev], axis=-1)
    z = zin @ params.W + params.b
    i = _sigmoid(z[..., :H])
    f = _sigmoid(z[..., H:2 * H])
    o = _sigmoid(z[..., 2 * H:3 * H])
    g = np.tanh(z[..., 3 * H:])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (zin, i, f, o, g, c_prev, tc)


def lstm_cell_backward(dh, dc, cache, params: LstmLayerParams):
    """Returns (dx, dh_prev, dc_prev, dW, db) for a batched step."""
    zin, i, f, o, g, c_prev, tc = cache
    dct = dc + dh * o * (1.0 - tc * tc)
    dz = np.concatenate([
        dct * g * i * (1.0 - i),
        dct * c_prev * f * (1.0 - f),
        dh * tc * o * (1.0 - o),
        dct * i * (1.0 - g * g),
    ], axis=-1)
    dW = zin.reshape(-1, zin.shape[-1]).T @ dz.reshape(-1, dz.shape[-1])
    db = dz.reshape(-1, dz.shape[-1]).sum(axis=0)
    dzin = dz @ params.W.T
    n_in = params.input_size
    return dzin[..., :n_in], dzin[..., n_in:], dct * f, dW, db


def _layer_forward(X, p: LstmLayerParams):
    B, L, _ = X.shape
    H = p.hidden_size
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    out = np.empty((B, L, H))
    caches = []
    for t in range(L):
        h, c, cache = lstm_cell_forward(X[:, t, :], h, c, p)
        out[:, t, :] = h
        caches.append(cache)
    return out, caches


def _layer_backward(dH, caches, p: LstmLayerParams):
    B, L, H = dH.shape
    dX = np.empty((B, L, p.input_size))
    dW = np.zeros_like(p.W)
    db = np.zeros_like(p.b)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(L - 1, -1, -1):
        dx, dh_next, dc_next, dWt, dbt = lstm_cell_backward(dH[:, t, :] + dh_next, dc_next, caches[t], p)
        dX[:, t, :] = dx
        dW += dWt
        db += dbt
    return dX, dW, db


# -- network ---------------------------------------------------------------------------

@dataclass
class ForwardCache:
    variant: str
    lookback: int
    single: bool
    padded: np.ndarray | None = None
    masks: dict = field(default_factory=dict)
    lstm_caches: tuple = ()
    last_hidden: np.ndarray | None = None
    act_raw: np.ndarray | None = None
    activated: np.ndarray | None = None


def _mask(rng, shape, rate):
    if rate <= 0.0:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _activate(kind, x):
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh(x)
    return x


def _activate_grad(kind, x, act, d):
    if kind == "relu":
        return d * (x > 0)
    if kind == "tanh":
        return d * (1.0 - act * act)
    return d


def forward(spec: NetworkSpec, params: Params, window, training: bool = False, rng=None):
    """Predict the next value for one window (lookback x dims) or a batch of them."""
    X = np.asarray(window, dtype=float)
    single = X.ndim == 2
    if single:
        X = X[None]
    if X.ndim != 3 or X.shape[1:] != (spec.lookback, spec.input_dims):
        raise ValueError(f"expected windows shaped (lookback={spec.lookback}, dims={spec.input_dims}), "
                         f"got {X.shape[-2:] if X.ndim >= 2 else X.shape}")
    _check_params(spec, params)
    if training and spec.dropout > 0 and rng is None:
        raise ValueError("training passes with dropout need an rng")
    rate = spec.dropout if training else 0.0
    B, L, _ = X.shape
    cache = ForwardCache(spec.variant, spec.lookback, single)

    seq = X
    if spec.variant == MULTIVARIATE:
        pad = spec.conv_width // 2
        Xp = np.pad(X, ((0, 0), (pad, pad), (0, 0)))
        K = params["conv.kernel"]
        Z = np.broadcast_to(params["conv.bias"], (B, L, K.shape[2])).copy()
        for k in range(spec.conv_width):
            Z += Xp[:, k:k + L, :] @ K[k]
        cache.padded = Xp
        m = _mask(rng, Z.shape, rate)
        cache.masks["conv"] = m
        seq = Z if m is None else Z * m

    p0 = LstmLayerParams(params["lstm0.W"], params["lstm0.b"])
    p1 = LstmLayerParams(params["lstm1.W"], params["lstm1.b"])
    H0, c0 = _layer_forward(seq, p0)
    m = _mask(rng, H0.shape, rate)
    cache.masks["lstm0"] = m
    H1, c1 = _layer_forward(H0 if m is None else H0 * m, p1)
    cache.lstm_caches = (c0, c1)

    last = H1[:, -1, :]
    act = _activate(spec.activation, last)
    m = _mask(rng, act.shape, rate)
    cache.masks["head"] = m
    a = act if m is None else act * m
    y = a @ params["dense.W"] + params["dense.b"]
    cache.last_hidden, cache.act_raw, cache.activated = last, act, a
    return (y[0] if single else y), cache


def backward(spec: NetworkSpec, params: Params, cache: ForwardCache, d_prediction) -> Params:
    """Gradients of sum(d_prediction * prediction) with respect to every parameter."""
    if cache.variant != spec.variant or cache.lookback != spec.lookback:
        raise ValueError("cache was produced by a different network spec")
    dY = np.asarray(d_prediction, dtype=float)
    if cache.single:
        dY = dY[None]
    B = cache.last_hidden.shape[0]
    if dY.shape != (B, spec.output_dims):
        raise ValueError(f"output gradient has shape {dY.shape}, expected {(B, spec.output_dims)}")
    grads: Params = {}
    grads["dense.W"] = cache.activated.T @ dY
    grads["dense.b"] = dY.sum(axis=0)
    da = dY @ params["dense.W"].T
    if cache.masks["head"] is not None:
        da = da * cache.masks["head"]
    dlast = _activate_grad(spec.activation, cache.last_hidden, cache.act_raw, da)

    h1 = spec.hidden[1]
    p0 = LstmLayerParams(params["lstm0.W"], params["lstm0.b"])
    p1 = LstmLayerParams(params["lstm1.W"], params["lstm1.b"])
    dH1 = np.zeros((B, spec.lookback, h1))
    dH1[:, -1, :] = dlast
    dH0, grads["lstm1.W"], grads["lstm1.b"] = _layer_backward(dH1, cache.lstm_caches[1], p1)
    if cache.masks["lstm0"] is not None:
        dH0 = dH0 * cache.masks["lstm0"]
    dseq, grads["lstm0.W"], grads["lstm0.b"] = _layer_backward(dH0, cache.lstm_caches[0], p0)

    if spec.variant == MULTIVARIATE:
        if cache.masks["conv"] is not None:
            dseq = dseq * cache.masks["conv"]
        L = spec.lookback
        flat = dseq.reshape(-1, dseq.shape[-1])
        grads["conv.bias"] = flat.sum(axis=0)
        dK = np.empty_like(params["conv.kernel"])
        for k in range(spec.conv_width):
            dK[k] = cache.padded[:, k:k + L, :].reshape(-1, spec.input_dims).T @ flat
        grads["conv.kernel"] = dK
    return grads


# -- training ----------------------------------------------------------------------------

def mse_loss(pred, target) -> tuple[float, np.ndarray]:
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def _evaluate(spec, params, data: WindowedDataset, batch: int = 1024) -> float:
    if len(data) == 0:
        return math.nan
    total = 0.0
    for s in range(0, len(data), batch):
        pred, _ = forward(spec, params, data.inputs[s:s + batch])
        diff = pred - data.targets[s:s + batch]
        total += float(np.sum(diff * diff))
    return total / data.targets.size


class _Adam:
    def __init__(self, params: Params, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: Params, grads: Params) -> None:
        cfg = self.cfg
        self.t += 1
        c1 = 1.0 - cfg.beta1 ** self.t
        c2 = 1.0 - cfg.beta2 ** self.t
        for k in sorted(params):
            g = grads[k]
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * g * g
            params[k] -= cfg.learning_rate * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + cfg.adam_eps)


class _SGD:
    def __init__(self, params: Params, cfg: TrainConfig):
        self.cfg = cfg

    def step(self, params: Params, grads: Params) -> None:
        for k in sorted(params):
            params[k] -= self.cfg.learning_rate * grads[k]


def train(spec: NetworkSpec, dataset: WindowedDataset, config: TrainConfig = TrainConfig(),
          params: Params | None = None, progress=None):
    """Minimise MSE with minibatches; the last ``validation_fraction`` of windows is held out.

    Returns ``(params, history)`` where history holds one (train_loss, val_loss)
    per epoch. Training loss is the mean over the epoch's dropout-active
    minibatches; validation loss is an inference pass (NaN with no validation).
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if dataset.inputs.shape[1:] != (spec.lookback, spec.input_dims):
        raise ValueError("dataset windows do not match the network spec")
    train_set, val_set = dataset.split(config.validation_fraction)
    if len(train_set) == 0:
        raise ValueError("validation split leaves no training windows")
    rng = np.random.default_rng(config.seed)
    if params is None:
        params = init_params(spec, seed=int(rng.integers(2**31)))
    else:
        params = {k: v.copy() for k, v in params.items()}
    opt = _Adam(params, config) if config.optimizer == "adam" else _SGD(params, config)

    history: list[tuple[float, float]] = []
    n = len(train_set)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, config.batch_size):
            idx = order[s:s + config.batch_size]
            pred, cache = forward(spec, params, train_set.inputs[idx], training=True, rng=rng)
            loss, dpred = mse_loss(pred, train_set.targets[idx])
            total += loss * idx.size
            opt.step(params, backward(spec, params, cache, dpred))
        history.append((total / n, _evaluate(spec, params, val_set)))
        if progress is not None:
            progress(epoch, history[-1])
    return params, history


def predict(spec: NetworkSpec, params: Params, window, scaler: Scaler | None = None) -> np.ndarray:
    """Forecast in original units: scale the window, run inference, undo the scaling."""
    w = np.asarray(window, dtype=float)
    if w.ndim == 1 and spec.input_dims == 1:
        w = w[:, None]
    scaler = scaler or Scaler.identity(spec.input_dims)
    pred, _ = forward(spec, params, apply(scaler, w))
    return invert(scaler, np.atleast_2d(pred))[0] if w.ndim == 2 else invert(scaler, pred)


def one_step_forecasts(spec: NetworkSpec, params: Params, scaled_values, start: int,
                       batch: int = 1024) -> np.ndarray:
    """Scaled one-step forecasts of values[start:] from the true preceding windows."""
    v = np.asarray(scaled_values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if start < spec.lookback:
        raise ValueError("start leaves too few values for one lookback window")
    idx = np.arange(start, v.shape[0])[:, None] - spec.lookback + np.arange(spec.lookback)[None, :]
    out = np.empty((idx.shape[0], spec.output_dims))
    for s in range(0, idx.shape[0], batch):
        out[s:s + batch], _ = forward(spec, params, v[idx[s:s + batch]])
    return out


# -- gradient verification -------------------------------------------------------------------

def gradient_check(spec: NetworkSpec, params: Params, windows, seed: int = 0,
                   eps: float = 1e-5, floor: float = 1e-6, training: bool = False) -> float:
    """Max relative error between backward() and central differences of a random projection.

    Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
    With ``training`` set, the same dropout masks are replayed for every evaluation.
    """
    rng = np.random.default_rng(seed)
    X = np.asarray(windows, dtype=float)
    proj = rng.normal(size=(X.shape[0], spec.output_dims))
    mask_seed = int(rng.integers(2**31))

    def objective(p):
        y, cache = forward(spec, p, X, training=training, rng=np.random.default_rng(mask_seed))
        return float(np.sum(proj * y)), cache

    _, cache = objective(params)
    analytic = backward(spec, params, cache, proj)
    worst = 0.0
    for name in sorted(params):
        base = params[name]
        for idx in np.ndindex(base.shape):
            orig = base[idx]
            base[idx] = orig + eps
            fp, _ = objective(params)
            base[idx] = orig - eps
            fm, _ = objective(params)
            base[idx] = orig
            num = (fp - fm) / (2 * eps)
            ana = analytic[name][idx]
            worst = max(worst, abs(ana - num) / max(abs(ana), abs(num), floor))
    return worst


# -- checkpoints -----------------------------------------------------------------------------

def _nan_to_none(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v)


def save_checkpoint(fh: IO[str], spec: NetworkSpec, params: Params, scaler: Scaler | None = None,
                    history=(), extra: dict | None = None) -> None:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "spec": spec.to_dict(),
        "scaler": scaler.to_dict() if scaler is not None else None,
        "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in sorted(params.items())},
        "history": [[_nan_to_none(a), _nan_to_none(b)] for a, b in history],
    }
    if extra:
        doc["extra"] = extra
    json.dump(doc, fh, sort_keys=True)
    fh.write("\n")


@dataclass
class Checkpoint:
    spec: NetworkSpec
    params: Params
    scaler: Scaler | None
    history: list[tuple[float, float]]
    extra: dict


def load_checkpoint(fh: IO[str]) -> Checkpoint:
    doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {doc.get('format')!r}")
    spec = NetworkSpec.from_dict(doc["spec"])
    params = {k: np.asarray(v["data"], dtype=float).reshape(v["shape"]) for k, v in doc["params"].items()}
    _check_params(spec, params)
    scaler = Scaler.from_dict(doc["scaler"]) if doc.get("scaler") else None
    history = [(math.nan if a is None else a, math.nan if b is None else b) for a, b in doc["history"]]
    return Checkpoint(spec, params, scaler, history, doc.get("extra", {}))
