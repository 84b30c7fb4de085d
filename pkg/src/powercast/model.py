"""Next-hour consumption regressor: one LSTM layer into one dense unit.

Everything is plain numpy with float64: the forward recurrence, full
backpropagation through time, and bias-corrected Adam updates.  Training is
single-threaded and, for a fixed seed, bit-reproducible on one machine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

GATES = ("i", "f", "o", "g")

# parameter tensor names: per-gate input weights, recurrent weights, biases,
# then the dense readout
PARAM_NAMES = tuple(f"W_{g}" for g in GATES) + tuple(f"U_{g}" for g in GATES) + tuple(
    f"b_{g}" for g in GATES
) + ("dense_w", "dense_b")


@dataclass(frozen=True)
class ModelConfig:
    input_size: int = 1
    hidden_size: int = 50
    lookback: int = 1
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if min(self.input_size, self.hidden_size, self.lookback, self.epochs, self.batch_size) < 1:
            raise ValueError("sizes, lookback, epochs and batch_size must all be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")


@dataclass
class ModelState:
    """Parameters plus Adam moments and the shared update counter."""

    config: ModelConfig
    params: dict[str, np.ndarray]
    adam_m: dict[str, np.ndarray]
    adam_v: dict[str, np.ndarray]
    step: int = 0

    def finite(self) -> bool:
        return all(np.isfinite(t).all() for t in self.params.values())


@dataclass
class TrainReport:
    """Full-set train/test MSE after each epoch, plus wall time per epoch."""

    train_loss: list[float] = field(default_factory=list)
    test_loss: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)


@dataclass
class ForwardCache:
    """Per-timestep activations kept for backpropagation through time."""

    x: np.ndarray            # (B, T, D)
    gates: list[dict[str, np.ndarray]]
    c_states: list[np.ndarray]
    tanh_c: list[np.ndarray]
    h_prev: list[np.ndarray]
    c_prev: list[np.ndarray]
    h_last: np.ndarray
    step_token: int


def _param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    h, d = config.hidden_size, config.input_size
    shapes: dict[str, tuple[int, ...]] = {}
    for g in GATES:
        shapes[f"W_{g}"] = (h, d)
        shapes[f"U_{g}"] = (h, h)
        shapes[f"b_{g}"] = (h,)
    shapes["dense_w"] = (h,)
    shapes["dense_b"] = (1,)
    return shapes


def init_state(config: ModelConfig, rng: np.random.Generator | None = None) -> ModelState:
    """Fresh state with uniform(-k, k) weights, k = 1/sqrt(hidden_size)."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    k = 1.0 / np.sqrt(config.hidden_size)
    params = {name: rng.uniform(-k, k, size=shape) for name, shape in _param_shapes(config).items()}
    zeros = lambda: {name: np.zeros(shape) for name, shape in _param_shapes(config).items()}
    return ModelState(config=config, params=params, adam_m=zeros(), adam_v=zeros(), step=0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign to stay overflow-free on both tails
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _as_batch(window, input_size: int) -> np.ndarray:
    """Normalize a window or batch of windows to shape (B, T, D)."""
    x = np.asarray(window, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :, np.newaxis]
    elif x.ndim == 2:
        x = x[:, :, np.newaxis]
    elif x.ndim != 3:
        raise ValueError(f"window must have 1-3 dimensions, got {x.ndim}")
    if x.shape[2] != input_size:
        raise ValueError(f"window feature size {x.shape[2]} != input_size {input_size}")
    return x


def forward_batch(state: ModelState, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run the LSTM over a batch of windows; returns (predictions (B,), cache)."""
    x = _as_batch(x, state.config.input_size)
    p = state.params
    batch, steps, _ = x.shape
    h = np.zeros((batch, state.config.hidden_size))
    c = np.zeros_like(h)
    cache = ForwardCache(
        x=x, gates=[], c_states=[], tanh_c=[], h_prev=[], c_prev=[], h_last=h, step_token=state.step
    )
    for t in range(steps):
        xt = x[:, t, :]
        pre = {g: xt @ p[f"W_{g}"].T + h @ p[f"U_{g}"].T + p[f"b_{g}"] for g in GATES}
        gate = {
            "i": _sigmoid(pre["i"]),
            "f": _sigmoid(pre["f"]),
            "o": _sigmoid(pre["o"]),
            "g": np.tanh(pre["g"]),
        }
        cache.h_prev.append(h)
        cache.c_prev.append(c)
        c = gate["f"] * c + gate["i"] * gate["g"]
        tc = np.tanh(c)
        h = gate["o"] * tc
        cache.gates.append(gate)
        cache.c_states.append(c)
        cache.tanh_c.append(tc)
    cache.h_last = h
    predictions = h @ p["dense_w"] + p["dense_b"][0]
    return predictions, cache


def lstm_forward(state: ModelState, window) -> tuple[float, ForwardCache]:
    """Predict one scalar from one input window of length ``lookback``."""
    predictions, cache = forward_batch(state, window)
    if predictions.shape != (1,):
        raise ValueError(f"expected a single window, got batch of {predictions.shape[0]}")
    return float(predictions[0]), cache


def backward_batch(state: ModelState, cache: ForwardCache, dy: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of the loss w.r.t. every parameter, given dLoss/dprediction."""
    if cache.step_token != state.step:
        raise ValueError("stale cache: parameters were updated after the forward pass")
    p = state.params
    dy = np.asarray(dy, dtype=float)
    grads = {name: np.zeros_like(tensor) for name, tensor in p.items()}
    grads["dense_w"] = cache.h_last.T @ dy
    grads["dense_b"] = np.array([dy.sum()])
    dh = np.outer(dy, p["dense_w"])
    dc = np.zeros_like(dh)
    for t in reversed(range(len(cache.gates))):
        gate = cache.gates[t]
        i, f, o, g = gate["i"], gate["f"], gate["o"], gate["g"]
        tc = cache.tanh_c[t]
        dc = dc + dh * o * (1.0 - tc * tc)
        d_pre = {
            "o": dh * tc * o * (1.0 - o),
            "i": dc * g * i * (1.0 - i),
            "f": dc * cache.c_prev[t] * f * (1.0 - f),
            "g": dc * i * (1.0 - g * g),
        }
        xt = cache.x[:, t, :]
        h_prev = cache.h_prev[t]
        dh = np.zeros_like(dh)
        for name in GATES:
            da = d_pre[name]
            grads[f"W_{name}"] += da.T @ xt
            grads[f"U_{name}"] += da.T @ h_prev
            grads[f"b_{name}"] += da.sum(axis=0)
            dh += da @ p[f"U_{name}"]
        dc = dc * f
    return grads


def lstm_backward(state: ModelState, cache: ForwardCache, loss_gradient: float) -> dict[str, np.ndarray]:
    """Single-window backward pass; ``loss_gradient`` is dLoss/dprediction."""
    return backward_batch(state, cache, np.array([loss_gradient]))


def adam_step(state: ModelState, grads: dict[str, np.ndarray], config: ModelConfig | None = None) -> ModelState:
    """One bias-corrected Adam update over every parameter tensor, in place."""
    cfg = config or state.config
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in {name!r} at step {state.step + 1}")
    t = state.step + 1
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    for name, g in grads.items():
        m = state.adam_m[name]
        v = state.adam_v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * (g * g)
        state.params[name] -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.epsilon)
    state.step = t
    return state


def make_sequences(series, lookback: int) -> tuple[np.ndarray, np.ndarray]:
    """Sliding windows over a 1-D series: inputs (N, lookback), targets (N,).

    Window ``i`` covers ``series[i : i + lookback]`` and its target is
    ``series[i + lookback]``, so N = len(series) - lookback.
    """
    values = np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(values) <= lookback:
        raise ValueError(f"series of length {len(values)} is too short for lookback {lookback}")
    n = len(values) - lookback
    windows = np.stack([values[i : i + lookback] for i in range(n)])
    return windows, values[lookback:]


def evaluate_mse(state: ModelState, windows: np.ndarray, targets: np.ndarray) -> float:
    predictions, _ = forward_batch(state, windows)
    return float(np.mean((predictions - targets) ** 2))


def train(train_series, test_series, config: ModelConfig) -> tuple[ModelState, TrainReport]:
    """Minibatch Adam training on MSE with per-epoch full-set loss tracking.

    Both series must already be normalized with train-fitted parameters.
    The train sequence order is reshuffled every epoch from the seeded RNG;
    losses are recorded on the full train and test sets after each epoch.
    """
    state = init_state(config)
    x_train, y_train = make_sequences(train_series, config.lookback)
    x_test, y_test = make_sequences(test_series, config.lookback)
    shuffle_rng = np.random.default_rng(config.seed)
    report = TrainReport()
    n = len(y_train)
    for _ in range(config.epochs):
        started = time.perf_counter()
        order = shuffle_rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            batch = order[lo : lo + config.batch_size]
            predictions, cache = forward_batch(state, x_train[batch])
            dy = 2.0 * (predictions - y_train[batch]) / len(batch)
            grads = backward_batch(state, cache, dy)
            adam_step(state, grads, config)
        train_mse = evaluate_mse(state, x_train, y_train)
        test_mse = evaluate_mse(state, x_test, y_test)
        if not (np.isfinite(train_mse) and np.isfinite(test_mse)):
            raise FloatingPointError(
                f"non-finite loss after epoch {len(report.train_loss) + 1}: "
                f"train={train_mse}, test={test_mse}"
            )
        report.train_loss.append(train_mse)
        report.test_loss.append(test_mse)
        report.epoch_seconds.append(time.perf_counter() - started)
    return state, report


def predict_series(state: ModelState, series, lookback: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Windowed predictions over a normalized series.

    Returns ``(predictions, actuals)`` of length ``len(series) - lookback``,
    aligned index for index; de-normalize with ``preprocess.inverse_scale``
    when physical units are needed.
    """
    if not state.finite():
        raise ValueError("model state contains non-finite parameters")
    windows, targets = make_sequences(series, lookback or state.config.lookback)
    predictions, _ = forward_batch(state, windows)
    return predictions, targets
