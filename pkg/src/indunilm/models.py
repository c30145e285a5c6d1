"""Sequence-to-point regressors written against numpy, with Adam training.

Three architectures share one interface: ``forward`` returns predictions and a
cache, ``backward`` turns the upstream gradient into parameter gradients.
Training runs in float32; gradient checks run on a float64 copy.
"""

from __future__ import annotations

import json
import math
import struct
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .pipeline import WindowedDataset

ARCHS = ("Linear", "MLP", "DilatedConv")
CHECKPOINT_MAGIC = b"S2PM"


class NumericError(FloatingPointError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class ModelSpec:
    arch: str = "MLP"
    input_len: int = 288
    hidden_sizes: tuple[int, ...] = (64, 64)
    channels: int = 16
    kernel: int = 3
    dilations: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    dropout: float = 0.33

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.input_len < 1:
            raise ValueError("input_len must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    @property
    def receptive_field(self) -> int:
        return 1 + (self.kernel - 1) * sum(self.dilations)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        d["dilations"] = list(self.dilations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ModelSpec:
        d = dict(d)
        d["hidden_sizes"] = tuple(d.get("hidden_sizes", ()))
        d["dilations"] = tuple(d.get("dilations", ()))
        return cls(**d)


@dataclass(frozen=True)
class TrainOpts:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not 0 < self.patience < self.max_epochs:
            raise ValueError("patience must be positive and smaller than max_epochs")


# --------------------------------------------------------------------------- #
# Networks

def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, shape)


class Network:
    """Parameter container plus forward/backward for one architecture."""

    names: tuple[str, ...] = ()

    def __init__(self, spec: ModelSpec, params: list[np.ndarray]):
        self.spec = spec
        self.params = params

    @property
    def dtype(self):
        return self.params[0].dtype

    def astype(self, dtype) -> Network:
        return type(self)(self.spec, [p.astype(dtype) for p in self.params])

    def copy(self) -> Network:
        return type(self)(self.spec, [p.copy() for p in self.params])

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, theta: np.ndarray) -> None:
        off = 0
        for p in self.params:
            p[...] = theta[off : off + p.size].reshape(p.shape)
            off += p.size
        if off != len(theta):
            raise ValueError(f"parameter vector has {len(theta)} entries, expected {off}")

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def forward(self, x, train=False, rng=None):  # pragma: no cover - interface
        raise NotImplementedError

    def backward(self, cache, dy):  # pragma: no cover - interface
        raise NotImplementedError

    def macs(self) -> int:  # pragma: no cover - interface
        raise NotImplementedError

    def relu_pattern(self, cache) -> np.ndarray:
        """Flattened on/off state of every ReLU in an inference forward pass."""
        return np.zeros(0, dtype=bool)


class LinearNet(Network):
    @classmethod
    def init(cls, spec: ModelSpec, rng: np.random.Generator) -> LinearNet:
        return cls(spec, [_uniform(rng, (spec.input_len,), spec.input_len), np.zeros(1)])

    def forward(self, x, train=False, rng=None):
        w, b = self.params
        return x @ w + b[0], x

    def backward(self, x, dy):
        return [x.T @ dy, np.array([dy.sum()], dtype=dy.dtype)]

    def macs(self) -> int:
        return self.spec.input_len


class MLPNet(Network):
    @classmethod
    def init(cls, spec: ModelSpec, rng: np.random.Generator) -> MLPNet:
        sizes = (spec.input_len, *spec.hidden_sizes, 1)
        params = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            params += [_uniform(rng, (a, b), a), _uniform(rng, (b,), a)]
        return cls(spec, params)

    def forward(self, x, train=False, rng=None):
        acts = [x]
        h = x
        n_layers = len(self.params) // 2
        for i in range(n_layers):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            h = h @ w + b
            if i < n_layers - 1:
                h = np.maximum(h, 0)
            acts.append(h)
        return h[:, 0], acts

    def backward(self, acts, dy):
        grads = [None] * len(self.params)
        g = dy[:, None]
        n_layers = len(self.params) // 2
        for i in reversed(range(n_layers)):
            w = self.params[2 * i]
            if i < n_layers - 1:
                g = g * (acts[i + 1] > 0)
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            if i > 0:
                g = g @ w.T
        return grads

    def relu_pattern(self, acts) -> np.ndarray:
        return np.concatenate([(a > 0).ravel() for a in acts[1:-1]])

    def macs(self) -> int:
        sizes = (self.spec.input_len, *self.spec.hidden_sizes, 1)
        return sum(a * b for a, b in zip(sizes[:-1], sizes[1:]))


def _shift(h: np.ndarray, off: int) -> np.ndarray:
    """out[:, t] = h[:, t + off], zero outside the sequence (axis 1 is time)."""
    if off == 0:
        return h
    out = np.zeros_like(h)
    if off > 0:
        out[:, :-off] = h[:, off:]
    else:
        out[:, -off:] = h[:, :off]
    return out


class DilatedConvNet(Network):
    """Stack of same-padded dilated convolutions with ReLU, dropout and
    residual connections, followed by a head reading both the global time
    average and the window-center features. Activations are (batch, time,
    channels)."""

    @classmethod
    def init(cls, spec: ModelSpec, rng: np.random.Generator) -> DilatedConvNet:
        params = []
        c_in = 1
        for _ in spec.dilations:
            fan_in = c_in * spec.kernel
            params += [_uniform(rng, (spec.kernel, c_in, spec.channels), fan_in), _uniform(rng, (spec.channels,), fan_in)]
            c_in = spec.channels
        params += [_uniform(rng, (2 * spec.channels,), 2 * spec.channels), np.zeros(1)]
        return cls(spec, params)

    def _offsets(self, d: int) -> list[int]:
        half = self.spec.kernel // 2
        return [(k - half) * d for k in range(self.spec.kernel)]

    def forward(self, x, train=False, rng=None):
        spec = self.spec
        h = x[:, :, None]
        layers = []
        for li, d in enumerate(spec.dilations):
            w, b = self.params[2 * li], self.params[2 * li + 1]
            taps = [_shift(h, off) for off in self._offsets(d)]
            pre = sum(t @ w[k] for k, t in enumerate(taps)) + b
            act = np.maximum(pre, 0)
            mask = None
            if train and spec.dropout > 0:
                keep = 1.0 - spec.dropout
                mask = (rng.random(act.shape) < keep).astype(act.dtype) / keep
                act = act * mask
            out = act + h if li > 0 else act
            layers.append((taps, pre, mask))
            h = out
        center = spec.input_len // 2
        feat = np.concatenate([h.mean(axis=1), h[:, center, :]], axis=1)
        wh, bh = self.params[-2], self.params[-1]
        return feat @ wh + bh[0], (layers, h, feat)

    def backward(self, cache, dy):
        spec = self.spec
        layers, h_last, feat = cache
        grads = [None] * len(self.params)
        wh = self.params[-2]
        grads[-2] = feat.T @ dy
        grads[-1] = np.array([dy.sum()], dtype=dy.dtype)
        c = spec.channels
        dfeat = dy[:, None] * wh[None, :]
        length = h_last.shape[1]
        dh = np.repeat(dfeat[:, None, :c] / length, length, axis=1)
        dh[:, spec.input_len // 2, :] += dfeat[:, c:]
        for li in reversed(range(len(spec.dilations))):
            taps, pre, mask = layers[li]
            w = self.params[2 * li]
            g = dh if mask is None else dh * mask
            g = g * (pre > 0)
            grads[2 * li] = np.stack([np.einsum("btc,bto->co", t, g) for t in taps])
            grads[2 * li + 1] = g.sum(axis=(0, 1))
            dprev = dh.copy() if li > 0 else None
            dx = sum(_shift(g @ w[k].T, -off) for k, off in enumerate(self._offsets(spec.dilations[li])))
            dh = dx if dprev is None else dprev + dx
        return grads

    def relu_pattern(self, cache) -> np.ndarray:
        return np.concatenate([(pre > 0).ravel() for _, pre, _ in cache[0]])

    def macs(self) -> int:
        spec = self.spec
        total, c_in = 0, 1
        for _ in spec.dilations:
            total += spec.input_len * spec.kernel * c_in * spec.channels
            c_in = spec.channels
        return total + 2 * spec.channels


_NETS = {"Linear": LinearNet, "MLP": MLPNet, "DilatedConv": DilatedConvNet}


def build(spec: ModelSpec, seed: int, dtype=np.float32) -> Network:
    net = _NETS[spec.arch].init(spec, np.random.default_rng(seed))
    return net.astype(dtype)


# --------------------------------------------------------------------------- #
# Training

@dataclass
class TrainedModel:
    spec: ModelSpec
    network: Network
    training_log: list[tuple[float, float]] = field(default_factory=list)  # (train, val) per epoch
    best_epoch: int = 0
    wall_clock_s: float = 0.0
    samples_seen: int = 0

    @property
    def theta(self) -> np.ndarray:
        return self.network.flat()

    @property
    def best_val_loss(self) -> float:
        return self.training_log[self.best_epoch][1]


def mse_loss(net: Network, x: np.ndarray, y: np.ndarray, train=False, rng=None):
    pred, cache = net.forward(x, train=train, rng=rng)
    err = pred - y
    loss = float(np.mean(err * err))
    dy = (2.0 / len(y)) * err
    return loss, dy, cache


def evaluate_loss(net: Network, ds: WindowedDataset, batch: int = 1024) -> float:
    pred = predict_network(net, ds.inputs, batch)
    err = pred.astype(np.float64) - ds.targets
    return float(np.mean(err * err))


def train(spec: ModelSpec, train_set: WindowedDataset, val_set: WindowedDataset, opts: TrainOpts = TrainOpts()) -> TrainedModel:
    """Adam on MSE with early stopping; returns the best-validation parameters.

    Epoch 0 in the log is the untrained network, so the best epoch's
    validation loss can never exceed the starting one.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("train and validation sets must be non-empty")
    for name, ds in (("train", train_set), ("val", val_set)):
        if ds.inputs.shape[1] != spec.input_len:
            raise ValueError(f"{name} windows have length {ds.inputs.shape[1]}, spec expects {spec.input_len}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    net = build(spec, int(rng.integers(2**31)))
    x = np.ascontiguousarray(train_set.inputs, dtype=np.float32)
    y = np.ascontiguousarray(train_set.targets, dtype=np.float32)
    val = WindowedDataset(val_set.inputs.astype(np.float32), val_set.targets.astype(np.float32), val_set.index_map, val_set.spec)

    m = [np.zeros_like(p) for p in net.params]
    v = [np.zeros_like(p) for p in net.params]
    step = 0
    log = [(evaluate_loss(net, train_set), evaluate_loss(net, val))]
    best, best_epoch, best_theta = log[0][1], 0, net.flat().copy()
    seen = 0
    for epoch in range(1, opts.max_epochs + 1):
        order = rng.permutation(len(y))
        total = 0.0
        for bi, start in enumerate(range(0, len(y), opts.batch_size)):
            idx = order[start : start + opts.batch_size]
            loss, dy, cache = mse_loss(net, x[idx], y[idx], train=True, rng=rng)
            if not math.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {bi}")
            grads = net.backward(cache, dy.astype(np.float32))
            step += 1
            lr_t = opts.learning_rate * math.sqrt(1 - opts.beta2**step) / (1 - opts.beta1**step)
            for p, g, mi, vi in zip(net.params, grads, m, v):
                mi *= opts.beta1
                mi += (1 - opts.beta1) * g
                vi *= opts.beta2
                vi += (1 - opts.beta2) * g * g
                p -= (lr_t * mi / (np.sqrt(vi) + opts.adam_eps)).astype(p.dtype)
            total += loss * len(idx)
            seen += len(idx)
        val_loss = evaluate_loss(net, val)
        if not math.isfinite(val_loss):
            raise NumericError(f"non-finite validation loss at epoch {epoch}")
        log.append((total / len(y), val_loss))
        if val_loss < best:
            best, best_epoch, best_theta = val_loss, epoch, net.flat().copy()
        elif epoch - best_epoch >= opts.patience:
            break
    net.set_flat(best_theta)
    return TrainedModel(spec, net, log, best_epoch, time.perf_counter() - t0, seen)


def predict_network(net: Network, windows: np.ndarray, batch: int = 1024) -> np.ndarray:
    windows = np.asarray(windows)
    if windows.ndim != 2 or windows.shape[1] != net.spec.input_len:
        raise ValueError(f"expected windows of shape (N, {net.spec.input_len}), got {windows.shape}")
    windows = windows.astype(net.dtype, copy=False)
    out = [net.forward(windows[i : i + batch])[0] for i in range(0, len(windows), batch)]
    return np.concatenate(out) if out else np.zeros(0, dtype=net.dtype)


def predict(model: TrainedModel | Network, windows: np.ndarray) -> np.ndarray:
    """Normalized predictions, one per window; dropout is off."""
    net = model.network if isinstance(model, TrainedModel) else model
    return predict_network(net, windows)


def least_squares_linear(ds: WindowedDataset) -> np.ndarray:
    """Normal-equation solution [w, b] for the Linear architecture."""
    x = np.hstack([ds.inputs.astype(np.float64), np.ones((len(ds), 1))])
    return np.linalg.solve(x.T @ x, x.T @ ds.targets.astype(np.float64))


# --------------------------------------------------------------------------- #
# Gradient check

@dataclass(frozen=True)
class GradientCheck:
    max_rel_error: float
    n_params: int
    n_skipped: int  # coordinates whose +/-h step flipped a ReLU


def gradient_check(spec: ModelSpec, x: np.ndarray, y: np.ndarray, seed: int = 0, h: float = 1e-5, net: Network | None = None) -> GradientCheck:
    """Compare backprop against central differences of the MSE loss in float64.

    Relative error per parameter is |a - n| / max(|a|, |n|, 1e-6 * max|n|);
    the floor keeps parameters whose gradient is essentially zero from
    dominating through round-off. A coordinate whose +/-h step switches any
    ReLU is skipped: the loss is not differentiable across that step, so the
    difference quotient does not estimate the gradient there.
    """
    if len(x) > 8:
        raise ValueError("gradient check expects at most 8 windows")
    net = (build(spec, seed) if net is None else net).astype(np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _, dy, cache = mse_loss(net, x, y)
    analytic = np.concatenate([g.ravel() for g in net.backward(cache, dy)])
    theta = net.flat()
    numeric = np.empty_like(theta)
    keep = np.ones(len(theta), dtype=bool)

    def probe():
        loss, _, c = mse_loss(net, x, y)
        return loss, net.relu_pattern(c)

    for i in range(len(theta)):
        old = theta[i]
        theta[i] = old + h
        net.set_flat(theta)
        up, pat_up = probe()
        theta[i] = old - h
        net.set_flat(theta)
        down, pat_down = probe()
        theta[i] = old
        numeric[i] = (up - down) / (2 * h)
        keep[i] = np.array_equal(pat_up, pat_down)
    net.set_flat(theta)
    n_skipped = int(len(theta) - keep.sum())
    a, n = analytic[keep], numeric[keep]
    scale = np.max(np.abs(n)) if n.size else 0.0
    if scale == 0:
        err = 0.0 if not np.any(a) else math.inf
    else:
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6 * scale)
        err = float(np.max(np.abs(a - n) / denom))
    return GradientCheck(err, len(theta), n_skipped)


# --------------------------------------------------------------------------- #
# Checkpoints:
#   magic "S2PM", uint32 header length, JSON header (spec, best_epoch, n_params,
#   n_epochs), float32 theta, float64 (train, val) log pairs.

def save_checkpoint(model: TrainedModel, path: str | Path) -> Path:
    path = Path(path)
    theta = model.theta.astype("<f4")
    header = json.dumps(
        {"spec": model.spec.to_dict(), "best_epoch": model.best_epoch, "n_params": int(theta.size), "n_epochs": len(model.training_log)},
        sort_keys=True,
    ).encode()
    with path.open("wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(theta.tobytes())
        fh.write(np.asarray(model.training_log, dtype="<f8").reshape(-1, 2).tobytes())
    return path


def load_checkpoint(path: str | Path) -> TrainedModel:
    raw = Path(path).read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a model checkpoint")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + hlen])
    off = 8 + hlen
    spec = ModelSpec.from_dict(header["spec"])
    theta = np.frombuffer(raw, "<f4", header["n_params"], off)
    off += 4 * header["n_params"]
    log = np.frombuffer(raw, "<f8", 2 * header["n_epochs"], off).reshape(-1, 2)
    net = build(spec, 0)
    net.set_flat(theta.astype(np.float32))
    return TrainedModel(spec, net, [tuple(r) for r in log.tolist()], header["best_epoch"])
