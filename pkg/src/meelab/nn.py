"""Small dense feedforward network with hand-written backprop and Adam.

Parameters are float64 numpy arrays. ``forward`` returns the outputs along
with a :class:`ForwardTrace`; hand that trace back to ``backward`` with
the gradient of a scalar loss w.r.t. the outputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ShapeError, TrainingError, UsageError

ACTIVATIONS = ("relu", "linear")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (in_dim, out_dim)
    biases: np.ndarray  # (out_dim,)
    activation: str = "linear"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64).reshape(-1)
        if self.weights.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.biases.shape[0] != self.weights.shape[1]:
            raise ShapeError(
                f"bias length {self.biases.shape[0]} != weight columns {self.weights.shape[1]}"
            )
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class Network:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("network needs at least one layer")
        for idx, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.out_dim != b.in_dim:
                raise ShapeError(f"layer {idx} outputs {a.out_dim} but layer {idx + 1} expects {b.in_dim}")

    @property
    def sizes(self) -> list[int]:
        return [self.layers[0].in_dim] + [layer.out_dim for layer in self.layers]

    def parameters(self) -> list[np.ndarray]:
        """Flat list ``[W0, b0, W1, b1, ...]``; the same order ``backward`` uses."""
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.biases))
        return out

    def copy(self) -> "Network":
        return Network([replace(l, weights=l.weights.copy(), biases=l.biases.copy()) for l in self.layers])

    def predict(self, batch) -> np.ndarray:
        return forward(self, batch)[0]

    def save(self, path) -> None:
        arrays = {}
        for i, layer in enumerate(self.layers):
            arrays[f"w{i}"] = layer.weights
            arrays[f"b{i}"] = layer.biases
        arrays["activations"] = np.array([l.activation for l in self.layers])
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path) -> "Network":
        with np.load(path) as data:
            acts = [str(a) for a in data["activations"]]
            return cls([DenseLayer(data[f"w{i}"], data[f"b{i}"], act) for i, act in enumerate(acts)])


@dataclass
class ForwardTrace:
    inputs: list[np.ndarray]
    preacts: list[np.ndarray]
    network_id: int

    @property
    def depth(self) -> int:
        return len(self.inputs)


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net: Network, lr: float, **kwargs) -> "AdamState":
        params = net.parameters()
        return cls(lr=lr, m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kwargs)


def init_network(layer_sizes, seed: int) -> Network:
    """He-initialized network; relu on hidden layers, linear output.

    ``layer_sizes`` includes the input width, so ``[5, 20, 20, 30, 1]``
    gives four weight layers.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2 or any(int(s) != s or s < 1 for s in sizes):
        raise ConfigError(f"layer sizes must be >= 2 positive integers, got {sizes}")
    rng = np.random.default_rng(seed)
    layers = []
    for idx, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(int(fan_in), int(fan_out)))
        act = "linear" if idx == len(sizes) - 2 else "relu"
        layers.append(DenseLayer(w, np.zeros(int(fan_out)), act))
    return Network(layers)


def forward(net: Network, batch) -> tuple[np.ndarray, ForwardTrace]:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.layers[0].in_dim:
        raise ShapeError(f"batch shape {x.shape} does not fit input width {net.layers[0].in_dim}")
    inputs, preacts = [], []
    for layer in net.layers:
        inputs.append(x)
        z = x @ layer.weights + layer.biases
        preacts.append(z)
        x = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return x, ForwardTrace(inputs, preacts, id(net))


def backward(net: Network, trace: ForwardTrace, d_outputs) -> list[np.ndarray]:
    """Gradients ``[dW0, db0, dW1, db1, ...]`` given ``dLoss/dOutputs``."""
    if trace.network_id != id(net) or trace.depth != len(net.layers):
        raise UsageError("trace was not produced by this network")
    delta = np.asarray(d_outputs, dtype=np.float64)
    if delta.shape != trace.preacts[-1].shape:
        raise ShapeError(f"d_outputs shape {delta.shape} != outputs shape {trace.preacts[-1].shape}")
    grads: list[np.ndarray] = [None] * (2 * len(net.layers))  # type: ignore[list-item]
    for idx in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[idx]
        if layer.activation == "relu":
            delta = delta * (trace.preacts[idx] > 0)
        grads[2 * idx] = trace.inputs[idx].T @ delta
        grads[2 * idx + 1] = delta.sum(axis=0)
        if idx:
            delta = delta @ layer.weights.T
    return grads


def adam_step(net: Network, grads, state: AdamState) -> tuple[Network, AdamState]:
    """One bias-corrected Adam update. Inputs are left untouched."""
    params = net.parameters()
    if len(grads) != len(params):
        raise ShapeError(f"expected {len(params)} gradient arrays, got {len(grads)}")
    for i, (p, g) in enumerate(zip(params, grads)):
        if np.shape(g) != p.shape:
            raise ShapeError(f"gradient {i} has shape {np.shape(g)}, parameter has {p.shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in layer {i // 2}")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m_new, v_new, p_new = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1**step)
        v_hat = v / (1.0 - b2**step)
        m_new.append(m)
        v_new.append(v)
        p_new.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    layers = [
        DenseLayer(p_new[2 * i], p_new[2 * i + 1], layer.activation) for i, layer in enumerate(net.layers)
    ]
    return Network(layers), replace(state, step=step, m=m_new, v=v_new)
