"""Dense feedforward networks in float64 numpy with hand-written backprop.

Weights for layer ``l`` have shape ``(layer_sizes[l+1], layer_sizes[l])`` and
inputs are batch-major, so a layer computes ``x @ W.T + b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, ShapeError

HIDDEN_ACTIVATIONS = ("relu", "tanh")
OUTPUT_ACTIVATIONS = ("linear", "tanh")


@dataclass
class MLP:
    layer_sizes: tuple
    hidden_activation: str = "relu"
    output_activation: str = "linear"
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.hidden_activation!r}", field="hidden_activation")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.output_activation!r}", field="output_activation")
        if self.weights:
            for i, (w, b) in enumerate(zip(self.weights, self.biases)):
                if w.shape != (self.layer_sizes[i + 1], self.layer_sizes[i]) or b.shape != (self.layer_sizes[i + 1],):
                    raise ShapeError(f"layer {i} parameters do not match layer sizes {self.layer_sizes}")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list:
        """Parameter arrays in declaration order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def architecture(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
        }

    def copy(self) -> "MLP":
        return MLP(self.layer_sizes, self.hidden_activation, self.output_activation,
                   [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def forward(self, x):
        return forward(self, x)

    def predict(self, x) -> np.ndarray:
        return forward(self, x)[0]

    def backward(self, cache, output_gradient):
        return backward(self, cache, output_gradient)


@dataclass
class ForwardCache:
    inputs: list        # activation entering each layer
    pre: list           # pre-activation of each layer
    outputs: np.ndarray
    layer_sizes: tuple


def mlp_init(layer_sizes, hidden_activation="relu", output_activation="linear",
             rng: np.random.Generator | None = None) -> MLP:
    """Glorot-uniform weights, zero biases."""
    layer_sizes = list(layer_sizes)
    if len(layer_sizes) < 2:
        raise ConfigError("need at least an input and an output size", field="layer_sizes")
    if any(int(n) < 1 for n in layer_sizes):
        raise ConfigError("layer sizes must be >= 1", field="layer_sizes")
    rng = np.random.default_rng() if rng is None else rng
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MLP(tuple(layer_sizes), hidden_activation, output_activation, weights, biases)


def _activate(z, kind):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def forward(net: MLP, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.layer_sizes[0]:
        raise ShapeError(f"expected input of width {net.layer_sizes[0]}, got shape {x.shape}")
    inputs, pre = [], []
    h = x
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(h)
        z = h @ w.T + b
        pre.append(z)
        h = _activate(z, net.output_activation if i == last else net.hidden_activation)
    return h, ForwardCache(inputs, pre, h, net.layer_sizes)


def backward(net: MLP, cache: ForwardCache, output_gradient):
    """Reverse-mode gradients of ``sum(output * output_gradient)``.

    Returns ``(param_gradients, input_gradient)`` where ``param_gradients``
    follows ``net.parameters()`` order.
    """
    if cache.layer_sizes != net.layer_sizes:
        raise ShapeError("cache was produced by a different architecture")
    g = np.asarray(output_gradient, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != cache.outputs.shape:
        raise ShapeError(f"output gradient shape {g.shape} != output shape {cache.outputs.shape}")
    grads = [None] * (2 * net.n_layers)
    last = net.n_layers - 1
    for i in range(last, -1, -1):
        kind = net.output_activation if i == last else net.hidden_activation
        if kind == "relu":
            g = g * (cache.pre[i] > 0)
        elif kind == "tanh":
            a = cache.outputs if i == last else cache.inputs[i + 1]
            g = g * (1.0 - a * a)
        grads[2 * i] = g.T @ cache.inputs[i]
        grads[2 * i + 1] = g.sum(axis=0)
        g = g @ net.weights[i]
    return grads, g


@dataclass
class AdamState:
    first_moment: list
    second_moment: list
    step_count: int = 0
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stab: float = 1e-8

    @classmethod
    def for_network(cls, net: MLP, alpha=0.01, beta1=0.9, beta2=0.999, eps_stab=1e-8) -> "AdamState":
        params = net.parameters()
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0,
                   alpha, beta1, beta2, eps_stab)

    def copy(self) -> "AdamState":
        return AdamState([m.copy() for m in self.first_moment], [v.copy() for v in self.second_moment],
                         self.step_count, self.alpha, self.beta1, self.beta2, self.eps_stab)


def adam_step(net: MLP, param_gradients, adam: AdamState):
    """Bias-corrected Adam descent step, applied in place. Returns ``(net, adam)``."""
    params = net.parameters()
    if len(param_gradients) != len(params):
        raise ShapeError(f"expected {len(params)} gradient arrays, got {len(param_gradients)}")
    for p, g in zip(params, param_gradients):
        if np.shape(g) != p.shape:
            raise ShapeError(f"gradient shape {np.shape(g)} != parameter shape {p.shape}")
    adam.step_count += 1
    t = adam.step_count
    b1, b2 = adam.beta1, adam.beta2
    corr1 = 1.0 - b1 ** t
    corr2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, param_gradients, adam.first_moment, adam.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= adam.alpha * (m / corr1) / (np.sqrt(v / corr2) + adam.eps_stab)
    return net, adam


def _check_same_architecture(a: MLP, b: MLP):
    if a.architecture() != b.architecture():
        raise ShapeError(f"architecture mismatch: {a.architecture()} vs {b.architecture()}")


def soft_update(target: MLP, online: MLP, tau: float) -> MLP:
    """Blend in place: ``target <- tau * target + (1 - tau) * online``.

    ``tau`` is the fraction of the target that is retained, so ``tau=1``
    freezes the target and ``tau=0`` copies the online network.
    """
    _check_same_architecture(target, online)
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"must lie in [0, 1], got {tau}", field="tau")
    for t, o in zip(target.parameters(), online.parameters()):
        if tau == 1.0:
            continue
        if tau == 0.0:
            t[...] = o
        else:
            t *= tau
            t += (1.0 - tau) * o
    return target


def hard_update(target: MLP, online: MLP) -> MLP:
    return soft_update(target, online, 0.0)
