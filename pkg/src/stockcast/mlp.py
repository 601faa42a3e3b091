"""Feedforward sigmoid MLP: initialisation, evaluation, backprop and model files."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _reference, backend
from .errors import ModelParseError, NumericError, ShapeError, TrainingDivergedError

DEFAULT_LAYERS = (5, 21, 21, 1)
MAGIC = "mlpnet v1"


@dataclass(frozen=True)
class Topology:
    layer_sizes: tuple[int, ...] = DEFAULT_LAYERS

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ShapeError("a topology needs at least an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ShapeError(f"layer sizes must be positive: {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @classmethod
    def parse(cls, text: str) -> "Topology":
        try:
            return cls(tuple(int(p) for p in text.strip().split(":")))
        except ValueError as exc:
            raise ShapeError(f"bad topology {text!r}: {exc}") from None

    def __str__(self) -> str:
        return ":".join(str(s) for s in self.layer_sizes)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_params(self) -> int:
        s = self.layer_sizes
        return sum(a * b + b for a, b in zip(s[:-1], s[1:]))


@dataclass(frozen=True, eq=False)
class Network:
    """Weights are (fan_in, units) per non-input layer; arrays are read-only."""

    topology: Topology
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = self.topology.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeError("need exactly one weight matrix and one bias vector per non-input layer")
        ws, bs = [], []
        for k, (fan, m) in enumerate(zip(sizes[:-1], sizes[1:])):
            W = np.array(self.weights[k], dtype=np.float64)
            b = np.array(self.biases[k], dtype=np.float64)
            if W.shape != (fan, m) or b.shape != (m,):
                raise ShapeError(f"layer {k + 1}: expected W {(fan, m)} and b {(m,)}, got {W.shape} and {b.shape}")
            if not (np.isfinite(W).all() and np.isfinite(b).all()):
                raise NumericError(f"layer {k + 1} has non-finite parameters")
            W.flags.writeable = False
            b.flags.writeable = False
            ws.append(W)
            bs.append(b)
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))

    def flat(self) -> np.ndarray:
        """Fresh, writable copy in kernel layout (W row-major then b, per layer)."""
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b)
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, topology: Topology, params: np.ndarray) -> "Network":
        layers = _reference.layer_views(np.asarray(params, dtype=np.float64), topology.layer_sizes)
        return cls(topology, tuple(W for W, _ in layers), tuple(b for _, b in layers))

    def equals(self, other: "Network") -> bool:
        """Exact parameter equality."""
        return self.topology == other.topology and np.array_equal(self.flat(), other.flat())


@dataclass(frozen=True)
class TrainSample:
    input: np.ndarray
    target: float


def sigmoid(x: float) -> float:
    """Logistic function, evaluated without overflow.

    Results are held inside the open unit interval even where ``1/(1+e^-x)``
    would round to exactly 1.0 or 0.0.
    """
    return _reference.sigmoid(float(x))


def init_network(topology: Topology | None = None, seed: int = 0) -> Network:
    """Draw every weight and bias i.i.d. from U[-0.5, 0.5] using PCG64 keyed by ``seed``."""
    topology = topology or Topology()
    if seed < 0:
        raise ValueError("seed must be non-negative")
    rng = np.random.default_rng(seed)
    return Network.from_flat(topology, rng.uniform(-0.5, 0.5, topology.n_params))


def _layers(net: Network):
    return list(zip(net.weights, net.biases))


def _as_input(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.topology.n_inputs,):
        raise ShapeError(f"input has shape {x.shape}, network expects ({net.topology.n_inputs},)")
    return x


def forward(net: Network, x) -> tuple[float | np.ndarray, list[np.ndarray]]:
    """Evaluate the network.

    Returns the output (a float when there is a single output unit) and the
    activations of every layer, input first.
    """
    acts = _reference.forward(_layers(net), _as_input(net, x))
    out = acts[-1]
    return (float(out[0]) if out.shape[0] == 1 else out.copy()), acts


def _as_target(net: Network, target) -> np.ndarray:
    y = np.atleast_1d(np.asarray(target, dtype=np.float64))
    if y.shape != (net.topology.n_outputs,):
        raise ShapeError(f"target has shape {y.shape}, network expects ({net.topology.n_outputs},)")
    return y


def gradients(net: Network, sample: TrainSample) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Backprop gradients of ``0.5 * (output - target)**2`` with respect to every W and b."""
    _, grads, se = _reference.backprop(_layers(net), _as_input(net, sample.input), _as_target(net, sample.target))
    return [g[0] for g in grads], [g[1] for g in grads], se


def _stack(net: Network, samples: Sequence[TrainSample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.empty((len(samples), net.topology.n_inputs))
    Y = np.empty((len(samples), net.topology.n_outputs))
    for i, s in enumerate(samples):
        X[i] = _as_input(net, s.input)
        Y[i] = _as_target(net, s.target)
    return X, Y


def train_epochs(
    net: Network,
    X: np.ndarray,
    Y: np.ndarray,
    learning_rate: float,
    epochs: int,
    kernel: str | None = None,
) -> tuple[Network, np.ndarray]:
    """Run ``epochs`` ordered passes of online SGD over stacked samples.

    Returns the trained copy and the per-epoch MSE history. Raises
    ``TrainingDivergedError`` naming the first epoch with a non-finite error.
    """
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64).reshape(X.shape[0], -1)
    if X.shape[0] == 0:
        raise ValueError("no training samples")
    if X.shape[1] != net.topology.n_inputs or Y.shape[1] != net.topology.n_outputs:
        raise ShapeError(f"samples {X.shape}/{Y.shape} do not fit topology {net.topology}")
    params = net.flat()
    sizes = np.array(net.topology.layer_sizes, dtype=np.int64)
    history = np.zeros(epochs)
    done = backend.get(kernel)(params, sizes, X, Y, float(learning_rate), int(epochs), history)
    if done < epochs or not np.isfinite(params).all():
        raise TrainingDivergedError(min(done, epochs - 1) + 1)
    return Network.from_flat(net.topology, params), history


def train_step(net: Network, sample: TrainSample, learning_rate: float) -> tuple[Network, float]:
    """One SGD step; returns the updated copy and the pre-update squared error."""
    X, Y = _stack(net, [sample])
    new, history = train_epochs(net, X, Y, learning_rate, 1)
    return new, float(history[0])


def train_epoch(net: Network, samples: Sequence[TrainSample], learning_rate: float) -> tuple[Network, float]:
    """One pass over ``samples`` in the given order; returns the copy and the epoch MSE."""
    if len(samples) == 0:
        raise ValueError("train_epoch needs at least one sample")
    X, Y = _stack(net, samples)
    new, history = train_epochs(net, X, Y, learning_rate, 1)
    return new, float(history[0])


def serialize(net: Network) -> str:
    lines = [MAGIC, str(net.topology)]
    for k, (W, b) in enumerate(zip(net.weights, net.biases), start=1):
        lines.append(f"layer {k}")
        for j in range(W.shape[1]):
            lines.append(" ".join(repr(float(v)) for v in (*W[:, j], b[j])))
    return "\n".join(lines) + "\n"


def _number(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ModelParseError(lineno, f"not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise ModelParseError(lineno, f"non-finite value {tok!r}")
    return v


def deserialize(text: str) -> Network:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != MAGIC:
        raise ModelParseError(1, f"expected header {MAGIC!r}")
    if len(lines) < 2:
        raise ModelParseError(2, "missing topology line")
    try:
        topology = Topology.parse(lines[1])
    except ShapeError as exc:
        raise ModelParseError(2, str(exc)) from None
    sizes = topology.layer_sizes
    pos = 2
    weights, biases = [], []
    for k, (fan, m) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
        if pos >= len(lines):
            raise ModelParseError(pos + 1, f"missing 'layer {k}'")
        if lines[pos].strip() != f"layer {k}":
            raise ModelParseError(pos + 1, f"expected 'layer {k}', got {lines[pos]!r}")
        pos += 1
        W = np.empty((fan, m))
        b = np.empty(m)
        for j in range(m):
            if pos >= len(lines):
                raise ModelParseError(pos + 1, f"layer {k}: missing unit {j + 1} of {m}")
            toks = lines[pos].split()
            if len(toks) != fan + 1:
                raise ModelParseError(pos + 1, f"layer {k} unit {j + 1}: expected {fan + 1} values, got {len(toks)}")
            vals = [_number(t, pos + 1) for t in toks]
            W[:, j] = vals[:-1]
            b[j] = vals[-1]
            pos += 1
        weights.append(W)
        biases.append(b)
    if pos < len(lines):
        raise ModelParseError(pos + 1, "trailing content after last layer")
    return Network(topology, tuple(weights), tuple(biases))
