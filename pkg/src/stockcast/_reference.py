"""Pure-Python twin of the compiled SGD kernel.

Every reduction is accumulated in the same order as ``_kernels.pyx`` and the
exponential goes through ``math.exp`` (the platform libm), so on a given host
this module and the extension yield bit-identical parameters.
"""

from __future__ import annotations

import math

import numpy as np

ONE_MINUS = 1.0 - 2.0**-53
TINY = 2.2250738585072014e-308


def sigmoid(x: float) -> float:
    if x >= 0.0:
        s = 1.0 / (1.0 + math.exp(-x))
    else:
        e = math.exp(x)
        s = e / (1.0 + e)
    if s > ONE_MINUS:
        return ONE_MINUS
    if s < TINY:
        return TINY
    return s


def sigmoid_vec(z: np.ndarray) -> np.ndarray:
    return np.array([sigmoid(v) for v in z.tolist()], dtype=np.float64)


def layer_views(params: np.ndarray, sizes) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat parameter vector into (W, b) views, W shaped (fan_in, units)."""
    views = []
    off = 0
    for fan, m in zip(sizes[:-1], sizes[1:]):
        W = params[off:off + fan * m].reshape(fan, m)
        off += fan * m
        b = params[off:off + m]
        off += m
        views.append((W, b))
    if off != params.shape[0]:
        raise ValueError(f"expected {off} parameters, got {params.shape[0]}")
    return views


def forward(layers, x: np.ndarray) -> list[np.ndarray]:
    acts = [np.asarray(x, dtype=np.float64)]
    for W, b in layers:
        a = acts[-1]
        z = b.copy()
        for i in range(W.shape[0]):
            z += a[i] * W[i]
        acts.append(sigmoid_vec(z))
    return acts


def backprop(layers, x: np.ndarray, y: np.ndarray):
    """Gradients of 0.5*||out - y||^2 without touching the parameters.

    Returns (activations, [(dW, db), ...], squared_error).
    """
    acts = forward(layers, x)
    out = acts[-1]
    diff = out - y
    se = 0.0
    for v in diff.tolist():
        se += v * v
    d = diff * out * (1.0 - out)
    grads = [None] * len(layers)
    for l in range(len(layers) - 1, -1, -1):
        W, _ = layers[l]
        a = acts[l]
        grads[l] = (np.outer(a, d), d.copy())
        if l > 0:
            acc = np.zeros(W.shape[0])
            for j in range(W.shape[1]):
                acc += W[:, j] * d[j]
            d = acc * a * (1.0 - a)
    return acts, grads, se


def sgd_epochs(params, sizes, X, Y, rate, epochs, mse_out) -> int:
    """Same contract as ``_kernels.sgd_epochs``."""
    params = np.asarray(params)
    layers = layer_views(params, list(sizes))
    n = X.shape[0]
    if n == 0 or epochs <= 0:
        return 0
    for ep in range(epochs):
        total = 0.0
        for s in range(n):
            _, grads, se = backprop(layers, X[s], Y[s])
            if not math.isfinite(se):
                return ep
            total += se
            for (W, b), (dW, db) in zip(layers, grads):
                W -= rate * dW
                b -= rate * db
        mse_out[ep] = total / n
        if not math.isfinite(mse_out[ep]):
            return ep
    return epochs
