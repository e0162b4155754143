"""Plain-numpy MLP with ReLU hidden layers and an Adam optimiser.

The network maps a state vector to one Q-value per action. Gradients are
computed by hand (reverse accumulation) and flow only through the output
unit of the action taken in each sample.
"""

from __future__ import annotations

import math

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class QNetwork:
    """Fully connected ReLU network with per-parameter Adam moments.

    Weights start Glorot-uniform in +-sqrt(6 / (fan_in + fan_out)), biases
    at zero. ``dtype`` trades precision for speed; training uses float32,
    numerical tests float64.
    """

    def __init__(
        self,
        layer_dims: tuple[int, ...],
        rng: np.random.Generator | int | None = None,
        dtype=np.float32,
    ):
        if len(layer_dims) < 2:
            raise ValueError("layer_dims needs at least input and output sizes")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        self.layer_dims = tuple(int(d) for d in layer_dims)
        self.dtype = np.dtype(dtype)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.layer_dims, self.layer_dims[1:]):
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(
                rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(self.dtype)
            )
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))
        self.m_w = [np.zeros_like(w) for w in self.weights]
        self.v_w = [np.zeros_like(w) for w in self.weights]
        self.m_b = [np.zeros_like(b) for b in self.biases]
        self.v_b = [np.zeros_like(b) for b in self.biases]
        self.adam_steps = 0

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Q-values for a single state or a batch of states."""
        x = np.asarray(x, dtype=self.dtype)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.input_dim:
            raise ValueError(
                f"input has {x.shape[1]} features, network expects {self.input_dim}"
            )
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                np.maximum(h, 0.0, out=h)
        return h[0] if single else h

    def q_values(self, features: np.ndarray) -> np.ndarray:
        return self.forward(features)

    def _forward_cached(self, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Forward pass keeping pre-activations for backprop."""
        pre: list[np.ndarray] = []
        acts: list[np.ndarray] = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            h = np.maximum(z, 0.0) if i != last else z
            acts.append(h)
        return pre, acts

    def loss_and_grads(
        self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray
    ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
        """Mean squared TD error on the taken actions, with its gradients.

        Only the output unit of each sample's action receives error signal;
        the other Q-values are unconstrained by the regression.
        """
        x = np.asarray(x, dtype=self.dtype)
        actions = np.asarray(actions)
        targets = np.asarray(targets, dtype=self.dtype)
        batch = x.shape[0]
        pre, acts = self._forward_cached(x)
        q = acts[-1]
        taken = q[np.arange(batch), actions]
        diff = taken - targets
        loss = float(np.mean(diff * diff))

        delta = np.zeros_like(q)
        delta[np.arange(batch), actions] = (2.0 / batch) * diff
        grads_w: list[np.ndarray] = [np.empty(0)] * len(self.weights)
        grads_b: list[np.ndarray] = [np.empty(0)] * len(self.biases)
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w[layer] = acts[layer].T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = delta @ self.weights[layer].T
                delta *= pre[layer - 1] > 0
        return loss, grads_w, grads_b

    def adam_step(self, grads_w, grads_b, lr: float) -> None:
        """One Adam update over all parameters."""
        self.adam_steps += 1
        corr1 = 1.0 - ADAM_BETA1**self.adam_steps
        corr2 = 1.0 - ADAM_BETA2**self.adam_steps
        for i in range(len(self.weights)):
            for param, grad, m, v in (
                (self.weights[i], grads_w[i], self.m_w[i], self.v_w[i]),
                (self.biases[i], grads_b[i], self.m_b[i], self.v_b[i]),
            ):
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * grad
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * grad * grad
                param -= lr * (m / corr1) / (np.sqrt(v / corr2) + ADAM_EPS)

    def copy_parameters_from(self, other: "QNetwork") -> None:
        """Adopt another network's weights; Adam moments are untouched."""
        if other.layer_dims != self.layer_dims:
            raise ValueError("parameter copy requires identical layer dims")
        for i in range(len(self.weights)):
            np.copyto(self.weights[i], other.weights[i])
            np.copyto(self.biases[i], other.biases[i])

    def clone(self) -> "QNetwork":
        twin = QNetwork(self.layer_dims, rng=0, dtype=self.dtype)
        twin.copy_parameters_from(self)
        return twin

    def parameters_finite(self) -> bool:
        return all(np.isfinite(w).all() for w in self.weights) and all(
            np.isfinite(b).all() for b in self.biases
        )

    def set_parameters(self, weights, biases) -> None:
        if len(weights) != len(self.weights):
            raise ValueError("layer count mismatch")
        for i, (w, b) in enumerate(zip(weights, biases)):
            w = np.asarray(w, dtype=self.dtype)
            b = np.asarray(b, dtype=self.dtype)
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ValueError("parameter shape mismatch")
            self.weights[i] = w.copy()
            self.biases[i] = b.copy()


def mlp_forward(net: QNetwork, x) -> np.ndarray:
    """Q-values of a single feature vector (contract-checked)."""
    x = np.asarray(x, dtype=net.dtype)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise ValueError(f"expected a vector of length {net.input_dim}")
    return net.forward(x)
