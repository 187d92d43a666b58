import hashlib
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ContractViolation

OUTPUT_ACTIVATIONS = ("linear", "tanh")


@dataclass
class AdamState:
    """First/second moment estimates for every weight and bias array plus the step counter"""

    m_weights: List[np.ndarray]
    v_weights: List[np.ndarray]
    m_biases: List[np.ndarray]
    v_biases: List[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(w) for w in weights],
            v_weights=[np.zeros_like(w) for w in weights],
            m_biases=[np.zeros_like(b) for b in biases],
            v_biases=[np.zeros_like(b) for b in biases],
        )

    def copy(self) -> "AdamState":
        return AdamState(
            m_weights=[a.copy() for a in self.m_weights],
            v_weights=[a.copy() for a in self.v_weights],
            m_biases=[a.copy() for a in self.m_biases],
            v_biases=[a.copy() for a in self.v_biases],
            t=self.t,
        )


@dataclass
class NetParams:
    """
    Dense feed-forward network. Hidden layers use ReLU, the output layer is linear or tanh.

    Weights are stored as (fan_in, fan_out) so a batch ``X`` of shape (B, fan_in) maps to
    ``X @ W + b``.
    """

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    output_activation: str = "linear"
    adam: Optional[AdamState] = None
    version: int = 0
    rejected_steps: int = 0

    def __post_init__(self):
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ContractViolation(f"unknown output activation {self.output_activation!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ContractViolation("weights and biases must be non-empty and paired")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ContractViolation(f"layer {k}: weight {w.shape} and bias {b.shape} do not compose")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ContractViolation(
                    f"layer {k} expects {w.shape[0]} inputs, previous layer gives {self.weights[k - 1].shape[1]}"
                )
        if self.adam is None:
            self.adam = AdamState.zeros_like(self.weights, self.biases)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "NetParams":
        return NetParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            output_activation=self.output_activation,
            adam=self.adam.copy(),
        )

    def fingerprint(self) -> str:
        """SHA-256 over the raw parameter bytes; equal fingerprints mean bit-identical parameters"""
        digest = hashlib.sha256()
        for w, b in zip(self.weights, self.biases):
            digest.update(np.ascontiguousarray(w, dtype="<f8").tobytes())
            digest.update(np.ascontiguousarray(b, dtype="<f8").tobytes())
        return digest.hexdigest()


@dataclass
class Tape:
    """Activations cached by forward, consumed by backward"""

    net_id: int
    version: int
    inputs: np.ndarray
    pre_activations: List[np.ndarray]
    activations: List[np.ndarray]
    output: np.ndarray
    vector_input: bool


@dataclass
class Gradient:
    """Gradient of a scalar objective w.r.t. every parameter array, plus the input gradient"""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    inputs: Optional[np.ndarray] = None

    @classmethod
    def zeros_like(cls, net: NetParams) -> "Gradient":
        return cls([np.zeros_like(w) for w in net.weights], [np.zeros_like(b) for b in net.biases])

    def __add__(self, other: "Gradient") -> "Gradient":
        return Gradient(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
        )

    def scaled(self, factor: float) -> "Gradient":
        return Gradient([factor * w for w in self.weights], [factor * b for b in self.biases])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.weights + self.biases)

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])


def init(
    sizes: Sequence[int],
    rng: np.random.Generator,
    output_activation: str = "linear",
) -> NetParams:
    """
    Glorot-uniform weights, zero biases.

    Args:
        sizes: Layer widths including input and output, e.g. ``(14, 64, 64, 2)``
        rng: Seeded random stream
        output_activation: ``"linear"`` or ``"tanh"``
    """
    if len(sizes) < 2 or any(int(s) < 1 for s in sizes):
        raise ContractViolation(f"invalid layer sizes {tuple(sizes)}")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return NetParams(weights, biases, output_activation=output_activation)


def mlp_sizes(n_inputs: int, n_outputs: int, hidden_units: int = 64, hidden_layers: int = 2) -> Tuple[int, ...]:
    return (n_inputs,) + (hidden_units,) * hidden_layers + (n_outputs,)


def forward(net: NetParams, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
    """
    Evaluate the network on a vector (fan_in,) or a batch (B, fan_in).

    Returns the output with the matching leading shape and the tape backward needs.
    """
    x = np.asarray(x, dtype=float)
    vector_input = x.ndim == 1
    batch = x[None, :] if vector_input else x
    if batch.ndim != 2 or batch.shape[1] != net.n_inputs:
        raise ContractViolation(f"input shape {x.shape} does not match {net.n_inputs} network inputs")

    pre, post = [], [batch]
    a = batch
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        pre.append(z)
        if k < last:
            a = np.maximum(z, 0.0)
            post.append(a)
        elif net.output_activation == "tanh":
            a = np.tanh(z)
        else:
            a = z
    tape = Tape(id(net), net.version, batch, pre, post, a, vector_input)
    return (a[0] if vector_input else a), tape


def _check_tape(net: NetParams, tape: Tape) -> None:
    if tape.net_id != id(net) or tape.version != net.version:
        raise ContractViolation("stale tape: parameters changed since forward")


def backward(net: NetParams, tape: Tape, cotangent: np.ndarray) -> Gradient:
    """
    Reverse pass for ``sum(cotangent * output)``.

    Returns parameter gradients and the input gradient (same shape as the forward input).
    """
    _check_tape(net, tape)
    cot = np.asarray(cotangent, dtype=float)
    if tape.vector_input:
        cot = cot[None, :]
    if cot.shape != tape.output.shape:
        raise ContractViolation(f"cotangent shape {cot.shape} does not match output {tape.output.shape}")

    if net.output_activation == "tanh":
        delta = cot * (1.0 - tape.output ** 2)
    else:
        delta = cot
    n_layers = len(net.weights)
    grad_w: List[np.ndarray] = [None] * n_layers
    grad_b: List[np.ndarray] = [None] * n_layers
    for k in range(n_layers - 1, -1, -1):
        grad_w[k] = tape.activations[k].T @ delta
        grad_b[k] = delta.sum(axis=0)
        upstream = delta @ net.weights[k].T
        if k:
            delta = upstream * (tape.pre_activations[k - 1] > 0.0)
    inputs = upstream[0] if tape.vector_input else upstream
    return Gradient(grad_w, grad_b, inputs)


def _input_gradient_chain(net: NetParams, tape: Tape) -> Tuple[np.ndarray, List[np.ndarray]]:
    # c[k] is d(output)/d(pre-activation of layer k) for a scalar linear output
    if net.n_outputs != 1 or net.output_activation != "linear":
        raise ContractViolation("input-gradient backward needs a scalar linear-output network")
    n_layers = len(net.weights)
    batch = tape.inputs.shape[0]
    c: List[np.ndarray] = [None] * n_layers
    c[-1] = np.ones((batch, 1))
    for k in range(n_layers - 1, 0, -1):
        c[k - 1] = (c[k] @ net.weights[k].T) * (tape.pre_activations[k - 1] > 0.0)
    g = c[0] @ net.weights[0].T
    return g, c


def input_gradient(net: NetParams, tape: Tape) -> np.ndarray:
    """d(output)/d(input) per batch row for a scalar-output network"""
    _check_tape(net, tape)
    g, _ = _input_gradient_chain(net, tape)
    return g[0] if tape.vector_input else g


def input_gradient_backward(net: NetParams, tape: Tape, cotangent: np.ndarray) -> Gradient:
    """
    Parameter gradient of ``sum(cotangent * d(output)/d(input))``.

    ReLU activation patterns are locally constant, so biases receive zero gradient and each
    weight matrix enters the input gradient linearly.
    """
    _check_tape(net, tape)
    u = np.asarray(cotangent, dtype=float)
    if tape.vector_input:
        u = u[None, :]
    if u.shape != tape.inputs.shape:
        raise ContractViolation(f"cotangent shape {u.shape} does not match input {tape.inputs.shape}")
    _, c = _input_gradient_chain(net, tape)

    n_layers = len(net.weights)
    grad_w: List[np.ndarray] = [None] * n_layers
    h_bar = u
    for k in range(n_layers):
        grad_w[k] = h_bar.T @ c[k]
        c_bar = h_bar @ net.weights[k]
        if k < n_layers - 1:
            h_bar = c_bar * (tape.pre_activations[k] > 0.0)
    grad_b = [np.zeros_like(b) for b in net.biases]
    return Gradient(grad_w, grad_b)
