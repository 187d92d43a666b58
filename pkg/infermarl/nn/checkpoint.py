"""
Checkpoint codecs for ``NetParams``.

Binary layout (version 1, all integers and floats little-endian)::

    offset  size             field
    0       4                magic b"IMLP"
    4       2   uint16       format version (1)
    6       1   uint8        number of layers L
    7       1   uint8        output activation (0 = linear, 1 = tanh)
    8       8   uint64       Adam step counter t
    16      8*L uint32 pairs (fan_in, fan_out) per layer
    ...     float64 arrays, per layer in order:
            W (fan_in*fan_out, row-major), b (fan_out),
            Adam m_W, v_W, m_b, v_b (same shapes)

The JSON codec stores the same fields; Python float repr round-trips float64 exactly.
"""
import json
import struct
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ..exceptions import CheckpointError
from .mlp import OUTPUT_ACTIVATIONS, AdamState, NetParams

MAGIC = b"IMLP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBBQ")
_SHAPE = struct.Struct("<II")


def to_bytes(net: NetParams) -> bytes:
    adam = net.adam
    parts = [
        _HEADER.pack(MAGIC, FORMAT_VERSION, len(net.weights), OUTPUT_ACTIVATIONS.index(net.output_activation), adam.t)
    ]
    parts.extend(_SHAPE.pack(*w.shape) for w in net.weights)
    for k in range(len(net.weights)):
        for arr in (net.weights[k], net.biases[k], adam.m_weights[k], adam.v_weights[k], adam.m_biases[k], adam.v_biases[k]):
            parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def from_bytes(data: bytes) -> NetParams:
    if len(data) < _HEADER.size:
        raise CheckpointError("truncated header")
    magic, version, n_layers, act_code, t = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if act_code >= len(OUTPUT_ACTIVATIONS):
        raise CheckpointError(f"unknown activation code {act_code}")
    offset = _HEADER.size
    shapes = []
    for _ in range(n_layers):
        shapes.append(_SHAPE.unpack_from(data, offset))
        offset += _SHAPE.size

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointError("truncated parameter block")
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(float).reshape(shape)
        offset = end
        return arr

    weights, biases = [], []
    m_w, v_w, m_b, v_b = [], [], [], []
    for fan_in, fan_out in shapes:
        weights.append(take((fan_in, fan_out)))
        biases.append(take((fan_out,)))
        m_w.append(take((fan_in, fan_out)))
        v_w.append(take((fan_in, fan_out)))
        m_b.append(take((fan_out,)))
        v_b.append(take((fan_out,)))
    if offset != len(data):
        raise CheckpointError(f"{len(data) - offset} trailing bytes")
    return NetParams(weights, biases, OUTPUT_ACTIVATIONS[act_code], AdamState(m_w, v_w, m_b, v_b, t))


def to_dict(net: NetParams) -> Dict[str, Any]:
    adam = net.adam
    return {
        "format": "infermarl-mlp",
        "version": FORMAT_VERSION,
        "output_activation": net.output_activation,
        "layers": [
            {"shape": list(w.shape), "weights": w.ravel().tolist(), "bias": b.tolist()}
            for w, b in zip(net.weights, net.biases)
        ],
        "adam": {
            "t": adam.t,
            "m_weights": [a.ravel().tolist() for a in adam.m_weights],
            "v_weights": [a.ravel().tolist() for a in adam.v_weights],
            "m_biases": [a.tolist() for a in adam.m_biases],
            "v_biases": [a.tolist() for a in adam.v_biases],
        },
    }


def from_dict(payload: Dict[str, Any]) -> NetParams:
    if payload.get("format") != "infermarl-mlp":
        raise CheckpointError("not an infermarl network checkpoint")
    if payload.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('version')}")
    try:
        shapes = [tuple(layer["shape"]) for layer in payload["layers"]]
        weights = [np.array(layer["weights"], dtype=float).reshape(s) for layer, s in zip(payload["layers"], shapes)]
        biases = [np.array(layer["bias"], dtype=float) for layer in payload["layers"]]
        adam = payload["adam"]
        state = AdamState(
            m_weights=[np.array(a, dtype=float).reshape(s) for a, s in zip(adam["m_weights"], shapes)],
            v_weights=[np.array(a, dtype=float).reshape(s) for a, s in zip(adam["v_weights"], shapes)],
            m_biases=[np.array(a, dtype=float) for a in adam["m_biases"]],
            v_biases=[np.array(a, dtype=float) for a in adam["v_biases"]],
            t=int(adam["t"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from exc
    return NetParams(weights, biases, payload["output_activation"], state)


def save_bundle(path: Union[str, Path], nets: Dict[str, NetParams]) -> None:
    """Write several named networks to one JSON checkpoint file"""
    payload = {"format": "infermarl-bundle", "version": FORMAT_VERSION, "nets": {k: to_dict(v) for k, v in nets.items()}}
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_bundle(path: Union[str, Path]) -> Dict[str, NetParams]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "infermarl-bundle":
        raise CheckpointError(f"{path} is not an infermarl checkpoint bundle")
    return {name: from_dict(net) for name, net in payload["nets"].items()}
