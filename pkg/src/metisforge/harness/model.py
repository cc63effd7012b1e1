"""Tiny feedforward models trained with plain mini-batch SGD.

Training is fully determined by the dataset and the ``TrainSpec``: the
initial weights and the per-epoch shuffle both come from ``rng_seed``.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

ACTIVATIONS = ("relu", "sigmoid", "tanh", "linear")
INITS = ("he_uniform", "zeros", "ones", "small_gaussian")
TASKS = ("classification", "regression")
N_CLASSES = 10

MAGIC = b"MFTM"
FORMAT_VERSION = 1


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainSpec:
    hidden_sizes: tuple = (32,)
    activations: tuple = ("relu",)
    epochs: int = 30
    learning_rate: float = 0.1
    batch_size: int = 20
    weight_init: tuple = "he_uniform"
    rng_seed: int = 0
    task: str = "classification"

    def __post_init__(self):
        hs = tuple(int(h) for h in self.hidden_sizes)
        acts = tuple(self.activations)
        inits = self.weight_init
        if isinstance(inits, str):
            inits = (inits,) * (len(hs) + 1)
        inits = tuple(inits)
        object.__setattr__(self, "hidden_sizes", hs)
        object.__setattr__(self, "activations", acts)
        object.__setattr__(self, "weight_init", inits)
        if any(h <= 0 for h in hs):
            raise ValueError("hidden sizes must be positive")
        if len(acts) != len(hs):
            raise ValueError("need one activation per hidden layer")
        if any(a not in ACTIVATIONS for a in acts):
            raise ValueError(f"activations must be in {ACTIVATIONS}")
        if len(inits) != len(hs) + 1 or any(i not in INITS for i in inits):
            raise ValueError(f"weight_init must name one of {INITS} per layer")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size <= 0:
            raise ValueError("epochs must be >= 0 and batch_size > 0")
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")

    @property
    def n_outputs(self) -> int:
        return N_CLASSES if self.task == "classification" else 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        d["activations"] = list(self.activations)
        d["weight_init"] = list(self.weight_init)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainSpec":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})

    def spec_hash(self) -> bytes:
        """Hash of everything except the seed."""
        d = self.to_dict()
        d.pop("rng_seed")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).digest()


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, a):
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _init_layer(scheme, fan_in, fan_out, rng):
    if scheme == "he_uniform":
        lim = np.sqrt(6.0 / fan_in)
        return rng.uniform(-lim, lim, (fan_in, fan_out))
    if scheme == "zeros":
        return np.zeros((fan_in, fan_out))
    if scheme == "ones":
        return np.ones((fan_in, fan_out))
    return rng.normal(0.0, 0.05, (fan_in, fan_out))


@dataclass
class TinyModel:
    spec: TrainSpec
    weights: list
    biases: list
    fingerprint: str = field(default="")

    def __post_init__(self):
        if not self.fingerprint:
            self.fingerprint = self.spec.spec_hash().hex()[:16] + f":{self.spec.rng_seed}"

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def forward(self, x) -> np.ndarray:
        a = np.atleast_2d(np.asarray(x, dtype=np.float64))
        for w, b, act in zip(self.weights[:-1], self.biases[:-1], self.spec.activations):
            a = _act(act, a @ w + b)
        out = a @ self.weights[-1] + self.biases[-1]
        return softmax(out) if self.spec.task == "classification" else out

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (*self.weights, *self.biases):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return h.hexdigest()


def init_model(spec: TrainSpec, input_dim: int, rng) -> TinyModel:
    sizes = [input_dim, *spec.hidden_sizes, spec.n_outputs]
    ws, bs = [], []
    for k in range(len(sizes) - 1):
        ws.append(_init_layer(spec.weight_init[k], sizes[k], sizes[k + 1], rng))
        bs.append(np.zeros(sizes[k + 1]))
    return TinyModel(spec, ws, bs)


def train(x, y, spec: TrainSpec) -> TinyModel:
    """Train a model on ``(x, y)``; labels for classification, angle pairs otherwise."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if len(x) == 0:
        raise ValueError("cannot train on an empty dataset")
    rng = np.random.default_rng(spec.rng_seed)
    model = init_model(spec, x.shape[1], rng)
    ws, bs = model.weights, model.biases
    n = len(x)
    classify = spec.task == "classification"
    if classify:
        onehot = np.zeros((n, N_CLASSES))
        onehot[np.arange(n), y.astype(int)] = 1.0
        target = onehot
    else:
        target = y.astype(np.float64)
    for epoch in range(spec.epochs):
        order = rng.permutation(n)
        for bi, start in enumerate(range(0, n, spec.batch_size)):
            idx = order[start:start + spec.batch_size]
            xb, tb = x[idx], target[idx]
            zs, acts = [], [xb]
            a = xb
            for w, b, act in zip(ws[:-1], bs[:-1], spec.activations):
                z = a @ w + b
                a = _act(act, z)
                zs.append(z)
                acts.append(a)
            out = a @ ws[-1] + bs[-1]
            m = len(idx)
            if classify:
                p = softmax(out)
                loss = -np.mean(np.log(np.clip(np.sum(p * tb, axis=1), 1e-300, None)))
                delta = (p - tb) / m
            else:
                diff = out - tb
                with np.errstate(over="ignore", invalid="ignore"):
                    loss = np.mean(np.sum(diff * diff, axis=1))
                delta = 2.0 * diff / m
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {bi}")
            grads_w, grads_b = [None] * len(ws), [None] * len(ws)
            for k in range(len(ws) - 1, -1, -1):
                grads_w[k] = acts[k].T @ delta
                grads_b[k] = delta.sum(axis=0)
                if k > 0:
                    delta = (delta @ ws[k].T) * _act_grad(spec.activations[k - 1], zs[k - 1], acts[k])
            for k in range(len(ws)):
                ws[k] -= spec.learning_rate * grads_w[k]
                bs[k] -= spec.learning_rate * grads_b[k]
    for arr in (*ws, *bs):
        if not np.all(np.isfinite(arr)):
            raise TrainingError("training produced non-finite weights")
    return model


# -- binary model files --------------------------------------------------------
#
# magic "MFTM" | u16 version | 32-byte spec hash | i64 seed | u32 len + spec JSON
# | u16 n_layers | per layer u32 rows, u32 cols | weights then bias, f8 LE, row-major


def save_model(model: TinyModel, path) -> None:
    spec_json = json.dumps(model.spec.to_dict(), sort_keys=True).encode()
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        model.spec.spec_hash(),
        struct.pack("<q", model.spec.rng_seed),
        struct.pack("<I", len(spec_json)),
        spec_json,
        struct.pack("<H", len(model.weights)),
    ]
    for w in model.weights:
        parts.append(struct.pack("<II", *w.shape))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_model(path) -> TinyModel:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a model file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format version {version}")
    spec_hash = data[6:38]
    (seed,) = struct.unpack_from("<q", data, 38)
    (slen,) = struct.unpack_from("<I", data, 46)
    spec = TrainSpec.from_dict(json.loads(data[50:50 + slen]))
    if spec.spec_hash() != spec_hash or spec.rng_seed != seed:
        raise ValueError(f"{path}: header does not match embedded spec")
    off = 50 + slen
    (n_layers,) = struct.unpack_from("<H", data, off)
    off += 2
    shapes = []
    for _ in range(n_layers):
        shapes.append(struct.unpack_from("<II", data, off))
        off += 8
    ws, bs = [], []
    for r, c in shapes:
        ws.append(np.frombuffer(data, "<f8", r * c, off).reshape(r, c).astype(np.float64))
        off += 8 * r * c
        bs.append(np.frombuffer(data, "<f8", c, off).astype(np.float64))
        off += 8 * c
    return TinyModel(spec, ws, bs)


def with_seed(spec: TrainSpec, seed: int) -> TrainSpec:
    return replace(spec, rng_seed=int(seed))
