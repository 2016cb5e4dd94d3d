"""Graph convolutional predictor of binary on/off values, in plain numpy.

Forward pass: embed variable and constraint features, then L rounds of
alternating half-convolutions. Each half-convolution aggregates the other
side's embeddings weighted by edge coefficients (plus the summed edge
weight as an extra input slot), applies an affine map and ReLU, and adds
the result onto the node state. A linear head on the masked variable
embeddings yields logits, squashed to probabilities.

Backpropagation is written out by hand and checked against central finite
differences in the test suite. Randomness comes from numpy's seeded
default generator (PCG64), so every run reproduces bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .graph import BipartiteGraph
from .milp import ValidationError


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 32
    layers: int = 2
    learning_rate: float = 1e-3
    epochs: int = 100
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.hidden < 1 or self.layers < 1 or self.epochs < 1:
            raise ValidationError("hidden, layers, and epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValidationError("learning rate must be >= 0")


@dataclass
class GcnnParams:
    hidden: int
    layers: int
    data: dict[str, np.ndarray] = field(default_factory=dict)

    def tensor_names(self) -> list[str]:
        names = ["var_embed_w", "var_embed_b", "con_embed_w", "con_embed_b"]
        for layer in range(self.layers):
            names += [
                f"conv{layer}_con_w",
                f"conv{layer}_con_b",
                f"conv{layer}_var_w",
                f"conv{layer}_var_b",
            ]
        names += ["head_w", "head_b"]
        return names

    def zeros_like(self) -> "GcnnParams":
        return GcnnParams(
            self.hidden,
            self.layers,
            {name: np.zeros_like(arr) for name, arr in self.data.items()},
        )

    def copy(self) -> "GcnnParams":
        return GcnnParams(
            self.hidden, self.layers, {k: v.copy() for k, v in self.data.items()}
        )


@dataclass(frozen=True)
class LabeledGraph:
    graph: BipartiteGraph
    labels: np.ndarray  # one 0/1 value per masked binary variable

    def __post_init__(self):
        if len(self.labels) != len(self.graph.binary_mask):
            raise ValidationError(
                f"{len(self.labels)} labels for {len(self.graph.binary_mask)} "
                "masked binaries"
            )


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


def init_params(cfg: TrainConfig, seed: int) -> GcnnParams:
    rng = np.random.default_rng(seed)
    H = cfg.hidden
    data: dict[str, np.ndarray] = {}
    data["var_embed_w"] = _glorot(rng, 4, H)
    data["var_embed_b"] = np.zeros(H)
    data["con_embed_w"] = _glorot(rng, 4, H)
    data["con_embed_b"] = np.zeros(H)
    for layer in range(cfg.layers):
        data[f"conv{layer}_con_w"] = _glorot(rng, H + 1, H)
        data[f"conv{layer}_con_b"] = np.zeros(H)
        data[f"conv{layer}_var_w"] = _glorot(rng, H + 1, H)
        data[f"conv{layer}_var_b"] = np.zeros(H)
    data["head_w"] = _glorot(rng, H, 1)
    data["head_b"] = np.zeros(1)
    return GcnnParams(H, cfg.layers, data)


def _edge_matrix(graph: BipartiteGraph) -> sp.csr_matrix:
    return sp.csr_matrix(
        (graph.edge_features, (graph.edge_con, graph.edge_var)),
        shape=(graph.n_cons, graph.n_vars),
    )


def _forward_cached(params: GcnnParams, graph: BipartiteGraph):
    p = params.data
    if graph.var_features.shape[1] != p["var_embed_w"].shape[0]:
        raise ValidationError("graph feature width does not match parameters")
    E = _edge_matrix(graph)
    Et = E.T.tocsr()
    s_con = np.asarray(E.sum(axis=1))  # (n_cons, 1) summed incident edge weights
    s_var = np.asarray(Et.sum(axis=1))

    h_v = graph.var_features @ p["var_embed_w"] + p["var_embed_b"]
    h_c = graph.con_features @ p["con_embed_w"] + p["con_embed_b"]
    cache = {"E": E, "Et": Et, "s_con": s_con, "s_var": s_var, "h_v0": h_v, "h_c0": h_c}
    for layer in range(params.layers):
        in_c = np.hstack([E @ h_v, s_con])
        z_c = in_c @ p[f"conv{layer}_con_w"] + p[f"conv{layer}_con_b"]
        h_c = h_c + np.maximum(z_c, 0.0)
        in_v = np.hstack([Et @ h_c, s_var])
        z_v = in_v @ p[f"conv{layer}_var_w"] + p[f"conv{layer}_var_b"]
        h_v = h_v + np.maximum(z_v, 0.0)
        cache[f"in_c{layer}"] = in_c
        cache[f"z_c{layer}"] = z_c
        cache[f"in_v{layer}"] = in_v
        cache[f"z_v{layer}"] = z_v
    h_masked = h_v[graph.binary_mask]
    logits = (h_masked @ p["head_w"] + p["head_b"]).ravel()
    probs = expit(logits)
    cache["h_v_final"] = h_v
    cache["h_masked"] = h_masked
    cache["probs"] = probs
    return probs, cache


def forward(params: GcnnParams, graph: BipartiteGraph) -> np.ndarray:
    """Per-masked-binary on-probabilities, each strictly inside (0, 1)."""
    probs, _ = _forward_cached(params, graph)
    return probs


CLAMP = 1e-12


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    if len(probs) != len(labels):
        raise ValidationError("probs and labels must have equal length")
    if len(probs) == 0:
        return 0.0
    p = np.clip(probs, CLAMP, 1.0 - CLAMP)
    y = np.asarray(labels, dtype=float)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def _loss_and_gradient(params: GcnnParams, lg: LabeledGraph) -> tuple[float, GcnnParams]:
    graph = lg.graph
    probs, cache = _forward_cached(params, graph)
    loss = bce_loss(probs, lg.labels)
    grad = params.zeros_like()
    g = grad.data
    p = params.data
    n = len(probs)
    if n == 0:
        return loss, grad

    y = np.asarray(lg.labels, dtype=float)
    clipped = np.clip(probs, CLAMP, 1.0 - CLAMP)
    d_p = np.where(
        (probs > CLAMP) & (probs < 1.0 - CLAMP),
        (-(y / clipped) + (1.0 - y) / (1.0 - clipped)) / n,
        0.0,
    )
    d_logits = (d_p * probs * (1.0 - probs))[:, None]

    g["head_w"][:] = cache["h_masked"].T @ d_logits
    g["head_b"][:] = d_logits.sum(axis=0)
    d_h_v = np.zeros_like(cache["h_v_final"])
    d_h_v[graph.binary_mask] = d_logits @ p["head_w"].T

    E, Et = cache["E"], cache["Et"]
    H = params.hidden
    d_h_c = np.zeros_like(cache["h_c0"])
    for layer in reversed(range(params.layers)):
        d_z_v = d_h_v * (cache[f"z_v{layer}"] > 0.0)
        g[f"conv{layer}_var_w"][:] = cache[f"in_v{layer}"].T @ d_z_v
        g[f"conv{layer}_var_b"][:] = d_z_v.sum(axis=0)
        d_agg_v = (d_z_v @ p[f"conv{layer}_var_w"].T)[:, :H]  # drop the edge-sum slot
        d_h_c += E @ d_agg_v

        d_z_c = d_h_c * (cache[f"z_c{layer}"] > 0.0)
        g[f"conv{layer}_con_w"][:] = cache[f"in_c{layer}"].T @ d_z_c
        g[f"conv{layer}_con_b"][:] = d_z_c.sum(axis=0)
        d_agg_c = (d_z_c @ p[f"conv{layer}_con_w"].T)[:, :H]
        d_h_v += Et @ d_agg_c

    g["var_embed_w"][:] = graph.var_features.T @ d_h_v
    g["var_embed_b"][:] = d_h_v.sum(axis=0)
    g["con_embed_w"][:] = graph.con_features.T @ d_h_c
    g["con_embed_b"][:] = d_h_c.sum(axis=0)
    return loss, grad


def gradient(params: GcnnParams, lg: LabeledGraph) -> GcnnParams:
    """Analytic gradient of the mean binary cross-entropy wrt every tensor."""
    _, grad = _loss_and_gradient(params, lg)
    return grad


def train(
    dataset: list[LabeledGraph], cfg: TrainConfig
) -> tuple[GcnnParams, list[float]]:
    """Seeded per-sample adaptive-moment training; returns per-epoch mean loss."""
    if not dataset:
        raise ValidationError("training dataset is empty")
    params = init_params(cfg, cfg.seed)
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    m = {k: np.zeros_like(v) for k, v in params.data.items()}
    v = {k: np.zeros_like(a) for k, a in params.data.items()}
    step = 0
    history: list[float] = []
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(len(dataset))
        losses = []
        for idx in order:
            loss, grad = _loss_and_gradient(params, dataset[idx])
            losses.append(loss)
            step += 1
            b1c = 1.0 - cfg.beta1**step
            b2c = 1.0 - cfg.beta2**step
            for key, arr in params.data.items():
                gk = grad.data[key]
                m[key] = cfg.beta1 * m[key] + (1.0 - cfg.beta1) * gk
                v[key] = cfg.beta2 * v[key] + (1.0 - cfg.beta2) * gk * gk
                arr -= cfg.learning_rate * (m[key] / b1c) / (
                    np.sqrt(v[key] / b2c) + cfg.eps
                )
        history.append(float(np.mean(losses)))
    return params, history


def write_params(params: GcnnParams) -> str:
    lines = [f"{params.hidden} {params.layers}"]
    for name in params.tensor_names():
        arr = np.atleast_2d(params.data[name])
        lines.append(f"{name} {arr.shape[0]} {arr.shape[1]}")
        for row in arr:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_params(text: str) -> GcnnParams:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty parameter file")
    hidden, layers = (int(tok) for tok in lines[0].split())
    params = GcnnParams(hidden, layers, {})
    pos = 1
    for name in params.tensor_names():
        if pos >= len(lines):
            raise ValidationError(f"missing tensor {name!r}")
        header = lines[pos].split()
        if len(header) != 3 or header[0] != name:
            raise ValidationError(f"expected tensor header for {name!r}")
        rows, cols = int(header[1]), int(header[2])
        block = np.array(
            [[float(x) for x in lines[pos + 1 + r].split()] for r in range(rows)]
        ).reshape(rows, cols)
        if name.endswith("_b"):
            block = block.ravel()
        params.data[name] = block
        pos += 1 + rows
    if pos != len(lines):
        raise ValidationError("trailing content after last tensor")
    return params


def write_loss_csv(history: list[float]) -> str:
    lines = ["epoch,mean_loss"]
    for epoch, loss in enumerate(history):
        lines.append(f"{epoch},{loss!r}")
    return "\n".join(lines) + "\n"
