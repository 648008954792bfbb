"""The full graph classifier: a topological-image branch, a graph-convolution
branch, and a fused tensor-network head.

The topological branch runs a small CNN over the per-graph (K, Q, P, P)
persistence-image tensor, pools spatially (when Q > 1), and maps the result
through a tensor network to a (K, E, E) embedding. The graph branch stacks
three propagation blocks (powers of the normalized adjacency, a learned
linear map, ReLU, and a 2-layer MLP with batch norm), expands each block's
node embedding from D to D x D, maps the stacked (L, D, D) node tensor
through a tensor network, and mean-pools over nodes to a (L, E, E) graph
embedding. Both embeddings are concatenated, passed through a fusion tensor
network, and classified by a single linear layer.

Batches of graphs are packed into one block-diagonal system so a whole
batch runs through a fixed number of array operations.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .errors import CheckpointError, ConfigError
from .graphs import Graph, NormalizedAdjacency, normalized_adjacency
from .layers import MLP, Conv2d, Dropout, Linear, Module, global_pool
from .serialization import read_container, write_container
from .tensornet import Factorization, TensorNetwork


@dataclass(frozen=True)
class ModelConfig:
    num_classes: int
    in_features: int
    num_filtrations: int = 4          # K
    homology_dims: int = 2            # Q
    resolution: int = 20              # P
    hidden: int = 16                  # D, graph-branch node embedding width
    embed: int = 16                   # E, per-branch output side
    net_hidden: int = 16              # hidden units of each tensor network
    conv_channels: int = 8
    conv_layers: int = 3              # graph propagation blocks (L)
    tau: Tuple[int, ...] = (1, 2, 3)  # adjacency power per block
    factorization: Factorization = Factorization("cp", (8,))
    dropout: float = 0.5
    use_topo_branch: bool = True
    use_graph_branch: bool = True
    tensor_layers: bool = True        # False: plain dense affine instead

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError("num_classes must be >= 2")
        if not (self.use_topo_branch or self.use_graph_branch):
            raise ConfigError("at least one branch must be enabled")
        if len(self.tau) != self.conv_layers:
            raise ConfigError("one tau per graph propagation block is required")
        if any(t < 0 for t in self.tau):
            raise ConfigError("tau exponents must be >= 0")
        if self.homology_dims < 1:
            raise ConfigError("homology_dims must be >= 1")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["tau"] = list(self.tau)
        d["factorization"] = {"kind": self.factorization.kind,
                              "ranks": list(self.factorization.ranks)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["tau"] = tuple(d["tau"])
        f = d["factorization"]
        d["factorization"] = Factorization(f["kind"], tuple(f["ranks"]))
        return cls(**d)


class FlatAffine(Module):
    """Plain dense affine on the flattened input (the no-tensor-net ablation)."""

    def __init__(self, in_shape: Sequence[int], out_shape: Sequence[int],
                 rng: np.random.Generator):
        super().__init__()
        self.in_shape = tuple(in_shape)
        self.out_shape = tuple(out_shape)
        self.linear = Linear(int(np.prod(in_shape)), int(np.prod(out_shape)), rng)

    def __call__(self, x: Tensor) -> Tensor:
        batch = x.shape[0]
        out = self.linear(x.reshape(batch, -1))
        return out.reshape((batch,) + self.out_shape)


@dataclass
class PackedBatch:
    """A batch of graphs packed into one block-diagonal node system."""

    features: np.ndarray                 # (N_total, F)
    propagators: Dict[int, np.ndarray]   # tau -> (N_total, N_total) block matrix
    pool: np.ndarray                     # (B, N_total), rows sum to 1
    sizes: Tuple[int, ...]

    @property
    def num_graphs(self) -> int:
        return len(self.sizes)


def pack_graphs(
    graphs: Sequence[Graph],
    taus: Sequence[int],
    adjacencies: Optional[Sequence[NormalizedAdjacency]] = None,
) -> PackedBatch:
    """Assemble block-diagonal adjacency powers, packed features and the
    per-graph mean-pooling matrix for a batch."""
    if not graphs:
        raise ValueError("batch must contain at least one graph")
    for g in graphs:
        if g.node_count == 0:
            raise ValueError("graphs must have at least one node")
    if adjacencies is None:
        adjacencies = [normalized_adjacency(g) for g in graphs]
    sizes = tuple(g.node_count for g in graphs)
    total = sum(sizes)
    features = np.concatenate([g.node_features for g in graphs], axis=0)
    offsets = np.cumsum((0,) + sizes)
    propagators = {}
    for tau in sorted(set(int(t) for t in taus)):
        block = np.zeros((total, total))
        for adj, lo, hi in zip(adjacencies, offsets[:-1], offsets[1:]):
            block[lo:hi, lo:hi] = adj.power(tau)
        propagators[tau] = block
    pool = np.zeros((len(graphs), total))
    for i, (lo, hi, n) in enumerate(zip(offsets[:-1], offsets[1:], sizes)):
        pool[i, lo:hi] = 1.0 / n
    return PackedBatch(features=features, propagators=propagators,
                       pool=pool, sizes=sizes)


class GraphClassifier(Module):
    """Two-branch classifier over (graph, persistence-image tensor) pairs."""

    def __init__(self, config: ModelConfig, seed: int = 0):
        super().__init__()
        self.config = config
        rng = np.random.default_rng(seed)
        self._dropout_rng = np.random.default_rng([seed, 0xD0])
        c = config

        def make_net(in_shape, out_shape):
            if c.tensor_layers:
                return TensorNetwork(in_shape, [(c.net_hidden,), out_shape],
                                     factorization=c.factorization, rng=rng)
            return FlatAffine(in_shape, out_shape, rng)

        fusion_lead = 0
        if c.use_topo_branch:
            self.conv1 = Conv2d(c.homology_dims, c.conv_channels, 3, rng, padding=1)
            self.conv2 = Conv2d(c.conv_channels, c.conv_channels, 3, rng, padding=1)
            if c.homology_dims > 1:
                topo_in = (c.num_filtrations, c.conv_channels)
            else:
                topo_in = (c.num_filtrations, c.conv_channels, c.resolution, c.resolution)
            self.topo_net = make_net(topo_in, (c.num_filtrations, c.embed, c.embed))
            fusion_lead += c.num_filtrations
        if c.use_graph_branch:
            self.thetas = [
                Parameter(rng.standard_normal(
                    (c.in_features if i == 0 else c.hidden, c.hidden))
                    * np.sqrt(2.0 / (c.in_features if i == 0 else c.hidden)))
                for i in range(c.conv_layers)]
            self.mlps = [MLP(c.hidden, c.hidden, c.hidden, rng)
                         for _ in range(c.conv_layers)]
            self.expansions = [Linear(c.hidden, c.hidden * c.hidden, rng)
                               for _ in range(c.conv_layers)]
            self.graph_net = make_net((c.conv_layers, c.hidden, c.hidden),
                                      (c.conv_layers, c.embed, c.embed))
            fusion_lead += c.conv_layers
        self.fusion_net = make_net((fusion_lead, c.embed, c.embed), (c.embed, c.embed))
        self.dropout = Dropout(c.dropout, self._dropout_rng)
        self.classifier = Linear(c.embed * c.embed, c.num_classes, rng)

    # -- branches ---------------------------------------------------------

    def topo_forward(self, pit: np.ndarray) -> Tensor:
        """(B, K, Q, P, P) image tensors -> (B, K, E, E) embeddings."""
        c = self.config
        pit = np.asarray(pit, dtype=np.float64)
        if pit.ndim == 4:
            pit = pit[None]
        b, k, q, p1, p2 = pit.shape
        if (k, q, p1, p2) != (c.num_filtrations, c.homology_dims,
                              c.resolution, c.resolution):
            raise ValueError(
                f"image tensor shaped {pit.shape[1:]}, model expects "
                f"{(c.num_filtrations, c.homology_dims, c.resolution, c.resolution)}")
        x = Tensor(pit).reshape(b * k, q, p1, p2)
        h = ad.relu(self.conv1(x))
        h = self.conv2(h)
        if q > 1:
            h = global_pool(h, "mean", axes=(2, 3))  # (B*K, channels)
            h = h.reshape(b, k, c.conv_channels)
        else:
            h = h.reshape(b, k, c.conv_channels, p1, p2)
        return self.topo_net(h)

    def graph_forward(self, packed: PackedBatch) -> Tensor:
        """Packed batch -> (B, L, E, E) pooled graph embeddings."""
        c = self.config
        s = Tensor(packed.features)
        if s.shape[1] != c.in_features:
            raise ValueError(
                f"features have {s.shape[1]} columns, model expects {c.in_features}")
        block_embeddings = []
        for i in range(c.conv_layers):
            propagator = Tensor(packed.propagators[c.tau[i]])
            z = ad.einsum("NM,MD->ND", propagator, s @ self.thetas[i])
            s = self.mlps[i](ad.relu(z))
            expanded = self.expansions[i](s)  # (N_total, D*D)
            block_embeddings.append(
                expanded.reshape(expanded.shape[0], c.hidden, c.hidden))
        stacked = ad.stack(block_embeddings, axis=1)  # (N_total, L, D, D)
        per_node = self.graph_net(stacked)            # (N_total, L, E, E)
        pooled = ad.einsum("BN,NLEF->BLEF", Tensor(packed.pool), per_node)
        return pooled

    def classify(self, topo_embed: Optional[Tensor],
                 graph_embed: Optional[Tensor]) -> Tensor:
        """Fuse branch embeddings (B, *, E, E) into (B, C) logits."""
        parts = [t for t in (topo_embed, graph_embed) if t is not None]
        if not parts:
            raise ValueError("at least one branch embedding is required")
        for t in parts:
            if t.shape[-2:] != (self.config.embed, self.config.embed):
                raise ConfigError(
                    f"branch embedding has trailing shape {t.shape[-2:]}, "
                    f"expected {(self.config.embed, self.config.embed)}")
        fused_in = parts[0] if len(parts) == 1 else ad.concat(parts, axis=1)
        fused = self.fusion_net(fused_in)
        flat = fused.reshape(fused.shape[0], -1)
        flat = self.dropout(flat)
        return self.classifier(flat)

    def forward(self, pit: Optional[np.ndarray],
                packed: Optional[PackedBatch]) -> Tensor:
        c = self.config
        topo = self.topo_forward(pit) if c.use_topo_branch else None
        graph = self.graph_forward(packed) if c.use_graph_branch else None
        return self.classify(topo, graph)

    __call__ = forward

    # -- single-graph conveniences -----------------------------------------

    def topo_forward_single(self, pit: np.ndarray) -> Tensor:
        """A single (K, Q, P, P) tensor -> (K, E, E)."""
        out = self.topo_forward(np.asarray(pit)[None])
        return out.reshape(out.shape[1:])

    def graph_forward_single(self, graph: Graph) -> Tensor:
        """A single graph -> (L, E, E)."""
        packed = pack_graphs([graph], self.config.tau)
        out = self.graph_forward(packed)
        return out.reshape(out.shape[1:])

    def predict_logits(self, pit: Optional[np.ndarray],
                       packed: Optional[PackedBatch]) -> np.ndarray:
        was_training = self.training
        self.eval()
        try:
            return self.forward(pit, packed).data.copy()
        finally:
            self.train(was_training)


MODEL_MAGIC = b"TTCK"


def save_model(model: GraphClassifier, path) -> None:
    arrays = [(name, p.data) for name, p in model.named_parameters()]
    header = {"config": model.config.to_dict()}
    write_container(path, MODEL_MAGIC, header, arrays)


def load_model(path, config: Optional[ModelConfig] = None,
               seed: int = 0) -> GraphClassifier:
    """Rebuild a model from a checkpoint; a provided config must match the
    stored one exactly, otherwise loading fails loudly."""
    header, arrays = read_container(path, MODEL_MAGIC)
    stored = ModelConfig.from_dict(header["config"])
    if config is not None and config != stored:
        raise CheckpointError(
            f"checkpoint config {stored} does not match requested config {config}")
    model = GraphClassifier(stored, seed=seed)
    params = dict(model.named_parameters())
    if set(params) != set(arrays):
        raise CheckpointError("checkpoint parameter names do not match the model")
    for name, arr in arrays.items():
        if params[name].data.shape != arr.shape:
            raise CheckpointError(f"shape mismatch for parameter {name}")
        params[name].data = arr
    return model
