"""Experiment harness: configuration, cross-validation, ablation and
decomposition sweeps, the synthetic low-rank experiment, and report files.

Everything is seeded and deterministic: the same config yields identical
fold splits, identical image tensors, and identical metrics, so the
results CSV is byte-reproducible.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import autodiff as ad
from .errors import ConfigError, ContractError, StratificationError
from .filtrations import (DEFAULT_FILTRATIONS, FiltrationKind,
                          build_lower_star_complex, compute_vertex_filtration)
from .graphs import Dataset, Graph, load_tu_dataset, normalized_adjacency
from .imaging import ImageParams, assemble_image_tensor, diagram_to_image
from .layers import Adam
from .model import GraphClassifier, ModelConfig, PackedBatch, pack_graphs
from .persistence import cap_essential, persistence_reduction
from .tensornet import Factorization, TensorNetwork

ALLOWED_LEARNING_RATES = (0.001, 0.01, 0.05, 0.1)
ALLOWED_NET_HIDDEN = (4, 16, 32)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a cross-validation experiment, with range validation."""

    dataset: str = "MUTAG"
    data_dir: str = "data"
    seed: int = 0
    folds: int = 10
    epochs: int = 100
    batches_per_epoch: int = 50
    batch_size: int = 16
    lr: float = 0.01
    hidden: int = 16
    embed: int = 16
    net_hidden: int = 16
    resolution: int = 20
    filtrations: Tuple[str, ...] = tuple(k.value for k in DEFAULT_FILTRATIONS)
    homology_dims: int = 2
    tau: Tuple[int, ...] = (1, 2, 3)
    decomp: str = "cp"
    rank: Tuple[int, ...] = (8,)
    dropout: float = 0.5
    use_topo_branch: bool = True
    use_graph_branch: bool = True
    tensor_layers: bool = True
    out_dir: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "filtrations",
                           tuple(FiltrationKind(k).value for k in self.filtrations))
        object.__setattr__(self, "tau", tuple(int(t) for t in self.tau))
        object.__setattr__(self, "rank", tuple(int(r) for r in self.rank))
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not 1 <= self.epochs <= 500:
            raise ConfigError("epochs must be in [1, 500]")
        if self.batches_per_epoch < 1:
            raise ConfigError("batches_per_epoch must be >= 1")
        if not 8 <= self.batch_size <= 128:
            raise ConfigError("batch_size must be in [8, 128]")
        if self.lr not in ALLOWED_LEARNING_RATES:
            raise ConfigError(f"lr must be one of {ALLOWED_LEARNING_RATES}")
        if not 16 <= self.hidden <= 128:
            raise ConfigError("hidden must be in [16, 128]")
        if not 16 <= self.embed <= 128:
            raise ConfigError("embed must be in [16, 128]")
        if self.net_hidden not in ALLOWED_NET_HIDDEN:
            raise ConfigError(f"net_hidden must be one of {ALLOWED_NET_HIDDEN}")
        if not 20 <= self.resolution <= 50:
            raise ConfigError("resolution must be in [20, 50]")
        if not self.filtrations:
            raise ConfigError("at least one filtration is required")
        if len(set(self.filtrations)) != len(self.filtrations):
            raise ConfigError("filtrations must be distinct")
        if self.homology_dims not in (1, 2):
            raise ConfigError("homology_dims must be 1 or 2")
        if self.decomp not in ("dense", "cp", "tucker", "tt"):
            raise ConfigError("decomp must be one of dense|cp|tucker|tt")
        if any(r < 1 for r in self.rank):
            raise ConfigError("ranks must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if not (self.use_topo_branch or self.use_graph_branch):
            raise ConfigError("at least one branch must be enabled")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["filtrations"] = list(self.filtrations)
        d["tau"] = list(self.tau)
        d["rank"] = list(self.rank)
        return d

    def config_hash(self) -> str:
        # identifies the experiment: file locations do not participate
        payload = self.to_dict()
        payload.pop("out_dir")
        payload.pop("data_dir")
        payload = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def factorization(self) -> Factorization:
        if self.decomp == "dense":
            return Factorization("dense")
        if self.decomp == "cp":
            return Factorization("cp", self.rank[:1])
        return Factorization(self.decomp, self.rank)

    def model_config(self, dataset: Dataset, in_features: int) -> ModelConfig:
        return ModelConfig(
            num_classes=dataset.num_classes,
            in_features=in_features,
            num_filtrations=len(self.filtrations),
            homology_dims=self.homology_dims,
            resolution=self.resolution,
            hidden=self.hidden,
            embed=self.embed,
            net_hidden=self.net_hidden,
            conv_layers=len(self.tau),
            tau=self.tau,
            factorization=self.factorization(),
            dropout=self.dropout,
            use_topo_branch=self.use_topo_branch,
            use_graph_branch=self.use_graph_branch,
            tensor_layers=self.tensor_layers,
        )


@dataclass
class FoldResult:
    fold: int
    train_accuracy: List[float]     # per epoch
    val_accuracy: List[float]       # per epoch, on the held-out fold
    test_accuracy: float            # final epoch on the held-out fold
    epoch_seconds: List[float]

    def __post_init__(self):
        for series in (self.train_accuracy, self.val_accuracy, [self.test_accuracy]):
            for a in series:
                if not 0.0 <= a <= 1.0:
                    raise ValueError(f"accuracy {a} outside [0, 1]")
        for t in self.epoch_seconds:
            if not t > 0:
                raise ValueError("per-epoch timings must be positive")


@dataclass
class RunResult:
    variant: str
    config_hash: str
    fold_membership_hash: str
    folds: List[FoldResult]

    def accuracies(self) -> np.ndarray:
        return np.array([f.test_accuracy for f in self.folds])

    def mean(self) -> float:
        return float(self.accuracies().mean())

    def std(self) -> float:
        return float(self.accuracies().std())  # population std over folds

    def mean_epoch_seconds(self) -> float:
        return float(np.mean([np.mean(f.epoch_seconds) for f in self.folds]))


# ---------------------------------------------------------------------------
# dataset plumbing
# ---------------------------------------------------------------------------

def stratified_kfold(labels: Sequence[int], folds: int, seed: int) -> List[np.ndarray]:
    """Deterministic stratified folds: per-class round robin over shuffled
    members, with the starting fold rotating across classes so fold sizes
    stay balanced. Raises if there are more folds than samples."""
    labels = np.asarray(labels, dtype=np.int64)
    if folds > len(labels):
        raise StratificationError(
            f"cannot make {folds} folds from {len(labels)} graphs")
    rng = np.random.default_rng([seed, 0xF0])
    assignments = [[] for _ in range(folds)]
    cursor = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(len(members))]
        for idx in members:
            assignments[cursor % folds].append(int(idx))
            cursor += 1
    return [np.array(sorted(fold), dtype=np.int64) for fold in assignments]


def fold_membership_hash(splits: Sequence[np.ndarray]) -> str:
    payload = json.dumps([s.tolist() for s in splits]).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def compute_all_diagrams(
    dataset: Dataset,
    kinds: Sequence[FiltrationKind],
    homology_dims: int,
) -> List[Dict[Tuple[int, int], object]]:
    """Capped persistence diagrams for every (graph, filtration, dimension).

    Essential classes are capped at the maximum filtration value of the
    graph under that filtration before imaging.
    """
    max_dim = 2 if homology_dims >= 2 else 1
    out = []
    for graph in dataset.graphs:
        per_graph: Dict[Tuple[int, int], object] = {}
        for k, kind in enumerate(kinds):
            filt = compute_vertex_filtration(graph, FiltrationKind(kind))
            complex_ = build_lower_star_complex(graph, filt, max_dim=max_dim)
            diagrams = persistence_reduction(complex_)
            cap = float(np.max(filt.values))
            for q in range(homology_dims):
                per_graph[(k, q)] = cap_essential(diagrams[q], cap)
        out.append(per_graph)
    return out


def image_params_for_fold(
    diagrams: Sequence[Dict[Tuple[int, int], object]],
    train_idx: Sequence[int],
    num_kinds: int,
    homology_dims: int,
    resolution: int,
) -> Dict[Tuple[int, int], ImageParams]:
    """Per-(filtration, dimension) image ranges frozen on the training fold:
    5th-95th percentile of the training diagrams' birth and persistence."""
    params = {}
    for k in range(num_kinds):
        for q in range(homology_dims):
            births, pers = [], []
            for i in train_idx:
                for b, d in diagrams[i][(k, q)].points:
                    births.append(b)
                    pers.append(d - b)
            if births:
                b_lo, b_hi = np.percentile(births, [5.0, 95.0])
                p_lo, p_hi = np.percentile(pers, [5.0, 95.0])
            else:
                b_lo, b_hi, p_lo, p_hi = 0.0, 1.0, 0.0, 1.0
            if p_hi <= 0.0:
                p_lo, p_hi = 0.0, 1.0
            params[(k, q)] = ImageParams.from_ranges(
                (b_lo, b_hi), (p_lo, p_hi), resolution=resolution)
    return params


def compute_image_tensors(
    diagrams: Sequence[Dict[Tuple[int, int], object]],
    params: Dict[Tuple[int, int], ImageParams],
    num_kinds: int,
    homology_dims: int,
) -> List[np.ndarray]:
    """Rasterize every graph's diagrams into a (K, Q, P, P) tensor."""
    tensors = []
    for per_graph in diagrams:
        grid = [[diagram_to_image(per_graph[(k, q)], params[(k, q)])
                 for q in range(homology_dims)]
                for k in range(num_kinds)]
        tensors.append(assemble_image_tensor(grid))
    return tensors


class _BatchSampler:
    """Shuffled sampling without replacement; reshuffles when exhausted."""

    def __init__(self, indices: Sequence[int], rng: np.random.Generator):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.rng = rng
        self.queue: List[int] = []

    def draw(self, count: int) -> np.ndarray:
        out = []
        while len(out) < count:
            if not self.queue:
                order = self.rng.permutation(len(self.indices))
                self.queue = list(self.indices[order])
            out.append(self.queue.pop())
        return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _evaluate(model: GraphClassifier, dataset: Dataset, images, adjacencies,
              indices: np.ndarray, tau, eval_batch: int = 64) -> float:
    if len(indices) == 0:
        return 0.0
    correct = 0
    for start in range(0, len(indices), eval_batch):
        chunk = indices[start:start + eval_batch]
        graphs = [dataset.graphs[i] for i in chunk]
        pit = np.stack([images[i] for i in chunk]) if model.config.use_topo_branch else None
        packed = (pack_graphs(graphs, tau, [adjacencies[i] for i in chunk])
                  if model.config.use_graph_branch else None)
        logits = model.predict_logits(pit, packed)
        pred = np.argmax(logits, axis=1)
        labels = np.array([g.graph_label for g in graphs])
        correct += int((pred == labels).sum())
    return correct / len(indices)


def _train_fold(
    cfg: RunConfig,
    dataset: Dataset,
    images,
    adjacencies,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    fold: int,
    variant_tag: int,
    model_config: ModelConfig,
) -> FoldResult:
    model_seed = cfg.seed * 100003 + fold * 131 + variant_tag
    model = GraphClassifier(model_config, seed=model_seed)
    optimizer = Adam(model.parameters(), lr=cfg.lr)
    sampler = _BatchSampler(train_idx, np.random.default_rng(
        [cfg.seed, fold, variant_tag, 0xB0]))

    train_curve, val_curve, times = [], [], []
    for _ in range(cfg.epochs):
        model.train()
        start = time.perf_counter()
        for _ in range(cfg.batches_per_epoch):
            batch_idx = sampler.draw(cfg.batch_size)
            graphs = [dataset.graphs[i] for i in batch_idx]
            labels = np.array([g.graph_label for g in graphs])
            pit = (np.stack([images[i] for i in batch_idx])
                   if cfg.use_topo_branch else None)
            packed = (pack_graphs(graphs, cfg.tau, [adjacencies[i] for i in batch_idx])
                      if cfg.use_graph_branch else None)
            optimizer.zero_grad()
            logits = model(pit, packed)
            loss = ad.softmax_cross_entropy(logits, labels)
            loss.backward()
            optimizer.step()
        times.append(max(time.perf_counter() - start, 1e-9))
        train_curve.append(_evaluate(model, dataset, images, adjacencies,
                                     train_idx, cfg.tau))
        val_curve.append(_evaluate(model, dataset, images, adjacencies,
                                   test_idx, cfg.tau))
    return FoldResult(fold=fold, train_accuracy=train_curve, val_accuracy=val_curve,
                      test_accuracy=val_curve[-1], epoch_seconds=times)


def _prepare(cfg: RunConfig, dataset: Optional[Dataset]):
    if dataset is None:
        dataset = load_tu_dataset(Path(cfg.data_dir) / cfg.dataset, cfg.dataset)
    kinds = [FiltrationKind(k) for k in cfg.filtrations]
    diagrams = compute_all_diagrams(dataset, kinds, cfg.homology_dims)
    adjacencies = []
    for g in dataset.graphs:
        adj = normalized_adjacency(g)
        for t in cfg.tau:
            adj.power(int(t))
        adjacencies.append(adj)
    return dataset, diagrams, adjacencies


def _run_variant(cfg: RunConfig, dataset, diagrams, adjacencies, splits,
                 variant: str, variant_tag: int) -> RunResult:
    in_features = dataset.graphs[0].num_features
    model_config = cfg.model_config(dataset, in_features)
    all_idx = np.arange(len(dataset.graphs))
    folds = []
    for fold, test_idx in enumerate(splits):
        train_idx = np.setdiff1d(all_idx, test_idx)
        params = image_params_for_fold(diagrams, train_idx, len(cfg.filtrations),
                                       cfg.homology_dims, cfg.resolution)
        images = compute_image_tensors(diagrams, params, len(cfg.filtrations),
                                       cfg.homology_dims)
        folds.append(_train_fold(cfg, dataset, images, adjacencies,
                                 train_idx, test_idx, fold, variant_tag,
                                 model_config))
    return RunResult(variant=variant, config_hash=cfg.config_hash(),
                     fold_membership_hash=fold_membership_hash(splits),
                     folds=folds)


def run_cross_validation(cfg: RunConfig, dataset: Optional[Dataset] = None) -> RunResult:
    """Stratified k-fold cross-validation of the full model."""
    dataset, diagrams, adjacencies = _prepare(cfg, dataset)
    splits = stratified_kfold(dataset.labels(), cfg.folds, cfg.seed)
    result = _run_variant(cfg, dataset, diagrams, adjacencies, splits, "full", 0)
    if cfg.out_dir:
        emit_report(results_rows([result]), results_summary(cfg, [result]), cfg.out_dir)
    return result


ABLATION_VARIANTS = (
    ("full", {}),
    ("without_topo_branch", {"use_topo_branch": False}),
    ("without_graph_branch", {"use_graph_branch": False}),
    ("without_tensor_layers", {"tensor_layers": False}),
)


def run_ablation(cfg: RunConfig, dataset: Optional[Dataset] = None) -> List[RunResult]:
    """Full model plus single-component removals, on shared folds and seeds."""
    dataset, diagrams, adjacencies = _prepare(cfg, dataset)
    splits = stratified_kfold(dataset.labels(), cfg.folds, cfg.seed)
    results = []
    for tag, (variant, overrides) in enumerate(ABLATION_VARIANTS):
        variant_cfg = dataclasses.replace(cfg, **overrides)
        results.append(_run_variant(variant_cfg, dataset, diagrams, adjacencies,
                                    splits, variant, tag))
    if cfg.out_dir:
        emit_report(results_rows(results), results_summary(cfg, results), cfg.out_dir)
    return results


def run_decomposition_sweep(cfg: RunConfig, dataset: Optional[Dataset] = None,
                            decomps: Sequence[str] = ("tucker", "tt", "cp")) -> List[RunResult]:
    """One run per weight factorization on shared folds, with timing columns."""
    dataset, diagrams, adjacencies = _prepare(cfg, dataset)
    splits = stratified_kfold(dataset.labels(), cfg.folds, cfg.seed)
    results = []
    for tag, decomp in enumerate(decomps):
        variant_cfg = dataclasses.replace(cfg, decomp=decomp)
        results.append(_run_variant(variant_cfg, dataset, diagrams, adjacencies,
                                    splits, decomp, tag))
    if cfg.out_dir:
        rows = results_rows(results, include_timing=True)
        emit_report(rows, results_summary(cfg, results), cfg.out_dir)
    return results


# ---------------------------------------------------------------------------
# synthetic low-rank experiment
# ---------------------------------------------------------------------------

def _smooth_target(cores: np.ndarray) -> np.ndarray:
    """A fixed smooth regression function of the latent core tensors."""
    rng = np.random.default_rng(2718)
    a = rng.standard_normal(cores.shape[1:])
    a /= np.linalg.norm(a)
    b = rng.standard_normal(cores.shape[1:])
    b /= np.linalg.norm(b)
    lin = np.tensordot(cores, b, axes=3)
    ridge = np.tensordot(cores, a, axes=3)
    return lin + 0.2 * np.sin(ridge)


def _train_regression(net: TensorNetwork, x: np.ndarray, y: np.ndarray,
                      epochs: int, lr: float = 0.01) -> float:
    optimizer = Adam(net.parameters(), lr=lr)
    inputs = ad.Tensor(x)
    targets = ad.Tensor(y)
    n = x.shape[0]
    final = 0.0
    for _ in range(epochs):
        optimizer.zero_grad()
        pred = net(inputs).reshape(n)
        loss = ((pred - targets) ** 2.0).mean()
        loss.backward()
        optimizer.step()
        final = loss.item()
    return final


def _regression_mse(net: TensorNetwork, x: np.ndarray, y: np.ndarray) -> float:
    pred = net(ad.Tensor(x)).data.reshape(-1)
    return float(np.mean((pred - y) ** 2))


def run_synthetic_lowrank_experiment(
    seed: int = 0,
    n_grid: Sequence[int] = (100, 200, 400),
    noise: float = 0.1,
    epochs: int = 800,
    width: int = 16,
    shape: Tuple[int, int, int] = (8, 8, 8),
    ranks: Tuple[int, int, int] = (2, 2, 2),
    n_test: int = 2000,
) -> dict:
    """Low-rank vs dense tensor networks on Tucker-structured inputs.

    Inputs are X_i = C_i x_1 U_1 x_2 U_2 x_3 U_3 + E with latent cores C_i of
    shape ``ranks``; targets are a fixed smooth function of C_i plus noise.
    Both networks share depth and width; only the weight parameterization
    differs. Reports held-out MSE per training-set size.
    """
    rng = np.random.default_rng([seed, 0x5E])
    loadings = []
    for d, r in zip(shape, ranks):
        q, _ = np.linalg.qr(rng.standard_normal((d, r)))
        loadings.append(q)

    def generate(n: int):
        cores = rng.standard_normal((n,) + tuple(ranks))
        x = np.einsum("nabc,ia,jb,kc->nijk", cores, *loadings)
        x = x + 0.5 * noise * rng.standard_normal(x.shape)
        y = _smooth_target(cores) + noise * rng.standard_normal(n)
        return x, y

    x_test, y_test = generate(n_test)
    report = {"seed": seed, "noise": noise, "epochs": epochs, "entries": []}
    for n in n_grid:
        x_train, y_train = generate(int(n))
        low = TensorNetwork(shape, [(width,), (1,)],
                            factorization=Factorization("tucker", (max(ranks),)),
                            rng=np.random.default_rng([seed, n, 1]))
        dense = TensorNetwork(shape, [(width,), (1,)],
                              factorization=Factorization("dense"),
                              rng=np.random.default_rng([seed, n, 2]))
        low_train = _train_regression(low, x_train, y_train, epochs)
        dense_train = _train_regression(dense, x_train, y_train, epochs)
        entry = {
            "n": int(n),
            "lowrank_train_mse": low_train,
            "dense_train_mse": dense_train,
            "lowrank_test_mse": _regression_mse(low, x_test, y_test),
            "dense_test_mse": _regression_mse(dense, x_test, y_test),
            "lowrank_params": low.num_parameters(),
            "dense_params": dense.num_parameters(),
        }
        report["entries"].append(entry)
    return report


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def results_rows(results: Sequence[RunResult], include_timing: bool = False) -> List[dict]:
    rows = []
    for result in results:
        for fr in result.folds:
            row = {
                "config_hash": result.config_hash,
                "variant": result.variant,
                "fold": fr.fold,
                "test_accuracy": fr.test_accuracy,
                "final_train_accuracy": fr.train_accuracy[-1],
                "epochs": len(fr.train_accuracy),
            }
            if include_timing:
                row["seconds_per_epoch"] = float(np.mean(fr.epoch_seconds))
            rows.append(row)
    return rows


def _git_revision() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True,
                             text=True, timeout=10, cwd=Path(__file__).parent)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def results_summary(cfg: RunConfig, results: Sequence[RunResult]) -> dict:
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "git_revision": _git_revision(),
        "seed": cfg.seed,
        "fold_membership_hash": results[0].fold_membership_hash if results else "",
        "variants": {
            r.variant: {
                "mean_accuracy": r.mean(),
                "std_accuracy": r.std(),
                "fold_accuracies": [f.test_accuracy for f in r.folds],
                "mean_epoch_seconds": r.mean_epoch_seconds(),
            }
            for r in results
        },
    }


def emit_report(rows: Sequence[dict], summary: dict, out_dir) -> Tuple[Path, Path]:
    """Write results.csv (one row per fold/variant) and summary.json.

    Deterministic: identical inputs produce byte-identical files.
    """
    if not rows:
        raise ContractError("emit_report requires at least one result row")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "summary.json"
    fieldnames = list(rows[0].keys())
    lines = [",".join(fieldnames)]
    for row in rows:
        if list(row.keys()) != fieldnames:
            raise ContractError("all result rows must share the same columns")
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row.values()))
    csv_path.write_text("\n".join(lines) + "\n")
    json_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return csv_path, json_path


# ---------------------------------------------------------------------------
# synthetic dataset (for demos, smoke tests and offline determinism checks)
# ---------------------------------------------------------------------------

def make_synthetic_dataset(n_graphs: int = 60, seed: int = 0,
                           name: str = "SYNTH") -> Dataset:
    """Two classes of small graphs with different cycle structure: class 0
    graphs are trees plus one chord, class 1 graphs are two fused cycles.
    Node features are one-hot degrees."""
    rng = np.random.default_rng([seed, 0x5D])
    graphs = []
    for i in range(n_graphs):
        label = i % 2
        n = int(rng.integers(8, 14))
        edges = [(j, j + 1) for j in range(n - 1)]
        if label == 0:
            u = int(rng.integers(0, n - 3))
            edges.append((u, u + 2))
        else:
            edges.append((0, n - 1))
            mid = n // 2
            edges.append((0, mid))
        edges = sorted(set(tuple(sorted(e)) for e in edges))
        edge_arr = np.array(edges, dtype=np.int64)
        deg = np.zeros(n, dtype=np.int64)
        for u, v in edge_arr:
            deg[u] += 1
            deg[v] += 1
        feats = np.zeros((n, 6))
        feats[np.arange(n), np.minimum(deg, 5)] = 1.0
        graphs.append(Graph(n, edge_arr, feats, label,
                            node_labels=np.minimum(deg, 5)))
    return Dataset(name=name, graphs=graphs, num_classes=2)
