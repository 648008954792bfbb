"""Command-line entry point.

Subcommands: ``train`` (cross-validation), ``ablation``, ``sweep``
(decomposition comparison), ``synthetic`` (low-rank vs dense regression),
and ``features`` (dump persistence-image tensors only). A JSON config file
can supply any flag; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import TopoTensorError
from .filtrations import FiltrationKind
from .graphs import load_tu_dataset
from .harness import (RunConfig, compute_all_diagrams, compute_image_tensors,
                      compute_vertex_filtration, image_params_for_fold,
                      run_ablation, run_cross_validation,
                      run_decomposition_sweep, run_synthetic_lowrank_experiment)
from .imaging import save_image_cache
from .persistence import dump_diagrams_csv


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, help="JSON config file; flags override it")
    parser.add_argument("--dataset", type=str)
    parser.add_argument("--data-dir", dest="data_dir", type=str)
    parser.add_argument("--decomp", choices=["dense", "cp", "tucker", "tt"])
    parser.add_argument("--rank", type=str, help="comma-separated rank(s)")
    parser.add_argument("--filtrations", type=str,
                        help="comma-separated subset of degree,betweenness,closeness,eigenvector")
    parser.add_argument("--pi-res", dest="resolution", type=int)
    parser.add_argument("--tau", type=str, help="comma-separated adjacency powers")
    parser.add_argument("--folds", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--batch", dest="batch_size", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--hidden", type=int)
    parser.add_argument("--embed", type=int)
    parser.add_argument("--net-hidden", dest="net_hidden", type=int)
    parser.add_argument("--homology-dims", dest="homology_dims", type=int)
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--batches-per-epoch", dest="batches_per_epoch", type=int)
    parser.add_argument("--no-topo-branch", dest="use_topo_branch",
                        action="store_false", default=None)
    parser.add_argument("--no-graph-branch", dest="use_graph_branch",
                        action="store_false", default=None)
    parser.add_argument("--no-tensor-layers", dest="tensor_layers",
                        action="store_false", default=None)
    parser.add_argument("--out", dest="out_dir", type=str)


_LIST_FIELDS = {"rank": int, "tau": int, "filtrations": str}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(json.load(fh))
    for key, value in vars(args).items():
        if key in ("config", "command", "func", "dump_diagrams", "n_grid", "noise"):
            continue
        if value is None:
            continue
        if key in _LIST_FIELDS and isinstance(value, str):
            cast = _LIST_FIELDS[key]
            value = tuple(cast(part.strip()) for part in value.split(",") if part.strip())
        values[key] = value
    for key in _LIST_FIELDS:
        if key in values and isinstance(values[key], list):
            values[key] = tuple(values[key])
    return RunConfig(**values)


def _print_result(result):
    print(f"[{result.variant}] mean accuracy {result.mean():.4f} "
          f"+/- {result.std():.4f} over {len(result.folds)} folds "
          f"({result.mean_epoch_seconds():.2f} s/epoch)")


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    result = run_cross_validation(cfg)
    _print_result(result)
    return 0


def _cmd_ablation(args) -> int:
    cfg = _config_from_args(args)
    for result in run_ablation(cfg):
        _print_result(result)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    for result in run_decomposition_sweep(cfg):
        _print_result(result)
    return 0


def _cmd_synthetic(args) -> int:
    n_grid = tuple(int(x) for x in args.n_grid.split(","))
    report = run_synthetic_lowrank_experiment(seed=args.seed or 0, n_grid=n_grid,
                                              noise=args.noise)
    for entry in report["entries"]:
        print(f"n={entry['n']:5d}  low-rank test MSE {entry['lowrank_test_mse']:.5f} "
              f"({entry['lowrank_params']} params)  dense test MSE "
              f"{entry['dense_test_mse']:.5f} ({entry['dense_params']} params)")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "synthetic.json").write_text(json.dumps(report, sort_keys=True, indent=2))
    return 0


def _cmd_features(args) -> int:
    cfg = _config_from_args(args)
    dataset = load_tu_dataset(Path(cfg.data_dir) / cfg.dataset, cfg.dataset)
    kinds = [FiltrationKind(k) for k in cfg.filtrations]
    diagrams = compute_all_diagrams(dataset, kinds, cfg.homology_dims)
    all_idx = np.arange(len(dataset.graphs))
    params = image_params_for_fold(diagrams, all_idx, len(kinds),
                                   cfg.homology_dims, cfg.resolution)
    images = compute_image_tensors(diagrams, params, len(kinds), cfg.homology_dims)
    out = Path(cfg.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    cache_path = out / f"{cfg.dataset}_images.npz"
    # one sidecar per dataset; per-slice params are hashed into the name
    save_image_cache(cache_path, {i: img for i, img in enumerate(images)},
                     params[(0, 0)])
    print(f"wrote {cache_path} ({len(images)} graphs)")
    if args.dump_diagrams:
        rows = []
        for i, per_graph in enumerate(diagrams):
            for (k, q), diagram in sorted(per_graph.items()):
                for b, d in diagram.points:
                    rows.append((i, kinds[k].value, q, b, d))
        dump_diagrams_csv(rows, out / "diagrams.csv")
        print(f"wrote {out / 'diagrams.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topotensor")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="k-fold cross-validation")
    _add_run_flags(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_abl = sub.add_parser("ablation", help="full model vs component removals")
    _add_run_flags(p_abl)
    p_abl.set_defaults(func=_cmd_ablation)

    p_sweep = sub.add_parser("sweep", help="compare weight factorizations")
    _add_run_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_syn = sub.add_parser("synthetic", help="low-rank vs dense regression")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--n-grid", dest="n_grid", type=str, default="100,200,400")
    p_syn.add_argument("--noise", type=float, default=0.1)
    p_syn.add_argument("--out", dest="out_dir", type=str)
    p_syn.set_defaults(func=_cmd_synthetic)

    p_feat = sub.add_parser("features", help="dump persistence-image tensors")
    _add_run_flags(p_feat)
    p_feat.add_argument("--dump-diagrams", action="store_true")
    p_feat.set_defaults(func=_cmd_features)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TopoTensorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
