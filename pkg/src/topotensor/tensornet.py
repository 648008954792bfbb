"""Deep ReLU tensor-network layers with low-rank factorized weights.

Each affine layer contracts a weight tensor, shaped (input modes + output
modes), against the input over all input modes and adds a bias. The weight
can be stored dense or in CP / Tucker / tensor-train factorized form; the
factorized forward pass contracts factor by factor and never materializes
the dense weight. The network alternates affine layers and ReLU, leaves the
final affine un-activated, and optionally truncates entrywise at a level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .errors import CheckpointError, ConfigError
from .layers import Module
from .serialization import read_container, write_container
from .tensors import TTFactors, mode_product

_DIM_LETTERS = "abcdefghijkl"
_RANK_LETTERS = "mnopqrstuvwx"
_BATCH = "Z"


@dataclass(frozen=True)
class Factorization:
    """Weight storage scheme for one affine layer.

    kind 'dense' ignores ranks; 'cp' uses a single integer rank; 'tucker'
    needs one rank per weight mode (input modes then output modes); 'tt'
    needs one bond rank per adjacent mode pair.
    """

    kind: str = "dense"
    ranks: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("dense", "cp", "tucker", "tt"):
            raise ConfigError(f"unknown factorization kind: {self.kind!r}")
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        if self.kind != "dense" and any(r < 1 for r in self.ranks):
            raise ConfigError("factorization ranks must be positive")
        if self.kind == "cp" and len(self.ranks) != 1:
            raise ConfigError("cp factorization takes exactly one rank")


def _init_std(prod_in: int, n_factors: int, n_paths: int) -> float:
    # Each dense-equivalent entry sums n_paths products of n_factors
    # independent factor entries; match He variance 2 / prod_in.
    target = 2.0 / prod_in
    return (target / n_paths) ** (1.0 / (2 * n_factors))


class TensorAffine(Module):
    """One affine map from input-mode extents to output-mode extents."""

    def __init__(self, in_shape: Sequence[int], out_shape: Sequence[int],
                 factorization: Factorization, rng: np.random.Generator):
        super().__init__()
        self.in_shape = tuple(int(d) for d in in_shape)
        self.out_shape = tuple(int(d) for d in out_shape)
        if not self.in_shape or not self.out_shape:
            raise ConfigError("affine layers need at least one input and one output mode")
        self.factorization = factorization
        modes = self.in_shape + self.out_shape
        n_modes = len(modes)
        if n_modes > len(_DIM_LETTERS):
            raise ConfigError(f"at most {len(_DIM_LETTERS)} weight modes supported")
        prod_in = int(np.prod(self.in_shape))
        kind = factorization.kind

        if kind == "dense":
            std = math.sqrt(2.0 / prod_in)
            self.weight = Parameter(rng.standard_normal(modes) * std)
        elif kind == "cp":
            rank = factorization.ranks[0]
            std = _init_std(prod_in, n_factors=n_modes, n_paths=rank)
            self.cp_factors = [Parameter(rng.standard_normal((d, rank)) * std)
                               for d in modes]
        elif kind == "tucker":
            ranks = factorization.ranks
            if len(ranks) == 1:
                # a single policy rank is clamped per mode
                ranks = tuple(min(ranks[0], d) for d in modes)
            if len(ranks) != n_modes:
                raise ConfigError(
                    f"tucker needs {n_modes} ranks (or one policy rank) for "
                    f"weight modes {modes}, got {len(factorization.ranks)}")
            for r, d in zip(ranks, modes):
                if r > d:
                    raise ConfigError(f"tucker rank {r} exceeds mode extent {d}")
            n_paths = int(np.prod(ranks))
            std = _init_std(prod_in, n_factors=n_modes + 1, n_paths=n_paths)
            self.core = Parameter(rng.standard_normal(ranks) * std)
            self.loadings = [Parameter(rng.standard_normal((d, r)) * std)
                             for d, r in zip(modes, ranks)]
        elif kind == "tt":
            bonds = factorization.ranks
            if len(bonds) == 1 and n_modes != 2:
                bonds = tuple(bonds[0] for _ in range(n_modes - 1))
            if len(bonds) != n_modes - 1:
                raise ConfigError(
                    f"tt needs {n_modes - 1} bond ranks (or one policy rank) "
                    f"for weight modes {modes}")
            full = (1,) + tuple(bonds) + (1,)
            n_paths = int(np.prod(bonds)) if bonds else 1
            std = _init_std(prod_in, n_factors=n_modes, n_paths=n_paths)
            self.tt_cores = [Parameter(rng.standard_normal((full[i], modes[i], full[i + 1])) * std)
                             for i in range(n_modes)]
        self.bias = Parameter(np.zeros(self.out_shape))

    # -- forward --------------------------------------------------------

    def __call__(self, h: Tensor) -> Tensor:
        if h.shape[1:] != self.in_shape:
            raise ValueError(
                f"input has trailing shape {h.shape[1:]}, layer expects {self.in_shape}")
        n_in, n_out = len(self.in_shape), len(self.out_shape)
        in_l = _DIM_LETTERS[:n_in]
        out_l = _DIM_LETTERS[n_in:n_in + n_out]
        kind = self.factorization.kind

        if kind == "dense":
            out = ad.einsum(f"{_BATCH}{in_l},{in_l}{out_l}->{_BATCH}{out_l}",
                            h, self.weight)
        elif kind == "cp":
            out = self._cp_forward(h, in_l, out_l)
        elif kind == "tucker":
            out = self._tucker_forward(h, in_l, out_l)
        else:
            out = self._tt_forward(h, in_l, out_l)
        return out + self.bias

    def _cp_forward(self, h: Tensor, in_l: str, out_l: str) -> Tensor:
        r = _RANK_LETTERS[0]
        sub = _BATCH + in_l
        cur = h
        for i, letter in enumerate(in_l):
            nxt = sub.replace(letter, "")
            if r not in nxt:
                nxt += r
            cur = ad.einsum(f"{sub},{letter}{r}->{nxt}", cur, self.cp_factors[i])
            sub = nxt
        for j, letter in enumerate(out_l):
            factor = self.cp_factors[len(in_l) + j]
            last = j == len(out_l) - 1
            nxt = sub.replace(r, "") + letter + ("" if last else r)
            cur = ad.einsum(f"{sub},{letter}{r}->{nxt}", cur, factor)
            sub = nxt
        return cur

    def _tucker_forward(self, h: Tensor, in_l: str, out_l: str) -> Tensor:
        n_in = len(in_l)
        rank_l = _RANK_LETTERS[:n_in + len(out_l)]
        sub = _BATCH + in_l
        cur = h
        for i, letter in enumerate(in_l):
            nxt = sub.replace(letter, rank_l[i])
            cur = ad.einsum(f"{sub},{letter}{rank_l[i]}->{nxt}", cur, self.loadings[i])
            sub = nxt
        core_sub = rank_l
        out_rank = rank_l[n_in:]
        cur = ad.einsum(f"{sub},{core_sub}->{_BATCH}{out_rank}", cur, self.core)
        sub = _BATCH + out_rank
        for j, letter in enumerate(out_l):
            rl = out_rank[j]
            nxt = sub.replace(rl, letter)
            cur = ad.einsum(f"{sub},{letter}{rl}->{nxt}", cur, self.loadings[n_in + j])
            sub = nxt
        return cur

    def _tt_forward(self, h: Tensor, in_l: str, out_l: str) -> Tensor:
        bond_prev = _RANK_LETTERS[0]
        bond_next = _RANK_LETTERS[1]
        cur = h
        sub = _BATCH + in_l
        modes = in_l + out_l
        for i, letter in enumerate(modes):
            core = self.tt_cores[i]
            first, last = i == 0, i == len(modes) - 1
            is_input = i < len(in_l)
            if first:
                core = ad.reshape(core, core.shape[1:])  # (D, r1)
                op_sub = f"{letter}{bond_next}"
            elif last:
                core = ad.reshape(core, core.shape[:2])  # (r, D)
                op_sub = f"{bond_prev}{letter}"
            else:
                op_sub = f"{bond_prev}{letter}{bond_next}"
            if is_input:
                nxt = sub.replace(letter, "").replace(bond_prev, "")
                if not last:
                    nxt += bond_next
            else:
                nxt = sub.replace(bond_prev, "") + letter
                if not last:
                    nxt += bond_next
            cur = ad.einsum(f"{sub},{op_sub}->{nxt}", cur, core)
            sub = nxt
            bond_prev, bond_next = bond_next, _RANK_LETTERS[(i + 2) % len(_RANK_LETTERS)]
        return cur

    # -- introspection ----------------------------------------------------

    def dense_weight(self) -> np.ndarray:
        """Materialize the dense (in_shape + out_shape) weight tensor."""
        kind = self.factorization.kind
        if kind == "dense":
            return self.weight.data.copy()
        if kind == "cp":
            cur = self.cp_factors[0].data  # (D_0, R)
            sub = _DIM_LETTERS[0]
            for i in range(1, len(self.cp_factors)):
                letter = _DIM_LETTERS[i]
                cur = np.einsum(f"{sub}y,{letter}y->{sub}{letter}y",
                                cur, self.cp_factors[i].data)
                sub += letter
            return cur.sum(axis=-1)
        if kind == "tucker":
            w = self.core.data
            for m, u in enumerate(self.loadings, start=1):
                w = mode_product(w, u.data, m)
            return w
        return TTFactors([c.data for c in self.tt_cores]).reconstruct()

    def max_abs_weight(self) -> float:
        return float(np.max(np.abs(self.dense_weight())))


class TensorNetwork(Module):
    """Alternating tensor affine layers and ReLU, final affine un-activated,
    optional entrywise truncation of the output."""

    def __init__(self, input_shape: Sequence[int], layer_shapes: Sequence[Sequence[int]],
                 factorization: Factorization = Factorization(),
                 truncation: float = math.inf,
                 rng: Optional[np.random.Generator] = None):
        super().__init__()
        if rng is None:
            rng = np.random.default_rng(0)
        if len(layer_shapes) < 2:
            raise ConfigError("a tensor network needs depth >= 1 (two affine layers)")
        if not (truncation > 0):
            raise ConfigError("truncation level must be positive")
        self.input_shape = tuple(int(d) for d in input_shape)
        self.layer_shapes = tuple(tuple(int(d) for d in s) for s in layer_shapes)
        self.truncation = float(truncation)
        self.factorization = factorization
        shapes = (self.input_shape,) + self.layer_shapes
        self.affines = [TensorAffine(shapes[i], shapes[i + 1], factorization, rng)
                        for i in range(len(self.layer_shapes))]

    @property
    def depth(self) -> int:
        return len(self.affines) - 1

    def __call__(self, x: Tensor) -> Tensor:
        h = x
        for layer in self.affines[:-1]:
            h = ad.relu(layer(h))
        h = self.affines[-1](h)
        if math.isfinite(self.truncation):
            h = ad.clip_magnitude(h, self.truncation)
        return h

    def max_abs_weight(self) -> float:
        return max(layer.max_abs_weight() for layer in self.affines)

    def config_header(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "layer_shapes": [list(s) for s in self.layer_shapes],
            "factorization": {"kind": self.factorization.kind,
                              "ranks": list(self.factorization.ranks)},
            "truncation": None if math.isinf(self.truncation) else self.truncation,
        }


NETWORK_MAGIC = b"TTNW"


def save_network(network: TensorNetwork, path) -> None:
    arrays = [(name, p.data) for name, p in network.named_parameters()]
    write_container(path, NETWORK_MAGIC, network.config_header(), arrays)


def load_network(path, network: TensorNetwork) -> TensorNetwork:
    """Load weights saved by :func:`save_network` into a matching network."""
    header, arrays = read_container(path, NETWORK_MAGIC)
    expected = network.config_header()
    if header != expected:
        raise CheckpointError(
            f"checkpoint config {header} does not match network config {expected}")
    params = dict(network.named_parameters())
    if set(params) != set(arrays):
        raise CheckpointError("checkpoint parameter names do not match the network")
    for name, arr in arrays.items():
        if params[name].data.shape != arr.shape:
            raise CheckpointError(f"shape mismatch for {name}")
        params[name].data = arr
    return network
