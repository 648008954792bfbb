"""Standard neural layers built on the autodiff engine.

Includes 2-D convolution, a 2-layer MLP with batch normalization, global
pooling, dropout, the Adam optimizer, and the central-finite-difference
gradient checker used as the independent oracle in tests.
"""

from __future__ import annotations

import logging
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor

logger = logging.getLogger(__name__)


class Module:
    """Lightweight container tracking parameters and train/eval mode."""

    def __init__(self):
        self._training = True

    @property
    def training(self) -> bool:
        return self._training

    def train(self, flag: bool = True):
        self._training = flag
        for child in self._children():
            child.train(flag)
        return self

    def eval(self):
        return self.train(False)

    def _children(self) -> List["Module"]:
        out = []
        for value in self.__dict__.values():
            if isinstance(value, Module):
                out.append(value)
            elif isinstance(value, (list, tuple)):
                out.extend(v for v in value if isinstance(v, Module))
        return out

    def named_parameters(self, prefix: str = "") -> List[Tuple[str, Parameter]]:
        out = []
        for name, value in self.__dict__.items():
            path = f"{prefix}{name}"
            if isinstance(value, Parameter):
                out.append((path, value))
            elif isinstance(value, Module):
                out.extend(value.named_parameters(prefix=path + "."))
            elif isinstance(value, (list, tuple)):
                for i, v in enumerate(value):
                    if isinstance(v, Parameter):
                        out.append((f"{path}.{i}", v))
                    elif isinstance(v, Module):
                        out.extend(v.named_parameters(prefix=f"{path}.{i}."))
        return out

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return int(sum(p.data.size for p in self.parameters()))

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 bias: bool = True):
        super().__init__()
        scale = np.sqrt(2.0 / (in_features + out_features))
        self.weight = Parameter(rng.standard_normal((in_features, out_features)) * scale)
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = x @ self.weight
        if self.bias is not None:
            out = out + self.bias
        return out


class Conv2d(Module):
    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 rng: np.random.Generator, stride: int = 1, padding: int = 0,
                 bias: bool = True):
        super().__init__()
        fan_in = in_channels * kernel_size * kernel_size
        scale = np.sqrt(2.0 / fan_in)
        self.kernel = Parameter(
            rng.standard_normal((out_channels, in_channels, kernel_size, kernel_size)) * scale)
        self.bias = Parameter(np.zeros(out_channels)) if bias else None
        self.stride = stride
        self.padding = padding

    def __call__(self, x: Tensor) -> Tensor:
        out = ad.conv2d(x, self.kernel, stride=self.stride, padding=self.padding)
        if self.bias is not None:
            out = out + self.bias.reshape(1, -1, 1, 1)
        return out


class BatchNorm1d(Module):
    """Batch normalization over axis 0 of a (B, D) input.

    Training uses batch statistics and updates running averages with
    momentum 0.9; eval uses the running averages. A training batch of size
    1 falls back to the running statistics with a logged warning.
    """

    def __init__(self, dim: int, momentum: float = 0.9, eps: float = 1e-5):
        super().__init__()
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self.momentum = momentum
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        batch = x.data.shape[0]
        if self.training and batch > 1:
            mean = x.mean(axis=0)
            centered = x - mean
            var = (centered ** 2.0).mean(axis=0)
            self.running_mean = (self.momentum * self.running_mean
                                 + (1.0 - self.momentum) * mean.data)
            self.running_var = (self.momentum * self.running_var
                                + (1.0 - self.momentum) * var.data)
            inv_std = (var + self.eps) ** -0.5
            return self.gamma * (centered * inv_std) + self.beta
        if self.training and batch == 1:
            logger.warning("batch of size 1 in training mode; "
                           "batch norm falls back to running statistics")
        scale = 1.0 / np.sqrt(self.running_var + self.eps)
        normalized = (x - Tensor(self.running_mean)) * Tensor(scale)
        return self.gamma * normalized + self.beta


class MLP(Module):
    """Two linear layers: linear -> batch norm -> ReLU -> linear."""

    def __init__(self, in_features: int, hidden: int, out_features: int,
                 rng: np.random.Generator, batch_norm: bool = True):
        super().__init__()
        self.fc1 = Linear(in_features, hidden, rng)
        self.norm = BatchNorm1d(hidden) if batch_norm else None
        self.fc2 = Linear(hidden, out_features, rng)

    def __call__(self, x: Tensor) -> Tensor:
        h = self.fc1(x)
        if self.norm is not None:
            h = self.norm(h)
        h = ad.relu(h)
        return self.fc2(h)


def global_pool(x: Tensor, kind: str, axes: Sequence[int]) -> Tensor:
    """Mean or max over ``axes``; max routes its gradient to the first argmax."""
    axes = tuple(sorted(int(a) % x.ndim for a in axes))
    if len(set(axes)) != len(axes):
        raise ValueError("pooling axes must be distinct")
    if kind == "mean":
        return x.mean(axis=axes)
    if kind == "max":
        out = x
        for axis in reversed(axes):  # descending keeps remaining axes valid
            out = ad.max_along(out, axis=axis)
        return out
    raise ValueError(f"unknown pooling kind: {kind!r}")


class Dropout(Module):
    """Inverted dropout: zero with probability ``rate``, scale survivors."""

    def __init__(self, rate: float, rng: np.random.Generator):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self.rng = rng

    def __call__(self, x: Tensor) -> Tensor:
        if not self.training or self.rate == 0.0:
            return x
        keep = 1.0 - self.rate
        mask = (self.rng.random(x.data.shape) >= self.rate) / keep
        return x * Tensor(mask)


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

def adam_step(value: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
              lr: float, t: int, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8):
    """One bias-corrected Adam update; returns (new value, new m, new v)."""
    if t < 1:
        raise ValueError("Adam step index t starts at 1")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    return value - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


class Adam:
    def __init__(self, params: Iterable[Parameter], lr: float = 0.01,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: Dict[int, np.ndarray] = {}
        self._v: Dict[int, np.ndarray] = {}

    def step(self):
        self.t += 1
        for i, p in enumerate(self.params):
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            m = self._m.get(i, np.zeros_like(p.data))
            v = self._v.get(i, np.zeros_like(p.data))
            p.data, self._m[i], self._v[i] = adam_step(
                p.data, grad, m, v, self.lr, self.t,
                beta1=self.beta1, beta2=self.beta2, eps=self.eps)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

def finite_difference_check(
    f: Callable[[], Tensor],
    params: Sequence[Parameter],
    seed: int = 0,
    num_coords: int = 20,
    step: float = 1e-4,
) -> float:
    """Max relative error of reverse-mode gradients vs central differences.

    ``f`` must rebuild the scalar loss from scratch on every call and be
    deterministic (dropout off, batch-norm state not mutating across calls
    in a way that changes the value). About ``num_coords`` random
    coordinates per parameter are probed. The relative error uses a floor
    of 1 in the denominator so that near-zero gradients compare absolutely.
    """
    rng = np.random.default_rng(seed)
    for p in params:
        p.zero_grad()
    loss = f()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy()
                for p in params]

    worst = 0.0
    for p, an in zip(params, analytic):
        flat = p.data.reshape(-1)
        n = flat.size
        coords = rng.choice(n, size=min(num_coords, n), replace=False)
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + step
            plus = float(f().data)
            flat[idx] = original - step
            minus = float(f().data)
            flat[idx] = original
            fd = (plus - minus) / (2.0 * step)
            an_val = float(an.reshape(-1)[idx])
            rel = abs(fd - an_val) / max(abs(fd), abs(an_val), 1.0)
            worst = max(worst, rel)
    return worst
