"""Persistence images and the stacked per-graph image tensor.

A diagram is rasterized in (birth, persistence) coordinates: every point
contributes a Gaussian bump evaluated at pixel centers, weighted linearly in
its persistence. Images from K filtrations x Q homology dimensions stack
into one (K, Q, P, P) tensor per graph.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .persistence import PersistenceDiagram

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImageParams:
    """Rasterization parameters for persistence images.

    ``birth_range`` / ``pers_range`` are the axis bounds; points outside are
    clamped to the boundary (and counted in the log) rather than dropped.
    The weight of a point grows linearly from 0 at persistence 0 to 1 at the
    top of the persistence range.
    """

    resolution: int = 20
    bandwidth: float = 0.05
    birth_range: Tuple[float, float] = (0.0, 1.0)
    pers_range: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if not 1 <= self.resolution:
            raise ValueError("resolution must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.birth_range[1] < self.birth_range[0] or self.pers_range[1] < self.pers_range[0]:
            raise ValueError("ranges must be non-degenerate (lo <= hi)")

    @classmethod
    def from_ranges(cls, birth_range, pers_range, resolution: int = 20) -> "ImageParams":
        """Bandwidth defaults to (widest axis range) / resolution."""
        width = max(birth_range[1] - birth_range[0], pers_range[1] - pers_range[0])
        bandwidth = width / resolution if width > 0 else 1.0
        return cls(resolution=resolution, bandwidth=bandwidth,
                   birth_range=(float(birth_range[0]), float(birth_range[1])),
                   pers_range=(float(pers_range[0]), float(pers_range[1])))

    def pixel_centers(self):
        """(birth-axis centers, persistence-axis centers), each length P."""
        p = self.resolution
        b_lo, b_hi = self.birth_range
        p_lo, p_hi = self.pers_range
        b_step = (b_hi - b_lo) / p if b_hi > b_lo else 1.0
        p_step = (p_hi - p_lo) / p if p_hi > p_lo else 1.0
        b_centers = b_lo + (np.arange(p) + 0.5) * b_step
        p_centers = p_lo + (np.arange(p) + 0.5) * p_step
        return b_centers, p_centers

    def to_json(self) -> str:
        return json.dumps({
            "resolution": self.resolution,
            "bandwidth": self.bandwidth,
            "birth_range": list(self.birth_range),
            "pers_range": list(self.pers_range),
        }, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def diagram_to_image(diagram: PersistenceDiagram, params: ImageParams) -> np.ndarray:
    """P x P image of a capped diagram (no infinite deaths allowed).

    image[i, j] sits at birth bin i, persistence bin j, and accumulates
    weight(pers) * N(point - pixel_center; bandwidth^2 I) over all points,
    with the normalized 2-D Gaussian density evaluated at the pixel center.
    """
    p = params.resolution
    image = np.zeros((p, p))
    if len(diagram) == 0:
        return image
    births = np.array([pt[0] for pt in diagram.points])
    deaths = np.array([pt[1] for pt in diagram.points])
    if np.any(np.isinf(deaths)):
        raise ValueError("diagram must be capped before imaging (infinite death)")
    pers = deaths - births

    b_lo, b_hi = params.birth_range
    p_lo, p_hi = params.pers_range
    clamped_b = np.clip(births, b_lo, b_hi)
    clamped_p = np.clip(pers, p_lo, p_hi)
    n_clamped = int(np.sum((clamped_b != births) | (clamped_p != pers)))
    if n_clamped:
        logger.debug("clamped %d diagram point(s) to the image range", n_clamped)

    weights = clamped_p / p_hi if p_hi > 0 else np.zeros_like(clamped_p)

    b_centers, p_centers = params.pixel_centers()
    two_sigma_sq = 2.0 * params.bandwidth ** 2
    norm = 1.0 / (2.0 * math.pi * params.bandwidth ** 2)
    db = b_centers[:, None] - clamped_b[None, :]  # (P, n)
    dp = p_centers[:, None] - clamped_p[None, :]
    gauss_b = np.exp(-db ** 2 / two_sigma_sq)
    gauss_p = np.exp(-dp ** 2 / two_sigma_sq)
    image = norm * np.einsum("in,jn,n->ij", gauss_b, gauss_p, weights)
    return image


def assemble_image_tensor(images: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    """Stack a K x Q grid of P x P images into a (K, Q, P, P) tensor.

    Axis 0 indexes the filtration, axis 1 the homology dimension.
    """
    if not images or not images[0]:
        raise ValueError("image grid must be non-empty")
    k, q = len(images), len(images[0])
    first = np.asarray(images[0][0])
    if first.ndim != 2 or first.shape[0] != first.shape[1]:
        raise ValueError(f"images must be square 2-D arrays, got {first.shape}")
    p = first.shape[0]
    tensor = np.zeros((k, q, p, p))
    for i, row in enumerate(images):
        if len(row) != q:
            raise ValueError("ragged image grid: all rows must have the same length")
        for j, img in enumerate(row):
            img = np.asarray(img, dtype=np.float64)
            if img.shape != (p, p):
                raise ValueError(f"image ({i},{j}) has shape {img.shape}, expected {(p, p)}")
            tensor[i, j] = img
    if not np.all(np.isfinite(tensor)) or np.any(tensor < 0):
        raise ValueError("image tensor entries must be finite and non-negative")
    return tensor


def save_image_cache(path, tensors: dict, params: ImageParams) -> None:
    """Persist per-graph image tensors plus a JSON sidecar of the parameters."""
    arrays = {str(gid): np.asarray(t) for gid, t in tensors.items()}
    np.savez_compressed(path, **arrays)
    sidecar = str(path) + ".json"
    with open(sidecar, "w") as fh:
        fh.write(params.to_json())


def load_image_cache(path, params: ImageParams) -> dict:
    """Load a cache written by :func:`save_image_cache`.

    Returns None-equivalent (raises KeyError) if the sidecar parameters do
    not match ``params``; callers should recompute in that case.
    """
    sidecar = str(path) + ".json"
    with open(sidecar) as fh:
        stored = fh.read()
    if stored != params.to_json():
        raise KeyError("image cache was built with different parameters")
    with np.load(path) as data:
        return {int(k): data[k] for k in data.files}
