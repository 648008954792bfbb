import math

import numpy as np
import pytest

from topotensor.imaging import (ImageParams, assemble_image_tensor,
                                diagram_to_image, load_image_cache,
                                save_image_cache)
from topotensor.persistence import PersistenceDiagram


def quadrature_mass(points, params, per_axis=800):
    """Midpoint-rule integral over the image range of the weighted Gaussian
    mixture that the image rasterizes; independent of the imaging code."""
    b_lo, b_hi = params.birth_range
    p_lo, p_hi = params.pers_range
    xs = np.linspace(b_lo, b_hi, per_axis, endpoint=False) + (b_hi - b_lo) / (2 * per_axis)
    ys = np.linspace(p_lo, p_hi, per_axis, endpoint=False) + (p_hi - p_lo) / (2 * per_axis)
    cell = ((b_hi - b_lo) / per_axis) * ((p_hi - p_lo) / per_axis)
    total = 0.0
    norm = 1.0 / (2.0 * math.pi * params.bandwidth ** 2)
    for b, d in points:
        pers = d - b
        w = min(max(pers, p_lo), p_hi) / p_hi
        bc = min(max(b, b_lo), b_hi)
        pc = min(max(pers, p_lo), p_hi)
        gx = np.exp(-((xs - bc) ** 2) / (2 * params.bandwidth ** 2))
        gy = np.exp(-((ys - pc) ** 2) / (2 * params.bandwidth ** 2))
        total += w * norm * np.outer(gx, gy).sum() * cell
    return total


class TestDiagramToImage:
    def test_empty_diagram_is_zero(self):
        params = ImageParams(resolution=20, bandwidth=0.05)
        img = diagram_to_image(PersistenceDiagram(0, ()), params)
        assert img.shape == (20, 20)
        assert np.all(img == 0)

    def test_zero_persistence_weight_vanishes(self):
        # a persistence-epsilon point has weight ~ epsilon -> image ~ 0
        params = ImageParams(resolution=20, bandwidth=0.05)
        dg = PersistenceDiagram(0, ((0.5, 0.5 + 1e-12),))
        img = diagram_to_image(dg, params)
        assert np.max(np.abs(img)) < 1e-9

    def test_argmax_pixel_contains_the_point(self):
        params = ImageParams(resolution=20, bandwidth=0.05,
                             birth_range=(0.0, 1.0), pers_range=(0.0, 1.0))
        dg = PersistenceDiagram(0, ((0.0, 1.0),))  # birth 0, persistence 1
        img = diagram_to_image(dg, params)
        i, j = np.unravel_index(np.argmax(img), img.shape)
        assert (i, j) == (0, 19)

    def test_pixel_sum_matches_quadrature(self):
        params = ImageParams(resolution=20, bandwidth=0.1,
                             birth_range=(0.0, 1.0), pers_range=(0.0, 1.0))
        points = ((0.3, 0.9), (0.1, 0.4))
        dg = PersistenceDiagram(0, points)
        img = diagram_to_image(dg, params)
        cell_area = (1.0 / 20) ** 2
        assert img.sum() * cell_area == pytest.approx(
            quadrature_mass(points, params), rel=2e-2)

    def test_out_of_range_point_clamped_not_dropped(self):
        params = ImageParams(resolution=20, bandwidth=0.05,
                             birth_range=(0.0, 1.0), pers_range=(0.0, 1.0))
        inside = diagram_to_image(PersistenceDiagram(0, ((1.0, 2.0),)), params)
        outside = diagram_to_image(PersistenceDiagram(0, ((5.0, 6.0),)), params)
        # both clamp to the same boundary location with the same weight
        assert np.allclose(inside, outside)
        assert inside.sum() > 0

    def test_requires_capped_diagram(self):
        params = ImageParams()
        with pytest.raises(ValueError):
            diagram_to_image(PersistenceDiagram(0, ((0.0, math.inf),)), params)

    def test_linearity_in_the_diagram(self):
        params = ImageParams(resolution=24, bandwidth=0.07)
        a = PersistenceDiagram(0, ((0.2, 0.7), (0.4, 0.9)))
        b = PersistenceDiagram(0, ((0.1, 0.6),))
        union = PersistenceDiagram(0, a.points + b.points)
        img_union = diagram_to_image(union, params)
        img_sum = diagram_to_image(a, params) + diagram_to_image(b, params)
        assert np.allclose(img_union, img_sum, atol=1e-12)

    def test_mass_monotone_in_persistence(self):
        params = ImageParams(resolution=20, bandwidth=0.05,
                             birth_range=(0.0, 1.0), pers_range=(0.0, 1.0))
        masses = []
        for pers in (0.2, 0.4, 0.6):
            dg = PersistenceDiagram(0, ((0.3, 0.3 + pers),))
            masses.append(diagram_to_image(dg, params).sum())
        assert masses[0] < masses[1] < masses[2]

    def test_images_nonnegative(self):
        params = ImageParams(resolution=20, bandwidth=0.03)
        dg = PersistenceDiagram(1, ((0.0, 0.5), (0.25, 0.3)))
        assert np.all(diagram_to_image(dg, params) >= 0)

    def test_bandwidth_default_from_ranges(self):
        params = ImageParams.from_ranges((0.0, 2.0), (0.0, 1.0), resolution=20)
        assert params.bandwidth == pytest.approx(2.0 / 20)
        degenerate = ImageParams.from_ranges((1.0, 1.0), (1.0, 1.0))
        assert degenerate.bandwidth == 1.0


class TestAssemble:
    def test_single_zero_image(self):
        t = assemble_image_tensor([[np.zeros((20, 20))]])
        assert t.shape == (1, 1, 20, 20)
        assert np.all(t == 0)

    def test_full_grid_shape(self):
        grid = [[np.random.default_rng(i * 10 + j).random((20, 20))
                 for j in range(2)] for i in range(4)]
        t = assemble_image_tensor(grid)
        assert t.shape == (4, 2, 20, 20)

    def test_permuting_filtrations_permutes_slices(self):
        rng = np.random.default_rng(3)
        grid = [[rng.random((8, 8)) for _ in range(2)] for _ in range(4)]
        t = assemble_image_tensor(grid)
        swapped = [grid[1], grid[0], grid[2], grid[3]]
        t2 = assemble_image_tensor(swapped)
        assert np.array_equal(t2[0], t[1])
        assert np.array_equal(t2[1], t[0])
        assert np.array_equal(t2[2:], t[2:])

    def test_ragged_grid_rejected(self):
        with pytest.raises(ValueError):
            assemble_image_tensor([[np.zeros((8, 8))], [np.zeros((8, 8)), np.zeros((8, 8))]])
        with pytest.raises(ValueError):
            assemble_image_tensor([[np.zeros((8, 8)), np.zeros((6, 6))]])

    def test_negative_entries_rejected(self):
        with pytest.raises(ValueError):
            assemble_image_tensor([[-np.ones((4, 4))]])


def test_cache_round_trip(tmp_path):
    params = ImageParams(resolution=8, bandwidth=0.1)
    tensors = {0: np.arange(64.0).reshape(8, 8), 3: np.ones((8, 8))}
    path = tmp_path / "cache.npz"
    save_image_cache(path, tensors, params)
    loaded = load_image_cache(path, params)
    assert set(loaded) == {0, 3}
    assert np.array_equal(loaded[0], tensors[0])
    with pytest.raises(KeyError):
        load_image_cache(path, ImageParams(resolution=8, bandwidth=0.2))
