import math

import numpy as np
import pytest

from graphwedgelets import (
    FormatError,
    GrayImage,
    Metric,
    Strategy,
    encode,
    haar2d_topm,
    image_to_signal,
    psnr,
    quadtree_encode,
    read_pgm,
    reconstruct_from_means,
    render_details,
    render_partition,
    signal_to_image,
    write_pgm,
)
from graphwedgelets.imaging import haar2d_forward, haar2d_inverse, haar_levels


def checkerboard(n=8, lo=0.0, hi=255.0):
    grid = np.indices((n, n)).sum(axis=0) % 2
    return GrayImage.from_array(np.where(grid == 0, lo, hi))


def diagonal_wedge(n=16, lo=30.0, hi=200.0):
    x, y = np.meshgrid(np.arange(n), np.arange(n))
    return GrayImage.from_array(np.where(x + y <= n - 1, hi, lo))


class TestGrayImage:
    def test_validation(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            GrayImage(np.full((2, 2), 300.0))
        img = GrayImage.from_array(np.full((2, 2), 300.0), clip=True)
        assert img.pixels.max() == 255.0

    def test_pgm_round_trip(self):
        img = checkerboard(5)
        again = read_pgm(write_pgm(img))
        assert np.array_equal(img.pixels, again.pixels)

    def test_pgm_with_comment(self):
        data = b"P5\n# made by hand\n2 2\n255\n" + bytes([0, 128, 255, 7])
        img = read_pgm(data)
        assert img.pixels[0, 1] == 128.0

    def test_pgm_rejects_wrong_maxval(self):
        with pytest.raises(FormatError, match="maxval"):
            read_pgm(b"P5\n2 2\n65535\n" + bytes(8))

    def test_pgm_rejects_short_raster(self):
        with pytest.raises(FormatError, match="raster"):
            read_pgm(b"P5\n4 4\n255\n" + bytes(3))


class TestImageSignalAdapters:
    def test_1x1(self):
        g, f = image_to_signal(GrayImage.from_array(np.array([[7.0]])))
        assert g.n == 1
        assert list(f) == [7.0]

    def test_2x2(self):
        img = GrayImage.from_array(np.array([[0.0, 10.0], [20.0, 30.0]]))
        g, f = image_to_signal(img)
        assert g.n == 4
        assert g.num_edges == 4
        assert list(f) == [0.0, 10.0, 20.0, 30.0]
        assert np.array_equal(g.coords, [[0, 0], [1, 0], [0, 1], [1, 1]])

    def test_scale(self):
        img = GrayImage.from_array(np.zeros((451, 500)))
        g, _ = image_to_signal(img)
        assert g.n == 225500

    def test_signal_to_image_round_trip(self):
        img = checkerboard(4)
        g, f = image_to_signal(img)
        assert np.array_equal(signal_to_image(f, 4, 4).pixels, img.pixels)


class TestPsnr:
    def test_identical_is_infinite(self):
        img = checkerboard(4)
        assert psnr(img, img) == math.inf

    def test_full_range_error_is_zero_db(self):
        a = GrayImage.from_array(np.zeros((3, 3)))
        b = GrayImage.from_array(np.full((3, 3), 255.0))
        assert psnr(a, b) == pytest.approx(0.0)

    def test_uniform_unit_error_closed_form(self):
        a = GrayImage.from_array(np.full((6, 6), 100.0))
        b = GrayImage.from_array(np.full((6, 6), 101.0))
        assert psnr(a, b) == pytest.approx(10 * math.log10(255**2), abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            psnr(checkerboard(4), checkerboard(5))


class TestQuadtree:
    def test_constant_image_single_block(self):
        img = GrayImage.from_array(np.full((8, 8), 33.0))
        tree = quadtree_encode(img, 10)
        assert tree.n_leaves == 1
        assert psnr(img, tree.to_image()) == math.inf

    def test_target_equal_to_pixel_count_is_exact(self):
        img = checkerboard(4)
        tree = quadtree_encode(img, 16)
        assert np.array_equal(tree.to_image().pixels, img.pixels)

    def test_half_and_half_needs_at_most_four(self):
        pixels = np.zeros((8, 8))
        pixels[:, 4:] = 255.0
        img = GrayImage.from_array(pixels)
        for target in (2, 3, 4):
            tree = quadtree_encode(img, target)
            assert tree.n_leaves <= 4
            assert psnr(img, tree.to_image()) == math.inf

    def test_leaves_tile_exactly(self):
        img = GrayImage.from_array(
            np.random.default_rng(1).uniform(0, 255, size=(7, 5))
        )
        tree = quadtree_encode(img, 9)
        cover = np.zeros((7, 5), dtype=int)
        for i in tree.leaf_ids():
            node = tree.nodes[i]
            cover[node.y : node.y + node.h, node.x : node.x + node.w] += 1
        assert np.all(cover == 1)

    def test_one_pixel_rows_split_two_ways(self):
        img = GrayImage.from_array(np.arange(6, dtype=float).reshape(1, 6) * 40)
        tree = quadtree_encode(img, 6)
        assert np.array_equal(tree.to_image().pixels, img.pixels)

    def test_target_out_of_range(self):
        with pytest.raises(ValueError):
            quadtree_encode(checkerboard(4), 17)
        with pytest.raises(ValueError):
            quadtree_encode(checkerboard(4), 0)


class TestHaar2d:
    def test_full_round_trip(self):
        img = GrayImage.from_array(
            np.random.default_rng(3).uniform(0, 255, size=(12, 20))
        )
        out = haar2d_topm(img, 32 * 32)
        assert np.max(np.abs(out.pixels - img.pixels)) <= 1e-9 * 255

    def test_constant_m1_exact(self):
        img = GrayImage.from_array(np.full((8, 8), 77.0))
        out = haar2d_topm(img, 1)
        assert np.max(np.abs(out.pixels - img.pixels)) <= 1e-9 * 255

    def test_energy_preserved(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(0, 255, size=(16, 16))
        levels = haar_levels(16, 16)
        coeffs = haar2d_forward(a, levels)
        assert float(np.sum(coeffs**2)) == pytest.approx(
            float(np.sum(a**2)), rel=1e-9
        )
        back = haar2d_inverse(coeffs, levels)
        assert np.max(np.abs(back - a)) <= 1e-9 * 255

    def test_checkerboard_dc_only_gives_mean(self):
        img = checkerboard(8)
        out = haar2d_topm(img, 1)
        assert np.allclose(out.pixels, img.pixels.mean())

    def test_levels_capped_at_six(self):
        assert haar_levels(256, 256) == 6
        assert haar_levels(8, 32) == 3
        assert haar_levels(1, 16) == 0

    def test_bad_m(self):
        with pytest.raises(ValueError):
            haar2d_topm(checkerboard(4), 0)


class TestRendering:
    def test_single_region_label(self):
        img = checkerboard(4)
        g, f = image_to_signal(img)
        tree = encode(g, Metric(g, "l2"), f, 0, 1, Strategy("md")).tree
        labels = render_partition(tree, 4, 4)
        assert np.array_equal(labels.pixels, np.zeros((4, 4)))

    def test_two_region_wedge_labels(self):
        img = diagonal_wedge(6)
        g, f = image_to_signal(img)
        metric = Metric(g, "l2")
        tree = encode(g, metric, f, 0, 2, Strategy("fa")).tree
        labels = render_partition(tree, 6, 6)
        assert set(np.unique(labels.pixels)) == {0.0, 255.0}
        # the labels follow the wedge membership exactly
        from graphwedgelets import wedge_assign

        plus, minus = wedge_assign(
            metric, np.arange(36), tree.centers[0], tree.centers[1]
        )
        flat = labels.pixels.reshape(-1)
        assert set(flat[plus]) == {0.0}
        assert set(flat[minus]) == {255.0}

    def test_identical_details_are_zero(self):
        img = checkerboard(4)
        details = render_details(img, img)
        assert np.array_equal(details.pixels, np.zeros((4, 4)))

    def test_non_grid_tree_rejected(self, er20):
        f = np.random.default_rng(0).standard_normal(er20.n)
        tree = encode(er20, Metric(er20, "hop"), f, 0, 2, Strategy("md")).tree
        with pytest.raises(ValueError):
            render_partition(tree, 4, 5)


class TestWedgeletVsBaselines:
    def test_lossless_at_full_partition(self):
        img = checkerboard(4)
        g, f = image_to_signal(img)
        result = encode(g, Metric(g, "hop"), f, 0, g.n, Strategy("md"))
        recon = reconstruct_from_means(result.tree, result.leaf_means)
        assert psnr(img, signal_to_image(recon, 4, 4)) == math.inf

    def test_wedge_image_beats_quadtree_at_equal_budget(self):
        img = diagonal_wedge(16)
        g, f = image_to_signal(img)
        budget = 12
        result = encode(g, Metric(g, "l2"), f, 0, budget, Strategy("fa"))
        wedge_img = signal_to_image(
            reconstruct_from_means(result.tree, result.leaf_means), 16, 16
        )
        quad = quadtree_encode(img, budget)
        assert psnr(img, wedge_img) > psnr(img, quad.to_image())
