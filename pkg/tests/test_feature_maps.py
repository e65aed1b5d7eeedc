import unittest

import cv2
import numpy as np

from egolane.config import DEFAULT_IPM_SOURCE, PipelineConfig
from egolane.errors import CalibrationError
from egolane.features import (
    combined_map,
    dog_kernel,
    dog_map,
    dog_response,
    extract_feature_maps,
    inb_map,
    preprocess,
    srf_map,
    srf_response,
    vad_map,
)
from egolane.imaging import Homography, morph

_IDENTITY = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]


def _bar_image(bar: int, value: int = 200, background: int = 60, rows: int = 20) -> np.ndarray:
    image = np.full((rows, 100), background, dtype=np.uint8)
    start = 50 - bar // 2
    image[:, start:start + bar] = value
    return image


class TestPreprocess(unittest.TestCase):
    def test_uniform_frame_gives_uniform_ipm(self) -> None:
        config = PipelineConfig()
        frame = np.full((480, 640, 3), 90, dtype=np.uint8)
        pre = preprocess(frame, config)
        self.assertEqual(pre.gray_ipm.shape, (480, 640))
        self.assertTrue(pre.valid_ipm.any())
        inner = morph(pre.valid_ipm, "erode", (7, 7))
        self.assertTrue((pre.gray_ipm[inner] == 90).all())

    def test_identity_homography_returns_the_crop(self) -> None:
        config = PipelineConfig(homography=_IDENTITY, ipm_width=640, ipm_height=240)
        rng = np.random.default_rng(0)
        frame = rng.integers(0, 256, (480, 640, 3), dtype=np.uint8)
        pre = preprocess(frame, config)
        gray = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)
        np.testing.assert_array_equal(pre.gray_ipm, gray[240:])
        np.testing.assert_array_equal(pre.gray_persp, gray[240:])

    def test_calibrated_trapezoid_becomes_a_vertical_bar(self) -> None:
        config = PipelineConfig()
        frame = np.zeros((480, 640, 3), dtype=np.uint8)
        corners = np.array([[x, y + config.roi.y] for x, y in DEFAULT_IPM_SOURCE], dtype=np.int32)
        cv2.fillPoly(frame, [corners], (255, 255, 255))
        pre = preprocess(frame, config)
        for row in (60, 240, 420):
            line = pre.gray_ipm[row]
            self.assertTrue((line[250:391] > 200).all(), row)
            self.assertTrue((line[:225] < 50).all(), row)
            self.assertTrue((line[415:] < 50).all(), row)

    def test_dimension_mismatch(self) -> None:
        with self.assertRaises(CalibrationError):
            preprocess(np.zeros((240, 320, 3), dtype=np.uint8), PipelineConfig())


class TestSrf(unittest.TestCase):
    def test_uniform_image_is_empty(self) -> None:
        self.assertFalse((srf_response(np.full((20, 100), 80, dtype=np.uint8), 5, 5) > 0).any())

    def test_narrow_bar_center_by_substitution(self) -> None:
        image = _bar_image(3)
        response = srf_response(image, 5, 5)
        self.assertEqual(response[10, 50], 2 * 200 - (60 + 60) - 0)
        self.assertGreater(response[10, 50], 30)

    def test_step_edge_gives_no_evidence(self) -> None:
        image = np.full((20, 100), 40, dtype=np.uint8)
        image[:, 50:] = 220
        self.assertFalse((srf_response(image, 5, 25) > 0).any())

    def test_border_columns_are_not_evidence(self) -> None:
        image = np.full((10, 60), 60, dtype=np.uint8)
        image[:, 2] = 250
        self.assertFalse((srf_response(image, 5, 5)[:, :5] != 0).any())

    def test_invariant_to_constant_offset(self) -> None:
        rng = np.random.default_rng(1)
        image = rng.integers(0, 200, (30, 120), dtype=np.uint8)
        h = Homography.from_values(_IDENTITY)
        a = srf_map(image, 3, 9, h, 30.0, (120, 30))
        b = srf_map(image + 40, 3, 9, h, 30.0, (120, 30))
        np.testing.assert_array_equal(a, b)


class TestDog(unittest.TestCase):
    def test_kernel_sums_to_about_zero(self) -> None:
        self.assertAlmostEqual(float(dog_kernel(6.0).sum()), 0.0, places=6)
        self.assertFalse(dog_map(np.full((10, 80), 120, dtype=np.uint8), 6.0, 1.0).any())

    def test_marking_width_bar_matches_direct_convolution(self) -> None:
        image = _bar_image(6, value=153, background=65)
        response = dog_response(image, 6.0)
        kernel = dog_kernel(6.0)
        direct = np.convolve(image[10].astype(np.float64), kernel, mode="same")
        np.testing.assert_allclose(response[10, 25:75], direct[25:75], atol=1e-2)
        bmap = dog_map(image, 6.0, 20.0)
        self.assertTrue(bmap[:, 49:51].all())
        self.assertFalse(bmap[:, :30].any())

    def test_wide_bar_interior_is_not_evidence(self) -> None:
        image = np.full((10, 200), 65, dtype=np.uint8)
        image[:, 70:130] = 153
        response = dog_response(image, 6.0)
        self.assertLess(abs(float(response[5, 100])), 1.0)
        self.assertFalse(dog_map(image, 6.0, 20.0)[:, 90:110].any())


class TestVad(unittest.TestCase):
    def test_step_marks_transition_rows(self) -> None:
        image = np.zeros((20, 30), dtype=np.uint8)
        image[10:] = 100
        bmap = vad_map(image, 20.0)
        self.assertEqual(sorted(set(np.nonzero(bmap)[0].tolist())), [9, 10])
        self.assertTrue(bmap[9:11].all())

    def test_vertical_stripes_are_empty(self) -> None:
        image = np.zeros((20, 30), dtype=np.uint8)
        image[:, ::4] = 200
        self.assertFalse(vad_map(image, 20.0).any())


class TestInb(unittest.TestCase):
    def _scene(self) -> tuple[np.ndarray, np.ndarray]:
        image = np.full((40, 60), 60, dtype=np.uint8)
        image[:, 20:26] = 200
        srf = np.zeros(image.shape, dtype=bool)
        srf[:, 20:26] = True
        return image, srf

    def test_empty_srf_gives_empty_map(self) -> None:
        image, _ = self._scene()
        self.assertFalse(inb_map(image, np.zeros(image.shape, dtype=bool)).any())

    def test_two_tone_scene_keeps_exactly_the_markings(self) -> None:
        image, srf = self._scene()
        np.testing.assert_array_equal(inb_map(image, srf), image == 200)

    def test_dim_false_positive_does_not_shift_statistics(self) -> None:
        image, srf = self._scene()
        image[:, :20:2] = 55
        image[:, 1:20:2] = 65
        image[:, 26::2] = 55
        image[:, 27::2] = 65
        image[5, 40] = 65
        srf[5, 40] = True
        inb = inb_map(image, srf)
        self.assertFalse(inb[5, 40])
        np.testing.assert_array_equal(inb, image == 200)


class TestCombined(unittest.TestCase):
    def test_and_semantics(self) -> None:
        rng = np.random.default_rng(2)
        a = rng.random((20, 20)) > 0.5
        b = rng.random((20, 20)) > 0.5
        out = combined_map(a, b)
        for (i, j), value in np.ndenumerate(out):
            self.assertEqual(value, a[i, j] and b[i, j])
        self.assertFalse(combined_map(a, np.zeros_like(a)).any())
        np.testing.assert_array_equal(combined_map(a, a), a)

    def test_cmb_is_a_subset_of_srf_and_inb(self) -> None:
        config = PipelineConfig()
        frame = np.full((480, 640, 3), 65, dtype=np.uint8)
        corners = np.array([[x, y + config.roi.y] for x, y in ((286, 40), (292, 40), (228, 239), (220, 239))])
        cv2.fillPoly(frame, [corners.astype(np.int32)], (153, 153, 153))
        maps = extract_feature_maps(preprocess(frame, config), config)
        self.assertTrue(maps.srf.any())
        self.assertFalse((maps.cmb & ~maps.srf).any())
        self.assertFalse((maps.cmb & ~maps.inb).any())

    def test_cleared_zeroes_every_map(self) -> None:
        config = PipelineConfig()
        frame = np.full((480, 640, 3), 65, dtype=np.uint8)
        frame[300:, 300:306] = 153
        maps = extract_feature_maps(preprocess(frame, config), config)
        mask = np.ones(maps.srf.shape, dtype=bool)
        cleared = maps.cleared(mask)
        for bmap in (cleared.srf, cleared.dog, cleared.vad, cleared.inb, cleared.cmb):
            self.assertFalse(bmap.any())


if __name__ == "__main__":
    unittest.main()
