import math
import tempfile
import unittest
from pathlib import Path

import cv2
import numpy as np

from egolane.config import PipelineConfig
from egolane.errors import TemplateError
from egolane.features import FeatureMaps
from egolane.imaging import HoughLine
from egolane.markings import (
    build_histogram,
    classify_sign,
    crosswalk_region,
    crosswalk_score,
    crosswalk_signal,
    detect_crosswalk,
    dominant_angle,
    extract_sign_candidates,
    load_templates,
    remove_markings,
    render_templates,
    write_templates,
)
from models import CrosswalkResult, LaneBase, Rect, RoadSign, SignClass


def _line(theta: float, rho: float) -> HoughLine:
    return HoughLine(rho=rho, theta=theta, base_row=99)


def _strips(angle: float, count: int = 5, period: int = 40, width: int = 20, length: int = 150) -> np.ndarray:
    """Parallel filled strips centred at (320, 260) of a 480×640 map, direction `angle` with y pointing up."""
    dmap = np.zeros((480, 640), dtype=np.uint8)
    t = math.radians(angle)
    along = np.array([math.cos(t), -math.sin(t)])
    across = np.array([math.sin(t), math.cos(t)])
    center = np.array([320.0, 260.0])
    for i in range(count):
        c = center + (i - (count - 1) / 2) * period * across
        corners = [c + a * width / 2 * across + b * length / 2 * along for a, b in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
        cv2.fillPoly(dmap, [np.rint(corners).astype(np.int32)], 1)
    return dmap.astype(bool)


class TestHistogram(unittest.TestCase):
    def test_single_weighted_line(self) -> None:
        hist = build_histogram([_line(90.4, 10.0)], width=640, weights=[7.0])
        self.assertEqual(hist.counts[3, 90], 7.0)
        self.assertEqual(hist.counts.sum(), 7.0)

    def test_additive_over_lines(self) -> None:
        a = [_line(30.0, 50.0), _line(89.9, 200.0)]
        b = [_line(91.0, 400.0)]
        np.testing.assert_array_equal(
            build_histogram(a + b, 640).counts,
            build_histogram(a, 640).counts + build_histogram(b, 640).counts,
        )

    def test_out_of_range_rho(self) -> None:
        lines = [_line(90.0, -4.0), _line(90.0, 700.0)]
        self.assertEqual(build_histogram(lines, 640).counts.sum(), 0.0)
        clipped = build_histogram(lines, 640, clip_rho=True)
        self.assertEqual(clipped.counts[0, 90], 1.0)
        self.assertEqual(clipped.counts[-1, 90], 1.0)

    def test_dominant_angle_prefers_the_denser_window(self) -> None:
        lines = [_line(44.0, 10.0), _line(45.0, 10.0), _line(46.0, 10.0), _line(90.0, 10.0)]
        hist = build_histogram(lines, 640, weights=[1.0, 1.0, 1.0, 2.0])
        self.assertEqual(dominant_angle(hist, 1), 45)

    def test_dominant_angle_of_empty_histogram(self) -> None:
        self.assertIsNone(dominant_angle(build_histogram([], 640), 5))

    def test_ties_go_to_the_first_angle(self) -> None:
        hist = build_histogram([], 30)
        hist.counts[:] = 1.0
        self.assertEqual(dominant_angle(hist, 5), 0)


class TestCrosswalkSignal(unittest.TestCase):
    def test_signal_matches_direct_convolution(self) -> None:
        projection = np.array([0, 1, 1, 0, 0, 1, 1, 0, 1], dtype=bool)
        s = np.where(projection, 1.0, -1.0)
        n = len(s)
        direct = np.zeros(2 * n - 1)
        for k in range(2 * n - 1):
            for i in range(n):
                j = k - i
                if 0 <= j < n:
                    direct[k] += s[i] * -s[n - 1 - j]
        np.testing.assert_allclose(crosswalk_signal(projection), direct)

    def test_centre_is_the_global_minimum(self) -> None:
        projection = np.tile([True] * 20 + [False] * 20, 5)
        r = crosswalk_signal(projection)
        center = len(r) // 2
        self.assertEqual(r[center], -len(projection))
        self.assertTrue((np.delete(r, center) > r[center]).all())

    def test_alternating_strips_score_positive(self) -> None:
        projection = np.array([False] * 12 + [True, True, True, True, True, False, False, False, False, False] * 6)
        self.assertGreater(crosswalk_score(projection), 0.0)

    def test_solid_block_scores_negative(self) -> None:
        self.assertLess(crosswalk_score(np.ones(60, dtype=bool)), 0.0)

    def test_single_sample_has_no_sides(self) -> None:
        self.assertEqual(crosswalk_score(np.ones(1, dtype=bool)), float("-inf"))


class TestCrosswalkDetection(unittest.TestCase):
    def setUp(self) -> None:
        self.config = PipelineConfig()

    def test_blank_map(self) -> None:
        result = detect_crosswalk(np.zeros((480, 640), dtype=bool), None, self.config)
        self.assertFalse(result.detected)

    def test_region_without_a_lane_is_the_central_third(self) -> None:
        region = crosswalk_region((480, 640), None, self.config)
        self.assertEqual((region.x, region.x2), (213, 427))
        self.assertEqual((region.y, region.y2), (79, 440))

    def test_region_follows_the_lane(self) -> None:
        lane = LaneBase(p_b=300.0, p_t=300.0, width=160.0, theta=90.0)
        region = crosswalk_region((480, 640), lane, self.config)
        self.assertEqual((region.x, region.x2), (236, 364))

    def test_upright_strips(self) -> None:
        result = detect_crosswalk(_strips(90.0), None, self.config)
        self.assertTrue(result.detected)
        assert result.dominant_angle is not None
        self.assertLessEqual(abs(result.dominant_angle - 90), 10)
        self.assertGreater(result.score, 0.0)

    def test_tilted_strips(self) -> None:
        for tilt in (-15.0, 15.0):
            with self.subTest(tilt=tilt):
                result = detect_crosswalk(_strips(90.0 + tilt), None, self.config)
                self.assertTrue(result.detected)

    def test_single_block_is_not_a_crosswalk(self) -> None:
        dmap = np.zeros((480, 640), dtype=bool)
        dmap[200:240, 230:410] = True
        self.assertFalse(detect_crosswalk(dmap, None, self.config).detected)

    def test_ordinary_lane_markings_are_not_a_crosswalk(self) -> None:
        dmap = np.zeros((480, 640), dtype=bool)
        dmap[:, 238:244] = True
        dmap[:, 398:404] = True
        self.assertFalse(detect_crosswalk(dmap, None, self.config).detected)


class TestTemplates(unittest.TestCase):
    def test_generated_set(self) -> None:
        templates = render_templates()
        self.assertEqual(len(templates), 8)
        for image in templates.values():
            self.assertEqual(image.shape, (32, 32))
            self.assertEqual(set(np.unique(image).tolist()), {0, 255})

    def test_write_then_load(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            written = write_templates(Path(tmp))
            self.assertEqual([p.name for p in written], [f"arrow_{k}.png" for k in range(1, 9)])
            loaded = load_templates(Path(tmp))
        for sign_class, image in render_templates().items():
            np.testing.assert_array_equal(loaded[sign_class], image)

    def test_missing_template(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            write_templates(Path(tmp))
            (Path(tmp) / "arrow_3.png").unlink()
            with self.assertRaises(TemplateError):
                load_templates(Path(tmp))

    def test_wrong_size(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            write_templates(Path(tmp))
            cv2.imwrite(str(Path(tmp) / "arrow_1.png"), np.zeros((16, 16), dtype=np.uint8))
            with self.assertRaises(TemplateError):
                load_templates(Path(tmp))


class TestClassifySign(unittest.TestCase):
    def setUp(self) -> None:
        self.templates = render_templates()

    def test_every_template_matches_itself(self) -> None:
        for sign_class, image in self.templates.items():
            sign = classify_sign(image, self.templates)
            self.assertEqual(sign.sign_class, sign_class)
            self.assertGreaterEqual(sign.score, 0.99)

    def test_wide_candidate_is_a_stop_line(self) -> None:
        sign = classify_sign(np.zeros((20, 300), dtype=np.uint8), self.templates)
        self.assertEqual(sign.sign_class, SignClass.STOP_LINE)
        self.assertEqual(sign.bbox, Rect(x=0, y=0, width=300, height=20))

    def test_noisy_arrow(self) -> None:
        rng = np.random.default_rng(5)
        noisy = self.templates[SignClass.ARROW_1].copy()
        noisy[rng.random(noisy.shape) < 0.2] = 255
        sign = classify_sign(noisy, self.templates)
        self.assertEqual(sign.sign_class, SignClass.ARROW_1)
        self.assertGreater(sign.score, 0.6)

    def test_larger_candidate_is_resized(self) -> None:
        big = cv2.resize(self.templates[SignClass.ARROW_6], (64, 96), interpolation=cv2.INTER_NEAREST)
        self.assertEqual(classify_sign(big, self.templates).sign_class, SignClass.ARROW_6)

    def test_random_texture_is_unknown(self) -> None:
        rng = np.random.default_rng(6)
        patch = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        self.assertEqual(classify_sign(patch, self.templates).sign_class, SignClass.UNKNOWN)

    def test_score_equal_to_the_threshold_is_unknown(self) -> None:
        image = self.templates[SignClass.ARROW_2]
        score = classify_sign(image, self.templates).score
        sign = classify_sign(image, self.templates, match_threshold=score)
        self.assertEqual(sign.sign_class, SignClass.UNKNOWN)
        self.assertEqual(sign.score, score)


class TestSignCandidates(unittest.TestCase):
    def setUp(self) -> None:
        self.config = PipelineConfig().markings
        self.lane = LaneBase(p_b=320.0, p_t=320.0, width=160.0, theta=90.0)
        self.gray = np.full((480, 640), 65, dtype=np.uint8)
        self.dog = np.zeros((480, 640), dtype=bool)
        self.vad = np.zeros((480, 640), dtype=bool)

    def _blob(self, x: int, value: int = 200) -> None:
        self.gray[100:160, x:x + 40] = value
        self.dog[100:160, x:x + 40] = True

    def test_bright_blob_in_the_lane(self) -> None:
        self._blob(300)
        boxes = extract_sign_candidates(self.dog, self.vad, self.gray, self.lane, self.config)
        self.assertEqual(boxes, [Rect(x=300, y=100, width=40, height=60)])

    def test_blob_outside_the_lane_is_ignored(self) -> None:
        self._blob(500)
        self.assertEqual(extract_sign_candidates(self.dog, self.vad, self.gray, self.lane, self.config), [])

    def test_blob_no_brighter_than_its_surround(self) -> None:
        rng = np.random.default_rng(7)
        self.gray = rng.integers(50, 150, (480, 640), dtype=np.uint8)
        self._blob(300, value=90)
        self.assertEqual(extract_sign_candidates(self.dog, self.vad, self.gray, self.lane, self.config), [])

    def test_excluded_area(self) -> None:
        self._blob(300)
        exclude = Rect(x=250, y=80, width=140, height=100)
        self.assertEqual(extract_sign_candidates(self.dog, self.vad, self.gray, self.lane, self.config, exclude), [])


class TestRemoval(unittest.TestCase):
    def _maps(self) -> FeatureMaps:
        ones = np.ones((100, 120), dtype=bool)
        return FeatureMaps(srf=ones.copy(), dog=ones.copy(), vad=ones.copy(), inb=ones.copy(), cmb=ones.copy())

    def test_nothing_detected(self) -> None:
        maps = self._maps()
        self.assertIs(remove_markings(maps, CrosswalkResult(detected=False), []), maps)

    def test_clears_crosswalk_and_signs(self) -> None:
        maps = self._maps()
        crosswalk = CrosswalkResult(detected=True, dominant_angle=90, region=Rect(x=10, y=10, width=20, height=20))
        sign = RoadSign(sign_class=SignClass.ARROW_1, bbox=Rect(x=60, y=50, width=10, height=30))
        out = remove_markings(maps, crosswalk, [sign], margin=2)
        expected = np.ones((100, 120), dtype=bool)
        expected[8:32, 8:32] = False
        expected[48:82, 58:72] = False
        for bmap in (out.srf, out.dog, out.vad, out.inb, out.cmb):
            np.testing.assert_array_equal(bmap, expected)

    def test_undetected_crosswalk_region_is_kept(self) -> None:
        crosswalk = CrosswalkResult(detected=False, region=Rect(x=10, y=10, width=20, height=20))
        out = remove_markings(self._maps(), crosswalk, [], margin=2)
        self.assertTrue(out.srf.all())

    def test_result_is_a_subset(self) -> None:
        rng = np.random.default_rng(8)
        srf = rng.random((100, 120)) > 0.5
        inb = rng.random((100, 120)) > 0.5
        maps = FeatureMaps(srf=srf, dog=srf.copy(), vad=inb.copy(), inb=inb, cmb=srf & inb)
        sign = RoadSign(sign_class=SignClass.UNKNOWN, bbox=Rect(x=0, y=0, width=50, height=50))
        out = remove_markings(maps, CrosswalkResult(detected=False), [sign])
        for before, after in ((maps.srf, out.srf), (maps.inb, out.inb), (maps.cmb, out.cmb)):
            self.assertFalse((after & ~before).any())


if __name__ == "__main__":
    unittest.main()
