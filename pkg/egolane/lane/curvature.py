"""
Lane curvature with a particle filter.

A particle is a lane described by three control points on the lane centre
(x1 at the bottom row, x2 at mid height, x3 at the top row) joined by a cubic
spline, plus a width that varies linearly from w1 at the bottom to w2 at the
top. x1 and w1 come from the Kalman lane base every frame; only (x2, x3, w2)
are sampled.

Weighting looks at the trust area only: the rows from the bottom up to the
first obstacle-like horizontal edge or stop line.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import cv2
import numpy as np
from scipy.interpolate import CubicSpline
from scipy.stats import norm

from egolane.config import ParticleConfig
from egolane.imaging import BinaryMap
from models import LaneBase, LaneRecord, RoadSign, SignClass

logger = logging.getLogger(__name__)

_W1_SIGMA = 1.0 / 3.0
_W2_SIGMA = 1.0 / 12.0


def control_rows(height: int) -> np.ndarray:
    """Control points as rows above the bottom row: bottom, middle, top."""
    top = float(height - 1)
    return np.array([0.0, top / 2.0, top])


def _centers(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray, height: int, v: np.ndarray) -> np.ndarray:
    """Spline centres at rows-above-bottom `v`; shape (len(v), n)."""
    knots = control_rows(height)
    spline = CubicSpline(knots, np.vstack([x1, x2, x3]), axis=0, bc_type="natural")
    return spline(v)


def _widths(w1: np.ndarray, w2: np.ndarray, height: int, v: np.ndarray) -> np.ndarray:
    frac = (v / max(height - 1, 1))[:, None]
    return w1[None, :] + (w2 - w1)[None, :] * frac


@dataclass(frozen=True)
class LaneParticle:
    w1: float
    w2: float
    x1: float
    x2: float
    x3: float


@dataclass(frozen=True)
class ParticleCloud:
    x1: float
    w1: float
    x2: np.ndarray
    x3: np.ndarray
    w2: np.ndarray

    def __len__(self) -> int:
        return int(self.x2.size)

    def particle(self, i: int) -> LaneParticle:
        return LaneParticle(w1=self.w1, w2=float(self.w2[i]), x1=self.x1, x2=float(self.x2[i]), x3=float(self.x3[i]))

    @classmethod
    def of(cls, particles: Sequence[LaneParticle]) -> ParticleCloud:
        first = particles[0]
        return cls(
            x1=first.x1,
            w1=first.w1,
            x2=np.array([p.x2 for p in particles]),
            x3=np.array([p.x3 for p in particles]),
            w2=np.array([p.w2 for p in particles]),
        )

    def take(self, idx: np.ndarray) -> ParticleCloud:
        return ParticleCloud(x1=self.x1, w1=self.w1, x2=self.x2[idx], x3=self.x3[idx], w2=self.w2[idx])


@dataclass(frozen=True)
class LaneEstimate:
    x1: float
    x2: float
    x3: float
    w1: float
    w2: float
    height: int
    trust_height: int

    def center_at(self, v: np.ndarray) -> np.ndarray:
        """Lane centre at rows-above-bottom `v`."""
        v = np.asarray(v, dtype=np.float64)
        out = _centers(np.array([self.x1]), np.array([self.x2]), np.array([self.x3]), self.height, v.ravel())
        return out[:, 0].reshape(v.shape)

    def width_at(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        return self.w1 + (self.w2 - self.w1) * v / max(self.height - 1, 1)

    def boundaries_at(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c, w = self.center_at(v), self.width_at(v)
        return c - w / 2.0, c + w / 2.0

    def to_record(self, step: int = 4) -> LaneRecord:
        v = np.arange(0, max(self.trust_height, 1), step, dtype=np.float64)
        left, right = self.boundaries_at(v)
        center = self.center_at(v)
        return LaneRecord(
            rows=[int(self.height - 1 - r) for r in v],
            left=[round(float(x), 3) for x in left],
            right=[round(float(x), 3) for x in right],
            center=[round(float(x), 3) for x in center],
            trust_height=self.trust_height,
            control_points=[self.x1, self.x2, self.x3],
            widths=[self.w1, self.w2],
        )


def base_line_at(base: LaneBase, height: int, v: np.ndarray | float) -> np.ndarray:
    """Centre of the straight lane base at rows-above-bottom `v`."""
    return base.p_b + (base.p_t - base.p_b) * np.asarray(v, dtype=np.float64) / max(height - 1, 1)


def estimate_from_base(base: LaneBase, height: int, trust_height: int) -> LaneEstimate:
    """Straight lane estimate, used when the particle filter is switched off."""
    _, v2, v3 = control_rows(height)
    return LaneEstimate(
        x1=base.p_b,
        x2=float(base_line_at(base, height, v2)),
        x3=float(base_line_at(base, height, v3)),
        w1=base.width,
        w2=base.width,
        height=height,
        trust_height=trust_height,
    )


def trust_area(
    vad: BinaryMap,
    prev: LaneEstimate | None,
    signs: Sequence[RoadSign],
    config: ParticleConfig,
) -> int:
    """
    Rows from the bottom that the filter may trust: up to the nearest stop line
    or the nearest row with VAD evidence in the middle strip of the previous
    lane (sign boxes ignored). Full height without either.
    """
    rows, cols = vad.shape
    h = rows
    for sign in signs:
        if sign.sign_class == SignClass.STOP_LINE:
            h = min(h, max(0, rows - sign.bbox.y2))
    if prev is None:
        return h

    v = np.arange(rows, dtype=np.float64)[::-1]  # rows-above-bottom for image rows 0..rows-1
    centers = prev.center_at(v)
    half = prev.width_at(v) * config.trust_strip_fraction
    strip = np.abs(np.arange(cols)[None, :] - centers[:, None]) <= half[:, None]
    evidence = vad & strip
    for sign in signs:
        evidence[sign.bbox.y:sign.bbox.y2, sign.bbox.x:sign.bbox.x2] = False
    hits = np.flatnonzero(evidence.sum(axis=1) >= config.trust_min_row_evidence)
    if hits.size:
        h = min(h, rows - 1 - int(hits.max()))
    return h


def reset_filter(base: LaneBase, rng: np.random.Generator, n: int, sigma_init: float, height: int) -> ParticleCloud:
    _, v2, v3 = control_rows(height)
    noise = rng.standard_normal((3, n)) * sigma_init
    return ParticleCloud(
        x1=base.p_b,
        w1=base.width,
        x2=float(base_line_at(base, height, v2)) + noise[0],
        x3=float(base_line_at(base, height, v3)) + noise[1],
        w2=np.maximum(base.width + noise[2], 1.0),
    )


def predict(
    cloud: ParticleCloud,
    base: LaneBase,
    rng: np.random.Generator,
    config: ParticleConfig,
    height: int,
) -> ParticleCloud:
    """
    Move every particle. x1 and w1 follow the lane base. x2 is drawn around a
    reference that sits between its previous value and the base direction's
    projection at its row; x3 the same way around the projection through the
    new x2. w2 takes a random walk.
    """
    n = len(cloud)
    _, v2, v3 = control_rows(height)
    x1 = base.p_b
    draws = rng.standard_normal((5, n))

    proj2 = float(base_line_at(base, height, v2))
    sigma2 = np.abs(cloud.x2 - proj2) / 3.0
    ref2 = cloud.x2 + np.abs(draws[0]) * sigma2 * np.sign(proj2 - cloud.x2)
    x2 = ref2 + draws[1] * config.x_sigma

    proj3 = x1 + (x2 - x1) * (v3 / v2)
    sigma3 = np.abs(cloud.x3 - proj3)
    ref3 = cloud.x3 + np.abs(draws[2]) * sigma3 * np.sign(proj3 - cloud.x3)
    x3 = ref3 + draws[3] * config.x_sigma

    w2 = np.maximum(cloud.w2 + draws[4] * config.width_sigma, 1.0)
    return ParticleCloud(x1=x1, w1=base.width, x2=x2, x3=x3, w2=w2)


def inner_band(w1: float, config: ParticleConfig) -> tuple[int, int]:
    """(offset, depth) of the band just inside each boundary that should stay empty."""
    depth = max(1, int(round(w1 * config.inner_band_fraction)))
    offset = config.inner_band_offset
    if offset is None:
        offset = int(config.marking_width) // 2 + 1
    return offset, depth


def _lookup(bmap: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    inside = (xs >= 0) & (xs < bmap.shape[1])
    out = np.zeros(xs.shape, dtype=bool)
    out[inside] = bmap[np.broadcast_to(ys, xs.shape)[inside], xs[inside]]
    return out


def particle_scores(
    cloud: ParticleCloud,
    cmb: BinaryMap,
    trust_height: int,
    config: ParticleConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """
    (W1', W2') per particle over the trust rows.

    W1' is 0 when both boundaries sit on CMB evidence (±1 px) in every row and
    1 when neither does. W2' is the share of evidence in the inner band next to
    each boundary, normalized by 2·depth·h.
    """
    rows, cols = cmb.shape
    h = max(1, min(trust_height, rows))
    v = np.arange(h, dtype=np.float64)
    ys = (rows - 1 - np.arange(h))[:, None]
    n = len(cloud)
    centers = _centers(np.full(n, cloud.x1), cloud.x2, cloud.x3, rows, v)
    widths = _widths(np.full(n, cloud.w1), cloud.w2, rows, v)
    left = np.rint(centers - widths / 2.0).astype(int)
    right = np.rint(centers + widths / 2.0).astype(int)

    tolerant = cv2.dilate(cmb.astype(np.uint8), np.ones((1, 3), dtype=np.uint8)).astype(bool)
    hit_l = _lookup(tolerant, ys, left)
    hit_r = _lookup(tolerant, ys, right)
    l = hit_l.mean(axis=0)
    r = hit_r.mean(axis=0)
    lr = l * r
    w1p = 1.0 - (lr + (1.0 - lr) * (l + r) / 2.0)

    offset, depth = inner_band(cloud.w1, config)
    prefix = np.zeros((rows, cols + 1), dtype=np.int64)
    prefix[:, 1:] = np.cumsum(cmb, axis=1)
    row_prefix = prefix[ys[:, 0]]

    def count(start: np.ndarray, stop: np.ndarray) -> np.ndarray:
        a = np.clip(start, 0, cols)
        b = np.clip(stop, 0, cols)
        hi = np.take_along_axis(row_prefix, np.maximum(a, b), axis=1)
        lo = np.take_along_axis(row_prefix, a, axis=1)
        return hi - lo

    inner = count(left + offset, left + offset + depth) + count(right - offset - depth + 1, right - offset + 1)
    w2p = np.clip(inner.sum(axis=0) / (2.0 * depth * h), 0.0, 1.0)
    return w1p, w2p


def weigh_all(cloud: ParticleCloud, cmb: BinaryMap, trust_height: int, config: ParticleConfig) -> np.ndarray:
    w1p, w2p = particle_scores(cloud, cmb, trust_height, config)
    return norm.pdf(w1p, 0.0, _W1_SIGMA) * norm.pdf(w2p, 0.0, _W2_SIGMA)


def weigh(particle: LaneParticle, cmb: BinaryMap, trust_height: int, config: ParticleConfig) -> float:
    return float(weigh_all(ParticleCloud.of([particle]), cmb, trust_height, config)[0])


def max_weight() -> float:
    return float(norm.pdf(0.0, 0.0, _W1_SIGMA) * norm.pdf(0.0, 0.0, _W2_SIGMA))


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices drawn with one uniform offset and N evenly spaced pointers."""
    n = weights.size
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.minimum(np.searchsorted(cumulative, positions, side="right"), n - 1)


def resample_and_estimate(
    cloud: ParticleCloud,
    weights: np.ndarray,
    rng: np.random.Generator,
    height: int,
    trust_height: int,
) -> tuple[ParticleCloud, LaneEstimate, bool]:
    """
    The estimate is the weighted mean taken before resampling. Returns the
    resampled cloud, the estimate and whether the weights had to be replaced
    by uniform ones (all zero or not finite).
    """
    weights = np.asarray(weights, dtype=np.float64)
    total = float(weights.sum())
    degenerate = not math.isfinite(total) or total <= 0.0
    if degenerate:
        logger.warning("All particle weights are zero; resampling uniformly")
        p = np.full(weights.size, 1.0 / weights.size)
    else:
        p = weights / total
    estimate = LaneEstimate(
        x1=cloud.x1,
        x2=float(p @ cloud.x2),
        x3=float(p @ cloud.x3),
        w1=cloud.w1,
        w2=float(p @ cloud.w2),
        height=height,
        trust_height=trust_height,
    )
    return cloud.take(systematic_resample(p, rng)), estimate, degenerate


class LaneCurvatureFilter:
    def __init__(self, config: ParticleConfig, height: int, rng: np.random.Generator) -> None:
        self.config = config
        self.height = height
        self.rng = rng
        self.cloud: ParticleCloud | None = None

    def reset(self) -> None:
        self.cloud = None

    def step(self, base: LaneBase, cmb: BinaryMap, trust_height: int) -> tuple[LaneEstimate, list[str]]:
        c = self.config
        if self.cloud is None:
            self.cloud = reset_filter(base, self.rng, c.count, c.init_sigma, self.height)
        predicted = predict(self.cloud, base, self.rng, c, self.height)
        if trust_height < c.min_trust_height:
            self.cloud = predicted
            estimate = LaneEstimate(
                x1=predicted.x1,
                x2=float(predicted.x2.mean()),
                x3=float(predicted.x3.mean()),
                w1=predicted.w1,
                w2=float(predicted.w2.mean()),
                height=self.height,
                trust_height=trust_height,
            )
            return estimate, ["trust_area_too_small"]
        weights = weigh_all(predicted, cmb, trust_height, c)
        self.cloud, estimate, degenerate = resample_and_estimate(predicted, weights, self.rng, self.height, trust_height)
        return estimate, ["degenerate_weights"] if degenerate else []
