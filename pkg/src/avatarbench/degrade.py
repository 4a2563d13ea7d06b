"""Seeded corruption operators for the Cartesian joint stream.

Four artifacts model a camera-based capture path: sample-and-hold framerate
reduction, payload delay, per-joint Bernoulli occlusion (positions zeroed and
flagged invalid), and additive zero-mean Gaussian position noise. Operators
preserve stream length, framerate, and timestamps; at neutral parameters each
one returns a bit-identical copy of its input.

`degrade_stream` composes them in the fixed order framerate -> delay ->
occlusion -> noise (capture, transport, detection failure, measurement
error). The stochastic stages draw from deterministic children of the config
seed: occlusion uses SeedSequence(seed, spawn_key=(2,)), noise spawn_key=(3,).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .streams import CartesianStream

_OCCLUSION_KEY = 2
_NOISE_KEY = 3


@dataclass(frozen=True)
class DegradationConfig:
    """One grid point of the artifact sweep."""

    delay_frames: int = 0
    fps_ratio: int = 1
    noise_std: float = 0.0      # meters
    occlusion_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.delay_frames < 0:
            raise ValueError("delay_frames must be >= 0")
        if self.fps_ratio < 1:
            raise ValueError("fps_ratio must be >= 1")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")
        if not 0.0 <= self.occlusion_prob <= 1.0:
            raise ValueError("occlusion_prob must lie in [0, 1]")

    @property
    def is_neutral(self) -> bool:
        return (
            self.delay_frames == 0
            and self.fps_ratio == 1
            and self.noise_std == 0.0
            and self.occlusion_prob == 0.0
        )


def operator_seed(seed: int, key: int) -> np.random.SeedSequence:
    """Deterministic per-operator child seed used by `degrade_stream`."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(key,))


def apply_delay(stream: CartesianStream, frames: int) -> CartesianStream:
    """Stale payload: output frame t carries input frame max(t - frames, 0).

    Timestamps are unchanged; the first `frames` outputs hold the first
    input sample rather than fabricating pre-capture data.
    """
    if frames < 0:
        raise ValueError("delay must be >= 0")
    if frames == 0 or len(stream) == 0:
        return stream.replace()
    src = np.maximum(np.arange(len(stream)) - frames, 0)
    return stream.replace(positions=stream.positions[src].copy(), valid=stream.valid[src].copy())


def apply_framerate_ratio(stream: CartesianStream, fps_ratio: int) -> CartesianStream:
    """Sample-and-hold rate reduction: frame t carries input floor(t/r)*r.

    Length and the nominal framerate stay unchanged; the payload becomes a
    staircase with treads of `fps_ratio` frames.
    """
    if fps_ratio < 1:
        raise ValueError("fps_ratio must be >= 1")
    if fps_ratio == 1 or len(stream) == 0:
        return stream.replace()
    src = (np.arange(len(stream)) // fps_ratio) * fps_ratio
    return stream.replace(positions=stream.positions[src].copy(), valid=stream.valid[src].copy())


def apply_occlusion(stream: CartesianStream, prob: float, seed=0) -> CartesianStream:
    """Independently zero each joint-frame with probability `prob`.

    Occluded entries get position (0, 0, 0) and valid=False, so consumers
    can distinguish "missing" from "at the origin" when they want to.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueError("occlusion probability must lie in [0, 1]")
    if prob == 0.0 or len(stream) == 0:
        return stream.replace()
    rng = np.random.default_rng(seed)
    occluded = rng.random(stream.valid.shape) < prob
    valid = stream.valid & ~occluded
    positions = np.where(occluded[..., None], 0.0, stream.positions)
    return stream.replace(positions=positions, valid=valid)


def apply_noise(stream: CartesianStream, std: float, seed=0) -> CartesianStream:
    """Add i.i.d. N(0, std^2) meters to every coordinate of every valid joint."""
    if std < 0.0:
        raise ValueError("noise std must be >= 0")
    if std == 0.0 or len(stream) == 0:
        return stream.replace()
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, std, size=stream.positions.shape)
    positions = np.where(stream.valid[..., None], stream.positions + noise, 0.0)
    return stream.replace(positions=positions)


def degrade_stream(stream: CartesianStream, config: DegradationConfig) -> CartesianStream:
    """Apply the composed artifact model for one grid point."""
    out = apply_framerate_ratio(stream, config.fps_ratio)
    out = apply_delay(out, config.delay_frames)
    out = apply_occlusion(out, config.occlusion_prob, operator_seed(config.seed, _OCCLUSION_KEY))
    out = apply_noise(out, config.noise_std, operator_seed(config.seed, _NOISE_KEY))
    return out


class DegradationPipeline(BaseEstimator, TransformerMixin):
    """Composed artifact model as a stateless scikit-learn transformer.

    Parameters mirror DegradationConfig, so the pipeline slots into
    `sklearn.model_selection.ParameterGrid` sweeps and `clone()` calls.
    """

    def __init__(self, delay_frames=0, fps_ratio=1, noise_std=0.0, occlusion_prob=0.0, seed=0):
        self.delay_frames = delay_frames
        self.fps_ratio = fps_ratio
        self.noise_std = noise_std
        self.occlusion_prob = occlusion_prob
        self.seed = seed

    def fit(self, X=None, y=None):
        return self

    def transform(self, stream: CartesianStream) -> CartesianStream:
        return degrade_stream(stream, self.config())

    def config(self) -> DegradationConfig:
        return DegradationConfig(
            delay_frames=self.delay_frames,
            fps_ratio=self.fps_ratio,
            noise_std=self.noise_std,
            occlusion_prob=self.occlusion_prob,
            seed=self.seed,
        )
