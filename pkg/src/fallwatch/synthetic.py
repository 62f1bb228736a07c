"""Procedural test datasets: brightness pairs, posture silhouettes, replay reels.

The posture set stands in for a real fall dataset: a bright person-blob on a
textured background, lying low in the frame (fall) or upright (not fall), with
matched blob area so global brightness alone cannot separate the classes.
"""

from __future__ import annotations

import os

import numpy as np

from .data import LabeledSample
from .images import save_netpbm


def _to_rgb(gray: np.ndarray) -> np.ndarray:
    return np.repeat(np.clip(gray, 0.0, 1.0)[:, :, None], 3, axis=2).astype(np.float32)


def brightness_set(n: int = 200, size: int = 64, seed=0) -> list[LabeledSample]:
    """Uniformly bright (fall=1) vs dark (not_fall=0) images, alternating labels."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        label = i % 2
        base = rng.uniform(0.85, 0.95) if label else rng.uniform(0.05, 0.15)
        gray = base + rng.normal(0.0, 0.02, (size, size))
        samples.append(LabeledSample(f"synthetic://brightness/{i}", _to_rgb(gray), label))
    return samples


def posture_set(n: int = 250, size: int = 64, seed=0) -> list[LabeledSample]:
    """Standing vs lying silhouettes with equal blob area, alternating labels."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    samples = []
    for i in range(n):
        label = i % 2
        gray = rng.uniform(0.08, 0.22) + rng.normal(0.0, 0.04, (size, size))
        if label:  # lying near the floor
            rx = size * rng.uniform(0.24, 0.3)
            ry = size * rng.uniform(0.07, 0.1)
            cy = size * rng.uniform(0.72, 0.85)
        else:  # upright, mid-frame
            rx = size * rng.uniform(0.07, 0.1)
            ry = size * rng.uniform(0.24, 0.3)
            cy = size * rng.uniform(0.4, 0.6)
        cx = size * rng.uniform(0.3, 0.7)
        mask = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        gray[mask] = rng.uniform(0.8, 0.95)
        samples.append(LabeledSample(f"synthetic://posture/{i}", _to_rgb(gray), label))
    return samples


def write_netpbm_dataset(samples, root) -> None:
    """Materialize samples as fall/ and not_fall/ directories of P6 files."""
    root = os.fspath(root)
    for name in ("fall", "not_fall"):
        os.makedirs(os.path.join(root, name), exist_ok=True)
    counters = {0: 0, 1: 0}
    for sample in samples:
        sub = "fall" if sample.label == 1 else "not_fall"
        path = os.path.join(root, sub, f"img{counters[sample.label]:04d}.ppm")
        counters[sample.label] += 1
        with open(path, "wb") as fh:
            fh.write(save_netpbm(sample.image))


def scripted_frames(phases, size: int = 64, seed=0) -> list[np.ndarray]:
    """Build a replay reel from (count, brightness) phases.

    Each frame is a constant-brightness image plus per-frame speckle so that
    consecutive frames inside a phase differ only slightly while phase changes
    produce a large inter-frame difference.
    """
    rng = np.random.default_rng(seed)
    frames = []
    for count, level in phases:
        for _ in range(count):
            gray = level + rng.normal(0.0, 0.002, (size, size))
            frames.append(_to_rgb(gray))
    return frames


def write_frame_dir(frames, root) -> list[str]:
    """Write frames as numbered P6 files for directory replay; returns paths."""
    root = os.fspath(root)
    os.makedirs(root, exist_ok=True)
    paths = []
    for i, frame in enumerate(frames):
        path = os.path.join(root, f"frame{i:05d}.ppm")
        with open(path, "wb") as fh:
            fh.write(save_netpbm(frame))
        paths.append(path)
    return paths
