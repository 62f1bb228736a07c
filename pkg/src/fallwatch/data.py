"""Dataset ingestion: directory/CSV manifests, stratified splits, sample loading."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, IngestionError, InputError
from .images import load_netpbm, resize_bilinear
from .model import FALL, NOT_FALL

LABEL_NAMES = {FALL: 1, NOT_FALL: 0}
IMAGE_SUFFIXES = (".ppm", ".pgm", ".pnm")


@dataclass
class LabeledSample:
    source_path: str
    image: np.ndarray  # (H, W, 3) in [0, 1]
    label: int  # fall=1, not_fall=0


@dataclass
class DatasetManifest:
    root: str
    entries: list = field(default_factory=list)  # (relative path, label) pairs
    class_counts: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)


def _finish(root: str, entries: list, problems: list) -> DatasetManifest:
    if problems:
        raise IngestionError("; ".join(problems))
    entries.sort(key=lambda e: e[0])
    counts = {FALL: 0, NOT_FALL: 0}
    for _, label in entries:
        counts[FALL if label == 1 else NOT_FALL] += 1
    if counts[FALL] == 0 or counts[NOT_FALL] == 0:
        raise IngestionError(f"both classes required, got counts {counts}")
    return DatasetManifest(root=root, entries=entries, class_counts=counts)


def load_manifest(root) -> DatasetManifest:
    """Scan `root` for a dataset.

    Either a `manifest.csv` of `path,label` lines (labels "fall"/"not_fall"),
    or `fall/` and `not_fall/` subdirectories of NetPBM files.  Entries come
    back lexicographically sorted by path; both classes must be present.
    """
    root = os.fspath(root)
    csv_path = os.path.join(root, "manifest.csv")
    entries: list = []
    problems: list = []
    if os.path.isfile(csv_path):
        seen = set()
        with open(csv_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.rsplit(",", 1)
                if len(parts) != 2:
                    problems.append(f"line {lineno}: expected 'path,label'")
                    continue
                path, label_name = parts[0].strip(), parts[1].strip()
                if label_name not in LABEL_NAMES:
                    problems.append(f"line {lineno}: unknown label {label_name!r}")
                    continue
                if path in seen:
                    problems.append(f"line {lineno}: duplicate path {path!r}")
                    continue
                seen.add(path)
                if not os.path.isfile(os.path.join(root, path)):
                    problems.append(f"line {lineno}: unreadable file {path!r}")
                    continue
                entries.append((path, LABEL_NAMES[label_name]))
        return _finish(root, entries, problems)

    found_dirs = False
    for class_name, label in LABEL_NAMES.items():
        class_dir = os.path.join(root, class_name)
        if not os.path.isdir(class_dir):
            continue
        found_dirs = True
        for name in os.listdir(class_dir):
            if name.lower().endswith(IMAGE_SUFFIXES):
                entries.append((os.path.join(class_name, name), label))
    if not found_dirs:
        raise IngestionError(f"{root}: no manifest.csv and no fall/ or not_fall/ directories")
    return _finish(root, entries, problems)


def stratified_split(
    manifest: DatasetManifest, val_fraction: float = 0.2, seed=42
) -> tuple[DatasetManifest, DatasetManifest]:
    """Seeded split preserving per-class proportions within one sample."""
    if not 0.0 < val_fraction < 1.0:
        raise InputError(f"val_fraction must be in (0, 1), got {val_fraction}")
    rng = np.random.default_rng(seed)
    train_entries, val_entries = [], []
    for label in (1, 0):
        group = [e for e in manifest.entries if e[1] == label]
        if len(group) < 2:
            raise InputError(f"class {label} has {len(group)} samples, need at least 2")
        order = rng.permutation(len(group))
        n_val = int(round(len(group) * val_fraction))
        for pos, idx in enumerate(order):
            (val_entries if pos < n_val else train_entries).append(group[idx])
    train_entries.sort(key=lambda e: e[0])
    val_entries.sort(key=lambda e: e[0])

    def sub(entries):
        counts = {FALL: sum(1 for _, y in entries if y == 1),
                  NOT_FALL: sum(1 for _, y in entries if y == 0)}
        return DatasetManifest(root=manifest.root, entries=entries, class_counts=counts)

    return sub(train_entries), sub(val_entries)


def load_samples(manifest: DatasetManifest, size: tuple = (64, 64)) -> list[LabeledSample]:
    """Materialize manifest entries: decode NetPBM, resize to the model input."""
    samples = []
    problems = []
    for rel_path, label in manifest.entries:
        full = os.path.join(manifest.root, rel_path)
        try:
            with open(full, "rb") as fh:
                image = load_netpbm(fh.read())
        except (OSError, FormatError) as exc:
            problems.append(f"{rel_path}: {exc}")
            continue
        if image.shape[:2] != tuple(size):
            image = resize_bilinear(image, *size)
        samples.append(LabeledSample(source_path=full, image=image, label=label))
    if problems:
        raise IngestionError("; ".join(problems))
    return samples


def interleave_classes(samples: list) -> list:
    """Alternate fall / not_fall samples (stable within each class).

    At the paper's tiny learning rate, class-balanced consecutive pairs keep
    small-batch gradient noise from swamping the learning signal; see the
    training notes in the README.
    """
    fall = [s for s in samples if s.label == 1]
    other = [s for s in samples if s.label == 0]
    out = []
    for pair in zip(fall, other):
        out.extend(pair)
    longer = fall if len(fall) > len(other) else other
    out.extend(longer[min(len(fall), len(other)):])
    return out
