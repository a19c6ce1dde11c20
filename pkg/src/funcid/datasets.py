"""Labeled landscape-image datasets: generation, noise protocols, storage.

Generation realizes the high-level pipeline: per class and replicate an
instance is selected according to the learning regime, one image is
constructed with a fresh sample seed, and each split is shuffled in
lockstep with its labels.  Three regimes are supported:

  L1  one fixed instance per function,
  L2  a fixed pool of instances per function, cycled over replicates,
  L3  as L2 for train/val, but test images come from disjoint unseen
      instance seeds.

Datasets serialize to a little-endian binary container (magic ``LIMG``)
with a SHA-256 content digest, plus a JSON sidecar manifest recording the
spec, sizes, and every seed needed to regenerate the file bit-exactly.
"""

from __future__ import annotations

import enum
import hashlib
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import rng
from .encoder import EncoderConfig, ImageType, LandscapeImage, construct_image
from .suite import EvalCounter, Suite, list_functions, make_instance, problem


class Regime(enum.Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"


class NoiseKind(enum.Enum):
    NONE = "none"
    GAUSSIAN_HALF_MAX = "gaussian_half_max"
    UNIFORM_RANGE = "uniform_range"


class DatasetError(ValueError):
    """Invalid dataset specification or operation."""


class DatasetFormatError(RuntimeError):
    """Unreadable dataset file: bad magic, version, or truncation."""


class DigestMismatchError(DatasetFormatError):
    """Stored content digest does not match the file body."""


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = NoiseKind.NONE
    uniform_lo: float = 0.0
    uniform_hi: float = 0.0

    def __post_init__(self):
        if self.uniform_lo > self.uniform_hi:
            raise DatasetError(f"uniform_lo {self.uniform_lo} > uniform_hi {self.uniform_hi}")


@dataclass(frozen=True)
class DatasetSpec:
    suite: Suite
    dim: int
    encoder: EncoderConfig
    regime: Regime
    per_class_train: int
    per_class_val: int = 0
    per_class_test: int = 0
    instances_per_function: int = 1
    unseen_instances_per_function: int = 0
    master_seed: int = 0
    noise: NoiseSpec = NoiseSpec()

    def __post_init__(self):
        if self.per_class_train < 1:
            raise DatasetError("per-class training count must be >= 1")
        if min(self.per_class_val, self.per_class_test) < 0:
            raise DatasetError("split sizes cannot be negative")
        if self.encoder.dim != self.dim:
            raise DatasetError(f"encoder dim {self.encoder.dim} != dataset dim {self.dim}")
        if self.regime is Regime.L1 and self.instances_per_function != 1:
            raise DatasetError("L1 uses exactly one instance per function")
        if self.instances_per_function < 1:
            raise DatasetError("need at least one instance per function")
        if self.regime is Regime.L3 and self.unseen_instances_per_function < 1:
            raise DatasetError("L3 needs unseen instances for the test split")

    @property
    def class_count(self) -> int:
        return len(list_functions(self.suite))


@dataclass
class DatasetManifest:
    spec: DatasetSpec
    split: str
    size: int
    class_count: int
    instance_seeds: dict[int, list[int]]
    unseen_instance_seeds: dict[int, list[int]]
    image_seeds: list[int]
    noise_applied: list[str]
    digest: str

    def to_dict(self) -> dict:
        return {
            "spec": spec_to_dict(self.spec),
            "split": self.split,
            "size": self.size,
            "class_count": self.class_count,
            "instance_seeds": {str(k): v for k, v in self.instance_seeds.items()},
            "unseen_instance_seeds": {str(k): v for k, v in self.unseen_instance_seeds.items()},
            "image_seeds": self.image_seeds,
            "noise_applied": self.noise_applied,
            "digest": self.digest,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetManifest":
        return cls(
            spec=spec_from_dict(data["spec"]),
            split=data["split"],
            size=data["size"],
            class_count=data["class_count"],
            instance_seeds={int(k): list(v) for k, v in data["instance_seeds"].items()},
            unseen_instance_seeds={
                int(k): list(v) for k, v in data["unseen_instance_seeds"].items()
            },
            image_seeds=list(data["image_seeds"]),
            noise_applied=list(data["noise_applied"]),
            digest=data["digest"],
        )


@dataclass
class Dataset:
    images: list[LandscapeImage]
    labels: list[int]
    manifest: DatasetManifest

    def __len__(self) -> int:
        return len(self.images)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (n, M, M) float32 pixels and (n,) int64 labels."""
        m = self.manifest.spec.encoder.frame_size
        if not self.images:
            return np.zeros((0, m, m), dtype=np.float32), np.zeros(0, dtype=np.int64)
        pixels = np.stack([img.pixels for img in self.images])
        return pixels, np.asarray(self.labels, dtype=np.int64)


def spec_to_dict(spec: DatasetSpec) -> dict:
    return {
        "suite": spec.suite.value,
        "dim": spec.dim,
        "encoder": {
            "dim": spec.encoder.dim,
            "sample_size": spec.encoder.sample_size,
            "image_type": int(spec.encoder.image_type),
            "frame_size": spec.encoder.frame_size,
            "domain_map": spec.encoder.domain_map.value,
        },
        "regime": spec.regime.value,
        "per_class_train": spec.per_class_train,
        "per_class_val": spec.per_class_val,
        "per_class_test": spec.per_class_test,
        "instances_per_function": spec.instances_per_function,
        "unseen_instances_per_function": spec.unseen_instances_per_function,
        "master_seed": spec.master_seed,
        "noise": {
            "kind": spec.noise.kind.value,
            "uniform_lo": spec.noise.uniform_lo,
            "uniform_hi": spec.noise.uniform_hi,
        },
    }


def spec_from_dict(data: dict) -> DatasetSpec:
    from .encoder import DomainMap

    enc = data["encoder"]
    return DatasetSpec(
        suite=Suite(data["suite"]),
        dim=data["dim"],
        encoder=EncoderConfig(
            dim=enc["dim"],
            sample_size=enc["sample_size"],
            image_type=ImageType(enc["image_type"]),
            frame_size=enc["frame_size"],
            domain_map=DomainMap(enc["domain_map"]),
        ),
        regime=Regime(data["regime"]),
        per_class_train=data["per_class_train"],
        per_class_val=data["per_class_val"],
        per_class_test=data["per_class_test"],
        instances_per_function=data["instances_per_function"],
        unseen_instances_per_function=data["unseen_instances_per_function"],
        master_seed=data["master_seed"],
        noise=NoiseSpec(
            kind=NoiseKind(data["noise"]["kind"]),
            uniform_lo=data["noise"]["uniform_lo"],
            uniform_hi=data["noise"]["uniform_hi"],
        ),
    )


_SPLIT_TAGS = {"train": 0, "val": 1, "test": 2}


def instance_seed_table(spec: DatasetSpec) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
    """Per-class training and unseen instance seeds, derived from the master seed."""
    train: dict[int, list[int]] = {}
    unseen: dict[int, list[int]] = {}
    for prob in list_functions(spec.suite):
        k = prob.index
        train[k] = [
            rng.derive_seed(spec.master_seed, rng.INSTANCE_SEEDS, k, i)
            for i in range(spec.instances_per_function)
        ]
        unseen[k] = [
            rng.derive_seed(spec.master_seed, rng.UNSEEN_INSTANCE_SEEDS, k, i)
            for i in range(spec.unseen_instances_per_function)
        ]
    return train, unseen


def _instance_for(spec, split: str, replicate: int, seeds: list[int], unseen: list[int]) -> int:
    if spec.regime is Regime.L3 and split == "test":
        return unseen[replicate % len(unseen)]
    return seeds[replicate % len(seeds)]


def build_dataset(spec: DatasetSpec, jobs: int = 1) -> dict[str, Dataset]:
    """Generate the train/val/test datasets for ``spec``.

    Per class and replicate the regime picks an instance seed; every image
    draws fresh sample points from its own derived seed, so replicates of
    one instance differ.  Splits are generated independently (class balance
    is exact per split) and shuffled in lockstep with their labels.  Output
    is identical for any ``jobs`` value.
    """
    train_seeds, unseen_seeds = instance_seed_table(spec)
    if spec.regime is Regime.L3:
        overlap = {s for v in train_seeds.values() for s in v} & {
            s for v in unseen_seeds.values() for s in v
        }
        if overlap:
            raise DatasetError(f"unseen instance seeds collide with training seeds: {overlap}")

    counts = {
        "train": spec.per_class_train,
        "val": spec.per_class_val,
        "test": spec.per_class_test,
    }
    out: dict[str, Dataset] = {}
    instance_cache: dict[tuple, object] = {}
    for split, per_class in counts.items():
        tag = _SPLIT_TAGS[split]
        tasks = []
        for prob in list_functions(spec.suite):
            k = prob.index
            for ell in range(per_class):
                inst_seed = _instance_for(spec, split, ell, train_seeds[k], unseen_seeds[k])
                sample_seed = rng.derive_seed(spec.master_seed, rng.SAMPLES, tag, k, ell)
                key = (k, inst_seed)
                if key not in instance_cache:
                    instance_cache[key] = make_instance(prob, spec.dim, inst_seed)
                tasks.append((key, inst_seed, sample_seed))

        def _make(task):
            key, _inst_seed, sample_seed = task
            return construct_image(instance_cache[key], spec.encoder, sample_seed)

        if jobs > 1 and tasks:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                images = list(pool.map(_make, tasks))
        else:
            images = [_make(t) for t in tasks]
        labels = [img.label - 1 for img in images]
        image_seeds = [t[1] for t in tasks]

        images, labels, image_seeds = _shuffle_with_meta(
            images, labels, image_seeds, rng.derive_seed(spec.master_seed, rng.SHUFFLE, tag)
        )
        manifest = DatasetManifest(
            spec=spec,
            split=split,
            size=len(images),
            class_count=spec.class_count,
            instance_seeds=train_seeds,
            unseen_instance_seeds=unseen_seeds,
            image_seeds=image_seeds,
            noise_applied=[],
            digest=content_digest(images, labels),
        )
        ds = Dataset(images=images, labels=labels, manifest=manifest)
        if spec.noise.kind is NoiseKind.GAUSSIAN_HALF_MAX:
            ds = add_gaussian_noise(ds, rng.derive_seed(spec.master_seed, rng.NOISE, tag))
        elif spec.noise.kind is NoiseKind.UNIFORM_RANGE:
            ds = add_uniform_noise(
                ds,
                spec.noise.uniform_lo,
                spec.noise.uniform_hi,
                rng.derive_seed(spec.master_seed, rng.NOISE, tag),
            )
        out[split] = ds
    return out


def _fisher_yates(n: int, seed: int) -> np.ndarray:
    g = rng.substream(seed, rng.SHUFFLE)
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(g.integers(0, i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def shuffle_sync(images: list, labels: list, seed: int) -> tuple[list, list]:
    """Permute images and labels by the same seeded Fisher-Yates pass."""
    if len(images) != len(labels):
        raise DatasetError(f"length mismatch: {len(images)} images vs {len(labels)} labels")
    idx = _fisher_yates(len(images), seed)
    return [images[i] for i in idx], [labels[i] for i in idx]


def _shuffle_with_meta(images, labels, image_seeds, seed):
    idx = _fisher_yates(len(images), seed)
    return (
        [images[i] for i in idx],
        [labels[i] for i in idx],
        [image_seeds[i] for i in idx],
    )


def content_digest(images: list[LandscapeImage], labels: list[int]) -> str:
    """SHA-256 over the label/pixel byte stream, hex-encoded."""
    h = hashlib.sha256()
    for img, label in zip(images, labels):
        h.update(struct.pack("<H", label))
        h.update(np.ascontiguousarray(img.pixels, dtype="<f4").tobytes())
    return h.hexdigest()


def _with_new_pixels(ds: Dataset, new_pixels: list[np.ndarray], note: str) -> Dataset:
    images = [replace(img, pixels=pix) for img, pix in zip(ds.images, new_pixels)]
    labels = list(ds.labels)
    manifest = replace(
        ds.manifest,
        noise_applied=ds.manifest.noise_applied + [note],
        digest=content_digest(images, labels),
    )
    return Dataset(images=images, labels=labels, manifest=manifest)


def add_gaussian_noise(ds: Dataset, seed: int, amplitude: float | None = None) -> Dataset:
    """Additive Gaussian pixel noise with per-image sigma in [0, max/2].

    Each image draws its own amplitude u in [0,1) (overridable for tests);
    sigma = u * max(pixels)/2, clamped at zero for non-positive maxima.
    """
    new_pixels = []
    for i, img in enumerate(ds.images):
        g = rng.substream(seed, rng.NOISE, i)
        u = float(g.random()) if amplitude is None else amplitude
        sigma = max(float(img.pixels.max()), 0.0) / 2.0 * u if img.pixels.size else 0.0
        if sigma > 0.0:
            noisy = img.pixels.astype(np.float64) + g.normal(0.0, sigma, img.pixels.shape)
            new_pixels.append(noisy.astype(np.float32))
        else:
            new_pixels.append(img.pixels)
    return _with_new_pixels(ds, new_pixels, f"gaussian_half_max(seed={seed})")


def add_uniform_noise(ds: Dataset, lo: float, hi: float, seed: int) -> Dataset:
    """Additive i.i.d. uniform [lo, hi] noise on every pixel."""
    if lo > hi:
        raise DatasetError(f"uniform noise range [{lo}, {hi}] is inverted")
    new_pixels = []
    for i, img in enumerate(ds.images):
        g = rng.substream(seed, rng.NOISE, i)
        noisy = img.pixels.astype(np.float64) + g.uniform(lo, hi, img.pixels.shape)
        new_pixels.append(noisy.astype(np.float32))
    return _with_new_pixels(ds, new_pixels, f"uniform({lo},{hi},seed={seed})")


_MAGIC = b"LIMG"
_VERSION = 1


def save(ds: Dataset, path: str | Path) -> None:
    """Write the binary container and its JSON manifest sidecar."""
    path = Path(path)
    m = ds.manifest.spec.encoder.frame_size
    body = bytearray()
    body += _MAGIC
    body += struct.pack("<HHHQ", _VERSION, m, ds.manifest.class_count, len(ds.images))
    record_stream = bytearray()
    for img, label in zip(ds.images, ds.labels):
        record_stream += struct.pack("<H", label)
        record_stream += np.ascontiguousarray(img.pixels, dtype="<f4").tobytes()
    body += record_stream
    body += hashlib.sha256(bytes(record_stream)).digest()
    path.write_bytes(bytes(body))
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest_path.write_text(
        json.dumps(ds.manifest.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )


def load(path: str | Path) -> Dataset:
    """Read a dataset back, verifying structure and content digest.

    Pixels and labels round-trip bit-exactly.  Per-image query costs are a
    generation-time diagnostic and come back as zero counters.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 4 + 14 + 32:
        raise DatasetFormatError(f"{path}: truncated file ({len(raw)} bytes)")
    if raw[:4] != _MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {raw[:4]!r}")
    version, m, class_count, count = struct.unpack("<HHHQ", raw[4:18])
    if version != _VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    record_size = 2 + 4 * m * m
    expected = 18 + record_size * count + 32
    if len(raw) != expected:
        raise DatasetFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    record_stream = raw[18:-32]
    if hashlib.sha256(record_stream).digest() != raw[-32:]:
        raise DigestMismatchError(f"{path}: content digest mismatch")

    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest = DatasetManifest.from_dict(json.loads(manifest_path.read_text(encoding="utf-8")))

    images: list[LandscapeImage] = []
    labels: list[int] = []
    image_type = manifest.spec.encoder.image_type
    seeds = manifest.image_seeds or [0] * count
    for i in range(count):
        offset = i * record_size
        (label,) = struct.unpack_from("<H", record_stream, offset)
        pixels = np.frombuffer(
            record_stream, dtype="<f4", count=m * m, offset=offset + 2
        ).reshape(m, m)
        images.append(
            LandscapeImage(
                pixels=pixels.copy(),
                label=label + 1,
                instance_seed=seeds[i] if i < len(seeds) else 0,
                image_type=image_type,
                query_cost=EvalCounter(),
            )
        )
        labels.append(int(label))
    return Dataset(images=images, labels=labels, manifest=manifest)
