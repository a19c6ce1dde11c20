"""Landscape-image construction: the five square embeddings of sampled points.

A core image stacks N sample vectors tau = [x, f(x)] of length d' = d + 1.
The five layouts frame it into an M x M picture:

  Type-1  row = [x, y, y repeated to width M]; trailing rows repeat the
          zero-vector probe (translation witness).
  Type-2  row = tau tiled to width M, truncated; zero-probe rows likewise.
  Type-3  Type-1 rows, but trailing rows cycle 0, e1, ..., ed (rotation
          witnesses), truncated to the first M-N probes.
  Type-4  Type-2 row layout on the Type-3 probe cycle.
  Type-5  one flat stream: tau(0), tau(e1), then as many random sample
          vectors as fit in M*M slots (last one truncated), reshaped
          row-wise.

Pixels hold raw objective values as float32; normalization is left to
training time (`finalize_pixels`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .suite import EvalCounter, FunctionInstance, Suite, evaluate


class ImageType(enum.IntEnum):
    TYPE1 = 1
    TYPE2 = 2
    TYPE3 = 3
    TYPE4 = 4
    TYPE5 = 5


class DomainMap(enum.Enum):
    UNIT_CUBE = "unit_cube"
    AFFINE_TO_BBOB_BOX = "bbob_box"


class EncoderError(ValueError):
    """Capacity violation or invalid encoder input."""


@dataclass(frozen=True)
class EncoderConfig:
    dim: int
    sample_size: int
    image_type: ImageType = ImageType.TYPE1
    frame_size: int = 32
    domain_map: DomainMap = DomainMap.UNIT_CUBE

    def __post_init__(self):
        object.__setattr__(self, "image_type", ImageType(self.image_type))
        d, n, m = self.dim, self.sample_size, self.frame_size
        if d < 1 or n < 1 or m < 1:
            raise EncoderError(f"need dim, sample_size, frame_size >= 1, got {d}, {n}, {m}")
        if self.image_type is ImageType.TYPE5:
            if d + 1 > m * m:
                raise EncoderError(f"d'={d + 1} exceeds Type-5 capacity M*M={m * m}")
        else:
            if d + 1 > m:
                raise EncoderError(
                    f"d'={d + 1} exceeds frame width M={m} for {self.image_type.name}"
                )
            if n > m:
                raise EncoderError(f"N={n} sample rows do not fit in M={m} for Types 1-4")

    @property
    def d_prime(self) -> int:
        return self.dim + 1


@dataclass(frozen=True)
class LandscapeImage:
    """An M x M embedding of sampled points, tagged with its provenance."""

    pixels: np.ndarray
    label: int
    instance_seed: int
    image_type: ImageType
    query_cost: EvalCounter


def sample_points(
    d: int, n: int, seed: int, domain_map: DomainMap = DomainMap.UNIT_CUBE
) -> np.ndarray:
    """Draw n i.i.d. uniform points in [0,1)^d, optionally mapped to [-5,5)^d."""
    if d < 1 or n < 1:
        raise EncoderError(f"need d >= 1 and n >= 1, got {d}, {n}")
    points = rng.substream(seed, rng.SAMPLES).random((n, d))
    if domain_map is DomainMap.AFFINE_TO_BBOB_BOX:
        points = points * 10.0 - 5.0
    return points


def probe_vectors(d: int) -> np.ndarray:
    """The canonical probe list: zero vector, then e_1 .. e_d (rows)."""
    probes = np.zeros((d + 1, d))
    probes[1:] = np.eye(d)
    return probes


def _probe_row_sequence(cfg: EncoderConfig) -> list[int]:
    """Probe-list index queried by each probe row/segment, in display order."""
    m, n, dp = cfg.frame_size, cfg.sample_size, cfg.d_prime
    t = cfg.image_type
    if t in (ImageType.TYPE1, ImageType.TYPE2):
        return [0] * (m - n)
    if t in (ImageType.TYPE3, ImageType.TYPE4):
        return [i % dp for i in range(m - n)]
    # Type-5: zero always leads; e1 only if slots remain after tau(0).
    indices = [0]
    if m * m > dp:
        indices.append(1)
    return indices


def type5_sample_count(cfg: EncoderConfig) -> int:
    """Random sample vectors (full or truncated) that fit after the probes."""
    remaining = cfg.frame_size**2 - 2 * cfg.d_prime
    if remaining <= 0:
        return 0
    return -(-remaining // cfg.d_prime)


def construct_image(
    instance: FunctionInstance, cfg: EncoderConfig, sample_seed: int
) -> LandscapeImage:
    """Sample, evaluate (memoized), and lay out one landscape image.

    Types 1-4 use cfg.sample_size random points; Type-5 ignores it and
    draws exactly as many as fill the M*M stream.  The returned query_cost
    counts distinct and total objective calls for this image.
    """
    if cfg.dim != instance.dim:
        raise EncoderError(f"config dim {cfg.dim} != instance dim {instance.dim}")

    n_samples = (
        type5_sample_count(cfg)
        if cfg.image_type is ImageType.TYPE5
        else cfg.sample_size
    )
    if n_samples == 0:
        samples = np.zeros((0, cfg.dim))
    elif instance.problem.suite is Suite.DISCRETE_PB:
        # Bitstring suites sample uniform bitstrings; the unit-cube draw is
        # thresholded so the stream protocol stays shared across suites.
        samples = (sample_points(cfg.dim, n_samples, sample_seed) >= 0.5).astype(np.float64)
    else:
        samples = sample_points(cfg.dim, n_samples, sample_seed, cfg.domain_map)

    counter = EvalCounter()
    values = np.array([evaluate(instance, x, counter) for x in samples])

    # One evaluate call per displayed probe row; the memo keeps the distinct
    # count at the number of unique probe vectors.
    probes = probe_vectors(cfg.dim)
    probe_values = np.full(cfg.dim + 1, np.nan)
    for idx in _probe_row_sequence(cfg):
        probe_values[idx] = evaluate(instance, probes[idx], counter)

    encoder = _ENCODERS[cfg.image_type]
    pixels = encoder(samples, values, probe_values, cfg)
    if not np.all(np.isfinite(pixels)):
        raise EncoderError("landscape image contains non-finite pixels")

    return LandscapeImage(
        pixels=pixels.astype(np.float32),
        label=instance.problem.index,
        instance_seed=instance.instance_seed,
        image_type=cfg.image_type,
        query_cost=EvalCounter(counter.distinct_queries, counter.total_queries),
    )


def _value_replicated_row(vec: np.ndarray, value: float, m: int) -> np.ndarray:
    """[x, y, then y replicated out to width M]."""
    row = np.empty(m)
    row[: vec.size] = vec
    row[vec.size :] = value
    return row


def _tiled_row(vec: np.ndarray, value: float, m: int) -> np.ndarray:
    """tau repeated left-to-right, last copy truncated at width M."""
    tau = np.append(vec, value)
    reps = -(-m // tau.size)
    return np.tile(tau, reps)[:m]


def _frame(samples, values, probe_values, cfg, row_fn, probe_cycle: bool) -> np.ndarray:
    m, d = cfg.frame_size, cfg.dim
    probes = probe_vectors(d)
    pixels = np.empty((m, m))
    for j in range(min(len(samples), m)):
        pixels[j] = row_fn(samples[j], values[j], m)
    for j in range(len(samples), m):
        idx = (j - len(samples)) % (d + 1) if probe_cycle else 0
        pixels[j] = row_fn(probes[idx], probe_values[idx], m)
    return pixels


def encode_type1(samples, values, probe_values, cfg: EncoderConfig) -> np.ndarray:
    return _frame(samples, values, probe_values, cfg, _value_replicated_row, False)


def encode_type2(samples, values, probe_values, cfg: EncoderConfig) -> np.ndarray:
    return _frame(samples, values, probe_values, cfg, _tiled_row, False)


def encode_type3(samples, values, probe_values, cfg: EncoderConfig) -> np.ndarray:
    return _frame(samples, values, probe_values, cfg, _value_replicated_row, True)


def encode_type4(samples, values, probe_values, cfg: EncoderConfig) -> np.ndarray:
    return _frame(samples, values, probe_values, cfg, _tiled_row, True)


def encode_type5(samples, values, probe_values, cfg: EncoderConfig) -> np.ndarray:
    """Flat stream tau(0), tau(e1), tau(x1), ... reshaped row-wise to M x M."""
    m, d = cfg.frame_size, cfg.dim
    probes = probe_vectors(d)
    stream = np.empty(m * m)
    pos = 0
    vectors = [(probes[0], probe_values[0]), (probes[1], probe_values[1])] if d >= 1 else []
    vectors += [(samples[j], values[j]) for j in range(len(samples))]
    for vec, val in vectors:
        if pos >= stream.size:
            break
        tau = np.append(vec, val)
        take = min(tau.size, stream.size - pos)
        stream[pos : pos + take] = tau[:take]
        pos += take
    if pos != stream.size:
        raise EncoderError("Type-5 stream under-filled; not enough sample vectors")
    return stream.reshape(m, m)


_ENCODERS = {
    ImageType.TYPE1: encode_type1,
    ImageType.TYPE2: encode_type2,
    ImageType.TYPE3: encode_type3,
    ImageType.TYPE4: encode_type4,
    ImageType.TYPE5: encode_type5,
}


class PixelFinalize(enum.Enum):
    RAW = "raw"
    MIN_MAX_PER_IMAGE = "minmax"


def finalize_pixels(pixels: np.ndarray, mode: PixelFinalize) -> np.ndarray:
    """Identity, or per-image min-max to [0,1] (constant images map to 0)."""
    if not np.all(np.isfinite(pixels)):
        raise EncoderError("cannot finalize non-finite pixels")
    if mode is PixelFinalize.RAW:
        return pixels
    lo = pixels.min()
    span = pixels.max() - lo
    if span == 0.0:
        return np.zeros_like(pixels)
    return (pixels - lo) / span


def _to_gray_u8(pixels: np.ndarray) -> np.ndarray:
    scaled = finalize_pixels(np.asarray(pixels, dtype=np.float64), PixelFinalize.MIN_MAX_PER_IMAGE)
    return np.round(scaled * 255.0).astype(np.uint8)


def write_pgm(path, pixels: np.ndarray) -> None:
    """Binary PGM dump of one image, min-max scaled to 8-bit grayscale."""
    gray = _to_gray_u8(pixels)
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def write_png(path, pixels: np.ndarray) -> None:
    """PNG dump of one image (requires pillow)."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise EncoderError("PNG export needs pillow; install funcid[png] or use write_pgm") from exc
    Image.fromarray(_to_gray_u8(pixels), mode="L").save(path)


def with_sample_size(cfg: EncoderConfig, n: int) -> EncoderConfig:
    return replace(cfg, sample_size=n)
