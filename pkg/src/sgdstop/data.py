"""Data generation, folding, centering, and dataset parsers.

Folding: a labeled pair (zeta, y) with y in {0, 1} maps to the single vector
xi = (2y - 1)(zeta - offset).  A homogeneous linear classifier theta then
classifies the original point correctly exactly when xi . theta > 0 (a
margin of exactly 0 counts incorrect), so both classes can be trained and
scored through one folded stream.

Centering follows a fixed protocol: from the first n labeled samples of a
stream, estimate the per-class means, set the offset to their midpoint, and
estimate the per-sample noise scale as

    sigma2_tilde = mean_j | zeta_j - mean_{class of j} |^2,

whose expectation is sigma^2 d for isotropic class noise.  The step size
actually run is then effective_step(alpha_tilde, sigma2_tilde) =
alpha_tilde / sigma2_tilde, which makes one nominal alpha_tilde comparable
across noise scales and datasets.

Synthetic generators (two-component Gaussian mixture, heavy-tailed
Student-t2 mixture) and binary dataset readers (IDX tensors, CIFAR-10
batches, CSV) all feed the same folding pipeline.  The parsers are total:
any byte string either parses or raises a typed ParseError subclass, never
anything else.

Samplers and streams here are iterators.  Synthetic ones are infinite and
draw through a numpy Generator in documented block sizes, so a fixed
(seed, stream) pair reproduces the exact sequence; dataset streams shuffle
once per epoch with the stream's own generator and simply end when their
epoch budget runs out.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .numerics import RngState, standard_normals

__all__ = [
    "LabeledPoint",
    "CenteringStats",
    "Dataset",
    "ParseError",
    "IdxError",
    "IdxBadMagic",
    "IdxTruncated",
    "IdxDimOverflow",
    "Cifar10Error",
    "CsvError",
    "fold",
    "fold_dataset",
    "gaussian_mixture_sampler",
    "student_t2_mixture_sampler",
    "folded_gaussian_stream",
    "folded_stream",
    "dataset_stream",
    "estimate_centering",
    "effective_step",
    "load_idx",
    "load_cifar10_batch",
    "load_csv_points",
    "make_binary_task",
    "accuracy_on_set",
]

_BLOCK = 256  # draws per batch in the synthetic streams


@dataclass(frozen=True)
class LabeledPoint:
    """A feature vector with a binary class label."""

    y: int
    zeta: np.ndarray

    def __post_init__(self) -> None:
        if self.y not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.y}")
        zeta = np.asarray(self.zeta, dtype=float)
        if zeta.ndim != 1:
            raise ValueError("zeta must be a 1-D vector")
        object.__setattr__(self, "zeta", zeta)


@dataclass(frozen=True)
class CenteringStats:
    """Per-class means, their midpoint offset, and the residual scale."""

    mean0: np.ndarray
    mean1: np.ndarray
    offset: np.ndarray
    sigma2_tilde: float
    n_used: int


@dataclass(frozen=True)
class Dataset:
    """A finite list of binary labeled points with a common dimension."""

    points: tuple[LabeledPoint, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("dataset must be nonempty")
        d = self.points[0].zeta.shape[0]
        for p in self.points:
            if p.zeta.shape[0] != d:
                raise ValueError("all points must share one dimension")
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def d(self) -> int:
        return self.points[0].zeta.shape[0]

    def __len__(self) -> int:
        return len(self.points)


def fold(point: LabeledPoint, offset: np.ndarray) -> np.ndarray:
    """xi = (2y - 1)(zeta - offset)."""
    offset = np.asarray(offset, dtype=float)
    if offset.shape != point.zeta.shape:
        raise ValueError(
            f"offset shape {offset.shape} != point shape {point.zeta.shape}"
        )
    return (2 * point.y - 1) * (point.zeta - offset)


def fold_dataset(dataset: Dataset, offset: np.ndarray) -> np.ndarray:
    """All folded vectors of a dataset as an (n, d) matrix, in order."""
    return np.stack([fold(p, offset) for p in dataset.points])


def _materialize(rng: RngState | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngState):
        return rng.generator()
    return rng


def gaussian_mixture_sampler(
    mu0: np.ndarray,
    mu1: np.ndarray,
    sigma: float,
    rng: RngState | np.random.Generator,
) -> Iterator[LabeledPoint]:
    """Fair two-component Gaussian mixture: y ~ Bernoulli(1/2), zeta ~
    N(mu_y, sigma^2 I_d).

    Draws in blocks of 256 points: first the 256 label coins (one uniform
    each, y = 1 iff u < 1/2), then the 256 d feature normals.
    """
    mu0 = np.asarray(mu0, dtype=float)
    mu1 = np.asarray(mu1, dtype=float)
    if mu0.shape != mu1.shape or mu0.ndim != 1:
        raise ValueError("mu0 and mu1 must be 1-D vectors of equal dimension")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    gen = _materialize(rng)
    d = mu0.shape[0]
    means = np.stack([mu0, mu1])
    while True:
        ys = (gen.random(_BLOCK) < 0.5).astype(int)
        noise = standard_normals(gen, _BLOCK * d).reshape(_BLOCK, d)
        block = means[ys] + sigma * noise
        for i in range(_BLOCK):
            yield LabeledPoint(int(ys[i]), block[i])


def student_t2_mixture_sampler(
    beta: float, d: int, rng: RngState | np.random.Generator
) -> Iterator[LabeledPoint]:
    """Heavy-tailed mixture: entries are beta * (Student-t, 2 dof); class 1
    additionally has 1 added to its first coordinate.

    One uniform per coin, then d uniforms per point for the t2 entries
    (inverse CDF), in blocks of 256 points.
    """
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if d <= 0:
        raise ValueError(f"d must be positive, got {d}")
    gen = _materialize(rng)
    while True:
        ys = (gen.random(_BLOCK) < 0.5).astype(int)
        u = 1.0 - gen.random(_BLOCK * d)
        with np.errstate(divide="ignore"):
            t = (2.0 * u - 1.0) / np.sqrt(2.0 * u * (1.0 - u))
        block = beta * t.reshape(_BLOCK, d)
        block[:, 0] += ys
        for i in range(_BLOCK):
            yield LabeledPoint(int(ys[i]), block[i])


def folded_gaussian_stream(
    mu: np.ndarray, sigma: float, rng: RngState | np.random.Generator
) -> Iterator[np.ndarray]:
    """Infinite stream of xi ~ N(mu, sigma^2 I_d), already folded.

    256 d normals per block; sigma = 0 still draws them so streams stay
    aligned across sigma values.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1 or mu.size == 0:
        raise ValueError("mu must be a nonempty 1-D vector")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    gen = _materialize(rng)
    d = mu.shape[0]
    while True:
        noise = standard_normals(gen, _BLOCK * d).reshape(_BLOCK, d)
        block = mu + sigma * noise if sigma > 0.0 else np.broadcast_to(mu, (_BLOCK, d))
        for i in range(_BLOCK):
            yield block[i]


def folded_stream(
    points: Iterable[LabeledPoint], offset: np.ndarray
) -> Iterator[np.ndarray]:
    """Fold each labeled point of an iterable/stream against a fixed offset."""
    offset = np.asarray(offset, dtype=float)
    for p in points:
        yield (2 * p.y - 1) * (p.zeta - offset)


def dataset_stream(
    dataset: Dataset,
    offset: np.ndarray,
    rng: RngState | np.random.Generator,
    epochs: int | None = 1,
) -> Iterator[np.ndarray]:
    """Folded pass(es) over a dataset, reshuffled each epoch.

    Ends after ``epochs`` full passes (the engine reports downstream runs
    that outlive it as exhausted); ``epochs=None`` cycles forever.
    """
    if epochs is not None and epochs < 1:
        raise ValueError(f"epochs must be >= 1 or None, got {epochs}")
    gen = _materialize(rng)
    folded = fold_dataset(dataset, offset)
    n = folded.shape[0]
    done = 0
    while epochs is None or done < epochs:
        order = gen.permutation(n)
        for i in order:
            yield folded[i]
        done += 1


def estimate_centering(
    points: Iterator[LabeledPoint] | Iterable[LabeledPoint], n: int = 100
) -> CenteringStats:
    """Centering protocol on the first n points of a labeled stream.

    If one class is absent among the first n, a second batch of n is drawn
    from the same stream and the estimate uses all 2n; a class still absent
    then is an error.  sigma2_tilde is the mean squared residual norm
    against the estimated class means (0.0 for degenerate noise-free
    samples; see effective_step for how that is floored).
    """
    if n < 2:
        raise ValueError(f"need n >= 2 centering samples, got {n}")
    it = iter(points)
    batch = _take(it, n)
    if not _both_classes(batch):
        batch += _take(it, n)
    if not _both_classes(batch):
        raise ValueError(
            f"one class absent among the first {len(batch)} centering samples"
        )
    z = np.stack([p.zeta for p in batch])
    y = np.array([p.y for p in batch])
    mean0 = z[y == 0].mean(axis=0)
    mean1 = z[y == 1].mean(axis=0)
    resid = z - np.where(y[:, None] == 0, mean0, mean1)
    sigma2 = float(np.mean(np.sum(resid * resid, axis=1)))
    return CenteringStats(
        mean0=mean0,
        mean1=mean1,
        offset=0.5 * (mean0 + mean1),
        sigma2_tilde=sigma2,
        n_used=len(batch),
    )


def _take(it: Iterator[LabeledPoint], n: int) -> list[LabeledPoint]:
    out = []
    for _ in range(n):
        try:
            out.append(next(it))
        except StopIteration:
            break
    return out


def _both_classes(batch: Sequence[LabeledPoint]) -> bool:
    labels = {p.y for p in batch}
    return labels == {0, 1}


# sigma2_tilde below this is treated as exactly degenerate (noise-free data)
_SIGMA2_FLOOR = 1e-12


def effective_step(alpha_tilde: float, sigma2_tilde: float) -> float:
    """alpha = alpha_tilde / sigma2_tilde, flooring sigma2_tilde at 1e-12.

    The floor keeps noise-free datasets (residual exactly 0) runnable;
    negative or non-finite inputs are rejected.
    """
    if not (alpha_tilde > 0) or not np.isfinite(alpha_tilde):
        raise ValueError(f"alpha_tilde must be positive, got {alpha_tilde}")
    if not (sigma2_tilde >= 0) or not np.isfinite(sigma2_tilde):
        raise ValueError(f"sigma2_tilde must be >= 0, got {sigma2_tilde}")
    return alpha_tilde / max(sigma2_tilde, _SIGMA2_FLOOR)


# ---------------------------------------------------------------------------
# parsers


class ParseError(ValueError):
    """Base for all dataset parsing failures."""


class IdxError(ParseError):
    """Base for IDX tensor-file failures."""


class IdxBadMagic(IdxError):
    pass


class IdxTruncated(IdxError):
    """Header or payload shorter (or longer) than the dimensions declare."""


class IdxDimOverflow(IdxError):
    """Declared dimensions multiply out to an implausible element count."""


class Cifar10Error(ParseError):
    pass


class CsvError(ParseError):
    pass


_IDX_MAGIC_VECTOR = 0x00000801  # unsigned-byte payload, 1 dimension
_IDX_MAGIC_TENSOR3 = 0x00000803  # unsigned-byte payload, 3 dimensions
_IDX_MAX_ELEMENTS = 1 << 40


def load_idx(data: bytes) -> np.ndarray:
    """Parse an IDX unsigned-byte tensor (big-endian header).

    Accepts the 1-D label form (magic 0x00000801) and the 3-D image form
    (0x00000803); returns a uint8 array of the declared shape.  Total:
    every input either parses or raises an IdxError subclass.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("load_idx expects bytes")
    data = bytes(data)
    if len(data) < 4:
        raise IdxTruncated(f"{len(data)} bytes is too short for a magic number")
    (magic,) = struct.unpack(">I", data[:4])
    if magic == _IDX_MAGIC_VECTOR:
        ndim = 1
    elif magic == _IDX_MAGIC_TENSOR3:
        ndim = 3
    else:
        raise IdxBadMagic(f"magic 0x{magic:08X} is not an unsigned-byte 1-D/3-D file")
    header_len = 4 + 4 * ndim
    if len(data) < header_len:
        raise IdxTruncated(
            f"header needs {header_len} bytes for {ndim} dims, got {len(data)}"
        )
    dims = struct.unpack(f">{ndim}I", data[4:header_len])
    count = 1
    for dim in dims:
        count *= dim
        if count > _IDX_MAX_ELEMENTS:
            raise IdxDimOverflow(f"dims {dims} exceed {_IDX_MAX_ELEMENTS} elements")
    payload = data[header_len:]
    if len(payload) != count:
        raise IdxTruncated(
            f"dims {dims} declare {count} bytes of payload, got {len(payload)}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


_CIFAR_RECORD = 3073  # 1 label byte + 32*32*3 pixel bytes
_CIFAR_PIXELS = 3072


def load_cifar10_batch(data: bytes, scale: bool = True) -> list[tuple[int, np.ndarray]]:
    """Parse one CIFAR-10 binary batch into (label, feature-vector) records.

    Records are 3073 bytes: one label in 0..9, then 3072 pixel bytes kept
    in file order as a flat float vector.  ``scale`` divides pixels by 255
    (the default); labels stay 10-class here, pairing into a binary task is
    a separate step.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("load_cifar10_batch expects bytes")
    data = bytes(data)
    if len(data) == 0 or len(data) % _CIFAR_RECORD != 0:
        raise Cifar10Error(
            f"batch length {len(data)} is not a positive multiple of {_CIFAR_RECORD}"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, _CIFAR_RECORD)
    labels = raw[:, 0]
    bad = labels > 9
    if np.any(bad):
        raise Cifar10Error(
            f"record {int(np.argmax(bad))} has label {int(labels[np.argmax(bad)])} > 9"
        )
    pixels = raw[:, 1:].astype(float)
    if scale:
        pixels /= 255.0
    return [(int(labels[i]), pixels[i]) for i in range(raw.shape[0])]


def load_csv_points(text: str) -> list[tuple[int, np.ndarray]]:
    """Parse a CSV dataset: header row, numeric features, final integer label."""
    reader = csv.reader(io.StringIO(text))
    try:
        rows = list(reader)
    except csv.Error as e:
        raise CsvError(f"malformed CSV: {e}") from None
    if len(rows) < 2:
        raise CsvError("need a header row and at least one data row")
    width = len(rows[0])
    if width < 2:
        raise CsvError("need at least one feature column plus the label column")
    out: list[tuple[int, np.ndarray]] = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise CsvError(f"row {i} has {len(row)} fields, header has {width}")
        try:
            feats = np.array([float(v) for v in row[:-1]])
            label = int(row[-1])
        except ValueError:
            raise CsvError(f"row {i} has a non-numeric field") from None
        if not np.all(np.isfinite(feats)):
            raise CsvError(f"row {i} has a non-finite feature")
        out.append((label, feats))
    return out


def make_binary_task(
    points: Sequence[tuple[int, np.ndarray]], class_a: int, class_b: int
) -> Dataset:
    """Filter a multi-class point list down to {class_a -> 0, class_b -> 1}.

    Order-preserving; both classes must be present and distinct.
    """
    if class_a == class_b:
        raise ValueError(f"classes must differ, got {class_a} twice")
    kept = []
    for label, vec in points:
        if label == class_a:
            kept.append(LabeledPoint(0, vec))
        elif label == class_b:
            kept.append(LabeledPoint(1, vec))
    labels = {p.y for p in kept}
    if labels != {0, 1}:
        missing = class_a if 0 not in labels else class_b
        raise ValueError(f"class {missing} has no samples")
    return Dataset(tuple(kept))


def accuracy_on_set(theta: np.ndarray, folded: np.ndarray) -> float:
    """Fraction of folded samples with margin strictly above 0."""
    theta = np.asarray(theta, dtype=float)
    folded = np.asarray(folded, dtype=float)
    if folded.ndim != 2 or folded.shape[0] == 0:
        raise ValueError("folded must be a nonempty (n, d) matrix")
    if folded.shape[1] != theta.shape[0]:
        raise ValueError(
            f"dimension mismatch: folded {folded.shape}, theta {theta.shape}"
        )
    return float(np.mean(folded @ theta > 0.0))
