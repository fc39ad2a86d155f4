"""Shared fixture builders for the CLI and acceptance tests."""

import json
import struct
from pathlib import Path

import numpy as np

from sgdstop.numerics import RngState


def idx_bytes(magic: int, dims, payload: bytes) -> bytes:
    head = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in dims)
    return head + payload


def _digit_images(gen, labels):
    """28x28 uint8 images: class 1 lights the top-left quadrant, class 8 the
    bottom-right, so the two classes are linearly separable after centering."""
    n = len(labels)
    imgs = gen.integers(0, 20, size=(n, 28, 28), dtype=np.uint8)
    for i, y in enumerate(labels):
        if y == 1:
            imgs[i, :14, :14] = gen.integers(180, 256, size=(14, 14), dtype=np.uint8)
        elif y == 8:
            imgs[i, 14:, 14:] = gen.integers(180, 256, size=(14, 14), dtype=np.uint8)
    return imgs


def write_mnist_style_fixture(dirpath: Path, n_train: int = 400, n_test: int = 100, seed: int = 97):
    """Write four IDX files shaped like the MNIST pairs and return their paths."""
    dirpath.mkdir(parents=True, exist_ok=True)
    gen = RngState(seed).generator()
    paths = {}
    for split, n in (("train", n_train), ("test", n_test)):
        labels = gen.choice([1, 8, 3], size=n, p=[0.45, 0.45, 0.1]).astype(np.uint8)
        imgs = _digit_images(gen, labels)
        img_path = dirpath / f"{split}-images-idx3-ubyte"
        lab_path = dirpath / f"{split}-labels-idx1-ubyte"
        img_path.write_bytes(idx_bytes(0x00000803, (n, 28, 28), imgs.tobytes()))
        lab_path.write_bytes(idx_bytes(0x00000801, (n,), labels.tobytes()))
        paths[f"{split}_images"] = str(img_path)
        paths[f"{split}_labels"] = str(lab_path)
    return paths


def write_config(path: Path, values: dict) -> str:
    path.write_text(json.dumps(values))
    return str(path)
