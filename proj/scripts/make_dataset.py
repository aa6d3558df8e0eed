#!/usr/bin/env python3
"""Build the desk-scale digit dataset shipped under assets/digits16/.

Source images are the scikit-learn bundled handwritten digits (8x8, 10
classes).  Each base image is upscaled to 16x16 and expanded with seeded
shift/rotation augmentations.  Train and test splits come from disjoint
base images, so no augmented view of a test digit ever appears in
training.  Output files use the MNIST IDX format (big-endian, magic
0x00000803 for images and 0x00000801 for labels).

Deterministic: rerunning reproduces the shipped files byte for byte.
"""

import hashlib
import struct
from pathlib import Path

import numpy as np
from scipy import ndimage
from sklearn.datasets import load_digits

SEED = 20240801
TRAIN_AUGMENTS = 10   # identity + 9 perturbed views per base image
TEST_AUGMENTS = 6
OUT_DIR = Path(__file__).resolve().parent.parent / "assets" / "digits16"


def upscale(img8):
    """8x8 [0,16] -> 16x16 uint8 [0,255], bilinear."""
    big = ndimage.zoom(img8.astype(np.float64), 2.0, order=1)
    return np.clip(np.round(big * (255.0 / 16.0)), 0, 255).astype(np.uint8)


def perturb(img, rng):
    dx, dy = rng.integers(-1, 2, size=2)
    angle = rng.uniform(-8.0, 8.0)
    out = ndimage.rotate(img.astype(np.float64), angle, reshape=False, order=1)
    out = ndimage.shift(out, (dy, dx), order=0)
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def augment_set(bases, labels, copies, rng):
    images, out_labels = [], []
    for img, lab in zip(bases, labels):
        images.append(img)
        out_labels.append(lab)
        for _ in range(copies - 1):
            images.append(perturb(img, rng))
            out_labels.append(lab)
    order = rng.permutation(len(images))
    return [images[i] for i in order], [out_labels[i] for i in order]


def write_idx_images(path, images):
    with open(path, "wb") as f:
        n, rows, cols = len(images), images[0].shape[0], images[0].shape[1]
        f.write(struct.pack(">iiii", 0x00000803, n, rows, cols))
        for img in images:
            f.write(img.tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", 0x00000801, len(labels)))
        f.write(bytes(int(v) for v in labels))


def main():
    rng = np.random.default_rng(SEED)
    X, y = load_digits(return_X_y=True)
    X = X.reshape(-1, 8, 8)

    # Stratified 80/20 split of base images.
    train_idx, test_idx = [], []
    for cls in range(10):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        cut = int(round(len(idx) * 0.8))
        train_idx.extend(idx[:cut])
        test_idx.extend(idx[cut:])
    train_idx = np.array(sorted(train_idx))
    test_idx = np.array(sorted(test_idx))

    train_bases = [upscale(X[i]) for i in train_idx]
    test_bases = [upscale(X[i]) for i in test_idx]

    train_images, train_labels = augment_set(train_bases, y[train_idx], TRAIN_AUGMENTS, rng)
    test_images, test_labels = augment_set(test_bases, y[test_idx], TEST_AUGMENTS, rng)

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_idx_images(OUT_DIR / "train-images-idx3-ubyte", train_images)
    write_idx_labels(OUT_DIR / "train-labels-idx1-ubyte", train_labels)
    write_idx_images(OUT_DIR / "test-images-idx3-ubyte", test_images)
    write_idx_labels(OUT_DIR / "test-labels-idx1-ubyte", test_labels)

    for name in ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                 "test-images-idx3-ubyte", "test-labels-idx1-ubyte"):
        digest = hashlib.sha256((OUT_DIR / name).read_bytes()).hexdigest()[:16]
        print(f"{name}: sha256[:16]={digest}")
    print(f"train={len(train_images)} test={len(test_images)}")


if __name__ == "__main__":
    main()
