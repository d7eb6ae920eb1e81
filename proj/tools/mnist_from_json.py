#!/usr/bin/env python3
"""Build MNIST IDX files from a per-digit JSON dump.

Input: a directory holding 0.json .. 9.json, each {"data": [<flat pixels>]}
with pixel values in [0,1] and 784 values per image (the layout shipped by
the npm `mnist` package). Output: the four standard IDX files
(train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
t10k-labels-idx1-ubyte) with a per-class train/test split.

Usage:
  python3 tools/mnist_from_json.py --digits <dir> --out data/mnist [--test-frac 0.2]
"""

import argparse
import json
import os
import struct


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(min(255, max(0, round(v * 255))) for v in img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--digits", required=True, help="directory with 0.json .. 9.json")
    ap.add_argument("--out", required=True, help="output directory for IDX files")
    ap.add_argument("--test-frac", type=float, default=0.2)
    args = ap.parse_args()

    per_class = []
    for d in range(10):
        with open(os.path.join(args.digits, f"{d}.json")) as f:
            flat = json.load(f)["data"]
        n = len(flat) // 784
        per_class.append([flat[i * 784:(i + 1) * 784] for i in range(n)])
        print(f"digit {d}: {n} samples")

    train, test = [], []
    for d, imgs in enumerate(per_class):
        cut = int(round(len(imgs) * (1.0 - args.test_frac)))
        train.extend((img, d) for img in imgs[:cut])
        test.extend((img, d) for img in imgs[cut:])

    # Round-robin interleave by class so file order is not class-sorted.
    def interleave(pairs):
        by_class = [[] for _ in range(10)]
        for img, d in pairs:
            by_class[d].append((img, d))
        out = []
        i = 0
        while any(by_class):
            if by_class[i % 10]:
                out.append(by_class[i % 10].pop(0))
            i += 1
            if i > 10 * (len(pairs) + 10):
                break
        return out

    train = interleave(train)
    test = interleave(test)

    os.makedirs(args.out, exist_ok=True)
    write_idx_images(os.path.join(args.out, "train-images-idx3-ubyte"), [p[0] for p in train])
    write_idx_labels(os.path.join(args.out, "train-labels-idx1-ubyte"), [p[1] for p in train])
    write_idx_images(os.path.join(args.out, "t10k-images-idx3-ubyte"), [p[0] for p in test])
    write_idx_labels(os.path.join(args.out, "t10k-labels-idx1-ubyte"), [p[1] for p in test])
    print(f"wrote {len(train)} train / {len(test)} test samples to {args.out}")


if __name__ == "__main__":
    main()
