#!/usr/bin/env python3
"""Convert the digits bundled in the `mnist` npm package into gzipped IDX files.

The npm package (MIT, https://github.com/cazala/mnist) ships 10,000 MNIST
digits as per-class JSON arrays of 784 floats rounded to three decimals.
Rounding to 1/255 recovers the original bytes exactly.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/npm_mnist_to_idx.py package/src/digits data/mnist

Writes an 8,000-sample train split and a 2,000-sample test split, shuffled
with a fixed seed.
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path


def main(src: Path, dst: Path) -> None:
    samples = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        for i in range(len(flat) // 784):
            px = bytes(int(round(v * 255)) for v in flat[i * 784:(i + 1) * 784])
            samples.append((px, digit))
    random.Random(20240607).shuffle(samples)
    dst.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", samples[:8000]), ("t10k", samples[8000:10000])):
        with gzip.GzipFile(dst / f"{name}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
            f.write(struct.pack(">IIII", 0x803, len(part), 28, 28))
            for px, _ in part:
                f.write(px)
        with gzip.GzipFile(dst / f"{name}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
            f.write(struct.pack(">II", 0x801, len(part)))
            f.write(bytes(label for _, label in part))


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))
