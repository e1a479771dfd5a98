#!/usr/bin/env python3
# Copyright 2026 The MPSL Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts the ~10k MNIST digits shipped in the npm `mnist` package into an
IDX train/test pair, for machines that cannot download the full dataset.

    npm pack mnist && tar xzf mnist-*.tgz
    tools/digits_proxy_to_idx.py package/src/digits data/digits-proxy

The first 80% of each class becomes the train split, the rest the test split.
"""
import json
import pathlib
import struct
import sys


def write_pair(out_dir, name, samples):
    images = out_dir / f"{name}-images-idx3-ubyte"
    labels = out_dir / f"{name}-labels-idx1-ubyte"
    with open(images, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(bytes(min(255, max(0, round(v * 255))) for v in pixels))
    with open(labels, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(samples)))
        f.write(bytes(label for _, label in samples))


def interleave(samples):
    by_class = [[s for s in samples if s[1] == d] for d in range(10)]
    out = []
    for k in range(max(len(c) for c in by_class)):
        out.extend(c[k] for c in by_class if k < len(c))
    return out


def main():
    if len(sys.argv) != 3:
        sys.exit("usage: digits_proxy_to_idx.py <digits-json-dir> <out-dir>")
    src = pathlib.Path(sys.argv[1])
    out = pathlib.Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train, test = [], []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        count = len(flat) // 784
        cut = (count * 4) // 5
        for k in range(count):
            sample = (flat[k * 784:(k + 1) * 784], digit)
            (train if k < cut else test).append(sample)
    # Interleave classes so any prefix is roughly balanced.
    train = interleave(train)
    test = interleave(test)
    write_pair(out, "train", train)
    write_pair(out, "t10k", test)
    print(f"wrote {len(train)} train / {len(test)} test samples to {out}")


if __name__ == "__main__":
    main()
