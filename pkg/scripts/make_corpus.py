#!/usr/bin/env python3
"""Build a 112x112 clean test corpus from scikit-image's bundled photos.

Whole-image resizes, flips and quadrant crops of each base photo, softened
slightly so their statistics resemble aligned low-resolution face crops.
Used by the acceptance suite and handy for CLI demos.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from turbgen.imagebuf import Image, save_png
from turbgen.turbsim import gaussian_blur

BASE_NAMES = [
    "astronaut",
    "camera",
    "cat",
    "chelsea",
    "clock",
    "coffee",
    "coins",
    "immunohistochemistry",
    "moon",
    "page",
    "retina",
    "rocket",
]

TARGET = 112
SOFTEN_SIGMA = 0.7


def _to_float(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.max() > 1.0:
        arr = arr / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.shape[2] == 4:
        arr = arr[:, :, :3]
    return arr


def _variants(arr: np.ndarray):
    h, w = arr.shape[:2]
    yield arr
    yield arr[:, ::-1]
    yield arr[::-1, :]
    yield arr[::-1, ::-1]
    yield np.rot90(arr)
    # quadrant crops
    yield arr[: h // 2, : w // 2]
    yield arr[: h // 2, w // 2 :]
    yield arr[h // 2 :, : w // 2]
    yield arr[h // 2 :, w // 2 :]
    yield arr[h // 4 : h // 4 + h // 2, w // 4 : w // 4 + w // 2]


def build_corpus(output_dir: Path, count: int = 112) -> list[Path]:
    from skimage import data as skdata
    from skimage.transform import resize

    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    index = 0
    for name in BASE_NAMES:
        base = _to_float(getattr(skdata, name)())
        for variant in _variants(base):
            if index >= count:
                return written
            r = resize(variant, (TARGET, TARGET, variant.shape[2]), anti_aliasing=True)
            img = gaussian_blur(Image(np.clip(r, 0.0, 1.0)), SOFTEN_SIGMA)
            path = output_dir / f"{index:04d}_{name}.png"
            save_png(img, path)
            written.append(path)
            index += 1
    return written


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", required=True)
    parser.add_argument("--count", type=int, default=112)
    args = parser.parse_args()
    written = build_corpus(Path(args.output_dir), args.count)
    print(f"wrote {len(written)} clean images to {args.output_dir}")


if __name__ == "__main__":
    main()
