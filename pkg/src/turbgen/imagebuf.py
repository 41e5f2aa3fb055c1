"""Float image buffer with lossless 8-bit PNG I/O.

Pixels are floats in [0, 1] everywhere inside the pipeline; quantization to
8 bits happens only at the file boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


class ImageError(ValueError):
    """Invalid image data or unsupported file content."""


@dataclass(frozen=True)
class Image:
    """H x W x C raster of float samples in [0, 1], channel-interleaved.

    Immutable after construction; every operation that modifies pixels
    returns a new Image, so instances are safe to share across workers.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ImageError(f"image data must be HxWxC, got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ImageError(f"image must be at least 1x1, got {h}x{w}")
        if c not in (1, 3):
            raise ImageError(f"channel count must be 1 or 3, got {c}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def load_png(path) -> Image:
    """Load an 8-bit or 16-bit grayscale/RGB PNG, scaling samples to [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    with PILImage.open(path) as im:
        if im.format != "PNG":
            raise ImageError(f"unsupported format {im.format!r} (only PNG): {path}")
        mode = im.mode
        if mode == "L":
            arr = np.asarray(im, dtype=np.float64) / 255.0
        elif mode in ("I;16", "I;16B"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif mode == "I":
            # PIL promotes 16-bit gray PNGs to 32-bit int mode on some paths
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif mode == "RGB":
            arr = np.asarray(im, dtype=np.float64) / 255.0
        else:
            raise ImageError(
                f"unsupported channel layout {mode!r} (only grayscale or RGB): {path}"
            )
    return Image(arr)


def save_png(img: Image, path) -> None:
    """Write an 8-bit PNG; samples are clamped to [0, 1] and rounded half-up."""
    path = Path(path)
    arr = np.clip(img.data, 0.0, 1.0)
    # round-half-up, fixed convention (np.round would round half-to-even)
    q = np.floor(arr * 255.0 + 0.5).astype(np.uint8)
    if img.channels == 1:
        pil = PILImage.fromarray(q[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(q, mode="RGB")
    try:
        pil.save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"cannot write image file {path}: {exc}") from exc
