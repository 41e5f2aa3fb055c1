"""Degradation operators: Gaussian blur, random motion fields, warping, noise.

A degraded observation is produced by composing a space-invariant Gaussian
blur with a random per-pixel deformation built from many small smoothed
noise patches, plus optional additive sensor noise. All randomness flows
from an explicit 64-bit seed, so every output is reproducible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage

from turbgen.imagebuf import Image

# labels for the per-image sub-streams derived from the master seed; adding a
# new consumer later must use a fresh label so existing outputs never change
_STREAM_FIELD = 0
_STREAM_NOISE = 1


class CompositionOrder(enum.Enum):
    """Order in which blur and deformation combine in the distorted image."""

    BLUR_THEN_WARP = "blur-warp"
    WARP_THEN_BLUR = "warp-blur"


@dataclass(frozen=True)
class VectorField:
    """Per-pixel 2-D displacement map, in pixels. A zero field is the identity."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        dx = np.asarray(self.dx, dtype=np.float64)
        dy = np.asarray(self.dy, dtype=np.float64)
        if dx.ndim != 2 or dx.shape != dy.shape:
            raise ValueError(f"dx/dy must be matching 2-D arrays, got {dx.shape} vs {dy.shape}")
        for arr in (dx, dy):
            arr.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dy", dy)

    @property
    def height(self) -> int:
        return self.dx.shape[0]

    @property
    def width(self) -> int:
        return self.dx.shape[1]


@dataclass(frozen=True)
class Kernel1D:
    """Symmetric normalized 1-D kernel with 2*radius+1 taps."""

    radius: int
    weights: np.ndarray


@dataclass(frozen=True)
class DegradationParams:
    """Everything needed to reproduce one degraded image bit-exactly."""

    eta: float = 0.13
    patch_n: int = 4
    field_sigma: float = 16.0
    m_points: int = 10000
    blur_sigma: float = 2.0
    noise_sigma: float = 0.0
    order: CompositionOrder = CompositionOrder.BLUR_THEN_WARP
    seed: int = 0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.patch_n < 1:
            raise ValueError("patch_n must be >= 1")
        if self.field_sigma <= 0:
            raise ValueError("field_sigma must be > 0")
        if self.m_points < 0:
            raise ValueError("m_points must be >= 0")
        if self.blur_sigma < 0:
            raise ValueError("blur_sigma must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class DegradedQuad:
    """The (clean, blurred-only, deformed-only, distorted) tuple for one image."""

    clean: Image
    blurred: Image
    deformed: Image
    distorted: Image
    params: DegradationParams


def gaussian_kernel(sigma: float, radius: int) -> Kernel1D:
    """Truncated Gaussian taps, renormalized to sum exactly to 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    w /= w.sum()
    w.setflags(write=False)
    return Kernel1D(radius=radius, weights=w)


def _blur_array(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of an HxWxC array with replicate padding.

    Convolution is applied to arr minus a reference sample and the offset is
    added back, so constant images are exact fixed points despite the kernel
    sum rounding; for non-constant images the difference is one ulp-scale
    offset well inside every stated tolerance.
    """
    radius = math.ceil(3.0 * sigma)
    k = gaussian_kernel(sigma, radius)
    offset = arr.flat[0]
    out = scipy.ndimage.convolve1d(arr - offset, k.weights, axis=1, mode="nearest")
    out = scipy.ndimage.convolve1d(out, k.weights, axis=0, mode="nearest")
    return out + offset


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Blur each channel independently; sigma == 0 is the identity."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    return Image(_blur_array(img.data, sigma))


def _patch_smoother(patch_n: int, field_sigma: float) -> np.ndarray:
    """1-D smoothing operator on a length-n patch as an n x n matrix.

    Encodes correlation with the truncated renormalized Gaussian under
    replicate padding, so patch smoothing reduces to S @ noise @ S.T.
    """
    radius = math.ceil(3.0 * field_sigma)
    w = gaussian_kernel(field_sigma, radius).weights
    s = np.zeros((patch_n, patch_n), dtype=np.float64)
    for i in range(patch_n):
        src = np.clip(i + np.arange(-radius, radius + 1), 0, patch_n - 1)
        np.add.at(s[i], src, w)
    return s


def _smooth_patches(noise: np.ndarray, smoother: np.ndarray) -> np.ndarray:
    """Apply the 2-D separable patch smoother to (..., n, n) noise blocks.

    S @ block @ S.T for every block, done as one matmul against kron(S, S)
    so large batches stay in BLAS.
    """
    n = smoother.shape[0]
    k2 = np.kron(smoother, smoother)
    shape = noise.shape
    flat = noise.reshape(-1, n * n)
    return (flat @ k2.T).reshape(shape)


def patch_field(patch_n: int, field_sigma: float, eta: float, rng: np.random.Generator) -> VectorField:
    """One NxN motion patch: strength-scaled Gaussian-smoothed white noise."""
    if patch_n < 1:
        raise ValueError("patch_n must be >= 1")
    noise = rng.standard_normal((2, patch_n, patch_n))
    s = _patch_smoother(patch_n, field_sigma)
    smoothed = eta * _smooth_patches(noise, s)
    return VectorField(dx=smoothed[0], dy=smoothed[1])


def accumulate_field(
    width: int, height: int, params: DegradationParams, rng: np.random.Generator
) -> VectorField:
    """Sum of m_points random patches dropped at uniform interior positions.

    Draw order is fixed (all patch corners first, then all noise blocks) so
    the vectorized construction is reproducible across versions.
    """
    n = params.patch_n
    if width < n or height < n:
        raise ValueError(
            f"frame {width}x{height} cannot contain a {n}x{n} patch"
        )
    m = params.m_points
    dx = np.zeros((height, width), dtype=np.float64)
    dy = np.zeros((height, width), dtype=np.float64)
    if m == 0:
        return VectorField(dx=dx, dy=dy)

    xs = rng.integers(0, width - n + 1, size=m)
    ys = rng.integers(0, height - n + 1, size=m)
    noise = rng.standard_normal((m, 2, n, n))
    s = _patch_smoother(n, params.field_sigma)
    smoothed = params.eta * _smooth_patches(noise, s)

    # scatter-add every patch; bincount over flat indices is much faster
    # than np.add.at and gives identical sums
    offsets = (np.arange(n)[:, None] * width + np.arange(n)[None, :]).ravel()
    flat = ((ys * width + xs)[:, None] + offsets[None, :]).ravel()
    size = height * width
    dx += np.bincount(flat, weights=smoothed[:, 0].ravel(), minlength=size).reshape(height, width)
    dy += np.bincount(flat, weights=smoothed[:, 1].ravel(), minlength=size).reshape(height, width)
    return VectorField(dx=dx, dy=dy)


def warp(img: Image, f: VectorField) -> Image:
    """Backward-warp with bilinear sampling; coordinates clamp at the border."""
    h, w = img.height, img.width
    if (f.height, f.width) != (h, w):
        raise ValueError(
            f"field {f.height}x{f.width} does not match image {h}x{w}"
        )
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    sx = np.clip(xx - f.dx, 0.0, w - 1.0)
    sy = np.clip(yy - f.dy, 0.0, h - 1.0)

    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    wx = (sx - x0)[:, :, None]
    wy = (sy - y0)[:, :, None]

    d = img.data
    top = d[y0, x0] * (1.0 - wx) + d[y0, x1] * wx
    bot = d[y1, x0] * (1.0 - wx) + d[y1, x1] * wx
    return Image(top * (1.0 - wy) + bot * wy)


def _stream(seed: int, label: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(label,)))


def field_from_params(width: int, height: int, params: DegradationParams) -> VectorField:
    """The exact motion field that degrade() uses for these params."""
    return accumulate_field(width, height, params, _stream(params.seed, _STREAM_FIELD))


def degrade(img: Image, params: DegradationParams) -> DegradedQuad:
    """Produce the full degraded quad for one clean image.

    The blur and the motion field are shared between the single-purpose
    images and the distorted composition; sensor noise comes from its own
    sub-stream so enabling it never perturbs the field.
    """
    if img.width < params.patch_n or img.height < params.patch_n:
        raise ValueError(
            f"image {img.height}x{img.width} smaller than patch size {params.patch_n}"
        )
    v = field_from_params(img.width, img.height, params)
    blurred = gaussian_blur(img, params.blur_sigma)
    deformed = warp(img, v)
    if params.order is CompositionOrder.BLUR_THEN_WARP:
        distorted = warp(blurred, v)
    else:
        distorted = gaussian_blur(deformed, params.blur_sigma)
    out = distorted.data
    if params.noise_sigma > 0:
        noise_rng = _stream(params.seed, _STREAM_NOISE)
        out = out + params.noise_sigma * noise_rng.standard_normal(out.shape)
        out = np.clip(out, 0.0, 1.0)
        distorted = Image(out)
    return DegradedQuad(clean=img, blurred=blurred, deformed=deformed, distorted=distorted, params=params)


def visualize_field(f: VectorField) -> Image:
    """Displacement magnitude as grayscale, max-normalized; zero field is black."""
    mag = np.hypot(f.dx, f.dy)
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    return Image(mag[:, :, np.newaxis])
