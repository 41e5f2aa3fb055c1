"""Image quality metrics: PSNR, single-scale SSIM, feature distance, batch eval."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
import scipy.ndimage

from turbgen.imagebuf import Image, load_png
from turbgen.turbsim import gaussian_kernel

if TYPE_CHECKING:
    from turbgen.datagen import Manifest

# canonical single-scale SSIM configuration, dynamic range 1.0
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03

PSNR_MAX = math.inf


def _check_shapes(a: Image, b: Image) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"shape mismatch: {a.data.shape} vs {b.data.shape}")


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB with peak 1.0; identical images -> inf."""
    _check_shapes(a, b)
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return PSNR_MAX
    return 10.0 * math.log10(1.0 / mse)


def _window_means(arr: np.ndarray, weights: np.ndarray, radius: int) -> np.ndarray:
    """Gaussian-weighted window means at every valid (non-padded) position."""
    out = scipy.ndimage.correlate1d(arr, weights, axis=1, mode="constant")
    out = scipy.ndimage.correlate1d(out, weights, axis=0, mode="constant")
    return out[radius:-radius, radius:-radius]


def ssim(a: Image, b: Image) -> float:
    """Single-scale SSIM, 11x11 Gaussian window, valid positions only."""
    _check_shapes(a, b)
    radius = _SSIM_WINDOW // 2
    if a.height < _SSIM_WINDOW or a.width < _SSIM_WINDOW:
        raise ValueError(
            f"image {a.height}x{a.width} smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} SSIM window"
        )
    w = gaussian_kernel(_SSIM_SIGMA, radius).weights
    c1 = (_SSIM_K1) ** 2
    c2 = (_SSIM_K2) ** 2

    scores = []
    for ch in range(a.channels):
        x = a.data[:, :, ch]
        y = b.data[:, :, ch]
        mu_x = _window_means(x, w, radius)
        mu_y = _window_means(y, w, radius)
        xx = _window_means(x * x, w, radius) - mu_x * mu_x
        yy = _window_means(y * y, w, radius) - mu_y * mu_y
        xy = _window_means(x * y, w, radius) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


def feature_distance(a: Image, b: Image, extractor: Callable[[Image], Sequence[float]]) -> float:
    """Euclidean distance between the extractor's flat feature vectors."""
    _check_shapes(a, b)
    va = np.asarray(extractor(a), dtype=np.float64).ravel()
    vb = np.asarray(extractor(b), dtype=np.float64).ravel()
    if va.shape != vb.shape:
        raise ValueError(f"extractor output length mismatch: {va.size} vs {vb.size}")
    return float(np.linalg.norm(va - vb))


@dataclass
class MetricReport:
    """Per-item and mean PSNR/SSIM over a restored set.

    Items whose PSNR hit the infinite sentinel (exact match) are excluded
    from mean_psnr and listed in max_psnr_ids. Means are None when no item
    contributes.
    """

    count: int
    mean_psnr: float | None
    mean_ssim: float | None
    per_item: list[tuple[str, float, float]] = field(default_factory=list)
    max_psnr_ids: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"{'id':<32} {'psnr_db':>10} {'ssim':>8}"]
        for item_id, p, s in self.per_item:
            p_str = "MAX" if math.isinf(p) else f"{p:.4f}"
            lines.append(f"{item_id:<32} {p_str:>10} {s:>8.4f}")
        mp = "n/a" if self.mean_psnr is None else f"{self.mean_psnr:.4f}"
        ms = "n/a" if self.mean_ssim is None else f"{self.mean_ssim:.4f}"
        lines.append(f"{'mean':<32} {mp:>10} {ms:>8}")
        for err in self.errors:
            lines.append(f"# error: {err}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        items = [
            {"id": i, "psnr_db": ("MAX" if math.isinf(p) else p), "ssim": s}
            for i, p, s in self.per_item
        ]
        payload = {
            "summary": {
                "count": self.count,
                "mean_psnr_db": self.mean_psnr,
                "mean_ssim": self.mean_ssim,
                "max_psnr_ids": self.max_psnr_ids,
                "errors": self.errors,
            },
            "items": items,
        }
        return json.dumps(payload, indent=2) + "\n"


def build_report(per_item: list[tuple[str, float, float]], errors: list[str] | None = None) -> MetricReport:
    """Aggregate per-item scores into a report, excluding sentinel PSNRs from the mean."""
    errors = list(errors or [])
    max_ids = [i for i, p, _ in per_item if math.isinf(p)]
    finite_psnrs = [p for _, p, _ in per_item if not math.isinf(p)]
    ssims = [s for _, _, s in per_item]
    return MetricReport(
        count=len(per_item),
        mean_psnr=(sum(finite_psnrs) / len(finite_psnrs)) if finite_psnrs else None,
        mean_ssim=(sum(ssims) / len(ssims)) if ssims else None,
        per_item=list(per_item),
        max_psnr_ids=max_ids,
        errors=errors,
    )


def evaluate_pairs(manifest: "Manifest", restored_dir) -> MetricReport:
    """Score restored_dir/<id>.png against each row's clean image.

    Missing or mismatched restored images are recorded in report.errors and
    evaluation continues with the remaining rows. Rows are processed in
    manifest order, so the report is deterministic.
    """
    restored_dir = Path(restored_dir)
    per_item: list[tuple[str, float, float]] = []
    errors: list[str] = []
    for row in manifest.rows:
        restored_path = restored_dir / f"{row.id}.png"
        try:
            clean = load_png(row.clean_path)
            restored = load_png(restored_path)
            per_item.append((row.id, psnr(restored, clean), ssim(restored, clean)))
        except (OSError, ValueError) as exc:
            errors.append(f"{row.id}: {exc}")
    return build_report(per_item, errors)
