"""Reproducible degraded-dataset generation with a JSON manifest.

Inputs are enumerated in sorted filename order; image i gets the seed
derive_seed(master_seed, i), so outputs are byte-identical across runs and
worker counts.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from turbgen.imagebuf import Image, load_png, save_png
from turbgen.turbsim import CompositionOrder, DegradationParams, degrade

_STREAM_PARAMS = 2  # sub-stream label for per-image parameter sampling

_SUBDIRS = ("clean", "blur", "deform", "distort")

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _mix64(z: int) -> int:
    """One round of the splitmix64 finalizer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-item seed: two splitmix64 rounds over master XOR index."""
    return _mix64(_mix64((master_seed ^ index) & _MASK64))


@dataclass(frozen=True)
class DatasetConfig:
    input_dir: Path = Path(".")
    output_dir: Path = Path("out")
    master_seed: int = 0
    eta: float = 0.13
    patch_n: int = 4
    field_sigma: float = 16.0
    m_choices: tuple[int, ...] = (1000, 3000, 7000, 10000)
    blur_choices: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    noise_sigma: float = 0.0
    image_size: tuple[int, int] = (112, 112)
    limit: int | None = None
    center_crop: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.m_choices or not self.blur_choices:
            raise ValueError("choice lists must be non-empty")
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "m_choices", tuple(int(m) for m in self.m_choices))
        object.__setattr__(self, "blur_choices", tuple(float(b) for b in self.blur_choices))
        object.__setattr__(self, "image_size", tuple(int(s) for s in self.image_size))


@dataclass(frozen=True)
class ManifestRow:
    id: str
    clean_path: Path
    blurred_path: Path
    deformed_path: Path
    distorted_path: Path
    params: DegradationParams


@dataclass
class Manifest:
    config: dict
    rows: list[ManifestRow] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def save(self, path) -> None:
        path = Path(path)
        base = path.parent
        rows = []
        for r in self.rows:
            p = r.params
            rows.append(
                {
                    "id": r.id,
                    "clean_path": _relativize(r.clean_path, base),
                    "blurred_path": _relativize(r.blurred_path, base),
                    "deformed_path": _relativize(r.deformed_path, base),
                    "distorted_path": _relativize(r.distorted_path, base),
                    "params": {
                        "eta": p.eta,
                        "patch_n": p.patch_n,
                        "field_sigma": p.field_sigma,
                        "m_points": p.m_points,
                        "blur_sigma": p.blur_sigma,
                        "noise_sigma": p.noise_sigma,
                        "order": p.order.value,
                        "seed": p.seed,
                    },
                }
            )
        payload = {"config": self.config, "errors": self.errors, "rows": rows}
        path.write_text(json.dumps(payload, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Manifest":
        path = Path(path)
        payload = json.loads(path.read_text())
        base = path.parent
        rows = []
        for r in payload["rows"]:
            p = r["params"]
            rows.append(
                ManifestRow(
                    id=r["id"],
                    clean_path=base / r["clean_path"],
                    blurred_path=base / r["blurred_path"],
                    deformed_path=base / r["deformed_path"],
                    distorted_path=base / r["distorted_path"],
                    params=DegradationParams(
                        eta=p["eta"],
                        patch_n=p["patch_n"],
                        field_sigma=p["field_sigma"],
                        m_points=p["m_points"],
                        blur_sigma=p["blur_sigma"],
                        noise_sigma=p["noise_sigma"],
                        order=CompositionOrder(p["order"]),
                        seed=p["seed"],
                    ),
                )
            )
        return cls(config=payload["config"], rows=rows, errors=payload.get("errors", []))


def _relativize(p: Path, base: Path) -> str:
    try:
        return Path(p).resolve().relative_to(base.resolve()).as_posix()
    except ValueError:
        return str(p)


def sample_params(rng: np.random.Generator, config: DatasetConfig) -> DegradationParams:
    """Uniformly pick m_points, blur_sigma and composition order from config."""
    m = config.m_choices[int(rng.integers(len(config.m_choices)))]
    blur = config.blur_choices[int(rng.integers(len(config.blur_choices)))]
    order = (
        CompositionOrder.BLUR_THEN_WARP
        if int(rng.integers(2)) == 0
        else CompositionOrder.WARP_THEN_BLUR
    )
    return DegradationParams(
        eta=config.eta,
        patch_n=config.patch_n,
        field_sigma=config.field_sigma,
        m_points=m,
        blur_sigma=blur,
        noise_sigma=config.noise_sigma,
        order=order,
        seed=0,
    )


def _params_for_index(config: DatasetConfig, index: int) -> DegradationParams:
    seed = derive_seed(config.master_seed, index)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(_STREAM_PARAMS,)))
    return dataclasses.replace(sample_params(rng, config), seed=seed)


def _center_crop(img: Image, size: tuple[int, int]) -> Image:
    h, w = size
    top = (img.height - h) // 2
    left = (img.width - w) // 2
    return Image(img.data[top : top + h, left : left + w])


def _process_one(args) -> tuple[str, dict | None, str | None]:
    """Worker task: load one input, degrade, write its four PNGs."""
    input_path, index, config = args
    input_path = Path(input_path)
    item_id = input_path.stem
    try:
        img = load_png(input_path)
        want_h, want_w = config.image_size
        if (img.height, img.width) != (want_h, want_w):
            if config.center_crop and img.height >= want_h and img.width >= want_w:
                img = _center_crop(img, (want_h, want_w))
            else:
                raise ValueError(
                    f"size {img.height}x{img.width} does not match configured {want_h}x{want_w}"
                )
        params = _params_for_index(config, index)
        quad = degrade(img, params)
        paths = {}
        for sub, image in zip(
            _SUBDIRS, (quad.clean, quad.blurred, quad.deformed, quad.distorted)
        ):
            out = config.output_dir / sub / f"{item_id}.png"
            save_png(image, out)
            paths[sub] = out
        return item_id, {"paths": paths, "params": params}, None
    except (OSError, ValueError) as exc:
        return item_id, None, f"{item_id}: {exc}"


def generate_dataset(config: DatasetConfig) -> Manifest:
    """Degrade every PNG in input_dir and write quads plus manifest.json.

    Work is partitioned per image; each task derives its own random stream
    from (master_seed, index), so results do not depend on worker count.
    """
    inputs = sorted(config.input_dir.glob("*.png"))
    if config.limit is not None:
        inputs = inputs[: config.limit]
    if not inputs:
        raise ValueError(f"no PNG inputs found in {config.input_dir}")

    config.output_dir.mkdir(parents=True, exist_ok=True)
    for sub in _SUBDIRS:
        (config.output_dir / sub).mkdir(exist_ok=True)

    tasks = [(str(p), i, config) for i, p in enumerate(inputs)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_process_one, tasks))
    else:
        results = [_process_one(t) for t in tasks]

    config_echo = dataclasses.asdict(config)
    config_echo["input_dir"] = str(config.input_dir)
    config_echo["output_dir"] = str(config.output_dir)
    # execution detail, not dataset identity: identical configs must yield
    # identical manifests regardless of parallelism
    del config_echo["workers"]
    manifest = Manifest(config=config_echo)
    for item_id, ok, err in results:
        if err is not None:
            manifest.errors.append(err)
            continue
        paths = ok["paths"]
        manifest.rows.append(
            ManifestRow(
                id=item_id,
                clean_path=paths["clean"],
                blurred_path=paths["blur"],
                deformed_path=paths["deform"],
                distorted_path=paths["distort"],
                params=ok["params"],
            )
        )
    manifest.save(config.output_dir / "manifest.json")
    return manifest
