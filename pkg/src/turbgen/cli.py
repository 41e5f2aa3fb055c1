"""Command-line front door: degrade, gen-dataset, evaluate, viz-field.

Exit codes: 0 success, 1 usage error, 2 runtime error. All randomness is
controlled by --seed; there are no interactive prompts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from turbgen import datagen, metrics, turbsim
from turbgen.imagebuf import load_png, save_png
from turbgen.turbsim import CompositionOrder, DegradationParams

_ORDER_FLAGS = {
    "blur-warp": CompositionOrder.BLUR_THEN_WARP,
    "warp-blur": CompositionOrder.WARP_THEN_BLUR,
}


class _UsageError(SystemExit):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract is exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise _UsageError(1)


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="64-bit seed controlling all randomness (default 0)")
    p.add_argument("--eta", type=float, default=0.13, help="motion field strength (default 0.13)")
    p.add_argument("--patch-n", type=int, default=4, help="motion patch side in pixels (default 4)")
    p.add_argument("--field-sigma", type=float, default=16.0, help="patch smoothing sigma in pixels (default 16)")
    p.add_argument("--m-points", type=int, default=10000, help="number of motion patches (default 10000)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="turbgen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="degrade one image into its quad")
    p.add_argument("--input", required=True, help="clean input PNG")
    p.add_argument("--output-dir", required=True, help="directory for the four output PNGs")
    _add_param_flags(p)
    p.add_argument("--blur-sigma", type=float, default=2.0, help="Gaussian blur std in pixels (default 2)")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="additive noise std in sample units (default 0)")
    p.add_argument(
        "--order",
        choices=sorted(_ORDER_FLAGS) + ["random"],
        default="blur-warp",
        help="blur/warp composition order (default blur-warp)",
    )

    p = sub.add_parser("gen-dataset", help="degrade a directory of clean images")
    p.add_argument("--input-dir", help="directory of clean 112x112 PNGs")
    p.add_argument("--output-dir", help="dataset output directory")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--eta", type=float, help="motion field strength (default 0.13)")
    p.add_argument("--patch-n", type=int, help="motion patch side (default 4)")
    p.add_argument("--field-sigma", type=float, help="patch smoothing sigma (default 16)")
    p.add_argument("--m-choices", help="comma list of patch counts (default 1000,3000,7000,10000)")
    p.add_argument("--blur-choices", help="comma list of blur stds (default 1,2,3,4)")
    p.add_argument("--noise-sigma", type=float, help="additive noise std (default 0)")
    p.add_argument("--image-size", help="expected HxW, e.g. 112x112 (default 112x112)")
    p.add_argument("--center-crop", action="store_true", default=None, help="center-crop larger inputs instead of rejecting")
    p.add_argument("--limit", type=int, help="max number of inputs")
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")

    p = sub.add_parser("evaluate", help="score restored images against a manifest")
    p.add_argument("--manifest", required=True, help="manifest.json of the degraded dataset")
    p.add_argument("--restored-dir", required=True, help="directory of restored <id>.png files")
    p.add_argument("--report-out", help="write the JSON report here")

    p = sub.add_parser("viz-field", help="render a motion field's magnitude as PNG")
    p.add_argument("--output", required=True, help="output PNG path")
    p.add_argument("--width", type=int, default=112)
    p.add_argument("--height", type=int, default=112)
    _add_param_flags(p)

    return parser


def _cmd_degrade(args) -> int:
    order_flag = args.order
    if order_flag == "random":
        rng = np.random.default_rng(np.random.SeedSequence(entropy=args.seed, spawn_key=(3,)))
        order_flag = "blur-warp" if int(rng.integers(2)) == 0 else "warp-blur"
    params = DegradationParams(
        eta=args.eta,
        patch_n=args.patch_n,
        field_sigma=args.field_sigma,
        m_points=args.m_points,
        blur_sigma=args.blur_sigma,
        noise_sigma=args.noise_sigma,
        order=_ORDER_FLAGS[order_flag],
        seed=args.seed,
    )
    img = load_png(args.input)
    quad = turbsim.degrade(img, params)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = ("clean", "blurred", "deformed", "distorted")
    for name, image in zip(names, (quad.clean, quad.blurred, quad.deformed, quad.distorted)):
        save_png(image, out / f"{name}.png")
    print(
        "degraded {input}: seed={seed} eta={eta} patch_n={patch_n} field_sigma={field_sigma} "
        "m_points={m_points} blur_sigma={blur_sigma} noise_sigma={noise_sigma} order={order}".format(
            input=args.input,
            seed=params.seed,
            eta=params.eta,
            patch_n=params.patch_n,
            field_sigma=params.field_sigma,
            m_points=params.m_points,
            blur_sigma=params.blur_sigma,
            noise_sigma=params.noise_sigma,
            order=params.order.value,
        )
    )
    return 0


def _parse_size(text: str) -> tuple[int, int]:
    h, _, w = text.lower().partition("x")
    return int(h), int(w)


def _cmd_gen_dataset(args) -> int:
    # config file mirrors flag names one-to-one; explicit flags override
    values: dict = {}
    if args.config:
        values.update(json.loads(Path(args.config).read_text()))
    flag_map = {
        "input-dir": args.input_dir,
        "output-dir": args.output_dir,
        "seed": args.seed,
        "eta": args.eta,
        "patch-n": args.patch_n,
        "field-sigma": args.field_sigma,
        "m-choices": args.m_choices,
        "blur-choices": args.blur_choices,
        "noise-sigma": args.noise_sigma,
        "image-size": args.image_size,
        "center-crop": args.center_crop,
        "limit": args.limit,
        "workers": args.workers,
    }
    for key, val in flag_map.items():
        if val is not None:
            values[key] = val
    if "input-dir" not in values or "output-dir" not in values:
        print("error: --input-dir and --output-dir are required (flags or config file)", file=sys.stderr)
        return 1

    def _choices(v):
        if isinstance(v, str):
            return tuple(float(x) for x in v.split(","))
        return tuple(v)

    size = values.get("image-size", "112x112")
    if isinstance(size, str):
        size = _parse_size(size)
    config = datagen.DatasetConfig(
        input_dir=Path(values["input-dir"]),
        output_dir=Path(values["output-dir"]),
        master_seed=int(values.get("seed", 0)),
        eta=float(values.get("eta", 0.13)),
        patch_n=int(values.get("patch-n", 4)),
        field_sigma=float(values.get("field-sigma", 16.0)),
        m_choices=tuple(int(m) for m in _choices(values.get("m-choices", (1000, 3000, 7000, 10000)))),
        blur_choices=_choices(values.get("blur-choices", (1.0, 2.0, 3.0, 4.0))),
        noise_sigma=float(values.get("noise-sigma", 0.0)),
        image_size=tuple(size),
        limit=values.get("limit"),
        center_crop=bool(values.get("center-crop", False)),
        workers=int(values.get("workers", 1)),
    )
    manifest = datagen.generate_dataset(config)
    manifest_path = config.output_dir / "manifest.json"
    print(f"wrote {len(manifest.rows)} rows to {manifest_path}")
    for err in manifest.errors:
        print(f"skipped: {err}", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    manifest = datagen.Manifest.load(args.manifest)
    report = metrics.evaluate_pairs(manifest, args.restored_dir)
    if args.report_out:
        Path(args.report_out).write_text(report.to_json())
    print(report.to_text(), end="")
    if report.errors:
        for err in report.errors:
            print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


def _cmd_viz_field(args) -> int:
    params = DegradationParams(
        eta=args.eta,
        patch_n=args.patch_n,
        field_sigma=args.field_sigma,
        m_points=args.m_points,
        seed=args.seed,
    )
    f = turbsim.field_from_params(args.width, args.height, params)
    save_png(turbsim.visualize_field(f), args.output)
    print(f"wrote field visualization to {args.output}")
    return 0


_COMMANDS = {
    "degrade": _cmd_degrade,
    "gen-dataset": _cmd_gen_dataset,
    "evaluate": _cmd_evaluate,
    "viz-field": _cmd_viz_field,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
