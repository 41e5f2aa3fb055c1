import dataclasses
import filecmp
from pathlib import Path

import numpy as np
import pytest

from turbgen.datagen import (
    DatasetConfig,
    Manifest,
    derive_seed,
    generate_dataset,
    sample_params,
)
from turbgen.imagebuf import Image, save_png
from turbgen.turbsim import CompositionOrder, degrade, gaussian_blur


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(42, 7) == derive_seed(42, 7)

    def test_no_collisions_over_consecutive_indices(self):
        master = 0xDEADBEEF
        seeds = {derive_seed(master, i) for i in range(1_000_000)}
        assert len(seeds) == 1_000_000

    def test_master_seed_changes_most_outputs(self):
        a = [derive_seed(1, i) for i in range(10_000)]
        b = [derive_seed(2, i) for i in range(10_000)]
        changed = sum(x != y for x, y in zip(a, b))
        assert changed >= 9_900

    def test_fits_in_64_bits(self):
        for i in (0, 1, 2**63, 2**64 - 1):
            assert 0 <= derive_seed(i, i) < 2**64


class TestSampleParams:
    def test_singleton_choices_always_selected(self):
        config = DatasetConfig(m_choices=(3000,), blur_choices=(2.5,))
        rng = np.random.default_rng(0)
        for _ in range(20):
            p = sample_params(rng, config)
            assert p.m_points == 3000
            assert p.blur_sigma == 2.5

    def test_copies_fixed_fields(self):
        config = DatasetConfig(eta=0.2, patch_n=6, field_sigma=8.0, noise_sigma=0.01)
        p = sample_params(np.random.default_rng(0), config)
        assert (p.eta, p.patch_n, p.field_sigma, p.noise_sigma) == (0.2, 6, 8.0, 0.01)

    def test_deterministic_for_fixed_state(self):
        config = DatasetConfig()
        p1 = sample_params(np.random.default_rng(9), config)
        p2 = sample_params(np.random.default_rng(9), config)
        assert p1 == p2

    def test_choice_frequencies_near_uniform(self):
        config = DatasetConfig()
        rng = np.random.default_rng(123)
        draws = [sample_params(rng, config) for _ in range(10_000)]
        for choices, attr in ((config.m_choices, "m_points"), (config.blur_choices, "blur_sigma")):
            for value in choices:
                freq = sum(getattr(p, attr) == value for p in draws) / len(draws)
                assert abs(freq - 1 / len(choices)) < 0.05
        orders = sum(p.order is CompositionOrder.BLUR_THEN_WARP for p in draws) / len(draws)
        assert abs(orders - 0.5) < 0.05

    def test_empty_choices_rejected(self):
        with pytest.raises(ValueError):
            DatasetConfig(m_choices=())


def _write_inputs(directory: Path, count: int, size: int = 16) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    gen = np.random.default_rng(99)
    for i in range(count):
        img = gaussian_blur(Image(gen.random((size, size, 3))), 1.0)
        save_png(img, directory / f"in{i:03d}.png")


def _config(input_dir, output_dir, **kw):
    defaults = dict(
        master_seed=11,
        m_choices=(100, 300),
        blur_choices=(1.0, 2.0),
        image_size=(16, 16),
    )
    defaults.update(kw)
    return DatasetConfig(input_dir=input_dir, output_dir=output_dir, **defaults)


def _tree_bytes(root: Path) -> dict:
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*.png"))
    }


class TestGenerateDataset:
    def test_single_row_reproducible_standalone(self, tmp_path):
        _write_inputs(tmp_path / "in", 3)
        config = _config(tmp_path / "in", tmp_path / "out", limit=1)
        manifest = generate_dataset(config)
        assert len(manifest.rows) == 1
        row = manifest.rows[0]
        from turbgen.imagebuf import load_png

        clean = load_png(row.clean_path)
        quad = degrade(clean, row.params)
        redone = tmp_path / "redo.png"
        save_png(quad.distorted, redone)
        assert redone.read_bytes() == Path(row.distorted_path).read_bytes()

    def test_two_runs_identical_bytes(self, tmp_path):
        _write_inputs(tmp_path / "in", 4)
        m1 = generate_dataset(_config(tmp_path / "in", tmp_path / "out1"))
        m2 = generate_dataset(_config(tmp_path / "in", tmp_path / "out2"))
        assert _tree_bytes(tmp_path / "out1") == _tree_bytes(tmp_path / "out2")
        assert [r.params for r in m1.rows] == [r.params for r in m2.rows]

    def test_worker_count_invariance(self, tmp_path):
        _write_inputs(tmp_path / "in", 6)
        generate_dataset(_config(tmp_path / "in", tmp_path / "serial", workers=1))
        generate_dataset(_config(tmp_path / "in", tmp_path / "parallel", workers=4))
        assert _tree_bytes(tmp_path / "serial") == _tree_bytes(tmp_path / "parallel")

    def test_reentrant_after_deletion(self, tmp_path):
        import shutil

        _write_inputs(tmp_path / "in", 3)
        config = _config(tmp_path / "in", tmp_path / "out")
        generate_dataset(config)
        before = _tree_bytes(tmp_path / "out")
        shutil.rmtree(tmp_path / "out")
        generate_dataset(config)
        assert _tree_bytes(tmp_path / "out") == before

    def test_manifest_roundtrip(self, tmp_path):
        _write_inputs(tmp_path / "in", 3)
        config = _config(tmp_path / "in", tmp_path / "out")
        manifest = generate_dataset(config)
        loaded = Manifest.load(tmp_path / "out" / "manifest.json")
        assert [r.id for r in loaded.rows] == [r.id for r in manifest.rows]
        assert [r.params for r in loaded.rows] == [r.params for r in manifest.rows]
        for row in loaded.rows:
            for p in (row.clean_path, row.blurred_path, row.deformed_path, row.distorted_path):
                assert Path(p).is_file()

    def test_empty_input_rejected(self, tmp_path):
        (tmp_path / "in").mkdir()
        with pytest.raises(ValueError, match="no PNG inputs"):
            generate_dataset(_config(tmp_path / "in", tmp_path / "out"))

    def test_mismatched_size_rejected_but_generation_continues(self, tmp_path):
        _write_inputs(tmp_path / "in", 2)
        save_png(Image(np.zeros((20, 20, 1))), tmp_path / "in" / "zz_big.png")
        manifest = generate_dataset(_config(tmp_path / "in", tmp_path / "out"))
        assert len(manifest.rows) == 2
        assert len(manifest.errors) == 1
        assert "zz_big" in manifest.errors[0]

    def test_center_crop_flag(self, tmp_path):
        _write_inputs(tmp_path / "in", 1)
        save_png(Image(np.full((20, 20, 1), 0.5)), tmp_path / "in" / "zz_big.png")
        manifest = generate_dataset(
            _config(tmp_path / "in", tmp_path / "out", center_crop=True)
        )
        assert len(manifest.rows) == 2
        assert not manifest.errors

    def test_seeds_derive_from_master_and_index(self, tmp_path):
        _write_inputs(tmp_path / "in", 3)
        manifest = generate_dataset(_config(tmp_path / "in", tmp_path / "out"))
        for i, row in enumerate(manifest.rows):
            assert row.params.seed == derive_seed(11, i)

    def test_ids_unique(self, tmp_path):
        _write_inputs(tmp_path / "in", 5)
        manifest = generate_dataset(_config(tmp_path / "in", tmp_path / "out"))
        ids = [r.id for r in manifest.rows]
        assert len(set(ids)) == len(ids)
