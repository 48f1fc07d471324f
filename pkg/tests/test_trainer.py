import csv
import hashlib

import numpy as np
import pytest
import torch
import yaml

from conftest import make_image_dir
from pyramid_inpaint import checkpoint as ckpt
from pyramid_inpaint.config import TrainConfig
from pyramid_inpaint.exceptions import (DependencyError, InputError,
                                        TrainingDivergedError)
from pyramid_inpaint.inference import PyramidGenerators, infer_pyramid
from pyramid_inpaint.pyramid import box_downsample
from pyramid_inpaint.trainer import (_check_finite, build_level_bundle,
                                     load_level_bundle, train_all,
                                     train_level)


def tiny_config(tmp_path, **overrides):
    base = dict(dataset_root=str(tmp_path / "imgs"),
                checkpoint_dir=str(tmp_path / "ckpt"),
                base_resolution=32, level_count=2, batch_size=1,
                steps_per_level=3, seed=3, width_content=16,
                width_texture=16, log_every=1, sample_every=0,
                checkpoint_every=0)
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture
def trained(tmp_path):
    make_image_dir(tmp_path / "imgs", count=4, size=96, seed=0)
    config = tiny_config(tmp_path)
    results = train_all(config)
    return config, results


def file_hash(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestTrainAll:
    def test_degenerate_single_level_pyramid(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=2, size=64, seed=1)
        config = tiny_config(tmp_path, level_count=1, base_resolution=32)
        results = train_all(config)
        assert len(results) == 1
        assert ckpt.level_dir(config.checkpoint_dir, 0).is_dir()
        assert not ckpt.level_dir(config.checkpoint_dir, 1).exists()

    def test_two_levels_two_checkpoints(self, trained):
        config, results = trained
        assert len(results) == 2
        for level in (0, 1):
            d = ckpt.level_dir(config.checkpoint_dir, level)
            assert (d / "manifest.yaml").is_file()
            assert (d / "params.npz").is_file()
            assert (d / "training_log.csv").is_file()

    def test_manifest_contents(self, trained):
        config, _ = trained
        manifest = ckpt.read_manifest(config.checkpoint_dir, 1)
        assert manifest["format_version"] == 1
        assert manifest["level"] == 1
        assert manifest["scale_factor"] == 2
        assert manifest["steps_completed"] == 3
        assert manifest["seed"] == 3
        assert manifest["widths"] == {"content": 16, "texture": 16}
        assert manifest["loss_toggles"] == {"use_consistency": True,
                                            "two_stage": True}
        assert manifest["full_resolution"] == 64

    def test_resume_skips_completed_levels(self, trained):
        config, _ = trained
        blob = ckpt.level_dir(config.checkpoint_dir, 0) / "params.npz"
        before = file_hash(blob)
        results = train_all(config)
        assert all(r.get("skipped") for r in results)
        assert file_hash(blob) == before

    def test_resume_from_level_checkpoint_trains_rest(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=4, size=96, seed=0)
        config = tiny_config(tmp_path)
        train_level(0, config)
        blob = ckpt.level_dir(config.checkpoint_dir, 0) / "params.npz"
        before = file_hash(blob)
        results = train_all(config)
        assert results[0]["skipped"] and "skipped" not in results[1]
        assert file_hash(blob) == before

    def test_frozen_levels_bit_identical_after_higher_training(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=4, size=96, seed=0)
        config = tiny_config(tmp_path)
        train_level(0, config)
        arrays_before = ckpt.load_blob(config.checkpoint_dir, 0)
        train_level(1, config)
        arrays_after = ckpt.load_blob(config.checkpoint_dir, 0)
        assert set(arrays_before) == set(arrays_after)
        for key in arrays_before:
            np.testing.assert_array_equal(arrays_before[key],
                                          arrays_after[key])


class TestTrainLevel:
    def test_missing_lower_checkpoint_raises(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=2, size=64, seed=2)
        config = tiny_config(tmp_path)
        with pytest.raises(DependencyError):
            train_level(1, config)

    def test_level_outside_pyramid_raises(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=2, size=64, seed=2)
        config = tiny_config(tmp_path)
        with pytest.raises(DependencyError):
            train_level(5, config)

    def test_deterministic_step0_losses(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=4, size=96, seed=0)
        rows = []
        for run in ("a", "b"):
            config = tiny_config(tmp_path, steps_per_level=2,
                                 checkpoint_dir=str(tmp_path / f"ckpt_{run}"))
            train_level(0, config)
            log = ckpt.level_dir(config.checkpoint_dir, 0) / "training_log.csv"
            with open(log) as fh:
                rows.append(next(csv.DictReader(fh)))
        assert rows[0] == rows[1]

    def test_term_columns_logged(self, trained):
        config, _ = trained
        log = ckpt.level_dir(config.checkpoint_dir, 0) / "training_log.csv"
        with open(log) as fh:
            header = next(csv.reader(fh))
        assert {"step", "loss_d", "loss_g", "d_adv", "d_cons", "g_adv",
                "g_l1"} <= set(header)
        log1 = ckpt.level_dir(config.checkpoint_dir, 1) / "training_log.csv"
        with open(log1) as fh:
            header1 = next(csv.reader(fh))
        assert {"g_l1_refined", "g_perc_refined", "g_style_refined",
                "g_l1_sr", "g_perc_sr", "g_style_sr"} <= set(header1)

    def test_check_finite_raises(self):
        with pytest.raises(TrainingDivergedError):
            _check_finite(3, 0, loss_d=torch.tensor(float("nan")))
        with pytest.raises(TrainingDivergedError):
            _check_finite(3, 0, loss_g=torch.tensor(float("inf")))
        _check_finite(3, 0, loss=torch.tensor(1.0))

    def test_sample_grid_emitted(self, tmp_path):
        make_image_dir(tmp_path / "imgs", count=2, size=64, seed=4)
        config = tiny_config(tmp_path, steps_per_level=2, sample_every=1,
                             level_count=1)
        train_level(0, config)
        samples = list((ckpt.level_dir(config.checkpoint_dir, 0)
                        / "samples").glob("*.png"))
        assert len(samples) == 2


class TestCheckpointRoundTrip:
    def test_bundle_round_trip_bit_exact(self, trained):
        config, _ = trained
        for level in (0, 1):
            bundle = load_level_bundle(level, config)
            arrays = ckpt.load_blob(config.checkpoint_dir, level)
            state = bundle.generator.state_dict()
            for key, tensor in state.items():
                np.testing.assert_array_equal(arrays[f"generator/{key}"],
                                              tensor.numpy())
            assert bundle.steps_completed == 3
            # adam moments restored
            any_state = next(iter(bundle.opt_g.state.values()))
            assert "exp_avg" in any_state

    def test_save_load_infer_reproduces_outputs(self, trained):
        config, _ = trained
        gens_a = PyramidGenerators.load(config.checkpoint_dir)
        gens_b = PyramidGenerators.load(config.checkpoint_dir)
        x = torch.rand(3, 64, 64)
        m = torch.zeros(1, 64, 64)
        m[:, 16:48, 16:48] = 1.0
        ya, _ = infer_pyramid(x * (1 - m) + m, m, gens_a)
        yb, _ = infer_pyramid(x * (1 - m) + m, m, gens_b)
        assert torch.equal(ya, yb)

    def test_optimizer_state_resumes_bit_exact(self, trained):
        config, _ = trained
        a = load_level_bundle(0, config)
        b = load_level_bundle(0, config)
        for (na, pa), (nb, pb) in zip(a.generator.named_parameters(),
                                      b.generator.named_parameters()):
            assert na == nb
            sa, sb = a.opt_g.state.get(pa), b.opt_g.state.get(pb)
            if sa is not None:
                assert torch.equal(sa["exp_avg"], sb["exp_avg"])
                assert torch.equal(sa["exp_avg_sq"], sb["exp_avg_sq"])


class TestInferPyramid:
    def test_empty_mask_identity_at_every_level(self, trained):
        config, _ = trained
        gens = PyramidGenerators.load(config.checkpoint_dir)
        x = torch.rand(3, 64, 64)
        m = torch.zeros(1, 64, 64)
        y, inter = infer_pyramid(x, m, gens, return_intermediates=True)
        assert torch.equal(y, x)
        assert len(inter) == 2
        for i, result in enumerate(inter):
            expect = box_downsample(x, 2 ** (1 - i))
            assert torch.equal(result.y, expect)

    def test_known_pixels_pass_through(self, trained):
        config, _ = trained
        gens = PyramidGenerators.load(config.checkpoint_dir)
        rng = np.random.default_rng(0)
        x = torch.from_numpy(rng.random((3, 64, 64), dtype=np.float32))
        m = torch.from_numpy((rng.random((1, 64, 64)) > 0.7)
                             .astype(np.float32))
        z = x * (1 - m) + m
        y, _ = infer_pyramid(z, m, gens)
        known = (m == 0).expand_as(z)
        assert torch.equal(y[known], z[known])

    def test_missing_checkpoints_raise(self, tmp_path):
        with pytest.raises(DependencyError):
            PyramidGenerators.load(tmp_path / "nothing")

    def test_deterministic(self, trained):
        config, _ = trained
        gens = PyramidGenerators.load(config.checkpoint_dir)
        x = torch.rand(3, 64, 64)
        m = torch.zeros(1, 64, 64)
        m[:, :20, :20] = 1.0
        z = x * (1 - m) + m
        ya, _ = infer_pyramid(z, m, gens)
        yb, _ = infer_pyramid(z, m, gens)
        assert torch.equal(ya, yb)

    def test_five_level_chain_intermediates(self, tmp_path):
        from pyramid_inpaint.trainer import _manifest
        config = TrainConfig(dataset_root="unused",
                             checkpoint_dir=str(tmp_path / "ckpt"),
                             base_resolution=8, level_count=5,
                             width_content=8, width_texture=8, seed=0)
        for level in range(5):
            bundle = build_level_bundle(level, config)
            ckpt.save_level_checkpoint(
                config.checkpoint_dir, level, bundle.generator,
                bundle.discriminator,
                manifest=_manifest(level, config, 0))
        gens = PyramidGenerators.load(config.checkpoint_dir)
        assert gens.level_count == 5
        x = torch.rand(3, 128, 128)
        m = torch.zeros(1, 128, 128)
        m[:, 32:96, 32:96] = 1.0
        y, inter = infer_pyramid(x * (1 - m) + m, m, gens,
                                 return_intermediates=True)
        assert [tuple(r.y.shape[-2:]) for r in inter] == \
            [(8, 8), (16, 16), (32, 32), (64, 64), (128, 128)]
        assert inter[0].x_sr is None and inter[1].x_sr is not None
        assert y.shape == (3, 128, 128)


class TestConfig:
    def test_yaml_round_trip(self, tmp_path):
        config = tiny_config(tmp_path, steps_per_level=[5, 7])
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(config.to_dict()))
        loaded = TrainConfig.from_yaml(path)
        assert loaded == config
        assert loaded.steps_for_level(0) == 5
        assert loaded.steps_for_level(1) == 7
        assert loaded.steps_for_level(4) == 7

    def test_overrides(self, tmp_path):
        config = tiny_config(tmp_path)
        out = config.with_overrides(["seed=9", "loss.use_consistency=false",
                                     "batch_size=[2, 4]"])
        assert out.seed == 9
        assert out.loss.use_consistency is False
        assert out.batch_for_level(1) == 4

    def test_unknown_key_rejected(self, tmp_path):
        config = tiny_config(tmp_path)
        with pytest.raises(InputError):
            config.with_overrides(["bogus=1"])
        with pytest.raises(InputError):
            TrainConfig.from_dict({"bogus": 1})

    def test_full_resolution(self):
        config = TrainConfig(base_resolution=64, level_count=5)
        assert config.full_resolution == 1024

    def test_invalid_values_rejected(self):
        with pytest.raises(InputError):
            TrainConfig(level_count=0)
        with pytest.raises(InputError):
            TrainConfig(batch_size=0)


def test_build_level_bundle_shapes():
    config = TrainConfig(width_content=16, width_texture=16,
                         dataset_root="x", level_count=2)
    b0 = build_level_bundle(0, config)
    b1 = build_level_bundle(1, config)
    assert b0.level == 0 and b1.level == 1
    assert b0.opt_g.param_groups[0]["lr"] == 1e-4
    assert b0.opt_d.param_groups[0]["lr"] == 4e-4
    assert b0.opt_g.param_groups[0]["betas"] == (0.5, 0.999)
