import numpy as np
import torch
import yaml
from PIL import Image

from conftest import make_image_dir
from pyramid_inpaint.cli import main


def write_config(tmp_path, **overrides):
    cfg = dict(dataset_root=str(tmp_path / "imgs"),
               checkpoint_dir=str(tmp_path / "ckpt"),
               base_resolution=32, level_count=2, batch_size=1,
               steps_per_level=2, seed=1, width_content=16,
               width_texture=16, sample_every=0, checkpoint_every=0)
    cfg.update(overrides)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def test_train_infer_eval_round_trip(tmp_path, capsys):
    make_image_dir(tmp_path / "imgs", count=3, size=96, seed=0)
    config = write_config(tmp_path)

    assert main(["train", "--config", str(config)]) == 0
    out = capsys.readouterr().out
    assert "level 0" in out and "level 1" in out

    # resume: both levels skipped
    assert main(["train", "--config", str(config)]) == 0
    assert "skipped" in capsys.readouterr().out

    image_path = tmp_path / "imgs" / "img_00.png"
    mask = np.zeros((96, 96), np.uint8)
    mask[20:60, 20:60] = 255
    mask_path = tmp_path / "mask.png"
    Image.fromarray(mask, "L").save(mask_path)
    out_path = tmp_path / "result.png"
    assert main(["infer", "--image", str(image_path), "--mask",
                 str(mask_path), "--checkpoints", str(tmp_path / "ckpt"),
                 "--out", str(out_path), "--intermediates-dir",
                 str(tmp_path / "inter")]) == 0
    assert out_path.is_file()
    assert (tmp_path / "inter" / "level_0.png").is_file()
    assert (tmp_path / "inter" / "level_1.png").is_file()
    # fully convolutional: native 96x96 input runs through the 2-level stack
    result = np.asarray(Image.open(out_path))
    assert result.shape == (96, 96, 3)
    original = np.asarray(Image.open(image_path))
    known = mask < 128
    np.testing.assert_array_equal(result[known], original[known])
    assert not np.array_equal(result[20:60, 20:60], original[20:60, 20:60])

    report = tmp_path / "report"
    assert main(["eval", "--dataset", str(tmp_path / "imgs"),
                 "--checkpoints", str(tmp_path / "ckpt"),
                 "--resolution", "64", "--mask", "center",
                 "--out", str(report)]) == 0
    assert report.with_suffix(".txt").is_file()
    assert report.with_suffix(".csv").is_file()
    assert report.with_suffix(".json").is_file()
    text = report.with_suffix(".txt").read_text()
    assert "center" in text and "Mask" in text


def test_train_single_level_with_overrides(tmp_path, capsys):
    make_image_dir(tmp_path / "imgs", count=2, size=64, seed=1)
    config = write_config(tmp_path, level_count=1)
    assert main(["train", "--config", str(config), "--level", "0",
                 "--set", "steps_per_level=1"]) == 0
    assert "1 steps" in capsys.readouterr().out


def test_errors_exit_nonzero(tmp_path, capsys):
    config = write_config(tmp_path)  # dataset dir missing
    assert main(["train", "--config", str(config)]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["eval", "--dataset", str(tmp_path), "--checkpoints",
                 str(tmp_path / "none"), "--resolution", "64",
                 "--out", str(tmp_path / "r")]) == 1
