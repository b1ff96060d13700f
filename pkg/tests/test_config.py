"""Run-configuration loading and validation tests."""

from __future__ import annotations

import json

import pytest

from seedlingcv.config import (
    DEFAULT_C_GRID,
    KnnSearchConfig,
    RunConfig,
    SvmSearchConfig,
    load_run_config,
)
from seedlingcv.errors import ConfigError


def write_config(tmp_path, payload):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(payload))
    return path


def test_defaults_without_file():
    run = load_run_config(None)
    assert run == RunConfig()
    assert run.svm.c_grid == DEFAULT_C_GRID
    assert run.cnn.input_size == 64
    assert run.segmentation.erode_size == 11


def test_full_file_round_trip(tmp_path):
    path = write_config(tmp_path, {
        "segmentation": {"blur_size": 7, "blur_sigma": 1.5,
                         "hsv_range": {"h_lo": 40.0, "h_hi": 170.0, "s_lo": 0.1,
                                       "s_hi": 1.0, "v_lo": 0.1, "v_hi": 1.0},
                         "erode_size": 9},
        "cnn": {"input_size": 32, "conv_channels": [8, 8, 16, 16, 32, 32],
                "fc_sizes": [32], "epochs": 3, "seed": 7},
        "svm": {"C": 2.0, "epochs": 10, "seed": 4, "c_grid": [0.5, 2.0], "folds": 4},
        "knn": {"max_k": 9, "folds": 4},
        "split": {"train_fraction": 0.75, "seed": 5},
        "paths": {"data_root": "/data", "output_dir": "/out"},
    })
    run = load_run_config(path)
    assert run.segmentation.blur_size == 7
    assert run.segmentation.hsv_range.h_lo == 40.0
    assert run.cnn.input_size == 32
    assert run.cnn.conv_channels == (8, 8, 16, 16, 32, 32)
    assert run.svm.base.C == 2.0
    assert run.svm.base.seed == 4
    assert run.svm.c_grid == (0.5, 2.0)
    assert run.svm.folds == 4
    assert run.knn.max_k == 9
    assert run.split.train_fraction == 0.75
    assert run.data_root == "/data" and run.output_dir == "/out"


def test_partial_file_keeps_other_defaults(tmp_path):
    run = load_run_config(write_config(tmp_path, {"cnn": {"epochs": 2}}))
    assert run.cnn.epochs == 2
    assert run.cnn.input_size == 64
    assert run.svm == SvmSearchConfig()


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown key"):
        load_run_config(write_config(tmp_path, {"cn": {"epochs": 2}}))


def test_unknown_key_in_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match="bogus"):
        load_run_config(write_config(tmp_path, {"cnn": {"bogus": 1}}))
    with pytest.raises(ConfigError, match="unknown key"):
        load_run_config(write_config(tmp_path, {"segmentation": {"blur": 3}}))
    with pytest.raises(ConfigError, match="unknown key"):
        load_run_config(write_config(
            tmp_path, {"segmentation": {"hsv_range": {"hue_low": 50}}}))


def test_bad_values_rejected(tmp_path):
    with pytest.raises(ConfigError, match="bad 'cnn'"):
        load_run_config(write_config(tmp_path, {"cnn": {"epochs": 0}}))
    with pytest.raises(ConfigError, match="bad 'split'"):
        load_run_config(write_config(tmp_path, {"split": {"train_fraction": 1.5}}))
    with pytest.raises(ConfigError, match="bad 'svm'"):
        load_run_config(write_config(tmp_path, {"svm": {"c_grid": [0.0]}}))


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_run_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_run_config(tmp_path / "nope.json")


def test_non_object_shapes_rejected(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_run_config(path)
    with pytest.raises(ConfigError, match="JSON object"):
        load_run_config(write_config(tmp_path, {"cnn": 5}))


def test_search_config_validation():
    with pytest.raises(ValueError):
        KnnSearchConfig(max_k=0)
    with pytest.raises(ValueError):
        KnnSearchConfig(folds=1)
    with pytest.raises(ValueError):
        SvmSearchConfig(c_grid=())
