import json

import numpy as np
import pytest

from filternet.dataset import ImageSource, load_manifest
from filternet.errors import DataError, NumericalError
from filternet.model import ModelSpec, init_params
from filternet.training import (EpochRecord, TrainConfig, TrainReport,
                                evaluate, history_csv, report_json, train)
from conftest import tiny_spec


def solid_spec(**overrides):
    kwargs = dict(conv_filters=8, kernel_size=3, dense_units=16,
                  input_height=16, input_width=16)
    kwargs.update(overrides)
    return ModelSpec(**kwargs)


def solid_config(manifest_path, **overrides):
    kwargs = dict(
        spec=solid_spec(),
        manifest_path=str(manifest_path),
        epochs=15,
        batch_size=8,
        learning_rate=1e-2,
        seed=42,
    )
    kwargs.update(overrides)
    return TrainConfig(**kwargs)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(spec=solid_spec(), epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(spec=solid_spec(), batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(spec=solid_spec(), learning_rate=0.0)


def test_overfits_solid_dataset(solid_manifest):
    report, params = train(solid_config(solid_manifest))
    assert report.history[-1].train_acc == 1.0
    assert report.test_accuracy == 1.0
    assert report.epochs == 15
    assert len(report.history) == 15
    assert report.history[0].epoch == 1
    assert report.history[-1].epoch == 15
    assert report.train_seconds > 0


def test_loss_decreases(solid_manifest):
    report, _ = train(solid_config(solid_manifest))
    assert report.history[-1].train_loss < report.history[0].train_loss


def test_rerun_bit_identical(solid_manifest):
    r1, p1 = train(solid_config(solid_manifest))
    r2, p2 = train(solid_config(solid_manifest))
    for (name, a), (_, b) in zip(p1.items(), p2.items()):
        assert np.array_equal(a, b), name
    assert history_csv(r1) == history_csv(r2)
    assert r1.test_accuracy == r2.test_accuracy


def test_seed_changes_run(solid_manifest):
    _, p1 = train(solid_config(solid_manifest))
    _, p2 = train(solid_config(solid_manifest, seed=43))
    assert not np.array_equal(p1.conv1_w, p2.conv1_w)


def test_manifest_object_overrides_path(solid_manifest):
    manifest = load_manifest(solid_manifest)
    report, _ = train(solid_config("ignored.tsv"), manifest=manifest)
    assert report.test_accuracy == 1.0


def test_log_callback_lines(solid_manifest):
    lines = []
    train(solid_config(solid_manifest, epochs=2), log=lines.append)
    assert len(lines) == 2
    assert lines[0].startswith("epoch 1/2 ")
    assert "val_acc=" in lines[0]


def test_divergence_raises_numerical_error(solid_manifest):
    config = solid_config(solid_manifest, learning_rate=1e30, epochs=1)
    with np.errstate(all="ignore"), pytest.raises(NumericalError) as err:
        train(config)
    assert "epoch 1" in str(err.value)


def test_missing_manifest():
    with pytest.raises(DataError):
        train(solid_config("/nonexistent/manifest.tsv"))


# -- evaluate -----------------------------------------------------------------

def test_evaluate_empty_entries():
    spec = tiny_spec()
    params = init_params(spec, seed=0)
    with pytest.raises(DataError):
        evaluate(spec, params, (), ImageSource(None, size=(12, 12)))


def test_evaluate_fields(solid_manifest):
    manifest = load_manifest(solid_manifest)
    spec = solid_spec()
    params = init_params(spec, seed=0)
    source = ImageSource(None, size=(16, 16))
    result = evaluate(spec, params, manifest.test_entries(), source)
    n = len(manifest.test_entries())
    assert result.predictions.shape == (n,)
    assert result.labels.shape == (n,)
    assert 0.0 <= result.accuracy <= 1.0
    assert np.isfinite(result.loss)
    # accuracy consistent with the returned vectors
    assert result.accuracy == pytest.approx(
        float(np.mean(result.predictions == result.labels)))


# -- serialization formats ----------------------------------------------------

def fixed_report():
    return TrainReport(
        epochs=1,
        history=(EpochRecord(1, 0.5, 1.0, 0.25, 2.0),),
        train_seconds=3.25,
        test_accuracy=0.75,
        test_loss=0.5,
        config={"seed": 42},
    )


def test_history_csv_frozen_format():
    got = history_csv(fixed_report())
    assert got == ("epoch,train_acc,train_loss,val_acc,val_loss\n"
                   "1,0.500000,1.000000,0.250000,2.000000\n")


def test_report_json_layout():
    payload = json.loads(report_json(fixed_report()))
    assert list(payload) == ["epochs", "history", "train_seconds",
                             "test_accuracy", "test_loss", "config"]
    assert payload["history"][0]["epoch"] == 1
    assert payload["test_accuracy"] == 0.75
    assert payload["config"]["seed"] == 42


def test_report_config_echo(solid_manifest):
    report, _ = train(solid_config(solid_manifest, epochs=1))
    cfg = report.config
    assert cfg["epochs"] == 1
    assert cfg["batch_size"] == 8
    assert cfg["seed"] == 42
    assert cfg["conv_filters"] == 8
    assert cfg["raster_filter"] == "none"
