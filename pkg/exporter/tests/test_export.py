import json
from pathlib import Path

import pytest
import torch
from torch import nn

from topoprobe import weightnet as wn
from topoprobe_exporter import cli
from topoprobe_exporter.export import (
    AccuracyBelowFloorError,
    ExportError,
    ExportJob,
    UnsupportedLayerError,
    convert_saved_model,
    train_and_export,
)


def quick_job(tmp_path, **overrides) -> ExportJob:
    """Short training run for structural tests; no accuracy expectations."""
    defaults = dict(
        classes=10,
        outputs=10,
        layer_sizes=(64, 32, 16, 10),
        warmup_epochs=2,
        epochs=2,
        consolidate_epochs=0,
        seed=0,
        out=tmp_path / "weights.json",
        min_accuracy=0.0,
    )
    defaults.update(overrides)
    return ExportJob(**defaults)


class TestTrainAndExport:
    def test_full_class_run_parses_and_chains(self, tmp_path):
        path = train_and_export(quick_job(tmp_path))
        model = wn.parse_weights_file(path.read_bytes())
        assert model.used_outputs == frozenset(range(10))
        assert [(layer.rows, layer.cols) for layer in model.layers] == [
            (64, 32), (32, 16), (16, 10),
        ]

    def test_class_subset_marks_used_outputs(self, tmp_path):
        path = train_and_export(quick_job(tmp_path, classes=5))
        model = wn.parse_weights_file(path.read_bytes())
        assert model.used_outputs == frozenset(range(5))
        assert model.output_size == 10

    def test_oversized_output_layer(self, tmp_path):
        path = train_and_export(
            quick_job(tmp_path, classes=10, outputs=20, layer_sizes=(64, 32, 16, 20))
        )
        model = wn.parse_weights_file(path.read_bytes())
        assert model.used_outputs == frozenset(range(10))
        assert model.output_size == 20

    def test_accuracy_recorded_in_name(self, tmp_path):
        path = train_and_export(quick_job(tmp_path))
        doc = json.loads(path.read_text())
        assert doc["name"].startswith("digits-k10-o10-seed0-acc0.")

    def test_export_refused_below_floor(self, tmp_path):
        with pytest.raises(AccuracyBelowFloorError, match="below the floor"):
            train_and_export(
                quick_job(tmp_path, warmup_epochs=1, epochs=0, min_accuracy=0.999)
            )
        assert not (tmp_path / "weights.json").exists()

    def test_fixed_seed_reproduces_bytes(self, tmp_path):
        a = train_and_export(quick_job(tmp_path, out=tmp_path / "a.json")).read_bytes()
        b = train_and_export(quick_job(tmp_path, out=tmp_path / "b.json")).read_bytes()
        assert a == b

    def test_seed_changes_weights(self, tmp_path):
        a = train_and_export(quick_job(tmp_path, out=tmp_path / "a.json")).read_bytes()
        b = train_and_export(quick_job(tmp_path, seed=1, out=tmp_path / "b.json")).read_bytes()
        assert a != b

    def test_job_validation(self, tmp_path):
        with pytest.raises(ExportError, match="8x8"):
            quick_job(tmp_path, layer_sizes=(32, 16, 10))
        with pytest.raises(ExportError, match="does not match last layer"):
            quick_job(tmp_path, outputs=12)
        with pytest.raises(ExportError, match="cannot train"):
            quick_job(tmp_path, classes=10, outputs=5, layer_sizes=(64, 32, 16, 5))


class TestAcceptanceSecondary:
    def test_k10_reaches_accuracy_floor(self, tmp_path):
        # dense warmup alone clears 90% on the 8x8 digits
        path = train_and_export(
            quick_job(tmp_path, warmup_epochs=30, epochs=0, min_accuracy=0.9)
        )
        doc = json.loads(path.read_text())
        accuracy = float(doc["name"].rsplit("acc", 1)[1])
        print(f"ACCEPTANCE exporter k=10 accuracy {accuracy:.3f} >= 0.9: PASS")
        assert accuracy >= 0.9

    def test_regenerated_fixture_shape_matches_schema(self, tmp_path):
        path = train_and_export(quick_job(tmp_path, classes=5))
        model = wn.parse_weights_file(path.read_bytes())
        graph = wn.assign_global_indices(model)
        assert graph.n == 64 + 32 + 16 + 10
        assert graph.unused_output_ids == frozenset(range(5, 10))
        print("ACCEPTANCE exporter fixtures schema-valid and shape-consistent: PASS")


class TestConvert:
    def _dense_model(self):
        torch.manual_seed(0)
        return nn.Sequential(
            nn.Flatten(),
            nn.Linear(8, 6),
            nn.ReLU(),
            nn.Dropout(0.1),
            nn.Linear(6, 4),
            nn.Sigmoid(),
        )

    def test_dense_model_round_trip(self, tmp_path):
        saved = tmp_path / "model.pt"
        model = self._dense_model()
        torch.save(model, saved)
        data = convert_saved_model(saved)
        parsed = wn.parse_weights_file(data)
        assert [(layer.rows, layer.cols) for layer in parsed.layers] == [(8, 6), (6, 4)]
        assert parsed.used_outputs == frozenset(range(4))
        assert parsed.name == "model"
        first = model[1].weight.detach().numpy()
        assert parsed.layers[0].weights[0][0] == pytest.approx(first[0][0])

    def test_convolution_is_rejected(self, tmp_path):
        saved = tmp_path / "conv.pt"
        torch.save(nn.Sequential(nn.Conv2d(1, 4, 3), nn.Flatten(), nn.Linear(16, 2)), saved)
        with pytest.raises(UnsupportedLayerError, match="Conv2d"):
            convert_saved_model(saved)

    def test_non_chaining_layers_rejected(self, tmp_path):
        saved = tmp_path / "broken.pt"
        torch.save(nn.Sequential(nn.Linear(8, 6), nn.Linear(5, 4)), saved)
        with pytest.raises(UnsupportedLayerError, match="do not chain"):
            convert_saved_model(saved)

    def test_explicit_used_outputs(self, tmp_path):
        saved = tmp_path / "model.pt"
        torch.save(self._dense_model(), saved)
        parsed = wn.parse_weights_file(convert_saved_model(saved, used_outputs=[0, 2]))
        assert parsed.used_outputs == frozenset({0, 2})

    def test_not_a_module(self, tmp_path):
        saved = tmp_path / "tensor.pt"
        torch.save(torch.zeros(3), saved)
        with pytest.raises(UnsupportedLayerError, match="torch module"):
            convert_saved_model(saved)


class TestCli:
    def test_export_command(self, tmp_path):
        out = tmp_path / "cli.json"
        code = cli.main([
            "export", "--classes", "3", "--outputs", "10", "--layers", "64,32,16,10",
            "--warmup", "1", "--epochs", "1", "--seed", "7",
            "--min-accuracy", "0", "--out", str(out),
        ])
        assert code == 0
        assert wn.parse_weights_file(out.read_bytes()).used_outputs == frozenset({0, 1, 2})

    def test_export_rejects_bad_layers(self, tmp_path, capsys):
        code = cli.main([
            "export", "--classes", "3", "--outputs", "10", "--layers", "sixty-four",
            "--out", str(tmp_path / "x.json"),
        ])
        assert code == 2
        assert "layers" in capsys.readouterr().err

    def test_convert_command(self, tmp_path):
        saved = tmp_path / "m.pt"
        torch.save(nn.Sequential(nn.Linear(8, 4)), saved)
        out = tmp_path / "m.json"
        assert cli.main(["convert", "--model", str(saved), "--out", str(out)]) == 0
        assert wn.parse_weights_file(out.read_bytes()).output_size == 4
