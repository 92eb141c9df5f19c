import json
from pathlib import Path

import numpy as np
import pytest

from cabinsynth.cli import (
    ADAPTER_ENV,
    ASSETS_ENV,
    BLENDER_ENV,
    EXIT_BACKEND,
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_OK,
    EXIT_VALIDATION,
    main,
)
from cabinsynth.config import save_config
from cabinsynth.masks import DEFAULT_PALETTE, read_mask_png


@pytest.fixture
def config_path(tmp_path, small_config):
    path = tmp_path / "config.json"
    save_config(small_config, path)
    return path


def dataset_bytes(out_dir: Path) -> dict[str, bytes]:
    """All dataset files, with the manifest timestamp normalized away."""
    files = {}
    for path in sorted(out_dir.iterdir()):
        if path.name == "stats.json":
            continue
        if path.name == "manifest.json":
            manifest = json.loads(path.read_text())
            manifest.pop("created_utc", None)
            files[path.name] = json.dumps(manifest, sort_keys=True).encode()
        else:
            files[path.name] = path.read_bytes()
    return files


class TestGenScenes:
    def test_writes_expected_files(self, tmp_path, config_path):
        out = tmp_path / "out"
        assert main(["gen-scenes", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
        names = sorted(p.name for p in out.glob("scene_*.json"))
        assert names == [f"scene_{i:06d}.json" for i in range(4)]

    def test_rerun_byte_identical(self, tmp_path, config_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out_a)])
        main(["gen-scenes", "--config", str(config_path), "--out", str(out_b)])
        for name in (f"scene_{i:06d}.json" for i in range(4)):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_invalid_config_exits_2_with_violations(self, tmp_path, small_config, capsys):
        small_config.occupancy = 99
        bad = tmp_path / "bad.json"
        save_config(small_config, bad)
        code = main(["gen-scenes", "--config", str(bad), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "occupancy" in capsys.readouterr().err

    def test_seed_and_count_overrides(self, tmp_path, config_path):
        out = tmp_path / "o"
        main(
            ["gen-scenes", "--config", str(config_path), "--out", str(out), "--seed", "9", "--count", "2"]
        )
        scenes = sorted(out.glob("scene_*.json"))
        assert len(scenes) == 2
        from cabinsynth.rng import derive_seed

        data = json.loads(scenes[0].read_text())
        assert data["derived_seed"] == derive_seed(9, 0)


class TestRender:
    def test_oracle_backend_writes_rgb_and_mask(self, tmp_path, config_path):
        out = tmp_path / "o"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out), "--count", "2"])
        assert main(["render", "--out", str(out), "--backend", "oracle"]) == EXIT_OK
        files = sorted(p.name for p in out.glob("*.png"))
        assert files == ["mask_000000.png", "mask_000001.png", "rgb_000000.png", "rgb_000001.png"]

    def test_oracle_masks_palette_decodable(self, tmp_path, config_path):
        out = tmp_path / "o"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out), "--count", "1"])
        main(["render", "--out", str(out)])
        ids, unknown = read_mask_png(out / "mask_000000.png", DEFAULT_PALETTE)
        assert unknown == 0
        assert set(np.unique(ids)) <= set(range(6))

    def test_blender_backend_missing_exits_3(self, tmp_path, config_path, monkeypatch, capsys):
        out = tmp_path / "o"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out), "--count", "1"])
        for var in (BLENDER_ENV, ADAPTER_ENV, ASSETS_ENV):
            monkeypatch.delenv(var, raising=False)
        monkeypatch.setenv("PATH", str(tmp_path))  # nothing on PATH
        code = main(["render", "--out", str(out), "--backend", "blender"])
        assert code == EXIT_BACKEND
        assert BLENDER_ENV in capsys.readouterr().err


class TestAnnotate:
    def test_writes_labels_and_manifest(self, tmp_path, config_path):
        out = tmp_path / "o"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out)])
        main(["render", "--out", str(out)])
        assert main(["annotate", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
        labels = (out / "labels_000000.txt").read_text().splitlines()
        assert labels[0] == "# sample 0"
        assert len(labels) == 6  # header + five passengers
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["samples"]) == 4

    def test_empty_dataset_gives_empty_manifest(self, tmp_path, config_path):
        out = tmp_path / "empty"
        out.mkdir()
        assert main(["annotate", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["samples"] == []

    def test_missing_mask_exits_4_naming_sample(self, tmp_path, config_path, capsys):
        out = tmp_path / "o"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out), "--count", "2"])
        main(["render", "--out", str(out)])
        (out / "mask_000001.png").unlink()
        code = main(["annotate", "--config", str(config_path), "--out", str(out)])
        assert code == EXIT_DATA
        assert "sample 1" in capsys.readouterr().err

    def test_mask_size_mismatch_exits_4(self, tmp_path, config_path):
        from cabinsynth.masks import write_mask_png

        out = tmp_path / "o"
        main(["gen-scenes", "--config", str(config_path), "--out", str(out), "--count", "1"])
        main(["render", "--out", str(out)])
        write_mask_png(out / "mask_000000.png", np.zeros((8, 8), dtype=np.int32))
        assert main(["annotate", "--config", str(config_path), "--out", str(out)]) == EXIT_DATA


class TestValidate:
    def test_fresh_dataset_ok(self, tmp_path, config_path):
        out = tmp_path / "o"
        main(["run", "--config", str(config_path), "--out", str(out)])
        assert main(["validate", "--out", str(out)]) == EXIT_OK

    def test_corrupted_label_line_cites_sample_and_line(self, tmp_path, config_path, capsys):
        out = tmp_path / "o"
        main(["run", "--config", str(config_path), "--out", str(out)])
        capsys.readouterr()
        label = out / "labels_000002.txt"
        lines = label.read_text().splitlines()
        fields = lines[1].split(" ")
        fields[1] = str(int(fields[1]) + 1)  # single-digit bbox corruption
        lines[1] = " ".join(fields)
        label.write_text("\n".join(lines) + "\n")
        assert main(["validate", "--out", str(out)]) == EXIT_VALIDATION
        err = capsys.readouterr().err
        assert "labels_000002.txt" in err and "line 2" in err

    def test_missing_manifest_exits_1(self, tmp_path):
        out = tmp_path / "o"
        out.mkdir()
        assert main(["validate", "--out", str(out)]) == EXIT_VALIDATION


class TestStats:
    def test_reports_and_writes_json(self, tmp_path, config_path, capsys):
        out = tmp_path / "o"
        main(["run", "--config", str(config_path), "--out", str(out)])
        assert main(["stats", "--out", str(out)]) == EXIT_OK
        stats = json.loads((out / "stats.json").read_text())
        assert stats["sample_count"] == 4
        assert sum(stats["seat_counts"].values()) == 20
        # histogram support within the configured neck ranges
        for key in ("neck.vertical", "neck.horizontal"):
            assert stats["bone_angles"][key]["min"] >= -15.0
            assert stats["bone_angles"][key]["max"] <= 15.0
        table = capsys.readouterr().out
        assert "seat" in table and "human" in table

    def test_zero_samples_empty_tables(self, tmp_path, config_path):
        out = tmp_path / "empty"
        out.mkdir()
        main(["annotate", "--config", str(config_path), "--out", str(out)])
        assert main(["stats", "--out", str(out)]) == EXIT_OK
        stats = json.loads((out / "stats.json").read_text())
        assert stats["human_counts"] == {} and stats["bone_angles"] == {}

    def test_missing_manifest_is_data_error(self, tmp_path):
        out = tmp_path / "o"
        out.mkdir()
        assert main(["stats", "--out", str(out)]) == EXIT_DATA


class TestRunComposability:
    def test_run_equals_stage_sequence(self, tmp_path, config_path):
        combined, staged = tmp_path / "run", tmp_path / "staged"
        assert main(["run", "--config", str(config_path), "--out", str(combined)]) == EXIT_OK
        main(["gen-scenes", "--config", str(config_path), "--out", str(staged)])
        main(["render", "--out", str(staged)])
        main(["annotate", "--config", str(config_path), "--out", str(staged)])
        assert dataset_bytes(combined) == dataset_bytes(staged)

    def test_jobs_do_not_change_outputs(self, tmp_path, config_path):
        serial, parallel = tmp_path / "j1", tmp_path / "j8"
        main(["run", "--config", str(config_path), "--out", str(serial), "--jobs", "1"])
        main(["run", "--config", str(config_path), "--out", str(parallel), "--jobs", "8"])
        assert dataset_bytes(serial) == dataset_bytes(parallel)

    def test_manifest_seed_regenerates_identical_labels(self, tmp_path, config_path):
        first, again = tmp_path / "first", tmp_path / "again"
        main(["run", "--config", str(config_path), "--out", str(first)])
        manifest = json.loads((first / "manifest.json").read_text())
        code = main(
            [
                "run",
                "--config",
                str(config_path),
                "--out",
                str(again),
                "--seed",
                str(manifest["master_seed"]),
            ]
        )
        assert code == EXIT_OK
        for label in sorted(first.glob("labels_*.txt")):
            assert label.read_bytes() == (again / label.name).read_bytes()
