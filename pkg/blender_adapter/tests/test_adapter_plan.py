import json
import math

import pytest

import adapter


def det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


class TestSchema:
    def test_example_scene_loads(self, example_scene_path):
        scene = adapter.load_scene(example_scene_path)
        assert len(scene["placements"]) == 5

    def test_missing_field_names_path(self, tmp_path, example_scene_dict):
        del example_scene_dict["camera"]["fov_deg"]
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(example_scene_dict))
        with pytest.raises(adapter.SceneFormatError) as err:
            adapter.load_scene(path)
        assert err.value.path == "camera.fov_deg"

    def test_bad_placement_names_indexed_path(self, tmp_path, example_scene_dict):
        example_scene_dict["placements"][2].pop("seat_position")
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(example_scene_dict))
        with pytest.raises(adapter.SceneFormatError) as err:
            adapter.load_scene(path)
        assert err.value.path == "placements[2].seat_position"

    def test_instance_id_outside_palette_rejected(self, tmp_path, example_scene_dict):
        example_scene_dict["placements"][0]["instance_id"] = 99
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(example_scene_dict))
        with pytest.raises(adapter.SceneFormatError) as err:
            adapter.load_scene(path)
        assert "palette" in str(err.value)

    def test_not_json_is_schema_error(self, tmp_path):
        path = tmp_path / "scene.json"
        path.write_text("{nope")
        with pytest.raises(adapter.SceneFormatError):
            adapter.load_scene(path)


class TestAssets:
    def test_missing_human_named(self, tmp_path, example_scene_dict, assets_root):
        victim = example_scene_dict["placements"][0]["human_id"]
        (assets_root / "humans" / f"{victim}.obj").unlink()
        with pytest.raises(adapter.MissingAssetError) as err:
            adapter.make_render_plan(example_scene_dict, assets_root, "r.png", "m.png")
        assert victim in str(err.value)

    def test_missing_car_named(self, tmp_path, example_scene_dict, assets_root):
        (assets_root / "car.obj").unlink()
        with pytest.raises(adapter.MissingAssetError, match="car"):
            adapter.make_render_plan(example_scene_dict, assets_root, "r.png", "m.png")

    def test_missing_hdri_named(self, tmp_path, example_scene_dict, assets_root):
        ref = example_scene_dict["background"]["ref"]
        (assets_root / ref).with_suffix(".png").unlink()
        with pytest.raises(adapter.MissingAssetError) as err:
            adapter.make_render_plan(example_scene_dict, assets_root, "r.png", "m.png")
        assert ref in str(err.value)


class TestPlan:
    @pytest.fixture
    def plan(self, example_scene_dict, assets_root):
        return adapter.make_render_plan(example_scene_dict, assets_root, "out_rgb.png", "out_mask.png")

    def test_resolution_and_outputs(self, plan, example_scene_dict):
        assert plan["resolution"] == tuple(example_scene_dict["image_size"])
        assert plan["outputs"] == {"rgb": "out_rgb.png", "mask": "out_mask.png"}

    def test_focal_matches_equisolid_closed_form(self, plan, example_scene_dict):
        cam = example_scene_dict["camera"]
        expected = (cam["sensor_width_mm"] / 2) / (2 * math.sin(math.radians(cam["fov_deg"]) / 4))
        assert plan["camera"]["focal_mm"] == pytest.approx(expected, rel=1e-12)
        assert plan["camera"]["fov_rad"] == pytest.approx(math.radians(cam["fov_deg"]))

    def test_camera_matrix_is_rigid(self, plan):
        m = plan["camera"]["matrix"]
        rot = [row[:3] for row in m[:3]]
        assert det3(rot) == pytest.approx(1.0, abs=1e-9)
        for i in range(3):
            norm = sum(rot[k][i] ** 2 for k in range(3)) ** 0.5
            assert norm == pytest.approx(1.0, abs=1e-9)

    def test_camera_views_along_vehicle_backward(self, plan, example_scene_dict):
        # yaw 180 mirror camera looks toward vehicle -Z = Blender -Y
        m = plan["camera"]["matrix"]
        view = [-m[0][2], -m[1][2], -m[2][2]]  # Blender cameras look along -Z local
        assert view[1] == pytest.approx(-1.0, abs=1e-9)

    def test_one_object_per_placement_plus_car(self, plan, example_scene_dict):
        assert len(plan["objects"]) == len(example_scene_dict["placements"]) + 1
        assert plan["objects"][0]["pass_index"] == 0  # the car
        passes = sorted(o["pass_index"] for o in plan["objects"][1:])
        assert passes == [p["instance_id"] for p in example_scene_dict["placements"]]

    def test_mask_entries_use_dataset_palette(self, plan):
        for entry in plan["mask_entries"]:
            assert entry["color"] == adapter.PALETTE[entry["index"] - 1]

    def test_seat_positions_mapped_to_blender_world(self, plan, example_scene_dict):
        placement = example_scene_dict["placements"][0]
        obj = plan["objects"][1]
        x, y, z = placement["seat_position"]
        assert obj["location"] == pytest.approx([-x, z, y])

    def test_passenger_scale_follows_height(self, plan, example_scene_dict):
        for placement, obj in zip(example_scene_dict["placements"], plan["objects"][1:]):
            assert obj["scale"] == pytest.approx(0.80 + 0.40 * placement["height"])

    def test_light_preset_world(self, example_scene_dict, assets_root):
        example_scene_dict["background"] = {
            "kind": "light",
            "preset": {
                "kind": "spot",
                "intensity": 55.0,
                "position": [0.0, 1.4, 0.0],
                "direction": [0.0, -1.0, 0.0],
                "cone_angle_deg": 65.0,
            },
        }
        plan = adapter.make_render_plan(example_scene_dict, assets_root, "r.png", "m.png")
        assert plan["world"]["kind"] == "light"
        assert plan["world"]["light_type"] == "spot"
        assert plan["world"]["position"] == pytest.approx([0.0, 0.0, 1.4])


class TestMainErrors:
    def test_schema_error_exit_2(self, tmp_path, assets_root, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        code = adapter.main(
            ["--scene", str(bad), "--assets", str(assets_root), "--rgb", "r.png", "--mask", "m.png"]
        )
        assert code == adapter.EXIT_SCHEMA
        assert "sample_id" in capsys.readouterr().err

    def test_missing_asset_exit_3(self, tmp_path, example_scene_path, assets_root, capsys):
        (assets_root / "car.obj").unlink()
        code = adapter.main(
            [
                "--scene",
                str(example_scene_path),
                "--assets",
                str(assets_root),
                "--rgb",
                "r.png",
                "--mask",
                "m.png",
            ]
        )
        assert code == adapter.EXIT_ASSET
        assert "car" in capsys.readouterr().err
