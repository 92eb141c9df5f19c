import json
import shutil
import sys
from pathlib import Path

import pytest

ADAPTER_DIR = Path(__file__).resolve().parent.parent
if str(ADAPTER_DIR) not in sys.path:
    sys.path.insert(0, str(ADAPTER_DIR))

EXAMPLE_SCENE = ADAPTER_DIR / "example_scene.json"


@pytest.fixture
def example_scene_dict():
    return json.loads(EXAMPLE_SCENE.read_text(encoding="utf-8"))


@pytest.fixture
def example_scene_path():
    return EXAMPLE_SCENE


@pytest.fixture
def assets_root(tmp_path, example_scene_dict):
    """Populated stand-in asset root matching the example scene."""
    import make_example_assets as mea

    root = tmp_path / "assets"
    (root / "humans").mkdir(parents=True)
    mea.write_car_obj(root / "car.obj")
    for placement in example_scene_dict["placements"]:
        mea.write_human_obj(root / "humans" / f"{placement['human_id']}.obj")
    refs = []
    if example_scene_dict["background"]["kind"] == "hdri":
        refs.append(example_scene_dict["background"]["ref"])
    mea.write_environment_pngs(root, refs)
    return root


def blender_executable():
    import os

    return os.environ.get("CABINSYNTH_BLENDER") or shutil.which("blender")
