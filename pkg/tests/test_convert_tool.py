import importlib.util
import sys
from pathlib import Path

import numpy as np
import pytest

import cubetoss as ct
from cubetoss import quat as cq
from conftest import random_unit_quat

TOOL = Path(__file__).resolve().parents[1] / "tools" / "convert_cube_dataset.py"


@pytest.fixture(scope="module")
def converter():
    spec = importlib.util.spec_from_file_location("convert_cube_dataset", TOOL)
    mod = importlib.util.module_from_spec(spec)
    sys.modules["convert_cube_dataset"] = mod
    spec.loader.exec_module(mod)
    return mod


def reference_trajectory(n=12, seed=90):
    rng = np.random.default_rng(seed)
    return ct.Trajectory(
        148.0,
        rng.uniform(-0.2, 0.2, (n, 3)),
        np.array([random_unit_quat(rng) for _ in range(n)]),
        rng.uniform(-1, 1, (n, 3)),
        rng.uniform(-5, 5, (n, 3)),
        {"body": "cube", "side_m": 0.1},
    )


def test_converter_handles_frames_and_units(converter, tmp_path):
    """mm positions, xyzw quaternions and body-frame rates come out canonical."""
    truth = reference_trajectory()
    raw = np.empty((len(truth), 13))
    raw[:, 0:3] = truth.pos * 1000.0  # export in millimeters
    raw[:, 3:7] = truth.quat[:, [1, 2, 3, 0]]  # xyzw storage
    raw[:, 7:10] = truth.vel * 1000.0
    # body frame rates: w_body = R^T w_world
    raw[:, 10:13] = np.array([cq.to_matrix(q).T @ w for q, w in zip(truth.quat, truth.ang_vel)])
    src = tmp_path / "raw"
    src.mkdir()
    np.save(src / "toss_a.npy", raw)
    dst = tmp_path / "canonical"
    rc = converter.main([str(src), str(dst), "--rate", "148", "--quat-order", "xyzw",
                         "--angvel-frame", "body", "--scale", "0.001"])
    assert rc == 0
    out = ct.import_cube_dataset(dst)
    assert len(out) == 1
    got = out[0]
    assert got.rate_hz == 148.0
    assert np.max(np.abs(got.pos - truth.pos)) < 1e-12
    assert np.max(np.abs(got.vel - truth.vel)) < 1e-12
    assert np.max(np.abs(got.ang_vel - truth.ang_vel)) < 1e-12
    for qa, qb in zip(got.quat, truth.quat):
        assert min(np.max(np.abs(qa - qb)), np.max(np.abs(qa + qb))) < 1e-12
    assert got.meta["side_m"] == 0.1


def test_converter_accepts_csv_with_time_column(converter, tmp_path):
    truth = reference_trajectory(seed=91)
    raw = np.column_stack([truth.times, truth.pos, truth.quat, truth.vel, truth.ang_vel])
    src = tmp_path / "raw"
    src.mkdir()
    np.savetxt(src / "toss_b.csv", raw, delimiter=",")
    dst = tmp_path / "canonical"
    rc = converter.main([str(src), str(dst)])
    assert rc == 0
    got = ct.import_cube_dataset(dst)[0]
    assert np.max(np.abs(got.pos - truth.pos)) < 1e-9


def test_converter_empty_source_fails(converter, tmp_path):
    src = tmp_path / "raw"
    src.mkdir()
    assert converter.main([str(src), str(tmp_path / "out")]) == 1
