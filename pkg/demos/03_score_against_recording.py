#!/usr/bin/env python3
"""Score rollouts against a recorded trajectory.

A recorded toss (here: a synthetic stand-in written to disk in the
canonical CSV format) is replayed from its first state under each contact
model, and the configuration error plus the position/rotation summaries
are reported, mirroring a validation run against capture data.

Pass a directory of real converted tosses as argv[1] to score those
instead.
"""
import sys
import tempfile
from pathlib import Path

import cubetoss as ct
from cubetoss.synthetic import make_dataset, random_toss_states

geom = ct.cube_geometry()
inertia = ct.cube_inertial()
cfg = ct.SimConfig()

if len(sys.argv) > 1:
    dataset_dir = Path(sys.argv[1])
    truths = ct.import_cube_dataset(dataset_dir)[:20]
    print(f"loaded {len(truths)} recorded tosses from {dataset_dir}")
else:
    # no recordings at hand: fabricate them with the rigid solver so the
    # other models see a contact process they did not generate
    gen = ct.ContactParams(0.36, 1800.0, 27.0, "rigid_pgs")
    tmp = Path(tempfile.mkdtemp(prefix="cubetoss_demo_"))
    for i, t in enumerate(make_dataset(random_toss_states(10, geom, seed=42), gen,
                                       inertia, geom, cfg, duration=0.5)):
        ct.save_trajectory(t, tmp / f"toss_{i:03d}.csv")
    truths = ct.import_cube_dataset(tmp)
    print(f"wrote and reloaded {len(truths)} synthetic stand-in tosses ({tmp})")

print(f"\n{'preset':20s} {'config err':>12s} {'pos err %':>10s} {'rot err deg':>12s} {'diverged':>9s}")
for preset in ("cube-drake", "cube-mujoco-style", "cube-bullet-style"):
    params = ct.param_preset(preset)
    reports = ct.rollout_reports(truths, params, inertia, geom, cfg)
    scored = [r for r, _ in reports if r is not None]
    diverged = sum(1 for _, d in reports if d)
    eq = sum(r.config_error for r in scored) / len(scored)
    pos = 100.0 * sum(r.position_error_frac for r in scored) / len(scored)
    rot = sum(r.rotation_error_deg for r in scored) / len(scored)
    print(f"{preset:20s} {eq:12.4f} {pos:10.2f} {rot:12.2f} {diverged:9d}")
