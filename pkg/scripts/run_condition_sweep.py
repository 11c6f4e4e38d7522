#!/usr/bin/env python3
"""Sweep every checker over one Cantor instance and write a report directory.

Usage: python scripts/run_condition_sweep.py [--level 6] [--beta 0.8] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

from hklab import cli


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--level", type=int, default=6)
    ap.add_argument("--beta", type=float, default=0.8)
    ap.add_argument("--out", default="out_sweep")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    config = {
        "space": {"kind": "cantor", "xi": 1 / 3, "n": 1, "level": args.level},
        "scale": {"kind": "constant", "beta": args.beta, "T0": 1.0},
        "kernel": {"kind": "cantor_axis"},
        "checks": [
            {"name": "scale_axioms", "mode": "pass"},
            {"name": "vd_fit", "mode": "diagnostic"},
            {"name": "rvd_fit", "mode": "diagnostic"},
            {"name": "tj_check", "mode": "diagnostic"},
            {"name": "ij_check", "mode": "diagnostic"},
            {"name": "lre_check", "mode": "pass"},
            {"name": "cs_check", "mode": "pass"},
            {"name": "capacity_check", "mode": "pass"},
            {"name": "fk_family_check", "mode": "pass",
             "params": {"variant": "WFK", "nu": 1.2, "Cprime": 1.0}},
            {"name": "nash_check", "mode": "pass", "params": {"nu": 1.2}},
            {"name": "fk_nash_consistency", "mode": "pass", "params": {"nu": 1.2}},
            {"name": "se_check", "mode": "pass"},
            {"name": "se_from_lre", "mode": "pass"},
            {"name": "te_check", "mode": "diagnostic"},
            {"name": "due_check", "mode": "diagnostic", "params": {"T0": 1.0}},
            {"name": "conservativeness_check", "mode": "pass"},
            {"name": "heat_kernel_invariants", "mode": "pass"},
            {"name": "truncation_l2_check", "mode": "pass"},
            {"name": "truncation_semigroup_check", "mode": "pass"},
            {"name": "meyer_check", "mode": "pass", "params": {"t": 0.5}},
        ],
        "output": {"formats": ["json", "csv", "plotdata"]},
        "seed": args.seed,
    }
    import json
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as handle:
        json.dump(config, handle)
        cfg_path = handle.name
    return cli.main(["run", "--config", cfg_path, "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
