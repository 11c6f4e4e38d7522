#!/usr/bin/env python3
"""Run the two-point smoke config through the CLI and print the summary."""

import json
import sys
from pathlib import Path

from hklab import cli

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    out = ROOT / "out_smoke"
    code = cli.main(["run", "--config", str(ROOT / "configs" / "two_point_smoke.json"),
                     "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    for check in summary["checks"]:
        print(f"{check['name']:32s} {check['verdict']}")
    print("all_pass:", summary["all_pass"])
    return code


if __name__ == "__main__":
    sys.exit(main())
