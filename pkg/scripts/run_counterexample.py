#!/usr/bin/env python3
"""Emit the sharpness-construction report bundle for a chosen epsilon.

Usage: python scripts/run_counterexample.py --epsilon 4 [--levels 4] [--axes 2]
"""

import sys

from hklab import cli

if __name__ == "__main__":
    sys.exit(cli.main(["counterexample", "report", *sys.argv[1:]]))
