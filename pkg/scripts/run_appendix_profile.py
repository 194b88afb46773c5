#!/usr/bin/env python3
"""Canonical demo: correspondence analysis + moon plot of the bundled
behavioral-profile table (29 ID tags x 3 verbs of harm)."""

import argparse
from importlib import resources

from onoma.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out/appendix_profile")
    args = parser.parse_args()
    table = resources.files("onoma").joinpath("data/appendix_profile.csv")
    import json
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump({"profile": {"table": str(table)}}, fh)
        cfg = fh.name
    code = cli_main(["--config", cfg, "--out-dir", args.out_dir, "profile"])
    if code == 0:
        print(f"wrote ca.json, inertia.csv, moon_plot.svg under {args.out_dir}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
