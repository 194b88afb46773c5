#!/usr/bin/env python3
"""Tally frame annotations (TSV: language, lu, frame, instance_id) and write
the per-language distribution plus the stacked-bar SVG."""

import argparse
import json
from pathlib import Path

from onoma.behavioral_profile import frame_tally


def load_annotations(path):
    annotations = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise SystemExit(f"bad annotation at line {lineno}: {line!r}")
        annotations.append((parts[0], parts[1], parts[2]))
    return annotations


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("annotations", help="TSV: language, lu, frame, instance_id")
    parser.add_argument("--out-dir", default="out/frames")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tally, svg = frame_tally(load_annotations(args.annotations))
    payload = {
        lang: {
            f"{frame}/{lu}": {"count": count,
                              "proportion": count / tally.totals[lang]}
            for (frame, lu), count in sorted(tally.counts[lang].items())
        }
        for lang in tally.counts
    }
    (out / "frame_tally.json").write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (out / "frame_tally.svg").write_text(svg, encoding="utf-8")
    print(f"wrote frame_tally.json and frame_tally.svg under {out}")


if __name__ == "__main__":
    main()
