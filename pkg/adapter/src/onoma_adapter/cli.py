"""onoma-embed: encode 'id<TAB>sentence' lines into a vector file."""

from __future__ import annotations

import argparse
import sys

from .encode import AdapterConfig, encode_file
from .encoders import ModelLoadError
from .lengths import RULES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onoma-embed", description=__doc__)
    parser.add_argument("input", help="UTF-8 text file, 'id<TAB>sentence' per line")
    parser.add_argument("output", help="vector file to write")
    parser.add_argument("--model", default="hash:256",
                        help="sentence-transformers id or hash:<dim> (default)")
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--format", choices=("jsonl", "binary"), default="jsonl")
    parser.add_argument("--lang", choices=sorted(RULES))
    parser.add_argument("--length-rule", action="store_true",
                        help="standardize instance length for --lang before encoding")
    parser.add_argument("--device", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(
            model=args.model,
            batch_size=args.batch,
            device=args.device,
            format=args.format,
            lang=args.lang,
            length_rule=RULES[args.lang] if args.length_rule and args.lang else None,
        )
        if args.length_rule and not args.lang:
            raise ValueError("--length-rule needs --lang")
        manifest = encode_file(args.input, args.output, config)
    except ModelLoadError as exc:
        print(f"error: model: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: encode: {exc}", file=sys.stderr)
        return 1
    print(f"encoded {manifest['count']} sentences "
          f"(dim={manifest['dim']}, model={manifest['model']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
