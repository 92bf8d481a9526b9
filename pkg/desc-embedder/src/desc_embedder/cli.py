"""The desc-embed command.

    desc-embed descriptions.tsv vectors.tsv --backend hash --dim 32
    desc-embed descriptions.tsv vectors.tsv --backend transformer \
        --model hfl/chinese-bert-wwm-ext --pooling mean

Exit codes: 0 ok, 2 missing input file, 3 malformed input or arguments,
4 encoder model unavailable (a download instruction is printed).
"""

from __future__ import annotations

import argparse
import sys

from .embed import embed_file
from .encoders import DEFAULT_MODEL, get_encoder
from .errors import DescEmbedderError, ModelUnavailableError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="desc-embed",
        description="Convert entity descriptions into a sentence-vector file.")
    parser.add_argument("input", help="descriptions file: label<TAB>text lines")
    parser.add_argument("output", help="sentence-vector file to write")
    parser.add_argument("--backend", choices=["hash", "transformer"],
                        default="transformer",
                        help="sentence encoder (default: transformer)")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help=f"transformer checkpoint id (default: {DEFAULT_MODEL})")
    parser.add_argument("--pooling", choices=["mean", "cls"], default="mean",
                        help="sentence pooling for the transformer backend")
    parser.add_argument("--dim", type=int, default=32,
                        help="vector width for the hash backend")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        encoder = get_encoder(args.backend, model_id=args.model,
                              pooling=args.pooling, dim=args.dim)
        rows = embed_file(args.input, encoder, args.output)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except ModelUnavailableError as exc:
        print(f"error: {exc}\n{exc.instruction}", file=sys.stderr)
        return 4
    except (DescEmbedderError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {rows} sentence vector(s) (dim {encoder.dim}) to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
