"""Command-line client for the chunkforge service.

The CLI marshals flags into service requests. By default it mounts the
FastAPI app in-process (no server needed); point --server or
CHUNKFORGE_SERVER at a running instance to go over the network instead.
Standard output carries exactly one machine-readable JSON document per
invocation; all human-facing messages go to standard error.

Exit codes: 0 success, 1 metric/key errors, 2 I/O or parse errors.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import os
import sys

import httpx

from . import __version__
from .labeler import DEFAULT_DELTA, DEFAULT_JOINER, DEFAULT_SEPARATOR, DEFAULT_THETA
from .sampler import DEFAULT_SAMPLES_PER_IMAGE, DEFAULT_STAGES

SEED_ENV = "CHUNKFORGE_SEED"
SERVER_ENV = "CHUNKFORGE_SERVER"

log = logging.getLogger("chunkforge")


def _parse_stages(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"stages must be comma-separated integers, got {text!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chunkforge",
        description="Receipt OCR chunk-dataset builder and evaluation client.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--server",
        default=os.environ.get(SERVER_ENV),
        help="base URL of a running chunkforge service; default: in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_label_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                       help="box-inclusion overlap threshold")
        p.add_argument("--delta", type=float, default=DEFAULT_DELTA,
                       help="text-line vertical-overlap merge threshold")
        p.add_argument("--separator", default=DEFAULT_SEPARATOR,
                       help="text-line separator character")
        p.add_argument("--joiner", default=DEFAULT_JOINER,
                       help="intra-line word joiner")

    def add_dataset_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--root", required=True, help="dataset root directory")
        p.add_argument("--split", default="train")
        p.add_argument("--strict", action="store_true",
                       help="abort on malformed annotation lines")
        p.add_argument("--workers", type=int, default=None)

    build = sub.add_parser("build-dataset",
                           help="write curriculum shards and manifest")
    add_dataset_flags(build)
    add_label_flags(build)
    build.add_argument("--out", required=True, help="output directory")
    build.add_argument("--stages", type=_parse_stages,
                       default=list(DEFAULT_STAGES),
                       help="comma-separated chunk counts, strictly decreasing")
    build.add_argument("--samples-per-image", type=int,
                       default=DEFAULT_SAMPLES_PER_IMAGE)
    build.add_argument("--epochs", type=int, default=1)
    build.add_argument("--seed", type=int, default=None,
                       help=f"global seed (falls back to ${SEED_ENV}, then 0)")
    build.add_argument("--mode", choices=["random", "tiled"], default="random")
    build.add_argument("--materialize-crops", action="store_true",
                       help="also write per-chunk PNG crops")
    build.add_argument("--resample-empty", action="store_true",
                       help="redraw chunks whose label is empty (up to 10 tries)")

    analyze = sub.add_parser("analyze",
                             help="text-line count histogram of a dataset")
    add_dataset_flags(analyze)
    add_label_flags(analyze)
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.add_argument("--svg", action="store_true",
                         help="also emit an SVG bar chart")

    evaluate = sub.add_parser("evaluate",
                              help="score a hypothesis file against references")
    evaluate.add_argument("--ref", required=True, help="reference JSONL {key,text}")
    evaluate.add_argument("--hyp", required=True, help="hypothesis JSONL {key,text}")
    evaluate.add_argument("--out", required=True, help="report JSON path")
    evaluate.add_argument("--separator", default=DEFAULT_SEPARATOR)
    evaluate.add_argument("--strip-separator",
                          action=argparse.BooleanOptionalAction, default=True,
                          help="replace the separator with a space before CER")
    evaluate.add_argument("--average", choices=["micro", "macro"],
                          default="micro")
    evaluate.add_argument("--csv", action="store_true",
                          help="also export per-pair rows as CSV")

    post = sub.add_parser("postprocess",
                          help="split generated text into line arrays")
    post.add_argument("--hyp", required=True, help="hypothesis JSONL {key,text}")
    post.add_argument("--out", required=True, help="output JSONL path")
    post.add_argument("--separator", default=DEFAULT_SEPARATOR)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8137)

    return parser


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            log.warning("ignoring non-integer %s=%r", SEED_ENV, env)
    return 0


def _request_payload(args: argparse.Namespace) -> tuple[str, dict]:
    if args.command == "build-dataset":
        return "/build", {
            "root": args.root,
            "split": args.split,
            "out": args.out,
            "theta": args.theta,
            "delta": args.delta,
            "separator": args.separator,
            "joiner": args.joiner,
            "stages": args.stages,
            "samples_per_image": args.samples_per_image,
            "epochs": args.epochs,
            "seed": _resolve_seed(args.seed),
            "mode": args.mode,
            "materialize_crops": args.materialize_crops,
            "strict": args.strict,
            "resample_empty": args.resample_empty,
            "workers": args.workers,
        }
    if args.command == "analyze":
        return "/analyze", {
            "root": args.root,
            "split": args.split,
            "out": args.out,
            "theta": args.theta,
            "delta": args.delta,
            "separator": args.separator,
            "joiner": args.joiner,
            "svg": args.svg,
            "strict": args.strict,
            "workers": args.workers,
        }
    if args.command == "evaluate":
        return "/evaluate", {
            "ref_path": args.ref,
            "hyp_path": args.hyp,
            "out": args.out,
            "separator": args.separator,
            "strip_separator": args.strip_separator,
            "average": args.average,
            "csv_export": args.csv,
        }
    if args.command == "postprocess":
        return "/postprocess", {
            "hyp_path": args.hyp,
            "out": args.out,
            "separator": args.separator,
        }
    raise ValueError(f"unknown command {args.command!r}")


async def _post(server: str | None, path: str, payload: dict) -> tuple[int, dict]:
    if server:
        client = httpx.AsyncClient(base_url=server, timeout=600.0)
    else:
        from .service.app import create_app

        client = httpx.AsyncClient(
            transport=httpx.ASGITransport(app=create_app()),
            base_url="http://chunkforge.internal",
            timeout=600.0,
        )
    async with client:
        response = await client.post(path, json=payload)
        return response.status_code, response.json()


def _emit(document: dict) -> None:
    sys.stdout.write(json.dumps(document, ensure_ascii=False) + "\n")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    path, payload = _request_payload(args)
    try:
        status, document = asyncio.run(_post(args.server, path, payload))
    except httpx.HTTPError as exc:
        _emit({"error": {"type": "ConnectionError", "message": str(exc),
                         "exit_code": 2}})
        return 2
    _emit(document)
    if status == 200:
        return 0
    error = document.get("error") if isinstance(document, dict) else None
    if isinstance(error, dict):
        log.error("%s: %s", error.get("type", "error"), error.get("message", ""))
        code = error.get("exit_code", 2)
        return int(code) if isinstance(code, int) else 2
    # FastAPI validation errors and other non-toolkit failures
    log.error("request failed with HTTP %d", status)
    return 2


if __name__ == "__main__":
    sys.exit(main())
