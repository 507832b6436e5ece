"""Command-line entry point: run the session service."""

from __future__ import annotations

import argparse
import os
import sys

from .errors import TagdeckError
from .service import StudioConfig, build_studio, create_app

API_KEY_ENV = "TAGDECK_API_KEY"
IMAGE_KEY_ENV = "TAGDECK_IMAGE_SEARCH_KEY"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagdeck", description="Intent-tag slide deck steering service"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="run the HTTP session service")
    serve.add_argument("--port", type=int, default=8700)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--backend", choices=("live", "replay", "record"), default="replay"
    )
    serve.add_argument("--replay-store", default=None, help="path to the replay store JSON")
    serve.add_argument("--fixtures-dir", default=None, help="image-search fixture JSON file")
    serve.add_argument("--model", default="gpt-4o")
    serve.add_argument("--max-inflight", type=int, default=4)
    serve.add_argument(
        "--api-key-env", default=API_KEY_ENV, help="env var holding the LLM API key"
    )
    serve.add_argument(
        "--image-key-env", default=IMAGE_KEY_ENV, help="env var holding the image-search key"
    )
    return parser


def config_from_args(args: argparse.Namespace) -> StudioConfig:
    api_key = os.environ.get(args.api_key_env)
    if args.backend in ("live", "record") and not api_key:
        raise TagdeckError(
            f"backend {args.backend!r} needs an API key in ${args.api_key_env}"
        )
    return StudioConfig(
        backend=args.backend,
        replay_store=args.replay_store,
        model=args.model,
        api_key=api_key,
        max_inflight=args.max_inflight,
        image_search_key=os.environ.get(args.image_key_env),
        image_fixtures=args.fixtures_dir,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        studio = build_studio(config)
    except TagdeckError as exc:
        print(f"tagdeck: {exc}", file=sys.stderr)
        return 2
    app = create_app(studio)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
