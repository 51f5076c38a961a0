"""Serve the scorer wire protocol over HTTP."""

from __future__ import annotations

import argparse
import sys

from .backend import build_backend
from .server import SidecarServer


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="scorer-sidecar")
    parser.add_argument(
        "--model",
        default="tiny:0",
        help="tiny[:seed] for the built-in seeded model, or hf:<name> for a pretrained one",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8791)
    parser.add_argument("--max-context", type=int, default=None)
    parser.add_argument("--auth-token", default=None, help="require this bearer token on /v1/*")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        backend = build_backend(args.model, max_context=args.max_context)
    except Exception as exc:
        print(f"error: could not load model {args.model!r}: {exc}", file=sys.stderr)
        return 1
    info = backend.info()
    server = SidecarServer((args.host, args.port), backend, auth_token=args.auth_token, verbose=args.verbose)
    print(
        f"serving {info['model']} (vocab {info['vocab_size']}, context {info['max_context']}) "
        f"on http://{args.host}:{server.server_address[1]}"
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
