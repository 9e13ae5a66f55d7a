"""Command-line client for the scenario service.

``solve`` posts a config document to the service and writes the returned
artifacts locally. By default it talks to an in-process instance of the app
over an ASGI transport (no server needed); pass --server to target a running
one. ``serve`` starts the HTTP service.

Exit codes: 0 success, 1 transport failure, 2 config error,
3 solver non-convergence, 4 numerical-stability failure.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfpricing",
        description="Competitive inventory-pricing equilibrium scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a scenario config and save its artifacts")
    solve.add_argument("config", help="path to a scenario document (flat key-value or JSON)")
    solve.add_argument("--out", default=None, help="output directory (default: config out_dir)")
    solve.add_argument("--seed", type=int, default=None, help="override the config seed")
    solve.add_argument("--n-steps", type=int, default=None, help="override the time grid resolution")
    solve.add_argument("--quiet", action="store_true", help="suppress the run summary")
    solve.add_argument("--server", default=None, help="base URL of a running service (default: in-process)")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


async def _post_run(payload: dict, server: str | None) -> httpx.Response:
    if server is not None:
        async with httpx.AsyncClient(base_url=server, timeout=None) as client:
            return await client.post("/scenarios/run", json=payload)
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://mfpricing.local", timeout=None
    ) as client:
        return await client.post("/scenarios/run", json=payload)


def _solve(args: argparse.Namespace) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    payload = {"config": text, "seed": args.seed, "n_steps": args.n_steps}
    try:
        response = asyncio.run(_post_run(payload, args.server))
    except httpx.HTTPError as exc:
        print(f"service unreachable: {exc}", file=sys.stderr)
        return 1
    if response.status_code == 422:
        detail = response.json().get("detail", "invalid configuration")
        print(f"config error: {detail}", file=sys.stderr)
        return 2
    if response.is_error:
        print(f"service error: HTTP {response.status_code}", file=sys.stderr)
        return 1
    data = response.json()
    out = Path(args.out) if args.out else Path(data["manifest"]["config"]["out_dir"])
    for name, content in data["files"].items():
        target = out / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content)
    if not args.quiet:
        manifest = data["manifest"]
        print(f"scenario:  {data['kind']}")
        print(f"status:    {data['status']}")
        if "iterations" in manifest:
            print(f"iterations: {manifest['iterations']}")
        if manifest.get("final_residual") is not None:
            print(f"residual:   {manifest['final_residual']:.3e}")
        print(f"artifacts:  {len(data['files'])} files in {out}")
    return int(data["exit_code"])


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("mfpricing.service:app", host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "solve":
        return _solve(args)
    return _serve(args)


if __name__ == "__main__":
    raise SystemExit(main())
