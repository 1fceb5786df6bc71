"""Command-line client of the diffread experiment service.

By default every subcommand talks to an in-process instance of the FastAPI
app; `--server URL` points it at a remote instance instead. Results are
written as CSV with metadata comment lines.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import httpx

from . import __version__
from .config import build_config, load_config_file
from .errors import ConfigError
from .models import CountResult, ExperimentResult, ProfileResult
from .output import render_csv

_SWEEPS = {
    "ter": ("/experiments/ter", "trits_per_point"),
    "jitter": ("/experiments/jitter", "frames_per_point"),
    "pitdepth": ("/experiments/pitdepth", "trits_per_point"),
    "fresnel": ("/experiments/fresnel", "trits_per_point"),
}


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit code 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diffread",
                     description="Optical read-channel experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--format", default="csv", help="output format (csv)")
        p.add_argument("--server", help="remote service URL "
                                        "(default: in-process)")
        p.add_argument("--verbose", action="store_true",
                       help="log sweep progress")

    for name in _SWEEPS:
        p = sub.add_parser(name, parents=[], help=f"run the {name} sweep")
        common(p)
        p.add_argument("--trials", type=int,
                       help="trial count per sweep point override")

    p = sub.add_parser("profile", help="tabulate a diffraction profile")
    common(p)
    p.add_argument("--preset", help="named geometry preset (paper-fig4)")
    p.add_argument("--bits", help="indentation pattern, e.g. 01001")
    p.add_argument("--theta-max", type=float, dest="theta_max",
                   help="half-width of the angle window (rad)")
    p.add_argument("--points", type=int, help="number of angle samples")
    p.add_argument("--include-kirchhoff", action="store_true",
                   dest="include_kirchhoff",
                   help="add a Kirchhoff-quadrature intensity column")

    p = sub.add_parser("count", help="count distinct diffraction patterns")
    p.add_argument("--n", type=int, required=True, help="cantilever count")
    p.add_argument("--method", default="formula",
                   choices=("formula", "brute_force"))
    p.add_argument("--server", help="remote service URL")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _call_service(server: str | None, path: str, payload: dict):
    if server:
        resp = httpx.post(server.rstrip("/") + path, json=payload,
                          timeout=None)
        return resp.status_code, resp.json()
    import asyncio

    from .service import create_app

    async def _run():
        transport = httpx.ASGITransport(app=create_app(),
                                        raise_app_exceptions=False)
        async with httpx.AsyncClient(transport=transport, timeout=None,
                                     base_url="http://diffread.local") as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()

    return asyncio.run(_run())


def _collect_values(args, extra: dict[str, str]) -> dict[str, str]:
    values = load_config_file(args.config) if args.config else {}
    if getattr(args, "seed", None) is not None:
        values["seed"] = str(args.seed)
    values.update(extra)
    return values


def _write_output(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _check_format(args) -> None:
    if getattr(args, "format", "csv") != "csv":
        raise ConfigError(f"unsupported output format {args.format!r}")


def _dispatch(args) -> int:
    if args.command == "serve":
        import uvicorn

        from .service import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    if args.command == "count":
        status, data = _call_service(args.server, "/patterns/count",
                                     {"n": args.n, "method": args.method})
        if status != 200:
            return _report_http_error(status, data)
        print(CountResult.model_validate(data).count)
        return 0

    _check_format(args)
    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(message)s")

    if args.command == "profile":
        extra: dict[str, str] = {}
        if args.preset is not None:
            extra["preset"] = args.preset
        if args.bits is not None:
            extra["bits"] = args.bits
        if args.theta_max is not None:
            extra["theta_max_rad"] = str(args.theta_max)
        if args.points is not None:
            extra["n_points"] = str(args.points)
        if args.include_kirchhoff:
            extra["include_kirchhoff"] = "true"
        cfg = build_config("profile", _collect_values(args, extra))
        status, data = _call_service(args.server, "/profile",
                                     cfg.model_dump(mode="json"))
        if status != 200:
            return _report_http_error(status, data)
        _write_output(render_csv(ProfileResult.model_validate(data)), args.out)
        return 0

    path, trials_key = _SWEEPS[args.command]
    extra = {}
    if args.trials is not None:
        extra[trials_key] = str(args.trials)
    cfg = build_config(args.command, _collect_values(args, extra))
    status, data = _call_service(args.server, path,
                                 cfg.model_dump(mode="json"))
    if status != 200:
        return _report_http_error(status, data)
    _write_output(render_csv(ExperimentResult.model_validate(data)), args.out)
    return 0


def _report_http_error(status: int, data) -> int:
    detail = data.get("detail", data) if isinstance(data, dict) else data
    error = data.get("error", "") if isinstance(data, dict) else ""
    print(f"service error {status} {error}: {detail}", file=sys.stderr)
    return 1 if status in (400, 422) else 2


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"service unreachable: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures surface as exit code 2
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
