"""Command-line front end: a thin client of the service API.

By default the client talks to an in-process instance of the app (no server
needed); --server points it at a remote deployment instead.  All artifacts
are written verbatim as returned, so replays with the same configuration
are byte-identical.

Exit codes: 0 success, 1 domain failure, 2 usage or I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

import httpx


def _read_config(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _request(server: Optional[str], endpoint: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(endpoint, json=payload)

    # Default: drive the app in-process through its ASGI interface.
    import asyncio

    from .service import app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://service", timeout=None
        ) as client:
            return await client.post(endpoint, json=payload)

    return asyncio.run(go())


def _post(server: Optional[str], endpoint: str, payload: dict) -> dict:
    try:
        resp = _request(server, endpoint, payload)
    except httpx.HTTPError as exc:
        print(f"error: request failed: {exc}", file=sys.stderr)
        raise SystemExit(2)
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail", "")
    except Exception:
        detail = resp.text
    print(f"error: {detail}", file=sys.stderr)
    raise SystemExit(1 if resp.status_code == 422 else 2)


def _write_artifacts(artifacts: list[dict], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for art in artifacts:
        path = os.path.join(out_dir, art["name"])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(art["text"])
        print(f"wrote {path}")


def _base_payload(args: argparse.Namespace) -> dict:
    payload = {"config_text": _read_config(args.config)}
    if args.lam is not None:
        payload["lambda_override"] = args.lam
    if args.seed is not None:
        payload["seed_override"] = args.seed
    return payload


def _parse_n_range(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        print(f"error: bad --n-range {text!r}", file=sys.stderr)
        raise SystemExit(2)


def cmd_validate(args) -> int:
    data = _post(args.server, "/v1/validate", _base_payload(args))
    _write_artifacts(data["artifacts"], args.out)
    for check in data["checks"]:
        print(f"{'PASS' if check['ok'] else 'FAIL'} {check['name']}")
    print(f"stability_criterion = {data['stability_criterion']}")
    print(f"disjoint_intervals_regime = {data['disjoint_intervals_regime']}")
    return 0 if data["passed"] else 1


def cmd_curves(args) -> int:
    payload = _base_payload(args)
    payload["samples"] = args.samples
    data = _post(args.server, "/v1/curves", payload)
    _write_artifacts(data["artifacts"], args.out)
    return 0


def cmd_orbit(args) -> int:
    payload = _base_payload(args)
    payload.update({"x": args.x, "y": args.y, "k": args.k})
    data = _post(args.server, "/v1/orbit", payload)
    _write_artifacts(data["artifacts"], args.out)
    print("statuses: " + ",".join(data["statuses"]))
    return 0


def cmd_horseshoe(args) -> int:
    payload = _base_payload(args)
    payload.update(
        {
            "n_range": _parse_n_range(args.n_range),
            "tau": args.tau,
            "cone_slope": args.cone_slope,
            "grid": args.grid,
        }
    )
    data = _post(args.server, "/v1/horseshoe", payload)
    _write_artifacts(data["artifacts"], args.out)
    for row in data["matrix"]:
        print(" ".join(str(v) for v in row))
    print(f"cone: passed={data['cone_passed']} mu={data['cone_mu']:.6g}")
    return 0


def cmd_escape(args) -> int:
    payload = _base_payload(args)
    payload.update(
        {
            "n_range": _parse_n_range(args.n_range),
            "tau": args.tau,
            "samples": args.samples,
            "horizon": args.horizon,
            "tube_halfwidth": args.tube_halfwidth,
        }
    )
    if args.tube_height is not None:
        payload["tube_height"] = args.tube_height
    if args.rect is not None:
        try:
            payload["rect"] = [float(tok) for tok in args.rect.split(",")]
        except ValueError:
            print(f"error: bad --rect {args.rect!r}", file=sys.stderr)
            raise SystemExit(2)
    data = _post(args.server, "/v1/escape", payload)
    _write_artifacts(data["artifacts"], args.out)
    if data["decay_rate"] is not None:
        print(f"decay rate = {data['decay_rate']:.6g}")
    return 0


def cmd_tangency(args) -> int:
    payload = _base_payload(args)
    payload.update({"lambda_hi": args.lambda_hi, "lambda_lo": args.lambda_lo})
    data = _post(args.server, "/v1/tangency", payload)
    _write_artifacts(data["artifacts"], args.out)
    for rec in data["records"]:
        print(
            f"lam_star={rec['lam_star']:.12e} "
            f"bracket=[{rec['bracket_lo']:.6e}, {rec['bracket_hi']:.6e}] "
            f"winding={rec['winding']}"
        )
    print(f"records: {len(data['records'])}")
    return 0


def cmd_sinks(args) -> int:
    payload = _base_payload(args)
    payload.update(
        {
            "lambda_hi": args.lambda_hi,
            "lambda_lo": args.lambda_lo,
            "record_index": args.record,
            "period_max": args.period_max,
        }
    )
    data = _post(args.server, "/v1/sinks", payload)
    _write_artifacts(data["artifacts"], args.out)
    n_sinks = sum(1 for o in data["orbits"] if o["stability"] == "sink")
    print(f"orbits: {len(data['orbits'])} sinks: {n_sinks}")
    return 0


def cmd_itinerary(args) -> int:
    payload = _base_payload(args)
    payload["word"] = args.word
    data = _post(args.server, "/v1/itinerary", payload)
    _write_artifacts(data["artifacts"], args.out)
    total = len(args.word.split(","))
    print(f"MATCH {data['matched']}/{total}")
    return 0 if data["exact"] else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bykov",
        description="Return-map model of a Bykov network: scans, horseshoes, tangencies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--out", default=".", help="output directory for artifacts")
        p.add_argument(
            "--lambda", dest="lam", type=float, default=None, help="override lambda"
        )
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument("--server", default=None, help="remote service URL (default: in-process)")

    p = sub.add_parser("validate", help="check the standing hypotheses")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curves", help="sample g, h, the h-return image, and the fold")
    common(p)
    p.add_argument("--samples", type=int, default=512)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("orbit", help="iterate the first-return map from a point")
    common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("horseshoe", help="build rectangles and certify transitions")
    common(p)
    p.add_argument("--n-range", default="0,1")
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--cone-slope", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=50)
    p.set_defaults(func=cmd_horseshoe)

    p = sub.add_parser("escape", help="Monte-Carlo survival experiment")
    common(p)
    p.add_argument("--n-range", default="0,1")
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--tube-halfwidth", type=float, default=1.2)
    p.add_argument("--tube-height", type=float, default=None)
    p.add_argument(
        "--rect",
        default=None,
        help="explicit draw region x_lo,x_hi,y_lo,y_hi (default: built rectangles)",
    )
    p.set_defaults(func=cmd_escape)

    p = sub.add_parser("tangency", help="locate the tangency parameter ladder")
    common(p)
    p.add_argument("--lambda-hi", type=float, required=True)
    p.add_argument("--lambda-lo", type=float, required=True)
    p.set_defaults(func=cmd_tangency)

    p = sub.add_parser("sinks", help="periodic orbits near a located tangency")
    common(p)
    p.add_argument("--lambda-hi", type=float, required=True)
    p.add_argument("--lambda-lo", type=float, required=True)
    p.add_argument("--record", type=int, default=0)
    p.add_argument("--period-max", type=int, default=3)
    p.set_defaults(func=cmd_sinks)

    p = sub.add_parser("itinerary", help="realize a symbolic itinerary")
    common(p)
    p.add_argument("--word", required=True, help="comma-separated tokens like 1+,2+,1-")
    p.set_defaults(func=cmd_itinerary)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        raise exc
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # unexpected: report as I/O-level failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
