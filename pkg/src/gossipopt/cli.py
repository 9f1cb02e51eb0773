"""Command-line front end.

The CLI is a thin client of the HTTP service: by default it mounts the
FastAPI app in-process (no sockets), and with --server it talks to a running
instance instead, so scripted and deployed usage share one code path.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

import argparse
import json
import sys
from pathlib import Path

_CONFIG_EXIT = 1
_RUNTIME_EXIT = 2


class ServiceClient:
    """POST JSON to the service, in-process or remote."""

    def __init__(self, server=None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path, payload):
        response = self._client.post(path, json=payload)
        if response.status_code >= 500:
            raise RuntimeError(_detail(response))
        if response.status_code >= 400:
            raise ValueError(_detail(response))
        return response.json()


def _detail(response):
    try:
        return response.json().get("detail", response.text)
    except Exception:  # noqa: BLE001
        return response.text


def _load_config(path, overrides):
    try:
        config = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValueError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    config.update({k: v for k, v in overrides.items() if v is not None})
    return config


def _overrides(args):
    return {
        "seed": args.seed,
        "iterations": args.iterations,
        "tau_c": args.tau_c,
        "nu": args.nu,
        "k_gossip": args.k_gossip,
        "step_size": args.step_size,
        "record_every": args.record_every,
    }


def _add_override_flags(parser):
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--iterations", type=int, help="override the horizon/step count")
    parser.add_argument("--tau-c", dest="tau_c", type=float, help="time per gossip round")
    parser.add_argument("--nu", type=float, help="primal-dual tuning parameter")
    parser.add_argument("--k-gossip", dest="k_gossip", type=int,
                        help="gossip rounds per call (optra only)")
    parser.add_argument("--step-size", dest="step_size", type=float,
                        help="baseline step size")
    parser.add_argument("--record-every", dest="record_every", type=int,
                        help="metric recording cadence")


def _write(out_dir, name, text):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    return out / name


def _cmd_run(args, client):
    config = _load_config(args.config, _overrides(args))
    result = client.post("/run", {"config": config, "csv_filename": "trace.csv"})
    _write(args.out, result["csv_filename"], result["csv"])
    _write(args.out, "plot.gp", result["plot_script"])
    _write(args.out, "meta.json", json.dumps(
        {"config": result["config"], "meta": result["meta"]}, sort_keys=True, indent=2,
    ) + "\n")
    final = result["records"][-1]
    print(f"run complete: k={final['k']} sim_time={final['sim_time']:g} "
          f"bregman={final['bregman']:.6g} fem={final['fem']:.6g} "
          f"consensus_err={final['consensus_err']:.6g}")
    print(f"artifacts written to {args.out}")
    return 0


def _cmd_sweep(args, client):
    configs = [_load_config(path, _overrides(args)) for path in args.configs]
    result = client.post("/sweep", {"configs": configs, "jobs": args.jobs})
    summary = []
    for item in result["results"]:
        if item["ok"]:
            run = item["run"]
            _write(args.out, run["csv_filename"], run["csv"])
            summary.append({
                "index": item["index"],
                "ok": True,
                "csv": run["csv_filename"],
                "algorithm": run["meta"]["algorithm"],
                "final_bregman": run["meta"]["final_bregman"],
            })
        else:
            summary.append({"index": item["index"], "ok": False, "error": item["error"]})
    if result["plot_script"]:
        _write(args.out, "plot.gp", result["plot_script"])
    _write(args.out, "summary.json", json.dumps(summary, sort_keys=True, indent=2) + "\n")
    failures = [s for s in summary if not s["ok"]]
    print(f"sweep complete: {len(summary) - len(failures)} ok, {len(failures)} failed")
    for item in failures:
        print(f"  config #{item['index']}: {item['error']}", file=sys.stderr)
    print(f"artifacts written to {args.out}")
    return 0


def _cmd_spectrum(args, client):
    try:
        edges = Path(args.graph).read_text()
    except FileNotFoundError:
        raise ValueError(f"edge list not found: {args.graph}") from None
    result = client.post("/spectrum", {"edges": edges})
    print(f"m={result['m']} edges={result['edge_count']}")
    print(f"lambda2={result['lambda2']:.12g}")
    print(f"lambda_max={result['lambda_max']:.12g}")
    print(f"eta={result['eigengap']:.12g}")
    print(f"K={result['gossip_rounds']}")
    return 0


def _cmd_hard_instance(args, client):
    kind = args.kind.replace("-", "_")
    payload = {"kind": kind, "k": args.k, "d": args.d, "lf": args.lf}
    if kind == "line":
        payload["m"] = args.m
        payload["zeta"] = args.zeta
    result = client.post("/hard-instance", payload)
    _write(args.out, "instance.json", json.dumps(result, sort_keys=True, indent=2) + "\n")
    print(f"instance kind={result['kind']} m={result['m']} d={result['d']} k={result['k']}")
    print(f"f_star={result['f_star']:.12g} grad_norm_star={result['grad_norm_star']:.12g}")
    print(f"written to {Path(args.out) / 'instance.json'}")
    return 0


def _cmd_validate(args, client):
    config = _load_config(args.config, _overrides(args))
    result = client.post("/validate-config", {"config": config})
    for err in result["errors"]:
        print(f"invalid: {err}", file=sys.stderr)
    for chk in result["checks"]:
        status = "ok" if chk["passed"] else "FAILED"
        stream = sys.stdout if chk["passed"] else sys.stderr
        print(f"check {chk['name']}: {status} ({chk['detail']})", file=stream)
    if not result["valid"]:
        return _CONFIG_EXIT
    print("config valid")
    return 0


def _cmd_serve(args, _client):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gossipopt",
        description="Distributed primal-dual optimization experiments over gossip networks",
    )
    parser.add_argument("--server", help="base URL of a running service "
                                         "(default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment, write CSV + plot script")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--out", required=True, help="output directory")
    _add_override_flags(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a batch of configs with failure isolation")
    p_sweep.add_argument("--configs", required=True, nargs="+", help="JSON config files")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    _add_override_flags(p_sweep)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_spec = sub.add_parser("spectrum", help="gossip spectrum of an edge-list graph")
    p_spec.add_argument("--graph", required=True, help="edge-list file, one 'i j' per line")
    p_spec.set_defaults(fn=_cmd_spectrum)

    p_hard = sub.add_parser("hard-instance",
                            help="build a worst-case split instance + closed-form reference")
    p_hard.add_argument("--kind", required=True, choices=["two-agent", "line"])
    p_hard.add_argument("--k", required=True, type=int, help="chain depth")
    p_hard.add_argument("--d", required=True, type=int, help="ambient dimension (>= 2k+1)")
    p_hard.add_argument("--lf", type=float, default=1.0, help="smoothness constant (default 1)")
    p_hard.add_argument("--m", type=int, default=8, help="agents for the line kind (default 8)")
    p_hard.add_argument("--zeta", type=float, default=1.0 / 32.0,
                        help="end-group fraction for the line kind (default 1/32)")
    p_hard.add_argument("--out", required=True, help="output directory")
    p_hard.set_defaults(fn=_cmd_hard_instance)

    p_val = sub.add_parser("validate-config",
                           help="dry-run connectivity and step-size feasibility checks")
    p_val.add_argument("--config", required=True, help="JSON config file")
    _add_override_flags(p_val)
    p_val.set_defaults(fn=_cmd_validate)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        client = None if args.command == "serve" else ServiceClient(args.server)
        return args.fn(args, client)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _CONFIG_EXIT
    except Exception as exc:  # noqa: BLE001 - map anything else to runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return _RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
