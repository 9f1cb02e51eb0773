"""Experiment configuration: JSON schema, defaults, and validation.

Unknown keys are rejected and every error names the offending field path.
The normalized dict that comes out of :func:`validate_config` is the single
source of truth the harness and the service run from.
"""

import math

from .errors import ConfigError

ALGORITHMS = (
    "plain_primal_dual",
    "optra_n",
    "optra",
    "dgd",
    "extra",
    "gradient_tracking",
)
PRIMAL_DUAL_ALGORITHMS = ("plain_primal_dual", "optra_n", "optra")
TOPOLOGY_KINDS = ("erdos_renyi", "line", "ring", "complete", "two_agent")
OBJECTIVE_KINDS = ("least_squares", "hard_two_agent", "hard_line", "logistic_csv", "zero")

BASELINE_STEP_SIZE_DEFAULT = 1e-5
HARD_ZETA_DEFAULT = 1.0 / 32.0


def _fail(path, message):
    raise ConfigError(f"{path}: {message}")


def _require(mapping, key, path):
    if key not in mapping:
        _fail(f"{path}.{key}" if path else key, "missing required field")
    return mapping[key]


def _as_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}, got {value}")
    return value


def _as_real(value, path, minimum=None, exclusive_min=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(path, "must be finite")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}, got {value}")
    if exclusive_min is not None and value <= exclusive_min:
        _fail(path, f"must be > {exclusive_min}, got {value}")
    if maximum is not None and value > maximum:
        _fail(path, f"must be <= {maximum}, got {value}")
    return value


def _as_choice(value, path, choices):
    if value not in choices:
        _fail(path, f"expected one of {list(choices)}, got {value!r}")
    return value


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            _fail(where, "unknown key")


def _validate_topology(raw, default_seed):
    if not isinstance(raw, dict):
        _fail("topology", "expected an object")
    allowed = {"kind", "m", "p", "seed"}
    _reject_unknown(raw, allowed, "topology")
    kind = _as_choice(_require(raw, "kind", "topology"), "topology.kind", TOPOLOGY_KINDS)
    m = _as_int(_require(raw, "m", "topology"), "topology.m", minimum=2)
    out = {"kind": kind, "m": m, "seed": raw.get("seed", default_seed)}
    _as_int(out["seed"], "topology.seed", minimum=0)
    if kind == "erdos_renyi":
        out["p"] = _as_real(_require(raw, "p", "topology"), "topology.p",
                            exclusive_min=0.0, maximum=1.0)
    elif "p" in raw:
        _fail("topology.p", f"only valid for erdos_renyi, not {kind}")
    if kind == "two_agent" and m != 2:
        _fail("topology.m", "two_agent topology requires m=2")
    return out


def _validate_objective(raw, topology_m, default_seed):
    if not isinstance(raw, dict):
        _fail("objective", "expected an object")
    kind = _as_choice(_require(raw, "kind", "objective"), "objective.kind", OBJECTIVE_KINDS)
    if kind == "least_squares":
        allowed = {"kind", "r", "d", "omega", "noise_sd", "seed"}
        _reject_unknown(raw, allowed, "objective")
        out = {
            "kind": kind,
            "r": _as_int(_require(raw, "r", "objective"), "objective.r", minimum=1),
            "d": _as_int(_require(raw, "d", "objective"), "objective.d", minimum=1),
            "omega": _as_real(raw.get("omega", 0.95), "objective.omega", minimum=0.0),
            "noise_sd": _as_real(raw.get("noise_sd", 0.5), "objective.noise_sd", minimum=0.0),
            "seed": raw.get("seed", default_seed + 1),
        }
        if out["omega"] >= 1.0:
            _fail("objective.omega", f"must be < 1, got {out['omega']}")
        _as_int(out["seed"], "objective.seed", minimum=0)
        return out
    if kind in ("hard_two_agent", "hard_line"):
        allowed = {"kind", "k", "d", "lf", "zeta"}
        if kind == "hard_two_agent":
            allowed.discard("zeta")
        _reject_unknown(raw, allowed, "objective")
        out = {
            "kind": kind,
            "k": _as_int(_require(raw, "k", "objective"), "objective.k", minimum=1),
            "d": _as_int(_require(raw, "d", "objective"), "objective.d", minimum=1),
            "lf": _as_real(raw.get("lf", 1.0), "objective.lf", exclusive_min=0.0),
        }
        if 2 * out["k"] + 1 > out["d"]:
            _fail("objective.d", f"need 2k+1 <= d, got k={out['k']}, d={out['d']}")
        if kind == "hard_two_agent" and topology_m != 2:
            _fail("objective.kind", "hard_two_agent requires a 2-node topology")
        if kind == "hard_line":
            out["zeta"] = _as_real(raw.get("zeta", HARD_ZETA_DEFAULT), "objective.zeta",
                                   exclusive_min=0.0)
            if out["zeta"] >= 0.5:
                _fail("objective.zeta", f"must be < 0.5, got {out['zeta']}")
            if topology_m < 3:
                _fail("objective.kind", "hard_line requires at least 3 nodes")
        return out
    if kind == "logistic_csv":
        allowed = {"kind", "path", "label_column"}
        _reject_unknown(raw, allowed, "objective")
        path = _require(raw, "path", "objective")
        label = _require(raw, "label_column", "objective")
        if not isinstance(path, str):
            _fail("objective.path", "expected a string")
        if not isinstance(label, str):
            _fail("objective.label_column", "expected a string")
        return {"kind": kind, "path": path, "label_column": label}
    # zero objective
    allowed = {"kind", "d"}
    _reject_unknown(raw, allowed, "objective")
    return {"kind": kind, "d": _as_int(_require(raw, "d", "objective"), "objective.d", minimum=1)}


def validate_config(raw):
    """Validate a run configuration and return it with defaults filled in."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    allowed = {
        "algorithm", "seed", "iterations", "tau_c", "grad_time", "record_every",
        "nu", "gamma", "tau", "k_gossip", "step_size", "emit_lower_bound",
        "topology", "objective",
    }
    _reject_unknown(raw, allowed, "")
    algorithm = _as_choice(_require(raw, "algorithm", ""), "algorithm", ALGORITHMS)
    seed = _as_int(_require(raw, "seed", ""), "seed", minimum=0)
    iterations = _as_int(_require(raw, "iterations", ""), "iterations", minimum=1)
    if algorithm in PRIMAL_DUAL_ALGORITHMS and iterations < 2:
        _fail("iterations", "primal-dual runs need a horizon of at least 2")
    out = {
        "algorithm": algorithm,
        "seed": seed,
        "iterations": iterations,
        "tau_c": _as_real(raw.get("tau_c", 1.0), "tau_c", minimum=0.0),
        "grad_time": _as_real(raw.get("grad_time", 1.0), "grad_time", exclusive_min=0.0),
        "emit_lower_bound": bool(raw.get("emit_lower_bound", False)),
    }
    if not isinstance(raw.get("emit_lower_bound", False), bool):
        _fail("emit_lower_bound", "expected true/false")

    record_every = raw.get("record_every")
    if record_every is None:
        record_every = max(1, math.ceil(iterations / 200))
    else:
        record_every = _as_int(record_every, "record_every", minimum=1)
    out["record_every"] = record_every

    nu = raw.get("nu", 1.0)
    if nu == "oracle":
        out["nu"] = "oracle"
    else:
        out["nu"] = _as_real(nu, "nu", exclusive_min=0.0)
    if algorithm not in PRIMAL_DUAL_ALGORITHMS and "nu" in raw:
        _fail("nu", f"only valid for {list(PRIMAL_DUAL_ALGORITHMS)}")

    # explicit step-size overrides for the primal-dual family; the run is
    # rejected at configuration time if they violate the feasibility condition
    for key in ("gamma", "tau"):
        if key in raw:
            if algorithm not in PRIMAL_DUAL_ALGORITHMS:
                _fail(key, f"only valid for {list(PRIMAL_DUAL_ALGORITHMS)}")
            out[key] = _as_real(raw[key], key, exclusive_min=0.0)
        else:
            out[key] = None

    k_gossip = raw.get("k_gossip")
    if k_gossip is not None:
        if algorithm != "optra":
            _fail("k_gossip", "only valid for the optra algorithm")
        out["k_gossip"] = _as_int(k_gossip, "k_gossip", minimum=1)
    else:
        out["k_gossip"] = None

    step_size = raw.get("step_size", BASELINE_STEP_SIZE_DEFAULT)
    out["step_size"] = _as_real(step_size, "step_size", exclusive_min=0.0)
    if algorithm in PRIMAL_DUAL_ALGORITHMS and "step_size" in raw:
        _fail("step_size", "primal-dual algorithms are tuned via nu, not step_size")

    out["topology"] = _validate_topology(_require(raw, "topology", ""), seed)
    out["objective"] = _validate_objective(
        _require(raw, "objective", ""), out["topology"]["m"], seed
    )
    return out
