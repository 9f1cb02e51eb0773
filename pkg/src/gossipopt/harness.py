"""Experiment orchestration: cost accounting, trace recording, sweeps,
equal-budget comparison, and CSV/plot-script artifacts.

The simulated clock charges one time unit per gradient evaluation
(rescalable via ``grad_time``) and ``tau_c`` per gossip round, so every
record satisfies sim_time = grad_evals*grad_time + comm_rounds*tau_c
exactly; budgets for cross-algorithm comparison live on this clock.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algorithms as alg
from . import metrics as met
from .config import validate_config
from .consensus import plan as chebyshev_plan
from .errors import BudgetTooSmall, GossipOptError
from .linalg import frobenius_norm
from .network import build_topology, laplacian, scale_for_chebyshev
from .objectives import (
    generate_hard_instance,
    generate_least_squares,
    load_csv_file,
    solve_reference,
    zero_instance,
)

CSV_HEADER = "k,grad_evals,comm_rounds,sim_time,bregman,fem,consensus_err,certified_ub,lower_bound_ref"


@dataclass(frozen=True)
class CostModel:
    """Simulated time: gradients cost ``grad_time`` (1 when normalized),
    each gossip round costs ``tau_c``."""

    tau_c: float
    grad_time: float = 1.0

    def time(self, grad_evals, comm_rounds):
        return grad_evals * self.grad_time + comm_rounds * self.tau_c


@dataclass(frozen=True)
class TraceRecord:
    k: int
    grad_evals: int
    comm_rounds: int
    sim_time: float
    bregman: float
    fem: float
    consensus_err: float
    certified_ub: Optional[float] = None
    lower_bound_ref: Optional[float] = None


@dataclass
class RunTrace:
    records: list
    config: dict
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.records[-1]

    def to_csv(self):
        lines = [CSV_HEADER]
        for rec in self.records:
            lines.append(",".join([
                str(rec.k),
                str(rec.grad_evals),
                str(rec.comm_rounds),
                _fmt(rec.sim_time),
                _fmt(rec.bregman),
                _fmt(rec.fem),
                _fmt(rec.consensus_err),
                _fmt(rec.certified_ub),
                _fmt(rec.lower_bound_ref),
            ]))
        return "\n".join(lines) + "\n"


def _fmt(value):
    if value is None:
        return ""
    return f"{value:.17g}"


def build_instance(config):
    """Objective instance for a validated config (topology supplies m)."""
    obj = config["objective"]
    m = config["topology"]["m"]
    if obj["kind"] == "least_squares":
        return generate_least_squares(
            m=m, r=obj["r"], d=obj["d"], omega=obj["omega"],
            noise_sd=obj["noise_sd"], seed=obj["seed"],
        )
    if obj["kind"] == "hard_two_agent":
        return generate_hard_instance("two_agent", k=obj["k"], d=obj["d"], lf=obj["lf"])
    if obj["kind"] == "hard_line":
        return generate_hard_instance(
            "line", k=obj["k"], d=obj["d"], lf=obj["lf"], m=m, zeta=obj["zeta"]
        )
    if obj["kind"] == "logistic_csv":
        return load_csv_file(obj["path"], obj["label_column"], m)
    return zero_instance(m, obj["d"])


def _resolve_nu(config, inst, ref, gossip):
    """Numeric nu, or the oracle-informed balance when requested."""
    nu = config["nu"]
    if nu != "oracle":
        return float(nu)
    m = config["topology"]["m"]
    rx = float(np.sum(ref.stack(m) ** 2))  # zero start: |x1 - x*|^2
    ry = float(np.sum(ref.grad_at_star**2))
    if ry <= 0.0 or rx <= 0.0:
        return 1.0
    if config["algorithm"] == "optra":
        return math.sqrt(rx / ry)
    return math.sqrt(gossip.eigengap * rx / ry)


def _record_points(total, record_every):
    points = {1, 2, total}
    k = record_every
    while k <= total:
        points.add(k)
        k += record_every
    return points


def build_primal_dual_state(config, inst, gossip, nu):
    """State plus metadata for a primal-dual run; raises StepSizeInfeasible
    when the (possibly overridden) step sizes violate the feasibility
    condition."""
    algorithm = config["algorithm"]
    horizon = config["iterations"]
    gamma, tau = config.get("gamma"), config.get("tau")
    if algorithm == "optra":
        scaled = scale_for_chebyshev(gossip)
        cheb = chebyshev_plan(gossip.eigengap, config["k_gossip"])
        state = alg.init_chebyshev(inst, scaled, cheb, nu, horizon,
                                   gamma=gamma, tau=tau)
        extras = {"chebyshev": {"K": cheb.K, "delta": cheb.delta, "c2": cheb.c2}}
        return state, extras
    a, b = alg.default_weight_pair(gossip)
    if algorithm == "plain_primal_dual":
        return alg.init_plain(inst, a, b, nu, gamma=gamma, tau=tau), {}
    return alg.init_accelerated(inst, a, b, nu, horizon, gamma=gamma, tau=tau), {}


def dry_run_checks(config):
    """Connectivity and step-size feasibility without executing the run.

    Returns a list of (name, passed, detail) tuples; validation errors in the
    config itself raise ConfigError before any check runs.
    """
    config = validate_config(config)
    checks = []
    gossip = None
    try:
        graph = build_topology(
            config["topology"]["kind"], config["topology"]["m"],
            seed=config["topology"]["seed"], p=config["topology"].get("p"),
        )
        gossip = laplacian(graph)
        checks.append((
            "connectivity", True,
            f"connected, lambda_2 = {gossip.lambda2:.6g}, "
            f"eta = {gossip.eigengap:.6g}",
        ))
    except GossipOptError as exc:
        checks.append(("connectivity", False, str(exc)))

    if gossip is not None and config["algorithm"] in (
            "plain_primal_dual", "optra_n", "optra"):
        try:
            inst = build_instance(config)
            ref = solve_reference(inst)
            nu = _resolve_nu(config, inst, ref, gossip)
            state, _ = build_primal_dual_state(config, inst, gossip, nu)
            checks.append((
                "step_size_feasibility", True,
                f"gamma = {state.gamma:.6g}, tau = {state.tau:.6g} satisfy "
                "(1 - gamma*Lf)*I - (gamma*tau/theta_k^2)*B >= 0",
            ))
        except GossipOptError as exc:
            checks.append(("step_size_feasibility", False, str(exc)))
    return config, checks


def run_experiment(config):
    """Execute one configured run and return its trace.

    Primal-dual algorithms treat ``iterations`` as the tuning horizon T and
    perform T-1 steps ending at u^T (x-bar^T for the plain scheme); baselines
    perform ``iterations`` steps from x^0. Metrics are recorded every
    ``record_every`` iterations plus the first, second, and final iterates.
    """
    config = validate_config(config)
    cost = CostModel(tau_c=config["tau_c"], grad_time=config["grad_time"])
    graph = build_topology(
        config["topology"]["kind"], config["topology"]["m"],
        seed=config["topology"]["seed"], p=config["topology"].get("p"),
    )
    gossip = laplacian(graph)
    inst = build_instance(config)
    ref = solve_reference(inst)
    algorithm = config["algorithm"]
    nu = _resolve_nu(config, inst, ref, gossip)

    meta = {
        "algorithm": algorithm,
        "instance_hash": inst.fingerprint(),
        "eta": gossip.eigengap,
        "lambda2": gossip.lambda2,
        "lambda_max": gossip.lambda_max,
        "lf": inst.lf,
        "edges": len(graph.edges),
    }

    is_hard = inst.kind.startswith("hard_")
    emit_lb = is_hard or config["emit_lower_bound"]
    if emit_lb:
        rx0 = float(np.sum(ref.stack(inst.m) ** 2))
        lb_params = {
            "lf": inst.lf,
            "r": math.sqrt(rx0),
            "grad_norm_star": frobenius_norm(ref.grad_at_star),
            "eta": gossip.eigengap,
            "pairs": inst.meta.get("pairs", 1),
        }
        if not is_hard:
            meta["lower_bound_reference_only"] = True

    certified_ub = None
    if algorithm in ("plain_primal_dual", "optra_n", "optra"):
        horizon = config["iterations"]
        state, extras = build_primal_dual_state(config, inst, gossip, nu)
        if algorithm == "plain_primal_dual":
            step = lambda: alg.plain_primal_dual_step(state, inst)
            init_grad, init_comm = 0, 1
        elif algorithm == "optra_n":
            step = lambda: alg.optra_n_step(state, inst)
            init_grad, init_comm = 0, 1
            rx = float(np.sum((state.u - ref.stack(inst.m)) ** 2))
            certified_ub = met.certified_upper_bound(
                horizon, state.gamma, state.tau, rx, state.lambda2_b,
                float(np.sum(ref.y_star**2)),
            )
        else:
            step = lambda: alg.optra_step(state, inst)
            init_grad, init_comm = 0, state.cheb.K
        meta.update(extras)
        meta["gamma"] = state.gamma
        meta["tau"] = state.tau
        meta["nu"] = nu
        steps = horizon - 1
        first_k = 1
        current_iterate = lambda: state.average() if algorithm == "plain_primal_dual" else state.u
    else:
        w = alg.mixing_matrix(gossip)
        gamma = config["step_size"]
        if algorithm == "dgd":
            state = alg.init_dgd(inst, w, gamma)
            init_grad, init_comm = 0, 0
        elif algorithm == "extra":
            state = alg.init_extra(inst, w, gamma)
            init_grad, init_comm = 0, 1
        else:
            state = alg.init_gradient_tracking(inst, w, gamma)
            init_grad, init_comm = 1, 0
        step = lambda: alg.baseline_step(algorithm, state, inst)
        meta["step_size"] = gamma
        steps = config["iterations"]
        first_k = 0
        current_iterate = lambda: state.x

    grad_evals, comm_rounds = init_grad, init_comm
    records = []
    points = _record_points(first_k + steps, config["record_every"])

    def record(k, iterate, final=False):
        sim_time = cost.time(grad_evals, comm_rounds)
        snap = met.snapshot(iterate, ref, inst)
        lb = None
        if emit_lb:
            lb = met.lower_bound_curve(
                sim_time, lb_params["lf"], lb_params["r"],
                lb_params["grad_norm_star"], lb_params["eta"], cost.tau_c,
                pairs=lb_params["pairs"],
            )
        records.append(TraceRecord(
            k=k, grad_evals=grad_evals, comm_rounds=comm_rounds,
            sim_time=sim_time, bregman=snap.bregman, fem=snap.fem,
            consensus_err=snap.consensus_err,
            certified_ub=certified_ub if final else None,
            lower_bound_ref=lb,
        ))

    record(first_k, current_iterate(), final=(steps == 0))
    for i in range(steps):
        report = step()
        grad_evals += report.grad_evals
        comm_rounds += report.comm_rounds
        k = first_k + i + 1
        if k in points:
            record(k, report.iterate, final=(i == steps - 1))

    meta["final_bregman"] = records[-1].bregman
    meta["final_fem"] = records[-1].fem
    meta["final_consensus_err"] = records[-1].consensus_err
    return RunTrace(records=records, config=config, seed=config["seed"], meta=meta)


@dataclass
class SweepResult:
    index: int
    config: dict
    trace: Optional[RunTrace] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.trace is not None


def sweep(configs, jobs=1):
    """Run every config; failures are recorded per-config and do not abort.

    Results come back in input order regardless of execution order.
    """
    if not configs:
        raise GossipOptError("sweep needs at least one config")

    def one(idx_config):
        idx, cfg = idx_config
        try:
            return SweepResult(index=idx, config=cfg, trace=run_experiment(cfg))
        except Exception as exc:  # noqa: BLE001 - failure isolation by design
            return SweepResult(index=idx, config=cfg, error=f"{type(exc).__name__}: {exc}")

    items = list(enumerate(configs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, items))
    else:
        results = [one(item) for item in items]
    return sorted(results, key=lambda r: r.index)


def compare_at_budget(traces, budget):
    """For each trace, the last record within the sim-time budget, ranked by
    bregman ascending with fem as tie-break."""
    if not traces:
        raise GossipOptError("nothing to compare")
    picked = []
    for trace in traces:
        eligible = [rec for rec in trace.records if rec.sim_time <= budget]
        if not eligible:
            raise BudgetTooSmall(
                f"budget {budget} precedes the first record "
                f"(sim_time {trace.records[0].sim_time}) of a trace"
            )
        picked.append((trace, eligible[-1]))
    picked.sort(key=lambda pair: (pair[1].bregman, pair[1].fem))
    return picked


def gnuplot_script(csv_names, labels, metric="bregman", output="compare.png"):
    """Three-panel comparison script: metric vs total cost, gossip rounds,
    and gradient evaluations, y log-scaled."""
    column = {"bregman": 5, "fem": 6, "consensus_err": 7}[metric]
    panels = [("total cost", 4), ("communication cost", 3), ("computation cost", 2)]
    lines = [
        "set datafile separator comma",
        "set terminal pngcairo size 1800,520",
        f"set output '{output}'",
        "set logscale y",
        "set key outside right",
        "set multiplot layout 1,3",
    ]
    for title, xcol in panels:
        lines.append(f"set xlabel '{title}'")
        lines.append(f"set ylabel '{metric}'")
        plots = ", ".join(
            f"'{name}' using {xcol}:{column} every ::1 with lines title '{label}'"
            for name, label in zip(csv_names, labels)
        )
        lines.append("plot " + plots)
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"
