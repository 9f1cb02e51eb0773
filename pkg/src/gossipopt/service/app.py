"""FastAPI service exposing the experiment harness.

Endpoints mirror the CLI subcommands: /run executes one configured
experiment and returns the trace plus ready-to-write CSV and gnuplot
artifacts; /sweep runs a batch with failure isolation; /spectrum reports the
gossip spectrum of an edge list; /hard-instance builds a worst-case split
instance with its closed-form reference; /validate-config dry-runs the
feasibility checks without executing anything.

Configuration problems map to HTTP 422 (the CLI turns them into exit 1);
runtime failures map to HTTP 500 (exit 2).
"""

from fastapi import FastAPI, HTTPException

from ..consensus import plan as chebyshev_plan
from ..errors import ConfigError, GossipOptError, ParseError
from ..harness import dry_run_checks, gnuplot_script, run_experiment, sweep
from ..network import laplacian, parse_edge_list
from ..objectives import (
    generate_hard_instance,
    hard_gradient_norm,
    hard_restricted_optimum,
)
from .schemas import (
    CheckResult,
    HardInstanceRequest,
    HardInstanceResponse,
    RunRequest,
    RunResponse,
    SpectrumRequest,
    SpectrumResponse,
    SweepItemResult,
    SweepRequest,
    SweepResponse,
    TraceRecordModel,
    ValidateRequest,
    ValidateResponse,
)

app = FastAPI(
    title="gossipopt",
    description="Distributed primal-dual optimization experiments over gossip networks",
)


def _trace_to_response(trace, csv_filename):
    records = [TraceRecordModel(**vars(rec)) for rec in trace.records]
    script = gnuplot_script([csv_filename], [trace.meta["algorithm"]])
    return RunResponse(
        config=trace.config,
        meta=trace.meta,
        records=records,
        csv=trace.to_csv(),
        csv_filename=csv_filename,
        plot_script=script,
    )


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/run", response_model=RunResponse)
def run(request: RunRequest):
    try:
        trace = run_experiment(request.config)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except GossipOptError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return _trace_to_response(trace, request.csv_filename)


@app.post("/sweep", response_model=SweepResponse)
def run_sweep(request: SweepRequest):
    if not request.configs:
        raise HTTPException(status_code=422, detail="configs: empty sweep")
    results = sweep(request.configs, jobs=request.jobs)
    items = []
    ok_names, ok_labels = [], []
    for res in results:
        name = request.csv_pattern.format(index=res.index)
        if res.ok:
            items.append(SweepItemResult(
                index=res.index, ok=True, run=_trace_to_response(res.trace, name),
            ))
            ok_names.append(name)
            ok_labels.append(f"{res.trace.meta['algorithm']}#{res.index}")
        else:
            items.append(SweepItemResult(index=res.index, ok=False, error=res.error))
    script = gnuplot_script(ok_names, ok_labels) if ok_names else ""
    return SweepResponse(results=items, plot_script=script)


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum(request: SpectrumRequest):
    try:
        graph = parse_edge_list(request.edges)
        gossip = laplacian(graph)
    except (ParseError, GossipOptError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    rounds = chebyshev_plan(gossip.eigengap).K
    return SpectrumResponse(
        m=graph.m,
        edge_count=len(graph.edges),
        lambda2=gossip.lambda2,
        lambda_max=gossip.lambda_max,
        eigengap=gossip.eigengap,
        gossip_rounds=rounds,
    )


@app.post("/hard-instance", response_model=HardInstanceResponse)
def hard_instance(request: HardInstanceRequest):
    try:
        inst = generate_hard_instance(
            request.kind, k=request.k, d=request.d, lf=request.lf,
            m=request.m, zeta=request.zeta,
        )
    except GossipOptError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    ref = inst.reference
    pairs = inst.meta["pairs"]
    restricted = {
        str(j): pairs * hard_restricted_optimum(request.k, j, request.lf)
        for j in range(1, request.k + 1)
    }
    return HardInstanceResponse(
        kind=inst.kind,
        m=inst.m,
        d=inst.d,
        k=request.k,
        lf=inst.lf,
        pairs=pairs,
        x_star=ref.x_star.tolist(),
        f_star=ref.f_star,
        grad_norm_star=hard_gradient_norm(request.k, request.lf, pairs),
        restricted_optima=restricted,
        quadratic_terms=[o.q.tolist() for o in inst.oracles],
        linear_terms=[o.c.tolist() for o in inst.oracles],
    )


@app.post("/validate-config", response_model=ValidateResponse)
def validate(request: ValidateRequest):
    try:
        config, checks = dry_run_checks(request.config)
    except ConfigError as exc:
        return ValidateResponse(valid=False, errors=[str(exc)])
    results = [CheckResult(name=n, passed=p, detail=d) for n, p, d in checks]
    return ValidateResponse(
        valid=all(c.passed for c in results),
        config=config,
        checks=results,
    )
