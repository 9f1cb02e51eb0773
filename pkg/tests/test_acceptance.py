"""Acceptance suite: one test per numbered criterion, each printing a
PASS/FAIL line. Criteria 9 and 10 share one batch of comparison runs
(module-scoped fixture)."""

import math
import time

import numpy as np
import pytest

from gossipopt import algorithms as alg
from gossipopt import consensus, linalg, network
from gossipopt import metrics as met
from gossipopt import objectives as obj
from gossipopt.harness import run_experiment
from gossipopt.objectives import ReferenceSolution, generate_least_squares


def _report(criterion, passed, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def chebyshev_t(k, t):
    if abs(t) <= 1.0:
        return math.cos(k * math.acos(t))
    sign = 1.0 if t > 0 else (-1.0) ** k
    return sign * math.cosh(k * math.acosh(abs(t)))


def test_criterion_1_spectral_correctness():
    start = time.monotonic()
    worst = 0.0
    for m in range(2, 17):
        path = network.laplacian(network.build_topology("line", m))
        expected = np.sort([2.0 - 2.0 * math.cos(k * math.pi / m) for k in range(m)])
        worst = max(worst, float(np.max(np.abs(path.eigen.values - expected))))
        if m >= 3:
            ring = network.laplacian(network.build_topology("ring", m))
            expected = np.sort([2.0 - 2.0 * math.cos(2.0 * math.pi * k / m) for k in range(m)])
            worst = max(worst, float(np.max(np.abs(ring.eigen.values - expected))))
    elapsed = time.monotonic() - start
    _report(1, worst <= 1e-8 and elapsed < 1.0,
            f"path/ring spectra worst error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_acc_gossip_spectral_equivalence():
    start = time.monotonic()
    worst_poly, worst_cons = 0.0, 0.0
    rng = np.random.default_rng(2024)
    for trial in range(20):
        m = 4 + trial % 17  # m <= 20
        graph = network.build_topology("erdos_renyi", m, seed=trial, p=0.5)
        scaled = network.scale_for_chebyshev(network.laplacian(graph))
        cheb = consensus.plan(scaled.eigengap)
        x = rng.standard_normal((m, 3))
        out = consensus.acc_gossip(x, scaled, cheb)
        tk = chebyshev_t(cheb.K, cheb.c1)
        vals = np.array([
            1.0 - chebyshev_t(cheb.K, cheb.c1 * (1.0 - lam)) / tk
            for lam in scaled.eigen.values
        ])
        q = scaled.eigen.vectors
        oracle = q @ np.diag(vals) @ q.T @ x
        worst_poly = max(worst_poly, float(np.max(np.abs(out - oracle))))
        consensual = np.tile(rng.standard_normal(3), (m, 1))
        worst_cons = max(worst_cons, float(np.max(np.abs(
            consensus.acc_gossip(consensual, scaled, cheb)
        ))))
    elapsed = time.monotonic() - start
    _report(2, worst_poly <= 1e-8 and worst_cons <= 1e-10 and elapsed < 5.0,
            f"spectral-oracle error {worst_poly:.2e}, consensual residue "
            f"{worst_cons:.2e}, {elapsed:.2f}s")


def test_criterion_3_contraction_certificate():
    worst_slack = -math.inf
    worst_amp = 0.0
    for trial in range(20):
        m = 4 + trial % 14
        graph = network.build_topology("erdos_renyi", m, seed=100 + trial, p=0.45)
        scaled = network.scale_for_chebyshev(network.laplacian(graph))
        cheb = consensus.plan(scaled.eigengap)  # default K = ceil(1/sqrt(eta))
        cert = consensus.contraction_certificate(scaled, cheb)
        worst_slack = max(worst_slack, cert - cheb.delta)
        worst_amp = max(worst_amp, math.sqrt((1.0 + cheb.delta) / (1.0 - cheb.delta)))
    for eta in [0.001, 0.01, 0.05, 0.25, 0.5, 1.0]:
        cheb = consensus.plan(eta)
        worst_amp = max(worst_amp, math.sqrt((1.0 + cheb.delta) / (1.0 - cheb.delta)))
    _report(3, worst_slack <= 1e-12 and worst_amp <= 2.5,
            f"certificate slack {worst_slack:.2e}, amplification {worst_amp:.3f} <= 2.5")


def test_criterion_4_schedule_bounds_and_feasibility():
    thetas = alg.theta_schedule(10_000)
    ks = np.arange(1, 10_002)
    bounds_ok = bool(
        np.all(thetas[1:] > 1.0 / (ks + 1.0))
        and np.all(thetas[1:] <= 2.0 / (ks + 1.0) + 1e-15)
    )
    worst_margin = math.inf
    for t in (10, 100, 1000):
        sched = alg.theta_schedule(t)
        for nu in (0.1, 1.0, 100.0):
            for lf in (1.0, 1e4):
                gamma = nu / (nu * lf + t)
                tau = 1.0 / (nu * t)  # lambda_max(B) = 1
                worst_margin = min(
                    worst_margin,
                    alg.feasibility_margin(gamma, tau, lf, 1.0, sched, t),
                )
    _report(4, bounds_ok and worst_margin >= -1e-12,
            f"theta bounds to k=1e4 {bounds_ok}, worst PSD margin {worst_margin:.2e}")


def test_criterion_5_certified_bound_over_seeded_runs():
    start = time.monotonic()
    grid = [(5, 0.6, 20, 100), (10, 0.35, 30, 100), (20, 0.2, 50, 500),
            (5, 0.6, 25, 500), (10, 0.35, 40, 100)]
    failures = []
    for run_idx in range(50):
        m, p, d, horizon = grid[run_idx % len(grid)]
        graph = network.build_topology("erdos_renyi", m, seed=run_idx, p=p)
        gossip = network.laplacian(graph)
        trace = run_experiment({
            "algorithm": "optra_n",
            "seed": run_idx,
            "iterations": horizon,
            "tau_c": 1.0,
            "nu": math.sqrt(gossip.eigengap),
            "record_every": horizon,
            "topology": {"kind": "erdos_renyi", "m": m, "p": p, "seed": run_idx},
            "objective": {"kind": "least_squares", "r": 4, "d": d,
                          "omega": 0.8, "seed": run_idx + 1000},
        })
        final = trace.records[-1]
        if not final.bregman <= final.certified_ub:
            failures.append((run_idx, final.bregman, final.certified_ub))
    elapsed = time.monotonic() - start
    _report(5, not failures and elapsed < 60.0,
            f"50/50 runs satisfied G(u^T) <= certified bound, {elapsed:.1f}s"
            + (f"; failures: {failures}" if failures else ""))


def test_criterion_6_reduction_and_equivalence_oracles():
    details = []

    # (a) accelerated scheme with alpha=0, sigma=1, tau_k=tau, beta=1
    inst = generate_least_squares(m=4, r=3, d=6, omega=0.5, noise_sd=0.5, seed=5)
    gossip = network.laplacian(network.build_topology("ring", 4))
    a, b = alg.default_weight_pair(gossip)
    rng = np.random.default_rng(6)
    x1 = rng.standard_normal((4, 6))
    plain = alg.init_plain(inst, a, b, nu=1.0, x1=x1)
    accel = alg.init_accelerated(inst, a, b, nu=1.0, horizon=300, x1=x1)
    accel.gamma, accel.tau = plain.gamma, plain.tau
    accel.alphas[:] = 0.0
    accel.sigmas[:] = 1.0
    accel.taus_k[:] = plain.tau
    accel.betas[:] = 1.0
    accel.y_hat = plain.tau * (b @ x1)
    worst_a = 0.0
    for _ in range(200):
        alg.plain_primal_dual_step(plain, inst)
        alg.optra_n_step(accel, inst)
        worst_a = max(worst_a, float(np.max(np.abs(accel.u - plain.x))))
    details.append(f"(a) reduction {worst_a:.2e} <= 1e-14")

    # (b) EXTRA two-variable vs absorbed recursion
    inst_b = generate_least_squares(m=4, r=3, d=5, omega=0.6, noise_sd=0.5, seed=7)
    w = alg.mixing_matrix(network.laplacian(
        network.build_topology("erdos_renyi", 4, seed=2, p=0.6)))
    gamma = 0.5 / inst_b.lf
    x0 = np.random.default_rng(8).standard_normal((4, 5))
    state = alg.init_extra(inst_b, w, gamma, x0=x0)
    xs = [x0, w @ x0 - gamma * inst_b.stack_gradient(x0)]
    for _ in range(100):
        xs.append(2.0 * (w @ xs[-1]) - w @ xs[-2]
                  - gamma * (inst_b.stack_gradient(xs[-1]) - inst_b.stack_gradient(xs[-2])))
    worst_b = 0.0
    for k in range(1, 101):
        alg.extra_step(state, inst_b)
        worst_b = max(worst_b, float(np.max(np.abs(state.x - xs[k]))))
    details.append(f"(b) extra {worst_b:.2e} <= 1e-10")

    # (c) gradient tracking vs absorbed recursion
    state_c = alg.init_gradient_tracking(inst_b, w, gamma, x0=x0)
    xs = [x0, w @ x0 - gamma * inst_b.stack_gradient(x0)]
    for _ in range(100):
        xs.append(2.0 * (w @ xs[-1]) - w @ (w @ xs[-2])
                  - gamma * (inst_b.stack_gradient(xs[-1]) - inst_b.stack_gradient(xs[-2])))
    worst_c = 0.0
    for k in range(1, 101):
        alg.gradient_tracking_step(state_c, inst_b)
        worst_c = max(worst_c, float(np.max(np.abs(state_c.x - xs[k]))))
    details.append(f"(c) tracking {worst_c:.2e} <= 1e-10")

    # (d) Chebyshev scheme on the complete pair matches the Nesterov scheme
    inst_d = generate_least_squares(m=2, r=3, d=4, omega=0.4, noise_sd=0.5, seed=9)
    gossip_d = network.laplacian(network.build_topology("complete", 2))
    scaled = network.scale_for_chebyshev(gossip_d)
    cheb = consensus.plan(gossip_d.eigengap)
    horizon = 200
    cheb_state = alg.init_chebyshev(inst_d, scaled, cheb, nu=1.0, horizon=horizon)
    accel_d = alg.init_accelerated(inst_d, np.eye(2) - scaled.matrix, scaled.matrix,
                                   nu=1.0, horizon=horizon)
    worst_d = 0.0
    for _ in range(horizon - 1):
        alg.optra_step(cheb_state, inst_d)
        alg.optra_n_step(accel_d, inst_d)
        worst_d = max(worst_d, float(np.max(np.abs(cheb_state.u - accel_d.u))))
    details.append(f"(d) pair equivalence {worst_d:.2e} <= 1e-12")

    ok = worst_a <= 1e-14 and worst_b <= 1e-10 and worst_c <= 1e-10 and worst_d <= 1e-12
    _report(6, ok, "; ".join(details))


def test_criterion_7_hard_instance_closed_forms():
    lf = 4.0
    d = 25
    worst_opt, worst_grad = 0.0, 0.0
    for k in range(1, 11):
        inst = obj.generate_hard_instance("two_agent", k=k, d=d, lf=lf)
        ref = inst.reference
        # unrestricted optimum
        worst_opt = max(worst_opt, abs(ref.f_star - lf / 8.0 * (-1.0 + 1.0 / (k + 1.0))))
        # gradient norm closed form
        grad_norm = float(np.sqrt(np.sum(ref.grad_at_star**2)))
        worst_grad = max(worst_grad,
                         abs(grad_norm - math.sqrt(2.0 * k) * lf / (4.0 * (k + 1.0))))
        # restricted optima against brute-force linear solves
        a1, a2 = obj.hard_split_matrices(k, d)
        a_vec = obj.hard_alternating_vector(k, d)
        for j in range(1, 2 * k + 2):
            h = np.zeros((2 * j, 2 * j))
            h[:j, :j] = lf / 4.0 * a1[:j, :j]
            h[j:, j:] = lf / 4.0 * a2[:j, :j]
            c = np.zeros(2 * j)
            c[:j] = -lf / 4.0 * np.eye(d)[0][:j] + lf / (4.0 * (k + 1.0)) * a_vec[:j]
            c[j:] = -lf / (4.0 * (k + 1.0)) * a_vec[:j]
            z, *_ = np.linalg.lstsq(h, -c, rcond=None)
            brute = float(0.5 * z @ (h @ z) + c @ z)
            worst_opt = max(worst_opt,
                            abs(brute - obj.hard_restricted_optimum(k, j, lf)))
            if j <= k:  # the polynomial expression applies on its domain
                formula = -(lf / 8.0) * (k * k + j) / ((k + 1.0) ** 2)
                worst_opt = max(worst_opt, abs(brute - formula))
    _report(7, worst_opt <= 1e-8 and worst_grad <= 1e-10,
            f"restricted/unrestricted optima error {worst_opt:.2e}, "
            f"gradient-norm error {worst_grad:.2e}")


def test_criterion_8_bregman_metric_properties():
    inst = generate_least_squares(m=3, r=4, d=6, omega=0.8, noise_sd=0.5, seed=2)
    ref = obj.solve_reference(inst)
    rng = np.random.default_rng(88)
    min_g = math.inf
    for _ in range(1000):
        x = 5.0 * rng.standard_normal((3, 6))
        min_g = min(min_g, met.bregman(x, ref, inst))
    stack = ref.stack(inst.m)
    at_opt = max(abs(met.bregman(stack, ref, inst)), met.consensus_error(stack))

    # solution-set invariance on a rank-deficient instance
    inst_rd = generate_least_squares(m=2, r=2, d=10, omega=0.0, noise_sd=0.5, seed=5)
    ref_rd = obj.solve_reference(inst_rd)
    a = np.vstack([o.a for o in inst_rd.oracles])
    null = np.linalg.svd(a)[2][-1]
    x2 = ref_rd.x_star + 3.0 * null
    ref2 = ReferenceSolution(
        x_star=x2, f_star=inst_rd.total_value(x2),
        grad_at_star=np.stack([inst_rd.local_gradient(i, x2) for i in range(2)]),
    )
    worst_inv = 0.0
    for _ in range(50):
        x = rng.standard_normal((2, 10))
        g1 = met.bregman(x, ref_rd, inst_rd)
        g2 = met.bregman(x, ref2, inst_rd)
        worst_inv = max(worst_inv, abs(g1 - g2) / max(1.0, abs(g1)))

    # Bregman-Lagrangian identity on random duals in the feasible space
    worst_ident = 0.0
    x_star_stack = ref.stack(inst.m)
    for _ in range(50):
        x = rng.standard_normal((3, 6))
        y = met.project_dual(rng.standard_normal((3, 6)))
        phi_diff = (met.lagrangian(x, ref.y_star, inst)
                    - met.lagrangian(x_star_stack, y, inst))
        g = met.bregman(x, ref, inst)
        worst_ident = max(worst_ident, abs(phi_diff - g) / max(1.0, abs(g)))

    ok = (min_g >= -1e-10 and at_opt <= 1e-10 and worst_inv <= 1e-9
          and worst_ident <= 1e-9)
    _report(8, ok,
            f"min G {min_g:.2e} >= -1e-10, optimum residue {at_opt:.2e}, "
            f"invariance {worst_inv:.2e}, identity {worst_ident:.2e}")


# --- criteria 9 and 10 share one batch of runs -----------------------------

COMPARISON_SEEDS = (0, 1, 2, 3, 4)


def _comparison_config(algorithm, seed, iterations, record_every, **kw):
    cfg = {
        "algorithm": algorithm,
        "seed": seed,
        "iterations": iterations,
        "tau_c": 1.0,
        "record_every": record_every,
        "topology": {"kind": "erdos_renyi", "m": 20, "p": 0.1},
        "objective": {"kind": "least_squares", "r": 10, "d": 100, "omega": 0.95},
    }
    cfg.update(kw)
    return cfg


@pytest.fixture(scope="module")
def comparison_runs():
    """Desk-scale five-algorithm comparison on the ill-conditioned regression
    instance, five seeds. Baselines run at half their stability limit
    (0.5/Lf) so their traces flatten within the budget; the accelerated
    schemes use the canonical settings (default gossip depth, nu=100 for the
    Chebyshev scheme, nu=10 for the Nesterov scheme)."""
    started = time.monotonic()
    batch = {}
    for seed in COMPARISON_SEEDS:
        inst = generate_least_squares(m=20, r=10, d=100, omega=0.95,
                                      noise_sd=0.5, seed=seed + 1)
        step = 0.5 / inst.lf
        batch[seed] = {
            "dgd": run_experiment(_comparison_config(
                "dgd", seed, 40000, 2000, step_size=step)),
            "extra": run_experiment(_comparison_config(
                "extra", seed, 40000, 2000, step_size=step)),
            "gradient_tracking": run_experiment(_comparison_config(
                "gradient_tracking", seed, 26666, 2000, step_size=step)),
            "optra_n": run_experiment(_comparison_config(
                "optra_n", seed, 26666, 2000, nu=10.0)),
            "optra": run_experiment(_comparison_config(
                "optra", seed, 16000, 200, nu=100.0)),
        }
    return batch, time.monotonic() - started


def _flattened(trace, budget):
    """Most of the window's log-progress is over: the trailing quarter of the
    budget contributes at most 15% of the total log-decrease."""
    recs = [r for r in trace.records if r.sim_time <= budget and r.bregman > 0]
    total = math.log(recs[0].bregman / recs[-1].bregman)
    tail = [r for r in recs if r.sim_time >= 0.75 * budget]
    tail_drop = math.log(tail[0].bregman / recs[-1].bregman) if tail else 0.0
    return tail_drop <= 0.15 * total


def test_criterion_9_desk_scale_ordering(comparison_runs):
    batch, elapsed = comparison_runs
    passes, lines = 0, []
    for seed, runs in batch.items():
        budget = min(tr.records[-1].sim_time for tr in runs.values())
        g = {name: [r for r in tr.records if r.sim_time <= budget][-1].bregman
             for name, tr in runs.items()}
        flat = _flattened(runs["dgd"], budget) and _flattened(runs["extra"], budget)
        ordered = (
            g["optra"] < g["optra_n"]
            and g["optra_n"] < min(g["extra"], g["gradient_tracking"])
            and g["dgd"] > max(g["optra"], g["optra_n"], g["extra"])
        )
        passes += bool(ordered and flat)
        lines.append(
            f"seed {seed}: optra={g['optra']:.3g} optra_n={g['optra_n']:.3g} "
            f"extra={g['extra']:.3g} gt={g['gradient_tracking']:.3g} "
            f"dgd={g['dgd']:.3g} flat={flat} {'ok' if ordered else 'violated'}"
        )
    detail = f"{passes}/5 seeds ordered at the flattening budget ({elapsed:.0f}s); " \
             + " | ".join(lines)
    _report(9, passes >= 4 and elapsed < 300.0, detail)


def test_criterion_10_consensus_error_decay(comparison_runs):
    batch, _ = comparison_runs
    decay_ok, noninc_ok, lines = 0, 0, []
    for seed, runs in batch.items():
        recs = runs["optra"].records
        c2 = next(r for r in recs if r.k == 2).consensus_err
        c_final = recs[-1].consensus_err
        ratio = c_final / c2
        tail = recs[int(0.9 * len(recs)):]
        noninc = all(b.consensus_err <= a.consensus_err * 1.10
                     for a, b in zip(tail, tail[1:]))
        decay_ok += ratio <= 1e-3
        noninc_ok += noninc
        lines.append(f"seed {seed}: ratio={ratio:.2e} trailing-noninc={noninc}")
    detail = (f"decay<=1e-3 on {decay_ok}/5 seeds, trailing monotone on "
              f"{noninc_ok}/5; " + " | ".join(lines))
    _report(10, decay_ok >= 4 and noninc_ok >= 4, detail)
