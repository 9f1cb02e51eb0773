import math

import numpy as np
import pytest

from gossipopt import consensus, network
from gossipopt.errors import InvalidEigengap, ShapeError


def chebyshev_t(k, t):
    """Closed-form Chebyshev polynomial, independent of the module's recurrence."""
    if abs(t) <= 1.0:
        return math.cos(k * math.acos(t))
    sign = 1.0 if t > 0 else (-1.0) ** k
    return sign * math.cosh(k * math.acosh(abs(t)))


def spectral_poly_apply(scaled, cheb, x):
    """Oracle: Q diag(P_K(lambda)) Q^T x via the eigendecomposition and the
    closed-form Chebyshev evaluation."""
    tk_c1 = chebyshev_t(cheb.K, cheb.c1)
    vals = np.array([
        1.0 - chebyshev_t(cheb.K, cheb.c1 * (1.0 - lam)) / tk_c1
        for lam in scaled.eigen.values
    ])
    q = scaled.eigen.vectors
    return q @ np.diag(vals) @ q.T @ x


class TestPlan:
    def test_third_eigengap_constants(self):
        p = consensus.plan(1.0 / 3.0)
        assert p.K == 2  # ceil(sqrt(3))
        assert abs(p.c1 - 2.0) < 1e-12
        # frozen from exact arithmetic: c0 = 2 - sqrt(3), delta = 1/7, c2 = 7/8
        assert abs(p.c0 - (2.0 - math.sqrt(3.0))) < 1e-12
        assert abs(p.delta - 1.0 / 7.0) < 1e-12
        assert abs(p.c2 - 7.0 / 8.0) < 1e-12

    def test_degenerate_complete_graph(self):
        p = consensus.plan(1.0)
        assert p.K == 1 and p.c0 == 0.0 and p.delta == 0.0 and p.c2 == 1.0

    def test_override(self):
        p = consensus.plan(0.04, k_override=2)
        assert p.K == 2
        assert consensus.plan(0.04).K == 5  # ceil(1/0.2)

    def test_invalid(self):
        with pytest.raises(InvalidEigengap):
            consensus.plan(0.0)
        with pytest.raises(InvalidEigengap):
            consensus.plan(1.5)

    @pytest.mark.parametrize("eta", [0.01, 0.1, 1.0 / 3.0, 0.8, 1.0])
    def test_invariants(self, eta):
        p = consensus.plan(eta)
        assert p.K >= 1
        assert 0.0 <= p.c0 < 1.0
        assert 0.5 < p.c2 <= 1.0
        assert 0.0 <= p.delta < 1.0


class TestAccGossip:
    def test_consensual_maps_to_zero(self):
        gossip = network.laplacian(network.build_topology("line", 5))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        x = np.tile(np.array([3.0, -1.0]), (5, 1))
        assert np.max(np.abs(consensus.acc_gossip(x, scaled, p))) <= 1e-10

    def test_k1_is_one_matrix_apply(self):
        gossip = network.laplacian(network.build_topology("ring", 6))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap, k_override=1)
        rng = np.random.default_rng(0)
        x = rng.standard_normal((6, 3))
        assert np.array_equal(consensus.acc_gossip(x, scaled, p), scaled.matrix @ x)

    def test_matches_spectral_oracle_path5(self):
        gossip = network.laplacian(network.build_topology("line", 5))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap, k_override=2)
        rng = np.random.default_rng(3)
        x = rng.standard_normal((5, 4))
        expected = spectral_poly_apply(scaled, p, x)
        assert np.max(np.abs(consensus.acc_gossip(x, scaled, p) - expected)) <= 1e-8

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_spectral_oracle_random(self, seed):
        g = network.build_topology("erdos_renyi", 4 + seed, seed=seed, p=0.5)
        gossip = network.laplacian(g)
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((g.m, 3))
        expected = spectral_poly_apply(scaled, p, x)
        assert np.max(np.abs(consensus.acc_gossip(x, scaled, p) - expected)) <= 1e-8

    def test_preserves_mean_kernel(self):
        gossip = network.laplacian(network.build_topology("erdos_renyi", 9, seed=2, p=0.5))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        rng = np.random.default_rng(5)
        x = rng.standard_normal((9, 2))
        out = consensus.acc_gossip(x, scaled, p)
        # column sums of P_K(L) vanish: the output has zero column totals
        assert np.max(np.abs(out.sum(axis=0))) <= 1e-10 * max(1.0, np.max(np.abs(x)))

    def test_shape_mismatch(self):
        gossip = network.laplacian(network.build_topology("line", 4))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        with pytest.raises(ShapeError):
            consensus.acc_gossip(np.ones((5, 2)), scaled, p)


class TestContractionCertificate:
    def test_complete_two_zero(self):
        gossip = network.laplacian(network.build_topology("complete", 2))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        assert consensus.contraction_certificate(scaled, p) <= 1e-12

    def test_path3(self):
        gossip = network.laplacian(network.build_topology("line", 3))
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        cert = consensus.contraction_certificate(scaled, p)
        assert cert <= 1.0 / 7.0 + 1e-12  # delta at eta = 1/3, K = 2

    @pytest.mark.parametrize("seed", range(20))
    def test_random_graphs_certified(self, seed):
        g = network.build_topology("erdos_renyi", 5 + (seed % 10), seed=seed, p=0.45)
        gossip = network.laplacian(g)
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        cert = consensus.contraction_certificate(scaled, p)
        assert cert <= p.delta + 1e-12
        # eigendecomposition sweep oracle: evaluate the closed-form polynomial
        tk_c1 = chebyshev_t(p.K, p.c1)
        for lam in scaled.eigen.values[1:]:
            val = 1.0 - chebyshev_t(p.K, p.c1 * (1.0 - lam)) / tk_c1
            assert abs(val - 1.0) <= p.delta + 1e-12

    @pytest.mark.parametrize("seed", range(8))
    def test_mixing_operator_spectrum(self, seed):
        # spectrum of I - c2*P_K(L) stays in [1 - c2*(1+delta), 1], hitting 1 on
        # the consensus direction
        g = network.build_topology("erdos_renyi", 7, seed=seed, p=0.5)
        gossip = network.laplacian(g)
        scaled = network.scale_for_chebyshev(gossip)
        p = consensus.plan(gossip.eigengap)
        vals = [1.0 - p.c2 * consensus.polynomial_value(float(lam), p)
                for lam in scaled.eigen.values]
        assert max(vals) <= 1.0 + 1e-10
        assert min(vals) >= 1.0 - p.c2 * (1.0 + p.delta) - 1e-10
        assert abs(vals[0] - 1.0) <= 1e-10

    def test_default_round_count_bound(self):
        # with K = ceil(1/sqrt(eta)): sqrt((1+delta)/(1-delta)) <= 2.5
        for eta in [0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 0.9, 1.0]:
            p = consensus.plan(eta)
            assert math.sqrt((1.0 + p.delta) / (1.0 - p.delta)) <= 2.5
