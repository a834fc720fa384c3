#include "specloc/propagation.hpp"

#include "specloc/errors.hpp"
#include "specloc/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace specloc;

namespace {

Graph ring(int n) {
    GeneratorParams params;
    params.n = n;
    return generate(GraphKind::ring, params);
}

Graph er(int n, double p, std::uint64_t seed) {
    GeneratorParams params;
    params.n = n;
    params.p = p;
    return generate(GraphKind::erdos_renyi, params, seed);
}

Eigen::MatrixXd gaussian_signal(int n, int d, std::uint64_t seed) {
    auto gen = rng::engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) x(i, c) = normal(gen);
    return x;
}

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
}

} // namespace

TEST_CASE("build_operator spectra") {
    SUBCASE("C4 complement: 1 - {0,1,1,2}") {
        Eigen::VectorXd lam =
            sorted_eigenvalues(build_operator(ring(4), Operator::laplacian_complement));
        const double expected[] = {-1.0, 0.0, 0.0, 1.0};
        for (int i = 0; i < 4; ++i) CHECK(std::abs(lam[i] - expected[i]) <= 1e-8);
    }

    SUBCASE("K3 complement: {1, -0.5, -0.5}") {
        GeneratorParams params;
        params.n = 3;
        Graph k3 = generate(GraphKind::complete, params);
        Eigen::VectorXd lam =
            sorted_eigenvalues(build_operator(k3, Operator::laplacian_complement));
        CHECK(std::abs(lam[0] + 0.5) <= 1e-8);
        CHECK(std::abs(lam[1] + 0.5) <= 1e-8);
        CHECK(std::abs(lam[2] - 1.0) <= 1e-8);
    }

    SUBCASE("operators are symmetric and gcn spectrum sits in (-1, 1]") {
        for (std::uint64_t seed : {1, 2, 3}) {
            Graph g = er(25, 0.2, seed);
            for (Operator op : {Operator::laplacian_complement, Operator::gcn_selfloop}) {
                Eigen::MatrixXd m = build_operator(g, op);
                CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
            }
            Eigen::VectorXd lam = sorted_eigenvalues(build_operator(g, Operator::gcn_selfloop));
            CHECK(lam.minCoeff() > -1.0);
            CHECK(lam.maxCoeff() <= 1.0 + 1e-10);
        }
    }

    SUBCASE("isolated node rejected") {
        Graph g = Graph::from_edges(3, {{0, 1, 1.0}});
        CHECK_THROWS_AS(build_operator(g, Operator::laplacian_complement), ValidationError);
        CHECK_THROWS_AS(build_operator(g, Operator::gcn_selfloop), ValidationError);
    }
}

TEST_CASE("propagate basics") {
    Graph c4 = ring(4);
    SpectralBasis basis = eigendecompose(normalized_laplacian(c4));

    SUBCASE("depth 0 returns the input bit-exactly with one record") {
        Eigen::MatrixXd x0 = gaussian_signal(4, 3, 1);
        PropagationConfig cfg;
        cfg.depth = 0;
        PropagationResult r = propagate(c4, x0, cfg);
        REQUIRE(r.metrics.size() == 1);
        CHECK(r.metrics[0].layer == 0);
        CHECK(std::memcmp(r.final_signal.data(), x0.data(), sizeof(double) * 12) == 0);
    }

    SUBCASE("a lambda=1 band dies in one layer") {
        Eigen::MatrixXd x0 = basis.eigenvectors.col(1);
        PropagationConfig cfg;
        cfg.depth = 1;
        PropagationResult r = propagate(c4, x0, cfg);
        CHECK(r.final_signal.cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("the lambda=2 band flips sign each layer") {
        Eigen::MatrixXd x0 = basis.eigenvectors.col(3);
        PropagationConfig cfg;
        cfg.depth = 3;
        PropagationResult r = propagate(c4, x0, cfg);
        CHECK((r.final_signal + x0).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("record stride always includes endpoints") {
        Eigen::MatrixXd x0 = gaussian_signal(4, 2, 2);
        PropagationConfig cfg;
        cfg.depth = 10;
        cfg.record_every = 4;
        PropagationResult r = propagate(c4, x0, cfg);
        REQUIRE(r.metrics.size() == 4);
        CHECK(r.metrics[0].layer == 0);
        CHECK(r.metrics[1].layer == 4);
        CHECK(r.metrics[2].layer == 8);
        CHECK(r.metrics[3].layer == 10);
    }

    SUBCASE("bipartite flag") {
        Eigen::MatrixXd x0 = gaussian_signal(4, 1, 3);
        PropagationConfig cfg;
        cfg.depth = 1;
        CHECK(propagate(c4, x0, cfg).bipartite);
        GeneratorParams params;
        params.n = 3;
        Graph k3 = generate(GraphKind::complete, params);
        CHECK(!propagate(k3, gaussian_signal(3, 1, 3), cfg).bipartite);
    }

    SUBCASE("shape and finiteness validation") {
        PropagationConfig cfg;
        CHECK_THROWS_AS(propagate(c4, Eigen::MatrixXd::Ones(3, 1), cfg), ValidationError);
        Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(4, 1);
        bad(2, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(propagate(c4, bad, cfg), NumericError);
    }
}

TEST_CASE("spectral decay law on random graphs and signals") {
    for (std::uint64_t graph_seed : {21, 22, 23}) {
        Graph g = er(40, 0.2, graph_seed);
        SpectralBasis basis = eigendecompose(normalized_laplacian(g));
        for (std::uint64_t signal_seed : {1, 2, 3}) {
            Eigen::MatrixXd x0 = gaussian_signal(40, 3, signal_seed);
            PropagationConfig cfg;
            cfg.depth = 20;
            PropagationResult r = propagate(g, x0, cfg);

            const Eigen::VectorXd initial = r.metrics.front().coeff_norms;
            for (const LayerMetrics& m : r.metrics)
                for (int b = 0; b < basis.size(); ++b) {
                    const double predicted =
                        std::pow(std::abs(1.0 - basis.eigenvalues[b]), m.layer) * initial[b];
                    CHECK(std::abs(m.coeff_norms[b] - predicted) <=
                          1e-8 * (1.0 + std::abs(predicted)));
                }

            DecayReport report = coefficient_decay_check(r.basis, r);
            CHECK(report.ok);
        }
    }
}

TEST_CASE("dirichlet energy is non-increasing for linear complement runs") {
    for (std::uint64_t seed : {31, 32, 33}) {
        Graph g = er(30, 0.25, seed);
        PropagationConfig cfg;
        cfg.depth = 15;
        PropagationResult r = propagate(g, gaussian_signal(30, 2, seed), cfg);
        for (std::size_t i = 1; i < r.metrics.size(); ++i)
            CHECK(r.metrics[i].dirichlet_energy <=
                  r.metrics[i - 1].dirichlet_energy + 1e-10);
    }
}

TEST_CASE("deep-run homogenization endpoint") {
    Graph g = er(50, 0.2, 11);
    REQUIRE(g.is_connected());
    Eigen::MatrixXd x0 = gaussian_signal(50, 4, 7);
    PropagationConfig cfg;
    cfg.depth = 200;
    cfg.record_every = 50;
    PropagationResult r = propagate(g, x0, cfg);

    const LayerMetrics& last = r.metrics.back();
    const double zero_fraction =
        1.0 - band_energy_fraction_above(r.basis.eigenvalues, last, 1e-9);
    CHECK(zero_fraction >= 0.999);
    CHECK(last.feature_distance < 1e-6 * r.metrics.front().feature_distance);
}

TEST_CASE("gcn self-loop runs stay bounded at depth 10^4") {
    Graph g = er(20, 0.3, 5);
    Eigen::MatrixXd x0 = gaussian_signal(20, 2, 9);
    PropagationConfig cfg;
    cfg.op = Operator::gcn_selfloop;
    cfg.depth = 10000;
    cfg.record_every = 2500;
    PropagationResult r = propagate(g, x0, cfg);
    CHECK(r.final_signal.allFinite());
    CHECK(r.final_signal.cwiseAbs().maxCoeff() <= x0.norm() + 1e-9);
}

TEST_CASE("decay check applicability guards") {
    Graph g = er(20, 0.3, 6);
    Eigen::MatrixXd x0 = gaussian_signal(20, 2, 1);

    PropagationConfig relu_cfg;
    relu_cfg.depth = 3;
    relu_cfg.nonlinearity = Nonlinearity::relu;
    PropagationResult relu_run = propagate(g, x0, relu_cfg);
    CHECK_THROWS_AS(coefficient_decay_check(relu_run.basis, relu_run), ValidationError);

    PropagationConfig gcn_cfg;
    gcn_cfg.depth = 3;
    gcn_cfg.op = Operator::gcn_selfloop;
    PropagationResult gcn_run = propagate(g, x0, gcn_cfg);
    CHECK_THROWS_AS(coefficient_decay_check(gcn_run.basis, gcn_run), ValidationError);

    RewireConfig rcfg;
    rcfg.alpha = 1.0;
    rcfg.seed = 4;
    PropagationConfig lin_cfg;
    lin_cfg.depth = 3;
    PropagationResult rewired = propagate(g, x0, lin_cfg, rcfg);
    CHECK_THROWS_AS(coefficient_decay_check(rewired.basis, rewired), ValidationError);
}

TEST_CASE("rewired propagation is deterministic and tracks effective degrees") {
    GeneratorParams params;
    params.n = 9;
    Graph star = generate(GraphKind::star, params);
    Eigen::MatrixXd x0 = gaussian_signal(9, 2, 3);
    PropagationConfig cfg;
    cfg.depth = 4;
    RewireConfig rcfg;
    rcfg.alpha = 1.0;
    rcfg.seed = 12;

    PropagationResult a = propagate(star, x0, cfg, rcfg);
    PropagationResult b = propagate(star, x0, cfg, rcfg);
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        CHECK(a.metrics[i].effective_degree_fluctuation ==
              b.metrics[i].effective_degree_fluctuation);
        CHECK((a.metrics[i].coeff_norms - b.metrics[i].coeff_norms).cwiseAbs().maxCoeff() ==
              0.0);
    }
    CHECK(a.rewired);
    // the star's hub sheds edges, so some recorded layer must differ from the original
    bool changed = false;
    const double original = degree_fluctuation(star);
    for (std::size_t i = 1; i < a.metrics.size(); ++i)
        if (a.metrics[i].effective_degree_fluctuation != original) changed = true;
    CHECK(changed);
}

TEST_CASE("one-shot rewiring reuses a single effective graph") {
    GeneratorParams params;
    params.n = 11;
    Graph star = generate(GraphKind::star, params);
    Eigen::MatrixXd x0 = gaussian_signal(11, 2, 8);
    PropagationConfig cfg;
    cfg.depth = 6;
    RewireConfig rcfg;
    rcfg.alpha = 1.0;
    rcfg.seed = 40;
    rcfg.per_layer = false;

    PropagationResult r = propagate(star, x0, cfg, rcfg);
    // every recorded layer reports the degree fluctuation of the same sample
    for (const LayerMetrics& m : r.metrics)
        CHECK(m.effective_degree_fluctuation ==
              r.metrics.front().effective_degree_fluctuation);
    // and that sample is exactly rewire_step at layer 0
    Graph once = rewire_step(star, rcfg, 0);
    CHECK(r.metrics.front().effective_degree_fluctuation == degree_fluctuation(once));
}
