#include "specloc/lattice.hpp"

#include "specloc/errors.hpp"
#include "specloc/graph.hpp"
#include "specloc/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace specloc;

TEST_CASE("anderson hamiltonian") {
    SUBCASE("clean periodic chain matches the cosine band") {
        AndersonChain chain;
        chain.n_sites = 64;
        chain.boundary = Boundary::periodic;
        SpectralBasis basis = eigendecompose(anderson_hamiltonian(chain));
        std::vector<double> expected;
        for (int k = 0; k < 64; ++k)
            expected.push_back(2.0 * std::cos(2.0 * M_PI * k / 64.0));
        std::sort(expected.begin(), expected.end());
        for (int i = 0; i < 64; ++i)
            CHECK(std::abs(basis.eigenvalues[i] - expected[i]) <= 1e-8);
    }

    SUBCASE("open two-site chain: eigenvalues -1 and +1") {
        AndersonChain chain;
        chain.n_sites = 2;
        SpectralBasis basis = eigendecompose(anderson_hamiltonian(chain));
        CHECK(std::abs(basis.eigenvalues[0] + 1.0) <= 1e-12);
        CHECK(std::abs(basis.eigenvalues[1] - 1.0) <= 1e-12);
    }

    SUBCASE("identical seed, identical potential stream") {
        AndersonChain chain;
        chain.n_sites = 100;
        chain.disorder_w = 3.0;
        chain.seed = 55;
        Eigen::VectorXd a = anderson_onsite(chain);
        Eigen::VectorXd b = anderson_onsite(chain);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
        chain.seed = 56;
        CHECK((a - anderson_onsite(chain)).cwiseAbs().maxCoeff() != 0.0);
        CHECK(a.cwiseAbs().maxCoeff() <= 1.5);
    }

    SUBCASE("extended phase at W = 0: every mode spreads") {
        AndersonChain chain;
        chain.n_sites = 512;
        chain.boundary = Boundary::periodic;
        SpectralBasis basis = eigendecompose(anderson_hamiltonian(chain));
        ParticipationSpectrum s =
            participation_spectrum(basis.eigenvalues, basis.eigenvectors);
        CHECK(s.p.minCoeff() > 0.5);
    }
}

TEST_CASE("spring dynamical matrix") {
    SUBCASE("ordered ring dispersion omega^2 = 2 - 2 cos") {
        SpringLattice lat;
        lat.sites = 64;
        VibrationModes modes = vibration_modes(spring_dynamical_matrix(lat));
        std::vector<double> expected;
        for (int k = 0; k < 64; ++k)
            expected.push_back(std::sqrt(2.0 - 2.0 * std::cos(2.0 * M_PI * k / 64.0)));
        std::sort(expected.begin(), expected.end());
        for (int i = 0; i < 64; ++i) CHECK(std::abs(modes.omega[i] - expected[i]) <= 1e-8);
    }

    SUBCASE("row sums vanish and the zero mode is uniform") {
        for (int dim : {1, 2}) {
            SpringLattice lat;
            lat.dimension = dim;
            lat.sites = dim == 1 ? 128 : 10;
            lat.disorder_eps = 0.5;
            lat.seed = 5;
            Eigen::MatrixXd h = spring_dynamical_matrix(lat);
            CHECK(h.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10);
            VibrationModes modes = vibration_modes(h);
            CHECK(modes.omega[0] <= 1e-5);
            CHECK(std::abs(participation_ratio(modes.modes.col(0)) - 1.0) <= 1e-8);
        }
    }

    SUBCASE("positive semidefinite under disorder (open and periodic)") {
        for (Boundary b : {Boundary::open, Boundary::periodic}) {
            SpringLattice lat;
            lat.dimension = 2;
            lat.sites = 10;
            lat.disorder_eps = 0.5;
            lat.boundary = b;
            lat.seed = 5;
            SpectralBasis basis = eigendecompose(spring_dynamical_matrix(lat));
            CHECK(basis.eigenvalues.minCoeff() >= -1e-10);
        }
    }

    SUBCASE("uniform stiffness draw stays inside [1-eps, 1+eps]") {
        SpringLattice lat;
        lat.sites = 200;
        lat.disorder_eps = 0.3;
        lat.dist = StiffnessDist::uniform;
        lat.seed = 9;
        Eigen::MatrixXd h = spring_dynamical_matrix(lat);
        for (int i = 0; i < 200; ++i) {
            const double k = -h(i, (i + 1) % 200);
            CHECK(k >= 0.7 - 1e-12);
            CHECK(k <= 1.3 + 1e-12);
        }
    }

    SUBCASE("parameter validation") {
        SpringLattice lat;
        lat.sites = 10;
        lat.disorder_eps = 1.0;
        CHECK_THROWS_AS(spring_dynamical_matrix(lat), ValidationError);
        lat.disorder_eps = 0.5;
        lat.dimension = 3;
        CHECK_THROWS_AS(spring_dynamical_matrix(lat), ValidationError);
    }
}

TEST_CASE("ordered open chain: interior modes sit at the sinusoid value 2/3") {
    SpringLattice lat;
    lat.sites = 512;
    lat.boundary = Boundary::open;
    ParticipationSpectrum s =
        participation_spectrum(vibration_modes(spring_dynamical_matrix(lat)));
    // q = 0 is the uniform zero mode and q = N/2 has constant |amplitude|;
    // every other standing wave gives (sum cos^2)^2 / (N sum cos^4) = 2/3
    CHECK(std::abs(s.p[0] - 1.0) <= 1e-8);
    CHECK(std::abs(s.p[256] - 1.0) <= 1e-8);
    for (int q = 1; q < 512; ++q) {
        if (q == 256) continue;
        CHECK(std::abs(s.p[q] - 2.0 / 3.0) < 0.05);
    }
}

TEST_CASE("vibration_modes rejects indefinite matrices") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(vibration_modes(bad), NumericError);
}

TEST_CASE("high-frequency modes localize under disorder") {
    SpringLattice lat;
    lat.sites = 400;
    lat.disorder_eps = 0.8;
    lat.seed = 3;
    VibrationModes modes = vibration_modes(spring_dynamical_matrix(lat));
    ParticipationSpectrum s = participation_spectrum(modes);

    const int n = 400;
    double top_decile = 0.0, bottom_half = 0.0;
    for (int i = 0; i < n / 10; ++i) top_decile += s.p[n - 1 - i];
    for (int i = 0; i < n / 2; ++i) bottom_half += s.p[i];
    top_decile /= n / 10;
    bottom_half /= n / 2;
    CHECK(top_decile < bottom_half);
}

TEST_CASE("density of states") {
    SUBCASE("single repeated frequency lands in one bin with unit integral") {
        Eigen::VectorXd omega = Eigen::VectorXd::Constant(50, 2.0);
        Histogram dos = density_of_states(omega, 1);
        REQUIRE(dos.density.size() == 1);
        CHECK(dos.bin_left[0] == 0.0);
        CHECK(dos.bin_right[0] == 2.0);
        CHECK(std::abs(dos.density[0] * 2.0 - 1.0) <= 1e-12);
    }

    SUBCASE("ordered chain has the 1d band-edge pile-up") {
        SpringLattice lat;
        lat.sites = 512;
        VibrationModes modes = vibration_modes(spring_dynamical_matrix(lat));
        Histogram dos = density_of_states(modes.omega, 32);
        const double width = dos.bin_right[0] - dos.bin_left[0];
        double first_quartile = 0.0, last_quartile = 0.0;
        for (int b = 0; b < 8; ++b) {
            first_quartile += dos.density[b] * width;
            last_quartile += dos.density[24 + b] * width;
        }
        CHECK(last_quartile > first_quartile);
    }

    SUBCASE("integral is one for random inputs") {
        auto gen = rng::engine(8);
        std::uniform_real_distribution<double> unit(0.0, 5.0);
        Eigen::VectorXd omega(301);
        for (int i = 0; i < omega.size(); ++i) omega[i] = unit(gen);
        Histogram dos = density_of_states(omega, 17);
        double integral = 0.0;
        for (int b = 0; b < 17; ++b)
            integral += dos.density[b] * (dos.bin_right[b] - dos.bin_left[b]);
        CHECK(std::abs(integral - 1.0) <= 1e-12);
    }

    SUBCASE("empty input and bad bins rejected") {
        CHECK_THROWS_AS(density_of_states(Eigen::VectorXd(), 4), ValidationError);
        CHECK_THROWS_AS(density_of_states(Eigen::VectorXd::Ones(3), 0), ValidationError);
    }
}

TEST_CASE("localization length estimator") {
    SUBCASE("recovers a planted exponential profile") {
        const int n = 200;
        Eigen::VectorXd mode(n);
        for (int i = 0; i < n; ++i) mode[i] = std::exp(-std::abs(i - 100) / 5.0);
        LocalizationLength xi = localization_length(mode);
        REQUIRE(xi.bounded);
        CHECK(std::abs(xi.xi - 5.0) / 5.0 < 0.01);
    }

    SUBCASE("flat plane-wave profile reports unbounded") {
        Eigen::VectorXd mode = Eigen::VectorXd::Constant(100, 0.1);
        LocalizationLength xi = localization_length(mode);
        CHECK(!xi.bounded);
        CHECK(std::isinf(xi.xi));
    }

    SUBCASE("the clean chain's k = 0 plane wave reports unbounded") {
        AndersonChain chain;
        chain.n_sites = 256;
        chain.boundary = Boundary::periodic;
        SpectralBasis basis = eigendecompose(anderson_hamiltonian(chain));
        // +t hopping puts the uniform k=0 mode at the top of the band
        Eigen::VectorXd uniform_mode = basis.eigenvectors.col(255);
        CHECK(std::abs(participation_ratio(uniform_mode) - 1.0) <= 1e-8);
        CHECK(!localization_length(uniform_mode, 256.0).bounded);
    }

    SUBCASE("ring distance handles peaks near the seam") {
        const int n = 128;
        Eigen::VectorXd mode(n);
        for (int i = 0; i < n; ++i) {
            const double d = std::min(std::abs(i - 2.0), n - std::abs(i - 2.0));
            mode[i] = std::exp(-d / 7.0);
        }
        LocalizationLength xi = localization_length(mode, static_cast<double>(n));
        REQUIRE(xi.bounded);
        CHECK(std::abs(xi.xi - 7.0) / 7.0 < 0.01);
    }

    SUBCASE("disorder shortens the band-center length") {
        std::vector<double> xi2, xi4;
        for (int m = 0; m < 16; ++m) {
            AndersonChain chain;
            chain.n_sites = 400;
            chain.boundary = Boundary::periodic;
            chain.seed = rng::substream(71, m);
            chain.disorder_w = 2.0;
            xi2.push_back(anderson_band_center_xi(chain).xi);
            chain.disorder_w = 4.0;
            xi4.push_back(anderson_band_center_xi(chain).xi);
        }
        CHECK(median(xi2) > median(xi4));
        CHECK(std::isfinite(median(xi2)));
    }

    SUBCASE("insufficient support is an error") {
        Eigen::VectorXd tiny = Eigen::VectorXd::Ones(6);
        CHECK_THROWS_AS(localization_length(tiny), ValidationError);
    }
}

TEST_CASE("gamma fit") {
    SUBCASE("planted power law xi = 10 eps^-2 recovered exactly") {
        Eigen::VectorXd disorder(3), xi(3);
        disorder << 0.5, 1.0, 2.0;
        for (int i = 0; i < 3; ++i) xi[i] = 10.0 * std::pow(disorder[i], -2.0);
        LocalizationFit fit = fit_gamma(disorder, xi);
        CHECK(std::abs(fit.gamma - 2.0) <= 1e-10);
        CHECK(std::abs(fit.fit_r2 - 1.0) <= 1e-10);
    }

    SUBCASE("two points are not enough") {
        Eigen::VectorXd disorder(2), xi(2);
        disorder << 1.0, 2.0;
        xi << 10.0, 5.0;
        CHECK_THROWS_AS(fit_gamma(disorder, xi), ValidationError);
    }

    SUBCASE("unbounded xi rejected, naming the disorder value") {
        Eigen::VectorXd disorder(3), xi(3);
        disorder << 1.0, 2.0, 4.0;
        xi << 50.0, std::numeric_limits<double>::infinity(), 5.0;
        try {
            fit_gamma(disorder, xi);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("2.0") != std::string::npos);
        }
    }
}

TEST_CASE("ring duality: spring chain vs graph laplacian") {
    const int n = 12;
    SpringLattice lat;
    lat.sites = n;
    Eigen::MatrixXd dyn = spring_dynamical_matrix(lat);

    GeneratorParams params;
    params.n = n;
    Graph cn = generate(GraphKind::ring, params);
    Eigen::MatrixXd lap = laplacian(cn);

    SUBCASE("uniform spring ring equals the unnormalized laplacian exactly") {
        CHECK((dyn - lap).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("participation spectra agree through both pipelines") {
        VibrationModes modes = vibration_modes(dyn);
        ParticipationSpectrum lattice_side = participation_spectrum(modes);
        SpectralBasis graph_basis = eigendecompose(normalized_laplacian(cn));
        ParticipationSpectrum graph_side = eigenvector_participation_spectrum(graph_basis);
        REQUIRE(lattice_side.p.size() == graph_side.p.size());
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(lattice_side.p[i] - graph_side.p[i]) <= 1e-8);
        // eigenvalue correspondence: omega^2 = 2 lambda on a 2-regular ring
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(lattice_side.values[i] * lattice_side.values[i] -
                           2.0 * graph_side.values[i]) <= 1e-8);
    }
}

TEST_CASE("median handles ties, evens and infinities") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({1.0, 2.0, 3.0, 4.0}) == 2.5);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(median({1.0, inf, inf}) == inf);
    CHECK(std::isfinite(median({1.0, 2.0, inf})));
    CHECK_THROWS_AS(median({}), ValidationError);
}
