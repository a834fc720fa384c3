#include "specloc/lattice.hpp"

#include "specloc/errors.hpp"
#include "specloc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace specloc {

Boundary boundary_from_string(const std::string& name) {
    if (name == "open") return Boundary::open;
    if (name == "periodic") return Boundary::periodic;
    throw ValidationError("unknown boundary '" + name + "'");
}

std::string to_string(Boundary b) {
    return b == Boundary::open ? "open" : "periodic";
}

StiffnessDist stiffness_dist_from_string(const std::string& name) {
    if (name == "bimodal") return StiffnessDist::bimodal;
    if (name == "uniform") return StiffnessDist::uniform;
    throw ValidationError("unknown stiffness distribution '" + name + "'");
}

std::string to_string(StiffnessDist d) {
    return d == StiffnessDist::bimodal ? "bimodal" : "uniform";
}

Eigen::VectorXd anderson_onsite(const AndersonChain& chain) {
    if (chain.n_sites < 2) throw ValidationError("anderson chain requires n_sites >= 2");
    if (chain.disorder_w < 0.0) throw ValidationError("disorder W must be >= 0");
    auto gen = rng::engine(chain.seed, rng::tag("anderson.onsite"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd eps(chain.n_sites);
    for (int i = 0; i < chain.n_sites; ++i)
        eps[i] = (unit(gen) - 0.5) * chain.disorder_w;
    return eps;
}

Eigen::MatrixXd anderson_hamiltonian(const AndersonChain& chain) {
    if (chain.boundary == Boundary::periodic && chain.n_sites < 3)
        throw ValidationError("periodic anderson chain requires n_sites >= 3");
    const Eigen::VectorXd eps = anderson_onsite(chain);
    const int n = chain.n_sites;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    h.diagonal() = eps;
    for (int i = 0; i + 1 < n; ++i) {
        h(i, i + 1) = chain.hopping;
        h(i + 1, i) = chain.hopping;
    }
    if (chain.boundary == Boundary::periodic) {
        h(0, n - 1) = chain.hopping;
        h(n - 1, 0) = chain.hopping;
    }
    return h;
}

namespace {

double draw_stiffness(const SpringLattice& lat, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (lat.dist == StiffnessDist::bimodal)
        return unit(gen) < 0.5 ? 1.0 - lat.disorder_eps : 1.0 + lat.disorder_eps;
    return 1.0 - lat.disorder_eps + 2.0 * lat.disorder_eps * unit(gen);
}

void add_bond(Eigen::MatrixXd& h, int a, int b, double kappa) {
    h(a, a) += kappa;
    h(b, b) += kappa;
    h(a, b) -= kappa;
    h(b, a) -= kappa;
}

} // namespace

Eigen::MatrixXd spring_dynamical_matrix(const SpringLattice& lat) {
    if (lat.dimension != 1 && lat.dimension != 2)
        throw ValidationError("spring lattice dimension must be 1 or 2");
    if (!(lat.disorder_eps >= 0.0 && lat.disorder_eps < 1.0))
        throw ValidationError("spring disorder eps must lie in [0, 1)");
    const int side = lat.sites;
    const int min_side = lat.boundary == Boundary::periodic ? 3 : 2;
    if (side < min_side)
        throw ValidationError("spring lattice requires at least " +
                              std::to_string(min_side) + " sites per side");

    auto gen = rng::engine(lat.seed, rng::tag("spring.stiffness"));
    if (lat.dimension == 1) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(side, side);
        for (int i = 0; i + 1 < side; ++i) add_bond(h, i, i + 1, draw_stiffness(lat, gen));
        if (lat.boundary == Boundary::periodic)
            add_bond(h, side - 1, 0, draw_stiffness(lat, gen));
        return h;
    }

    const int n = side * side;
    auto id = [side](int r, int c) { return r * side + c; };
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            if (c + 1 < side)
                add_bond(h, id(r, c), id(r, c + 1), draw_stiffness(lat, gen));
            else if (lat.boundary == Boundary::periodic)
                add_bond(h, id(r, c), id(r, 0), draw_stiffness(lat, gen));
            if (r + 1 < side)
                add_bond(h, id(r, c), id(r + 1, c), draw_stiffness(lat, gen));
            else if (lat.boundary == Boundary::periodic)
                add_bond(h, id(r, c), id(0, c), draw_stiffness(lat, gen));
        }
    return h;
}

VibrationModes vibration_modes(const Eigen::MatrixXd& psd_matrix) {
    SpectralBasis basis = eigendecompose(psd_matrix);
    if (basis.eigenvalues[0] < -1e-8)
        throw NumericError("dynamical matrix has eigenvalue " +
                           std::to_string(basis.eigenvalues[0]) +
                           " below -1e-8; expected positive semidefinite");
    VibrationModes modes;
    modes.omega = basis.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    modes.modes = std::move(basis.eigenvectors);
    return modes;
}

Histogram histogram(const Eigen::VectorXd& values, int bins, double lo, double hi) {
    if (bins < 1) throw ValidationError("histogram requires bins >= 1");
    if (values.size() == 0) throw ValidationError("histogram of empty value list");
    if (!(hi > lo)) throw ValidationError("histogram range must satisfy hi > lo");

    const double width = (hi - lo) / bins;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
    for (int i = 0; i < values.size(); ++i) {
        int b = static_cast<int>(std::floor((values[i] - lo) / width));
        b = std::clamp(b, 0, bins - 1);
        counts[b] += 1.0;
    }
    Histogram h;
    h.bin_left.resize(bins);
    h.bin_right.resize(bins);
    for (int b = 0; b < bins; ++b) {
        h.bin_left[b] = lo + b * width;
        h.bin_right[b] = lo + (b + 1) * width;
    }
    h.density = counts / (static_cast<double>(values.size()) * width);
    return h;
}

Histogram density_of_states(const Eigen::VectorXd& omega, int bins) {
    if (omega.size() == 0) throw ValidationError("density of states of empty spectrum");
    const double top = omega.maxCoeff();
    return histogram(omega, bins, 0.0, top > 0.0 ? top : 1.0);
}

ParticipationSpectrum participation_spectrum(const VibrationModes& modes) {
    return participation_spectrum(modes.omega, modes.modes);
}

ParticipationSpectrum participation_spectrum(const Eigen::VectorXd& values,
                                             const Eigen::MatrixXd& vectors) {
    ParticipationSpectrum s;
    s.values = values;
    s.p.resize(vectors.cols());
    for (int c = 0; c < vectors.cols(); ++c)
        s.p[c] = participation_ratio(vectors.col(c));
    return s;
}

LocalizationLength localization_length(const Eigen::VectorXd& mode,
                                       const Eigen::VectorXd& site_positions,
                                       double period) {
    const int n = static_cast<int>(mode.size());
    if (site_positions.size() != n)
        throw ValidationError("site positions and mode length differ");
    const double amax = mode.cwiseAbs().maxCoeff();
    if (amax == 0.0) throw ValidationError("localization length of the zero mode vector");

    int peak = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(mode[i]) > std::abs(mode[peak])) peak = i;

    const double cutoff = 1e-12 * amax;
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(n);
    y.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(mode[i]);
        if (a <= cutoff) continue;
        double d = std::abs(site_positions[i] - site_positions[peak]);
        if (period > 0.0) d = std::min(d, period - d);
        x.push_back(d);
        y.push_back(std::log(a));
    }
    if (x.size() < 8)
        throw ValidationError("localization fit has " + std::to_string(x.size()) +
                              " usable sites; need at least 8");

    const double m = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }

    LocalizationLength out;
    out.sites_used = static_cast<int>(x.size());
    out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    if (out.slope >= -1e-6) {
        out.bounded = false;
        out.xi = std::numeric_limits<double>::infinity();
    } else {
        out.bounded = true;
        out.xi = -1.0 / out.slope;
    }
    return out;
}

LocalizationLength localization_length(const Eigen::VectorXd& mode, double period) {
    Eigen::VectorXd positions =
        Eigen::VectorXd::LinSpaced(mode.size(), 0.0, static_cast<double>(mode.size() - 1));
    return localization_length(mode, positions, period);
}

LocalizationFit fit_gamma(const Eigen::VectorXd& disorder_values,
                          const Eigen::VectorXd& xi_medians) {
    const int n = static_cast<int>(disorder_values.size());
    if (xi_medians.size() != n)
        throw ValidationError("disorder and xi lists differ in length");
    if (n < 3) throw ValidationError("power-law fit needs at least 3 disorder values");
    for (int i = 0; i < n; ++i) {
        if (!(disorder_values[i] > 0.0))
            throw ValidationError("disorder values must be positive for a log-log fit");
        if (!std::isfinite(xi_medians[i]) || xi_medians[i] <= 0.0)
            throw ValidationError("xi at disorder " + std::to_string(disorder_values[i]) +
                                  " is unbounded or non-positive; sweep left the localized regime");
    }

    Eigen::VectorXd lx = disorder_values.array().log();
    Eigen::VectorXd ly = xi_medians.array().log();
    const double mx = lx.mean(), my = ly.mean();
    const double sxx = (lx.array() - mx).square().sum();
    const double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();
    if (sxx == 0.0) throw ValidationError("disorder values are all equal");
    const double slope = sxy / sxx;

    LocalizationFit fit;
    fit.disorder_values = disorder_values;
    fit.xi_values = xi_medians;
    fit.gamma = -slope;
    const double ss_tot = (ly.array() - my).square().sum();
    const double ss_res = (ly.array() - (my + slope * (lx.array() - mx))).square().sum();
    fit.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

LocalizationLength anderson_band_center_xi(const AndersonChain& chain) {
    const Eigen::MatrixXd h = anderson_hamiltonian(chain);
    const SpectralBasis basis = eigendecompose(h);
    int center = 0;
    for (int i = 1; i < basis.size(); ++i)
        if (std::abs(basis.eigenvalues[i]) < std::abs(basis.eigenvalues[center])) center = i;
    const double period =
        chain.boundary == Boundary::periodic ? static_cast<double>(chain.n_sites) : 0.0;
    return localization_length(basis.eigenvectors.col(center), period);
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace specloc
