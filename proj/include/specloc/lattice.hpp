#pragma once

#include "specloc/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace specloc {

enum class Boundary { open, periodic };

Boundary boundary_from_string(const std::string& name);
std::string to_string(Boundary b);

/// Tight-binding chain with uniform random on-site potentials in
/// [-W/2, W/2] and constant nearest-neighbor hopping t.
struct AndersonChain {
    int n_sites = 0;
    double hopping = 1.0;
    double disorder_w = 0.0;
    Boundary boundary = Boundary::open;
    std::uint64_t seed = 0;
};

/// The on-site potential draw, a pure function of the seed.
Eigen::VectorXd anderson_onsite(const AndersonChain& chain);

/// H_ii = eps_i, H_{i,i+-1} = t, corner terms when periodic.
/// Requires n_sites >= 2 (>= 3 when periodic).
Eigen::MatrixXd anderson_hamiltonian(const AndersonChain& chain);

enum class StiffnessDist { bimodal, uniform };

StiffnessDist stiffness_dist_from_string(const std::string& name);
std::string to_string(StiffnessDist d);

/// Scalar-displacement harmonic lattice: unit masses, one degree of
/// freedom per site, random spring constants per bond. bimodal draws each
/// stiffness from {1 - eps, 1 + eps} with equal probability; uniform
/// draws from [1 - eps, 1 + eps].
struct SpringLattice {
    int dimension = 1;  ///< 1 or 2
    int sites = 0;      ///< per side
    double disorder_eps = 0.0;  ///< in [0, 1)
    StiffnessDist dist = StiffnessDist::bimodal;
    Boundary boundary = Boundary::periodic;
    std::uint64_t seed = 0;
};

/// Dynamical matrix: H_ii = sum of incident stiffnesses, H_ij = -kappa_ij.
/// Rows sum to zero (the acoustic zero mode is the uniform vector) and the
/// matrix is positive semidefinite by construction.
Eigen::MatrixXd spring_dynamical_matrix(const SpringLattice& lattice);

/// Vibration eigenproblem output: omega = sqrt(eigenvalue), ascending.
struct VibrationModes {
    Eigen::VectorXd omega;
    Eigen::MatrixXd modes;  ///< orthonormal columns, same sign rule as eigendecompose
};

/// Full decomposition of a PSD matrix; eigenvalues are clipped at zero
/// before the square root, and anything below -1e-8 is a construction
/// bug surfaced as NumericError.
VibrationModes vibration_modes(const Eigen::MatrixXd& psd_matrix);

/// Normalized histogram: sum over bins of density * width == 1.
struct Histogram {
    Eigen::VectorXd bin_left;
    Eigen::VectorXd bin_right;
    Eigen::VectorXd density;
};

/// Histogram over an explicit [lo, hi] range with uniform bins; values
/// outside are clamped into the edge bins.
Histogram histogram(const Eigen::VectorXd& values, int bins, double lo, double hi);

/// Density of states over [0, max(omega)].
Histogram density_of_states(const Eigen::VectorXd& omega, int bins);

/// Participation ratio per mode, paired with omega (or with the energy,
/// for a tight-binding spectrum), ascending.
ParticipationSpectrum participation_spectrum(const VibrationModes& modes);
ParticipationSpectrum participation_spectrum(const Eigen::VectorXd& values,
                                             const Eigen::MatrixXd& vectors);

/// Log-amplitude decay fit of one mode. bounded == false marks an
/// extended mode (fitted slope indistinguishable from flat).
struct LocalizationLength {
    bool bounded = false;
    double xi = 0.0;    ///< +inf when unbounded
    double slope = 0.0;
    int sites_used = 0;
};

/// Least-squares fit of ln|e_i| against distance from the amplitude peak,
/// over sites with |e_i| > 1e-12 * max|e|. xi = -1/slope; slopes above
/// -1e-6 report an unbounded (extended) mode. period > 0 measures
/// distance around a ring. Fewer than 8 usable sites is an error.
LocalizationLength localization_length(const Eigen::VectorXd& mode,
                                       const Eigen::VectorXd& site_positions,
                                       double period = 0.0);

/// Convenience overload with integer site positions 0..N-1.
LocalizationLength localization_length(const Eigen::VectorXd& mode, double period = 0.0);

/// Power-law fit xi ~ disorder^(-gamma) over a disorder sweep.
struct LocalizationFit {
    Eigen::VectorXd disorder_values;
    Eigen::VectorXd xi_values;
    double gamma = 0.0;
    double fit_r2 = 0.0;
};

/// Linear regression of ln(xi) on ln(disorder); gamma = -slope. Needs at
/// least 3 points, all xi finite and positive (an unbounded xi means the
/// sweep left the localized regime and is a ValidationError).
LocalizationFit fit_gamma(const Eigen::VectorXd& disorder_values,
                          const Eigen::VectorXd& xi_medians);

/// Localization length of the band-center mode (eigenvalue closest to
/// zero) of one Anderson chain realization.
LocalizationLength anderson_band_center_xi(const AndersonChain& chain);

/// Median that respects +inf entries (an unbounded median means more than
/// half the ensemble is extended).
double median(std::vector<double> values);

} // namespace specloc
