#pragma once

#include "specloc/errors.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace specloc {

/// Participation ratio (sum_i v_i^2)^2 / (N sum_i v_i^4): close to 1 for a
/// vector spread evenly over all entries, 1/N for a one-hot vector.
/// Scale- and permutation-invariant. Throws ValidationError on the zero
/// vector, for which the ratio is undefined.
template <typename Derived>
double participation_ratio(const Eigen::MatrixBase<Derived>& vec) {
    static_assert(Derived::ColsAtCompileTime == 1 || Derived::RowsAtCompileTime == 1,
                  "participation_ratio expects a vector expression");
    const auto sq = vec.derived().array().square().eval();
    const double s2 = sq.sum();
    if (s2 == 0.0)
        throw ValidationError("participation ratio undefined for the zero vector");
    const double s4 = sq.square().sum();
    return (s2 * s2) / (static_cast<double>(vec.size()) * s4);
}

/// Eigenpairs of a symmetric matrix: eigenvalues ascending, orthonormal
/// eigenvector columns with a deterministic sign convention (the entry of
/// largest magnitude in each column is positive, ties broken by lowest
/// index). Immutable and shareable.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Full dense symmetric eigendecomposition. Input must be symmetric to
/// within 1e-10 (max abs deviation) or a ValidationError is thrown;
/// solver failure raises NumericError.
SpectralBasis eigendecompose(const Eigen::MatrixXd& symmetric);

/// Aligned (value, participation) pairs, ascending in value. `values`
/// holds graph frequencies lambda or lattice frequencies omega depending
/// on which side produced it.
struct ParticipationSpectrum {
    Eigen::VectorXd values;
    Eigen::VectorXd p;
};

/// Participation ratio of every eigenvector, paired with its eigenvalue.
ParticipationSpectrum eigenvector_participation_spectrum(const SpectralBasis& basis);

/// One frequency band of a multi-channel node signal: per-channel
/// coefficients c_c = v^T x_c and the spatial footprint
/// y_i = v_i * ||c||_2 aggregated over channels.
struct BandProjection {
    int band_index = 0;
    double lambda = 0.0;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd spatial_component;
};

BandProjection band_project(const SpectralBasis& basis,
                            const Eigen::MatrixXd& signal,
                            int band_index);

/// Per-band participation of a signal. Bands whose coefficient norm falls
/// below 1e-12 relative to the signal's Frobenius norm carry no meaningful
/// spatial shape and are reported absent (p = NaN, present = false).
struct BandParticipation {
    Eigen::VectorXd lambda;
    Eigen::VectorXd coeff_norm;
    Eigen::VectorXd p;  ///< NaN where absent
    std::vector<bool> present;
};

/// Relative coefficient-norm threshold below which a band is "absent".
inline constexpr double kBandDeadThreshold = 1e-12;

BandParticipation band_participation(const SpectralBasis& basis,
                                     const Eigen::MatrixXd& signal);

/// Contiguous index ranges [first, last] of eigenvalues closer than tol,
/// with at least two members. Eigenvectors inside such a cluster span the
/// eigenspace but are individually basis-dependent, so per-mode
/// participation there should be read with care.
std::vector<std::pair<int, int>> degenerate_clusters(const Eigen::VectorXd& eigenvalues,
                                                     double tol = 1e-8);

} // namespace specloc
