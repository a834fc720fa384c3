#include "specloc/spectral.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace specloc {

SpectralBasis eigendecompose(const Eigen::MatrixXd& symmetric) {
    if (symmetric.rows() != symmetric.cols() || symmetric.rows() < 1)
        throw ValidationError("eigendecompose expects a square matrix of size >= 1");
    const double asym = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        throw ValidationError("matrix is not symmetric (max deviation " +
                              std::to_string(asym) + ")");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success)
        throw NumericError("symmetric eigensolver did not converge");

    SpectralBasis basis;
    basis.eigenvalues = solver.eigenvalues();
    basis.eigenvectors = solver.eigenvectors();

    // Sign convention: largest-magnitude entry positive, lowest index wins ties.
    const int n = basis.size();
    for (int c = 0; c < n; ++c) {
        int pivot = 0;
        double best = std::abs(basis.eigenvectors(0, c));
        for (int r = 1; r < n; ++r) {
            const double mag = std::abs(basis.eigenvectors(r, c));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (basis.eigenvectors(pivot, c) < 0.0) basis.eigenvectors.col(c) = -basis.eigenvectors.col(c);
    }
    return basis;
}

ParticipationSpectrum eigenvector_participation_spectrum(const SpectralBasis& basis) {
    ParticipationSpectrum spectrum;
    spectrum.values = basis.eigenvalues;
    spectrum.p.resize(basis.size());
    for (int c = 0; c < basis.size(); ++c)
        spectrum.p[c] = participation_ratio(basis.eigenvectors.col(c));
    return spectrum;
}

BandProjection band_project(const SpectralBasis& basis,
                            const Eigen::MatrixXd& signal,
                            int band_index) {
    if (signal.rows() != basis.size())
        throw ValidationError("signal has " + std::to_string(signal.rows()) +
                              " rows, basis has " + std::to_string(basis.size()));
    if (band_index < 0 || band_index >= basis.size())
        throw ValidationError("band index " + std::to_string(band_index) + " out of range");

    BandProjection band;
    band.band_index = band_index;
    band.lambda = basis.eigenvalues[band_index];
    band.coefficients = signal.transpose() * basis.eigenvectors.col(band_index);
    band.spatial_component = basis.eigenvectors.col(band_index) * band.coefficients.norm();
    return band;
}

BandParticipation band_participation(const SpectralBasis& basis,
                                     const Eigen::MatrixXd& signal) {
    if (signal.rows() != basis.size())
        throw ValidationError("signal has " + std::to_string(signal.rows()) +
                              " rows, basis has " + std::to_string(basis.size()));
    const double signal_norm = signal.norm();
    if (signal_norm == 0.0)
        throw ValidationError("band participation undefined for the all-zero signal");

    const int n = basis.size();
    const Eigen::MatrixXd coeffs = basis.eigenvectors.transpose() * signal;  // n x d
    const double dead = kBandDeadThreshold * signal_norm;

    BandParticipation bands;
    bands.lambda = basis.eigenvalues;
    bands.coeff_norm = coeffs.rowwise().norm();
    bands.p.setConstant(n, std::numeric_limits<double>::quiet_NaN());
    bands.present.assign(n, false);
    for (int b = 0; b < n; ++b) {
        if (bands.coeff_norm[b] < dead) continue;
        bands.present[b] = true;
        bands.p[b] = participation_ratio(
            (basis.eigenvectors.col(b) * bands.coeff_norm[b]).eval());
    }
    return bands;
}

std::vector<std::pair<int, int>> degenerate_clusters(const Eigen::VectorXd& eigenvalues,
                                                     double tol) {
    std::vector<std::pair<int, int>> clusters;
    const int n = static_cast<int>(eigenvalues.size());
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || eigenvalues[i] - eigenvalues[i - 1] > tol) {
            if (i - start >= 2) clusters.emplace_back(start, i - 1);
            start = i;
        }
    }
    return clusters;
}

} // namespace specloc
