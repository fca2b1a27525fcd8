#pragma once

#include <vector>

#include "dsel/channel.hpp"

namespace dsel {

/// H = u * diag(sigma) * v^H with u (N_r x N_r) and v (N_t x N_t) unitary.
struct SvdTriple {
    Eigen::MatrixXcd u;
    std::vector<double> sigma;  ///< min(N_r, N_t) values, descending, >= 0
    Eigen::MatrixXcd v;
};

/// One-sided (Hestenes) Jacobi SVD; sweeps until every column pair is
/// orthogonal to 1e-12 relative.
SvdTriple svd_decompose(const ChannelMatrix& h);

/// Water-filling powers over the transmit eigenmodes.
struct PowerAllocation {
    std::vector<double> z2;  ///< N_t per-mode powers (normalized by A^2), sum = N_t
    double mu = 0.0;         ///< water level
    double a2_amp = 1.0;     ///< signal power A^2
};

/// Solves z2_i = max(0, mu - 1/(gamma_i^2 A^2)) with sum z2_i = n_t.
///
/// Modes are taken strongest first; with k active modes
/// mu = (n_t + sum_{i<=k} 1/(gamma_i^2 A^2)) / k, and k drops while the
/// weakest assumed-active mode would get negative power. `sigma` may be
/// shorter than n_t (missing modes count as zero gain).
/// Throws NoSignalError when every gain is zero.
PowerAllocation waterfill(const std::vector<double>& sigma, double a2_amp, int n_t);
inline PowerAllocation waterfill(const std::vector<double>& sigma, double a2_amp) {
    return waterfill(sigma, a2_amp, static_cast<int>(sigma.size()));
}

/// Scalar f with F = f I: 1/A^2 + d * sum(z2), where d is the per-entry
/// variance of the CSI quantization error.
double effective_noise(const PowerAllocation& alloc, double d);

/// log2 det(I + J J^H / f) with J = H V Z from the SVD and water-filling of
/// `h_reconstructed`, and f = effective_noise(alloc, d).
double capacity_instant(const ChannelMatrix& h_reconstructed, double d, double a2_amp);

/// SNR in dB to signal power A^2 at unit noise variance.
double snr_db_to_a2(double snr_db);

}  // namespace dsel
