#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dsel/corrstats.hpp"
#include "dsel/rng.hpp"

namespace dsel {

/// Frequency response H_{m,n} of one symbol interval and subchannel (N_r x N_t).
using ChannelMatrix = Eigen::MatrixXcd;

/// One realization of the doubly-selective channel over an M x N grid of
/// symbol intervals (m) and subchannels (n).
class ChannelField {
  public:
    ChannelField(int m, int n, std::vector<ChannelMatrix> grid, CorrelationParams params,
                 std::uint64_t seed);

    [[nodiscard]] int rows() const noexcept { return m_; }  // symbol intervals M
    [[nodiscard]] int cols() const noexcept { return n_; }  // subchannels N
    [[nodiscard]] Eigen::Index n_r() const noexcept { return grid_.front().rows(); }
    [[nodiscard]] Eigen::Index n_t() const noexcept { return grid_.front().cols(); }
    [[nodiscard]] const CorrelationParams& params() const noexcept { return params_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] const ChannelMatrix& at(int m, int n) const { return grid_[index(m, n)]; }

  private:
    [[nodiscard]] std::size_t index(int m, int n) const;

    int m_;
    int n_;
    std::vector<ChannelMatrix> grid_;
    CorrelationParams params_;
    std::uint64_t seed_;
};

/// alpha * prev + sqrt(1 - alpha^2) * W with W_ij ~ CN(0, sigma2_h) i.i.d.
ChannelMatrix ar1_step(const ChannelMatrix& prev, double alpha, double sigma2_h, Rng& rng);

/// Generates a field whose per-entry correlation is
/// sigma2_h * alpha_t^|dm| * alpha_f^|dn|.
///
/// Each antenna entry is an independent process drawn from its own
/// substream of `seed`: a white CN(0, sigma2_h) grid is filtered by a
/// time-direction AR1 and the result by a frequency-direction AR1. The edge
/// samples of both filters start from the stationary marginal, so every grid
/// point (including m = 0 and n = 0) has the exact stationary statistics.
ChannelField gen_field(const CorrelationParams& params, int m, int n, int n_r, int n_t,
                       std::uint64_t seed);

/// Mean of Re{H[m+dm, n+dn] conj(H[m, n])} over all valid positions and all
/// antenna entries. Requires 0 <= dm < M and 0 <= dn < N.
double empirical_corr(const ChannelField& field, int dm, int dn);

/// Writes one CSV line per grid point in row-major (m, n) order:
/// `m,n,re_00,im_00,re_01,im_01,...` with antenna entries row-major.
void write_field_csv(const ChannelField& field, std::ostream& out);

}  // namespace dsel
