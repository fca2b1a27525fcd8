#include "dsel/channel.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "dsel/error.hpp"

namespace dsel {

ChannelField::ChannelField(int m, int n, std::vector<ChannelMatrix> grid, CorrelationParams params,
                           std::uint64_t seed)
    : m_(m), n_(n), grid_(std::move(grid)), params_(params), seed_(seed) {
    if (m < 1 || n < 1) throw DomainError("ChannelField: grid dimensions must be >= 1");
    if (grid_.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(n)) {
        throw ShapeError("ChannelField: grid holds " + std::to_string(grid_.size()) +
                         " matrices, expected M*N");
    }
    const auto r = grid_.front().rows();
    const auto c = grid_.front().cols();
    if (r < 1 || c < 1) throw ShapeError("ChannelField: empty channel matrix");
    for (const auto& h : grid_) {
        if (h.rows() != r || h.cols() != c) throw ShapeError("ChannelField: mixed matrix shapes");
    }
}

std::size_t ChannelField::index(int m, int n) const {
    if (m < 0 || m >= m_ || n < 0 || n >= n_) {
        throw DomainError("ChannelField: grid index out of range");
    }
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(n);
}

ChannelMatrix ar1_step(const ChannelMatrix& prev, double alpha, double sigma2_h, Rng& rng) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("ar1_step: alpha must lie in [0, 1]");
    if (!(sigma2_h > 0.0)) throw DomainError("ar1_step: sigma2_h must be positive");
    if (!prev.allFinite()) throw DomainError("ar1_step: non-finite previous state");
    const double gain = std::sqrt(1.0 - alpha * alpha);
    ChannelMatrix out(prev.rows(), prev.cols());
    for (Eigen::Index i = 0; i < prev.rows(); ++i) {
        for (Eigen::Index j = 0; j < prev.cols(); ++j) {
            out(i, j) = alpha * prev(i, j) + gain * rng.complex_gaussian(sigma2_h);
        }
    }
    return out;
}

ChannelField gen_field(const CorrelationParams& params, int m, int n, int n_r, int n_t,
                       std::uint64_t seed) {
    if (m < 1 || n < 1 || n_r < 1 || n_t < 1) {
        throw DomainError("gen_field: all dimensions must be >= 1");
    }
    const double at = params.alpha_t();
    const double af = params.alpha_f();
    const double gt = std::sqrt(1.0 - at * at);
    const double gf = std::sqrt(1.0 - af * af);
    const double var = params.sigma2_h();
    const auto mm = static_cast<std::size_t>(m);
    const auto nn = static_cast<std::size_t>(n);

    std::vector<ChannelMatrix> grid(mm * nn, ChannelMatrix(n_r, n_t));
    std::vector<std::complex<double>> x(mm * nn);
    const Rng root(seed);
    for (int i = 0; i < n_r; ++i) {
        for (int j = 0; j < n_t; ++j) {
            Rng rng = root.substream({static_cast<std::uint64_t>(i * n_t + j)});
            for (auto& w : x) w = rng.complex_gaussian(var);
            // time direction, in place: X[m, n] = at X[m-1, n] + gt W[m, n]
            for (std::size_t r = 1; r < mm; ++r) {
                for (std::size_t c = 0; c < nn; ++c) {
                    x[r * nn + c] = at * x[(r - 1) * nn + c] + gt * x[r * nn + c];
                }
            }
            // frequency direction: H[m, n] = af H[m, n-1] + gf X[m, n]
            for (std::size_t r = 0; r < mm; ++r) {
                for (std::size_t c = 1; c < nn; ++c) {
                    x[r * nn + c] = af * x[r * nn + c - 1] + gf * x[r * nn + c];
                }
            }
            for (std::size_t k = 0; k < mm * nn; ++k) grid[k](i, j) = x[k];
        }
    }
    return ChannelField(m, n, std::move(grid), params, seed);
}

double empirical_corr(const ChannelField& field, int dm, int dn) {
    if (dm < 0 || dm >= field.rows() || dn < 0 || dn >= field.cols()) {
        throw DomainError("empirical_corr: lag out of range");
    }
    double acc = 0.0;
    std::size_t count = 0;
    for (int m = 0; m + dm < field.rows(); ++m) {
        for (int n = 0; n + dn < field.cols(); ++n) {
            const auto& a = field.at(m + dm, n + dn);
            const auto& b = field.at(m, n);
            acc += (a.array() * b.array().conjugate()).real().sum();
            count += static_cast<std::size_t>(a.size());
        }
    }
    return acc / static_cast<double>(count);
}

void write_field_csv(const ChannelField& field, std::ostream& out) {
    out << "m,n";
    for (Eigen::Index i = 0; i < field.n_r(); ++i) {
        for (Eigen::Index j = 0; j < field.n_t(); ++j) {
            out << ",re_" << i << j << ",im_" << i << j;
        }
    }
    out << '\n';
    char buf[32];
    for (int m = 0; m < field.rows(); ++m) {
        for (int n = 0; n < field.cols(); ++n) {
            out << m << ',' << n;
            const auto& h = field.at(m, n);
            for (Eigen::Index i = 0; i < h.rows(); ++i) {
                for (Eigen::Index j = 0; j < h.cols(); ++j) {
                    std::snprintf(buf, sizeof buf, "%.17g", h(i, j).real());
                    out << ',' << buf;
                    std::snprintf(buf, sizeof buf, "%.17g", h(i, j).imag());
                    out << ',' << buf;
                }
            }
            out << '\n';
        }
    }
}

}  // namespace dsel
