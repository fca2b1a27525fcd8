#include "dsel/linkcap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsel/error.hpp"

namespace dsel {

namespace {

// Extends the orthonormal leading columns of q to a full unitary basis.
void complete_unitary(Eigen::MatrixXcd& q, Eigen::Index filled) {
    const Eigen::Index n = q.rows();
    Eigen::Index next = filled;
    for (Eigen::Index e = 0; e < n && next < n; ++e) {
        Eigen::VectorXcd cand = Eigen::VectorXcd::Unit(n, e);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < next; ++j) {
                cand -= q.col(j) * q.col(j).dot(cand);
            }
        }
        const double norm = cand.norm();
        if (norm > 1e-8) q.col(next++) = cand / norm;
    }
}

// Decomposes a tall (rows >= cols) matrix.
SvdTriple svd_tall(const Eigen::MatrixXcd& h) {
    const Eigen::Index m = h.rows();
    const Eigen::Index n = h.cols();
    Eigen::MatrixXcd a = h;
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);
    constexpr double tol = 1e-12;

    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = a.col(p).squaredNorm();
                const double beta = a.col(q).squaredNorm();
                const std::complex<double> gamma = a.col(p).dot(a.col(q));  // a_p^H a_q
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                // rotate (a_p, a_q e^{-i phi}) by a real Jacobi rotation
                const std::complex<double> phase = gamma / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Eigen::VectorXcd ap = a.col(p);
                const Eigen::VectorXcd aq = a.col(q) * std::conj(phase);
                a.col(p) = c * ap - s * aq;
                a.col(q) = s * ap + c * aq;
                const Eigen::VectorXcd vp = v.col(p);
                const Eigen::VectorXcd vq = v.col(q) * std::conj(phase);
                v.col(p) = c * vp - s * vq;
                v.col(q) = s * vp + c * vq;
            }
        }
        if (!rotated) break;
    }

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = a.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
    });

    SvdTriple out;
    out.u = Eigen::MatrixXcd::Zero(m, m);
    out.v = Eigen::MatrixXcd(n, n);
    out.sigma.resize(static_cast<std::size_t>(n));
    const double scale = std::max(norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end()), 1e-300);
    Eigen::Index filled = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index j = order[static_cast<std::size_t>(k)];
        const double s = norms[static_cast<std::size_t>(j)];
        out.v.col(k) = v.col(j);
        if (s > 1e-14 * scale) {
            out.sigma[static_cast<std::size_t>(k)] = s;
            out.u.col(k) = a.col(j) / s;
            filled = k + 1;
        } else {
            out.sigma[static_cast<std::size_t>(k)] = 0.0;
        }
    }
    complete_unitary(out.u, filled);
    return out;
}

}  // namespace

SvdTriple svd_decompose(const ChannelMatrix& h) {
    if (h.size() == 0) throw ShapeError("svd_decompose: empty matrix");
    if (!h.allFinite()) throw DomainError("svd_decompose: non-finite entries");
    if (h.rows() >= h.cols()) return svd_tall(h);
    // H^H = V S U^H
    SvdTriple t = svd_tall(h.adjoint());
    std::swap(t.u, t.v);
    return t;
}

PowerAllocation waterfill(const std::vector<double>& sigma, double a2_amp, int n_t) {
    if (!(a2_amp > 0.0)) throw DomainError("waterfill: signal power must be positive");
    if (n_t < 1) throw DomainError("waterfill: n_t must be >= 1");
    if (sigma.size() > static_cast<std::size_t>(n_t)) {
        throw ShapeError("waterfill: more singular values than transmit antennas");
    }
    for (double s : sigma) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("waterfill: singular values must be finite and >= 0");
    }

    std::vector<std::size_t> order(sigma.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    std::size_t k = 0;
    while (k < order.size() && sigma[order[k]] > 0.0) ++k;
    if (k == 0) throw NoSignalError("waterfill: all singular values are zero");

    std::vector<double> inv_gain(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double s = sigma[order[i]];
        inv_gain[i] = s > 0.0 ? 1.0 / (s * s * a2_amp) : 0.0;
    }

    double mu = 0.0;
    for (; k > 0; --k) {
        double acc = static_cast<double>(n_t);
        for (std::size_t i = 0; i < k; ++i) acc += inv_gain[i];
        mu = acc / static_cast<double>(k);
        if (mu - inv_gain[k - 1] >= 0.0) break;
    }

    PowerAllocation alloc;
    alloc.mu = mu;
    alloc.a2_amp = a2_amp;
    alloc.z2.assign(static_cast<std::size_t>(n_t), 0.0);
    for (std::size_t i = 0; i < k; ++i) alloc.z2[order[i]] = mu - inv_gain[i];
    return alloc;
}

double effective_noise(const PowerAllocation& alloc, double d) {
    if (!(d >= 0.0)) throw DomainError("effective_noise: distortion must be >= 0");
    const double total = std::accumulate(alloc.z2.begin(), alloc.z2.end(), 0.0);
    return 1.0 / alloc.a2_amp + d * total;
}

double capacity_instant(const ChannelMatrix& h_reconstructed, double d, double a2_amp) {
    if (!(a2_amp > 0.0)) throw DomainError("capacity_instant: signal power must be positive");
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("capacity_instant: distortion must be finite and >= 0");
    const SvdTriple svd = svd_decompose(h_reconstructed);
    const auto n_t = static_cast<int>(h_reconstructed.cols());
    const PowerAllocation alloc = waterfill(svd.sigma, a2_amp, n_t);
    const double f = effective_noise(alloc, d);

    Eigen::VectorXcd z(n_t);
    for (int i = 0; i < n_t; ++i) z[i] = std::sqrt(alloc.z2[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXcd j = h_reconstructed * svd.v * z.asDiagonal();
    const Eigen::Index n_r = h_reconstructed.rows();
    const Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(n_r, n_r) + (j * j.adjoint()) / f;
    // g is Hermitian positive definite: log det from the Cholesky diagonal
    const Eigen::LLT<Eigen::MatrixXcd> llt(g);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n_r; ++i) logdet += 2.0 * std::log2(llt.matrixL()(i, i).real());
    return logdet;
}

double snr_db_to_a2(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

}  // namespace dsel
