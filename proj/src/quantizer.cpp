#include "dsel/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "dsel/error.hpp"
#include "dsel/rng.hpp"

namespace dsel {

namespace {

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Complex vectors viewed as interleaved reals (re, im, re, im, ...).
Eigen::Map<const RealMatrix> as_real(const VectorSet& set) {
    return {reinterpret_cast<const double*>(set.flat().data()), static_cast<Eigen::Index>(set.size()),
            static_cast<Eigen::Index>(2 * set.length())};
}

double squared_distance(std::span<const cplx> a, std::span<const cplx> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return acc;
}

constexpr std::size_t kBlock = 256;

// Nearest-codeword search with per-sample distance bounds. `upper` tracks the
// distance to the assigned codeword and `lower` a bound on the distance to
// every other one; a sample whose exact assigned distance stays below its
// lower bound keeps its cell without a search. Searches rank codewords by
// |c|^2 - 2 x.c computed blockwise as a single-precision matrix product; the
// chosen codeword's distance is always recomputed exactly.
class Partitioner {
public:
    explicit Partitioner(const VectorSet& samples) : samples_(samples) {
        const auto x = as_real(samples);
        x_ = x.cast<float>();
        xnorm_ = x.rowwise().squaredNorm();
        assign_.assign(samples.size(), 0);
        lower_.assign(samples.size(), -1.0);
    }

    [[nodiscard]] const std::vector<std::uint32_t>& assign() const { return assign_; }

    // Codewords moved from `before` to `after`; loosen the bounds accordingly.
    void moved(const VectorSet& before, const VectorSet& after) {
        const std::size_t k = after.size();
        std::vector<double> delta(k);
        std::size_t top = 0;
        for (std::size_t j = 0; j < k; ++j) {
            delta[j] = std::sqrt(squared_distance(before[j], after[j]));
            if (delta[j] > delta[top]) top = j;
        }
        double second = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j != top) second = std::max(second, delta[j]);
        }
        for (std::size_t s = 0; s < assign_.size(); ++s) {
            const double shift = assign_[s] == top ? second : delta[top];
            lower_[s] = lower_[s] * (1.0 - 1e-12) - shift - 1e-12;
        }
    }

    // Returns the mean squared distance of the new partition. Never worse per
    // sample than staying in the previous cell.
    double run(const VectorSet& codewords) {
        const auto cd = as_real(codewords);
        const Eigen::VectorXd cnorm_d = cd.rowwise().squaredNorm();
        const RealMatrixF c_scaled = -2.0f * cd.cast<float>();
        const Eigen::RowVectorXf cnorm = cnorm_d.transpose().cast<float>();
        const double cnorm_max = cnorm_d.size() > 0 ? cnorm_d.maxCoeff() : 0.0;
        const bool first = !initialized_;
        initialized_ = true;

        std::vector<double> dist(samples_.size());
        std::vector<std::size_t> pending;
        for (std::size_t s = 0; s < samples_.size(); ++s) {
            if (first) {
                pending.push_back(s);
                continue;
            }
            dist[s] = squared_distance(samples_[s], codewords[assign_[s]]);
            if (lower_[s] < 0.0 || std::sqrt(dist[s]) >= lower_[s]) pending.push_back(s);
        }

        RealMatrixF xs;
        RealMatrixF scores;
        for (std::size_t start = 0; start < pending.size(); start += kBlock) {
            const std::size_t rows = std::min(kBlock, pending.size() - start);
            xs.resize(static_cast<Eigen::Index>(rows), x_.cols());
            for (std::size_t r = 0; r < rows; ++r) {
                xs.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(pending[start + r]));
            }
            scores.noalias() = xs * c_scaled.transpose();
            scores.rowwise() += cnorm;
            for (std::size_t r = 0; r < rows; ++r) {
                auto row = scores.row(static_cast<Eigen::Index>(r));
                const float best_score = row.minCoeff();
                Eigen::Index best = 0;
                while (row[best] != best_score) ++best;
                row[best] = std::numeric_limits<float>::infinity();
                const float runner_up = row.minCoeff();
                const std::size_t s = pending[start + r];
                const double d_best = squared_distance(samples_[s], codewords[static_cast<std::size_t>(best)]);
                const double xn = xnorm_[static_cast<Eigen::Index>(s)];
                // single-precision scores carry rounding error of order
                // eps * (|x|^2 + |c|^2)
                const double slack = 1e-5 * (xn + cnorm_max + 1e-30);
                double other = runner_up;
                if (first || d_best < dist[s] || assign_[s] == static_cast<std::uint32_t>(best)) {
                    assign_[s] = static_cast<std::uint32_t>(best);
                    dist[s] = d_best;
                } else {
                    other = best_score;
                }
                lower_[s] = std::isfinite(other) ? std::sqrt(std::max(0.0, xn + other - slack))
                                                 : std::numeric_limits<double>::infinity();
            }
        }

        double total = 0.0;
        for (double d : dist) total += d;
        return total / static_cast<double>(samples_.size());
    }

private:
    const VectorSet& samples_;
    RealMatrixF x_;
    Eigen::VectorXd xnorm_;
    std::vector<std::uint32_t> assign_;
    std::vector<double> lower_;
    bool initialized_ = false;
};

void check_training_input(const VectorSet& samples, int bits) {
    if (bits < 0 || bits > 24) throw DomainError("train_codebook: bits must lie in [0, 24]");
    if (samples.length() == 0) throw ShapeError("train_codebook: zero-length vectors");
    const std::size_t k = std::size_t{1} << bits;
    if (samples.size() < k) {
        throw DomainError("train_codebook: " + std::to_string(samples.size()) +
                          " samples cannot seed " + std::to_string(k) + " codewords");
    }
}

Codebook run_lloyd(const VectorSet& samples, VectorSet codewords, int bits,
                   const LloydOptions& options, std::uint64_t seed) {
    const std::size_t k = codewords.size();
    const std::size_t len = samples.length();
    const Rng repair_root(seed, {0x7265706169ULL});

    Codebook cb;
    cb.bits = bits;
    cb.seed = seed;
    cb.training_size = samples.size();

    Partitioner partitioner(samples);
    std::vector<std::size_t> counts(k);
    std::vector<cplx> sums(k * len);
    const int max_iter = std::max(1, options.max_iter);

    for (int iter = 0;; ++iter) {
        const VectorSet previous = codewords;
        const double dist = partitioner.run(codewords);
        const auto& assign = partitioner.assign();
        cb.trace.push_back(dist);
        cb.iterations = iter + 1;

        std::fill(counts.begin(), counts.end(), 0);
        std::fill(sums.begin(), sums.end(), cplx{});
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const std::size_t cell = assign[s];
            ++counts[cell];
            const auto v = samples[s];
            for (std::size_t i = 0; i < len; ++i) sums[cell * len + i] += v[i];
        }

        // Empty cells: replace the codeword by a perturbed copy of the most
        // populated cell's codeword. Does not change the current partition's
        // distortion; the next partition splits the donor cell.
        std::vector<std::size_t> load = counts;
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] != 0) continue;
            const auto donor = static_cast<std::size_t>(
                std::distance(load.begin(), std::max_element(load.begin(), load.end())));
            double centroid_norm2 = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                centroid_norm2 += std::norm(sums[donor * len + i] / static_cast<double>(counts[donor]));
            }
            double scale = 1e-6 * std::sqrt(centroid_norm2);
            if (scale == 0.0) scale = 1e-6;
            Rng rng = repair_root.substream({static_cast<std::uint64_t>(iter), j});
            std::vector<cplx> dir(len);
            double dir_norm2 = 0.0;
            for (auto& z : dir) {
                z = rng.complex_gaussian(1.0);
                dir_norm2 += std::norm(z);
            }
            const double inv = 1.0 / std::sqrt(dir_norm2);
            auto target = codewords.at_mut(j);
            const auto source = codewords[donor];
            for (std::size_t i = 0; i < len; ++i) target[i] = source[i] + scale * inv * dir[i];
            load[donor] /= 2;
            load[j] = load[donor];
        }

        const bool flat = dist == 0.0;
        bool converged = false;
        if (cb.trace.size() >= 2) {
            const double prev = cb.trace[cb.trace.size() - 2];
            converged = prev <= 0.0 || (prev - dist) / prev < options.rel_tol;
        }
        if (flat || converged || iter + 1 >= max_iter) {
            cb.training_distortion = dist;
            break;
        }

        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            auto target = codewords.at_mut(j);
            const double inv = 1.0 / static_cast<double>(counts[j]);
            for (std::size_t i = 0; i < len; ++i) target[i] = sums[j * len + i] * inv;
        }
        partitioner.moved(previous, codewords);
    }
    cb.codewords = std::move(codewords);
    return cb;
}

}  // namespace

void VectorSet::push_back(std::span<const cplx> v) {
    if (length_ == 0) length_ = v.size();
    if (v.size() != length_) throw ShapeError("VectorSet: vector length mismatch");
    data_.insert(data_.end(), v.begin(), v.end());
}

void VectorSet::push_back(const ChannelMatrix& h) {
    const auto v = to_vector(h);
    push_back(std::span<const cplx>(v));
}

std::vector<cplx> to_vector(const ChannelMatrix& h) {
    std::vector<cplx> v;
    v.reserve(static_cast<std::size_t>(h.size()));
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) v.push_back(h(i, j));
    }
    return v;
}

ChannelMatrix to_matrix(std::span<const cplx> v, Eigen::Index n_r, Eigen::Index n_t) {
    if (static_cast<Eigen::Index>(v.size()) != n_r * n_t) {
        throw ShapeError("to_matrix: vector length does not match N_r * N_t");
    }
    ChannelMatrix h(n_r, n_t);
    for (Eigen::Index i = 0; i < n_r; ++i) {
        for (Eigen::Index j = 0; j < n_t; ++j) h(i, j) = v[static_cast<std::size_t>(i * n_t + j)];
    }
    return h;
}

Codebook train_codebook(const VectorSet& samples, int bits, const LloydOptions& options,
                        std::uint64_t seed) {
    check_training_input(samples, bits);
    const std::size_t k = std::size_t{1} << bits;
    // partial Fisher-Yates over sample indices
    Rng rng(seed, {0x696e6974ULL});
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    VectorSet codewords(samples.length());
    codewords.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pick = i + rng.uniform_index(idx.size() - i);
        std::swap(idx[i], idx[pick]);
        codewords.push_back(samples[idx[i]]);
    }
    return run_lloyd(samples, std::move(codewords), bits, options, seed);
}

Codebook train_codebook(const VectorSet& samples, const Codebook& initial,
                        const LloydOptions& options, std::uint64_t seed) {
    check_training_input(samples, initial.bits);
    if (initial.length() != samples.length()) {
        throw ShapeError("train_codebook: initial codebook length differs from samples");
    }
    return run_lloyd(samples, initial.codewords, initial.bits, options, seed);
}

Quantized quantize(const Codebook& cb, std::span<const cplx> v) {
    if (v.size() != cb.length()) throw ShapeError("quantize: vector length differs from codeword length");
    if (cb.size() == 0) throw DomainError("quantize: empty codebook");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const double d = squared_distance(v, cb.codewords[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return {best, cb.codewords[best], best_d};
}

ChannelMatrix quantize(const Codebook& cb, const ChannelMatrix& h) {
    const auto v = to_vector(h);
    const auto q = quantize(cb, std::span<const cplx>(v));
    return to_matrix(q.codeword, h.rows(), h.cols());
}

double distortion(const Codebook& cb, const VectorSet& samples) {
    if (samples.empty()) throw DomainError("distortion: no samples");
    if (samples.length() != cb.length()) throw ShapeError("distortion: sample length differs from codeword length");
    double acc = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) acc += quantize(cb, samples[s]).distance;
    return acc / static_cast<double>(samples.size());
}

ChannelMatrix additive_error(const ChannelMatrix& h_true, const ChannelMatrix& h_quantized) {
    if (h_true.rows() != h_quantized.rows() || h_true.cols() != h_quantized.cols()) {
        throw ShapeError("additive_error: matrix dimensions differ");
    }
    return h_true - h_quantized;
}

void save_codebook(const Codebook& cb, std::ostream& out) {
    char buf[40];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    out << "dsel-codebook 1\n";
    out << "bits " << cb.bits << '\n';
    out << "length " << cb.length() << '\n';
    out << "seed " << cb.seed << '\n';
    out << "training_size " << cb.training_size << '\n';
    out << "iterations " << cb.iterations << '\n';
    out << "training_distortion " << num(cb.training_distortion) << '\n';
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const auto w = cb.codewords[j];
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i != 0) out << ' ';
            out << num(w[i].real()) << ' ' << num(w[i].imag());
        }
        out << '\n';
    }
}

namespace {

template <typename T>
T read_field(std::istream& in, const char* key) {
    std::string name;
    T value{};
    if (!(in >> name >> value) || name != key) {
        throw DomainError(std::string("load_codebook: expected '") + key + "' header field");
    }
    return value;
}

double read_number(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw DomainError("load_codebook: truncated codeword data");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw DomainError("load_codebook: bad number '" + tok + "'");
    return v;
}

}  // namespace

Codebook load_codebook(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "dsel-codebook" || version != 1) {
        throw DomainError("load_codebook: not a dsel codebook file");
    }
    Codebook cb;
    cb.bits = read_field<int>(in, "bits");
    const auto len = read_field<std::size_t>(in, "length");
    cb.seed = read_field<std::uint64_t>(in, "seed");
    cb.training_size = read_field<std::size_t>(in, "training_size");
    cb.iterations = read_field<int>(in, "iterations");
    std::string name;
    if (!(in >> name) || name != "training_distortion") {
        throw DomainError("load_codebook: expected 'training_distortion' header field");
    }
    cb.training_distortion = read_number(in);
    if (cb.bits < 0 || cb.bits > 24 || len == 0) throw DomainError("load_codebook: bad header");
    const std::size_t k = std::size_t{1} << cb.bits;
    cb.codewords = VectorSet(len);
    cb.codewords.reserve(k);
    std::vector<cplx> w(len);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < len; ++i) {
            const double re = read_number(in);
            const double im = read_number(in);
            w[i] = {re, im};
        }
        cb.codewords.push_back(std::span<const cplx>(w));
    }
    return cb;
}

}  // namespace dsel
