#include "dsel/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "dsel/error.hpp"
#include "dsel/linkcap.hpp"
#include "dsel/ratecalc.hpp"

namespace dsel {

namespace {

// substream tags
constexpr std::uint64_t kTrialField = 1;
constexpr std::uint64_t kTheoryNoise = 2;
constexpr std::uint64_t kTrainingField = 3;
constexpr std::uint64_t kFullSamples = 4;
constexpr std::uint64_t kCodebookSeed = 5;

bool is_lloyd(FeedbackScheme s) { return s == FeedbackScheme::lloyd_2d || s == FeedbackScheme::lloyd_1d; }
bool is_2d(FeedbackScheme s) { return s == FeedbackScheme::lloyd_2d || s == FeedbackScheme::theory_2d; }

double mean_over_interior(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

CapacityEstimate summarize(std::vector<double> per_trial, double d) {
    CapacityEstimate est;
    est.d_per_entry = d;
    const auto n = static_cast<double>(per_trial.size());
    double sum = 0.0;
    for (double v : per_trial) sum += v;
    est.mean = sum / n;
    if (per_trial.size() > 1) {
        double ss = 0.0;
        for (double v : per_trial) ss += (v - est.mean) * (v - est.mean);
        est.std_err = std::sqrt(ss / (n - 1.0) / n);
    }
    est.per_trial = std::move(per_trial);
    return est;
}

// Runs body(t) for every trial; results land in per-trial slots so the
// reduction order never depends on the worker count.
template <typename Body>
void for_each_trial(int trials, int workers, Body&& body) {
    if (workers <= 1 || trials < 2) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    const int w = std::min(workers, trials);
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int k = 0; k < w; ++k) {
        pool.emplace_back([&, k] {
            for (int t = k; t < trials; t += w) body(t);
        });
    }
}

}  // namespace

std::string_view to_string(FeedbackScheme scheme) {
    switch (scheme) {
        case FeedbackScheme::theory_2d: return "theory_2d";
        case FeedbackScheme::theory_1d: return "theory_1d";
        case FeedbackScheme::lloyd_2d: return "lloyd_2d";
        case FeedbackScheme::lloyd_1d: return "lloyd_1d";
        case FeedbackScheme::perfect_csi: return "perfect_csi";
    }
    return "unknown";
}

FeedbackScheme parse_feedback_scheme(std::string_view name) {
    for (auto s : {FeedbackScheme::theory_2d, FeedbackScheme::theory_1d, FeedbackScheme::lloyd_2d,
                   FeedbackScheme::lloyd_1d, FeedbackScheme::perfect_csi}) {
        if (to_string(s) == name) return s;
    }
    throw DomainError("unknown feedback scheme '" + std::string(name) + "'");
}

ChannelField SeededChannelSource::field(std::uint64_t trial) const {
    return gen_field(params_, m_, n_, n_r_, n_t_, Rng(seed_, {kTrialField, trial}).id());
}

FeedbackSimulator::FeedbackSimulator(LinkSetup setup) : setup_(std::move(setup)) {
    if (setup_.n_r < 1 || setup_.n_t < 1) throw DomainError("LinkSetup: antenna counts must be >= 1");
    if (setup_.field_m < 2 || setup_.field_n < 2) {
        throw DomainError("LinkSetup: fields need at least 2 x 2 points to have interior points");
    }
    if (setup_.trials < 1) throw DomainError("LinkSetup: trials must be >= 1");
    if (!(setup_.a2_amp > 0.0)) throw DomainError("LinkSetup: signal power must be positive");
    if (setup_.lloyd_passes < 1) throw DomainError("LinkSetup: lloyd_passes must be >= 1");
}

PredictorCoeffs FeedbackSimulator::coeffs(FeedbackScheme scheme) const {
    const auto& p = setup_.params;
    if (is_2d(scheme)) return predictor_coeffs(p.alpha_t(), p.alpha_f(), p.sigma2_h());
    return predictor_coeffs_1d(p.alpha_t(), p.sigma2_h());
}

ChannelField FeedbackSimulator::training_field(std::uint64_t index) const {
    return gen_field(setup_.params, setup_.field_m, setup_.field_n, setup_.n_r, setup_.n_t,
                     Rng(setup_.seed, {kTrainingField, index}).id());
}

std::size_t FeedbackSimulator::training_field_count() const {
    const auto interior = static_cast<std::size_t>((setup_.field_m - 1) * (setup_.field_n - 1));
    return (setup_.training_size + interior - 1) / interior;
}

const Codebook& FeedbackSimulator::full_codebook(int bits) {
    if (auto it = full_.find(bits); it != full_.end()) return it->second;
    Rng rng(setup_.seed, {kFullSamples});
    const auto n_r = static_cast<Eigen::Index>(setup_.n_r);
    const auto n_t = static_cast<Eigen::Index>(setup_.n_t);
    VectorSet samples(static_cast<std::size_t>(n_r * n_t));
    samples.reserve(setup_.training_size);
    std::vector<cplx> v(static_cast<std::size_t>(n_r * n_t));
    for (std::size_t s = 0; s < setup_.training_size; ++s) {
        for (auto& z : v) z = rng.complex_gaussian(setup_.params.sigma2_h());
        samples.push_back(std::span<const cplx>(v));
    }
    const auto seed = Rng(setup_.seed, {kCodebookSeed, 0, static_cast<std::uint64_t>(bits)}).id();
    return full_.emplace(bits, train_codebook(samples, bits, setup_.lloyd, seed)).first->second;
}

const Codebook& FeedbackSimulator::differential_codebook(FeedbackScheme scheme, int bits) {
    if (!is_lloyd(scheme)) throw DomainError("differential_codebook: not a lloyd scheme");
    const auto key = std::make_pair(static_cast<int>(scheme), bits);
    if (auto it = diff_.find(key); it != diff_.end()) return it->second;

    const Codebook& full = full_codebook(bits);
    const PredictorCoeffs c = coeffs(scheme);
    const std::size_t fields = training_field_count();
    const auto seed = Rng(setup_.seed, {kCodebookSeed, static_cast<std::uint64_t>(scheme) + 1,
                                        static_cast<std::uint64_t>(bits)})
                          .id();

    // open loop: differentials against the true history
    VectorSet samples(static_cast<std::size_t>(setup_.n_r * setup_.n_t));
    samples.reserve(fields * static_cast<std::size_t>((setup_.field_m - 1) * (setup_.field_n - 1)));
    for (std::size_t f = 0; f < fields; ++f) {
        const ChannelField h = training_field(f);
        for (int m = 1; m < h.rows(); ++m) {
            for (int n = 1; n < h.cols(); ++n) {
                samples.push_back(differential(h.at(m, n), h.at(m - 1, n), h.at(m, n - 1), c));
            }
        }
    }
    Codebook cb = train_codebook(samples, bits, setup_.lloyd, seed);

    // closed loop: retrain on the differentials the loop actually produces
    for (int pass = 1; pass < setup_.lloyd_passes; ++pass) {
        VectorSet loop_samples(samples.length());
        loop_samples.reserve(samples.size());
        for (std::size_t f = 0; f < fields; ++f) {
            loop(training_field(f), c, full, cb, &loop_samples);
        }
        cb = train_codebook(loop_samples, cb, setup_.lloyd, seed);
    }
    return diff_.emplace(key, std::move(cb)).first->second;
}

std::vector<ChannelMatrix> FeedbackSimulator::loop(const ChannelField& field, const PredictorCoeffs& c,
                                                   const Codebook& full, const Codebook& diff,
                                                   VectorSet* differentials) const {
    const int rows = field.rows();
    const int cols = field.cols();
    std::vector<ChannelMatrix> rec(static_cast<std::size_t>(rows * cols));
    auto at = [&](int m, int n) -> ChannelMatrix& { return rec[static_cast<std::size_t>(m * cols + n)]; };
    for (int m = 0; m < rows; ++m) {
        for (int n = 0; n < cols; ++n) {
            const ChannelMatrix& h = field.at(m, n);
            if (m == 0 || n == 0) {
                at(m, n) = quantize(full, h);
                continue;
            }
            const ChannelMatrix h_d = differential(h, at(m - 1, n), at(m, n - 1), c);
            if (differentials != nullptr) differentials->push_back(h_d);
            at(m, n) = reconstruct(at(m - 1, n), at(m, n - 1), quantize(diff, h_d), c);
        }
    }
    return rec;
}

std::vector<ChannelMatrix> FeedbackSimulator::reconstruct_field(const ChannelField& field, FeedbackScheme scheme,
                                                                int bits, VectorSet* differentials) {
    if (!is_lloyd(scheme)) throw DomainError("reconstruct_field: only lloyd schemes run the feedback loop");
    const Codebook& diff = differential_codebook(scheme, bits);
    return loop(field, coeffs(scheme), full_codebook(bits), diff, differentials);
}

CapacityEstimate FeedbackSimulator::run(FeedbackScheme scheme, int bits, std::optional<double> d_theory) {
    const SeededChannelSource source(setup_.params, setup_.field_m, setup_.field_n, setup_.n_r, setup_.n_t,
                                     setup_.seed);
    return run(scheme, bits, source, d_theory);
}

CapacityEstimate FeedbackSimulator::run(FeedbackScheme scheme, int bits, const ChannelSource& source,
                                        std::optional<double> d_theory) {
    if (scheme != FeedbackScheme::perfect_csi && bits < 1) {
        throw DomainError("capacity: feedback budget must be >= 1 bit");
    }
    const auto& p = setup_.params;
    const double entries = static_cast<double>(setup_.n_r * setup_.n_t);
    std::vector<double> per_trial(static_cast<std::size_t>(setup_.trials));

    auto interior_capacity = [&](const std::vector<ChannelMatrix>& est, int cols, int rows, double d) {
        std::vector<double> caps;
        caps.reserve(static_cast<std::size_t>((rows - 1) * (cols - 1)));
        for (int m = 1; m < rows; ++m) {
            for (int n = 1; n < cols; ++n) {
                caps.push_back(capacity_instant(est[static_cast<std::size_t>(m * cols + n)], d, setup_.a2_amp));
            }
        }
        return mean_over_interior(caps);
    };

    double d = 0.0;
    switch (scheme) {
        case FeedbackScheme::perfect_csi: {
            for_each_trial(setup_.trials, setup_.workers, [&](int t) {
                const ChannelField h = source.field(static_cast<std::uint64_t>(t));
                std::vector<ChannelMatrix> est;
                est.reserve(static_cast<std::size_t>(h.rows() * h.cols()));
                for (int m = 0; m < h.rows(); ++m) {
                    for (int n = 0; n < h.cols(); ++n) est.push_back(h.at(m, n));
                }
                per_trial[static_cast<std::size_t>(t)] = interior_capacity(est, h.cols(), h.rows(), 0.0);
            });
            break;
        }
        case FeedbackScheme::theory_2d:
        case FeedbackScheme::theory_1d: {
            const auto rate_scheme = is_2d(scheme) ? FeedbackRateScheme::diff_2d : FeedbackRateScheme::diff_1d_time;
            d = d_theory.value_or(distortion_for_rate(rate_scheme, setup_.n_r, setup_.n_t, p.sigma2_h(),
                                                      p.alpha_t(), p.alpha_f(), static_cast<double>(bits)));
            if (!(d >= 0.0 && d <= p.sigma2_h())) throw DomainError("capacity: theory distortion outside [0, sigma2_h]");
            // Test channel H = Hq + E with E independent of Hq:
            // Hq = (1 - d/s2) H + psi, psi ~ CN(0, d (s2 - d) / s2).
            const double shrink = 1.0 - d / p.sigma2_h();
            const double psi_var = d * (p.sigma2_h() - d) / p.sigma2_h();
            for_each_trial(setup_.trials, setup_.workers, [&](int t) {
                const ChannelField h = source.field(static_cast<std::uint64_t>(t));
                Rng noise(setup_.seed, {kTheoryNoise, static_cast<std::uint64_t>(t)});
                std::vector<ChannelMatrix> est;
                est.reserve(static_cast<std::size_t>(h.rows() * h.cols()));
                for (int m = 0; m < h.rows(); ++m) {
                    for (int n = 0; n < h.cols(); ++n) {
                        ChannelMatrix q = shrink * h.at(m, n);
                        for (Eigen::Index k = 0; k < q.size(); ++k) {
                            const cplx w = noise.complex_gaussian(1.0);
                            q(k) += std::sqrt(psi_var) * w;
                        }
                        est.push_back(std::move(q));
                    }
                }
                per_trial[static_cast<std::size_t>(t)] = interior_capacity(est, h.cols(), h.rows(), d);
            });
            break;
        }
        case FeedbackScheme::lloyd_2d:
        case FeedbackScheme::lloyd_1d: {
            const Codebook& diff = differential_codebook(scheme, bits);
            const Codebook& full = full_codebook(bits);
            const PredictorCoeffs c = coeffs(scheme);
            d = diff.training_distortion / entries;
            for_each_trial(setup_.trials, setup_.workers, [&](int t) {
                const ChannelField h = source.field(static_cast<std::uint64_t>(t));
                const auto est = loop(h, c, full, diff, nullptr);
                per_trial[static_cast<std::size_t>(t)] = interior_capacity(est, h.cols(), h.rows(), d);
            });
            break;
        }
    }
    return summarize(std::move(per_trial), d);
}

CapacityEstimate capacity_ergodic(FeedbackScheme scheme, const LinkSetup& setup, int bits,
                                  std::optional<double> d_theory) {
    FeedbackSimulator sim(setup);
    return sim.run(scheme, bits, d_theory);
}

}  // namespace dsel
