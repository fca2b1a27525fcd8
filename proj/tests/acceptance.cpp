#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dsel/channel.hpp"
#include "dsel/experiment.hpp"
#include "dsel/linkcap.hpp"
#include "dsel/predictor.hpp"
#include "dsel/quantizer.hpp"
#include "dsel/ratecalc.hpp"
#include "dsel/rng.hpp"

using namespace dsel;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "violated: " + what;
        }
    }
    void note(const std::string& text) {
        if (!detail.empty()) detail += "; ";
        detail += text;
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double mean = s / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

ChannelMatrix random_channel(Rng& rng, int r, int c) {
    ChannelMatrix h(r, c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) h(i, j) = rng.complex_gaussian(1.0);
    }
    return h;
}

Outcome criterion1() {
    Outcome o;
    const auto t0 = Clock::now();
    const PredictorCoeffs c = predictor_coeffs(0.75, 0.75, 1.0);
    const double ms = seconds_since(t0) * 1e3;
    o.check(std::abs(c.mse - 0.28) <= 1e-12, "mse == 0.28 within 1e-12");
    o.check(ms < 1.0, "runtime < 1 ms");
    o.note(fmt("mse=%.15g a1=%.6g", c.mse, c.a1) + fmt(" runtime=%.4f ms", ms));
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto t0 = Clock::now();
    const double alphas[] = {0.5, 0.75, 0.9, 0.95};
    const int side = 32;
    const int interior = (side - 1) * (side - 1);
    const int fields = (100000 + interior - 1) / interior;
    double worst = 0.0;
    for (double at : alphas) {
        for (double af : alphas) {
            const CorrelationParams params(at, af, 1.0);
            const PredictorCoeffs c = predictor_coeffs(at, af, 1.0);
            std::vector<double> batches;
            for (int f = 0; f < fields; ++f) {
                const auto field = gen_field(params, side, side, 2, 2,
                                             Rng(77, {static_cast<std::uint64_t>(at * 100),
                                                      static_cast<std::uint64_t>(af * 100),
                                                      static_cast<std::uint64_t>(f)})
                                                 .id());
                double acc = 0.0;
                for (int m = 1; m < side; ++m) {
                    for (int n = 1; n < side; ++n) {
                        acc += (field.at(m, n) - predict(field.at(m - 1, n), field.at(m, n - 1), c)).squaredNorm();
                    }
                }
                batches.push_back(acc / (4.0 * interior));
            }
            const MeanSe e = mean_se(batches);
            const double z = std::abs(e.mean - c.mse) / e.se;
            worst = std::max(worst, z);
            o.check(z <= 3.0, fmt("(%.2f,%.2f) ", at, af) + fmt("mc=%.6f analytic=%.6f se=%.2g", e.mean, c.mse, e.se));
        }
    }
    const double s = seconds_since(t0);
    o.check(s < 60.0, "runtime < 1 min");
    o.note(fmt("16 points, %.0f interior samples each, worst |z|=%.2f", fields * interior, worst) +
           fmt(" runtime=%.2f s", s));
    return o;
}

Outcome criterion3() {
    Outcome o;
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double d : {0.01, 0.025, 0.1, 0.5}) {
        const double nondiff = rate_nondiff(2, 2, 1.0, d).bits_total;
        const double at_zero = rate_diff_2d(2, 2, 1.0, d, 0.0, 0.0).bits_total;
        worst = std::max(worst, std::abs(at_zero - nondiff));
        o.check(std::abs(at_zero - nondiff) <= 1e-9, fmt("rate_2d(0,0)=rate_nondiff at d=%g", d));
        for (double a : AlphaGrid{0.0, 0.95, 0.05}.values()) {
            const double r2 = rate_diff_2d(2, 2, 1.0, d, a, 0.0).bits_total;
            const double r1 = rate_diff_1d(2, 2, 1.0, d, a).bits_total;
            worst = std::max(worst, std::abs(r2 - r1));
            o.check(std::abs(r2 - r1) <= 1e-9, fmt("rate_2d(a,0)=rate_1d(a) at a=%g d=%g", a, d));
        }
    }
    const double s = seconds_since(t0);
    o.check(s < 1.0, "runtime < 1 s");
    o.note(fmt("max deviation=%.3g bits", worst) + fmt(" runtime=%.4f s", s));
    return o;
}

Outcome criterion4() {
    Outcome o;
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::rate_section;
    const CsvTable t = run_rate_section(cfg);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double a = t.number(r, "alpha");
        const double b2 = t.number(r, "bits_2d");
        const double b1 = t.number(r, "bits_1d");
        const double b0 = t.number(r, "bits_nondiff");
        o.check(b2 <= b1 && b1 <= b0, fmt("ordering at alpha=%g", a));
        if (a >= 0.05 - 1e-12) o.check(b2 < b1 && b1 < b0, fmt("strict ordering at alpha=%g", a));
    }
    const double s = seconds_since(t0);
    o.check(s < 1.0, "runtime < 1 s");
    const std::size_t last = t.rows.size() - 1;
    o.note(fmt("%.0f section points; at alpha=%.2f reduction 2d vs 1d = %.4f", static_cast<double>(t.rows.size()),
               t.number(last, "alpha"), t.number(last, "reduction_2d_vs_1d")) +
           fmt(" (bits_2d=%.3f bits_1d=%.3f)", t.number(last, "bits_2d"), t.number(last, "bits_1d")) +
           fmt(" runtime=%.4f s", s));
    return o;
}

bool trace_monotone(const Codebook& cb) {
    for (std::size_t k = 1; k < cb.trace.size(); ++k) {
        if (cb.trace[k] > cb.trace[k - 1]) return false;
    }
    return true;
}

Outcome criterion5(const std::vector<Codebook>& capacity_codebooks) {
    Outcome o;
    const auto t0 = Clock::now();
    VectorSet samples(1);
    samples.reserve(1000000);
    Rng rng(55);
    for (int i = 0; i < 1000000; ++i) {
        const cplx v{rng.normal(), 0.0};
        samples.push_back(std::span<const cplx>(&v, 1));
    }
    const Codebook cb = train_codebook(samples, 1, LloydOptions{500, 1e-10}, 5);
    const double s = seconds_since(t0);
    double lo = cb.codewords[0][0].real();
    double hi = cb.codewords[1][0].real();
    if (lo > hi) std::swap(lo, hi);
    o.check(std::abs(lo + 0.798) <= 0.01 && std::abs(hi - 0.798) <= 0.01, "codewords +-0.798 within 0.01");
    o.check(std::abs(cb.training_distortion - 0.3634) <= 0.01, "distortion 0.3634 within 0.01");
    o.check(trace_monotone(cb), "scalar trace monotone");
    int monotone = 0;
    for (const auto& c : capacity_codebooks) {
        if (trace_monotone(c)) ++monotone;
    }
    o.check(monotone == static_cast<int>(capacity_codebooks.size()), "capacity-run traces monotone");
    o.check(s < 30.0, "runtime < 30 s");
    o.note(fmt("codewords=(%.4f, %.4f)", lo, hi) + fmt(" distortion=%.5f iterations=%.0f", cb.training_distortion,
                                                        static_cast<double>(cb.iterations)) +
           fmt(" monotone traces=%.0f/%.0f", monotone + 1.0, capacity_codebooks.size() + 1.0) +
           fmt(" runtime=%.2f s", s));
    return o;
}

Outcome criterion6() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(66);
    double worst_power = 0.0;
    double worst_kkt = 0.0;
    int inactive_modes = 0;
    bool slack_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const ChannelMatrix h = random_channel(rng, 2, 2);
        const double a2 = std::pow(10.0, rng.uniform() * 3.0 - 1.0);
        const SvdTriple svd = svd_decompose(h);
        const PowerAllocation p = waterfill(svd.sigma, a2);
        double total = 0.0;
        for (std::size_t i = 0; i < p.z2.size(); ++i) {
            total += p.z2[i];
            const double g2a2 = svd.sigma[i] * svd.sigma[i] * a2;
            if (p.z2[i] > 0.0) {
                worst_kkt = std::max(worst_kkt, std::abs(p.z2[i] + 1.0 / g2a2 - p.mu));
            } else {
                ++inactive_modes;
                if (!(g2a2 < 1.0 / p.mu)) slack_ok = false;
            }
        }
        worst_power = std::max(worst_power, std::abs(total - 2.0));
    }
    o.check(worst_power <= 1e-10, "power conservation within 1e-10");
    o.check(worst_kkt <= 1e-10, "equal water level on active modes within 1e-10");
    o.check(slack_ok, "inactive modes below the cut-off");
    const PowerAllocation a = waterfill({1.0, 0.1}, 1.0);
    o.check(a.z2 == std::vector<double>{2.0, 0.0}, "sigma=(1,0.1) gives z2=(2,0)");
    const PowerAllocation b = waterfill({2.0, 1.0}, 1.0);
    o.check(b.z2 == std::vector<double>{1.375, 0.625}, "sigma=(2,1) gives z2=(1.375,0.625)");
    const double s = seconds_since(t0);
    o.check(s < 5.0, "runtime < 5 s");
    o.note(fmt("max |sum z2 - 2|=%.2g max KKT residual=%.2g", worst_power, worst_kkt) +
           fmt(" inactive modes=%.0f", inactive_modes) + fmt(" runtime=%.3f s", s));
    return o;
}

Outcome criterion7() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(77);
    const ChannelMatrix h = random_channel(rng, 2, 2);
    const double a2 = snr_db_to_a2(5.0);
    const double d = 0.025;
    const SvdTriple svd = svd_decompose(h);
    const PowerAllocation p = waterfill(svd.sigma, a2);
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(2, 2);
    for (int i = 0; i < 2; ++i) z(i, i) = std::sqrt(p.z2[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXcd vz = svd.v * z;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        const Eigen::MatrixXcd je = random_channel(rng, 2, 2) * std::sqrt(d) * vz;
        acc += je * je.adjoint();
    }
    acc /= static_cast<double>(draws);
    const double target = d * (p.z2[0] + p.z2[1]);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            worst = std::max(worst, std::abs(acc(i, j) - (i == j ? target : 0.0)) / target);
        }
    }
    o.check(worst <= 0.02, "entrywise within 2% of d*sum(z2)");
    o.check(std::abs(effective_noise(p, d) - 1.0 / a2 - target) <= 1e-15, "effective_noise = 1/A^2 + d*sum(z2)");
    const double s = seconds_since(t0);
    o.check(s < 10.0, "runtime < 10 s");
    o.note(fmt("d*sum(z2)=%.5f max relative deviation=%.4f", target, worst) + fmt(" runtime=%.2f s", s));
    return o;
}

Outcome criterion8(const ExperimentConfig& cfg, const CapacitySweep& sweep, double runtime) {
    Outcome o;
    const auto& bits = cfg.bits_list;
    const auto at = [&](int b, FeedbackScheme s) -> const CapacityEstimate& { return sweep.results.at({b, s}); };
    for (int b : bits) {
        const auto& l2 = at(b, FeedbackScheme::lloyd_2d);
        const auto& l1 = at(b, FeedbackScheme::lloyd_1d);
        const auto& t2 = at(b, FeedbackScheme::theory_2d);
        const auto& t1 = at(b, FeedbackScheme::theory_1d);
        o.check(l2.mean >= l1.mean, fmt("lloyd_2d >= lloyd_1d at b=%.0f", b));
        o.check(t2.mean >= l2.mean, fmt("theory_2d >= lloyd_2d at b=%.0f", b));
        o.check(t1.mean >= l1.mean, fmt("theory_1d >= lloyd_1d at b=%.0f", b));
    }

    const int b_max = bits.back();
    const auto& top = at(b_max, FeedbackScheme::lloyd_2d);
    std::vector<double> paired(top.per_trial.size());
    for (std::size_t t = 0; t < paired.size(); ++t) paired[t] = sweep.perfect.per_trial[t] - top.per_trial[t];
    const MeanSe gap = mean_se(paired);
    const double gap_mean = sweep.perfect.mean - top.mean;
    o.check(std::abs(gap_mean) <= 3.0 * top.std_err,
            fmt("lloyd_2d(b=%.0f)=%.4f within 3 SE of perfect=%.4f", b_max, top.mean, sweep.perfect.mean) +
                fmt(" (gap=%.4f, SE=%.4f, paired SE=%.4f)", gap_mean, top.std_err, gap.se));

    // second differences per trial: trials are shared across b, so the SE is paired
    for (auto s : {FeedbackScheme::lloyd_2d, FeedbackScheme::lloyd_1d, FeedbackScheme::theory_2d,
                   FeedbackScheme::theory_1d}) {
        for (std::size_t k = 0; k + 2 < bits.size(); ++k) {
            const auto& c0 = at(bits[k], s).per_trial;
            const auto& c1 = at(bits[k + 1], s).per_trial;
            const auto& c2 = at(bits[k + 2], s).per_trial;
            std::vector<double> dd(c0.size());
            for (std::size_t t = 0; t < dd.size(); ++t) dd[t] = (c2[t] - c1[t]) - (c1[t] - c0[t]);
            const MeanSe e = mean_se(dd);
            o.check(e.mean <= 2.0 * e.se, std::string(to_string(s)) +
                                              fmt(" first difference grows at b=%.0f: %.4f > 2 SE=%.4f",
                                                  bits[k + 1], e.mean, 2.0 * e.se));
        }
    }
    o.check(runtime < 600.0, "runtime < 10 min");

    std::string curve = "perfect=" + fmt("%.4f", sweep.perfect.mean) + " lloyd_2d/lloyd_1d/theory_2d/theory_1d:";
    for (int b : bits) {
        curve += fmt(" b=%.0f:", b) +
                 fmt("%.3f/%.3f", at(b, FeedbackScheme::lloyd_2d).mean, at(b, FeedbackScheme::lloyd_1d).mean) +
                 fmt("/%.3f/%.3f", at(b, FeedbackScheme::theory_2d).mean, at(b, FeedbackScheme::theory_1d).mean);
    }
    o.note(curve);
    o.note(fmt("trials=%.0f runtime=%.1f s", cfg.trials, runtime));
    return o;
}

Outcome criterion9() {
    Outcome o;
    const auto t0 = Clock::now();
    const int side = 32;
    const int fields = 300;
    for (double a : {0.9, 0.75}) {
        const CorrelationParams params(a, a, 1.0);
        struct Lag {
            int dm, dn;
            double target;
        };
        const Lag lags[] = {{0, 0, 1.0}, {1, 0, a}, {0, 1, a}, {1, 1, a * a}};
        std::vector<std::vector<double>> est(4);
        for (int f = 0; f < fields; ++f) {
            const auto field = gen_field(params, side, side, 2, 2,
                                         Rng(99, {static_cast<std::uint64_t>(a * 100), static_cast<std::uint64_t>(f)}).id());
            for (std::size_t l = 0; l < 4; ++l) est[l].push_back(empirical_corr(field, lags[l].dm, lags[l].dn));
        }
        std::string row = fmt("alpha=%.2f:", a);
        for (std::size_t l = 0; l < 4; ++l) {
            const MeanSe e = mean_se(est[l]);
            const double z = (e.mean - lags[l].target) / e.se;
            o.check(std::abs(z) <= 3.0, fmt("lag(%.0f,%.0f)", lags[l].dm, lags[l].dn) + row);
            row += fmt(" lag(%.0f,%.0f)", lags[l].dm, lags[l].dn) + fmt("=%.4f (target %.4f, z=%.2f)", e.mean,
                                                                         lags[l].target, z);
        }
        o.note(row);
    }
    const double s = seconds_since(t0);
    o.check(s < 60.0, "runtime < 1 min");
    o.note(fmt("runtime=%.2f s", s));
    return o;
}

Outcome criterion10(const ExperimentConfig& capacity_cfg, const CapacitySweep& sweep) {
    Outcome o;
    const auto t0 = Clock::now();
    for (auto kind : {ExperimentKind::mse_surface, ExperimentKind::rate_surface, ExperimentKind::rate_section}) {
        ExperimentConfig cfg;
        cfg.experiment = kind;
        const std::string first = experiment_csv(cfg);
        const std::string second = experiment_csv(cfg);
        o.check(first == second, std::string(to_string(kind)) + " byte-identical");
        o.check(!first.empty(), std::string(to_string(kind)) + " non-empty");
    }
    const std::string first = to_csv(capacity_table(capacity_cfg, sweep), capacity_cfg.echo());
    const std::string second = experiment_csv(capacity_cfg);
    o.check(first == second, "capacity byte-identical");
    o.note(fmt("4 experiments at default config, each run twice; runtime=%.1f s", seconds_since(t0)));
    return o;
}

}  // namespace

int main() {
    ExperimentConfig capacity_cfg;
    capacity_cfg.experiment = ExperimentKind::capacity;
    const auto t0 = Clock::now();
    const CapacitySweep sweep = run_capacity_sweep(capacity_cfg);
    const double capacity_runtime = seconds_since(t0);

    const std::vector<std::function<Outcome()>> criteria{
        criterion1,
        criterion2,
        criterion3,
        criterion4,
        [&] { return criterion5(sweep.codebooks); },
        criterion6,
        criterion7,
        [&] { return criterion8(capacity_cfg, sweep, capacity_runtime); },
        criterion9,
        [&] { return criterion10(capacity_cfg, sweep); },
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Outcome o = criteria[i]();
        if (!o.pass) ++failed;
        std::printf("criterion %zu: %s | %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
