#include "dsel/ratecalc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dsel/error.hpp"
#include "dsel/predictor.hpp"

namespace dsel {

namespace {

void check_common(int n_r, int n_t, double sigma2_h, double d) {
    if (n_r < 1 || n_t < 1) throw DomainError("antenna counts must be >= 1");
    if (!(sigma2_h > 0.0)) throw DomainError("sigma2_h must be positive");
    if (!(d > 0.0)) throw DomainError("distortion d must be positive");
    if (d > sigma2_h) {
        throw DomainError("distortion d = " + std::to_string(d) +
                          " exceeds the source power sigma2_h = " + std::to_string(sigma2_h));
    }
}

RateReport make_report(FeedbackRateScheme scheme, int n_r, int n_t, double sigma2_h, double d,
                       double at, double af, double log_arg) {
    RateReport r;
    r.scheme = scheme;
    r.n_r = n_r;
    r.n_t = n_t;
    r.sigma2_h = sigma2_h;
    r.d = d;
    r.alpha_t = at;
    r.alpha_f = af;
    if (log_arg < 1.0) {
        r.clamped = true;
        r.bits_per_entry = 0.0;
    } else {
        r.bits_per_entry = std::log2(log_arg);
    }
    r.bits_total = static_cast<double>(n_r * n_t) * r.bits_per_entry;
    return r;
}

double log_arg_2d(const PredictorCoeffs& c, double sigma2_h, double d, double at, double af) {
    return c.a1 * c.a1 + c.a2 * c.a2 + 2.0 * c.a1 * c.a2 * at * af * d / sigma2_h + c.mse / d;
}

}  // namespace

std::string_view to_string(FeedbackRateScheme scheme) {
    switch (scheme) {
        case FeedbackRateScheme::non_differential: return "non_differential";
        case FeedbackRateScheme::diff_1d_time: return "diff_1d_time";
        case FeedbackRateScheme::diff_1d_freq: return "diff_1d_freq";
        case FeedbackRateScheme::diff_2d: return "diff_2d";
    }
    return "unknown";
}

double RateReport::nats_total() const { return bits_total * std::numbers::ln2; }

double gaussian_entropy_bits(double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("gaussian_entropy_bits: variance must be positive");
    return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * sigma2);
}

RateReport rate_nondiff(int n_r, int n_t, double sigma2_h, double d) {
    check_common(n_r, n_t, sigma2_h, d);
    return make_report(FeedbackRateScheme::non_differential, n_r, n_t, sigma2_h, d, 0.0, 0.0,
                       sigma2_h / d);
}

RateReport rate_diff_2d(int n_r, int n_t, double sigma2_h, double d, double alpha_t, double alpha_f) {
    check_common(n_r, n_t, sigma2_h, d);
    const PredictorCoeffs c = predictor_coeffs(alpha_t, alpha_f, sigma2_h);
    return make_report(FeedbackRateScheme::diff_2d, n_r, n_t, sigma2_h, d, alpha_t, alpha_f,
                       log_arg_2d(c, sigma2_h, d, alpha_t, alpha_f));
}

RateReport rate_diff_1d(int n_r, int n_t, double sigma2_h, double d, double alpha,
                        FeedbackRateScheme scheme) {
    check_common(n_r, n_t, sigma2_h, d);
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw DomainError("rate_diff_1d: alpha must lie in [0, 1); alpha = 1 leaves nothing to feed back");
    }
    if (scheme != FeedbackRateScheme::diff_1d_time && scheme != FeedbackRateScheme::diff_1d_freq) {
        throw DomainError("rate_diff_1d: scheme must be diff_1d_time or diff_1d_freq");
    }
    const double arg = alpha * alpha + sigma2_h * (1.0 - alpha * alpha) / d;
    const bool time = scheme == FeedbackRateScheme::diff_1d_time;
    return make_report(scheme, n_r, n_t, sigma2_h, d, time ? alpha : 0.0, time ? 0.0 : alpha, arg);
}

double quant_error_corr(double d, double sigma2_h, double alpha_t, double alpha_f) {
    if (!(d > 0.0)) throw DomainError("quant_error_corr: d must be positive");
    if (!(sigma2_h > 0.0)) throw DomainError("quant_error_corr: sigma2_h must be positive");
    if (!(alpha_t >= 0.0 && alpha_t <= 1.0 && alpha_f >= 0.0 && alpha_f <= 1.0)) {
        throw DomainError("quant_error_corr: correlations must lie in [0, 1]");
    }
    return d * d * alpha_t * alpha_f / sigma2_h;
}

double distortion_for_rate(FeedbackRateScheme scheme, int n_r, int n_t, double sigma2_h,
                           double alpha_t, double alpha_f, double bits_total) {
    if (n_r < 1 || n_t < 1) throw DomainError("antenna counts must be >= 1");
    if (!(sigma2_h > 0.0)) throw DomainError("sigma2_h must be positive");
    if (!(bits_total > 0.0)) throw DomainError("distortion_for_rate: bit budget must be positive");
    const double target = std::exp2(bits_total / static_cast<double>(n_r * n_t));

    switch (scheme) {
        case FeedbackRateScheme::non_differential:
            return sigma2_h / target;
        case FeedbackRateScheme::diff_1d_time:
        case FeedbackRateScheme::diff_1d_freq: {
            const double a = scheme == FeedbackRateScheme::diff_1d_time ? alpha_t : alpha_f;
            if (!(a >= 0.0 && a < 1.0)) throw DomainError("distortion_for_rate: alpha must lie in [0, 1)");
            return sigma2_h * (1.0 - a * a) / (target - a * a);
        }
        case FeedbackRateScheme::diff_2d:
            break;
    }

    const PredictorCoeffs c = predictor_coeffs(alpha_t, alpha_f, sigma2_h);
    if (c.mse <= 0.0) return 0.0;  // perfectly predictable channel
    // The log argument falls as V/d until d = sqrt(V / slope) and rises after;
    // it equals 1 at d = sigma2_h, so the decreasing branch covers every
    // positive rate.
    const double slope = 2.0 * c.a1 * c.a2 * alpha_t * alpha_f / sigma2_h;
    double hi = sigma2_h;
    if (slope > 0.0) hi = std::min(hi, std::sqrt(c.mse / slope));
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (log_arg_2d(c, sigma2_h, mid, alpha_t, alpha_f) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace dsel
