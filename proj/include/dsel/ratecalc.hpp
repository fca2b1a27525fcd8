#pragma once

#include <string_view>

namespace dsel {

// Rate-distortion calculators for CSI feedback. All rates are in bits
// (log base 2) per fed-back N_r x N_t channel matrix.
//
// Derivation notes for the two-dimensional rate. Writing the fed-back history
// as H = Hq + E with E the quantization error (per-entry variance d), the
// current entry becomes
//
//   H_{m,n} = a1 Hq_{m-1,n} + a2 Hq_{m,n-1} + (a1 E_{m-1,n} + a2 E_{m,n-1} + H_d).
//
// Conditioning on the fed-back history leaves the bracketed term, whose
// variance is a1^2 d + a2^2 d + Var(H_d) + 2 a1 a2 r(E_{m-1,n}, E_{m,n-1}).
// Splitting E = ((s2 - s2q)/s2) H + psi with psi independent of H and
// s2 - s2q = d gives r(E_{m-1,n}, E_{m,n-1}) = d^2 at af / s2 (see
// quant_error_corr). Bounding the conditional entropy of E_{m,n} by its
// unconditional entropy and dividing by d yields
//
//   R = N_r N_t log2(a1^2 + a2^2 + 2 a1 a2 at af d / s2 + Var(H_d) / d).

enum class FeedbackRateScheme { non_differential, diff_1d_time, diff_1d_freq, diff_2d };

std::string_view to_string(FeedbackRateScheme scheme);

struct RateReport {
    double bits_total = 0.0;      ///< bits per fed-back channel matrix
    double bits_per_entry = 0.0;  ///< bits_total / (N_r N_t)
    FeedbackRateScheme scheme = FeedbackRateScheme::non_differential;
    double d = 0.0;               ///< per-entry distortion
    bool clamped = false;         ///< log argument fell below 1; rate reported as 0
    double alpha_t = 0.0;
    double alpha_f = 0.0;
    double sigma2_h = 1.0;
    int n_r = 1;
    int n_t = 1;

    /// Same rate in nats.
    [[nodiscard]] double nats_total() const;
};

/// 0.5 log2(2 pi e sigma2), the differential entropy of a real Gaussian.
double gaussian_entropy_bits(double sigma2);

/// N_r N_t log2(sigma2_h / d). Requires 0 < d <= sigma2_h.
RateReport rate_nondiff(int n_r, int n_t, double sigma2_h, double d);

/// Minimal rate of the two-dimensional differential scheme.
RateReport rate_diff_2d(int n_r, int n_t, double sigma2_h, double d, double alpha_t, double alpha_f);

/// One-dimensional differential rate N_r N_t log2(alpha^2 + sigma2_h (1 - alpha^2) / d).
/// `scheme` labels the direction the correlation comes from.
RateReport rate_diff_1d(int n_r, int n_t, double sigma2_h, double d, double alpha,
                        FeedbackRateScheme scheme = FeedbackRateScheme::diff_1d_time);

/// Cross-correlation d^2 at af / sigma2_h of the quantization errors at the
/// time and frequency neighbours.
double quant_error_corr(double d, double sigma2_h, double alpha_t, double alpha_f);

/// Per-entry distortion d at which the given scheme needs exactly `bits_total`
/// bits (the inverse of rate_diff_2d / rate_diff_1d / rate_nondiff in d).
///
/// Solved by bisection on the branch where the rate decreases in d. Requires
/// bits_total > 0.
double distortion_for_rate(FeedbackRateScheme scheme, int n_r, int n_t, double sigma2_h,
                           double alpha_t, double alpha_f, double bits_total);

}  // namespace dsel
