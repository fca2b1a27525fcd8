#pragma once

#include <optional>

namespace dsel {

/// Physical description of the channel from which the lag-1 correlations derive.
struct PhysicalParams {
    double doppler_hz;        ///< f_d
    double symbol_period_s;   ///< t_s
    double subchannel_hz;     ///< f_s
    double delay_spread_s;    ///< RMS delay spread
};

/// Second-order statistics of the doubly-selective channel.
///
/// Correlation between grid points separated by (dm, dn) symbol intervals
/// and subchannels is sigma2_h * alpha_t^|dm| * alpha_f^|dn|.
class CorrelationParams {
  public:
    /// Throws DomainError unless 0 <= alpha_t, alpha_f <= 1 and sigma2_h > 0.
    CorrelationParams(double alpha_t, double alpha_f, double sigma2_h = 1.0);

    /// Builds the coefficients from Doppler / symbol period and subchannel
    /// spacing / delay spread. Rejects a negative Bessel value rather than
    /// clamping it.
    static CorrelationParams from_physical(const PhysicalParams& phys, double sigma2_h = 1.0);

    [[nodiscard]] double alpha_t() const noexcept { return alpha_t_; }
    [[nodiscard]] double alpha_f() const noexcept { return alpha_f_; }
    [[nodiscard]] double sigma2_h() const noexcept { return sigma2_h_; }
    [[nodiscard]] const std::optional<PhysicalParams>& physical() const noexcept { return physical_; }

  private:
    double alpha_t_;
    double alpha_f_;
    double sigma2_h_;
    std::optional<PhysicalParams> physical_;
};

/// Bessel function of the first kind, order zero.
///
/// Power series for |x| <= 12, Hankel asymptotic expansion beyond. Absolute
/// error stays below 1e-10 on |x| <= 50. Throws DomainError on non-finite x.
double bessel_j0(double x);

/// Lag-1 temporal correlation J0(2 pi f_d t_s) of a Jakes-spectrum channel.
double temporal_corr(double doppler_hz, double symbol_period_s);

/// Lag-1 spectral correlation 1 / sqrt(1 + (2 pi f_s delay_spread)^2).
double spectral_corr(double subchannel_hz, double delay_spread_s);

/// sigma2_h * alpha_t^|dm| * alpha_f^|dn|.
double separable_corr(const CorrelationParams& params, int dm, int dn);

}  // namespace dsel
