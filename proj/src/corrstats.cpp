#include "dsel/corrstats.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "dsel/error.hpp"

namespace dsel {

namespace {

void check_unit_interval(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

double j0_series(double x) {
    // sum_k (-1)^k (x/2)^{2k} / (k!)^2
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && std::abs(term) < 1e-17) break;
    }
    return sum;
}

double j0_asymptotic(double x) {
    // Hankel expansion: J0(x) ~ sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)), chi = x - pi/4.
    // t_k = prod_{j<=k} (-(2j-1)^2) / (k! (8x)^k); P takes even k, Q odd k.
    double p = 1.0;
    double q = 0.0;
    double t = 1.0;
    double prev_mag = 1.0;
    for (int k = 1; k < 100; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = t * (-(odd * odd)) / (static_cast<double>(k) * 8.0 * x);
        const double mag = std::abs(next);
        if (mag > prev_mag) break;  // asymptotic series started diverging
        t = next;
        prev_mag = mag;
        // P = sum_i (-1)^i t_{2i}, Q = sum_i (-1)^i t_{2i+1}
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            p += sign * t;
        } else {
            q += sign * t;
        }
        if (mag < 1e-17) break;
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

CorrelationParams::CorrelationParams(double alpha_t, double alpha_f, double sigma2_h)
    : alpha_t_(alpha_t), alpha_f_(alpha_f), sigma2_h_(sigma2_h) {
    check_unit_interval(alpha_t, "alpha_t");
    check_unit_interval(alpha_f, "alpha_f");
    if (!(sigma2_h > 0.0) || !std::isfinite(sigma2_h)) {
        throw DomainError("sigma2_h must be positive and finite");
    }
}

CorrelationParams CorrelationParams::from_physical(const PhysicalParams& phys, double sigma2_h) {
    CorrelationParams p(temporal_corr(phys.doppler_hz, phys.symbol_period_s),
                        spectral_corr(phys.subchannel_hz, phys.delay_spread_s), sigma2_h);
    p.physical_ = phys;
    return p;
}

double bessel_j0(double x) {
    if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
    const double ax = std::abs(x);
    return ax <= 12.0 ? j0_series(ax) : j0_asymptotic(ax);
}

double temporal_corr(double doppler_hz, double symbol_period_s) {
    if (!(doppler_hz >= 0.0)) throw DomainError("temporal_corr: Doppler frequency must be >= 0");
    if (!(symbol_period_s > 0.0)) throw DomainError("temporal_corr: symbol period must be > 0");
    return bessel_j0(2.0 * std::numbers::pi * doppler_hz * symbol_period_s);
}

double spectral_corr(double subchannel_hz, double delay_spread_s) {
    if (!(subchannel_hz >= 0.0)) throw DomainError("spectral_corr: subchannel spacing must be >= 0");
    if (!(delay_spread_s >= 0.0)) throw DomainError("spectral_corr: delay spread must be >= 0");
    const double x = 2.0 * std::numbers::pi * subchannel_hz * delay_spread_s;
    return 1.0 / std::sqrt(1.0 + x * x);
}

double separable_corr(const CorrelationParams& params, int dm, int dn) {
    return params.sigma2_h() * std::pow(params.alpha_t(), std::abs(dm)) *
           std::pow(params.alpha_f(), std::abs(dn));
}

}  // namespace dsel
