#pragma once

#include "dsel/channel.hpp"

namespace dsel {

/// Two-tap MMSE predictor H^_{m,n} = a1 H_{m-1,n} + a2 H_{m,n-1}.
struct PredictorCoeffs {
    double a1;   ///< weight on the previous symbol interval (time direction)
    double a2;   ///< weight on the previous subchannel (frequency direction)
    double mse;  ///< per-entry prediction-error variance Var(H_d)
};

/// Solves the orthogonality conditions
///
///   [ 1          at*af ] [a1]   [at]
///   [ at*af      1     ] [a2] = [af]
///
/// giving a1 = at(1 - af^2)/(1 - at^2 af^2), a2 = af(1 - at^2)/(1 - at^2 af^2)
/// and mse = sigma2_h (1 - a1^2 - a2^2 - 2 a1 a2 at af).
///
/// Throws SingularSystemError when at = af = 1.
PredictorCoeffs predictor_coeffs(double alpha_t, double alpha_f, double sigma2_h);

/// Time-only predictor used by the one-dimensional baseline: a1 = at, a2 = 0,
/// mse = sigma2_h (1 - at^2).
PredictorCoeffs predictor_coeffs_1d(double alpha_t, double sigma2_h);

ChannelMatrix predict(const ChannelMatrix& h_time_prev, const ChannelMatrix& h_freq_prev,
                      const PredictorCoeffs& coeffs);

/// Prediction error h_current - a1 h_time_prev - a2 h_freq_prev.
ChannelMatrix differential(const ChannelMatrix& h_current, const ChannelMatrix& h_time_prev,
                           const ChannelMatrix& h_freq_prev, const PredictorCoeffs& coeffs);

/// Inverse of `differential`: prediction plus the fed-back differential.
ChannelMatrix reconstruct(const ChannelMatrix& h_time_prev, const ChannelMatrix& h_freq_prev,
                          const ChannelMatrix& h_d_quantized, const PredictorCoeffs& coeffs);

}  // namespace dsel
