#include "dsel/predictor.hpp"

#include "dsel/error.hpp"

namespace dsel {

namespace {

void check_alpha(double a, const char* name) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

void check_same_shape(const ChannelMatrix& a, const ChannelMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": matrix dimensions differ");
    }
}

}  // namespace

PredictorCoeffs predictor_coeffs(double alpha_t, double alpha_f, double sigma2_h) {
    check_alpha(alpha_t, "alpha_t");
    check_alpha(alpha_f, "alpha_f");
    if (!(sigma2_h > 0.0)) throw DomainError("sigma2_h must be positive");
    const double rho = alpha_t * alpha_f;
    const double det = 1.0 - rho * rho;
    if (det <= 0.0) {
        throw SingularSystemError("predictor_coeffs: alpha_t = alpha_f = 1 makes the normal equations singular");
    }
    const double a1 = alpha_t * (1.0 - alpha_f * alpha_f) / det;
    const double a2 = alpha_f * (1.0 - alpha_t * alpha_t) / det;
    double mse = sigma2_h * (1.0 - a1 * a1 - a2 * a2 - 2.0 * a1 * a2 * rho);
    if (mse < 0.0) mse = 0.0;  // rounding at alpha -> 1
    return {a1, a2, mse};
}

PredictorCoeffs predictor_coeffs_1d(double alpha_t, double sigma2_h) {
    check_alpha(alpha_t, "alpha_t");
    if (!(sigma2_h > 0.0)) throw DomainError("sigma2_h must be positive");
    return {alpha_t, 0.0, sigma2_h * (1.0 - alpha_t * alpha_t)};
}

ChannelMatrix predict(const ChannelMatrix& h_time_prev, const ChannelMatrix& h_freq_prev,
                      const PredictorCoeffs& coeffs) {
    check_same_shape(h_time_prev, h_freq_prev, "predict");
    return coeffs.a1 * h_time_prev + coeffs.a2 * h_freq_prev;
}

ChannelMatrix differential(const ChannelMatrix& h_current, const ChannelMatrix& h_time_prev,
                           const ChannelMatrix& h_freq_prev, const PredictorCoeffs& coeffs) {
    check_same_shape(h_current, h_time_prev, "differential");
    check_same_shape(h_current, h_freq_prev, "differential");
    return h_current - coeffs.a1 * h_time_prev - coeffs.a2 * h_freq_prev;
}

ChannelMatrix reconstruct(const ChannelMatrix& h_time_prev, const ChannelMatrix& h_freq_prev,
                          const ChannelMatrix& h_d_quantized, const PredictorCoeffs& coeffs) {
    check_same_shape(h_time_prev, h_d_quantized, "reconstruct");
    return predict(h_time_prev, h_freq_prev, coeffs) + h_d_quantized;
}

}  // namespace dsel
