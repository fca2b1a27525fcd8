#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "dsel/channel.hpp"
#include "dsel/predictor.hpp"
#include "dsel/quantizer.hpp"

namespace dsel {

/// How the transmitter obtains its channel estimate.
///
/// theory_*: rate-distortion test channel at the distortion the rate formula
///           assigns to the bit budget.
/// lloyd_*:  closed differential feedback loop with trained codebooks.
/// perfect_csi: true channel, no quantization error.
enum class FeedbackScheme { theory_2d, theory_1d, lloyd_2d, lloyd_1d, perfect_csi };

std::string_view to_string(FeedbackScheme scheme);
/// Throws DomainError for an unknown name.
FeedbackScheme parse_feedback_scheme(std::string_view name);

/// Supplies the channel realization of each Monte Carlo trial.
class ChannelSource {
  public:
    virtual ~ChannelSource() = default;
    [[nodiscard]] virtual ChannelField field(std::uint64_t trial) const = 0;
};

/// Trial t gets gen_field(...) seeded from its own substream of `seed`.
class SeededChannelSource final : public ChannelSource {
  public:
    SeededChannelSource(CorrelationParams params, int m, int n, int n_r, int n_t, std::uint64_t seed)
        : params_(params), m_(m), n_(n), n_r_(n_r), n_t_(n_t), seed_(seed) {}

    [[nodiscard]] ChannelField field(std::uint64_t trial) const override;

  private:
    CorrelationParams params_;
    int m_, n_, n_r_, n_t_;
    std::uint64_t seed_;
};

struct LinkSetup {
    CorrelationParams params{0.9, 0.9, 1.0};
    int n_r = 2;
    int n_t = 2;
    double a2_amp = 1.0;  ///< signal power A^2 at unit noise variance
    int trials = 2000;
    int field_m = 8;
    int field_n = 8;
    std::uint64_t seed = 1;
    LloydOptions lloyd{};
    std::size_t training_size = 100000;  ///< differential vectors per codebook
    int lloyd_passes = 2;  ///< 1 = open-loop training only; more = closed-loop refinement
    int workers = 1;
};

struct CapacityEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    double d_per_entry = 0.0;  ///< CSI error variance the capacity was evaluated with
    std::vector<double> per_trial;
};

/// Closed-loop evaluation of one feedback link.
///
/// The first symbol interval and first subchannel of every field have no
/// two-dimensional history; they are fed back by quantizing the full matrix.
/// Statistics cover only the interior points (m >= 1, n >= 1). Both link ends
/// predict from reconstructed history, so they stay synchronized.
///
/// Codebooks are trained lazily per (kind, bits) and cached.
class FeedbackSimulator {
  public:
    explicit FeedbackSimulator(LinkSetup setup);

    [[nodiscard]] const LinkSetup& setup() const noexcept { return setup_; }

    CapacityEstimate run(FeedbackScheme scheme, int bits, const ChannelSource& source,
                         std::optional<double> d_theory = std::nullopt);
    CapacityEstimate run(FeedbackScheme scheme, int bits, std::optional<double> d_theory = std::nullopt);

    /// Codebook for full channel matrices (bootstrap points).
    const Codebook& full_codebook(int bits);
    /// Codebook for the differential of a lloyd_* scheme.
    const Codebook& differential_codebook(FeedbackScheme scheme, int bits);

    [[nodiscard]] PredictorCoeffs coeffs(FeedbackScheme scheme) const;

    /// Runs the feedback loop over `field`; returns the transmitter's
    /// reconstruction (row-major M x N). When `differentials` is given, the
    /// fed-back differentials of the interior points are appended to it.
    std::vector<ChannelMatrix> reconstruct_field(const ChannelField& field, FeedbackScheme scheme, int bits,
                                                 VectorSet* differentials = nullptr);

    /// Fields used for codebook training (independent of every trial field).
    [[nodiscard]] ChannelField training_field(std::uint64_t index) const;

  private:
    std::vector<ChannelMatrix> loop(const ChannelField& field, const PredictorCoeffs& c, const Codebook& full,
                                    const Codebook& diff, VectorSet* differentials) const;
    std::size_t training_field_count() const;

    LinkSetup setup_;
    std::map<int, Codebook> full_;
    std::map<std::pair<int, int>, Codebook> diff_;
};

/// Ergodic capacity of `scheme` at a total budget of `bits` per fed-back
/// matrix, averaged over setup.trials channel fields. `d_theory` overrides the
/// distortion the theory_* schemes derive from the rate formulas.
CapacityEstimate capacity_ergodic(FeedbackScheme scheme, const LinkSetup& setup, int bits,
                                  std::optional<double> d_theory = std::nullopt);

}  // namespace dsel
