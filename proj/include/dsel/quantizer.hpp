#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dsel/channel.hpp"

namespace dsel {

using cplx = std::complex<double>;

/// Contiguous set of equal-length complex vectors (one per row).
class VectorSet {
  public:
    explicit VectorSet(std::size_t length = 0) : length_(length) {}

    [[nodiscard]] std::size_t length() const noexcept { return length_; }
    [[nodiscard]] std::size_t size() const noexcept { return length_ == 0 ? 0 : data_.size() / length_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    void reserve(std::size_t count) { data_.reserve(count * length_); }
    void push_back(std::span<const cplx> v);
    /// Appends the matrix vectorized row-major.
    void push_back(const ChannelMatrix& h);

    [[nodiscard]] std::span<const cplx> operator[](std::size_t i) const {
        return {data_.data() + i * length_, length_};
    }
    [[nodiscard]] std::span<cplx> at_mut(std::size_t i) { return {data_.data() + i * length_, length_}; }
    [[nodiscard]] std::span<const cplx> flat() const noexcept { return data_; }

  private:
    std::size_t length_;
    std::vector<cplx> data_;
};

/// Row-major vectorization of an N_r x N_t matrix.
std::vector<cplx> to_vector(const ChannelMatrix& h);
ChannelMatrix to_matrix(std::span<const cplx> v, Eigen::Index n_r, Eigen::Index n_t);

struct LloydOptions {
    int max_iter = 200;
    double rel_tol = 1e-6;
};

/// Vector quantizer codebook trained by the generalized Lloyd algorithm.
struct Codebook {
    int bits = 0;
    VectorSet codewords;
    double training_distortion = 0.0;  ///< mean squared error per vector, final partition
    std::size_t training_size = 0;
    int iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> trace;  ///< distortion of every partition, in order

    [[nodiscard]] std::size_t size() const noexcept { return codewords.size(); }
    [[nodiscard]] std::size_t length() const noexcept { return codewords.length(); }
};

/// Trains a 2^bits-word codebook on `samples`.
///
/// Codewords start at 2^bits distinct sample positions drawn from `seed`.
/// Each iteration partitions the samples by nearest codeword, records the
/// partition distortion, repairs empty cells by splitting the most populated
/// cell, and moves every codeword to its cell centroid. Stops when the
/// relative improvement drops below `rel_tol` or after `max_iter` partitions.
Codebook train_codebook(const VectorSet& samples, int bits, const LloydOptions& options,
                        std::uint64_t seed);

/// Same, starting from the codewords of `initial` instead of random samples.
Codebook train_codebook(const VectorSet& samples, const Codebook& initial,
                        const LloydOptions& options, std::uint64_t seed);

struct Quantized {
    std::size_t index;
    std::span<const cplx> codeword;
    double distance;  ///< squared Euclidean distance to the codeword
};

/// Nearest codeword by squared Euclidean distance; ties go to the lower index.
Quantized quantize(const Codebook& cb, std::span<const cplx> v);
ChannelMatrix quantize(const Codebook& cb, const ChannelMatrix& h);

/// Mean squared Euclidean quantization error per vector over `samples`.
double distortion(const Codebook& cb, const VectorSet& samples);

/// Realized quantization error E = h_true - h_quantized.
ChannelMatrix additive_error(const ChannelMatrix& h_true, const ChannelMatrix& h_quantized);

/// Text format:
///   dsel-codebook 1
///   bits <b>
///   length <L>
///   seed <s>
///   training_size <n>
///   iterations <k>
///   training_distortion <x>
///   then 2^b lines of 2L numbers: re_0 im_0 re_1 im_1 ...
/// Numbers are written with 17 significant digits so load() is bit-exact.
void save_codebook(const Codebook& cb, std::ostream& out);
Codebook load_codebook(std::istream& in);

}  // namespace dsel
