#ifndef ZPD_NNET_H_
#define ZPD_NNET_H_

// Small fully connected Q-network: ReLU hidden layers, identity output,
// analytic backprop and Adam. Everything is 64-bit and single-threaded so
// that two runs with the same seed produce bitwise-identical parameters.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "zpd/common.h"

namespace zpd::nnet {

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// One affine layer y = x W + b. `weights` is fan_in x fan_out, row-major.
struct LayerTensors {
  std::vector<double> weights;
  std::vector<double> biases;

  bool operator==(const LayerTensors&) const = default;
};

struct MlpParams {
  std::vector<int> layer_sizes;  // [obs_dim, hidden..., action_count]
  std::vector<LayerTensors> layers;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;

  bool operator==(const MlpParams&) const = default;
};

// Partial derivatives shaped like MlpParams::layers.
struct GradientSet {
  std::vector<LayerTensors> layers;
};

struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  GradientSet first_moment;
  GradientSet second_moment;
};

// Glorot-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
MlpParams InitMlp(const std::vector<int>& layer_sizes, Rng& rng);
MlpParams ZeroMlp(const std::vector<int>& layer_sizes);
GradientSet ZeroGradients(const MlpParams& like);
AdamState InitAdam(const MlpParams& like, double learning_rate);

// Sum of squares of every weight and bias.
double SquaredNorm(const MlpParams& params);
bool AllFinite(const MlpParams& params);

// Q(s, .) for one observation. Throws ContractViolation on a width mismatch.
std::vector<double> Forward(const MlpParams& params,
                            std::span<const double> observation);

// Row-wise Forward for a batch of observations.
Matrix ForwardBatch(const MlpParams& params, const Matrix& inputs);

// Per-sample loss as a function of that sample's network output. Returns
// the loss and writes d(loss)/d(output) into `grad_out` (pre-zeroed).
using OutputLoss = std::function<double(std::size_t sample,
                                        std::span<const double> outputs,
                                        std::span<double> grad_out)>;

struct LossGradient {
  double loss = 0.0;
  GradientSet gradients;
};

// Loss = mean_i OutputLoss(i) + l2_weight * SquaredNorm(params), with exact
// gradients of that scalar. A non-finite term throws NonFiniteError naming
// the sample (or the L2 term).
LossGradient Backward(const MlpParams& params, const Matrix& inputs,
                      const OutputLoss& loss, double l2_weight);

// One bias-corrected Adam step. Throws NonFiniteError if any parameter
// becomes NaN/Inf.
void AdamApply(MlpParams& params, AdamState& state, const GradientSet& grads);

// Deep copy used to refresh a target network.
inline MlpParams SyncTarget(const MlpParams& online) { return online; }

// Parameter file: version byte, u32 layer count, u32 layer sizes, then
// f64 values layer-major (W1 row-major, b1, W2, b2, ...), little-endian.
inline constexpr std::uint8_t kParamsFormatVersion = 1;

std::vector<std::uint8_t> EncodeParams(const MlpParams& params);
MlpParams DecodeParams(std::vector<std::uint8_t> bytes);
void SaveParams(const MlpParams& params, const std::filesystem::path& path);
MlpParams LoadParams(const std::filesystem::path& path);

}  // namespace zpd::nnet

#endif  // ZPD_NNET_H_
