#include "zpd/nnet.h"

#include <cmath>
#include <string>

#include "zpd/binary_io.h"

namespace zpd::nnet {
namespace {

void CheckSizes(const std::vector<int>& sizes) {
  Require(sizes.size() >= 2, "MLP needs at least input and output sizes");
  for (int s : sizes) Require(s > 0, "MLP layer sizes must be positive");
}

std::vector<LayerTensors> ZeroLayers(const std::vector<int>& sizes) {
  std::vector<LayerTensors> layers(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    layers[l].weights.assign(static_cast<std::size_t>(sizes[l]) * sizes[l + 1], 0.0);
    layers[l].biases.assign(sizes[l + 1], 0.0);
  }
  return layers;
}

// out = x W + b for a single row; zero inputs are skipped (one-hot
// observations make the first layer almost free).
void AffineRow(const LayerTensors& layer, std::span<const double> x,
               std::span<double> out) {
  const std::size_t fan_out = out.size();
  for (std::size_t o = 0; o < fan_out; ++o) out[o] = layer.biases[o];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* w = layer.weights.data() + i * fan_out;
    for (std::size_t o = 0; o < fan_out; ++o) out[o] += xi * w[o];
  }
}

void ReluInPlace(std::span<double> v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Activations of every layer for a batch; acts[0] is the input.
std::vector<Matrix> ForwardAll(const MlpParams& params, const Matrix& inputs) {
  Require(inputs.cols == static_cast<std::size_t>(params.input_size()),
          "forward: observation width " + std::to_string(inputs.cols) +
              " != network input " + std::to_string(params.input_size()));
  const std::size_t n_layers = params.layers.size();
  std::vector<Matrix> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Matrix next(inputs.rows, params.layer_sizes[l + 1]);
    for (std::size_t r = 0; r < inputs.rows; ++r) {
      AffineRow(params.layers[l], acts[l].row(r), next.row(r));
      if (l + 1 < n_layers) ReluInPlace(next.row(r));
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.biases.size();
  return n;
}

MlpParams InitMlp(const std::vector<int>& layer_sizes, Rng& rng) {
  MlpParams params = ZeroMlp(layer_sizes);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const double limit =
        std::sqrt(6.0 / (layer_sizes[l] + layer_sizes[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : params.layers[l].weights) w = dist(rng);
  }
  return params;
}

MlpParams ZeroMlp(const std::vector<int>& layer_sizes) {
  CheckSizes(layer_sizes);
  MlpParams params;
  params.layer_sizes = layer_sizes;
  params.layers = ZeroLayers(layer_sizes);
  return params;
}

GradientSet ZeroGradients(const MlpParams& like) {
  return GradientSet{ZeroLayers(like.layer_sizes)};
}

AdamState InitAdam(const MlpParams& like, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.first_moment = ZeroGradients(like);
  state.second_moment = ZeroGradients(like);
  return state;
}

double SquaredNorm(const MlpParams& params) {
  double sum = 0.0;
  for (const auto& layer : params.layers) {
    for (double w : layer.weights) sum += w * w;
    for (double b : layer.biases) sum += b * b;
  }
  return sum;
}

bool AllFinite(const MlpParams& params) {
  for (const auto& layer : params.layers) {
    for (double w : layer.weights) if (!std::isfinite(w)) return false;
    for (double b : layer.biases) if (!std::isfinite(b)) return false;
  }
  return true;
}

std::vector<double> Forward(const MlpParams& params,
                            std::span<const double> observation) {
  Require(observation.size() == static_cast<std::size_t>(params.input_size()),
          "forward: observation width " + std::to_string(observation.size()) +
              " != network input " + std::to_string(params.input_size()));
  std::vector<double> current(observation.begin(), observation.end());
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::vector<double> next(params.layer_sizes[l + 1]);
    AffineRow(params.layers[l], current, next);
    if (l + 1 < n_layers) ReluInPlace(next);
    current = std::move(next);
  }
  return current;
}

Matrix ForwardBatch(const MlpParams& params, const Matrix& inputs) {
  return std::move(ForwardAll(params, inputs).back());
}

LossGradient Backward(const MlpParams& params, const Matrix& inputs,
                      const OutputLoss& loss, double l2_weight) {
  Require(inputs.rows > 0, "backward: empty batch");
  const std::vector<Matrix> acts = ForwardAll(params, inputs);
  const std::size_t batch = inputs.rows;
  const std::size_t n_layers = params.layers.size();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  LossGradient result;
  result.gradients = ZeroGradients(params);

  // d(mean loss)/d(output), one row per sample.
  Matrix delta(batch, params.output_size());
  double loss_sum = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    const double term = loss(r, acts.back().row(r), delta.row(r));
    if (!std::isfinite(term)) {
      throw NonFiniteError("non-finite loss term for sample " + std::to_string(r));
    }
    loss_sum += term;
    for (double& d : delta.row(r)) d *= inv_batch;
  }
  result.loss = loss_sum * inv_batch;

  for (std::size_t l = n_layers; l-- > 0;) {
    const LayerTensors& layer = params.layers[l];
    LayerTensors& grad = result.gradients.layers[l];
    const std::size_t fan_in = params.layer_sizes[l];
    const std::size_t fan_out = params.layer_sizes[l + 1];

    for (std::size_t r = 0; r < batch; ++r) {
      std::span<const double> a = acts[l].row(r);
      std::span<const double> d = delta.row(r);
      for (std::size_t o = 0; o < fan_out; ++o) grad.biases[o] += d[o];
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        double* g = grad.weights.data() + i * fan_out;
        for (std::size_t o = 0; o < fan_out; ++o) g[o] += ai * d[o];
      }
    }
    if (l == 0) break;

    // Propagate to the previous layer's (ReLU) activations.
    Matrix prev(batch, fan_in);
    for (std::size_t r = 0; r < batch; ++r) {
      std::span<const double> a = acts[l].row(r);
      std::span<const double> d = delta.row(r);
      std::span<double> p = prev.row(r);
      for (std::size_t i = 0; i < fan_in; ++i) {
        if (a[i] <= 0.0) continue;
        const double* w = layer.weights.data() + i * fan_out;
        double sum = 0.0;
        for (std::size_t o = 0; o < fan_out; ++o) sum += w[o] * d[o];
        p[i] = sum;
      }
    }
    delta = std::move(prev);
  }

  if (l2_weight != 0.0) {
    const double penalty = l2_weight * SquaredNorm(params);
    if (!std::isfinite(penalty)) throw NonFiniteError("non-finite L2 penalty term");
    result.loss += penalty;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const LayerTensors& p = params.layers[l];
      LayerTensors& g = result.gradients.layers[l];
      for (std::size_t k = 0; k < p.weights.size(); ++k) g.weights[k] += 2.0 * l2_weight * p.weights[k];
      for (std::size_t k = 0; k < p.biases.size(); ++k) g.biases[k] += 2.0 * l2_weight * p.biases[k];
    }
  }
  return result;
}

namespace {

void AdamTensor(std::vector<double>& theta, std::vector<double>& m,
                std::vector<double>& v, const std::vector<double>& g,
                double lr, double beta1, double beta2, double eps,
                double bias1, double bias2) {
  Require(theta.size() == g.size() && m.size() == g.size() && v.size() == g.size(),
          "adam: gradient shape mismatch");
  for (std::size_t k = 0; k < theta.size(); ++k) {
    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
    const double m_hat = m[k] / bias1;
    const double v_hat = v[k] / bias2;
    theta[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

void AdamApply(MlpParams& params, AdamState& state, const GradientSet& grads) {
  Require(grads.layers.size() == params.layers.size() &&
              state.first_moment.layers.size() == params.layers.size() &&
              state.second_moment.layers.size() == params.layers.size(),
          "adam: layer count mismatch");
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    AdamTensor(params.layers[l].weights, state.first_moment.layers[l].weights,
               state.second_moment.layers[l].weights, grads.layers[l].weights,
               state.learning_rate, state.beta1, state.beta2, state.epsilon,
               bias1, bias2);
    AdamTensor(params.layers[l].biases, state.first_moment.layers[l].biases,
               state.second_moment.layers[l].biases, grads.layers[l].biases,
               state.learning_rate, state.beta1, state.beta2, state.epsilon,
               bias1, bias2);
  }
  if (!AllFinite(params)) {
    throw NonFiniteError("non-finite parameter after Adam step " +
                         std::to_string(state.step_count));
  }
}

// ---------------------------------------------------------------- files

std::vector<std::uint8_t> EncodeParams(const MlpParams& params) {
  io::ByteWriter out;
  out.PutU8(kParamsFormatVersion);
  out.PutU32(static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (int s : params.layer_sizes) out.PutU32(static_cast<std::uint32_t>(s));
  for (const auto& layer : params.layers) {
    for (double w : layer.weights) out.PutF64(w);
    for (double b : layer.biases) out.PutF64(b);
  }
  return out.bytes();
}

MlpParams DecodeParams(std::vector<std::uint8_t> bytes) {
  io::ByteReader in(std::move(bytes));
  const std::uint8_t version = in.GetU8("format_version");
  if (version != kParamsFormatVersion) {
    throw LoadError("format_version", "unsupported params version " +
                                          std::to_string(version));
  }
  const std::uint32_t count = in.GetU32("layer_count");
  if (count < 2 || count > 64) {
    throw LoadError("layer_count", "implausible value " + std::to_string(count));
  }
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    const std::uint32_t v = in.GetU32("layer_sizes");
    if (v == 0 || v > (1u << 20)) {
      throw LoadError("layer_sizes", "implausible size " + std::to_string(v));
    }
    s = static_cast<int>(v);
  }
  MlpParams params = ZeroMlp(sizes);
  if (in.remaining() != params.parameter_count() * 8) {
    throw LoadError("parameters", "expected " +
                                      std::to_string(params.parameter_count()) +
                                      " values, file holds " +
                                      std::to_string(in.remaining()) + " bytes");
  }
  for (auto& layer : params.layers) {
    for (double& w : layer.weights) w = in.GetF64("weights");
    for (double& b : layer.biases) b = in.GetF64("biases");
  }
  return params;
}

void SaveParams(const MlpParams& params, const std::filesystem::path& path) {
  io::WriteFile(path, EncodeParams(params));
}

MlpParams LoadParams(const std::filesystem::path& path) {
  return DecodeParams(io::ReadFile(path));
}

}  // namespace zpd::nnet
