#include "pinnweigh/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "pinnweigh/simd/kernels.hpp"

namespace pinnweigh {

void Architecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("architecture: input_dim must be >= 1");
  if (output_dim < 1) throw std::invalid_argument("architecture: output_dim must be >= 1");
  if (hidden_widths.empty())
    throw std::invalid_argument("architecture: at least one hidden layer is required");
  for (int w : hidden_widths)
    if (w < 1) throw std::invalid_argument("architecture: hidden widths must be >= 1");
}

int Architecture::fan_in(int layer) const {
  return layer == 0 ? input_dim : hidden_widths.at(static_cast<std::size_t>(layer - 1));
}

int Architecture::fan_out(int layer) const {
  return layer == layer_count() - 1 ? output_dim : hidden_widths.at(static_cast<std::size_t>(layer));
}

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  for (int l = 0; l < layer_count(); ++l)
    total += static_cast<std::size_t>(fan_in(l)) * fan_out(l) + fan_out(l);
  return total;
}

std::string Architecture::describe() const {
  std::string s = input_dim == 2 ? "(x,y)" : "(" + std::to_string(input_dim) + ")";
  for (int w : hidden_widths) s += "-" + std::to_string(w);
  return s + "-(" + std::to_string(output_dim) + ")";
}

MlpParams::MlpParams(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t offset = 0;
  for (int l = 0; l < arch_.layer_count(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(arch_.fan_in(l)) * arch_.fan_out(l) + arch_.fan_out(l);
  }
  values_.assign(offset, 0.0);
}

std::span<double> MlpParams::weights(int layer) noexcept {
  return {values_.data() + offsets_[layer],
          static_cast<std::size_t>(arch_.fan_in(layer)) * arch_.fan_out(layer)};
}
std::span<const double> MlpParams::weights(int layer) const noexcept {
  return {values_.data() + offsets_[layer],
          static_cast<std::size_t>(arch_.fan_in(layer)) * arch_.fan_out(layer)};
}
std::size_t MlpParams::bias_offset(int layer) const {
  return offsets_[layer] + static_cast<std::size_t>(arch_.fan_in(layer)) * arch_.fan_out(layer);
}
std::span<double> MlpParams::bias(int layer) noexcept {
  return {values_.data() + bias_offset(layer), static_cast<std::size_t>(arch_.fan_out(layer))};
}
std::span<const double> MlpParams::bias(int layer) const noexcept {
  return {values_.data() + bias_offset(layer), static_cast<std::size_t>(arch_.fan_out(layer))};
}

bool MlpParams::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

MlpParams init_params(const Architecture& arch, std::uint64_t seed) {
  MlpParams params(arch);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < arch.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / arch.fan_in(l));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : params.weights(l)) w = dist(rng);
  }
  return params;
}

std::vector<double> forward_batch(const MlpParams& params, std::span<const Point> points) {
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("forward_batch: non-finite input point");
  BatchEvaluator eval(params.architecture(), points);
  const auto out = eval.forward(params);
  return {out.begin(), out.end()};
}

BatchEvaluator::BatchEvaluator(const Architecture& arch, std::span<const Point> points)
    : arch_(arch), batch_(points.size()) {
  arch_.validate();
  if (arch_.input_dim != 2) throw std::invalid_argument("BatchEvaluator: points are 2-D");
  inputs_.resize(batch_ * 2);
  for (std::size_t p = 0; p < batch_; ++p) {
    inputs_[2 * p] = points[p].x;
    inputs_[2 * p + 1] = points[p].y;
  }
  int widest = arch_.output_dim;
  for (int w : arch_.hidden_widths) {
    sines_.emplace_back(batch_ * w);
    cosines_.emplace_back(batch_ * w);
    widest = std::max(widest, w);
  }
  widest = std::max(widest, arch_.input_dim);
  outputs_.resize(batch_ * arch_.output_dim);
  delta_.resize(batch_ * widest);
  delta_prev_.resize(batch_ * widest);
  transposed_.resize(std::max(batch_ * widest, static_cast<std::size_t>(widest) * widest));
}

std::span<const double> BatchEvaluator::forward(const MlpParams& params) {
  if (!(params.architecture() == arch_))
    throw std::invalid_argument("BatchEvaluator: parameter architecture mismatch");
  const auto& k = simd::kernels();
  const int m = static_cast<int>(batch_);
  const double* in = inputs_.data();
  for (int l = 0; l < arch_.layer_count(); ++l) {
    const int fi = arch_.fan_in(l), fo = arch_.fan_out(l);
    const bool hidden = l < arch_.layer_count() - 1;
    // Pre-activation goes into delta_ as scratch; it is rebuilt in backward().
    double* z = hidden ? delta_.data() : outputs_.data();
    const auto b = params.bias(l);
    for (int p = 0; p < m; ++p) std::copy(b.begin(), b.end(), z + static_cast<std::size_t>(p) * fo);
    k.gemm(m, fo, fi, in, fi, params.weights(l).data(), fo, z, fo, true);
    if (hidden) {
      k.sincos(batch_ * fo, z, sines_[l].data(), cosines_[l].data());
      in = sines_[l].data();
    }
  }
  return outputs_;
}

void BatchEvaluator::backward(const MlpParams& params, std::span<const double> d_outputs,
                              std::span<double> grad) {
  if (d_outputs.size() != outputs_.size())
    throw std::invalid_argument("BatchEvaluator::backward: d_outputs size mismatch");
  if (grad.size() != params.size())
    throw std::invalid_argument("BatchEvaluator::backward: gradient size mismatch");
  const auto& k = simd::kernels();
  const int m = static_cast<int>(batch_);
  std::copy(d_outputs.begin(), d_outputs.end(), delta_.begin());

  for (int l = arch_.layer_count() - 1; l >= 0; --l) {
    const int fi = arch_.fan_in(l), fo = arch_.fan_out(l);
    const double* in = l == 0 ? inputs_.data() : sines_[l - 1].data();

    // dW = in^T * delta
    simd::transpose(m, fi, in, fi, transposed_.data(), m);
    k.gemm(fi, fo, m, transposed_.data(), m, delta_.data(), fo, grad.data() + params.weight_offset(l),
           fo, false);
    k.column_sum(m, fo, delta_.data(), fo, grad.data() + params.bias_offset(l));

    if (l == 0) break;
    // delta_prev = (delta * W^T) .* cos(z_{l-1})
    simd::transpose(fi, fo, params.weights(l).data(), fo, transposed_.data(), fi);
    k.gemm(m, fi, fo, delta_.data(), fo, transposed_.data(), fi, delta_prev_.data(), fi, false);
    k.multiply(batch_ * fi, cosines_[l - 1].data(), delta_prev_.data());
    std::swap(delta_, delta_prev_);
  }
}

namespace {
constexpr const char* kCheckpointFormat = "pinnweigh-mlp-v1";
}

void write_checkpoint(std::ostream& os, const MlpParams& params) {
  const auto& arch = params.architecture();
  nlohmann::json header = {{"format", kCheckpointFormat},
                           {"input_dim", arch.input_dim},
                           {"hidden_widths", arch.hidden_widths},
                           {"output_dim", arch.output_dim},
                           {"activation", "sin"},
                           {"output_activation", "linear"},
                           {"parameter_count", params.size()},
                           {"layout", "per layer: weights[fan_in][fan_out] row-major, then bias"},
                           {"dtype", "float64-le"}};
  os << header.dump() << '\n';
  for (double v : params.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    os.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

void write_checkpoint(const std::string& path, const MlpParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(os, params);
}

MlpParams read_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("checkpoint: missing header");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != kCheckpointFormat)
    throw std::runtime_error("checkpoint: unknown format");
  Architecture arch;
  arch.input_dim = header.at("input_dim").get<int>();
  arch.hidden_widths = header.at("hidden_widths").get<std::vector<int>>();
  arch.output_dim = header.at("output_dim").get<int>();
  MlpParams params(arch);
  if (header.at("parameter_count").get<std::size_t>() != params.size())
    throw std::runtime_error("checkpoint: parameter count does not match architecture");
  for (double& v : params.values()) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("checkpoint: truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  return params;
}

MlpParams read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_checkpoint(is);
}

}  // namespace pinnweigh
