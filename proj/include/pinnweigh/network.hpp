#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pinnweigh {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Fully-connected layout: input -> sine hidden layers -> linear output.
struct Architecture {
  int input_dim = 2;
  std::vector<int> hidden_widths;
  int output_dim = 1;

  void validate() const;  // throws std::invalid_argument
  int layer_count() const noexcept { return static_cast<int>(hidden_widths.size()) + 1; }
  int fan_in(int layer) const;
  int fan_out(int layer) const;
  std::size_t parameter_count() const;
  std::string describe() const;  // e.g. "(x,y)-64-64-64-64-(1)"

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Weights and biases stored flat, layer by layer: W (fan_in x fan_out,
/// row-major) followed by b (fan_out). Gradients share this layout.
class MlpParams {
 public:
  MlpParams() = default;
  explicit MlpParams(Architecture arch);

  const Architecture& architecture() const noexcept { return arch_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<double> weights(int layer) noexcept;
  std::span<const double> weights(int layer) const noexcept;
  std::span<double> bias(int layer) noexcept;
  std::span<const double> bias(int layer) const noexcept;

  std::size_t weight_offset(int layer) const noexcept { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const;

  bool all_finite() const noexcept;

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    return a.arch_ == b.arch_ && a.values_ == b.values_;
  }

 private:
  Architecture arch_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// Weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero.
MlpParams init_params(const Architecture& arch, std::uint64_t seed);

/// Row-major (points x output_dim) outputs. Throws on non-finite input.
std::vector<double> forward_batch(const MlpParams& params, std::span<const Point> points);

/// Forward/backward over a fixed point set with cached activations, for training.
/// Not safe to share between threads; each training run owns one.
class BatchEvaluator {
 public:
  BatchEvaluator(const Architecture& arch, std::span<const Point> points);

  std::size_t batch_size() const noexcept { return batch_; }
  const Architecture& architecture() const noexcept { return arch_; }

  /// Returns (batch x output_dim) outputs; keeps activations for backward().
  std::span<const double> forward(const MlpParams& params);

  /// Accumulates d(loss)/d(params) into grad (overwritten) given d(loss)/d(outputs)
  /// from the most recent forward() with the same params.
  void backward(const MlpParams& params, std::span<const double> d_outputs, std::span<double> grad);

 private:
  Architecture arch_;
  std::size_t batch_;
  std::vector<double> inputs_;                 // batch x input_dim
  std::vector<std::vector<double>> sines_;     // per hidden layer: batch x width
  std::vector<std::vector<double>> cosines_;   // per hidden layer: batch x width
  std::vector<double> outputs_;
  std::vector<double> delta_, delta_prev_;     // batch x max width
  std::vector<double> transposed_;             // scratch for A^T and W^T
};

// Checkpoint: one JSON header line describing the architecture, then the flat
// parameter vector as little-endian IEEE-754 doubles.
void write_checkpoint(std::ostream& os, const MlpParams& params);
void write_checkpoint(const std::string& path, const MlpParams& params);
MlpParams read_checkpoint(std::istream& is);
MlpParams read_checkpoint(const std::string& path);

}  // namespace pinnweigh
