#pragma once

#include "ramp/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ramp {

enum class Activation : std::uint8_t { relu = 0, tanh = 1 };

/// Intermediate activations kept by a forward pass so that backward() can
/// run without recomputation. acts[0] is the input, acts[l + 1] the output
/// of layer l (post-activation for hidden layers, linear for the last).
struct MlpTape {
  std::vector<Mat> acts;
};

/// Fully connected feed-forward network with a linear output layer.
///
/// All weights and biases live in one flat parameter vector so that the
/// optimizer, soft target updates and checkpoints operate on a single
/// contiguous block. Layer l stores its weight matrix (out x in,
/// column-major) followed by its bias. Batches are column-major: one sample
/// per column.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes, Activation hidden = Activation::relu);

  /// Uniform fan-in initialization: every weight and bias of a layer with
  /// fan-in k is drawn from U(-1/sqrt(k), 1/sqrt(k)).
  void init_uniform(Rng& rng);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index num_params() const { return params_.size(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<const Vec> bias(int layer) const;
  Eigen::Map<Mat> weight(int layer);
  Eigen::Map<Vec> bias(int layer);

  Mat forward(const Mat& x) const;
  Vec forward(const Vec& x) const;
  Mat forward(const Mat& x, MlpTape& tape) const;

  /// Accumulates dLoss/dparams into grad given dLoss/dOutput for the batch
  /// recorded in tape. When d_input is non-null it receives dLoss/dInput.
  void backward(const MlpTape& tape, const Mat& d_out, Vec& grad,
                Mat* d_input = nullptr) const;

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.sizes_ == b.sizes_ && a.hidden_ == b.hidden_ && a.params_ == b.params_;
  }

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<int> sizes_;
  Activation hidden_ = Activation::relu;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weight block
  Vec params_;
};

/// Adaptive-moment optimizer with bias correction.
struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vec m;
  Vec v;
  std::int64_t t = 0;

  Adam() = default;
  explicit Adam(double learning_rate) : lr(learning_rate) {}

  void step(Vec& params, const Vec& grad);
};

// Checkpoint format, little-endian throughout:
//   8 bytes  magic "RAMPMLP1"
//   u32      number of layer sizes L+1, then L+1 x u32 sizes
//   u8       hidden activation
//   u64      parameter count, then that many f64 values
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);
void save_mlp(const std::string& path, const Mlp& net);
Mlp load_mlp(const std::string& path);

}  // namespace ramp
