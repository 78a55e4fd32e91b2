#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace sengraph {

/// Dense row-major matrix with an optional gradient buffer. Row and column
/// vectors are 1xN / Nx1 matrices; scalars are 1x1.
struct TensorData {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;
  std::vector<double> g;  // same shape as v once allocated
  bool requires_grad = false;

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  std::size_t numel() const { return v.size(); }

  /// Allocates the gradient buffer (zero-filled) if absent.
  void ensure_grad();
  void zero_grad();
};

using Tensor = std::shared_ptr<TensorData>;

Tensor make_tensor(int rows, int cols, std::vector<double> values,
                   bool requires_grad = false);
Tensor zeros(int rows, int cols, bool requires_grad = false);
Tensor scalar_tensor(double x, bool requires_grad = false);

/// Value of a 1x1 tensor.
double scalar_value(const Tensor& t);

/// Records backward closures for the ops executed while it is active. Ops run
/// outside any tape compute values only and never build a graph, which keeps
/// inference cheap. backward() may be called once per tape; a second call
/// throws std::logic_error.
class Tape {
 public:
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }
  bool consumed() const { return consumed_; }

  /// Seeds d(loss)/d(loss) = 1 and runs the recorded closures in reverse.
  /// Gradients accumulate into TensorData::g of every tensor on the path.
  void backward(const Tensor& loss);

  static Tape* active();

 private:
  std::vector<std::function<void()>> ops_;
  bool consumed_ = false;
};

/// RAII activation of a fresh tape on this thread.
class TapeScope {
 public:
  TapeScope();
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

  Tape& tape() { return tape_; }

 private:
  Tape tape_;
  Tape* prev_;
};

/// Runs backward on the active tape. Throws std::logic_error when no tape is
/// active or the active tape was already consumed.
void backward(const Tensor& loss);

// Elementwise ops require identical shapes; shape violations throw
// std::invalid_argument.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

/// Sum of one or more same-shaped tensors, accumulated in argument order.
Tensor add_n(const std::vector<Tensor>& ts);

Tensor scale(const Tensor& a, double c);

/// (MxK)(KxN) -> MxN.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor logistic(const Tensor& a);

/// Valid cross-correlation of a single-channel input with a single kernel.
/// Output is ((H-kh)/stride+1) x ((W-kw)/stride+1), floor division.
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride);

/// Reshape to a 1 x numel row vector (row-major order preserved).
Tensor flatten_row(const Tensor& a);

/// Horizontal concatenation of two matrices with equal row counts.
Tensor concat_cols(const Tensor& a, const Tensor& b);

Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

/// Weighted binary cross-entropy of a 1x1 probability against a 0/1 label:
/// -weight * (y*log p + (1-y)*log(1-p)), with p clamped to
/// [1e-7, 1-1e-7] for the log (gradient is zero in the clamped region).
Tensor weighted_bce(const Tensor& prob, double label, double weight);

}  // namespace sengraph
