#include "sengraph/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sengraph {

namespace {

thread_local Tape* g_active_tape = nullptr;

void check_shape(const Tensor& t, const char* who) {
  if (!t) throw std::invalid_argument(std::string(who) + ": null tensor");
  if (t->rows <= 0 || t->cols <= 0)
    throw std::invalid_argument(std::string(who) + ": empty tensor");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  check_shape(a, who);
  check_shape(b, who);
  if (a->rows != b->rows || a->cols != b->cols)
    throw std::invalid_argument(std::string(who) + ": shape mismatch " +
                                std::to_string(a->rows) + "x" +
                                std::to_string(a->cols) + " vs " +
                                std::to_string(b->rows) + "x" +
                                std::to_string(b->cols));
}

bool tracking(std::initializer_list<Tensor> inputs) {
  if (g_active_tape == nullptr) return false;
  for (const Tensor& t : inputs)
    if (t->requires_grad) return true;
  return false;
}

Tensor fresh(int rows, int cols, bool track) {
  auto out = std::make_shared<TensorData>();
  out->rows = rows;
  out->cols = cols;
  out->v.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  out->requires_grad = track;
  if (track) out->ensure_grad();
  return out;
}

void prepare_inputs(std::initializer_list<Tensor> inputs) {
  for (const Tensor& t : inputs)
    if (t->requires_grad) t->ensure_grad();
}

}  // namespace

void TensorData::ensure_grad() {
  if (g.size() != v.size()) g.assign(v.size(), 0.0);
}

void TensorData::zero_grad() { g.assign(v.size(), 0.0); }

Tensor make_tensor(int rows, int cols, std::vector<double> values,
                   bool requires_grad) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("make_tensor: non-positive shape");
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("make_tensor: value count does not match shape");
  auto t = std::make_shared<TensorData>();
  t->rows = rows;
  t->cols = cols;
  t->v = std::move(values);
  t->requires_grad = requires_grad;
  if (requires_grad) t->ensure_grad();
  return t;
}

Tensor zeros(int rows, int cols, bool requires_grad) {
  return make_tensor(rows, cols,
                     std::vector<double>(static_cast<std::size_t>(rows) * cols,
                                         0.0),
                     requires_grad);
}

Tensor scalar_tensor(double x, bool requires_grad) {
  return make_tensor(1, 1, {x}, requires_grad);
}

double scalar_value(const Tensor& t) {
  check_shape(t, "scalar_value");
  if (t->rows != 1 || t->cols != 1)
    throw std::invalid_argument("scalar_value: tensor is not 1x1");
  return t->v[0];
}

Tape* Tape::active() { return g_active_tape; }

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw std::logic_error("Tape::backward called twice");
  check_shape(loss, "backward");
  if (loss->rows != 1 || loss->cols != 1)
    throw std::invalid_argument("backward: loss must be 1x1");
  consumed_ = true;
  loss->ensure_grad();
  loss->g[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

TapeScope::TapeScope() : prev_(g_active_tape) { g_active_tape = &tape_; }

TapeScope::~TapeScope() { g_active_tape = prev_; }

void backward(const Tensor& loss) {
  if (g_active_tape == nullptr)
    throw std::logic_error("backward: no active tape");
  g_active_tape->backward(loss);
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  bool track = tracking({a, b});
  Tensor out = fresh(a->rows, a->cols, track);
  for (std::size_t i = 0; i < out->numel(); ++i) out->v[i] = a->v[i] + b->v[i];
  if (track) {
    prepare_inputs({a, b});
    g_active_tape->record([a, b, out] {
      for (std::size_t i = 0; i < out->numel(); ++i) {
        if (a->requires_grad) a->g[i] += out->g[i];
        if (b->requires_grad) b->g[i] += out->g[i];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  bool track = tracking({a, b});
  Tensor out = fresh(a->rows, a->cols, track);
  for (std::size_t i = 0; i < out->numel(); ++i) out->v[i] = a->v[i] - b->v[i];
  if (track) {
    prepare_inputs({a, b});
    g_active_tape->record([a, b, out] {
      for (std::size_t i = 0; i < out->numel(); ++i) {
        if (a->requires_grad) a->g[i] += out->g[i];
        if (b->requires_grad) b->g[i] -= out->g[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  bool track = tracking({a, b});
  Tensor out = fresh(a->rows, a->cols, track);
  for (std::size_t i = 0; i < out->numel(); ++i) out->v[i] = a->v[i] * b->v[i];
  if (track) {
    prepare_inputs({a, b});
    g_active_tape->record([a, b, out] {
      for (std::size_t i = 0; i < out->numel(); ++i) {
        if (a->requires_grad) a->g[i] += out->g[i] * b->v[i];
        if (b->requires_grad) b->g[i] += out->g[i] * a->v[i];
      }
    });
  }
  return out;
}

Tensor add_n(const std::vector<Tensor>& ts) {
  if (ts.empty()) throw std::invalid_argument("add_n: empty input list");
  for (const Tensor& t : ts) check_same_shape(ts.front(), t, "add_n");
  bool track = false;
  if (g_active_tape != nullptr)
    for (const Tensor& t : ts)
      if (t->requires_grad) track = true;
  Tensor out = fresh(ts.front()->rows, ts.front()->cols, track);
  for (const Tensor& t : ts)
    for (std::size_t i = 0; i < out->numel(); ++i) out->v[i] += t->v[i];
  if (track) {
    for (const Tensor& t : ts)
      if (t->requires_grad) t->ensure_grad();
    std::vector<Tensor> held = ts;
    g_active_tape->record([held, out] {
      for (const Tensor& t : held) {
        if (!t->requires_grad) continue;
        for (std::size_t i = 0; i < out->numel(); ++i) t->g[i] += out->g[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double c) {
  check_shape(a, "scale");
  bool track = tracking({a});
  Tensor out = fresh(a->rows, a->cols, track);
  for (std::size_t i = 0; i < out->numel(); ++i) out->v[i] = a->v[i] * c;
  if (track) {
    prepare_inputs({a});
    g_active_tape->record([a, out, c] {
      for (std::size_t i = 0; i < out->numel(); ++i) a->g[i] += out->g[i] * c;
    });
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_shape(a, "matmul");
  check_shape(b, "matmul");
  if (a->cols != b->rows)
    throw std::invalid_argument("matmul: inner dimensions disagree: " +
                                std::to_string(a->cols) + " vs " +
                                std::to_string(b->rows));
  bool track = tracking({a, b});
  Tensor out = fresh(a->rows, b->cols, track);
  for (int i = 0; i < a->rows; ++i)
    for (int k = 0; k < a->cols; ++k) {
      double av = a->at(i, k);
      for (int j = 0; j < b->cols; ++j) out->at(i, j) += av * b->at(k, j);
    }
  if (track) {
    prepare_inputs({a, b});
    g_active_tape->record([a, b, out] {
      if (a->requires_grad) {
        // dA = dOut * B^T
        for (int i = 0; i < a->rows; ++i)
          for (int k = 0; k < a->cols; ++k) {
            double acc = 0.0;
            for (int j = 0; j < b->cols; ++j)
              acc += out->g[static_cast<std::size_t>(i) * out->cols + j] *
                     b->at(k, j);
            a->g[static_cast<std::size_t>(i) * a->cols + k] += acc;
          }
      }
      if (b->requires_grad) {
        // dB = A^T * dOut
        for (int k = 0; k < b->rows; ++k)
          for (int j = 0; j < b->cols; ++j) {
            double acc = 0.0;
            for (int i = 0; i < a->rows; ++i)
              acc += a->at(i, k) *
                     out->g[static_cast<std::size_t>(i) * out->cols + j];
            b->g[static_cast<std::size_t>(k) * b->cols + j] += acc;
          }
      }
    });
  }
  return out;
}

Tensor leaky_relu(const Tensor& a, double slope) {
  check_shape(a, "leaky_relu");
  bool track = tracking({a});
  Tensor out = fresh(a->rows, a->cols, track);
  for (std::size_t i = 0; i < out->numel(); ++i)
    out->v[i] = a->v[i] > 0.0 ? a->v[i] : slope * a->v[i];
  if (track) {
    prepare_inputs({a});
    g_active_tape->record([a, out, slope] {
      for (std::size_t i = 0; i < out->numel(); ++i)
        a->g[i] += out->g[i] * (a->v[i] > 0.0 ? 1.0 : slope);
    });
  }
  return out;
}

Tensor logistic(const Tensor& a) {
  check_shape(a, "logistic");
  bool track = tracking({a});
  Tensor out = fresh(a->rows, a->cols, track);
  for (std::size_t i = 0; i < out->numel(); ++i)
    out->v[i] = 1.0 / (1.0 + std::exp(-a->v[i]));
  if (track) {
    prepare_inputs({a});
    g_active_tape->record([a, out] {
      for (std::size_t i = 0; i < out->numel(); ++i)
        a->g[i] += out->g[i] * out->v[i] * (1.0 - out->v[i]);
    });
  }
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride) {
  check_shape(input, "conv2d");
  check_shape(kernel, "conv2d");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (kernel->rows > input->rows || kernel->cols > input->cols)
    throw std::invalid_argument("conv2d: kernel larger than input");
  int oh = (input->rows - kernel->rows) / stride + 1;
  int ow = (input->cols - kernel->cols) / stride + 1;
  bool track = tracking({input, kernel});
  Tensor out = fresh(oh, ow, track);
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int a = 0; a < kernel->rows; ++a)
        for (int b = 0; b < kernel->cols; ++b)
          acc += input->at(i * stride + a, j * stride + b) * kernel->at(a, b);
      out->at(i, j) = acc;
    }
  if (track) {
    prepare_inputs({input, kernel});
    g_active_tape->record([input, kernel, out, stride] {
      int oh = out->rows, ow = out->cols;
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double go = out->g[static_cast<std::size_t>(i) * ow + j];
          for (int a = 0; a < kernel->rows; ++a)
            for (int b = 0; b < kernel->cols; ++b) {
              int r = i * stride + a, c = j * stride + b;
              if (input->requires_grad)
                input->g[static_cast<std::size_t>(r) * input->cols + c] +=
                    go * kernel->at(a, b);
              if (kernel->requires_grad)
                kernel->g[static_cast<std::size_t>(a) * kernel->cols + b] +=
                    go * input->at(r, c);
            }
        }
    });
  }
  return out;
}

Tensor flatten_row(const Tensor& a) {
  check_shape(a, "flatten_row");
  bool track = tracking({a});
  Tensor out = fresh(1, static_cast<int>(a->numel()), track);
  out->v = a->v;
  if (track) {
    prepare_inputs({a});
    g_active_tape->record([a, out] {
      for (std::size_t i = 0; i < out->numel(); ++i) a->g[i] += out->g[i];
    });
  }
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  check_shape(a, "concat_cols");
  check_shape(b, "concat_cols");
  if (a->rows != b->rows)
    throw std::invalid_argument("concat_cols: row counts disagree");
  bool track = tracking({a, b});
  Tensor out = fresh(a->rows, a->cols + b->cols, track);
  for (int r = 0; r < a->rows; ++r) {
    for (int c = 0; c < a->cols; ++c) out->at(r, c) = a->at(r, c);
    for (int c = 0; c < b->cols; ++c) out->at(r, a->cols + c) = b->at(r, c);
  }
  if (track) {
    prepare_inputs({a, b});
    g_active_tape->record([a, b, out] {
      for (int r = 0; r < a->rows; ++r) {
        for (int c = 0; c < a->cols; ++c)
          if (a->requires_grad)
            a->g[static_cast<std::size_t>(r) * a->cols + c] +=
                out->g[static_cast<std::size_t>(r) * out->cols + c];
        for (int c = 0; c < b->cols; ++c)
          if (b->requires_grad)
            b->g[static_cast<std::size_t>(r) * b->cols + c] +=
                out->g[static_cast<std::size_t>(r) * out->cols + a->cols + c];
      }
    });
  }
  return out;
}

Tensor sum_all(const Tensor& a) {
  check_shape(a, "sum_all");
  bool track = tracking({a});
  Tensor out = fresh(1, 1, track);
  double acc = 0.0;
  for (double x : a->v) acc += x;
  out->v[0] = acc;
  if (track) {
    prepare_inputs({a});
    g_active_tape->record([a, out] {
      for (std::size_t i = 0; i < a->numel(); ++i) a->g[i] += out->g[0];
    });
  }
  return out;
}

Tensor mean_all(const Tensor& a) {
  check_shape(a, "mean_all");
  double inv = 1.0 / static_cast<double>(a->numel());
  return scale(sum_all(a), inv);
}

Tensor weighted_bce(const Tensor& prob, double label, double weight) {
  check_shape(prob, "weighted_bce");
  if (prob->rows != 1 || prob->cols != 1)
    throw std::invalid_argument("weighted_bce: probability must be 1x1");
  if (label != 0.0 && label != 1.0)
    throw std::invalid_argument("weighted_bce: label must be 0 or 1");
  constexpr double kEps = 1e-7;
  bool track = tracking({prob});
  Tensor out = fresh(1, 1, track);
  double p = prob->v[0];
  double pc = p < kEps ? kEps : (p > 1.0 - kEps ? 1.0 - kEps : p);
  out->v[0] =
      -weight * (label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc));
  if (track) {
    prepare_inputs({prob});
    g_active_tape->record([prob, out, label, weight] {
      double p = prob->v[0];
      if (p <= kEps || p >= 1.0 - kEps) return;  // flat in clamped region
      double d = -weight * (label / p - (1.0 - label) / (1.0 - p));
      prob->g[0] += out->g[0] * d;
    });
  }
  return out;
}

}  // namespace sengraph
