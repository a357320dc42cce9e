#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. Every forward op records a closure on a tape node; calling
// backward() on a 1x1 result propagates gradients to all parameter leaves.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace jsccf::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;
  bool has_grad = false;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  template <typename Expr>
  void accumulate(const Expr& g) {
    if (!requires_grad) return;
    if (!has_grad) {
      grad = g;
      has_grad = true;
    } else {
      grad += g;
    }
  }
};

}  // namespace detail

class Var {
 public:
  Var();

  static Var constant(Matrix value);
  // Leaf whose gradient is accumulated across backward() calls.
  static Var parameter(Matrix value);

  const Matrix& value() const { return node_->value; }
  // Direct write access, for optimizer updates and finite-difference probes.
  Matrix& mutable_value() { return node_->value; }

  // Accumulated gradient; a zero matrix of matching shape when none yet.
  Matrix grad() const;
  bool has_grad() const { return node_->has_grad; }
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  double scalar() const;

  // Seeds d(self)/d(self) = 1. Only valid on a 1x1 value.
  void backward() const;

  // Same value, cut from the graph.
  Var detach() const;

  bool same_node(const Var& other) const { return node_ == other.node_; }

  // Used by op implementations.
  static Var from_op(Matrix value, std::vector<Var> inputs, std::function<void(detail::Node&)> backward);
  detail::Node& node() const { return *node_; }

 private:
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording in the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---- ops ----

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
// a (r x c) plus a 1 x c row broadcast over every row.
Var add_row(const Var& a, const Var& row);
Var transpose(const Var& a);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, Index start, Index count);
// Row-major reinterpretation; element order is preserved.
Var reshape(const Var& a, Index rows, Index cols);

Var gelu(const Var& a);
Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps);
Var softmax_rows(const Var& a);
Var clamp(const Var& a, double lo, double hi);

Var sum(const Var& a);
Var sum_squares(const Var& a);

// Scales a so that its mean power per complex symbol (adjacent real pairs in
// row-major order) equals `power`.
Var power_normalize(const Var& a, double power);
// Multiplies each interleaved (re, im) pair by the complex scalar (re, im).
Var complex_scale(const Var& a, double re, double im);

// Gathers the zero-padded 3x3 neighbourhood of every cell of a side x side
// token grid: (side^2 x d) -> (side^2 x 9d), tap order row-major over the
// kernel window.
Var im2col3x3(const Var& a, Index side);

// out.flat[i] = a.flat[source[i]] for a row-major (rows x cols) output.
Var gather(const Var& a, std::shared_ptr<const std::vector<Index>> source, Index rows, Index cols);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

}  // namespace jsccf::nn
