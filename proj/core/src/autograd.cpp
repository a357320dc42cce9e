#include "jsccf/autograd.hpp"

#include "jsccf/errors.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

namespace jsccf::nn {

namespace {

thread_local bool g_grad_enabled = true;

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.value()) + " vs " +
                         shape_str(b.value()));
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

Var::Var() : node_(std::make_shared<detail::Node>()) {}

Var Var::constant(Matrix value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Var::parameter(Matrix value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

Matrix Var::grad() const {
  if (node_->has_grad) return node_->grad;
  return Matrix::Zero(rows(), cols());
}

void Var::zero_grad() {
  node_->grad.resize(0, 0);
  node_->has_grad = false;
}

double Var::scalar() const {
  if (size() != 1) throw DimensionError("scalar(): value is " + shape_str(value()));
  return value()(0, 0);
}

Var Var::detach() const { return constant(node_->value); }

Var Var::from_op(Matrix value, std::vector<Var> inputs, std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  if (!g_grad_enabled) return Var(std::move(node));
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return Var(std::move(node));
  node->requires_grad = true;
  node->is_leaf = false;
  node->parents.reserve(inputs.size());
  for (auto& in : inputs) node->parents.push_back(in.node_);
  node->backward = std::move(backward);
  return Var(std::move(node));
}

void Var::backward() const {
  if (size() != 1) throw DimensionError("backward(): root must be 1x1, got " + shape_str(value()));
  if (!requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !parent->is_leaf && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->has_grad && node->backward) node->backward(*node);
    // Interior gradients are not needed once propagated.
    if (!node->is_leaf) {
      node->grad.resize(0, 0);
      node->has_grad = false;
    }
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  Matrix out = a.value() * b.value();
  return Var::from_op(std::move(out), {a, b}, [](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return Var::from_op(a.value() + b.value(), {a, b}, [](detail::Node& self) {
    self.parents[0]->accumulate(self.grad);
    self.parents[1]->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return Var::from_op(a.value() - b.value(), {a, b}, [](detail::Node& self) {
    self.parents[0]->accumulate(self.grad);
    self.parents[1]->accumulate(-self.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  return Var::from_op(a.value().cwiseProduct(b.value()), {a, b}, [](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(self.grad.cwiseProduct(pa.value));
  });
}

Var scale(const Var& a, double s) {
  return Var::from_op(a.value() * s, {a}, [s](detail::Node& self) { self.parents[0]->accumulate(self.grad * s); });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: " + shape_str(a.value()) + " + " + shape_str(row.value()));
  }
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return Var::from_op(std::move(out), {a, row}, [](detail::Node& self) {
    self.parents[0]->accumulate(self.grad);
    if (self.parents[1]->requires_grad) self.parents[1]->accumulate(self.grad.colwise().sum());
  });
}

Var transpose(const Var& a) {
  Matrix out = a.value().transpose();
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    self.parents[0]->accumulate(self.grad.transpose());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Index> offsets;
  offsets.reserve(parts.size());
  Index at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    if (p.cols() > 0) out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return Var::from_op(std::move(out), std::move(inputs), [offsets](detail::Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      auto& p = *self.parents[i];
      if (p.requires_grad && p.value.cols() > 0) p.accumulate(self.grad.middleCols(offsets[i], p.value.cols()));
    }
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) + ") out of " +
                         shape_str(a.value()));
  }
  Matrix out = a.value().middleCols(start, count);
  return Var::from_op(std::move(out), {a}, [start, count](detail::Node& self) {
    auto& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    g.middleCols(start, count) = self.grad;
    p.accumulate(g);
  });
}

Var reshape(const Var& a, Index rows, Index cols) {
  if (rows * cols != a.size()) {
    throw DimensionError("reshape: " + shape_str(a.value()) + " -> " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    p.accumulate(Eigen::Map<const Matrix>(self.grad.data(), p.value.rows(), p.value.cols()));
  });
}

Var gelu(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    Matrix d = p.value.unaryExpr([](double x) {
      return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
    });
    p.accumulate(self.grad.cwiseProduct(d));
  });
}

Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps) {
  const Index rows = a.rows();
  const Index cols = a.cols();
  if (gamma.rows() != 1 || gamma.cols() != cols || beta.rows() != 1 || beta.cols() != cols) {
    throw DimensionError("layer_norm: affine parameters must be 1x" + std::to_string(cols));
  }
  Matrix normed(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Index r = 0; r < rows; ++r) {
    const double mean = a.value().row(r).mean();
    const auto centered = (a.value().row(r).array() - mean).matrix();
    const double var = centered.squaredNorm() / static_cast<double>(cols);
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    normed.row(r) = centered * inv_std(r);
  }
  Matrix out = normed;
  out.array().rowwise() *= gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  return Var::from_op(std::move(out), {a, gamma, beta}, [normed, inv_std](detail::Node& self) {
    auto& px = *self.parents[0];
    auto& pg = *self.parents[1];
    auto& pb = *self.parents[2];
    if (pg.requires_grad) pg.accumulate(self.grad.cwiseProduct(normed).colwise().sum());
    if (pb.requires_grad) pb.accumulate(self.grad.colwise().sum());
    if (px.requires_grad) {
      const Index n = normed.cols();
      Matrix dn = self.grad;
      dn.array().rowwise() *= pg.value.row(0).array();
      Matrix dx(normed.rows(), n);
      for (Index r = 0; r < normed.rows(); ++r) {
        const double mean_dn = dn.row(r).mean();
        const double mean_dn_n = dn.row(r).dot(normed.row(r)) / static_cast<double>(n);
        dx.row(r) = inv_std(r) * (dn.row(r).array() - mean_dn - normed.row(r).array() * mean_dn_n).matrix();
      }
      px.accumulate(dx);
    }
  });
}

Var softmax_rows(const Var& a) {
  Matrix out(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    const double mx = a.value().row(r).maxCoeff();
    auto e = (a.value().row(r).array() - mx).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    const Matrix& s = self.value;
    Eigen::VectorXd dots = self.grad.cwiseProduct(s).rowwise().sum();
    Matrix g = self.grad;
    g.colwise() -= dots;
    self.parents[0]->accumulate(s.cwiseProduct(g));
  });
}

Var clamp(const Var& a, double lo, double hi) {
  Matrix out = a.value().cwiseMax(lo).cwiseMin(hi);
  return Var::from_op(std::move(out), {a}, [lo, hi](detail::Node& self) {
    auto& p = *self.parents[0];
    Matrix mask = p.value.unaryExpr([lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
    p.accumulate(self.grad.cwiseProduct(mask));
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    p.accumulate(Matrix::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0)));
  });
}

Var sum_squares(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    p.accumulate(p.value * (2.0 * self.grad(0, 0)));
  });
}

Var power_normalize(const Var& a, double power) {
  if (a.size() % 2 != 0) throw DimensionError("power_normalize: odd number of real components");
  const double energy = a.value().squaredNorm();
  if (!(energy > 0.0)) throw DegenerateInput("power_normalize: input has zero energy");
  const double symbols = static_cast<double>(a.size() / 2);
  const double target = std::sqrt(symbols * power);
  const double factor = target / std::sqrt(energy);
  return Var::from_op(a.value() * factor, {a}, [energy, factor](detail::Node& self) {
    auto& p = *self.parents[0];
    // y = c x / |x|  =>  dx = (c/|x|) (g - x (x.g)/|x|^2)
    const double xg = p.value.cwiseProduct(self.grad).sum();
    p.accumulate(factor * (self.grad - p.value * (xg / energy)));
  });
}

Var complex_scale(const Var& a, double re, double im) {
  if (a.size() % 2 != 0) throw DimensionError("complex_scale: odd number of real components");
  Matrix out(a.rows(), a.cols());
  const double* x = a.value().data();
  double* y = out.data();
  for (Index j = 0; j + 1 < a.size(); j += 2) {
    y[j] = re * x[j] - im * x[j + 1];
    y[j + 1] = re * x[j + 1] + im * x[j];
  }
  return Var::from_op(std::move(out), {a}, [re, im](detail::Node& self) {
    auto& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    const double* go = self.grad.data();
    double* gi = g.data();
    for (Index j = 0; j + 1 < g.size(); j += 2) {
      gi[j] = re * go[j] + im * go[j + 1];
      gi[j + 1] = -im * go[j] + re * go[j + 1];
    }
    p.accumulate(g);
  });
}

Var im2col3x3(const Var& a, Index side) {
  if (side * side != a.rows()) {
    throw DimensionError("im2col3x3: " + std::to_string(a.rows()) + " tokens do not form a " + std::to_string(side) +
                         "x" + std::to_string(side) + " grid");
  }
  const Index d = a.cols();
  Matrix out = Matrix::Zero(a.rows(), 9 * d);
  for (Index i = 0; i < side; ++i) {
    for (Index j = 0; j < side; ++j) {
      for (Index t = 0; t < 9; ++t) {
        const Index si = i + t / 3 - 1;
        const Index sj = j + t % 3 - 1;
        if (si < 0 || sj < 0 || si >= side || sj >= side) continue;
        out.block(i * side + j, t * d, 1, d) = a.value().row(si * side + sj);
      }
    }
  }
  return Var::from_op(std::move(out), {a}, [side, d](detail::Node& self) {
    auto& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), d);
    for (Index i = 0; i < side; ++i) {
      for (Index j = 0; j < side; ++j) {
        for (Index t = 0; t < 9; ++t) {
          const Index si = i + t / 3 - 1;
          const Index sj = j + t % 3 - 1;
          if (si < 0 || sj < 0 || si >= side || sj >= side) continue;
          g.row(si * side + sj) += self.grad.block(i * side + j, t * d, 1, d);
        }
      }
    }
    p.accumulate(g);
  });
}

Var gather(const Var& a, std::shared_ptr<const std::vector<Index>> source, Index rows, Index cols) {
  if (static_cast<Index>(source->size()) != rows * cols) throw DimensionError("gather: index count mismatch");
  Matrix out(rows, cols);
  const double* in = a.value().data();
  for (Index i = 0; i < out.size(); ++i) {
    const Index j = (*source)[static_cast<std::size_t>(i)];
    if (j < 0 || j >= a.size()) throw DimensionError("gather: index out of range");
    out.data()[i] = in[j];
  }
  return Var::from_op(std::move(out), {a}, [source](detail::Node& self) {
    auto& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    for (Index i = 0; i < self.grad.size(); ++i) g.data()[(*source)[static_cast<std::size_t>(i)]] += self.grad.data()[i];
    p.accumulate(g);
  });
}

}  // namespace jsccf::nn
