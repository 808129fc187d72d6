#include "ptra/autodiff.hpp"

#include <cassert>
#include <cmath>

namespace ptra::nn {

namespace {

Matrix sigmoid_of(const Matrix& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

Tape::Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Matrix& Tape::grad_of(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tape::Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::Var Tape::parameter(std::size_t slot, const Matrix& value) {
  Node n;
  n.op = Op::kParameter;
  n.slot = slot;
  n.value = value;
  return push(std::move(n));
}

Tape::Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatmul;
  n.a = a.id;
  n.b = b.id;
  n.value.noalias() = value(a) * value(b);
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a) + value(b);
  return push(std::move(n));
}

Tape::Var Tape::add_columnwise(Var m, Var col) {
  Node n;
  n.op = Op::kAddColumnwise;
  n.a = m.id;
  n.b = col.id;
  n.value = value(m).colwise() + value(col).col(0);
  return push(std::move(n));
}

Tape::Var Tape::mul(Var a, Var b) {
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a).cwiseProduct(value(b));
  return push(std::move(n));
}

Tape::Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.s = s;
  n.value = value(a) * s;
  return push(std::move(n));
}

Tape::Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.value = value(a).array().tanh().matrix();
  return push(std::move(n));
}

Tape::Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.value = sigmoid_of(value(a));
  return push(std::move(n));
}

Tape::Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.value = value(a).cwiseMax(0.0);
  return push(std::move(n));
}

Tape::Var Tape::rows(Var a, int start, int count) {
  Node n;
  n.op = Op::kRows;
  n.a = a.id;
  n.i0 = start;
  n.i1 = count;
  n.value = value(a).middleRows(start, count);
  return push(std::move(n));
}

Tape::Var Tape::column(Var a, int j) {
  Node n;
  n.op = Op::kColumn;
  n.a = a.id;
  n.i0 = j;
  n.value = value(a).col(j);
  return push(std::move(n));
}

Tape::Var Tape::hstack(std::span<const Var> columns) {
  assert(!columns.empty());
  Node n;
  n.op = Op::kHstack;
  Eigen::Index cols = 0;
  for (Var c : columns) cols += value(c).cols();
  n.value.resize(value(columns.front()).rows(), cols);
  Eigen::Index at = 0;
  for (Var c : columns) {
    const Matrix& v = value(c);
    n.value.middleCols(at, v.cols()) = v;
    at += v.cols();
    n.inputs.push_back(c.id);
  }
  return push(std::move(n));
}

Tape::Var Tape::mean_columns(Var a) {
  Node n;
  n.op = Op::kMeanColumns;
  n.a = a.id;
  n.value = value(a).rowwise().mean();
  return push(std::move(n));
}

Tape::Var Tape::mask_fill(Var row, const std::vector<bool>& masked, double fill) {
  Node n;
  n.op = Op::kMaskFill;
  n.a = row.id;
  n.value = value(row);
  assert(static_cast<Eigen::Index>(masked.size()) == n.value.cols());
  for (Eigen::Index j = 0; j < n.value.cols(); ++j)
    if (masked[static_cast<std::size_t>(j)]) n.value(0, j) = fill;
  n.mask = masked;
  return push(std::move(n));
}

Tape::Var Tape::log_softmax_pick(Var row, int index) {
  Node n;
  n.op = Op::kLogSoftmaxPick;
  n.a = row.id;
  n.i0 = index;
  const Eigen::RowVectorXd probs = softmax(value(row).row(0));
  const double max = value(row).maxCoeff();
  const double log_norm = std::log((value(row).array() - max).exp().sum()) + max;
  n.value = Matrix::Constant(1, 1, value(row)(0, index) - log_norm);
  n.aux = probs;
  return push(std::move(n));
}

Tape::Var Tape::lstm_cell(Var gates, Var c_prev) {
  const Matrix& z = value(gates);
  const Eigen::Index d = z.rows() / 4;
  Node n;
  n.op = Op::kLstmCell;
  n.a = gates.id;
  n.b = c_prev.id;
  n.aux.resize(5 * d, 1);
  auto i = n.aux.middleRows(0, d);
  auto f = n.aux.middleRows(d, d);
  auto g = n.aux.middleRows(2 * d, d);
  auto o = n.aux.middleRows(3 * d, d);
  auto tc = n.aux.middleRows(4 * d, d);
  i = sigmoid_of(z.middleRows(0, d));
  f = sigmoid_of(z.middleRows(d, d));
  g = z.middleRows(2 * d, d).array().tanh().matrix();
  o = sigmoid_of(z.middleRows(3 * d, d));
  n.value.resize(2 * d, 1);
  n.value.middleRows(d, d) = f.cwiseProduct(value(c_prev)) + i.cwiseProduct(g);
  tc = n.value.middleRows(d, d).array().tanh().matrix();
  n.value.middleRows(0, d) = o.cwiseProduct(tc);
  return push(std::move(n));
}

void Tape::backward(std::span<const std::pair<Var, double>> seeds, std::span<Matrix> grads) {
  backward_until(seeds, grads, 0);
}

void Tape::backward_until(std::span<const std::pair<Var, double>> seeds, std::span<Matrix> grads,
                          std::size_t stop) {
  for (const auto& [v, w] : seeds) {
    assert(value(v).size() == 1);
    grad_of(v.id)(0, 0) += w;
  }

  for (std::size_t k = nodes_.size(); k-- > stop;) {
    if (nodes_[k].grad.size() == 0) continue;
    // grad_of() never reallocates nodes_, so n and g stay valid below.
    Node& n = nodes_[k];
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParameter:
        grads[n.slot] += g;
        break;
      case Op::kMatmul:
        grad_of(n.a).noalias() += g * nodes_[n.b].value.transpose();
        grad_of(n.b).noalias() += nodes_[n.a].value.transpose() * g;
        break;
      case Op::kAdd:
        grad_of(n.a) += g;
        grad_of(n.b) += g;
        break;
      case Op::kAddColumnwise:
        grad_of(n.a) += g;
        grad_of(n.b) += g.rowwise().sum();
        break;
      case Op::kMul:
        grad_of(n.a) += g.cwiseProduct(nodes_[n.b].value);
        grad_of(n.b) += g.cwiseProduct(nodes_[n.a].value);
        break;
      case Op::kScale:
        grad_of(n.a) += g * n.s;
        break;
      case Op::kTanh:
        grad_of(n.a).array() += g.array() * (1.0 - n.value.array().square());
        break;
      case Op::kSigmoid:
        grad_of(n.a).array() += g.array() * n.value.array() * (1.0 - n.value.array());
        break;
      case Op::kRelu:
        grad_of(n.a).array() += (nodes_[n.a].value.array() > 0.0).select(g.array(), 0.0);
        break;
      case Op::kRows:
        grad_of(n.a).middleRows(n.i0, n.i1) += g;
        break;
      case Op::kColumn:
        grad_of(n.a).col(n.i0) += g;
        break;
      case Op::kHstack: {
        Eigen::Index at = 0;
        for (std::uint32_t in : n.inputs) {
          const Eigen::Index c = nodes_[in].value.cols();
          grad_of(in) += g.middleCols(at, c);
          at += c;
        }
        break;
      }
      case Op::kMeanColumns: {
        const Eigen::Index c = nodes_[n.a].value.cols();
        grad_of(n.a).colwise() += g.col(0) / static_cast<double>(c);
        break;
      }
      case Op::kMaskFill: {
        Matrix& ga = grad_of(n.a);
        for (Eigen::Index j = 0; j < g.cols(); ++j)
          if (!n.mask[static_cast<std::size_t>(j)]) ga(0, j) += g(0, j);
        break;
      }
      case Op::kLogSoftmaxPick: {
        const double gs = g(0, 0);
        Matrix& ga = grad_of(n.a);
        ga -= gs * n.aux;
        ga(0, n.i0) += gs;
        break;
      }
      case Op::kLstmCell: {
        const Eigen::Index d = n.aux.rows() / 5;
        const auto i = n.aux.middleRows(0, d).array();
        const auto f = n.aux.middleRows(d, d).array();
        const auto gg = n.aux.middleRows(2 * d, d).array();
        const auto o = n.aux.middleRows(3 * d, d).array();
        const auto tc = n.aux.middleRows(4 * d, d).array();
        const auto dh = g.middleRows(0, d).array();
        const Eigen::ArrayXd dc = g.middleRows(d, d).array() + dh * o * (1.0 - tc.square());
        const Eigen::ArrayXd c_prev = nodes_[n.b].value.array();

        Matrix& gz = grad_of(n.a);
        gz.middleRows(0, d).array() += dc * gg * i * (1.0 - i);
        gz.middleRows(d, d).array() += dc * c_prev * f * (1.0 - f);
        gz.middleRows(2 * d, d).array() += dc * i * (1.0 - gg.square());
        gz.middleRows(3 * d, d).array() += dh * tc * o * (1.0 - o);
        grad_of(n.b).array() += dc * f;
        break;
      }
    }
  }
}

Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& scores) {
  const double max = scores.maxCoeff();
  // Scalar exp: Eigen's packet exp clamps its input and never reaches an exact
  // zero, and masked items must get probability exactly 0.
  Eigen::RowVectorXd e = (scores.array() - max).unaryExpr([](double v) { return std::exp(v); });
  return e / e.sum();
}

}  // namespace ptra::nn
