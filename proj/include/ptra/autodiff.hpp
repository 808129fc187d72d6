#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ptra::nn {

using Matrix = Eigen::MatrixXd;

/// Reverse-mode recording tape over dense matrices.
///
/// Every operation appends a node holding its forward value. `backward`
/// sweeps the nodes in reverse and accumulates gradients for parameter
/// leaves into caller-owned buffers, indexed by the slot given to
/// `parameter`. A tape is single-threaded; use one per worker.
class Tape {
 public:
  struct Var {
    std::uint32_t id = 0;
  };

  Var constant(Matrix value);
  /// Learnable leaf. Its gradient is added into grads[slot] by backward().
  Var parameter(std::size_t slot, const Matrix& value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// Adds column vector `col` to every column of `m`.
  Var add_columnwise(Var m, Var col);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var rows(Var a, int start, int count);
  Var column(Var a, int j);
  Var hstack(std::span<const Var> columns);
  /// Mean over columns; result is a column vector.
  Var mean_columns(Var a);
  /// Row vector with entries where masked[j] is true replaced by `fill`.
  /// Masked entries are constants: no gradient flows back through them.
  Var mask_fill(Var row, const std::vector<bool>& masked, double fill);
  /// log softmax(row)[index] as a 1x1 value, max-subtracted.
  Var log_softmax_pick(Var row, int index);
  /// Fused LSTM cell. `gates` is the 4D pre-activation (input, forget, cell,
  /// output blocks); result is [h; c] stacked into a 2D x 1 column.
  Var lstm_cell(Var gates, Var c_prev);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep seeded with d(output)/d(seed var) = weight for every pair;
  /// each seed var must be 1x1. Gradients are added into `grads`.
  void backward(std::span<const std::pair<Var, double>> seeds, std::span<Matrix> grads);
  void backward(Var output, std::span<Matrix> grads) {
    const std::pair<Var, double> seed{output, 1.0};
    backward(std::span(&seed, 1), grads);
  }
  /// Partial sweep over nodes [stop, size()). Gradients flowing into earlier
  /// nodes are held there, so a shared prefix (e.g. one encoder feeding many
  /// decoder rollouts) can be swept once after truncating the suffixes.
  void backward_until(std::span<const std::pair<Var, double>> seeds, std::span<Matrix> grads,
                      std::size_t stop);

  /// Drops every node recorded at or after `size`.
  void truncate(std::size_t size) { nodes_.resize(std::min(size, nodes_.size())); }
  void clear() { nodes_.clear(); }

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kParameter,
    kMatmul,
    kAdd,
    kAddColumnwise,
    kMul,
    kScale,
    kTanh,
    kSigmoid,
    kRelu,
    kRows,
    kColumn,
    kHstack,
    kMeanColumns,
    kMaskFill,
    kLogSoftmaxPick,
    kLstmCell,
  };

  struct Node {
    Op op = Op::kConstant;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    int i0 = 0;
    int i1 = 0;
    double s = 0.0;
    std::size_t slot = 0;
    Matrix value;
    Matrix grad;
    Matrix aux;  // op-specific saved activations
    std::vector<std::uint32_t> inputs;
    std::vector<bool> mask;
  };

  Var push(Node node);
  Matrix& grad_of(std::uint32_t id);

  std::vector<Node> nodes_;
};

/// Softmax of a row vector with max subtraction.
Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& scores);

}  // namespace ptra::nn
