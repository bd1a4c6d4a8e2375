#pragma once

// Reverse-mode differentiation over an explicit tape.
//
// Every op appends one node holding its forward value and whatever it needs for
// the backward pass. Nodes are only ever appended, so inputs always precede the
// op that consumes them and backward() is a single reverse sweep. A tape is
// single-use: backward() may run once.

#include <cstdint>
#include <span>
#include <vector>

#include "roadbeh/tensor.hpp"

namespace roadbeh {

/// Row groups in CSR form: output row i gathers `members(i)` input rows.
struct RowGroups {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> indices;

  std::size_t rows() const { return offsets.size() - 1; }
  std::span<const std::uint32_t> members(std::size_t i) const {
    return {indices.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  void push_group(std::span<const std::uint32_t> group);
};

enum class OpKind : std::uint8_t {
  Constant,
  Variable,
  MatMul,
  Add,
  AddN,
  Scale,
  Relu,
  SoftmaxRows,
  ConcatCols,
  GatherRows,
  GroupMean,
  ScaleRowsByColumn,
  Sum,
  MaskedCrossEntropy,
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Records a value that receives no gradient.
  Tensor constant(Tensor value);
  /// Records a leaf whose gradient is accumulated by backward().
  Tensor variable(Tensor value);

  /// Like constant()/variable() but without duplicating the value: the
  /// returned handle is a placeholder, read its value through value().
  Tensor parameter(const Tensor& value, bool trainable);

  void backward(const Tensor& loss);
  bool consumed() const { return consumed_; }

  /// Gradient of the last backward() w.r.t. a recorded tensor (zeros if none flowed).
  Tensor grad(const Tensor& t) const;
  /// Writes the gradient into `out` (zeros if none flowed).
  void grad_into(const Tensor& t, std::span<double> out) const;
  const Tensor& value(const Tensor& t) const;

  std::size_t size() const { return nodes_.size(); }
  OpKind kind(NodeId id) const { return nodes_.at(id).kind; }

  /// Smallest |x| seen at the input of any ReLU (infinity if none).
  double min_relu_input_abs() const { return min_relu_abs_; }

  // Op entry points live as free functions below; they use these hooks.
  struct Node {
    OpKind kind = OpKind::Constant;
    bool needs_grad = false;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;
    // op payloads
    std::vector<std::uint32_t> indices;  // gather rows, labels, concat widths
    std::vector<char> mask;              // cross-entropy mask
    std::vector<double> saved;           // cross-entropy probabilities
    const RowGroups* groups = nullptr;   // group mean (caller keeps alive)
    std::size_t column = 0;              // scale-by-column
    double scalar = 0.0;                 // scale factor
  };

  NodeId input(const Tensor& t);
  Tensor push(Node node);
  const Node& node(NodeId id) const { return nodes_.at(id); }
  void note_relu_input(double abs_value) {
    if (abs_value < min_relu_abs_) min_relu_abs_ = abs_value;
  }

 private:
  void backward_node(Node& n);
  Tensor& grad_of(NodeId id);

  std::vector<Node> nodes_;
  bool consumed_ = false;
  double min_relu_abs_ = 1e300;
};

// C = A·B
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
/// Elementwise sum of equally shaped tensors, accumulated left to right.
Tensor add_n(Tape& tape, std::span<const Tensor> parts);
Tensor scale(Tape& tape, const Tensor& x, double factor);
/// max(0, x); subgradient 0 at exactly 0.
Tensor relu(Tape& tape, const Tensor& x);
Tensor softmax_rows(Tape& tape, const Tensor& x);
Tensor concat_cols(Tape& tape, std::span<const Tensor> parts);
/// Row i of the result is table row `index[i]`.
Tensor gather_rows(Tape& tape, const Tensor& table, std::span<const std::uint32_t> index);
/// Row i is the mean of x over rows `groups.members(i)`, or zero when the group is
/// empty. `groups` must outlive the tape.
Tensor group_mean(Tape& tape, const Tensor& x, const RowGroups& groups);
/// Row i of x scaled by weights(i, column).
Tensor scale_rows_by_column(Tape& tape, const Tensor& x, const Tensor& weights,
                            std::size_t column);
/// 1×1 sum of all entries.
Tensor sum(Tape& tape, const Tensor& x);
/// Mean over rows with mask[i] != 0 of -log softmax(logits[i])[labels[i]].
/// Throws std::invalid_argument("no supervised nodes") for an empty mask.
Tensor masked_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels,
                            std::span<const char> mask);

}  // namespace roadbeh
