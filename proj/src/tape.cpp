#include "roadbeh/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "roadbeh/kernels.hpp"

namespace roadbeh {

void RowGroups::push_group(std::span<const std::uint32_t> group) {
  indices.insert(indices.end(), group.begin(), group.end());
  offsets.push_back(static_cast<std::uint32_t>(indices.size()));
}

Tensor Tape::constant(Tensor value) {
  Node n;
  n.kind = OpKind::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Tensor Tape::variable(Tensor value) {
  Node n;
  n.kind = OpKind::Variable;
  n.needs_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Tensor Tape::parameter(const Tensor& value, bool trainable) {
  if (consumed_) throw std::logic_error("tape already consumed by backward()");
  Node n;
  n.kind = trainable ? OpKind::Variable : OpKind::Constant;
  n.needs_grad = trainable;
  n.value = value;
  nodes_.push_back(std::move(n));
  Tensor out = Tensor::placeholder(value.rows(), value.cols());
  out.set_node(static_cast<NodeId>(nodes_.size() - 1));
  return out;
}

NodeId Tape::input(const Tensor& t) {
  if (auto id = t.node()) {
    if (*id < nodes_.size() && nodes_[*id].value.same_shape(t)) return *id;
    throw std::logic_error("tensor node " + std::to_string(*id) + " does not belong to this tape");
  }
  Tensor copy = t;
  return *constant(std::move(copy)).node();
}

Tensor Tape::push(Node node) {
  if (consumed_) throw std::logic_error("tape already consumed by backward()");
  for (NodeId in : node.inputs) node.needs_grad = node.needs_grad || nodes_[in].needs_grad;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(node));
  Tensor out = nodes_.back().value;
  out.set_node(id);
  return out;
}

const Tensor& Tape::value(const Tensor& t) const {
  const auto id = t.node();
  if (!id || *id >= nodes_.size()) throw std::logic_error("tensor is not recorded on this tape");
  return nodes_[*id].value;
}

Tensor Tape::grad(const Tensor& t) const {
  const auto id = t.node();
  if (!id || *id >= nodes_.size()) throw std::logic_error("tensor is not recorded on this tape");
  const Node& n = nodes_[*id];
  if (n.grad.size() == 0) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::grad_into(const Tensor& t, std::span<double> out) const {
  const auto id = t.node();
  if (!id || *id >= nodes_.size()) throw std::logic_error("tensor is not recorded on this tape");
  const Node& n = nodes_[*id];
  if (out.size() != n.value.size()) throw ShapeError("grad_into: destination size mismatch");
  if (n.grad.size() == 0) std::fill(out.begin(), out.end(), 0.0);
  else std::copy(n.grad.data().begin(), n.grad.data().end(), out.begin());
}

Tensor& Tape::grad_of(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw std::logic_error("tape already consumed by backward()");
  const auto id = loss.node();
  if (!id || *id >= nodes_.size()) throw std::logic_error("loss is not recorded on this tape");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward() needs a 1x1 loss, got " + loss.shape_string());
  }
  consumed_ = true;
  grad_of(*id)(0, 0) = 1.0;
  for (std::size_t i = *id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    backward_node(n);
  }
}

void Tape::backward_node(Node& n) {
  const Tensor& g = n.grad;
  switch (n.kind) {
    case OpKind::Constant:
    case OpKind::Variable:
      break;
    case OpKind::MatMul: {
      const Node& a = nodes_[n.inputs[0]];
      const Node& b = nodes_[n.inputs[1]];
      const std::size_t m = a.value.rows(), k = a.value.cols(), cols = b.value.cols();
      if (a.needs_grad)
        kernels::gemm_nt(m, k, cols, g.data(), b.value.data(), grad_of(n.inputs[0]).data());
      if (nodes_[n.inputs[1]].needs_grad)
        kernels::gemm_tn(k, cols, m, nodes_[n.inputs[0]].value.data(), g.data(),
                         grad_of(n.inputs[1]).data());
      break;
    }
    case OpKind::Add:
    case OpKind::AddN:
      for (NodeId in : n.inputs) {
        if (!nodes_[in].needs_grad) continue;
        auto dst = grad_of(in).data();
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g.data()[j];
      }
      break;
    case OpKind::Scale: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      auto dst = grad_of(n.inputs[0]).data();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += n.scalar * g.data()[j];
      break;
    }
    case OpKind::Relu: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      const auto x = nodes_[n.inputs[0]].value.data();
      auto dst = grad_of(n.inputs[0]).data();
      for (std::size_t j = 0; j < dst.size(); ++j)
        if (x[j] > 0.0) dst[j] += g.data()[j];
      break;
    }
    case OpKind::SoftmaxRows: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      Tensor& dx = grad_of(n.inputs[0]);
      const Tensor& y = n.value;
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) dx(r, c) += y(r, c) * (g(r, c) - dot);
      }
      break;
    }
    case OpKind::ConcatCols: {
      std::size_t offset = 0;
      for (NodeId in : n.inputs) {
        const std::size_t w = nodes_[in].value.cols();
        if (nodes_[in].needs_grad) {
          Tensor& dst = grad_of(in);
          for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < w; ++c) dst(r, c) += g(r, offset + c);
        }
        offset += w;
      }
      break;
    }
    case OpKind::GatherRows: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      Tensor& dst = grad_of(n.inputs[0]);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto out = dst.row(n.indices[r]);
        auto in = g.row(r);
        for (std::size_t c = 0; c < in.size(); ++c) out[c] += in[c];
      }
      break;
    }
    case OpKind::GroupMean: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      Tensor& dst = grad_of(n.inputs[0]);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        const auto members = n.groups->members(r);
        if (members.empty()) continue;
        const double w = 1.0 / static_cast<double>(members.size());
        const auto in = g.row(r);
        for (std::uint32_t j : members) {
          auto out = dst.row(j);
          for (std::size_t c = 0; c < in.size(); ++c) out[c] += w * in[c];
        }
      }
      break;
    }
    case OpKind::ScaleRowsByColumn: {
      const NodeId xi = n.inputs[0], wi = n.inputs[1];
      const Tensor& x = nodes_[xi].value;
      const Tensor& w = nodes_[wi].value;
      if (nodes_[xi].needs_grad) {
        Tensor& dx = grad_of(xi);
        for (std::size_t r = 0; r < x.rows(); ++r) {
          const double s = w(r, n.column);
          for (std::size_t c = 0; c < x.cols(); ++c) dx(r, c) += s * g(r, c);
        }
      }
      if (nodes_[wi].needs_grad) {
        Tensor& dw = grad_of(wi);
        for (std::size_t r = 0; r < x.rows(); ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < x.cols(); ++c) dot += g(r, c) * x(r, c);
          dw(r, n.column) += dot;
        }
      }
      break;
    }
    case OpKind::Sum: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      auto dst = grad_of(n.inputs[0]).data();
      for (double& v : dst) v += g(0, 0);
      break;
    }
    case OpKind::MaskedCrossEntropy: {
      if (!nodes_[n.inputs[0]].needs_grad) break;
      Tensor& dx = grad_of(n.inputs[0]);
      const std::size_t classes = dx.cols();
      std::size_t supervised = 0;
      for (char m : n.mask) supervised += m != 0;
      const double w = g(0, 0) / static_cast<double>(supervised);
      for (std::size_t r = 0; r < dx.rows(); ++r) {
        if (!n.mask[r]) continue;
        for (std::size_t c = 0; c < classes; ++c) {
          const double target = c == n.indices[r] ? 1.0 : 0.0;
          dx(r, c) += w * (n.saved[r * classes + c] - target);
        }
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + a.shape_string() + " x " +
                     b.shape_string() + ")");
  }
  Tape::Node n;
  n.kind = OpKind::MatMul;
  n.inputs = {tape.input(a), tape.input(b)};
  const Tensor& av = tape.node(n.inputs[0]).value;
  const Tensor& bv = tape.node(n.inputs[1]).value;
  n.value = Tensor(a.rows(), b.cols());
  kernels::gemm_nn(a.rows(), b.cols(), a.cols(), av.data(), bv.data(), n.value.data());
  return tape.push(std::move(n));
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: shapes " + a.shape_string() + " and " + b.shape_string());
  }
  Tape::Node n;
  n.kind = OpKind::Add;
  n.inputs = {tape.input(a), tape.input(b)};
  n.value = tape.node(n.inputs[0]).value;
  auto out = n.value.data();
  const auto bv = tape.node(n.inputs[1]).value.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape.push(std::move(n));
}

Tensor add_n(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("add_n: no inputs");
  Tape::Node n;
  n.kind = OpKind::AddN;
  for (const Tensor& p : parts) {
    if (!p.same_shape(parts[0])) {
      throw ShapeError("add_n: shapes " + parts[0].shape_string() + " and " + p.shape_string());
    }
    n.inputs.push_back(tape.input(p));
  }
  n.value = tape.node(n.inputs[0]).value;
  auto out = n.value.data();
  for (std::size_t k = 1; k < n.inputs.size(); ++k) {
    const auto v = tape.node(n.inputs[k]).value.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  return tape.push(std::move(n));
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  Tape::Node n;
  n.kind = OpKind::Scale;
  n.inputs = {tape.input(x)};
  n.scalar = factor;
  n.value = tape.node(n.inputs[0]).value;
  for (double& v : n.value.data()) v *= factor;
  return tape.push(std::move(n));
}

Tensor relu(Tape& tape, const Tensor& x) {
  Tape::Node n;
  n.kind = OpKind::Relu;
  n.inputs = {tape.input(x)};
  n.value = tape.node(n.inputs[0]).value;
  double smallest = 1e300;
  for (double& v : n.value.data()) {
    smallest = std::min(smallest, std::abs(v));
    if (!(v > 0.0)) v = 0.0;
  }
  tape.note_relu_input(smallest);
  return tape.push(std::move(n));
}

Tensor softmax_rows(Tape& tape, const Tensor& x) {
  Tape::Node n;
  n.kind = OpKind::SoftmaxRows;
  n.inputs = {tape.input(x)};
  n.value = tape.node(n.inputs[0]).value;
  Tensor& y = n.value;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return tape.push(std::move(n));
}

Tensor concat_cols(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t width = 0;
  Tape::Node n;
  n.kind = OpKind::ConcatCols;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row counts differ (" + parts[0].shape_string() + " vs " +
                       p.shape_string() + ")");
    }
    width += p.cols();
    n.inputs.push_back(tape.input(p));
  }
  n.value = Tensor(rows, width);
  std::size_t offset = 0;
  for (NodeId in : n.inputs) {
    const Tensor& v = tape.node(in).value;
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.row(r).begin(), v.row(r).end(), n.value.row(r).begin() + offset);
    offset += v.cols();
  }
  return tape.push(std::move(n));
}

Tensor gather_rows(Tape& tape, const Tensor& table, std::span<const std::uint32_t> index) {
  Tape::Node n;
  n.kind = OpKind::GatherRows;
  n.inputs = {tape.input(table)};
  const Tensor& t = tape.node(n.inputs[0]).value;
  n.value = Tensor(index.size(), t.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= t.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(index[r]) + " outside table " +
                       t.shape_string());
    }
    std::copy(t.row(index[r]).begin(), t.row(index[r]).end(), n.value.row(r).begin());
  }
  n.indices.assign(index.begin(), index.end());
  return tape.push(std::move(n));
}

Tensor group_mean(Tape& tape, const Tensor& x, const RowGroups& groups) {
  Tape::Node n;
  n.kind = OpKind::GroupMean;
  n.inputs = {tape.input(x)};
  n.groups = &groups;
  const Tensor& xv = tape.node(n.inputs[0]).value;
  n.value = Tensor(groups.rows(), xv.cols());
  for (std::size_t r = 0; r < groups.rows(); ++r) {
    const auto members = groups.members(r);
    if (members.empty()) continue;
    auto out = n.value.row(r);
    for (std::uint32_t j : members) {
      if (j >= xv.rows()) throw ShapeError("group_mean: member row outside " + xv.shape_string());
      const auto in = xv.row(j);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += in[c];
    }
    const double w = 1.0 / static_cast<double>(members.size());
    for (double& v : out) v *= w;
  }
  return tape.push(std::move(n));
}

Tensor scale_rows_by_column(Tape& tape, const Tensor& x, const Tensor& weights,
                            std::size_t column) {
  if (weights.rows() != x.rows() || column >= weights.cols()) {
    throw ShapeError("scale_rows_by_column: x " + x.shape_string() + ", weights " +
                     weights.shape_string() + ", column " + std::to_string(column));
  }
  Tape::Node n;
  n.kind = OpKind::ScaleRowsByColumn;
  n.inputs = {tape.input(x), tape.input(weights)};
  n.column = column;
  n.value = tape.node(n.inputs[0]).value;
  const Tensor& w = tape.node(n.inputs[1]).value;
  for (std::size_t r = 0; r < n.value.rows(); ++r)
    for (double& v : n.value.row(r)) v *= w(r, column);
  return tape.push(std::move(n));
}

Tensor sum(Tape& tape, const Tensor& x) {
  Tape::Node n;
  n.kind = OpKind::Sum;
  n.inputs = {tape.input(x)};
  double total = 0.0;
  for (double v : tape.node(n.inputs[0]).value.data()) total += v;
  n.value = Tensor(1, 1, total);
  return tape.push(std::move(n));
}

Tensor masked_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels,
                            std::span<const char> mask) {
  if (labels.size() != logits.rows() || mask.size() != logits.rows()) {
    throw ShapeError("masked_cross_entropy: logits " + logits.shape_string() + " with " +
                     std::to_string(labels.size()) + " labels and " +
                     std::to_string(mask.size()) + " mask entries");
  }
  Tape::Node n;
  n.kind = OpKind::MaskedCrossEntropy;
  n.inputs = {tape.input(logits)};
  const Tensor& x = tape.node(n.inputs[0]).value;
  const std::size_t classes = x.cols();
  n.mask.assign(mask.begin(), mask.end());
  n.indices.assign(x.rows(), 0);
  n.saved.assign(x.size(), 0.0);
  double total = 0.0;
  std::size_t supervised = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (!mask[r]) continue;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
      throw std::invalid_argument("masked_cross_entropy: label " + std::to_string(labels[r]) +
                                  " out of range for row " + std::to_string(r));
    }
    const auto row = x.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - peak);
    const double log_z = peak + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) n.saved[r * classes + c] = std::exp(row[c] - log_z);
    n.indices[r] = static_cast<std::uint32_t>(labels[r]);
    total += log_z - row[static_cast<std::size_t>(labels[r])];
    ++supervised;
  }
  if (supervised == 0) throw std::invalid_argument("no supervised nodes");
  n.value = Tensor(1, 1, total / static_cast<double>(supervised));
  return tape.push(std::move(n));
}

}  // namespace roadbeh
