#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qrun/errors.hpp"

namespace qrun::ad {

// Row-major throughout: flat buffers index as value[r * cols + c].
using MatRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapC = Eigen::Map<const MatRM>;

enum class Op : std::uint8_t {
  leaf,
  matmul,
  transpose,
  add,
  sub,
  mul,
  div,
  scale,
  neg,
  sin,
  cos,
  tanh,
  relu,
  exp,
  log,
  add_bias,
  sum,
  mean,
  reshape,
  interleave_cols,
  concat_cols,
  sincos_interleave,
};

struct Node {
  Op op = Op::leaf;
  int a = -1;  // first input id
  int b = -1;  // second input id
  std::vector<int> dims;  // rank 1 or 2
  Eigen::ArrayXd value;   // flat, row-major
  double aux = 0.0;       // scale factor
  bool trainable = false;
  std::string name;  // leaves only, for diagnostics

  Eigen::Index rows() const { return dims[0]; }
  Eigen::Index cols() const { return dims.size() == 2 ? dims[1] : 1; }
};

class Tape;

// Cheap handle into a tape. Valid until the tape is reset or destroyed.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  const Node& node() const;
  const std::vector<int>& dims() const { return node().dims; }
  Eigen::Index rows() const { return node().rows(); }
  Eigen::Index cols() const { return node().cols(); }
  Eigen::Index size() const { return node().value.size(); }
  const Eigen::ArrayXd& value() const { return node().value; }
  // Value of a size-1 tensor.
  double scalar() const;
};

class Tape {
 public:
  Tensor leaf(std::vector<int> dims, Eigen::ArrayXd value, bool trainable,
              std::string name = "");
  // Any matrix expression; evaluated and flattened row-major.
  template <typename Derived>
  Tensor leaf(std::vector<int> dims, const Eigen::MatrixBase<Derived>& value,
              bool trainable, std::string name = "") {
    MatRM m = value;
    Eigen::ArrayXd flat = Eigen::Map<const Eigen::ArrayXd>(m.data(), m.size());
    return leaf(std::move(dims), std::move(flat), trainable, std::move(name));
  }
  // Non-trainable scalar.
  Tensor constant(double v);
  // Non-trainable matrix.
  Tensor constant(const MatRM& m);

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  // Drops every node. Outstanding Tensor handles become invalid.
  void reset() { nodes_.clear(); }

  Tensor emit(Node n);

 private:
  std::vector<Node> nodes_;
};

// Adjoints of every leaf reachable from the loss; untouched leaves read as
// zeros. Produced by backward(), consumed by the optimizer.
class Gradients {
 public:
  const Eigen::ArrayXd& at(const Tensor& t) const;
  bool has(const Tensor& t) const;

  std::vector<Eigen::ArrayXd> adjoints;  // indexed by node id; empty = untouched
  const Tape* tape = nullptr;
};

// Reverse-mode sweep from a size-1 loss node.
Gradients backward(const Tensor& loss);

// --- ops ------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor neg(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// m: [r, c], bias: [c]; adds bias to every row.
Tensor add_bias(const Tensor& m, const Tensor& bias);
// Sequential left-to-right accumulation; result is [1].
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor reshape(const Tensor& a, std::vector<int> dims);
// a, b: [r, c] each; result [r, 2c] with columns a0 b0 a1 b1 ...
Tensor interleave_cols(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// [R,k] -> [R,2k] with column pairs (cos aⱼ, sin aⱼ). One trig pass forward;
// backward reads the stored values instead of recomputing sin/cos.
Tensor sincos_interleave(const Tensor& a);

// --- named parameter blocks -------------------------------------------------

struct Param {
  std::string name;
  std::vector<int> dims;
  Eigen::ArrayXd value;  // flat, row-major
};

// Ordered collection of named parameter blocks. Order is the binding and
// optimizer-state order, so it must stay stable across a model's lifetime.
class ParamSet {
 public:
  Param& add(std::string name, std::vector<int> dims, Eigen::ArrayXd value);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  int index_of(const std::string& name) const;  // -1 if absent

  std::size_t size() const { return items_.size(); }
  Param& operator[](std::size_t i) { return items_[i]; }
  const Param& operator[](std::size_t i) const { return items_[i]; }
  long scalar_count() const;

 private:
  std::vector<Param> items_;
};

// Trainable leaves for one ParamSet on one tape, in set order.
struct BoundParams {
  std::vector<Tensor> leaves;
  const ParamSet* set = nullptr;

  const Tensor& at(const std::string& name) const;
};

BoundParams bind(Tape& tape, const ParamSet& params);

inline bool all_finite(const Eigen::ArrayXd& a) { return a.isFinite().all(); }

}  // namespace qrun::ad
