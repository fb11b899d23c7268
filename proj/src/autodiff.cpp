#include "qrun/autodiff.hpp"

#include <cmath>
#include <utility>

namespace qrun::ad {

namespace {

long long shape_size(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 2)
    throw ShapeError("tensor rank must be 1 or 2");
  long long n = 1;
  for (int d : dims) {
    if (d < 0) throw ShapeError("negative extent in tensor shape");
    n *= d;
  }
  return n;
}

std::string shape_str(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

const Node& input(const Tensor& t) {
  if (t.tape == nullptr || t.id < 0 ||
      static_cast<std::size_t>(t.id) >= t.tape->size())
    throw ContractError("tensor handle does not point into a live tape");
  return t.tape->node(t.id);
}

Tape& same_tape(const Tensor& a, const Tensor& b) {
  input(a);
  input(b);
  if (a.tape != b.tape)
    throw ContractError("operands live on different tapes");
  return *a.tape;
}

void require_rank2(const Node& n, const char* what) {
  if (n.dims.size() != 2)
    throw ShapeError(std::string(what) + ": operand must be rank 2, got " +
                     shape_str(n.dims));
}

void require_same_shape(const Node& x, const Node& y, const char* what) {
  if (x.dims != y.dims)
    throw ShapeError(std::string(what) + ": operand shapes differ, " +
                     shape_str(x.dims) + " vs " + shape_str(y.dims));
}

MapC mat(const Node& n) { return MapC(n.value.data(), n.rows(), n.cols()); }

Tensor unary(Op op, const Tensor& a, Eigen::ArrayXd value) {
  Node n;
  n.op = op;
  n.a = a.id;
  n.dims = input(a).dims;
  n.value = std::move(value);
  return a.tape->emit(std::move(n));
}

}  // namespace

const Node& Tensor::node() const { return input(*this); }

double Tensor::scalar() const {
  const Node& n = node();
  if (n.value.size() != 1)
    throw ShapeError("scalar(): tensor has " + std::to_string(n.value.size()) +
                     " elements");
  return n.value[0];
}

Tensor Tape::emit(Node n) {
  nodes_.push_back(std::move(n));
  return Tensor{this, static_cast<int>(nodes_.size() - 1)};
}

Tensor Tape::leaf(std::vector<int> dims, Eigen::ArrayXd value, bool trainable,
                  std::string name) {
  if (shape_size(dims) != value.size())
    throw ShapeError("leaf '" + name + "': shape " + shape_str(dims) +
                     " does not hold " + std::to_string(value.size()) +
                     " values");
  Node n;
  n.dims = std::move(dims);
  n.value = std::move(value);
  n.trainable = trainable;
  n.name = std::move(name);
  return emit(std::move(n));
}

Tensor Tape::constant(double v) {
  Eigen::ArrayXd a(1);
  a[0] = v;
  return leaf({1}, std::move(a), false);
}

Tensor Tape::constant(const MatRM& m) {
  return leaf({static_cast<int>(m.rows()), static_cast<int>(m.cols())}, m,
              false);
}

// --- ops --------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_rank2(na, "matmul");
  require_rank2(nb, "matmul");
  if (na.dims[1] != nb.dims[0])
    throw ShapeError("matmul: inner extents differ, " + shape_str(na.dims) +
                     " x " + shape_str(nb.dims));
  Node n;
  n.op = Op::matmul;
  n.a = a.id;
  n.b = b.id;
  n.dims = {na.dims[0], nb.dims[1]};
  n.value.resize(static_cast<Eigen::Index>(na.dims[0]) * nb.dims[1]);
  MapM(n.value.data(), na.rows(), nb.cols()).noalias() = mat(na) * mat(nb);
  return t.emit(std::move(n));
}

Tensor transpose(const Tensor& a) {
  const Node& na = input(a);
  require_rank2(na, "transpose");
  Node n;
  n.op = Op::transpose;
  n.a = a.id;
  n.dims = {na.dims[1], na.dims[0]};
  n.value.resize(na.value.size());
  MapM(n.value.data(), na.cols(), na.rows()) = mat(na).transpose();
  return a.tape->emit(std::move(n));
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_same_shape(na, nb, "add");
  Node n;
  n.op = Op::add;
  n.a = a.id;
  n.b = b.id;
  n.dims = na.dims;
  n.value = na.value + nb.value;
  return t.emit(std::move(n));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_same_shape(na, nb, "sub");
  Node n;
  n.op = Op::sub;
  n.a = a.id;
  n.b = b.id;
  n.dims = na.dims;
  n.value = na.value - nb.value;
  return t.emit(std::move(n));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_same_shape(na, nb, "mul");
  Node n;
  n.op = Op::mul;
  n.a = a.id;
  n.b = b.id;
  n.dims = na.dims;
  n.value = na.value * nb.value;
  return t.emit(std::move(n));
}

Tensor div(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_same_shape(na, nb, "div");
  Node n;
  n.op = Op::div;
  n.a = a.id;
  n.b = b.id;
  n.dims = na.dims;
  n.value = na.value / nb.value;
  return t.emit(std::move(n));
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = unary(Op::scale, a, input(a).value * s);
  a.tape->node(out.id).aux = s;
  return out;
}

Tensor neg(const Tensor& a) { return unary(Op::neg, a, -input(a).value); }

Tensor sin(const Tensor& a) { return unary(Op::sin, a, input(a).value.sin()); }

Tensor cos(const Tensor& a) { return unary(Op::cos, a, input(a).value.cos()); }

Tensor tanh(const Tensor& a) {
  // exp identity: vectorized pexp beats scalar std::tanh by an order of
  // magnitude and stays within 2 ulp; both tails saturate to exactly +/-1.
  const Eigen::ArrayXd& v = input(a).value;
  return unary(Op::tanh, a, 1.0 - 2.0 / ((2.0 * v).exp() + 1.0));
}

Tensor relu(const Tensor& a) {
  return unary(Op::relu, a, input(a).value.max(0.0));
}

Tensor exp(const Tensor& a) { return unary(Op::exp, a, input(a).value.exp()); }

Tensor log(const Tensor& a) { return unary(Op::log, a, input(a).value.log()); }

Tensor add_bias(const Tensor& m, const Tensor& bias) {
  Tape& t = same_tape(m, bias);
  const Node &nm = t.node(m.id), &nb = t.node(bias.id);
  require_rank2(nm, "add_bias");
  if (nb.dims.size() != 1 || nb.dims[0] != nm.dims[1])
    throw ShapeError("add_bias: bias " + shape_str(nb.dims) +
                     " does not match matrix " + shape_str(nm.dims));
  Node n;
  n.op = Op::add_bias;
  n.a = m.id;
  n.b = bias.id;
  n.dims = nm.dims;
  n.value.resize(nm.value.size());
  MapM out(n.value.data(), nm.rows(), nm.cols());
  out = mat(nm);
  out.rowwise() +=
      Eigen::Map<const Eigen::RowVectorXd>(nb.value.data(), nb.value.size());
  return t.emit(std::move(n));
}

Tensor sum(const Tensor& a) {
  const Node& na = input(a);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < na.value.size(); ++i) acc += na.value[i];
  Node n;
  n.op = Op::sum;
  n.a = a.id;
  n.dims = {1};
  n.value.resize(1);
  n.value[0] = acc;
  return a.tape->emit(std::move(n));
}

Tensor mean(const Tensor& a) {
  const Node& na = input(a);
  if (na.value.size() == 0) throw ShapeError("mean: empty tensor");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < na.value.size(); ++i) acc += na.value[i];
  Node n;
  n.op = Op::mean;
  n.a = a.id;
  n.dims = {1};
  n.value.resize(1);
  n.value[0] = acc / static_cast<double>(na.value.size());
  return a.tape->emit(std::move(n));
}

Tensor reshape(const Tensor& a, std::vector<int> dims) {
  const Node& na = input(a);
  if (shape_size(dims) != na.value.size())
    throw ShapeError("reshape: " + shape_str(na.dims) + " to " +
                     shape_str(dims) + " changes element count");
  Node n;
  n.op = Op::reshape;
  n.a = a.id;
  n.dims = std::move(dims);
  n.value = na.value;
  return a.tape->emit(std::move(n));
}

Tensor interleave_cols(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_rank2(na, "interleave_cols");
  require_same_shape(na, nb, "interleave_cols");
  const Eigen::Index r = na.rows(), c = na.cols();
  Node n;
  n.op = Op::interleave_cols;
  n.a = a.id;
  n.b = b.id;
  n.dims = {na.dims[0], 2 * na.dims[1]};
  n.value.resize(2 * na.value.size());
  MapM out(n.value.data(), r, 2 * c);
  MapC ma = mat(na), mb = mat(nb);
  for (Eigen::Index j = 0; j < c; ++j) {
    out.col(2 * j) = ma.col(j);
    out.col(2 * j + 1) = mb.col(j);
  }
  return t.emit(std::move(n));
}

Tensor sincos_interleave(const Tensor& a) {
  const Node& na = input(a);
  require_rank2(na, "sincos_interleave");
  Node n;
  n.op = Op::sincos_interleave;
  n.a = a.id;
  n.dims = {na.dims[0], 2 * na.dims[1]};
  n.value.resize(2 * na.value.size());
  // Row-major: source element i lands at output columns 2j, 2j+1 = flat 2i.
  for (Eigen::Index i = 0; i < na.value.size(); ++i) {
#if defined(__GLIBC__)
    ::sincos(na.value[i], &n.value[2 * i + 1], &n.value[2 * i]);
#else
    n.value[2 * i] = std::cos(na.value[i]);
    n.value[2 * i + 1] = std::sin(na.value[i]);
#endif
  }
  return a.tape->emit(std::move(n));
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  const Node &na = t.node(a.id), &nb = t.node(b.id);
  require_rank2(na, "concat_cols");
  require_rank2(nb, "concat_cols");
  if (na.dims[0] != nb.dims[0])
    throw ShapeError("concat_cols: row counts differ, " + shape_str(na.dims) +
                     " vs " + shape_str(nb.dims));
  Node n;
  n.op = Op::concat_cols;
  n.a = a.id;
  n.b = b.id;
  n.dims = {na.dims[0], na.dims[1] + nb.dims[1]};
  n.value.resize(na.value.size() + nb.value.size());
  MapM out(n.value.data(), na.rows(), na.cols() + nb.cols());
  out.leftCols(na.cols()) = mat(na);
  out.rightCols(nb.cols()) = mat(nb);
  return t.emit(std::move(n));
}

// --- backward ---------------------------------------------------------------

namespace {

struct Sweep {
  const Tape& tape;
  std::vector<Eigen::ArrayXd>& adj;

  Eigen::ArrayXd& grab(int id) {
    auto& g = adj[static_cast<std::size_t>(id)];
    if (g.size() == 0)
      g = Eigen::ArrayXd::Zero(tape.node(id).value.size());
    return g;
  }

  MapM gmat(int id) {
    const Node& n = tape.node(id);
    return MapM(grab(id).data(), n.rows(), n.cols());
  }
};

}  // namespace

Gradients backward(const Tensor& loss) {
  const Node& ln = input(loss);
  if (ln.value.size() != 1)
    throw ShapeError("backward: loss must have exactly one element, got " +
                     shape_str(ln.dims));
  if (!std::isfinite(ln.value[0]))
    throw NumericError("backward: loss is not finite");

  const Tape& tape = *loss.tape;
  Gradients g;
  g.tape = &tape;
  g.adjoints.assign(tape.size(), Eigen::ArrayXd());
  Sweep s{tape, g.adjoints};
  s.grab(loss.id)[0] = 1.0;

  // Construction order is topological, so one reverse pass suffices.
  for (int i = loss.id; i >= 0; --i) {
    const Eigen::ArrayXd& gi = g.adjoints[static_cast<std::size_t>(i)];
    if (gi.size() == 0) continue;
    const Node& n = tape.node(i);
    const Node* na = n.a >= 0 ? &tape.node(n.a) : nullptr;
    const Node* nb = n.b >= 0 ? &tape.node(n.b) : nullptr;
    MapC gm(gi.data(), n.rows(), n.cols());
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::matmul:
        s.gmat(n.a).noalias() += gm * mat(*nb).transpose();
        s.gmat(n.b).noalias() += mat(*na).transpose() * gm;
        break;
      case Op::transpose:
        s.gmat(n.a) += gm.transpose();
        break;
      case Op::add:
        s.grab(n.a) += gi;
        s.grab(n.b) += gi;
        break;
      case Op::sub:
        s.grab(n.a) += gi;
        s.grab(n.b) -= gi;
        break;
      case Op::mul:
        s.grab(n.a) += gi * nb->value;
        s.grab(n.b) += gi * na->value;
        break;
      case Op::div:
        s.grab(n.a) += gi / nb->value;
        s.grab(n.b) -= gi * na->value / (nb->value * nb->value);
        break;
      case Op::scale:
        s.grab(n.a) += gi * n.aux;
        break;
      case Op::neg:
        s.grab(n.a) -= gi;
        break;
      case Op::sin:
        s.grab(n.a) += gi * na->value.cos();
        break;
      case Op::cos:
        s.grab(n.a) -= gi * na->value.sin();
        break;
      case Op::tanh:
        s.grab(n.a) += gi * (1.0 - n.value * n.value);
        break;
      case Op::relu:
        // Subgradient 0 at the kink.
        s.grab(n.a) += gi * (na->value > 0.0).cast<double>();
        break;
      case Op::exp:
        s.grab(n.a) += gi * n.value;
        break;
      case Op::log:
        s.grab(n.a) += gi / na->value;
        break;
      case Op::add_bias: {
        s.grab(n.a) += gi;
        Eigen::ArrayXd& gb = s.grab(n.b);
        Eigen::Map<Eigen::RowVectorXd>(gb.data(), gb.size()) +=
            gm.colwise().sum();
        break;
      }
      case Op::sum:
        s.grab(n.a) += gi[0];
        break;
      case Op::mean:
        s.grab(n.a) += gi[0] / static_cast<double>(na->value.size());
        break;
      case Op::reshape:
        s.grab(n.a) += gi;
        break;
      case Op::interleave_cols: {
        MapM ga = s.gmat(n.a);
        MapM gb = s.gmat(n.b);
        for (Eigen::Index j = 0; j < ga.cols(); ++j) {
          ga.col(j) += gm.col(2 * j);
          gb.col(j) += gm.col(2 * j + 1);
        }
        break;
      }
      case Op::concat_cols:
        s.gmat(n.a) += gm.leftCols(na->cols());
        s.gmat(n.b) += gm.rightCols(nb->cols());
        break;
      case Op::sincos_interleave: {
        // d cos = -sin, d sin = cos, both already stored in this node.
        Eigen::ArrayXd& ga = s.grab(n.a);
        using Strided =
            Eigen::Map<const Eigen::ArrayXd, 0, Eigen::InnerStride<2>>;
        const Eigen::Index len = ga.size();
        Strided gc(gi.data(), len), gs(gi.data() + 1, len);
        Strided vc(n.value.data(), len), vs(n.value.data() + 1, len);
        ga += gs * vc - gc * vs;
        break;
      }
    }
  }

  // Untouched trainable leaves still read as zero gradients.
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const Node& n = tape.node(static_cast<int>(i));
    if (n.op == Op::leaf && n.trainable && g.adjoints[i].size() == 0)
      g.adjoints[i] = Eigen::ArrayXd::Zero(n.value.size());
  }
  return g;
}

const Eigen::ArrayXd& Gradients::at(const Tensor& t) const {
  if (t.tape != tape)
    throw ContractError("gradients queried with a tensor from another tape");
  const auto& a = adjoints.at(static_cast<std::size_t>(t.id));
  if (a.size() == 0 && t.node().value.size() != 0)
    throw ContractError("no gradient recorded for node " +
                        std::to_string(t.id));
  return a;
}

bool Gradients::has(const Tensor& t) const {
  return t.tape == tape &&
         adjoints.at(static_cast<std::size_t>(t.id)).size() != 0;
}

// --- parameter blocks ---------------------------------------------------------

Param& ParamSet::add(std::string name, std::vector<int> dims,
                     Eigen::ArrayXd value) {
  if (contains(name)) throw ContractError("duplicate parameter '" + name + "'");
  if (shape_size(dims) != value.size())
    throw ShapeError("parameter '" + name + "': shape " + shape_str(dims) +
                     " does not hold " + std::to_string(value.size()) +
                     " values");
  items_.push_back(Param{std::move(name), std::move(dims), std::move(value)});
  return items_.back();
}

int ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (items_[i].name == name) return static_cast<int>(i);
  return -1;
}

bool ParamSet::contains(const std::string& name) const {
  return index_of(name) >= 0;
}

Param& ParamSet::at(const std::string& name) {
  int i = index_of(name);
  if (i < 0) throw ContractError("no parameter named '" + name + "'");
  return items_[static_cast<std::size_t>(i)];
}

const Param& ParamSet::at(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw ContractError("no parameter named '" + name + "'");
  return items_[static_cast<std::size_t>(i)];
}

long ParamSet::scalar_count() const {
  long n = 0;
  for (const auto& p : items_) n += static_cast<long>(p.value.size());
  return n;
}

BoundParams bind(Tape& tape, const ParamSet& params) {
  BoundParams b;
  b.set = &params;
  b.leaves.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = params[i];
    b.leaves.push_back(tape.leaf(p.dims, p.value, true, p.name));
  }
  return b;
}

const Tensor& BoundParams::at(const std::string& name) const {
  int i = set ? set->index_of(name) : -1;
  if (i < 0) throw ContractError("no bound parameter named '" + name + "'");
  return leaves[static_cast<std::size_t>(i)];
}

}  // namespace qrun::ad
