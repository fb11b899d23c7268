#include "qrun/quantum.hpp"

#include <cmath>

namespace qrun::qc {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void check_qubits(int qubits, int cap = kMaxQubits) {
  if (qubits < 1) throw ContractError("qubit count must be positive");
  if (qubits > cap)
    throw CapacityError("requested " + std::to_string(qubits) +
                        " qubits, cap is " + std::to_string(cap));
}

void check_target(int target, int qubits, const char* what) {
  if (target < 0 || target >= qubits)
    throw ContractError(std::string(what) + ": qubit " +
                        std::to_string(target) + " outside register of " +
                        std::to_string(qubits));
}

}  // namespace

StateVector::StateVector(int qubits) : qubits_(qubits) {
  check_qubits(qubits);
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index(1) << qubits);
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(int qubits, Eigen::VectorXcd amps,
                                         double norm_tol) {
  check_qubits(qubits);
  if (amps.size() != (Eigen::Index(1) << qubits))
    throw ShapeError("from_amplitudes: expected " +
                     std::to_string(1LL << qubits) + " amplitudes, got " +
                     std::to_string(amps.size()));
  const double err = std::abs(amps.squaredNorm() - 1.0);
  if (err > norm_tol)
    throw ContractError("from_amplitudes: state is not normalized, |n^2-1| = " +
                        std::to_string(err));
  return StateVector(qubits, std::move(amps));
}

double StateVector::norm_error() const {
  return std::abs(amps_.squaredNorm() - 1.0);
}

Gate2 ry(double theta) {
  if (!std::isfinite(theta)) throw ContractError("ry: angle is not finite");
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  Gate2 g;
  g << c, -s, s, c;
  return g;
}

double unitarity_defect(const Gate2& g) {
  return (g.adjoint() * g - Gate2::Identity()).cwiseAbs().maxCoeff();
}

StateVector apply_single(const StateVector& sv, const Gate2& g, int target) {
  check_target(target, sv.qubits(), "apply_single");
  const Eigen::VectorXcd& a = sv.amps();
  Eigen::VectorXcd out(a.size());
  const Eigen::Index mask = Eigen::Index(1) << target;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (i & mask) continue;
    const Eigen::Index j = i | mask;
    out[i] = g(0, 0) * a[i] + g(0, 1) * a[j];
    out[j] = g(1, 0) * a[i] + g(1, 1) * a[j];
  }
  return StateVector(sv.qubits(), std::move(out));
}

StateVector apply_cnot(const StateVector& sv, int control, int target) {
  check_target(control, sv.qubits(), "apply_cnot");
  check_target(target, sv.qubits(), "apply_cnot");
  if (control == target)
    throw ContractError("apply_cnot: control equals target");
  Eigen::VectorXcd out = sv.amps();
  const Eigen::Index cmask = Eigen::Index(1) << control;
  const Eigen::Index tmask = Eigen::Index(1) << target;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if ((i & cmask) && !(i & tmask)) std::swap(out[i], out[i | tmask]);
  return StateVector(sv.qubits(), std::move(out));
}

// --- observables --------------------------------------------------------------

Observable Observable::pauli(std::string axes) {
  if (axes.empty()) throw ContractError("pauli: empty axis string");
  check_qubits(static_cast<int>(axes.size()));
  for (char c : axes)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw ContractError(std::string("pauli: bad axis '") + c + "'");
  Observable o;
  o.qubits_ = static_cast<int>(axes.size());
  o.axes_ = std::move(axes);
  return o;
}

Observable Observable::pauli_z(int qubit, int qubits) {
  check_qubits(qubits);
  check_target(qubit, qubits, "pauli_z");
  std::string axes(static_cast<std::size_t>(qubits), 'I');
  axes[static_cast<std::size_t>(qubit)] = 'Z';
  return pauli(std::move(axes));
}

Observable Observable::dense(Eigen::MatrixXcd m, double herm_tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ShapeError("dense observable must be square and non-empty");
  int qubits = 0;
  while ((Eigen::Index(1) << qubits) < m.rows()) ++qubits;
  if ((Eigen::Index(1) << qubits) != m.rows())
    throw ShapeError("dense observable dimension must be a power of two");
  check_qubits(qubits, kMaxDenseQubits);
  const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (defect > herm_tol)
    throw ContractError("dense observable is not Hermitian, defect = " +
                        std::to_string(defect));
  Observable o;
  o.qubits_ = qubits;
  o.dense_ = std::move(m);
  return o;
}

Observable Observable::random_hermitian(int qubits, SplitMix64& rng) {
  check_qubits(qubits, kMaxDenseQubits);
  const Eigen::Index dim = Eigen::Index(1) << qubits;
  Eigen::MatrixXcd a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      a(r, c) = std::complex<double>(rng.normal(), rng.normal());
  Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  return dense(std::move(h));
}

Eigen::VectorXcd Observable::apply(const Eigen::VectorXcd& phi) const {
  if (phi.size() != (Eigen::Index(1) << qubits_))
    throw ShapeError("observable/state dimension mismatch");
  if (!is_pauli()) return dense_ * phi;
  Eigen::VectorXcd out = phi;
  for (int q = 0; q < qubits_; ++q) {
    const char axis = axes_[static_cast<std::size_t>(q)];
    if (axis == 'I') continue;
    const Eigen::Index mask = Eigen::Index(1) << q;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (i & mask) continue;
      const Eigen::Index j = i | mask;
      const std::complex<double> lo = out[i], hi = out[j];
      switch (axis) {
        case 'X':
          out[i] = hi;
          out[j] = lo;
          break;
        case 'Y':
          out[i] = -kI * hi;
          out[j] = kI * lo;
          break;
        case 'Z':
          out[j] = -hi;
          break;
      }
    }
  }
  return out;
}

Eigen::MatrixXcd Observable::to_dense() const {
  if (!is_pauli()) return dense_;
  check_qubits(qubits_, kMaxDenseQubits);
  const Eigen::Index dim = Eigen::Index(1) << qubits_;
  Eigen::MatrixXcd m(dim, dim);
  // Columns are O applied to basis states.
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    e[c] = 1.0;
    m.col(c) = apply(e);
    e[c] = 0.0;
  }
  return m;
}

nlohmann::json Observable::to_json() const {
  if (is_pauli()) return nlohmann::json{{"pauli", axes_}};
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < dense_.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
    for (Eigen::Index c = 0; c < dense_.cols(); ++c) {
      rr.push_back(dense_(r, c).real());
      ri.push_back(dense_(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return nlohmann::json{{"dense_re", re}, {"dense_im", im}};
}

Observable Observable::from_json(const nlohmann::json& j) {
  if (j.contains("pauli")) return pauli(j.at("pauli").get<std::string>());
  const auto& re = j.at("dense_re");
  const auto& im = j.at("dense_im");
  const auto n = static_cast<Eigen::Index>(re.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = std::complex<double>(
          re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>());
  return dense(std::move(m));
}

double expectation(const StateVector& sv, const Observable& obs) {
  if (obs.qubits() != sv.qubits())
    throw ShapeError("expectation: observable on " +
                     std::to_string(obs.qubits()) + " qubits, state on " +
                     std::to_string(sv.qubits()));
  const std::complex<double> v = sv.amps().dot(obs.apply(sv.amps()));
  if (std::abs(v.imag()) >= 1e-10)
    throw NumericError("expectation: imaginary residue " +
                       std::to_string(v.imag()));
  return v.real();
}

// --- circuits -----------------------------------------------------------------

void DrqcSpec::validate() const {
  check_qubits(qubits);
  if (layers < 1) throw ContractError("drqc: layers must be positive");
  if (uploads < 1) throw ContractError("drqc: uploads must be positive");
  if (layout == Layout::single_qubit_multilayer) {
    if (qubits != 1)
      throw ContractError("drqc: single-qubit layout needs exactly 1 qubit");
    if (uploads != layers)
      throw ContractError("drqc: single-qubit layout re-uploads once per layer");
  } else {
    if (layers != 1)
      throw ContractError("drqc: multi-qubit layout has exactly 1 layer");
    if (uploads != qubits)
      throw ContractError("drqc: multi-qubit layout re-uploads once per wire");
  }
  if (static_cast<int>(data_weights.size()) != uploads)
    throw ShapeError("drqc: expected " + std::to_string(uploads) +
                     " data weights, got " +
                     std::to_string(data_weights.size()));
  if (static_cast<int>(variational.size()) != layers * qubits)
    throw ShapeError("drqc: expected " + std::to_string(layers * qubits) +
                     " variational angles, got " +
                     std::to_string(variational.size()));
  for (double w : data_weights)
    if (!std::isfinite(w)) throw ContractError("drqc: non-finite data weight");
  for (double v : variational)
    if (!std::isfinite(v))
      throw ContractError("drqc: non-finite variational angle");
  if (observable.qubits() != qubits)
    throw ShapeError("drqc: observable register width mismatch");
}

DrqcSpec DrqcSpec::random_single_qubit(int layers, std::uint64_t seed) {
  DrqcSpec s;
  s.layout = Layout::single_qubit_multilayer;
  s.qubits = 1;
  s.layers = layers;
  s.uploads = layers;
  s.seed = seed;
  SplitMix64 rng(seed);
  s.data_weights.assign(static_cast<std::size_t>(layers), 1.0);
  s.variational.resize(static_cast<std::size_t>(layers));
  for (double& v : s.variational) v = rng.uniform(0.0, 2.0 * M_PI);
  s.observable = Observable::pauli("Z");
  s.validate();
  return s;
}

DrqcSpec DrqcSpec::random_multiqubit(int qubits, std::uint64_t seed) {
  DrqcSpec s;
  s.layout = Layout::multiqubit_singlelayer;
  s.qubits = qubits;
  s.layers = 1;
  s.uploads = qubits;
  s.seed = seed;
  SplitMix64 rng(seed);
  s.data_weights.assign(static_cast<std::size_t>(qubits), 1.0);
  s.variational.resize(static_cast<std::size_t>(qubits));
  for (double& v : s.variational) v = rng.uniform(0.0, 2.0 * M_PI);
  s.observable = Observable::pauli_z(0, qubits);
  s.validate();
  return s;
}

nlohmann::json DrqcSpec::to_json() const {
  return nlohmann::json{
      {"layout", layout == Layout::single_qubit_multilayer
                     ? "single_qubit_multilayer"
                     : "multiqubit_singlelayer"},
      {"qubits", qubits},
      {"layers", layers},
      {"uploads", uploads},
      {"data_weights", data_weights},
      {"variational", variational},
      {"observable", observable.to_json()},
      {"seed", seed},
  };
}

DrqcSpec DrqcSpec::from_json(const nlohmann::json& j) {
  DrqcSpec s;
  const std::string layout = j.at("layout").get<std::string>();
  if (layout == "single_qubit_multilayer")
    s.layout = Layout::single_qubit_multilayer;
  else if (layout == "multiqubit_singlelayer")
    s.layout = Layout::multiqubit_singlelayer;
  else
    throw ContractError("drqc: unknown layout '" + layout + "'");
  s.qubits = j.at("qubits").get<int>();
  s.layers = j.at("layers").get<int>();
  s.uploads = j.at("uploads").get<int>();
  s.data_weights = j.at("data_weights").get<std::vector<double>>();
  s.variational = j.at("variational").get<std::vector<double>>();
  s.observable = Observable::from_json(j.at("observable"));
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

double drqc_eval(const DrqcSpec& spec, double x) {
  spec.validate();
  if (!std::isfinite(x)) throw ContractError("drqc_eval: input is not finite");
  StateVector sv(spec.qubits);
  if (spec.layout == DrqcSpec::Layout::single_qubit_multilayer) {
    for (int l = 0; l < spec.layers; ++l) {
      sv = apply_single(sv, ry(spec.data_weights[std::size_t(l)] * x), 0);
      sv = apply_single(sv, ry(spec.variational[std::size_t(l)]), 0);
    }
  } else {
    for (int q = 0; q < spec.qubits; ++q)
      sv = apply_single(sv, ry(spec.data_weights[std::size_t(q)] * x), q);
    for (int q = 0; q < spec.qubits; ++q)
      sv = apply_single(sv, ry(spec.variational[std::size_t(q)]), q);
    if (spec.qubits > 1)
      for (int q = 0; q < spec.qubits; ++q)
        sv = apply_cnot(sv, q, (q + 1) % spec.qubits);
  }
  return expectation(sv, spec.observable);
}

double theoretical_qrun(const std::vector<double>& w, int d,
                        const Observable& obs, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(w.size());
  if (n < 1) throw ContractError("theoretical_qrun: empty weight list");
  if (d < 1) throw ContractError("theoretical_qrun: dimension must be positive");
  if (x.size() != d)
    throw ShapeError("theoretical_qrun: input has " + std::to_string(x.size()) +
                     " entries, expected " + std::to_string(d));
  check_qubits(n * d);
  if (obs.qubits() != n * d)
    throw ShapeError("theoretical_qrun: observable must act on " +
                     std::to_string(n * d) + " qubits");
  StateVector sv(n * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i)
      sv = apply_single(sv, ry(w[std::size_t(i)] * x[j]), j * n + i);
  return expectation(sv, obs);
}

}  // namespace qrun::qc
