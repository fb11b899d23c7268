#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrun/errors.hpp"
#include "qrun/rng.hpp"

namespace qrun::qc {

// Hard cap on simulated register width (2^14 amplitudes).
inline constexpr int kMaxQubits = 14;
// Dense observables cost O(4^N) memory, so they stop earlier.
inline constexpr int kMaxDenseQubits = 10;

using Gate2 = Eigen::Matrix2cd;

// Basis convention: qubit q is bit q of the basis index, so qubit 0 is the
// least significant bit.
class StateVector {
 public:
  // |0...0> on `qubits` wires.
  explicit StateVector(int qubits);
  static StateVector from_amplitudes(int qubits, Eigen::VectorXcd amps,
                                     double norm_tol = 1e-10);

  int qubits() const { return qubits_; }
  const Eigen::VectorXcd& amps() const { return amps_; }
  // | <phi|phi> - 1 |
  double norm_error() const;

 private:
  StateVector(int qubits, Eigen::VectorXcd amps)
      : qubits_(qubits), amps_(std::move(amps)) {}
  friend StateVector apply_single(const StateVector&, const Gate2&, int);
  friend StateVector apply_cnot(const StateVector&, int, int);
  int qubits_;
  Eigen::VectorXcd amps_;
};

// Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
Gate2 ry(double theta);
// || G^dag G - I ||_max
double unitarity_defect(const Gate2& g);

StateVector apply_single(const StateVector& sv, const Gate2& g, int target);
StateVector apply_cnot(const StateVector& sv, int control, int target);

// Hermitian observable: either a Pauli string (axes[q] in {I,X,Y,Z} acts on
// qubit q) or an explicit dense matrix.
class Observable {
 public:
  static Observable pauli(std::string axes);
  static Observable pauli_z(int qubit, int qubits);
  static Observable dense(Eigen::MatrixXcd m, double herm_tol = 1e-12);
  static Observable random_hermitian(int qubits, SplitMix64& rng);

  int qubits() const { return qubits_; }
  bool is_pauli() const { return dense_.size() == 0; }
  const std::string& axes() const { return axes_; }
  Eigen::MatrixXcd to_dense() const;
  // O |phi>
  Eigen::VectorXcd apply(const Eigen::VectorXcd& phi) const;

  nlohmann::json to_json() const;
  static Observable from_json(const nlohmann::json& j);

 private:
  Observable() = default;
  int qubits_ = 0;
  std::string axes_;         // pauli form
  Eigen::MatrixXcd dense_;   // dense form (empty when pauli)
};

// <phi| O |phi>. Throws NumericError if the imaginary residue reaches 1e-10.
double expectation(const StateVector& sv, const Observable& obs);

// Data re-uploading circuit description.
struct DrqcSpec {
  enum class Layout {
    single_qubit_multilayer,  // one wire, L alternating data/variational Ry
    multiqubit_singlelayer,   // N wires, one data Ry each, Ry + CNOT ring
  };

  Layout layout = Layout::single_qubit_multilayer;
  int qubits = 1;
  int layers = 1;
  int uploads = 1;
  std::vector<double> data_weights;  // w_i, one per upload
  std::vector<double> variational;   // layer-major, layers * qubits entries
  Observable observable = Observable::pauli("Z");
  std::uint64_t seed = 0;  // provenance of the random draws, 0 = hand-built

  void validate() const;

  // w_i = 1, variational angles ~ U(0, 2pi), observable Z on qubit 0.
  static DrqcSpec random_single_qubit(int layers, std::uint64_t seed);
  static DrqcSpec random_multiqubit(int qubits, std::uint64_t seed);

  nlohmann::json to_json() const;
  static DrqcSpec from_json(const nlohmann::json& j);
};

// Evaluates the circuit on scalar input x (1-d inputs only).
double drqc_eval(const DrqcSpec& spec, double x);

// <0|^(nd) S(x)^dag O S(x) |0>^(nd) with S(x) the product of Ry(w_i x_j)
// factors; factor (position j, weight i) acts on qubit j*n + i.
double theoretical_qrun(const std::vector<double>& w, int d,
                        const Observable& obs, const Eigen::VectorXd& x);

}  // namespace qrun::qc
