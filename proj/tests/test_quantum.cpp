#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qrun/quantum.hpp"

using namespace qrun;
using namespace qrun::qc;

namespace {

StateVector random_state(int qubits, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::VectorXcd a(Eigen::Index(1) << qubits);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    a[i] = std::complex<double>(rng.normal(), rng.normal());
  a /= a.norm();
  return StateVector::from_amplitudes(qubits, a);
}

}  // namespace

TEST_CASE("ry gate entries") {
  Gate2 g0 = ry(0.0);
  CHECK(g0(0, 0) == std::complex<double>(1.0, 0.0));
  CHECK(g0(0, 1) == std::complex<double>(0.0, 0.0));

  StateVector sv(1);
  StateVector flipped = apply_single(sv, ry(M_PI), 0);
  CHECK(std::abs(flipped.amps()[0]) < 1e-15);
  CHECK(std::abs(flipped.amps()[1] - 1.0) < 1e-15);

  StateVector half = apply_single(sv, ry(M_PI / 2.0), 0);
  CHECK(half.amps()[0].real() == doctest::Approx(std::sqrt(0.5)));
  CHECK(half.amps()[1].real() == doctest::Approx(std::sqrt(0.5)));

  CHECK_THROWS_AS(ry(std::nan("")), ContractError);
  CHECK(unitarity_defect(ry(1.2345)) < 1e-12);
}

TEST_CASE("bit ordering fixture: qubit 0 is the least significant bit") {
  // ry(pi) flips qubit 0 of |00>; the excited amplitude must be index 1.
  StateVector sv(2);
  StateVector out = apply_single(sv, ry(M_PI), 0);
  CHECK(std::abs(out.amps()[1] - 1.0) < 1e-15);
  CHECK(std::abs(out.amps()[2]) < 1e-15);
  // And flipping qubit 1 excites index 2.
  StateVector out2 = apply_single(sv, ry(M_PI), 1);
  CHECK(std::abs(out2.amps()[2] - 1.0) < 1e-15);
}

TEST_CASE("identity gate leaves the state bit-for-bit") {
  StateVector sv = random_state(3, 11);
  StateVector out = apply_single(sv, Gate2::Identity(), 1);
  for (Eigen::Index i = 0; i < sv.amps().size(); ++i)
    CHECK(out.amps()[i] == sv.amps()[i]);
}

TEST_CASE("apply_single rejects out-of-range targets") {
  StateVector sv(2);
  CHECK_THROWS_AS(apply_single(sv, ry(1.0), 2), ContractError);
  CHECK_THROWS_AS(apply_single(sv, ry(1.0), -1), ContractError);
}

TEST_CASE("norm drift over 100 random ry gates stays below 1e-12") {
  // Norm must survive a long random gate sequence.
  SplitMix64 rng(42);
  StateVector sv = random_state(4, 13);
  for (int i = 0; i < 100; ++i) {
    const int target = static_cast<int>(rng.uniform_index(4));
    sv = apply_single(sv, ry(rng.uniform(-8.0, 8.0)), target);
    CHECK(sv.norm_error() < 1e-12);
  }
}

TEST_CASE("cnot permutes basis states") {
  // |10> (qubit 1 high) with control 1, target 0 -> |11>.
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4);
  a[2] = 1.0;
  StateVector sv = StateVector::from_amplitudes(2, a);
  StateVector out = apply_cnot(sv, 1, 0);
  CHECK(std::abs(out.amps()[3] - 1.0) < 1e-15);
  // Control low: untouched.
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(4);
  b[1] = 1.0;
  StateVector sv2 = StateVector::from_amplitudes(2, b);
  CHECK(std::abs(apply_cnot(sv2, 1, 0).amps()[1] - 1.0) < 1e-15);
  CHECK_THROWS_AS(apply_cnot(sv, 1, 1), ContractError);
}

TEST_CASE("from_amplitudes enforces normalization") {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(2);
  a[0] = 1.1;
  CHECK_THROWS_AS(StateVector::from_amplitudes(1, a), ContractError);
  CHECK_THROWS_AS(StateVector::from_amplitudes(2, a), ShapeError);
}

TEST_CASE("capacity cap at 14 qubits") {
  CHECK_THROWS_AS(StateVector(15), CapacityError);
  CHECK_NOTHROW(StateVector(14));
}

TEST_CASE("pauli-z expectations on basis states") {
  StateVector zero(1);
  CHECK(expectation(zero, Observable::pauli("Z")) == doctest::Approx(1.0));
  StateVector one = apply_single(zero, ry(M_PI), 0);
  CHECK(expectation(one, Observable::pauli("Z")) == doctest::Approx(-1.0));
}

TEST_CASE("random Hermitian expectation lies within eigenvalue bounds") {
  // Bounds from a dense eigensolve of the same matrix.
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    SplitMix64 rng(seed);
    Observable obs = Observable::random_hermitian(3, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(obs.to_dense());
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    for (std::uint64_t s2 = 0; s2 < 5; ++s2) {
      const double val = expectation(random_state(3, seed * 100 + s2), obs);
      CHECK(val >= lo - 1e-12);
      CHECK(val <= hi + 1e-12);
    }
  }
}

TEST_CASE("pauli string application agrees with its dense form") {
  Observable pauli = Observable::pauli("ZIY");
  Observable dense = Observable::dense(pauli.to_dense());
  StateVector sv = random_state(3, 21);
  CHECK(expectation(sv, pauli) == doctest::Approx(expectation(sv, dense)));
}

TEST_CASE("observable constructors reject bad input") {
  CHECK_THROWS_AS(Observable::pauli("ZQ"), ContractError);
  CHECK_THROWS_AS(Observable::pauli(""), ContractError);
  Eigen::MatrixXcd nh(2, 2);
  nh << 0.0, std::complex<double>(0, 1), std::complex<double>(0, 1), 0.0;
  CHECK_THROWS_AS(Observable::dense(nh), ContractError);
  CHECK_THROWS_AS(Observable::dense(Eigen::MatrixXcd::Zero(3, 3)), ShapeError);
}

TEST_CASE("single-qubit single-layer drqc gives cos(x) for W=0") {
  DrqcSpec spec;
  spec.layout = DrqcSpec::Layout::single_qubit_multilayer;
  spec.qubits = 1;
  spec.layers = 1;
  spec.uploads = 1;
  spec.data_weights = {1.0};
  spec.variational = {0.0};
  spec.observable = Observable::pauli("Z");

  CHECK(drqc_eval(spec, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(drqc_eval(spec, M_PI) == doctest::Approx(-1.0).epsilon(1e-14));
  for (double x : {0.3, -1.7, 2.9}) {
    // Half-angle convention: Ry(x)|0> measured in Z gives cos(x).
    CHECK(drqc_eval(spec, x) == doctest::Approx(std::cos(x)).epsilon(1e-12));
  }
}

TEST_CASE("8-qubit single-layer outputs stay in [-1,1] on 1000 points") {
  DrqcSpec spec = DrqcSpec::random_multiqubit(8, 99);
  SplitMix64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-20.0, 20.0);
    const double y = drqc_eval(spec, x);
    CHECK(y >= -1.0 - 1e-12);
    CHECK(y <= 1.0 + 1e-12);
  }
}

TEST_CASE("drqc spec validation") {
  DrqcSpec spec = DrqcSpec::random_single_qubit(4, 1);
  CHECK_NOTHROW(spec.validate());
  spec.qubits = 2;
  CHECK_THROWS_AS(spec.validate(), ContractError);

  DrqcSpec multi = DrqcSpec::random_multiqubit(3, 1);
  multi.data_weights.push_back(1.0);
  CHECK_THROWS_AS(multi.validate(), ShapeError);

  CHECK_THROWS_AS(DrqcSpec::random_multiqubit(15, 1), CapacityError);
}

TEST_CASE("drqc spec JSON round trip") {
  DrqcSpec spec = DrqcSpec::random_multiqubit(5, 12345);
  DrqcSpec back = DrqcSpec::from_json(spec.to_json());
  CHECK(back.qubits == spec.qubits);
  CHECK(back.layers == spec.layers);
  CHECK(back.uploads == spec.uploads);
  CHECK(back.seed == spec.seed);
  for (std::size_t i = 0; i < spec.variational.size(); ++i)
    CHECK(back.variational[i] == spec.variational[i]);
  for (double x : {-3.2, 0.0, 11.5})
    CHECK(drqc_eval(back, x) == drqc_eval(spec, x));

  // Dense observables survive the trip too.
  SplitMix64 rng(5);
  DrqcSpec d2 = DrqcSpec::random_single_qubit(2, 6);
  d2.observable = Observable::random_hermitian(1, rng);
  DrqcSpec b2 = DrqcSpec::from_json(d2.to_json());
  for (double x : {-1.0, 0.7}) CHECK(drqc_eval(b2, x) == drqc_eval(d2, x));
}

TEST_CASE("theoretical_qrun closed form: n=1, Z observable is cos(w x)") {
  Observable z = Observable::pauli("Z");
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK(theoretical_qrun({1.0}, 1, z, x) == doctest::Approx(1.0));
  SplitMix64 rng(31);
  for (int i = 0; i < 10; ++i) {
    const double xi = rng.uniform(-10.0, 10.0);
    x[0] = xi;
    CHECK(std::abs(theoretical_qrun({1.0}, 1, z, x) - std::cos(xi)) < 1e-12);
    CHECK(std::abs(theoretical_qrun({2.5}, 1, z, x) - std::cos(2.5 * xi)) <
          1e-12);
  }
}

TEST_CASE("theoretical_qrun contracts") {
  Observable z = Observable::pauli("Z");
  Eigen::VectorXd x(1);
  x << 1.0;
  CHECK_THROWS_AS(theoretical_qrun({}, 1, z, x), ContractError);
  CHECK_THROWS_AS(theoretical_qrun({1.0, 2.0}, 1, z, x), ShapeError);
  Eigen::VectorXd x2(2);
  x2 << 1.0, 2.0;
  CHECK_THROWS_AS(
      theoretical_qrun(std::vector<double>(8, 1.0), 2, z, x2),
      CapacityError);  // 16 qubits
}

TEST_CASE("expectation requires matching register widths") {
  StateVector sv(2);
  CHECK_THROWS_AS(expectation(sv, Observable::pauli("Z")), ShapeError);
}
