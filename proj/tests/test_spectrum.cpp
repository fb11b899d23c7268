#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "qrun/quantum.hpp"
#include "qrun/spectrum.hpp"

using namespace qrun;
using namespace qrun::qc;

namespace {

// Independent oracle for the recursion: enumerate every signed sum
// sum_i eps_i w_i with eps in {-1,0,1}^n and deduplicate.
std::vector<double> enumerate_spectrum(const std::vector<double>& w,
                                       double tau) {
  const auto n = w.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;
  std::vector<double> sums;
  sums.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += (static_cast<int>(c % 3) - 1) * w[i];
      c /= 3;
    }
    sums.push_back(acc);
  }
  std::sort(sums.begin(), sums.end());
  std::vector<double> out;
  for (double v : sums)
    if (out.empty() || v - out.back() > tau) out.push_back(v);
  return out;
}

std::vector<Eigen::VectorXd> uniform_points_1d(int count, double lo, double hi,
                                               std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(count),
                                  Eigen::VectorXd(1));
  for (auto& x : xs) x[0] = rng.uniform(lo, hi);
  return xs;
}

}  // namespace

TEST_CASE("predicted_spectrum matches the enumeration oracle") {
  // The recursion and the direct 3^n enumeration must agree.
  for (auto w : std::vector<std::vector<double>>{
           {1.0}, {1.0, 3.0}, {1.0, 3.0, 9.0}, {1.0, 1.0},
           {0.7, 2.3, 0.9}, {2.0, 2.0, 4.0}}) {
    FrequencySet set = predicted_spectrum(w, 1);
    std::vector<double> oracle = enumerate_spectrum(w, set.tol);
    REQUIRE(set.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i)
      CHECK(set.freqs[i][0] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
}

TEST_CASE("spectrum cardinalities for generic and degenerate weights") {
  CHECK(predicted_spectrum({1.0}, 1).size() == 3);
  CHECK(predicted_spectrum({1.0, 3.0}, 1).size() == 9);
  CHECK(predicted_spectrum({1.0, 3.0, 9.0}, 1).size() == 27);
  CHECK(predicted_spectrum({1.0}, 2).size() == 9);  // 3^2 pairs
  CHECK(predicted_spectrum({1.0, 1.0}, 1).size() == 5);  // degenerate

  FrequencySet base = predicted_spectrum({1.0}, 1);
  CHECK(base.freqs[0][0] == doctest::Approx(-1.0));
  CHECK(base.freqs[1][0] == doctest::Approx(0.0));
  CHECK(base.freqs[2][0] == doctest::Approx(1.0));

  FrequencySet deg = predicted_spectrum({1.0, 1.0}, 1);
  for (int i = 0; i < 5; ++i)
    CHECK(deg.freqs[std::size_t(i)][0] == doctest::Approx(i - 2.0));
}

TEST_CASE("spectrum invariants: symmetry, zero membership, separation") {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(3);
    for (auto& v : w) v = rng.uniform(0.3, 5.0);
    const int d = 1 + static_cast<int>(rng.uniform_index(2));
    FrequencySet set = predicted_spectrum(w, d);
    CHECK(set.contains(Eigen::VectorXd::Zero(d)));
    for (const auto& f : set.freqs) CHECK(set.contains(Eigen::VectorXd(-f)));
    for (std::size_t i = 1; i < set.size(); ++i) {
      // Lexicographic neighbours differ by more than tol somewhere.
      CHECK((set.freqs[i] - set.freqs[i - 1]).cwiseAbs().maxCoeff() > set.tol);
    }
  }
}

TEST_CASE("predicted_spectrum contract errors") {
  CHECK_THROWS_AS(predicted_spectrum({}, 1), ContractError);
  CHECK_THROWS_AS(predicted_spectrum({1.0}, 0), ContractError);
  CHECK_THROWS_AS(predicted_spectrum({1.0}, 1, 0.0), ContractError);
  CHECK_THROWS_AS(predicted_spectrum({1.0}, 1, -1e-9), ContractError);
}

TEST_CASE("fourier_fit recovers cos(x) coefficients exactly") {
  FrequencySet set = predicted_spectrum({1.0}, 1);
  auto xs = uniform_points_1d(64, 0.0, 2.0 * M_PI, 5);
  Eigen::VectorXd y(64);
  for (int i = 0; i < 64; ++i) y[i] = std::cos(xs[std::size_t(i)][0]);
  FourierFit fit = fourier_fit(xs, y, set);
  CHECK(fit.rms_residual < 1e-12);
  CHECK(std::abs(fit.coeffs[0] - 0.5) < 1e-10);  // omega = -1
  CHECK(std::abs(fit.coeffs[1]) < 1e-10);        // omega = 0
  CHECK(std::abs(fit.coeffs[2] - 0.5) < 1e-10);  // omega = +1
  CHECK(fit.max_conjugate_asymmetry < 1e-10);
}

TEST_CASE("theoretical_qrun is exactly spanned by its predicted spectrum") {
  // Least-squares oracle: residual < 1e-8 on the full spectrum,
  // > 1e-3 once the largest frequency is removed (tightness).
  SplitMix64 rng(2027);
  const std::vector<double> w = {1.0, 3.0};
  Observable obs = Observable::random_hermitian(2, rng);
  auto xs = uniform_points_1d(512, -M_PI, M_PI, 6);
  Eigen::VectorXd y(512);
  for (int i = 0; i < 512; ++i) {
    Eigen::VectorXd x(1);
    x << xs[std::size_t(i)][0];
    y[i] = theoretical_qrun(w, 1, obs, x);
  }
  FrequencySet full = predicted_spectrum(w, 1);
  FourierFit fit = fourier_fit(xs, y, full);
  CHECK(fit.rms_residual < 1e-8);
  CHECK(fit.max_conjugate_asymmetry < 1e-8);

  FrequencySet ablated = full.without_largest();
  CHECK(ablated.size() == full.size() - 2);  // +4 and -4 both dropped
  FourierFit bad = fourier_fit(xs, y, ablated);
  CHECK(bad.rms_residual > 1e-3);
}

TEST_CASE("fourier_fit preconditions") {
  FrequencySet set = predicted_spectrum({1.0, 3.0}, 1);
  auto xs = uniform_points_1d(10, 0.0, 1.0, 7);  // < 2 * 9 samples
  Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
  CHECK_THROWS_AS(fourier_fit(xs, y, set), ContractError);

  auto xs2 = uniform_points_1d(40, 0.0, 1.0, 7);
  xs2[5] = xs2[9];  // exact duplicate
  Eigen::VectorXd y2 = Eigen::VectorXd::Zero(40);
  CHECK_THROWS_AS(fourier_fit(xs2, y2, set), ContractError);
}

TEST_CASE("fourier_fit reports conditioning failures") {
  // Two identical frequencies make the design matrix rank deficient.
  FrequencySet set;
  set.dim = 1;
  set.tol = 1e-9;
  for (double f : {0.0, 1.0, 1.0 + 1e-15}) {
    Eigen::VectorXd v(1);
    v << f;
    set.freqs.push_back(v);
  }
  auto xs = uniform_points_1d(16, 0.0, 2.0 * M_PI, 8);
  Eigen::VectorXd y(16);
  for (int i = 0; i < 16; ++i) y[i] = std::sin(xs[std::size_t(i)][0]);
  try {
    fourier_fit(xs, y, set);
    FAIL("expected ConditioningError");
  } catch (const ConditioningError& e) {
    CHECK(e.condition > 1e12);
  }
}

TEST_CASE("empirical_spectrum of sin(3x) has support exactly at +-3") {
  DftSpectrum spec = empirical_spectrum(
      [](double x) { return std::sin(3.0 * x); }, 2.0 * M_PI, 1024, 3.0);
  REQUIRE(spec.support.size() == 2);
  std::set<double> freqs;
  for (int k : spec.support) {
    freqs.insert(spec.freq[k]);
    CHECK(spec.magnitude[k] == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK(freqs.count(3.0) == 1);
  CHECK(freqs.count(-3.0) == 1);
}

TEST_CASE("empirical_spectrum of a constant has support {0}") {
  DftSpectrum spec =
      empirical_spectrum([](double) { return 2.5; }, 2.0 * M_PI, 256, 1.0);
  REQUIRE(spec.support.size() == 1);
  CHECK(spec.support[0] == 0);
  CHECK(spec.freq[0] == 0.0);
}

TEST_CASE("empirical_spectrum rejects Nyquist violations") {
  CHECK_THROWS_AS(
      empirical_spectrum([](double x) { return std::sin(x); }, 2.0 * M_PI, 16,
                         10.0),
      ContractError);
}

TEST_CASE("DFT support of theoretical_qrun is contained in the prediction") {
  // Run both routes and compare; integer weights put every true
  // frequency exactly on a DFT bin.
  SplitMix64 rng(14);
  const std::vector<double> w = {1.0, 2.0};
  Observable obs = Observable::random_hermitian(2, rng);
  auto f = [&](double x) {
    Eigen::VectorXd v(1);
    v << x;
    return theoretical_qrun(w, 1, obs, v);
  };
  FrequencySet predicted = predicted_spectrum(w, 1);
  DftSpectrum dft = empirical_spectrum(f, 2.0 * M_PI, 256, 3.0);
  CHECK(!dft.support.empty());
  for (int k : dft.support) {
    Eigen::VectorXd omega(1);
    omega << dft.freq[k];
    CHECK(predicted.contains(omega));
  }
}

TEST_CASE("without_largest removes the full +- pair") {
  FrequencySet set = predicted_spectrum({1.0, 3.0}, 1);
  FrequencySet cut = set.without_largest();
  CHECK(cut.size() == 7);
  Eigen::VectorXd four(1);
  four << 4.0;
  CHECK(!cut.contains(four));
  four << -4.0;
  CHECK(!cut.contains(four));
  four << 3.0;
  CHECK(cut.contains(four));
}
