#include "qrun/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qrun::qc {

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Sort and collapse clusters of values closer than tau; cluster mean keeps
// the result symmetric when the input multiset is.
std::vector<double> dedup_sorted(std::vector<double> v, double tau) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i + 1;
    while (j < v.size() && v[j] - v[j - 1] <= tau) ++j;
    double acc = 0.0;
    for (std::size_t k = i; k < j; ++k) acc += v[k];
    out.push_back(acc / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

}  // namespace

bool FrequencySet::contains(const Eigen::VectorXd& omega) const {
  if (omega.size() != dim)
    throw ShapeError("contains: frequency dimension mismatch");
  for (const auto& f : freqs)
    if ((f - omega).cwiseAbs().maxCoeff() <= tol) return true;
  return false;
}

FrequencySet FrequencySet::without_largest() const {
  double largest = 0.0;
  for (const auto& f : freqs)
    largest = std::max(largest, f.cwiseAbs().maxCoeff());
  FrequencySet out;
  out.dim = dim;
  out.tol = tol;
  for (const auto& f : freqs)
    if (f.cwiseAbs().maxCoeff() < largest - tol) out.freqs.push_back(f);
  return out;
}

FrequencySet predicted_spectrum(const std::vector<double>& w, int d,
                                double tau) {
  if (w.empty()) throw ContractError("predicted_spectrum: empty weight list");
  if (d < 1)
    throw ContractError("predicted_spectrum: dimension must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ContractError("predicted_spectrum: dedup tolerance must be positive");
  for (double wi : w)
    if (!std::isfinite(wi))
      throw ContractError("predicted_spectrum: non-finite weight");

  std::vector<double> omega = {-w[0], 0.0, w[0]};
  omega = dedup_sorted(std::move(omega), tau);
  for (std::size_t k = 1; k < w.size(); ++k) {
    std::vector<double> next;
    next.reserve(3 * omega.size());
    for (double o : omega) {
      next.push_back(o - w[k]);
      next.push_back(o);
      next.push_back(o + w[k]);
    }
    omega = dedup_sorted(std::move(next), tau);
  }

  FrequencySet set;
  set.dim = d;
  set.tol = tau;
  const std::size_t per_axis = omega.size();
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= per_axis;
  set.freqs.reserve(total);
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t c = 0; c < total; ++c) {
    Eigen::VectorXd f(d);
    for (int j = 0; j < d; ++j) f[j] = omega[idx[static_cast<std::size_t>(j)]];
    set.freqs.push_back(std::move(f));
    // Odometer increment, last axis fastest, preserves lexicographic order.
    for (int j = d - 1; j >= 0; --j) {
      auto& ij = idx[static_cast<std::size_t>(j)];
      if (++ij < per_axis) break;
      ij = 0;
    }
  }
  return set;
}

FourierFit fourier_fit(const std::vector<Eigen::VectorXd>& xs,
                       const Eigen::VectorXd& y, const FrequencySet& freqs) {
  const auto S = static_cast<Eigen::Index>(xs.size());
  const auto F = static_cast<Eigen::Index>(freqs.size());
  if (F == 0) throw ContractError("fourier_fit: empty frequency set");
  if (S != y.size())
    throw ShapeError("fourier_fit: " + std::to_string(xs.size()) +
                     " points vs " + std::to_string(y.size()) + " targets");
  if (S < 2 * F)
    throw ContractError("fourier_fit: need at least " + std::to_string(2 * F) +
                        " samples for " + std::to_string(F) +
                        " frequencies, got " + std::to_string(S));
  for (const auto& x : xs)
    if (x.size() != freqs.dim)
      throw ShapeError("fourier_fit: sample dimension mismatch");

  // Exact duplicates would silently lower the effective sample count.
  {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(S));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return lex_less(xs[std::size_t(a)], xs[std::size_t(b)]);
    });
    for (Eigen::Index i = 1; i < S; ++i)
      if (xs[std::size_t(order[std::size_t(i)])] ==
          xs[std::size_t(order[std::size_t(i - 1)])])
        throw ContractError("fourier_fit: duplicate sample points");
  }

  Eigen::MatrixXcd a(S, F);
  for (Eigen::Index s = 0; s < S; ++s)
    for (Eigen::Index f = 0; f < F; ++f) {
      const double phase = freqs.freqs[std::size_t(f)].dot(xs[std::size_t(s)]);
      a(s, f) = std::complex<double>(std::cos(phase), std::sin(phase));
    }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  const auto& r = qr.matrixR();
  const double r00 = std::abs(r(0, 0));
  // Pivot ratio as the condition estimate. Eigen's own rank threshold is too
  // forgiving for this use: past ~1e12 a double-precision solve is noise, so
  // treat that as rank deficiency too.
  const auto k =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(qr.rank()), F - 1);
  const double rkk = std::abs(r(k, k));
  const double cond =
      rkk > 0.0 ? r00 / rkk : std::numeric_limits<double>::infinity();
  if (qr.rank() < F || !(cond < 1e12))
    throw ConditioningError(
        "fourier_fit: rank-deficient design matrix (rank " +
            std::to_string(qr.rank()) + ", " + std::to_string(F) +
            " frequencies; duplicate or near-duplicate frequencies?)",
        cond);
  FourierFit fit;
  fit.condition = cond;

  const Eigen::VectorXcd yc = y.cast<std::complex<double>>();
  const Eigen::VectorXcd c = qr.solve(yc);
  fit.rms_residual =
      (a * c - yc).norm() / std::sqrt(static_cast<double>(S));
  fit.coeffs.assign(c.data(), c.data() + c.size());

  // A real-valued target forces c(-w) = conj(c(w)).
  for (Eigen::Index f = 0; f < F; ++f) {
    const Eigen::VectorXd neg = -freqs.freqs[std::size_t(f)];
    for (Eigen::Index g = 0; g < F; ++g) {
      if ((freqs.freqs[std::size_t(g)] - neg).cwiseAbs().maxCoeff() <=
          freqs.tol) {
        const double asym = std::abs(fit.coeffs[std::size_t(f)] -
                                     std::conj(fit.coeffs[std::size_t(g)]));
        fit.max_conjugate_asymmetry =
            std::max(fit.max_conjugate_asymmetry, asym);
        break;
      }
    }
  }
  return fit;
}

DftSpectrum empirical_spectrum(const std::function<double(double)>& f,
                               double period, int samples,
                               double max_expected_freq) {
  if (!(period > 0.0)) throw ContractError("empirical_spectrum: bad period");
  if (samples < 2)
    throw ContractError("empirical_spectrum: need at least 2 samples");
  if (max_expected_freq < 0.0)
    throw ContractError("empirical_spectrum: negative frequency bound");
  const double rate = 2.0 * M_PI * samples / period;
  if (rate < 4.0 * max_expected_freq)
    throw ContractError(
        "empirical_spectrum: sampling rate " + std::to_string(rate) +
        " is below 4x the largest expected frequency " +
        std::to_string(max_expected_freq));

  const int g = samples;
  Eigen::VectorXd values(g);
  for (int m = 0; m < g; ++m) {
    const double v = f(period * m / g);
    if (!std::isfinite(v))
      throw NumericError("empirical_spectrum: non-finite sample");
    values[m] = v;
  }

  // Direct transform against precomputed roots of unity; O(G^2) but exact
  // about ordering and cheap at the sizes we use.
  std::vector<std::complex<double>> root(static_cast<std::size_t>(g));
  for (int k = 0; k < g; ++k) {
    const double ang = -2.0 * M_PI * k / g;
    root[std::size_t(k)] = {std::cos(ang), std::sin(ang)};
  }

  DftSpectrum spec;
  spec.freq.resize(g);
  spec.magnitude.resize(g);
  for (int k = 0; k < g; ++k) {
    std::complex<double> acc = 0.0;
    long long idx = 0;
    for (int m = 0; m < g; ++m) {
      acc += values[m] * root[std::size_t(idx)];
      idx += k;
      if (idx >= g) idx -= g;
    }
    spec.magnitude[k] = std::abs(acc) / g;
    const int signed_k = k <= g / 2 ? k : k - g;
    spec.freq[k] = 2.0 * M_PI * signed_k / period;
  }

  const double peak = spec.magnitude.maxCoeff();
  for (int k = 0; k < g; ++k)
    if (spec.magnitude[k] > 1e-6 * peak) spec.support.push_back(k);
  return spec;
}

}  // namespace qrun::qc
