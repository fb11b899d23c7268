#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "qrun/errors.hpp"

namespace qrun::qc {

// Deduplicated, lexicographically sorted set of d-dimensional angular
// frequencies.
struct FrequencySet {
  int dim = 1;
  double tol = 1e-9;
  std::vector<Eigen::VectorXd> freqs;

  std::size_t size() const { return freqs.size(); }
  // Membership within tol in the max norm.
  bool contains(const Eigen::VectorXd& omega) const;
  // Copy with every frequency of maximal max-norm removed (both signs).
  FrequencySet without_largest() const;
};

// Frequencies reachable by n re-uploads of each input coordinate with weights
// w: the recursion Omega_k = (Omega_{k-1} - w_k) u Omega_{k-1} u
// (Omega_{k-1} + w_k) from Omega_1 = {-w_1, 0, w_1}, extended to d dimensions
// as a Cartesian product. Values closer than tau collapse to one entry.
FrequencySet predicted_spectrum(const std::vector<double>& w, int d,
                                double tau = 1e-9);

struct FourierFit {
  std::vector<std::complex<double>> coeffs;  // one per frequency, set order
  double rms_residual = 0.0;
  double condition = 0.0;                    // |R00 / Rkk| from pivoted QR
  double max_conjugate_asymmetry = 0.0;      // over mirrored frequency pairs
};

// Least-squares fit of y_s ~ sum_f c_f exp(i w_f . x_s). Needs at least
// 2 |freqs| distinct sample points; throws ConditioningError when the design
// matrix is rank deficient.
FourierFit fourier_fit(const std::vector<Eigen::VectorXd>& xs,
                       const Eigen::VectorXd& y, const FrequencySet& freqs);

struct DftSpectrum {
  Eigen::VectorXd freq;       // signed angular frequency per bin
  Eigen::VectorXd magnitude;  // |X_k| / fraction of signal, bin order
  std::vector<int> support;   // bins with magnitude > 1e-6 * max
};

// Direct DFT of f sampled on `samples` uniform points over one period.
// Requires a sampling rate of at least 4x the largest expected frequency.
DftSpectrum empirical_spectrum(const std::function<double(double)>& f,
                               double period, int samples,
                               double max_expected_freq);

}  // namespace qrun::qc
