#pragma once

#include <map>
#include <string>
#include <vector>

#include "qrun/autodiff.hpp"
#include "qrun/quantum.hpp"
#include "qrun/rng.hpp"

namespace qrun::data {

// Everything needed to rebuild a generated dataset bit-for-bit.
struct Provenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  std::map<std::string, std::string> tags;
};

struct Dataset {
  ad::MatRM inputs;   // [N, d]
  ad::MatRM targets;  // [N, t]; t = 0 for sample-only (density) data
  std::vector<int> train_idx;
  std::vector<int> test_idx;
  Provenance provenance;

  int count() const { return static_cast<int>(inputs.rows()); }
  int d_in() const { return static_cast<int>(inputs.cols()); }
  int d_target() const { return static_cast<int>(targets.cols()); }

  // Splits disjoint, indices in range, targets aligned with inputs.
  void validate() const;

  ad::MatRM gather_inputs(const std::vector<int>& idx) const;
  ad::MatRM gather_targets(const std::vector<int>& idx) const;
};

// --- Gaussian mixtures --------------------------------------------------------

struct MixtureDistribution {
  std::vector<double> means;
  std::vector<double> stddevs;

  int k() const { return static_cast<int>(means.size()); }
  void validate() const;
};

// k means from U(mu_lo, mu_hi), then k stddevs from U(sigma_lo, sigma_hi),
// all off one splitmix64 stream.
MixtureDistribution make_mixture(std::uint64_t seed, int k, double mu_lo,
                                 double mu_hi, double sigma_lo,
                                 double sigma_hi);

// (1/k) sum of component normal densities.
double mixture_pdf(const MixtureDistribution& dist, double x);

// Per draw: component index, then one Box-Muller normal.
Eigen::ArrayXd sample_mixture(const MixtureDistribution& dist, SplitMix64& rng,
                              int count);

// Sample-only dataset (targets are zero-width); everything lands in train.
Dataset mixture_dataset(std::uint64_t mixture_seed, std::uint64_t sample_seed,
                        int count, double sigma_lo, double sigma_hi,
                        int k = 25, double mu_lo = -8.0, double mu_hi = 8.0);

// --- quantum-circuit regression -------------------------------------------------

// count draws of x from U(-domain, domain); y from the simulated circuit;
// |x| <= train_band goes to train, the rest to test.
Dataset drqc_dataset(const qc::DrqcSpec& spec, std::uint64_t seed,
                     int count = 1000, double domain = 20.0,
                     double train_band = 10.0);

// --- images ---------------------------------------------------------------------

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<int> pixels;  // row-major, 0..255

  int at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

// kind: checker (4-pixel cells) | radial_chirp (sin(13 r^2), sweeps into
// genuinely high spatial frequencies) | gradients (diagonal ramp).
GrayImage synth_image(const std::string& kind, int size = 32);

// Pixel centers mapped onto [-1,1]^2 with corners landing exactly on the
// endpoints; intensities mapped to [-1,1]. Every pixel is a training point.
Dataset image_dataset(const std::string& kind, int size = 32);
// Same mapping for an externally loaded image; not regenerable.
Dataset image_dataset(const GrayImage& img, const std::string& source_tag);

// --- 1-D signal -----------------------------------------------------------------

// Sum of 6 seeded sinusoids (freq U(5,40), amplitude U(0.3,1), phase
// U(0,2pi), drawn per component in that order), peak-normalized, sampled on
// count uniform points over [-1,1]. Every point is a training point.
Dataset signal_dataset(std::uint64_t seed, int count = 1000);

// --- replay ---------------------------------------------------------------------

// Rebuilds a dataset from its provenance record; bit-identical to the
// original. External sources (loaded files) are refused.
Dataset regenerate(const Provenance& p);

}  // namespace qrun::data
