#include "qrun/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace qrun::data {

using ad::MatRM;

void Dataset::validate() const {
  if (targets.rows() != inputs.rows())
    throw ShapeError("dataset: input/target row mismatch");
  std::unordered_set<int> seen;
  auto check = [&](const std::vector<int>& idx) {
    for (int i : idx) {
      if (i < 0 || i >= count())
        throw ContractError("dataset: split index out of range");
      if (!seen.insert(i).second)
        throw ContractError("dataset: splits overlap");
    }
  };
  check(train_idx);
  check(test_idx);
}

MatRM Dataset::gather_inputs(const std::vector<int>& idx) const {
  MatRM out(static_cast<Eigen::Index>(idx.size()), inputs.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = inputs.row(idx[r]);
  return out;
}

MatRM Dataset::gather_targets(const std::vector<int>& idx) const {
  MatRM out(static_cast<Eigen::Index>(idx.size()), targets.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = targets.row(idx[r]);
  return out;
}

// --- mixtures -----------------------------------------------------------------

void MixtureDistribution::validate() const {
  if (means.empty() || means.size() != stddevs.size())
    throw ContractError("mixture: component arrays empty or mismatched");
  for (double s : stddevs)
    if (!(s > 0.0)) throw ContractError("mixture: stddevs must be positive");
}

MixtureDistribution make_mixture(std::uint64_t seed, int k, double mu_lo,
                                 double mu_hi, double sigma_lo,
                                 double sigma_hi) {
  if (k < 1) throw ContractError("make_mixture: need at least one component");
  if (!(mu_lo <= mu_hi) || !(sigma_lo > 0.0) || !(sigma_lo <= sigma_hi))
    throw ContractError("make_mixture: invalid ranges");
  SplitMix64 rng(seed);
  MixtureDistribution d;
  d.means.reserve(std::size_t(k));
  d.stddevs.reserve(std::size_t(k));
  for (int i = 0; i < k; ++i) d.means.push_back(rng.uniform(mu_lo, mu_hi));
  for (int i = 0; i < k; ++i)
    d.stddevs.push_back(rng.uniform(sigma_lo, sigma_hi));
  return d;
}

double mixture_pdf(const MixtureDistribution& dist, double x) {
  dist.validate();
  const double norm = 1.0 / std::sqrt(2.0 * M_PI);
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.means.size(); ++i) {
    const double z = (x - dist.means[i]) / dist.stddevs[i];
    acc += norm / dist.stddevs[i] * std::exp(-0.5 * z * z);
  }
  return acc / static_cast<double>(dist.k());
}

Eigen::ArrayXd sample_mixture(const MixtureDistribution& dist, SplitMix64& rng,
                              int count) {
  dist.validate();
  if (count < 1) throw ContractError("sample_mixture: count must be positive");
  Eigen::ArrayXd out(count);
  for (int i = 0; i < count; ++i) {
    const std::size_t c = rng.uniform_index(std::size_t(dist.k()));
    out[i] = dist.means[c] + dist.stddevs[c] * rng.normal();
  }
  return out;
}

Dataset mixture_dataset(std::uint64_t mixture_seed, std::uint64_t sample_seed,
                        int count, double sigma_lo, double sigma_hi, int k,
                        double mu_lo, double mu_hi) {
  MixtureDistribution dist =
      make_mixture(mixture_seed, k, mu_lo, mu_hi, sigma_lo, sigma_hi);
  SplitMix64 rng(sample_seed);
  Eigen::ArrayXd samples = sample_mixture(dist, rng, count);

  Dataset ds;
  ds.inputs = Eigen::Map<const MatRM>(samples.data(), count, 1);
  ds.targets.resize(count, 0);
  ds.train_idx.resize(std::size_t(count));
  for (int i = 0; i < count; ++i) ds.train_idx[std::size_t(i)] = i;

  ds.provenance.generator = "mixture";
  ds.provenance.seed = mixture_seed;
  ds.provenance.params = {
      {"sample_seed", static_cast<double>(sample_seed)},
      {"count", static_cast<double>(count)},
      {"k", static_cast<double>(k)},
      {"mu_lo", mu_lo},
      {"mu_hi", mu_hi},
      {"sigma_lo", sigma_lo},
      {"sigma_hi", sigma_hi},
  };
  ds.validate();
  return ds;
}

// --- quantum-circuit regression ---------------------------------------------------

Dataset drqc_dataset(const qc::DrqcSpec& spec, std::uint64_t seed, int count,
                     double domain, double train_band) {
  spec.validate();
  if (count < 1) throw ContractError("drqc_dataset: count must be positive");
  if (!(domain > 0.0) || !(train_band > 0.0) || train_band > domain)
    throw ContractError("drqc_dataset: need 0 < train_band <= domain");

  SplitMix64 rng(seed);
  Dataset ds;
  ds.inputs.resize(count, 1);
  ds.targets.resize(count, 1);
  for (int i = 0; i < count; ++i) {
    const double x = rng.uniform(-domain, domain);
    ds.inputs(i, 0) = x;
    ds.targets(i, 0) = qc::drqc_eval(spec, x);
    (std::abs(x) <= train_band ? ds.train_idx : ds.test_idx).push_back(i);
  }

  ds.provenance.generator = "drqc";
  ds.provenance.seed = seed;
  ds.provenance.params = {
      {"count", static_cast<double>(count)},
      {"domain", domain},
      {"train_band", train_band},
      {"train_count", static_cast<double>(ds.train_idx.size())},
  };
  ds.provenance.tags["spec"] = spec.to_json().dump();
  ds.validate();
  return ds;
}

// --- images -----------------------------------------------------------------------

namespace {

// Pixel index -> coordinate; corners land exactly on the interval ends.
double pixel_coord(int i, int extent) {
  return extent == 1 ? 0.0 : -1.0 + 2.0 * i / (extent - 1);
}

int clamp255(long v) { return static_cast<int>(std::max(0L, std::min(255L, v))); }

}  // namespace

GrayImage synth_image(const std::string& kind, int size) {
  if (size < 2) throw ContractError("synth_image: size must be at least 2");
  GrayImage img;
  img.width = img.height = size;
  img.pixels.resize(std::size_t(size) * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      int v = 0;
      if (kind == "checker") {
        v = ((x / 4 + y / 4) % 2) ? 255 : 0;
      } else if (kind == "radial_chirp") {
        const double u = pixel_coord(x, size), w = pixel_coord(y, size);
        const double r2 = u * u + w * w;
        v = clamp255(std::lround((std::sin(13.0 * r2) + 1.0) * 127.5));
      } else if (kind == "gradients") {
        v = clamp255(std::lround(255.0 * (x + y) / (2.0 * (size - 1))));
      } else {
        throw ContractError("synth_image: unknown kind \"" + kind + "\"");
      }
      img.pixels[std::size_t(y) * size + x] = v;
    }
  return img;
}

namespace {

Dataset image_to_dataset(const GrayImage& img) {
  if (img.width < 2 || img.height < 2 ||
      img.pixels.size() != std::size_t(img.width) * img.height)
    throw ContractError("image_dataset: malformed image");
  for (int v : img.pixels)
    if (v < 0 || v > 255)
      throw ContractError("image_dataset: pixel depth out of range");

  const int n = img.width * img.height;
  Dataset ds;
  ds.inputs.resize(n, 2);
  ds.targets.resize(n, 1);
  ds.train_idx.resize(std::size_t(n));
  int r = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x, ++r) {
      ds.inputs(r, 0) = pixel_coord(x, img.width);
      ds.inputs(r, 1) = pixel_coord(y, img.height);
      ds.targets(r, 0) = img.at(x, y) / 255.0 * 2.0 - 1.0;
      ds.train_idx[std::size_t(r)] = r;
    }
  return ds;
}

}  // namespace

Dataset image_dataset(const std::string& kind, int size) {
  Dataset ds = image_to_dataset(synth_image(kind, size));
  ds.provenance.generator = "image";
  ds.provenance.params = {{"size", static_cast<double>(size)}};
  ds.provenance.tags["kind"] = kind;
  ds.validate();
  return ds;
}

Dataset image_dataset(const GrayImage& img, const std::string& source_tag) {
  Dataset ds = image_to_dataset(img);
  ds.provenance.generator = "external_image";
  ds.provenance.tags["source"] = source_tag;
  ds.validate();
  return ds;
}

// --- 1-D signal --------------------------------------------------------------------

Dataset signal_dataset(std::uint64_t seed, int count) {
  if (count < 2) throw ContractError("signal_dataset: need at least 2 points");
  constexpr int kComponents = 6;
  SplitMix64 rng(seed);
  double freq[kComponents], amp[kComponents], phase[kComponents];
  for (int c = 0; c < kComponents; ++c) {
    freq[c] = rng.uniform(5.0, 40.0);
    amp[c] = rng.uniform(0.3, 1.0);
    phase[c] = rng.uniform(0.0, 2.0 * M_PI);
  }

  Dataset ds;
  ds.inputs.resize(count, 1);
  ds.targets.resize(count, 1);
  ds.train_idx.resize(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    const double t = pixel_coord(i, count);
    double y = 0.0;
    for (int c = 0; c < kComponents; ++c)
      y += amp[c] * std::sin(freq[c] * t + phase[c]);
    ds.inputs(i, 0) = t;
    ds.targets(i, 0) = y;
    ds.train_idx[std::size_t(i)] = i;
  }
  const double peak = ds.targets.cwiseAbs().maxCoeff();
  ds.targets /= peak;

  ds.provenance.generator = "signal1d";
  ds.provenance.seed = seed;
  ds.provenance.params = {{"count", static_cast<double>(count)}};
  ds.validate();
  return ds;
}

// --- replay ---------------------------------------------------------------------------

namespace {

double need_param(const Provenance& p, const std::string& key) {
  auto it = p.params.find(key);
  if (it == p.params.end())
    throw ContractError("regenerate: provenance lacks \"" + key + "\"");
  return it->second;
}

const std::string& need_tag(const Provenance& p, const std::string& key) {
  auto it = p.tags.find(key);
  if (it == p.tags.end())
    throw ContractError("regenerate: provenance lacks tag \"" + key + "\"");
  return it->second;
}

}  // namespace

Dataset regenerate(const Provenance& p) {
  if (p.generator == "mixture")
    return mixture_dataset(
        p.seed, static_cast<std::uint64_t>(need_param(p, "sample_seed")),
        static_cast<int>(need_param(p, "count")), need_param(p, "sigma_lo"),
        need_param(p, "sigma_hi"), static_cast<int>(need_param(p, "k")),
        need_param(p, "mu_lo"), need_param(p, "mu_hi"));
  if (p.generator == "drqc")
    return drqc_dataset(
        qc::DrqcSpec::from_json(nlohmann::json::parse(need_tag(p, "spec"))),
        p.seed, static_cast<int>(need_param(p, "count")),
        need_param(p, "domain"), need_param(p, "train_band"));
  if (p.generator == "image")
    return image_dataset(need_tag(p, "kind"),
                         static_cast<int>(need_param(p, "size")));
  if (p.generator == "signal1d")
    return signal_dataset(p.seed, static_cast<int>(need_param(p, "count")));
  if (p.generator == "external_image")
    throw ContractError(
        "regenerate: externally sourced dataset cannot be rebuilt");
  throw ContractError("regenerate: unknown generator \"" + p.generator + "\"");
}

}  // namespace qrun::data
