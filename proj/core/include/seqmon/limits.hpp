#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmon/monitor.hpp"

namespace seqmon {

// Law of the weighted detector's supremum under no change.  horizon is the
// monitoring length as a multiple of the training size; infinity = open-end.
struct limit_spec {
  detector_kind kind = detector_kind::E;
  double gamma = 0.0;
  int p = 1;
  double horizon = std::numeric_limits<double>::infinity();
  double epsilon = 1e-10;
};

struct mc_settings {
  std::size_t runs = 10000;
  std::size_t grid = 5000;
  std::uint64_t seed = 42;
};

// Sorted sample (size runs) of the limit statistic: a p-dimensional Brownian
// motion on a uniform grid over [0, t_max], t_max = horizon / (1 + horizon),
// with the detector's functional applied over grid nodes and divided by
// max(t^gamma, epsilon).
std::vector<double> simulate_limit(const limit_spec& spec, const mc_settings& mc,
                                   unsigned threads = 0);

// Same paths evaluated for several gammas at once; result[g] is the sorted
// sample for gammas[g].  simulate_limit(spec with gammas[g]) gives the
// identical sample.
std::vector<std::vector<double>> simulate_limit_multi(const limit_spec& spec,
                                                      std::span<const double> gammas,
                                                      const mc_settings& mc,
                                                      unsigned threads = 0);

// Exact cdf of the E detector's gamma = 0, p = 1 limit law (the range of a
// Brownian motion over the unit interval); a finite horizon rescales the
// argument by sqrt(horizon / (1 + horizon)).
double borodin_cdf(double x,
                   double horizon = std::numeric_limits<double>::infinity(),
                   int terms = 1000);
double borodin_quantile(double prob,
                        double horizon = std::numeric_limits<double>::infinity());

// Order statistic ceil((1 - alpha) n), 1-based, of a sorted sample.
double empirical_quantile(std::span<const double> sorted_sample, double alpha);

// Text-file store of computed quantiles, keyed by the full recipe (detector,
// gamma, p, horizon, alpha, and the MC settings or "exact").
class quantile_cache {
 public:
  quantile_cache() = default;
  static quantile_cache load(const std::filesystem::path& file);  // absent file -> empty
  void save(const std::filesystem::path& file) const;

  static std::string key(const limit_spec& spec, double alpha, const mc_settings& mc,
                         bool exact);

  std::optional<double> find(const std::string& key) const;
  void put(const std::string& key, double value);
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, double> entries_;
};

// True when the (1 - alpha) quantile of spec's law has a closed form.
bool exact_quantile_available(const limit_spec& spec);

// (1 - alpha) quantile of the limit law: exact inversion where available,
// otherwise the simulated order statistic; memoized in cache when given.
double critical_value(const limit_spec& spec, double alpha, const mc_settings& mc,
                      quantile_cache* cache = nullptr, unsigned threads = 0);

}  // namespace seqmon
