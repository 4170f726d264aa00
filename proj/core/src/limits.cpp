#include "seqmon/limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "seqmon/parallel.hpp"
#include "seqmon/rng.hpp"

namespace seqmon {

namespace {

void validate_spec(const limit_spec& spec) {
  if (!(spec.gamma >= 0.0 && spec.gamma < 0.5))
    throw std::invalid_argument("limit_spec: gamma must lie in [0, 0.5)");
  if (spec.p < 1) throw std::invalid_argument("limit_spec: p must be >= 1");
  if (!(spec.horizon > 0.0))
    throw std::invalid_argument("limit_spec: horizon must be positive");
  if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon))
    throw std::invalid_argument("limit_spec: epsilon must be positive and finite");
}

void validate_mc(const mc_settings& mc) {
  if (mc.runs < 1) throw std::invalid_argument("mc_settings: runs must be >= 1");
  if (mc.grid < 2) throw std::invalid_argument("mc_settings: grid must be >= 2");
}

double time_scale(double horizon) {
  return std::isinf(horizon) ? 1.0 : horizon / (1.0 + horizon);
}

// Numerator profile over grid nodes for one Brownian path w (node-major,
// p entries per node): num[j] = the detector functional at node j before
// dividing by max(t^gamma, epsilon).
struct path_workspace {
  std::vector<double> w;
  std::vector<double> num;
};

void profile_e(const double* w, std::size_t grid, std::size_t p, double* num) {
  if (p == 1) {
    double mn = 0.0, mx = 0.0;
    num[0] = 0.0;
    for (std::size_t j = 1; j <= grid; ++j) {
      const double wj = w[j];
      if (wj < mn) mn = wj;
      if (wj > mx) mx = wj;
      num[j] = std::max(wj - mn, mx - wj);
    }
    return;
  }
  num[0] = 0.0;
  for (std::size_t i = 1; i <= grid; ++i) {
    const double* wi = w + i * p;
    double best = 0.0;
    for (std::size_t s = 0; s < i; ++s) {
      const double* ws = w + s * p;
      double d2 = 0.0;
      for (std::size_t c = 0; c < p; ++c) {
        const double d = wi[c] - ws[c];
        d2 += d * d;
      }
      if (d2 > best) best = d2;
    }
    num[i] = std::sqrt(best);
  }
}

void profile_q(const double* w, std::size_t grid, std::size_t p, double* num) {
  for (std::size_t j = 0; j <= grid; ++j) {
    const double* wj = w + j * p;
    double d2 = 0.0;
    for (std::size_t c = 0; c < p; ++c) d2 += wj[c] * wj[c];
    num[j] = std::sqrt(d2);
  }
}

// P's functional compares w(t) against (1-t)/(1-s) w(s); the final node of an
// open-end grid sits at t = 1 where the shrink factor vanishes and the term
// reduces to |w(1)|.
void profile_p(const double* w, std::size_t grid, std::size_t p, double t_max,
               double* num) {
  const bool open_end = (t_max == 1.0);
  const std::size_t last_interior = open_end ? grid - 1 : grid;
  if (p == 1) {
    double vmn = 0.0, vmx = 0.0;
    num[0] = 0.0;
    for (std::size_t j = 1; j <= last_interior; ++j) {
      const double t = t_max * (static_cast<double>(j) / static_cast<double>(grid));
      const double one_m_t = 1.0 - t;
      const double wj = w[j];
      const double vj = wj / one_m_t;
      if (vj < vmn) vmn = vj;
      if (vj > vmx) vmx = vj;
      num[j] = std::max(wj - one_m_t * vmn, one_m_t * vmx - wj);
    }
    if (open_end) num[grid] = std::abs(w[grid]);
    return;
  }
  num[0] = 0.0;
  for (std::size_t i = 1; i <= last_interior; ++i) {
    const double t = t_max * (static_cast<double>(i) / static_cast<double>(grid));
    const double one_m_t = 1.0 - t;
    const double* wi = w + i * p;
    double best = 0.0;
    for (std::size_t s = 0; s <= i; ++s) {
      const double ts = t_max * (static_cast<double>(s) / static_cast<double>(grid));
      const double f = one_m_t / (1.0 - ts);
      const double* ws = w + s * p;
      double d2 = 0.0;
      for (std::size_t c = 0; c < p; ++c) {
        const double d = wi[c] - f * ws[c];
        d2 += d * d;
      }
      if (d2 > best) best = d2;
    }
    num[i] = std::sqrt(best);
  }
  if (open_end) {
    const double* wg = w + grid * p;
    double d2 = 0.0;
    for (std::size_t c = 0; c < p; ++c) d2 += wg[c] * wg[c];
    num[grid] = std::sqrt(d2);
  }
}

}  // namespace

std::vector<std::vector<double>> simulate_limit_multi(const limit_spec& spec,
                                                      std::span<const double> gammas,
                                                      const mc_settings& mc,
                                                      unsigned threads) {
  validate_spec(spec);
  validate_mc(mc);
  if (gammas.empty()) throw std::invalid_argument("simulate_limit_multi: no gammas");
  for (double g : gammas)
    if (!(g >= 0.0 && g < 0.5))
      throw std::invalid_argument("simulate_limit_multi: gamma must lie in [0, 0.5)");

  const std::size_t grid = mc.grid;
  const std::size_t runs = mc.runs;
  const std::size_t p = static_cast<std::size_t>(spec.p);
  const std::size_t n_gammas = gammas.size();
  const double t_max = time_scale(spec.horizon);
  const double dt = t_max / static_cast<double>(grid);
  const double sdt = std::sqrt(dt);

  // Reciprocal gamma-denominators per node, shared read-only across threads.
  std::vector<std::vector<double>> dinv(n_gammas, std::vector<double>(grid + 1));
  for (std::size_t g = 0; g < n_gammas; ++g) {
    for (std::size_t j = 0; j <= grid; ++j) {
      const double t = t_max * (static_cast<double>(j) / static_cast<double>(grid));
      dinv[g][j] = 1.0 / std::max(std::pow(t, gammas[g]), spec.epsilon);
    }
  }

  std::vector<std::vector<double>> out(n_gammas, std::vector<double>(runs));
  parallel_blocks(runs, threads, [&](std::size_t lo, std::size_t hi) {
    path_workspace ws;
    ws.w.resize((grid + 1) * p);
    ws.num.resize(grid + 1);
    for (std::size_t path = lo; path < hi; ++path) {
      std::mt19937_64 engine = substream(mc.seed, path);
      // Fresh distribution per path: a cached spare normal draw must not leak
      // across paths or results would depend on the thread layout.
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (std::size_t c = 0; c < p; ++c) ws.w[c] = 0.0;
      for (std::size_t j = 1; j <= grid; ++j)
        for (std::size_t c = 0; c < p; ++c)
          ws.w[j * p + c] = ws.w[(j - 1) * p + c] + sdt * gauss(engine);
      switch (spec.kind) {
        case detector_kind::E: profile_e(ws.w.data(), grid, p, ws.num.data()); break;
        case detector_kind::Q: profile_q(ws.w.data(), grid, p, ws.num.data()); break;
        case detector_kind::P:
          profile_p(ws.w.data(), grid, p, t_max, ws.num.data());
          break;
      }
      for (std::size_t g = 0; g < n_gammas; ++g) {
        const double* di = dinv[g].data();
        double best = 0.0;
        for (std::size_t j = 0; j <= grid; ++j) {
          const double v = ws.num[j] * di[j];
          if (v > best) best = v;
        }
        out[g][path] = best;
      }
    }
  });
  for (std::size_t g = 0; g < n_gammas; ++g) std::sort(out[g].begin(), out[g].end());
  return out;
}

std::vector<double> simulate_limit(const limit_spec& spec, const mc_settings& mc,
                                   unsigned threads) {
  const double gammas[1] = {spec.gamma};
  return std::move(simulate_limit_multi(spec, gammas, mc, threads)[0]);
}

double borodin_cdf(double x, double horizon, int terms) {
  if (!(x > 0.0)) throw std::domain_error("borodin_cdf: x must be positive");
  if (!(horizon > 0.0))
    throw std::invalid_argument("borodin_cdf: horizon must be positive");
  if (terms < 1) throw std::invalid_argument("borodin_cdf: terms must be >= 1");
  const double y = x / std::sqrt(time_scale(horizon));
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  double sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double tail = 0.5 * std::erfc(static_cast<double>(k) * y * inv_sqrt2);
    const double term = 8.0 * static_cast<double>(k) * tail;
    sum += (k % 2 != 0) ? -term : term;
    if (term < 1e-14) break;
  }
  return std::clamp(1.0 + sum, 0.0, 1.0);
}

double borodin_quantile(double prob, double horizon) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::domain_error("borodin_quantile: prob must lie in (0, 1)");
  double lo = 1e-8, hi = 1.0;
  while (borodin_cdf(hi, horizon) < prob) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("borodin_quantile: bracketing failed");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (borodin_cdf(mid, horizon) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double empirical_quantile(std::span<const double> sorted_sample, double alpha) {
  if (sorted_sample.empty())
    throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("empirical_quantile: alpha must lie in (0, 1)");
  const double n = static_cast<double>(sorted_sample.size());
  // Nudge guards the ceil against representation error in (1 - alpha) n.
  auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * n - 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, sorted_sample.size());
  return sorted_sample[idx - 1];
}

namespace {

std::string format_num(double v) {
  if (std::isinf(v)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string quantile_cache::key(const limit_spec& spec, double alpha,
                                const mc_settings& mc, bool exact) {
  std::ostringstream os;
  os << to_string(spec.kind) << '/' << format_num(spec.gamma) << '/' << spec.p << '/'
     << format_num(spec.horizon) << '/' << format_num(spec.epsilon) << '/'
     << format_num(alpha) << '/';
  if (exact)
    os << "exact";
  else
    os << mc.runs << ':' << mc.grid << ':' << mc.seed;
  return os.str();
}

quantile_cache quantile_cache::load(const std::filesystem::path& file) {
  quantile_cache cache;
  std::ifstream in(file);
  if (!in) return cache;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    double value = 0.0;
    if (!(fields >> key >> value))
      throw std::runtime_error("quantile cache " + file.string() + ": malformed line " +
                               std::to_string(lineno));
    cache.entries_[key] = value;
  }
  return cache;
}

void quantile_cache::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::trunc);
  if (!out)
    throw std::runtime_error("quantile cache: cannot write " + file.string());
  out << "# detector/gamma/p/horizon/epsilon/alpha/{runs:grid:seed|exact}  quantile\n";
  for (const auto& [key, value] : entries_)
    out << key << ' ' << format_num(value) << '\n';
}

std::optional<double> quantile_cache::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void quantile_cache::put(const std::string& key, double value) {
  entries_[key] = value;
}

bool exact_quantile_available(const limit_spec& spec) {
  return spec.kind == detector_kind::E && spec.gamma == 0.0 && spec.p == 1;
}

double critical_value(const limit_spec& spec, double alpha, const mc_settings& mc,
                      quantile_cache* cache, unsigned threads) {
  validate_spec(spec);
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("critical_value: alpha must lie in (0, 1)");
  const bool exact = exact_quantile_available(spec);
  const std::string key = quantile_cache::key(spec, alpha, mc, exact);
  if (cache) {
    if (auto hit = cache->find(key)) return *hit;
  }
  const double value =
      exact ? borodin_quantile(1.0 - alpha, spec.horizon)
            : empirical_quantile(simulate_limit(spec, mc, threads), alpha);
  if (cache) cache->put(key, value);
  return value;
}

}  // namespace seqmon
