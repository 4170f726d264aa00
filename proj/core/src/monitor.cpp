#include "seqmon/monitor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace seqmon {

std::string_view to_string(detector_kind d) {
  switch (d) {
    case detector_kind::E: return "E";
    case detector_kind::Q: return "Q";
    case detector_kind::P: return "P";
  }
  throw std::logic_error("to_string: bad detector_kind");
}

detector_kind parse_detector(std::string_view name) {
  if (name == "E" || name == "e") return detector_kind::E;
  if (name == "Q" || name == "q") return detector_kind::Q;
  if (name == "P" || name == "p") return detector_kind::P;
  throw std::invalid_argument("unknown detector '" + std::string(name) +
                              "' (expected E, Q, or P)");
}

std::vector<detector_kind> parse_detectors(std::string_view names) {
  std::vector<detector_kind> out;
  std::size_t pos = 0;
  while (pos <= names.size()) {
    std::size_t comma = names.find(',', pos);
    if (comma == std::string_view::npos) comma = names.size();
    std::string_view tok = names.substr(pos, comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (!tok.empty()) {
      detector_kind d = parse_detector(tok);
      for (detector_kind seen : out)
        if (seen == d)
          throw std::invalid_argument("detector '" + std::string(tok) + "' listed twice");
      out.push_back(d);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("no detectors given");
  return out;
}

namespace {

constexpr std::size_t max_stack_dim = 8;

struct contrast_buffer {
  std::array<double, max_stack_dim> stack;
  std::vector<double> heap;
  double* get(std::size_t p) {
    if (p <= max_stack_dim) return stack.data();
    heap.resize(p);
    return heap.data();
  }
};

struct div_inv {
  double operator()(std::size_t t) const { return 1.0 / static_cast<double>(t); }
};

struct table_inv {
  const double* tbl;
  double operator()(std::size_t t) const { return tbl[t]; }
};

// Squared norm of the Cholesky-transformed contrast vector v.
inline double factor_norm2(const Eigen::MatrixXd& u, const double* v, std::size_t p) {
  double q2 = 0.0;
  for (std::size_t r = 0; r < p; ++r) {
    double acc = 0.0;
    for (std::size_t c = r; c < p; ++c)
      acc += u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * v[c];
    q2 += acc * acc;
  }
  return q2;
}

// One split-point candidate, squared and scaled: the pre window is scores
// [1, pre_end], the post window is (post_lo, m+k], scale multiplies the norm.
inline double candidate2(const double* S, std::size_t p, const Eigen::MatrixXd& u,
                         const double* hi, std::size_t pre_end, double pre_inv,
                         std::size_t post_lo, double post_inv, double scale,
                         double* v) {
  const double* pre = S + pre_end * p;
  const double* lo = S + post_lo * p;
  for (std::size_t c = 0; c < p; ++c)
    v[c] = pre[c] * pre_inv - (hi[c] - lo[c]) * post_inv;
  return factor_norm2(u, v, p) * (scale * scale);
}

template <class InvFn>
double e_value_impl(const double* S, std::size_t p, const Eigen::MatrixXd& u,
                    std::size_t m, std::size_t k, InvFn inv, double* v) {
  const double* hi = S + (m + k) * p;
  double best = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double cand = candidate2(S, p, u, hi, m + j, inv(m + j), m + j,
                                   inv(k - j), static_cast<double>(k - j), v);
    if (cand > best) best = cand;
  }
  return std::sqrt(best) / std::sqrt(static_cast<double>(m));
}

template <class InvFn>
double p_value_impl(const double* S, std::size_t p, const Eigen::MatrixXd& u,
                    std::size_t m, std::size_t k, InvFn inv, double* v) {
  const double* hi = S + (m + k) * p;
  const double pre_inv = inv(m);
  double best = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double cand = candidate2(S, p, u, hi, m, pre_inv, m + j, inv(k - j),
                                   static_cast<double>(k - j), v);
    if (cand > best) best = cand;
  }
  return std::sqrt(best) / std::sqrt(static_cast<double>(m));
}

template <class InvFn>
double q_value_impl(const double* S, std::size_t p, const Eigen::MatrixXd& u,
                    std::size_t m, std::size_t k, bool overlap, InvFn inv, double* v) {
  const double* hi = S + (m + k) * p;
  const std::size_t post_lo = overlap ? m - 1 : m;
  const double post_inv = overlap ? inv(k + 1) : inv(k);
  const double cand = candidate2(S, p, u, hi, m, inv(m), post_lo, post_inv,
                                 static_cast<double>(k), v);
  return std::sqrt(cand) / std::sqrt(static_cast<double>(m));
}

void check_detector_args(const prefix_sums& s, std::size_t m, std::size_t k,
                         const norm_matrix& norm) {
  if (m < 1 || k < 1)
    throw std::invalid_argument("detector: need m >= 1 and k >= 1");
  if (s.size() < m + k)
    throw std::invalid_argument("detector: prefix sums hold " + std::to_string(s.size()) +
                                " scores, need at least m + k = " + std::to_string(m + k));
  if (norm.dim() != s.dim())
    throw std::invalid_argument("detector: norm dimension mismatch");
}

}  // namespace

double detector_e_value(const prefix_sums& s, std::size_t m, std::size_t k,
                        const norm_matrix& norm) {
  check_detector_args(s, m, k, norm);
  contrast_buffer buf;
  const std::size_t p = static_cast<std::size_t>(s.dim());
  return e_value_impl(s.flat().data(), p, norm.cholesky_upper(), m, k, div_inv{},
                      buf.get(p));
}

double detector_q_value(const prefix_sums& s, std::size_t m, std::size_t k,
                        const norm_matrix& norm, bool post_window_includes_training_end) {
  check_detector_args(s, m, k, norm);
  contrast_buffer buf;
  const std::size_t p = static_cast<std::size_t>(s.dim());
  return q_value_impl(s.flat().data(), p, norm.cholesky_upper(), m, k,
                      post_window_includes_training_end, div_inv{}, buf.get(p));
}

double detector_p_value(const prefix_sums& s, std::size_t m, std::size_t k,
                        const norm_matrix& norm) {
  check_detector_args(s, m, k, norm);
  contrast_buffer buf;
  const std::size_t p = static_cast<std::size_t>(s.dim());
  return p_value_impl(s.flat().data(), p, norm.cholesky_upper(), m, k, div_inv{},
                      buf.get(p));
}

namespace {

void validate_config(const monitor_config& cfg) {
  if (cfg.m < 2) throw std::invalid_argument("monitor: training size m must be >= 2");
  if (cfg.detectors.empty()) throw std::invalid_argument("monitor: no detectors configured");
  if (cfg.detectors.size() > 3)
    throw std::invalid_argument("monitor: too many detectors");
  std::array<bool, 3> seen{};
  for (detector_kind d : cfg.detectors) {
    auto i = static_cast<std::size_t>(d);
    if (seen[i])
      throw std::invalid_argument("monitor: detector " + std::string(to_string(d)) +
                                  " configured twice");
    seen[i] = true;
  }
  if (cfg.critical_values.size() != cfg.detectors.size())
    throw std::invalid_argument("monitor: need one critical value per detector");
  for (double cv : cfg.critical_values)
    if (!(cv > 0.0) || !std::isfinite(cv))
      throw std::invalid_argument("monitor: critical values must be positive and finite");
  if (cfg.weight.closed_end()) {
    if (cfg.horizon == 0)
      throw std::invalid_argument("monitor: closed-end weight requires a horizon");
    const double max_steps =
        std::ceil(static_cast<double>(cfg.m) * cfg.weight.t_upper());
    if (static_cast<double>(cfg.horizon) > max_steps)
      throw std::invalid_argument("monitor: horizon exceeds m * t_upper");
  }
}

}  // namespace

monitor::monitor(std::span<const param_vector> training, const monitor_config& cfg,
                 const lrv_config& lrv)
    : monitor(training, cfg, invert_to_norm(lrv_estimate(training, lrv))) {}

monitor::monitor(std::span<const param_vector> training, const monitor_config& cfg,
                 norm_matrix norm)
    : cfg_(cfg), norm_(std::move(norm)), sums_(norm_.dim()) {
  validate_config(cfg_);
  if (training.size() != cfg_.m)
    throw std::invalid_argument("monitor: training must contain exactly m = " +
                                std::to_string(cfg_.m) + " scores, got " +
                                std::to_string(training.size()));
  load_training(training);
}

void monitor::load_training(std::span<const param_vector> training) {
  for (const param_vector& z : training) {
    if (z.size() != norm_.dim())
      throw std::invalid_argument("monitor: training score dimension mismatch");
    sums_.append(z);
  }
  inv_len_.resize(cfg_.m + 1);
  inv_len_[0] = 0.0;
  for (std::size_t t = 1; t <= cfg_.m; ++t)
    inv_len_[t] = 1.0 / static_cast<double>(t);
}

step_report monitor::step(const param_vector& score) {
  if (cfg_.horizon != 0 && k_ >= cfg_.horizon)
    throw std::runtime_error("monitor: horizon of " + std::to_string(cfg_.horizon) +
                             " steps exhausted");
  sums_.append(score);
  ++k_;
  const std::size_t total = cfg_.m + static_cast<std::size_t>(k_);
  for (std::size_t t = inv_len_.size(); t <= total; ++t)
    inv_len_.push_back(1.0 / static_cast<double>(t));

  const double t = static_cast<double>(k_) / static_cast<double>(cfg_.m);
  const double w = cfg_.weight(t);

  contrast_buffer buf;
  const std::size_t p = static_cast<std::size_t>(sums_.dim());
  double* v = buf.get(p);
  const double* S = sums_.flat().data();
  const Eigen::MatrixXd& u = norm_.cholesky_upper();
  const table_inv inv{inv_len_.data()};
  const std::size_t k = static_cast<std::size_t>(k_);

  step_report rep;
  rep.k = k_;
  rep.weight = w;
  for (std::size_t i = 0; i < cfg_.detectors.size(); ++i) {
    const detector_kind d = cfg_.detectors[i];
    double raw = 0.0;
    switch (d) {
      case detector_kind::E:
        raw = e_value_impl(S, p, u, cfg_.m, k, inv, v);
        break;
      case detector_kind::Q:
        raw = q_value_impl(S, p, u, cfg_.m, k,
                           cfg_.q_post_window_includes_training_end, inv, v);
        break;
      case detector_kind::P:
        raw = p_value_impl(S, p, u, cfg_.m, k, inv, v);
        break;
    }
    const double weighted = w * raw;
    const bool rejected = weighted > cfg_.critical_values[i];
    rep.slots[rep.active++] = {d, raw, weighted, rejected};
    auto& first = first_[static_cast<std::size_t>(d)];
    if (rejected && !first) first = k_;
  }
  return rep;
}

std::optional<std::uint64_t> monitor::first_rejection(detector_kind d) const {
  return first_[static_cast<std::size_t>(d)];
}

bool monitor::all_rejected() const {
  for (detector_kind d : cfg_.detectors)
    if (!first_[static_cast<std::size_t>(d)]) return false;
  return true;
}

}  // namespace seqmon
