#include "seqmon/experiments.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "seqmon/csv.hpp"
#include "seqmon/parallel.hpp"
#include "seqmon/rng.hpp"

namespace seqmon {

data_model parse_model(std::string_view name) {
  if (name == "M1" || name == "m1") return data_model::m1;
  if (name == "M2" || name == "m2") return data_model::m2;
  if (name == "M3" || name == "m3") return data_model::m3;
  if (name == "M4" || name == "m4") return data_model::m4;
  if (name == "LM1" || name == "lm1") return data_model::lm1;
  if (name == "LM2" || name == "lm2") return data_model::lm2;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected M1..M4, LM1, LM2)");
}

std::string_view to_string(data_model model) {
  switch (model) {
    case data_model::m1: return "M1";
    case data_model::m2: return "M2";
    case data_model::m3: return "M3";
    case data_model::m4: return "M4";
    case data_model::lm1: return "LM1";
    case data_model::lm2: return "LM2";
  }
  throw std::logic_error("to_string: bad data_model");
}

functional_kind model_functional(data_model model) {
  return (model == data_model::lm1 || model == data_model::lm2)
             ? functional_kind::linear_model
             : functional_kind::mean;
}

Eigen::Index model_dimension(data_model model) {
  return model_functional(model) == functional_kind::mean ? 1 : 2;
}

double model_ar_coefficient(data_model model) {
  switch (model) {
    case data_model::m2: return 0.1;
    case data_model::m3: return 0.5;
    case data_model::m4: return 0.7;
    default: return 0.0;
  }
}

bandwidth_strength default_bandwidth_strength(data_model model) {
  return model_ar_coefficient(model) >= 0.5 ? bandwidth_strength::strong
                                            : bandwidth_strength::weak;
}

namespace {

constexpr std::size_t burn_in = 100;

Eigen::MatrixXd generate_mean(data_model model, std::size_t m, std::uint64_t n,
                              const std::optional<change_spec>& change,
                              std::uint64_t seed) {
  const std::size_t total = m + static_cast<std::size_t>(n);
  Eigen::MatrixXd rows(total, 1);
  std::mt19937_64 engine = substream(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double phi = model_ar_coefficient(model);
  if (phi == 0.0) {
    for (std::size_t t = 0; t < total; ++t)
      rows(static_cast<Eigen::Index>(t), 0) = gauss(engine);
  } else {
    double x = 0.0;
    for (std::size_t t = 0; t < burn_in; ++t) x = phi * x + gauss(engine);
    for (std::size_t t = 0; t < total; ++t) {
      x = phi * x + gauss(engine);
      rows(static_cast<Eigen::Index>(t), 0) = x;
    }
  }
  if (change) {
    // The shift applies to observations m + k_star, m + k_star + 1, ...
    const std::size_t first = m + static_cast<std::size_t>(change->k_star) - 1;
    for (std::size_t t = first; t < total; ++t)
      rows(static_cast<Eigen::Index>(t), 0) += change->delta;
  }
  return rows;
}

Eigen::MatrixXd generate_lm(data_model model, std::size_t m, std::uint64_t n,
                            const std::optional<change_spec>& change,
                            std::uint64_t seed, const generator_options& opt) {
  const std::size_t total = m + static_cast<std::size_t>(n);
  Eigen::MatrixXd rows(total, 3);
  std::mt19937_64 engine = substream(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_sd = std::sqrt(0.5);
  const std::size_t change_from =
      change ? m + static_cast<std::size_t>(change->k_star) - 1 : total;
  const double delta = change ? change->delta : 0.0;

  if (model == data_model::lm1) {
    const double reg_sd = std::sqrt(0.5);
    for (std::size_t t = 0; t < total; ++t) {
      const double x = reg_sd * gauss(engine);
      const double eps = noise_sd * gauss(engine);
      const double slope = 1.0 + (t >= change_from ? delta : 0.0);
      const auto r = static_cast<Eigen::Index>(t);
      rows(r, 0) = 1.0;
      rows(r, 1) = x;
      rows(r, 2) = 1.0 + slope * x + eps;
    }
    return rows;
  }

  // LM2: regressor 1 + G_t with G_t = vol_t Z_t and
  // vol_t^2 = 0.5 + 0.2 prev + 0.3 vol_{t-1}^2, where prev is G_{t-1}^2, or
  // the raw innovation Z_{t-1} under the alternative reading (clamped at 0).
  double var = 1.0;
  double prev = 0.0;  // G_{t-1}^2 or Z_{t-1}
  for (std::size_t t = 0; t < burn_in; ++t) {
    var = std::max(0.0, 0.5 + 0.2 * prev + 0.3 * var);
    const double z = gauss(engine);
    prev = opt.lm2_raw_innovation_volatility ? z : var * z * z;
  }
  for (std::size_t t = 0; t < total; ++t) {
    var = std::max(0.0, 0.5 + 0.2 * prev + 0.3 * var);
    const double z = gauss(engine);
    const double g = std::sqrt(var) * z;
    prev = opt.lm2_raw_innovation_volatility ? z : g * g;
    const double eps = noise_sd * gauss(engine);
    const double slope = 1.0 + (t >= change_from ? delta : 0.0);
    const auto r = static_cast<Eigen::Index>(t);
    rows(r, 0) = 1.0;
    rows(r, 1) = 1.0 + g;
    rows(r, 2) = 1.0 + slope * rows(r, 1) + eps;
  }
  return rows;
}

}  // namespace

Eigen::MatrixXd generate(data_model model, std::size_t m, std::uint64_t n,
                         std::optional<change_spec> change, std::uint64_t seed,
                         const generator_options& opt) {
  if (m < 1) throw std::invalid_argument("generate: need m >= 1");
  if (n < 1) throw std::invalid_argument("generate: need n >= 1");
  if (change && change->k_star < 1)
    throw std::invalid_argument("generate: k_star must be >= 1");
  if (change && change->k_star > n)
    throw std::invalid_argument("generate: k_star lies beyond the horizon");
  return model_functional(model) == functional_kind::mean
             ? generate_mean(model, m, n, change, seed)
             : generate_lm(model, m, n, change, seed, opt);
}

double true_lrv(data_model model) {
  const double phi = model_ar_coefficient(model);
  if (model_functional(model) != functional_kind::mean)
    throw std::invalid_argument("true_lrv: no closed form for regression models");
  return 1.0 / ((1.0 - phi) * (1.0 - phi));
}

double plan_bandwidth(const experiment_plan& plan) {
  if (plan.bandwidth) {
    if (!(*plan.bandwidth > 0.0))
      throw std::invalid_argument("experiment: bandwidth must be positive");
    return *plan.bandwidth;
  }
  const bandwidth_strength s =
      plan.bandwidth_rule_override.value_or(default_bandwidth_strength(plan.model));
  return bandwidth_rule(plan.m, s);
}

namespace {

struct cell_counts {
  std::array<std::uint64_t, 3> rejections{};  // aligned with plan.detectors
  std::uint64_t valid = 0;
  std::uint64_t degenerate = 0;
};

void validate_plan(const experiment_plan& plan,
                   std::span<const double> critical_values) {
  if (plan.m < 2) throw std::invalid_argument("experiment: need m >= 2");
  if (plan.horizon < 1) throw std::invalid_argument("experiment: need horizon >= 1");
  if (plan.replications < 1)
    throw std::invalid_argument("experiment: need replications >= 1");
  if (plan.detectors.empty() || plan.detectors.size() > 3)
    throw std::invalid_argument("experiment: need 1..3 detectors");
  if (critical_values.size() != plan.detectors.size())
    throw std::invalid_argument("experiment: need one critical value per detector");
  if (plan.use_true_lrv &&
      model_functional(plan.model) != functional_kind::mean)
    throw std::invalid_argument(
        "experiment: true variance is only available for mean models");
  plan_bandwidth(plan);  // validates the bandwidth choice
}

monitor_config plan_monitor_config(const experiment_plan& plan,
                                   std::span<const double> critical_values) {
  monitor_config cfg;
  cfg.m = plan.m;
  cfg.weight = weight_function(plan.gamma, plan.epsilon, plan.t_lower, plan.t_upper);
  cfg.detectors = plan.detectors;
  cfg.critical_values.assign(critical_values.begin(), critical_values.end());
  cfg.horizon = plan.horizon;
  cfg.q_post_window_includes_training_end = plan.q_post_window_includes_training_end;
  return cfg;
}

cell_counts run_cell(const experiment_plan& plan,
                     const std::optional<change_spec>& change,
                     const monitor_config& cfg, double bandwidth, unsigned threads) {
  const score_stream stream(model_functional(plan.model), model_dimension(plan.model));
  const std::size_t reps = plan.replications;
  const std::uint64_t base = splitmix64(plan.seed);

  struct rep_outcome {
    std::array<bool, 3> rejected{};
    bool degenerate = false;
  };
  std::vector<rep_outcome> outcomes(reps);

  parallel_for(reps, threads, [&](std::size_t rep) {
    const std::uint64_t rep_seed = splitmix64(base + rep);
    const Eigen::MatrixXd rows =
        generate(plan.model, plan.m, plan.horizon, change, rep_seed, plan.generator);
    const std::size_t width = static_cast<std::size_t>(rows.cols());
    std::vector<param_vector> scores(static_cast<std::size_t>(rows.rows()));
    std::vector<double> row(width);
    for (std::size_t t = 0; t < scores.size(); ++t) {
      for (std::size_t c = 0; c < width; ++c)
        row[c] = rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c));
      stream.score(row, scores[t]);
    }
    const std::span<const param_vector> training(scores.data(), plan.m);
    rep_outcome& out = outcomes[rep];
    try {
      monitor mon =
          plan.use_true_lrv
              ? monitor(training, cfg,
                        invert_to_norm(Eigen::MatrixXd::Constant(
                            1, 1, true_lrv(plan.model))))
              : monitor(training, cfg, lrv_config{bandwidth, true});
      for (std::uint64_t k = 1; k <= plan.horizon; ++k) {
        mon.step(scores[plan.m + static_cast<std::size_t>(k) - 1]);
        if (mon.all_rejected()) break;
      }
      for (std::size_t i = 0; i < cfg.detectors.size(); ++i)
        out.rejected[i] = mon.first_rejection(cfg.detectors[i]).has_value();
    } catch (const not_positive_definite&) {
      out.degenerate = true;
    }
  });

  cell_counts counts;
  for (const auto& out : outcomes) {
    if (out.degenerate) {
      ++counts.degenerate;
      continue;
    }
    ++counts.valid;
    for (std::size_t i = 0; i < cfg.detectors.size(); ++i)
      if (out.rejected[i]) ++counts.rejections[i];
  }
  return counts;
}

std::vector<experiment_row> rows_from_counts(const experiment_plan& plan,
                                             const cell_counts& counts, double delta,
                                             std::uint64_t k_star) {
  std::vector<experiment_row> rows;
  rows.reserve(plan.detectors.size());
  for (std::size_t i = 0; i < plan.detectors.size(); ++i) {
    experiment_row r;
    r.model = plan.model;
    r.m = plan.m;
    r.gamma = plan.gamma;
    r.detector = plan.detectors[i];
    r.delta = delta;
    r.k_star = k_star;
    r.rejections = counts.rejections[i];
    r.replications = counts.valid;
    r.degenerate = counts.degenerate;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<experiment_row> size_experiment(const experiment_plan& plan,
                                            std::span<const double> critical_values,
                                            unsigned threads) {
  validate_plan(plan, critical_values);
  const monitor_config cfg = plan_monitor_config(plan, critical_values);
  const cell_counts counts =
      run_cell(plan, std::nullopt, cfg, plan_bandwidth(plan), threads);
  return rows_from_counts(plan, counts, 0.0, 0);
}

std::vector<experiment_row> power_experiment(const experiment_plan& plan,
                                             std::span<const double> critical_values,
                                             unsigned threads) {
  validate_plan(plan, critical_values);
  if (plan.deltas.empty())
    throw std::invalid_argument("power_experiment: no deltas given");
  std::vector<std::uint64_t> k_stars = plan.k_stars;
  if (k_stars.empty()) k_stars = {1, plan.m, 2 * plan.m, 4 * plan.m};
  for (std::uint64_t k_star : k_stars)
    if (k_star >= plan.horizon)
      throw std::invalid_argument("power_experiment: k_star must lie before the horizon");
  const monitor_config cfg = plan_monitor_config(plan, critical_values);
  const double bandwidth = plan_bandwidth(plan);
  std::vector<experiment_row> rows;
  for (std::uint64_t k_star : k_stars) {
    for (double delta : plan.deltas) {
      const cell_counts counts =
          run_cell(plan, change_spec{k_star, delta}, cfg, bandwidth, threads);
      auto cell_rows = rows_from_counts(plan, counts, delta, k_star);
      rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    }
  }
  return rows;
}

std::string experiment_csv(std::span<const experiment_row> rows) {
  std::ostringstream os;
  os << "model,m,gamma,detector,delta,k_star,rejections,replications,power\n";
  for (const experiment_row& r : rows) {
    os << to_string(r.model) << ',' << r.m << ',' << format_g6(r.gamma) << ','
       << to_string(r.detector) << ',' << format_g6(r.delta) << ',' << r.k_star << ','
       << r.rejections << ',' << r.replications << ',' << format_g6(r.rate()) << '\n';
  }
  return os.str();
}

}  // namespace seqmon
