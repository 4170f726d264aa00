#include <algorithm>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "session.hpp"

namespace seqmon::cli {
namespace {

// Segments the file into monitoring phases: train on m rows, monitor until
// every configured detector has rejected, then retrain on the m rows starting
// at the last rejection. The final phase simply runs out of data.
int run_replay(const session_options& opt) {
  opt.require_m("replay");
  csv_table table = load_table(opt.input, opt.header());
  if (opt.log_returns) table = log_return_table(table);

  const score_stream stream = make_stream(parse_functional(opt.functional), table.columns);
  const std::vector<param_vector> scores = score_rows(table, stream);
  const std::vector<detector_kind> kinds = parse_detectors(opt.detectors);
  const std::size_t n = scores.size();
  if (n < opt.m)
    throw std::runtime_error("replay: input has " + std::to_string(n) +
                             " data rows but training needs m = " + std::to_string(opt.m));

  monitor_config cfg;
  cfg.m = opt.m;
  cfg.weight = make_weight(opt);
  cfg.detectors = kinds;
  cfg.critical_values = critical_values(opt, kinds, static_cast<int>(stream.dimension()));
  if (cfg.weight.closed_end()) cfg.horizon = closed_end_steps(opt.m, opt.horizon_t);

  std::cout << "phase,train_start,train_end,detector,rejection\n";

  std::size_t start = 0;
  for (std::size_t phase = 1;; ++phase) {
    if (n - start < opt.m) {
      std::cerr << "phase " << phase << ": " << n - start
                << " rows remain, fewer than m = " << opt.m << "; stopping\n";
      break;
    }
    std::optional<monitor> mon;
    try {
      mon.emplace(std::span(scores.data() + start, opt.m), cfg, make_lrv(opt));
    } catch (const not_positive_definite& e) {
      throw std::runtime_error("phase " + std::to_string(phase) + " (training rows " +
                               std::to_string(start + 1) + "-" +
                               std::to_string(start + opt.m) + "): " + e.what());
    }

    const std::size_t first_row = start + opt.m;  // first monitoring row, 0-based
    for (std::size_t r = first_row; r < n && !mon->all_rejected(); ++r) {
      if (cfg.horizon != 0 && mon->steps() == cfg.horizon) break;
      mon->step(scores[r]);
    }

    std::uint64_t last_k = 0;
    for (const auto kind : kinds) {
      std::cout << phase << ',' << start + 1 << ',' << start + opt.m << ','
                << to_string(kind) << ',';
      if (const auto hit = mon->first_rejection(kind)) {
        std::cout << first_row + *hit;  // 1-based row of the rejection
        last_k = std::max(last_k, *hit);
      } else {
        std::cout << "did not stop";
      }
      std::cout << '\n';
    }

    if (!mon->all_rejected()) {
      std::cerr << "phase " << phase << ": monitoring ended after " << mon->steps()
                << " steps without every detector rejecting\n";
      break;
    }
    std::cerr << "phase " << phase << ": all detectors rejected by data row "
              << first_row + last_k << "; retraining there\n";
    start = first_row + static_cast<std::size_t>(last_k) - 1;
  }
  return 0;
}

}  // namespace

void register_replay(CLI::App& app, int& rc) {
  auto opt = std::make_shared<session_options>();
  CLI::App* cmd = app.add_subcommand(
      "replay", "segment a csv into phases, retraining after joint rejections");
  add_session_flags(*cmd, *opt);
  cmd->callback([opt, cmd, &rc] {
    apply_config(*cmd, opt->config_file);
    rc = run_replay(*opt);
  });
}

}  // namespace seqmon::cli
