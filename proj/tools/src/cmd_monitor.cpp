#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "session.hpp"

namespace seqmon::cli {
namespace {

int run_monitor(const session_options& opt) {
  opt.require_m("monitor");
  csv_table table = load_table(opt.input, opt.header());
  if (opt.log_returns) table = log_return_table(table);

  const score_stream stream = make_stream(parse_functional(opt.functional), table.columns);
  if (table.row_count() < opt.m)
    throw std::runtime_error("monitor: input has " + std::to_string(table.row_count()) +
                             " data rows but training needs m = " + std::to_string(opt.m));
  const std::vector<param_vector> scores = score_rows(table, stream);
  const std::vector<detector_kind> kinds = parse_detectors(opt.detectors);

  monitor_config cfg;
  cfg.m = opt.m;
  cfg.weight = make_weight(opt);
  cfg.detectors = kinds;
  cfg.critical_values = critical_values(opt, kinds, static_cast<int>(stream.dimension()));
  if (cfg.weight.closed_end()) cfg.horizon = closed_end_steps(opt.m, opt.horizon_t);

  monitor mon({scores.data(), opt.m}, cfg, make_lrv(opt));

  std::cout << "k,weight";
  for (const auto kind : kinds)
    std::cout << ',' << to_string(kind) << ',' << to_string(kind) << "_weighted,"
              << to_string(kind) << "_rejected";
  std::cout << '\n';

  for (std::size_t r = opt.m; r < scores.size(); ++r) {
    if (cfg.horizon != 0 && mon.steps() == cfg.horizon) {
      std::cerr << "closed-end horizon of " << cfg.horizon << " steps reached; "
                << scores.size() - r << " rows unread\n";
      break;
    }
    const step_report rep = mon.step(scores[r]);
    std::cout << rep.k << ',' << format_g6(rep.weight);
    for (const auto& d : rep.detectors())
      std::cout << ',' << format_g6(d.raw) << ',' << format_g6(d.weighted) << ','
                << (d.rejected ? '1' : '0');
    std::cout << '\n';
  }

  bool any = false;
  for (const auto kind : kinds) {
    if (const auto hit = mon.first_rejection(kind)) {
      any = true;
      std::cerr << to_string(kind) << ": first rejection at k = " << *hit
                << " (data row " << opt.m + *hit << ")\n";
    } else {
      std::cerr << to_string(kind) << ": no rejection in " << mon.steps()
                << " monitoring steps\n";
    }
  }
  return any ? 2 : 0;
}

}  // namespace

void register_monitor(CLI::App& app, int& rc) {
  auto opt = std::make_shared<session_options>();
  CLI::App* cmd = app.add_subcommand(
      "monitor", "stream a csv through the detectors and report rejections");
  add_session_flags(*cmd, *opt);
  cmd->callback([opt, cmd, &rc] {
    apply_config(*cmd, opt->config_file);
    rc = run_monitor(*opt);
  });
}

}  // namespace seqmon::cli
