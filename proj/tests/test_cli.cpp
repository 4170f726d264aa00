#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "seqmon/csv.hpp"
#include "seqmon/experiments.hpp"
#include "seqmon/limits.hpp"
#include "seqmon/monitor.hpp"

// Each test spawns the installed binary (path in SEQMON_CLI) and checks its
// streams and exit code against the library run in-process.

namespace {

namespace fs = std::filesystem;

struct run_result {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  static const fs::path base = [] {
    fs::path p = fs::temp_directory_path() /
                 ("seqmon_cli_tests_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  static int counter = 0;
  fs::path p = base / ("case_" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

run_result run_cli(const std::string& args, const fs::path& dir) {
  const char* bin = std::getenv("SEQMON_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "SEQMON_CLI must point at the cli binary");
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command = std::string(bin) + " " + args + " > " + out.string() +
                              " 2> " + err.string();
  const int status = std::system(command.c_str());
  run_result r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_csv(const fs::path& file, const Eigen::MatrixXd& data) {
  std::FILE* f = std::fopen(file.string().c_str(), "w");
  REQUIRE(f != nullptr);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      std::fprintf(f, "%s%.17g", c ? "," : "", data(r, c));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

std::vector<seqmon::param_vector> matrix_scores(const Eigen::MatrixXd& data,
                                                const seqmon::score_stream& stream) {
  std::vector<seqmon::param_vector> scores;
  scores.reserve(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(data.cols()));
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      row[static_cast<std::size_t>(c)] = data(r, c);
    scores.push_back(stream.score(row));
  }
  return scores;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("monitor output matches the library trajectory") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const std::size_t m = 40;
  const Eigen::MatrixXd data =
      generate(data_model::m1, m, 60, change_spec{20, 3.0}, 1234);
  write_csv(dir / "data.csv", data);

  const mc_settings mc{300, 150, 42};
  const std::vector<detector_kind> kinds{detector_kind::E, detector_kind::Q};
  std::vector<double> cvs;
  for (const auto kind : kinds)
    cvs.push_back(critical_value({kind, 0.0, 1}, 0.05, mc));

  monitor_config cfg;
  cfg.m = m;
  cfg.weight = weight_function(0.0);
  cfg.detectors = kinds;
  cfg.critical_values = cvs;
  const score_stream stream(functional_kind::mean, 1);
  const auto scores = matrix_scores(data, stream);
  monitor mon({scores.data(), m}, cfg,
              lrv_config{bandwidth_rule(m, bandwidth_strength::weak), true});

  std::ostringstream want;
  want << "k,weight,E,E_weighted,E_rejected,Q,Q_weighted,Q_rejected\n";
  for (std::size_t r = m; r < scores.size(); ++r) {
    const step_report rep = mon.step(scores[r]);
    want << rep.k << ',' << format_g6(rep.weight);
    for (const auto& d : rep.detectors())
      want << ',' << format_g6(d.raw) << ',' << format_g6(d.weighted) << ','
           << (d.rejected ? '1' : '0');
    want << '\n';
  }
  REQUIRE(mon.first_rejection(detector_kind::E).has_value());

  const auto r = run_cli("monitor " + (dir / "data.csv").string() +
                             " --m 40 --detectors E,Q --runs 300 --grid 150 --seed 42",
                         dir);
  CHECK(r.exit_code == 2);
  CHECK(r.out == want.str());
  CHECK(r.err.find("first rejection at k = ") != std::string::npos);
}

TEST_CASE("monitor exits zero without a rejection") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const Eigen::MatrixXd data = generate(data_model::m1, 50, 10, std::nullopt, 77);
  write_csv(dir / "data.csv", data);
  const auto r =
      run_cli("monitor " + (dir / "data.csv").string() + " --m 50 --detectors E", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("no rejection in 10 monitoring steps") != std::string::npos);
}

TEST_CASE("monitor names the offending line of a bad cell") {
  const fs::path dir = work_dir();
  write_text(dir / "bad.csv", "1.0\nabc\n2.0\n");
  const auto r =
      run_cli("monitor " + (dir / "bad.csv").string() + " --m 2 --detectors E", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("constant training data reports a degenerate variance") {
  const fs::path dir = work_dir();
  write_text(dir / "const.csv", "1\n1\n1\n1\n1\n1\n");
  const auto r =
      run_cli("monitor " + (dir / "const.csv").string() + " --m 4 --detectors E", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("not positive definite") != std::string::npos);
}

TEST_CASE("monitor rejects inputs shorter than the training window") {
  const fs::path dir = work_dir();
  write_text(dir / "short.csv", "1\n2\n3\n");
  const auto r =
      run_cli("monitor " + (dir / "short.csv").string() + " --m 10 --detectors E", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("training needs m = 10") != std::string::npos);
}

TEST_CASE("monitor honours a closed-end horizon") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const Eigen::MatrixXd data = generate(data_model::m1, 20, 40, std::nullopt, 5);
  write_csv(dir / "data.csv", data);
  const auto r = run_cli("monitor " + (dir / "data.csv").string() +
                             " --m 20 --detectors E --T 1",
                         dir);
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("closed-end horizon of 20 steps reached") != std::string::npos);
  // header plus exactly ceil(m * T) = 20 report lines
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 21);
}

TEST_CASE("log returns equal monitoring the precomputed differences") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const Eigen::MatrixXd z = generate(data_model::m1, 30, 20, std::nullopt, 31);
  Eigen::MatrixXd prices(z.rows() + 1, 1);
  prices(0, 0) = 1.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    prices(r + 1, 0) = prices(r, 0) * std::exp(0.01 * z(r, 0));
  Eigen::MatrixXd returns(z.rows(), 1);
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    returns(r, 0) = std::log(prices(r + 1, 0)) - std::log(prices(r, 0));
  write_csv(dir / "prices.csv", prices);
  write_csv(dir / "returns.csv", returns);

  const std::string flags = " --m 30 --detectors E";
  const auto from_prices = run_cli(
      "monitor " + (dir / "prices.csv").string() + flags + " --log-returns", dir);
  const auto from_returns =
      run_cli("monitor " + (dir / "returns.csv").string() + flags, dir);
  CHECK(from_prices.exit_code == from_returns.exit_code);
  CHECK(from_prices.out == from_returns.out);

  write_text(dir / "nonpos.csv", "1.0\n0.0\n2.0\n");
  const auto bad = run_cli(
      "monitor " + (dir / "nonpos.csv").string() + " --m 2 --log-returns", dir);
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("positive") != std::string::npos);
  CHECK(bad.err.find("row 2") != std::string::npos);
}

TEST_CASE("a config file stands in for flags") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const Eigen::MatrixXd data = generate(data_model::m1, 25, 15, std::nullopt, 88);
  write_csv(dir / "data.csv", data);
  write_text(dir / "opts.cfg",
             "m=25\ndetectors=E\ngamma=0.25\nalpha=0.1\nruns=300\ngrid=150\n");
  const auto flagged = run_cli("monitor " + (dir / "data.csv").string() +
                                   " --m 25 --detectors E --gamma 0.25 --alpha 0.1"
                                   " --runs 300 --grid 150",
                               dir);
  const auto configured = run_cli("monitor " + (dir / "data.csv").string() +
                                      " --config " + (dir / "opts.cfg").string(),
                                  dir);
  CHECK(flagged.exit_code == configured.exit_code);
  CHECK(flagged.out == configured.out);
}

TEST_CASE("quantiles marks the exact path and reuses its cache") {
  const fs::path dir = work_dir();
  const std::string args = "quantiles --detectors E --gamma 0 --alpha 0.01,0.05,0.1";
  const auto r = run_cli(args, dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "detector,gamma,p,horizon,alpha,quantile,method\n"
        "E,0,1,inf,0.01,3.02334,exact\n"
        "E,0,1,inf,0.05,2.49767,exact\n"
        "E,0,1,inf,0.1,2.24117,exact\n");

  const std::string cache = (dir / "q.cache").string();
  const std::string mc_args =
      "quantiles --detectors Q,P --gamma 0,0.25 --alpha 0.05,0.1 --runs 400 --grid 200"
      " --cache " + cache;
  const auto first = run_cli(mc_args, dir);
  CHECK(first.exit_code == 0);
  CHECK(fs::exists(cache));
  CHECK(first.out.find(",mc\n") != std::string::npos);
  const auto second = run_cli(mc_args, dir);
  CHECK(second.exit_code == 0);
  CHECK(second.out == first.out);
}

TEST_CASE("quantiles closed-end rows use the rescaled exact law") {
  const fs::path dir = work_dir();
  const auto r = run_cli("quantiles --detectors E --gamma 0 --alpha 0.05 --T 4", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "detector,gamma,p,horizon,alpha,quantile,method\n"
        "E,0,1,4,0.05,2.23399,exact\n");
}

TEST_CASE("experiment reruns byte-identically from a fixed plan") {
  const fs::path dir = work_dir();
  write_text(dir / "plan.txt",
             "model = M1   # iid gaussian\n"
             "m = 50\n"
             "horizon = 150\n"
             "detectors = E,Q\n"
             "replications = 40\n"
             "seed = 9\n"
             "runs = 400\n"
             "grid = 200\n");
  const std::string args = "experiment " + (dir / "plan.txt").string();
  const auto first = run_cli(args, dir);
  CHECK(first.exit_code == 0);
  CHECK(first.out.rfind("model,m,gamma,detector,delta,k_star,rejections,replications,power\n",
                        0) == 0);
  CHECK(std::count(first.out.begin(), first.out.end(), '\n') == 3);
  const auto second = run_cli(args, dir);
  CHECK(second.out == first.out);

  write_text(dir / "power.txt",
             "model = M1\nm = 50\nhorizon = 150\ndetectors = E\nreplications = 20\n"
             "seed = 9\nruns = 400\ngrid = 200\ndeltas = 0,2\nk_stars = 1\n");
  const auto power = run_cli("experiment " + (dir / "power.txt").string(), dir);
  CHECK(power.exit_code == 0);
  // one row per delta; delta 0 replays the size study, delta 2 must reject more
  CHECK(std::count(power.out.begin(), power.out.end(), '\n') == 3);

  write_text(dir / "bad.txt", "model = M1\nstride = 3\n");
  const auto bad = run_cli("experiment " + (dir / "bad.txt").string(), dir);
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("plan line 2") != std::string::npos);
  CHECK(bad.err.find("stride") != std::string::npos);

  const auto absent = run_cli("experiment " + (dir / "nope.txt").string(), dir);
  CHECK(absent.exit_code == 1);
  CHECK(absent.err.find("cannot open") != std::string::npos);
}

TEST_CASE("replay boundaries match an offline recomputation") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const std::size_t m = 30;
  std::mt19937_64 gen(404);
  Eigen::MatrixXd data(260, 1);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    std::normal_distribution<double> gauss(r < 90 ? 0.0 : 7.0, 1.0);
    data(r, 0) = gauss(gen);
  }
  write_csv(dir / "two.csv", data);

  const mc_settings mc{400, 200, 42};
  const std::vector<detector_kind> kinds{detector_kind::E, detector_kind::Q,
                                         detector_kind::P};
  std::vector<double> cvs;
  for (const auto kind : kinds)
    cvs.push_back(critical_value({kind, 0.0, 1}, 0.05, mc));

  monitor_config cfg;
  cfg.m = m;
  cfg.weight = weight_function(0.0);
  cfg.detectors = kinds;
  cfg.critical_values = cvs;
  const score_stream stream(functional_kind::mean, 1);
  const auto scores = matrix_scores(data, stream);
  const lrv_config lrv{bandwidth_rule(m, bandwidth_strength::weak), true};

  std::ostringstream want;
  want << "phase,train_start,train_end,detector,rejection\n";
  std::size_t start = 0;
  std::optional<std::size_t> first_boundary;
  for (std::size_t phase = 1; scores.size() - start >= m; ++phase) {
    monitor mon({scores.data() + start, m}, cfg, lrv);
    const std::size_t first_row = start + m;
    for (std::size_t r = first_row; r < scores.size() && !mon.all_rejected(); ++r)
      mon.step(scores[r]);
    std::uint64_t last_k = 0;
    for (const auto kind : kinds) {
      want << phase << ',' << start + 1 << ',' << start + m << ',' << to_string(kind)
           << ',';
      if (const auto hit = mon.first_rejection(kind)) {
        want << first_row + *hit;
        last_k = std::max(last_k, *hit);
      } else {
        want << "did not stop";
      }
      want << '\n';
    }
    if (!mon.all_rejected()) break;
    if (!first_boundary) first_boundary = first_row + last_k;
    start = first_row + static_cast<std::size_t>(last_k) - 1;
  }
  REQUIRE(first_boundary.has_value());
  // the injected break sits at data row 91
  CHECK(*first_boundary >= 91);
  CHECK(*first_boundary <= 91 + 5 * m);

  const auto r = run_cli("replay " + (dir / "two.csv").string() +
                             " --m 30 --runs 400 --grid 200 --seed 42",
                         dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out == want.str());
  CHECK(r.err.find("retraining there") != std::string::npos);
}

TEST_CASE("replay segments a slope change in regression data") {
  using namespace seqmon;
  const fs::path dir = work_dir();
  const Eigen::MatrixXd quiet = generate(data_model::lm1, 40, 60, std::nullopt, 7);
  const Eigen::MatrixXd shifted =
      generate(data_model::lm1, 1, 120, change_spec{1, 4.0}, 8).bottomRows(120);
  Eigen::MatrixXd data(quiet.rows() + shifted.rows(), 3);
  data << quiet, shifted;
  write_csv(dir / "lm.csv", data);

  const auto r = run_cli("replay " + (dir / "lm.csv").string() +
                             " --functional lm --m 40 --detectors E --runs 400"
                             " --grid 200",
                         dir);
  CHECK(r.exit_code == 0);
  // slope break at data row 101: phase 1 must stop, then retrain
  REQUIRE(r.out.rfind("phase,", 0) == 0);
  std::istringstream lines(r.out);
  std::string header, phase1;
  std::getline(lines, header);
  std::getline(lines, phase1);
  CHECK(phase1.rfind("1,1,40,E,", 0) == 0);
  REQUIRE(phase1.find("did not stop") == std::string::npos);
  const std::size_t boundary = std::stoul(phase1.substr(phase1.rfind(',') + 1));
  CHECK(boundary >= 101);
  CHECK(boundary <= 101 + 5 * 40);
  CHECK(r.out.find("2,") != std::string::npos);
}

TEST_CASE("replay refuses data shorter than one training window") {
  const fs::path dir = work_dir();
  write_text(dir / "tiny.csv", "1\n2\n3\n");
  const auto r = run_cli("replay " + (dir / "tiny.csv").string() + " --m 30", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("training needs m = 30") != std::string::npos);
}

}  // TEST_SUITE
