#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "session.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sequential change-point monitoring over csv score streams"};
  app.require_subcommand(1);
  int rc = 0;
  seqmon::cli::register_monitor(app, rc);
  seqmon::cli::register_quantiles(app, rc);
  seqmon::cli::register_experiment(app, rc);
  seqmon::cli::register_replay(app, rc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "seqmon: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
