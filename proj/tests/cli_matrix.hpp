// Scripted exit-code matrix shared by the CLI tests and the acceptance run.
#pragma once

#include <string>
#include <vector>

namespace strictlyap::cli_fixtures {

struct CliCase {
  std::string args;
  int code;
};

/// `data` is the test data directory, `scratch` a writable directory.
inline std::vector<CliCase> cli_exit_matrix(const std::string& data, const std::string& scratch) {
  return {
      {"list-bundles", 0},
      {"verify --bundle ngs --alpha 10000 --checks hypotheses,decay", 0},
      {"sweep --bundle friction-const --alpha-min 2 --alpha-max 16", 0},
      {"verify --bundle " + data + "/linear.json --alpha 100 --checks compatibility,decay --n-initial 2 --t-end 2", 0},
      {"verify --bundle nonuges --alpha 1 --checks decay", 1},
      {"sweep --bundle satfb --alpha-min 1 --alpha-max 8", 1},
      {"verify --bundle ngs --alpha 0", 2},
      {"verify --bundle no-such-bundle", 2},
      {"verify --bundle ngs --checks compatibility", 2},
      {"sweep --bundle satfb --alpha-min 4 --alpha-max 2", 2},
      {"simulate --bundle nonuges --x0 1,2", 2},
      {"simulate --bundle " + data + "/blowup.json --x0 2 --out " + scratch + "/blowup.csv", 3},
  };
}

}  // namespace strictlyap::cli_fixtures
