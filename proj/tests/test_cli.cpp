// Copyright 2026 The cvqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end checks of the command-line surface. Takes the binary path as
// argv[1], runs it through a shell, and inspects the produced files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "[ok] " : "[FAILED] ") << what << '\n';
  if (!ok) {
    ++g_failures;
  }
}

int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    n += c == '\n';
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cvqkd_cli_tests <path-to-cvqkd-binary>\n";
    return 2;
  }
  const std::string bin = std::string("\"") + argv[1] + "\"";
  const fs::path dir =
      fs::temp_directory_path() / ("cvqkd_cli_test_" + std::to_string(getpid()));
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };

  // simulate: determinism and row count
  const std::string rec1 = p("rec1.csv"), rec2 = p("rec2.csv");
  check(run(bin + " simulate --alpha 0.5 --eta 1 --delta 0 --n 100 --seed 7"
                  " --out " + rec1 + " 2>/dev/null") == 0,
        "simulate exits cleanly");
  check(run(bin + " simulate --alpha 0.5 --eta 1 --delta 0 --n 100 --seed 7"
                  " --out " + rec2 + " 2>/dev/null") == 0,
        "simulate re-run exits cleanly");
  const std::string body1 = slurp(rec1);
  check(body1 == slurp(rec2), "simulate output is byte-identical per seed");
  check(count_lines(body1) == 101, "simulate wrote header plus 100 rows");
  check(body1.rfind("x,basis,y\n", 0) == 0, "record header is x,basis,y");

  // n = 0 is a usage error
  check(run(bin + " simulate --alpha 0.5 --n 0 --out " + p("zero.csv") +
            " 2>/dev/null") != 0,
        "simulate rejects n = 0");

  // estimate on a bigger record, then feed the JSON back into keyrate
  const std::string rec3 = p("rec3.csv"), stats = p("stats.json");
  check(run(bin + " simulate --alpha 0.5 --eta 1 --delta 0 --n 200000"
                  " --seed 11 --out " + rec3 + " 2>/dev/null") == 0,
        "simulate 200k record");
  check(run(bin + " estimate " + rec3 + " --out " + stats) == 0,
        "estimate exits cleanly");
  {
    const json j = json::parse(slurp(stats));
    check(j.contains("mean_q") && j.contains("var_p") && j.contains("n"),
          "estimate JSON carries the moment fields");
    const double vq0 = j["var_q"][0].get<double>();
    check(std::abs(vq0 - 0.5) < 0.02, "estimated q variance near 0.5");
  }

  const std::string kr1 = p("kr1.json");
  check(run(bin + " keyrate --alpha 0.5 --stats " + stats + " --out " + kr1) ==
            0,
        "keyrate accepts estimate output unchanged");
  {
    const json j = json::parse(slurp(kr1));
    check(j["status"] == "ok", "stats-driven keyrate reports ok");
    const double g = j["G"].get<double>();
    const double gf = j["G_floored"].get<double>();
    check(gf == std::max(g, 0.0), "G_floored equals max(G, 0)");
  }

  // parameter-driven keyrate at a noiseless point
  const std::string kr2 = p("kr2.json");
  check(run(bin + " keyrate --alpha 0.5 --eta 1 --delta 0 --out " + kr2) == 0,
        "parameter-driven keyrate exits cleanly");
  {
    const json j = json::parse(slurp(kr2));
    check(j["G_floored"].get<double>() > 0.0,
          "noiseless lossless channel certifies a positive rate");
    check(j["status"] == "ok", "status ok");
  }

  // unphysical statistics are rejected with a clear status
  const std::string bad = p("bad_stats.json");
  {
    std::ofstream out(bad);
    out << R"({"mean_q":[-0.5,0.5],"mean_p":[0,0],"var_q":[0.2,0.2],)"
        << R"("var_p":[0.2,0.2],"n":[[10,10],[10,10]]})";
  }
  const std::string kr3 = p("kr3.json");
  check(run(bin + " keyrate --alpha 0.5 --stats " + bad + " > " + kr3) != 0,
        "unphysical observation exits nonzero");
  check(slurp(kr3).find("observation unphysical") != std::string::npos,
        "unphysical observation is named in the output");

  // a mean convention above 1/sqrt(eta) excludes every interior point
  const std::string kr4 = p("kr4.json");
  check(run(bin + " keyrate --alpha 0.5 --eta 1 --delta 0 --mean-scale 1.5"
                  " --out " + kr4) == 0,
        "diverged bound still exits cleanly");
  {
    const json j = json::parse(slurp(kr4));
    check(j["status"] == "no certifiable key",
          "diverged bound reports no certifiable key");
    check(j["G"].is_null(), "raw G is null when diverged");
    check(j["G_floored"].get<double>() == 0.0, "G_floored is zero");
  }

  // malformed record: basis token
  const std::string broken = p("broken.csv");
  {
    std::ofstream out(broken);
    out << "x,basis,y\n0,q,0.5\n1,z,0.25\n";
  }
  const std::string est_err = p("est_err.txt");
  check(run(bin + " estimate " + broken + " 2> " + est_err) != 0,
        "malformed basis token is rejected");
  const std::string err_text = slurp(est_err);
  check(err_text.find("line 3") != std::string::npos,
        "parse error names the offending line");

  // small sweep
  const std::string sweep1 = p("sweep1.csv"), sweep2 = p("sweep2.csv");
  const std::string sweep_cmd =
      " sweep --loss-db 3 --delta 0 0.0008 --alpha-grid 0.3 0.5"
      " --n-eps 10 --n-gamma 8 ";
  check(run(bin + sweep_cmd + "--out " + sweep1 + " 2>/dev/null") == 0,
        "sweep exits cleanly");
  check(run(bin + sweep_cmd + "--out " + sweep2 + " 2>/dev/null") == 0,
        "sweep re-run exits cleanly");
  const std::string sw = slurp(sweep1);
  check(sw == slurp(sweep2), "sweep output is deterministic");
  check(count_lines(sw) == 3, "sweep wrote header plus one row per point");
  check(sw.rfind("loss_db,eta,delta,alpha_opt,G,G_floored,I_xy,S_E_given_X,"
                 "s_max,gamma_star,eps_star,eps_tilde_star,error\n",
                 0) == 0,
        "sweep header matches the documented columns");
  {
    std::istringstream rows(sw);
    std::string line;
    std::getline(rows, line);  // header
    std::getline(rows, line);  // delta = 0 row
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    check(cell == "3", "rows sorted by loss then delta");
    for (int i = 0; i < 4; ++i) {
      std::getline(cells, cell, ',');
    }
    check(std::stod(cell) > 0.0, "noiseless sweep row certifies a key");
  }

  fs::remove_all(dir);
  std::cout << (g_failures == 0 ? "all CLI checks passed\n"
                                : "CLI checks FAILED\n");
  return g_failures == 0 ? 0 : 1;
}
