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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvqkd/bounds.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/observation.hpp"
#include "cvqkd/record_io.hpp"

namespace {

using nlohmann::json;

double eta_from_loss_db(double loss_db) {
  return std::pow(10.0, -loss_db / 10.0);
}

double loss_db_from_eta(double eta) { return -10.0 * std::log10(eta); }

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  return out;
}

// Symmetrized Gaussian model from estimated statistics: the protocol
// modulates +-m in q, so the fitted means are centered and the conditional
// variances averaged.
cvqkd::GaussianConditional conditional_from_stats(
    const cvqkd::ObservedStatistics& stats) {
  const double m = 0.5 * (stats.mean_q[1] - stats.mean_q[0]);
  return cvqkd::GaussianConditional{{-m, m},
                                    0.5 * (stats.var_q[0] + stats.var_q[1])};
}

json finite_or_null(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return nullptr;
}

json breakdown_to_json(const cvqkd::BoundBreakdown& b, double f_ec) {
  json j;
  j["alpha"] = b.alpha_used;
  j["f_ec"] = f_ec;
  j["I_xy"] = b.I_xy;
  j["S_E_given_X"] = b.S_E_given_X;
  j["s_max"] = finite_or_null(b.s_max);
  j["S_YE_bound"] = finite_or_null(b.S_YE_bound);
  j["G"] = finite_or_null(b.G);
  j["G_floored"] = std::max(b.G, 0.0);
  j["gamma_star"] = b.argmax.gamma;
  j["eps_star"] = {b.argmax.eps[0], b.argmax.eps[1]};
  j["eps_tilde_star"] = {b.argmax.eps_tilde[0], b.argmax.eps_tilde[1]};
  j["status"] = std::isfinite(b.G) ? "ok" : "no certifiable key";
  return j;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto out = open_output(out_path);
    out << j.dump(2) << '\n';
  }
}

struct SweepRow {
  double loss_db = 0.0;
  double eta = 1.0;
  double delta = 0.0;
  std::optional<cvqkd::BoundBreakdown> result;
  std::string error;
};

std::string csv_number(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified key-rate lower bounds for binary-modulated "
               "continuous-variable QKD from homodyne statistics"};
  app.require_subcommand(1);

  // ---- simulate ----------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "Simulate a homodyne detection record and write it as CSV");
  double sim_alpha = 0.5, sim_eta = 1.0, sim_loss_db = 0.0, sim_delta = 0.0;
  double sim_mean_scale = 1.0;
  std::int64_t sim_n = 0;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  simulate->add_option("--alpha", sim_alpha, "signal amplitude");
  auto* sim_eta_opt = simulate->add_option("--eta", sim_eta,
                                           "channel transmission in (0,1]");
  auto* sim_loss_opt = simulate->add_option("--loss-db", sim_loss_db,
                                            "channel loss in dB");
  sim_loss_opt->excludes(sim_eta_opt);
  simulate->add_option("--delta", sim_delta, "excess noise");
  simulate->add_option("--mean-scale", sim_mean_scale,
                       "convention factor on the conditional q-means");
  simulate->add_option("--n", sim_n, "number of signals")
      ->required()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--out", sim_out, "output CSV path")->required();

  // ---- estimate ----------------------------------------------------------
  auto* estimate = app.add_subcommand(
      "estimate", "Estimate conditional moments from a record CSV");
  std::string est_record, est_out;
  estimate->add_option("record", est_record, "record CSV path")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--out", est_out, "output JSON path (default stdout)");

  // ---- keyrate -----------------------------------------------------------
  auto* keyrate = app.add_subcommand(
      "keyrate",
      "Compute one key-rate bound breakdown from channel parameters or from "
      "estimated statistics JSON");
  double kr_alpha = 0.5, kr_eta = 1.0, kr_loss_db = 0.0, kr_delta = 0.0;
  double kr_mean_scale = 1.0, kr_f_ec = 1.0;
  int kr_n_eps = 40, kr_n_gamma = 20;
  bool kr_asymmetric = false;
  std::string kr_stats, kr_out;
  keyrate->add_option("--alpha", kr_alpha, "signal amplitude")->required();
  auto* kr_eta_opt =
      keyrate->add_option("--eta", kr_eta, "channel transmission in (0,1]");
  auto* kr_loss_opt =
      keyrate->add_option("--loss-db", kr_loss_db, "channel loss in dB");
  kr_loss_opt->excludes(kr_eta_opt);
  auto* kr_delta_opt = keyrate->add_option("--delta", kr_delta, "excess noise");
  keyrate->add_option("--mean-scale", kr_mean_scale,
                      "convention factor on the conditional q-means");
  auto* kr_stats_opt =
      keyrate->add_option("--stats", kr_stats,
                          "statistics JSON path (alternative input source)")
          ->check(CLI::ExistingFile);
  kr_stats_opt->excludes(kr_eta_opt)->excludes(kr_loss_opt)
      ->excludes(kr_delta_opt);
  keyrate->add_option("--f-ec", kr_f_ec, "error-correction efficiency >= 1");
  keyrate->add_option("--n-eps", kr_n_eps, "grid points per mixedness axis");
  keyrate->add_option("--n-gamma", kr_n_gamma, "grid points per overlap interval");
  keyrate->add_flag("--asymmetric{true},--symmetric{false}", kr_asymmetric,
                    "untie the per-bit interior parameters");
  keyrate->add_option("--out", kr_out, "output JSON path (default stdout)");

  // ---- sweep -------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep",
      "Key-rate bound over a loss x noise grid with per-point amplitude "
      "optimization; writes CSV");
  std::vector<double> sw_loss_db, sw_delta, sw_alpha_grid;
  double sw_mean_scale = 1.0, sw_f_ec = 1.0;
  int sw_n_eps = 40, sw_n_gamma = 20;
  bool sw_asymmetric = false;
  std::string sw_out;
  sweep->add_option("--loss-db", sw_loss_db,
                    "loss grid in dB (default 0,1,...,25)");
  sweep->add_option("--delta", sw_delta,
                    "excess-noise values (default 0,0.0004,...,0.0024)");
  sweep->add_option("--alpha-grid", sw_alpha_grid,
                    "amplitude grid (default 0,0.05,...,1)");
  sweep->add_option("--mean-scale", sw_mean_scale,
                    "convention factor on the conditional q-means");
  sweep->add_option("--f-ec", sw_f_ec, "error-correction efficiency >= 1");
  sweep->add_option("--n-eps", sw_n_eps, "grid points per mixedness axis");
  sweep->add_option("--n-gamma", sw_n_gamma, "grid points per overlap interval");
  sweep->add_flag("--asymmetric{true},--symmetric{false}", sw_asymmetric,
                  "untie the per-bit interior parameters");
  sweep->add_option("--out", sw_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      cvqkd::ChannelParams params;
      params.alpha = sim_alpha;
      params.eta = *sim_loss_opt ? eta_from_loss_db(sim_loss_db) : sim_eta;
      params.delta = sim_delta;
      params.mean_scale = sim_mean_scale;
      const auto record =
          cvqkd::sample_record(cvqkd::conditional_from_params(params), sim_n,
                               sim_seed);
      auto out = open_output(sim_out);
      cvqkd::write_record_csv(out, record);
      std::cerr << "wrote " << record.entries.size() << " entries to "
                << sim_out << '\n';
      return 0;
    }

    if (*estimate) {
      std::ifstream in(est_record);
      if (!in) {
        throw std::runtime_error("cannot open record file: " + est_record);
      }
      const auto record = cvqkd::read_record_csv(in);
      const auto [key_part, test_part] = cvqkd::sift(record);
      const auto stats = cvqkd::estimate_statistics(key_part, test_part);
      emit(cvqkd::stats_to_json(stats), est_out);
      return 0;
    }

    if (*keyrate) {
      cvqkd::SearchConfig cfg;
      cfg.n_eps = kr_n_eps;
      cfg.n_gamma = kr_n_gamma;
      cfg.symmetric = !kr_asymmetric;
      cfg.f_ec = kr_f_ec;

      cvqkd::ObservedStatistics stats;
      cvqkd::GaussianConditional dist;
      json extra = json::object();
      if (*kr_stats_opt) {
        std::ifstream in(kr_stats);
        if (!in) {
          throw std::runtime_error("cannot open statistics file: " + kr_stats);
        }
        stats = cvqkd::stats_from_json(json::parse(in));
        dist = conditional_from_stats(stats);
      } else {
        cvqkd::ChannelParams params;
        params.alpha = kr_alpha;
        params.eta = *kr_loss_opt ? eta_from_loss_db(kr_loss_db) : kr_eta;
        params.delta = kr_delta;
        params.mean_scale = kr_mean_scale;
        stats = cvqkd::stats_from_params(params);
        dist = cvqkd::conditional_from_params(params);
        extra["eta"] = params.eta;
        extra["loss_db"] = loss_db_from_eta(params.eta);
        extra["delta"] = params.delta;
      }

      const auto b = cvqkd::key_rate(stats, dist, kr_alpha, cfg);
      json j = breakdown_to_json(b, cfg.f_ec);
      j.update(extra);
      if (b.S_YE_bound < 0.0) {
        std::cerr << "warning: eavesdropper information bound came out "
                     "negative ("
                  << b.S_YE_bound << ")\n";
      }
      emit(j, kr_out);
      return 0;
    }

    if (*sweep) {
      if (sw_loss_db.empty()) {
        for (int l = 0; l <= 25; ++l) {
          sw_loss_db.push_back(l);
        }
      }
      if (sw_delta.empty()) {
        sw_delta = {0.0, 0.0004, 0.0008, 0.0012, 0.0016, 0.0020, 0.0024};
      }
      cvqkd::SearchConfig cfg;
      cfg.n_eps = sw_n_eps;
      cfg.n_gamma = sw_n_gamma;
      cfg.symmetric = !sw_asymmetric;
      cfg.f_ec = sw_f_ec;
      if (!sw_alpha_grid.empty()) {
        cfg.alpha_grid = sw_alpha_grid;
      }

      std::vector<SweepRow> rows;
      for (double loss : sw_loss_db) {
        for (double delta : sw_delta) {
          rows.push_back({loss, eta_from_loss_db(loss), delta, {}, {}});
        }
      }
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.loss_db != b.loss_db ? a.loss_db < b.loss_db
                                      : a.delta < b.delta;
      });

      for (std::size_t i = 0; i < rows.size(); ++i) {
        SweepRow& row = rows[i];
        try {
          cvqkd::ChannelParams params;
          params.eta = row.eta;
          params.delta = row.delta;
          params.mean_scale = sw_mean_scale;
          row.result = cvqkd::optimize_alpha(params, cfg);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        std::cerr << "sweep " << (i + 1) << "/" << rows.size() << " loss="
                  << row.loss_db << "dB delta=" << row.delta << '\n';
      }

      auto out = open_output(sw_out);
      out << "loss_db,eta,delta,alpha_opt,G,G_floored,I_xy,S_E_given_X,"
             "s_max,gamma_star,eps_star,eps_tilde_star,error\n";
      for (const SweepRow& row : rows) {
        out << csv_number(row.loss_db) << ',' << csv_number(row.eta) << ','
            << csv_number(row.delta) << ',';
        if (row.result) {
          const auto& b = *row.result;
          out << csv_number(b.alpha_used) << ',' << csv_number(b.G) << ','
              << csv_number(std::max(b.G, 0.0)) << ',' << csv_number(b.I_xy)
              << ',' << csv_number(b.S_E_given_X) << ','
              << csv_number(b.s_max) << ',' << csv_number(b.argmax.gamma)
              << ',' << csv_number(b.argmax.eps[0]) << ','
              << csv_number(b.argmax.eps_tilde[0]) << ',';
          out << (std::isfinite(b.G) ? "" : "no certifiable key");
        } else {
          out << ",,,,,,,," << row.error;
        }
        out << '\n';
      }
      return 0;
    }
  } catch (const cvqkd::UnphysicalObservation& e) {
    json j{{"status", "error"},
           {"error", "observation unphysical"},
           {"detail", e.what()}};
    std::cout << j.dump(2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
