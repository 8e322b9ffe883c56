// Copyright 2026 The cvcluster Authors
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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "cvcluster/analysis.hpp"
#include "cvcluster/reference.hpp"

using namespace cvcluster;
using Catch::Approx;

namespace {

std::vector<std::size_t> zero_based(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> out;
  for (const std::size_t k : labels) out.push_back(k - 1);
  return out;
}

double oracle_gap(const CovarianceMatrix& mech, std::size_t n) {
  const EntanglePlan plan(n);
  const Matrix one_shot = reference::condition_all(mech.matrix(), zero_based(plan.measure_q()),
                                                   zero_based(plan.measure_p()), zero_based(plan.keep()));
  return max_abs(entangle_distant(mech, plan).conditional.matrix() - one_shot);
}

PointParameters lossy(double r, double alpha, double kappa) {
  PointParameters p;
  p.r = r;
  p.alpha = alpha;
  p.kappa = kappa;
  p.gamma = kFigureGamma;
  p.n_th = kFigureThermal;
  return p;
}

double snu(const PointParameters& p, Model model) {
  return evaluate_point(p, model, {"S_nu"}, probe_adjacency(p.resonators)).front();
}

}  // namespace

TEST_CASE("entangle plan measures the interior modes", "[analysis]") {
  const EntanglePlan plan(4);
  CHECK(plan.measure_q() == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(plan.measure_p() == std::vector<std::size_t>{6, 7});
  CHECK(plan.keep() == std::vector<std::size_t>{5, 8});
  CHECK_THROWS_AS(EntanglePlan(2), InvalidDimension);
  CHECK_THROWS_AS(entangle_distant(CovarianceMatrix::vacuum(4), EntanglePlan(3)), InvalidDimension);
}

TEST_CASE("a product state yields no entanglement", "[analysis]") {
  const EntanglementResult res = entangle_distant(CovarianceMatrix::thermal(6, 0.7), EntanglePlan(3));
  CHECK(res.log_negativity == 0.0);
  CHECK(res.conditional.mode_count() == 2);
  CHECK(res.conditional(0, 0) == Approx(1.2));
}

TEST_CASE("sequential conditioning matches one-shot conditioning", "[analysis][property]") {
  for (const double r : {0.5, 1.0, 2.0}) {
    for (const double alpha : {0.5, 1.5}) {
      PointParameters p;
      p.r = r;
      p.alpha = alpha;
      CHECK(oracle_gap(evaluate_state(p, Model::Ideal).mechanical, 3) <= 1e-9);
    }
    for (const double kappa : {0.0, 0.04}) CHECK(oracle_gap(evaluate_state(lossy(r, 1.0, kappa), Model::Damped).mechanical, 3) <= 1e-9);
  }
  PointParameters four;
  four.resonators = 4;
  four.r = 0.8;
  four.alpha = 0.6;
  CHECK(oracle_gap(evaluate_state(four, Model::Ideal).mechanical, 4) <= 1e-9);
}

TEST_CASE("ideal entanglement grows with r and alpha", "[analysis]") {
  std::vector<std::vector<double>> en;
  for (const double alpha : {0.5, 1.0, 1.5}) {
    en.emplace_back();
    for (const double r : {0.5, 1.0, 1.5}) {
      PointParameters p;
      p.r = r;
      p.alpha = alpha;
      en.back().push_back(evaluate_point(p, Model::Ideal, {"E_N"}, probe_adjacency(3)).front());
    }
  }
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t k = 0; k + 1 < 3; ++k) {
      CHECK(en[a][k + 1] > en[a][k]);
      CHECK(en[k + 1][a] > en[k][a]);
    }
  }
}

TEST_CASE("E_N in bits is E_N / ln 2", "[analysis]") {
  PointParameters p;
  p.r = 1.0;
  p.alpha = 1.0;
  const auto v = evaluate_point(p, Model::Ideal, {"E_N", "E_N_log2"}, probe_adjacency(3));
  CHECK(v[1] == Approx(v[0] / std::numbers::ln2));
}

TEST_CASE("ideal shortcut agrees with explicit state evaluation", "[analysis]") {
  PointParameters p;
  p.r = 1.3;
  p.alpha = 0.7;
  p.n_th = 0.4;
  const AdjacencyMatrix a = probe_adjacency(3);
  const PointState st = evaluate_state(p, Model::Ideal);
  const auto v = evaluate_point(p, Model::Ideal, {"S_nu", "n_ph"}, a);
  CHECK(v[0] == Approx(nullifier_statistics(st.mechanical, a).average).epsilon(1e-12));
  CHECK(v[1] == Approx(st.phonon_number).epsilon(1e-12));
}

TEST_CASE("ideal states stay physical at the strongest squeezing", "[analysis][property]") {
  for (const double r : {2.5, 3.0}) {
    for (const double alpha : {2.5, 3.0}) {
      PointParameters p;
      p.r = r;
      p.alpha = alpha;
      CHECK(physicality_margin(evaluate_state(p, Model::Ideal).mechanical) >= -kTrajectoryPhysicalityTol);
    }
  }
}

TEST_CASE("damped model at zero loss equals the ideal model", "[analysis]") {
  PointParameters p;
  p.r = 1.1;
  p.alpha = 0.9;
  p.n_th = 1.0;
  CHECK(snu(p, Model::Damped) == Approx(snu(p, Model::Ideal)).epsilon(1e-9));
}

TEST_CASE("sweep rows follow the axis order", "[analysis]") {
  SweepConfig cfg;
  cfg.axes = {{"r", {0.0, 1.0}}, {"alpha", {0.0, 0.5, 1.0}}};
  cfg.outputs = {"S_nu", "n_ph"};
  const Table t = sweep(cfg);
  CHECK(t.columns == std::vector<std::string>{"r", "alpha", "S_nu", "n_ph"});
  REQUIRE(t.rows.size() == 6);
  CHECK(t.number(0, "r") == 0.0);
  CHECK(t.number(2, "alpha") == 1.0);
  CHECK(t.number(3, "r") == 1.0);
  CHECK(t.number(0, "S_nu") == Approx(5.0 / 6.0));
  CHECK(t.number(0, "n_ph") == Approx(0.0).margin(1e-15));
}

TEST_CASE("single-point sweep equals a direct evaluation", "[analysis]") {
  SweepConfig cfg;
  cfg.axes = {{"kappa", {0.02}}};
  cfg.fixed = lossy(1.5, 1.0, 0.0);
  cfg.model = Model::Damped;
  cfg.outputs = {"S_nu"};
  CHECK(sweep(cfg).number(0, "S_nu") == snu(lossy(1.5, 1.0, 0.02), Model::Damped));
}

TEST_CASE("sweep configuration errors", "[analysis][errors]") {
  SweepConfig cfg;
  cfg.outputs = {"S_nu"};
  CHECK_THROWS_AS(sweep(cfg), InvalidArgument);
  cfg.axes = {{"r", {}}};
  CHECK_THROWS_AS(sweep(cfg), InvalidArgument);
  cfg.axes = {{"speed", {1.0}}};
  CHECK_THROWS_AS(sweep(cfg), InvalidArgument);
  cfg.axes = {{"r", {std::nan("")}}};
  CHECK_THROWS_AS(sweep(cfg), InvalidArgument);
  cfg.axes = {{"r", {1.0}}};
  cfg.outputs = {"fidelity"};
  CHECK_THROWS_AS(sweep(cfg), InvalidArgument);
  cfg.outputs = {"S_nu"};
  cfg.parallelism = 0;
  CHECK_THROWS_AS(sweep(cfg), InvalidArgument);
}

TEST_CASE("sweeps are identical across parallelism widths", "[analysis][property]") {
  SweepConfig cfg;
  cfg.axes = {{"r", linspace(0.0, 2.0, 5)}, {"kappa", {0.0, 0.03}}};
  cfg.fixed = lossy(0.0, 1.0, 0.0);
  cfg.model = Model::Damped;
  cfg.outputs = {"S_nu", "n_ph", "E_N"};
  const Table base = sweep(cfg);
  for (const std::size_t width : {2, 3, 8}) {
    cfg.parallelism = width;
    CHECK(sweep(cfg).rows == base.rows);
  }
}

TEST_CASE("figure panels expose the caption parameter sets", "[analysis]") {
  FigureOptions opt;
  opt.grid = 5;
  const Table c = figure_data(FigureId::Fig3c, opt);
  CHECK(c.columns == std::vector<std::string>{"r", "alpha", "S_nu", "log10_S_nu", "ln_S_nu"});
  std::set<double> alphas;
  for (std::size_t i = 0; i < c.rows.size(); ++i) alphas.insert(c.number(i, "alpha"));
  CHECK(alphas == std::set<double>{0.0, 1.0, 2.0});

  const Table b5 = figure_data(FigureId::Fig5b, opt);
  CHECK(b5.columns == std::vector<std::string>{"r", "alpha", "E_N", "E_N_log2"});
  CHECK(b5.rows.size() == 15);

  const Table a4 = figure_data(FigureId::Fig4a, opt);
  CHECK(a4.columns.front() == "kappa");
  CHECK(a4.columns[1] == "n_th");
  CHECK(a4.rows.size() == 25);

  const Table d3 = figure_data(FigureId::Fig3d, opt);
  for (std::size_t i = 0; i < d3.rows.size(); ++i) {
    if (d3.number(i, "r_over_alpha") == 0.0) {
      const double alpha = d3.number(i, "alpha");
      PointParameters p;
      p.alpha = alpha;
      CHECK(d3.number(i, "S_nu") == Approx(snu(p, Model::Ideal)));
    }
  }
  CHECK(figure_data(FigureId::Fig4d, opt).columns.back() == "n_ph");
  CHECK(parse_figure_id("fig4e") == FigureId::Fig4e);
  CHECK_FALSE(parse_figure_id("fig6").has_value());
}

TEST_CASE("figure overrides", "[analysis]") {
  FigureOptions opt;
  opt.grid = 3;
  opt.ranges["r"] = {0.5, 1.0};
  opt.fixed["n_th"] = 1.0;
  const Table t = figure_data(FigureId::Fig3c, opt);
  CHECK(t.number(0, "r") == 0.5);
  CHECK(t.number(t.rows.size() - 1, "r") == 1.0);
  PointParameters p;
  p.r = 0.5;
  p.alpha = 2.0;
  p.n_th = 1.0;
  CHECK(t.number(0, "S_nu") == Approx(snu(p, Model::Ideal)));
  opt.ranges["kappa"] = {0.0, 1.0};
  CHECK_THROWS_AS(figure_data(FigureId::Fig3c, opt), InvalidArgument);
  opt.ranges.clear();
  opt.fixed["bogus"] = 1.0;
  CHECK_THROWS_AS(figure_data(FigureId::Fig3c, opt), InvalidArgument);
  opt.fixed.clear();
  opt.grid = 1;
  CHECK_THROWS_AS(figure_data(FigureId::Fig3c, opt), InvalidArgument);
}

TEST_CASE("extending Step III: squeezed traces dip, the unsqueezed trace is flat", "[analysis]") {
  FigureOptions opt;
  opt.samples_per_segment = 20;
  const Table t = figure_data(FigureId::Fig3a, opt);
  CHECK(t.columns == std::vector<std::string>{"r", "alpha", "t", "step", "S_nu", "log10_S_nu", "ln_S_nu"});
  const std::size_t step = t.column("step");
  double min_32 = 1e300;
  double min_30 = 1e300;
  double lo_00 = 1e300;
  double hi_00 = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double r = t.number(i, "r");
    const double alpha = t.number(i, "alpha");
    const double s = t.number(i, "S_nu");
    // The extension window starts at tau_3, the last Step-III sample.
    const double tau3 = 5 * std::numbers::pi / 4 + alpha + 2 * std::numbers::pi;
    const bool window = std::get<std::string>(t.rows[i][step]) == "III+" || std::abs(t.number(i, "t") - tau3) < 1e-9;
    if (!window) continue;
    if (r == 3.0 && alpha == 2.0) min_32 = std::min(min_32, s);
    if (r == 3.0 && alpha == 0.0) min_30 = std::min(min_30, s);
    if (r == 0.0) {
      lo_00 = std::min(lo_00, s);
      hi_00 = std::max(hi_00, s);
    }
  }
  CHECK(min_32 < min_30);
  // Both squeezed traces bottom out at the closed-form value at tau_3.
  CHECK(min_32 == Approx(analytic_average_nullifier(3.0, 2.0)).epsilon(1e-6));
  CHECK(min_30 == Approx(analytic_average_nullifier(3.0, 0.0)).epsilon(1e-6));
  CHECK(lo_00 == Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(hi_00 == Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("thermal and cavity loss worsen the nullifier on the fig4a grid", "[analysis][property]") {
  FigureOptions opt;
  opt.grid = 5;
  const Table t = figure_data(FigureId::Fig4a, opt);
  // Rows: kappa slowest, n_th fastest.
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t n = 0; n < 5; ++n) {
      const double here = t.number(5 * k + n, "S_nu");
      if (n + 1 < 5) CHECK(t.number(5 * k + n + 1, "S_nu") >= here);
      if (k + 1 < 5) CHECK(t.number(5 * (k + 1) + n, "S_nu") >= here);
    }
  }
}

TEST_CASE("at strong cavity loss more squeezing hurts", "[analysis]") {
  FigureOptions opt;
  opt.grid = 6;
  const Table t = figure_data(FigureId::Fig4b, opt);
  // Last kappa block holds kappa = 0.05 with r = 1.5, 1.25, 1.
  const std::size_t last = t.rows.size() - 3;
  CHECK(t.number(last, "kappa") == 0.05);
  CHECK(t.number(last, "r") == 1.5);
  CHECK(t.number(last + 2, "r") == 1.0);
  CHECK(t.number(last, "S_nu") > t.number(last + 2, "S_nu"));
  // Lossless: more squeezing is better.
  CHECK(t.number(0, "S_nu") < t.number(2, "S_nu"));
}

TEST_CASE("phonon number grows with r", "[analysis][property]") {
  FigureOptions opt;
  opt.grid = 9;
  const Table t = figure_data(FigureId::Fig4d, opt);
  for (const double kappa : {0.0, 0.02, 0.04}) {
    double previous = -1.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.number(i, "kappa") != kappa) continue;
      CHECK(t.number(i, "n_ph") > previous);
      previous = t.number(i, "n_ph");
    }
  }
}

TEST_CASE("loss destroys entanglement pointwise and at small r", "[analysis]") {
  FigureOptions opt;
  opt.grid = 5;
  const Table t = figure_data(FigureId::Fig5c, opt);
  // Rows: r slowest, kappa in {0, 0.01, 0.02, 0.04}.
  for (std::size_t i = 0; i < t.rows.size(); i += 4) {
    for (std::size_t k = 1; k < 4; ++k) CHECK(t.number(i + k, "E_N") <= t.number(i + k - 1, "E_N"));
  }
  CHECK(t.number(0, "E_N") == 0.0);
  CHECK(t.number(t.rows.size() - 4, "E_N") > 0.0);
}

TEST_CASE("damped contour minimum sits near (1.6, 1.25)", "[analysis][slow]") {
  const Table t = figure_data(FigureId::Fig4e);
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    if (t.number(i, "S_nu") < t.number(best, "S_nu")) best = i;
  }
  INFO("minimum at r = " << t.number(best, "r") << ", alpha = " << t.number(best, "alpha"));
  CHECK(std::abs(t.number(best, "r") - 1.6) <= 0.2);
  CHECK(std::abs(t.number(best, "alpha") - 1.25) <= 0.2);
  CHECK(t.number(best, "r") > 0.0);
  CHECK(t.number(best, "r") < 3.0);
  CHECK(t.number(best, "alpha") > 0.0);
  CHECK(t.number(best, "alpha") < 3.0);
}
