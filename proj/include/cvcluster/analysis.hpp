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

// Distant-mode entanglement, parameter sweeps and figure workloads.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "cvcluster/dynamics.hpp"
#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/network.hpp"
#include "cvcluster/protocol.hpp"

namespace cvcluster {

/// Homodyne plan that leaves b_{N+1} and b_{2N} entangled: Q on the upper
/// modes, P on the interior lower modes N+2..2N-1. Labels are 1-based.
class EntanglePlan {
 public:
  explicit EntanglePlan(std::size_t resonators) : n_(resonators) {
    if (n_ < 3) {
      throw InvalidDimension("EntanglePlan: need at least 3 resonators (N = " + std::to_string(n_) +
                             " leaves no interior mode for P measurements)");
    }
    for (std::size_t k = 1; k <= n_; ++k) measure_q_.push_back(k);
    for (std::size_t k = n_ + 2; k <= 2 * n_ - 1; ++k) measure_p_.push_back(k);
    keep_ = {n_ + 1, 2 * n_};
  }

  std::size_t resonators() const noexcept { return n_; }
  const std::vector<std::size_t>& measure_q() const noexcept { return measure_q_; }
  const std::vector<std::size_t>& measure_p() const noexcept { return measure_p_; }
  const std::vector<std::size_t>& keep() const noexcept { return keep_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> measure_q_;
  std::vector<std::size_t> measure_p_;
  std::vector<std::size_t> keep_;
};

struct EntanglementResult {
  CovarianceMatrix conditional;  ///< modes (b_{N+1}, b_{2N})
  double log_negativity;         ///< natural log
};

/// Sequential homodyne conditioning per `plan`: all Q measurements in
/// ascending label order, then all P measurements ascending.
inline EntanglementResult entangle_distant(const CovarianceMatrix& mechanical, const EntanglePlan& plan,
                                           double tol = kTrajectoryPhysicalityTol) {
  if (mechanical.mode_count() != 2 * plan.resonators()) {
    throw InvalidDimension("entangle_distant: state has " + std::to_string(mechanical.mode_count()) +
                           " modes, plan expects " + std::to_string(2 * plan.resonators()));
  }
  require_physical(mechanical, tol, "entangle_distant");
  std::vector<std::size_t> remaining;
  for (std::size_t k = 1; k <= mechanical.mode_count(); ++k) remaining.push_back(k);
  CovarianceMatrix v = mechanical;
  const auto measure = [&](std::size_t label, Quadrature which) {
    const auto it = std::find(remaining.begin(), remaining.end(), label);
    const auto pos = static_cast<std::size_t>(it - remaining.begin());
    v = measure_quadrature(v, pos, which, tol);
    remaining.erase(it);
  };
  for (const std::size_t label : plan.measure_q()) measure(label, Quadrature::Q);
  for (const std::size_t label : plan.measure_p()) measure(label, Quadrature::P);
  require_physical(v, tol, "entangle_distant result");
  const double en = logarithmic_negativity(v, tol);
  return {std::move(v), en};
}

/// Parameters of one protocol evaluation. In the damped model `n_th` is both
/// the bath occupation and the initial mechanical occupation.
struct PointParameters {
  std::size_t resonators = 3;
  double r = 0.0;
  double alpha = 0.0;
  double theta = kDefaultTheta;
  double g_i = 1.0;
  double g0 = 1.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double n_th = 0.0;
};

enum class Model { Ideal, Damped };

inline constexpr std::string_view kAxisNames[] = {"r", "alpha", "kappa", "gamma", "n_th", "r_over_alpha"};
inline constexpr std::string_view kObservableNames[] = {"S_nu", "log10_S_nu", "ln_S_nu", "n_ph", "E_N", "E_N_log2"};

struct Axis {
  std::string name;
  std::vector<double> values;
};

struct SweepConfig {
  std::vector<Axis> axes;
  PointParameters fixed;
  Model model = Model::Ideal;
  std::vector<std::string> outputs;
  std::size_t parallelism = 1;

  void validate() const {
    if (axes.empty()) throw InvalidArgument("SweepConfig: at least one axis is required");
    for (const Axis& axis : axes) {
      if (std::find(std::begin(kAxisNames), std::end(kAxisNames), axis.name) == std::end(kAxisNames)) {
        throw InvalidArgument("SweepConfig: unknown axis '" + axis.name + "'");
      }
      if (axis.values.empty()) throw InvalidArgument("SweepConfig: axis '" + axis.name + "' is empty");
      for (const double x : axis.values) {
        if (!std::isfinite(x)) throw InvalidArgument("SweepConfig: axis '" + axis.name + "' has a non-finite value");
      }
    }
    if (outputs.empty()) throw InvalidArgument("SweepConfig: at least one output is required");
    for (const std::string& out : outputs) {
      if (std::find(std::begin(kObservableNames), std::end(kObservableNames), out) == std::end(kObservableNames)) {
        throw InvalidArgument("SweepConfig: unknown observable '" + out + "'");
      }
    }
    if (parallelism == 0) throw InvalidArgument("SweepConfig: parallelism must be >= 1");
  }
};

using Cell = std::variant<double, std::string>;

/// Column-named rows of cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("Table: no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
  double number(std::size_t row, std::string_view name) const { return std::get<double>(rows.at(row).at(column(name))); }
};

/// `count` evenly spaced values from `lo` to `hi` inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) throw InvalidArgument("linspace: count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

namespace detail {

inline void set_axis(PointParameters& p, std::string_view name, double value) {
  if (name == "r") p.r = value;
  else if (name == "alpha") p.alpha = value;
  else if (name == "kappa") p.kappa = value;
  else if (name == "gamma") p.gamma = value;
  else if (name == "n_th") p.n_th = value;
}

inline ProtocolParameters protocol_parameters(const PointParameters& p) {
  return {p.resonators, p.alpha, p.r, p.theta, p.g_i, p.g0};
}

}  // namespace detail

/// Mechanical output state (and phonon number) of one protocol run at tau_3.
struct PointState {
  CovarianceMatrix mechanical;
  double phonon_number;
};

inline PointState evaluate_state(const PointParameters& p, Model model) {
  if (!(p.n_th >= 0.0)) throw InvalidArgument("evaluate_state: n_th must be >= 0");
  const ProtocolParameters proto = detail::protocol_parameters(p);
  if (model == Model::Ideal) {
    CovarianceMatrix v = apply_symplectic(CovarianceMatrix::thermal(2 * p.resonators, p.n_th),
                                          {step1_symplectic(proto.resonators, proto.alpha),
                                           step2_symplectic(proto.resonators, proto.r),
                                           step3_symplectic(proto.resonators, proto.theta)});
    require_physical(v, kTrajectoryPhysicalityTol, "ideal protocol output");
    double nph = 0.0;
    for (std::size_t m = 0; m < v.mode_count(); ++m) nph += mean_occupation(v, m, kTrajectoryPhysicalityTol);
    return {std::move(v), nph / static_cast<double>(2 * p.resonators)};
  }
  const PulseSchedule schedule = build_schedule(proto);
  const DampingSpec spec{p.kappa, p.gamma, p.n_th, {}};
  const CovarianceMatrix full = propagate_final(schedule, spec, p.n_th);
  require_physical(full, kTrajectoryPhysicalityTol, "damped protocol output");
  return {mechanical_state(full, schedule.layout()), mean_phonon_number(full, schedule.layout())};
}

/// Mean phonon number of S (thermal n_th input) without forming the covariance.
inline double ideal_phonon_number(const SymplecticMatrix& s, double n_th) {
  const Real gram_trace = (s.matrix() * s.matrix().transpose()).trace();
  const auto modes = static_cast<Real>(s.mode_count());
  return static_cast<double>(((Real(n_th) + 0.5L) * gram_trace / modes - 1.0L) / 2.0L);
}

/// Requested observables of a single point, in the order of `outputs`.
///
/// In the ideal model S_nu and n_ph come straight from the symplectic map; the
/// output covariance is only formed (and checked) when E_N is requested.
inline std::vector<double> evaluate_point(const PointParameters& p, Model model, const std::vector<std::string>& outputs,
                                          const AdjacencyMatrix& graph) {
  const bool wants_state = model == Model::Damped || std::any_of(outputs.begin(), outputs.end(), [](const auto& o) {
                             return o == "E_N" || o == "E_N_log2";
                           });
  std::optional<PointState> st;
  if (wants_state) st = evaluate_state(p, model);
  std::optional<SymplecticMatrix> map;
  if (model == Model::Ideal) map = total_symplectic(detail::protocol_parameters(p));

  std::optional<double> snu;
  std::optional<double> en;
  const auto nullifier = [&] {
    if (!snu) {
      snu = map ? nullifier_covariance(*map, graph, p.n_th).average : nullifier_statistics(st->mechanical, graph).average;
    }
    return *snu;
  };
  const auto negativity = [&] {
    if (!en) en = entangle_distant(st->mechanical, EntanglePlan(p.resonators)).log_negativity;
    return *en;
  };
  std::vector<double> out;
  out.reserve(outputs.size());
  for (const std::string& name : outputs) {
    if (name == "S_nu") out.push_back(nullifier());
    else if (name == "log10_S_nu") out.push_back(std::log10(nullifier()));
    else if (name == "ln_S_nu") out.push_back(std::log(nullifier()));
    else if (name == "n_ph") out.push_back(st ? st->phonon_number : ideal_phonon_number(*map, p.n_th));
    else if (name == "E_N") out.push_back(negativity());
    else if (name == "E_N_log2") out.push_back(negativity() / std::numbers::ln2);
    else throw InvalidArgument("evaluate_point: unknown observable '" + name + "'");
  }
  return out;
}

/// Runs `task(i)` for i in [0, count) on up to `width` threads. Results must be
/// written to pre-indexed slots; the first exception (lowest index) is rethrown.
template <class Task>
void parallel_for(std::size_t count, std::size_t width, Task&& task) {
  width = std::max<std::size_t>(1, std::min(width, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(width);
    for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Cartesian product of the axes, first axis slowest. Rows carry the axis
/// values followed by the requested observables.
inline Table sweep(const SweepConfig& config) {
  config.validate();
  std::size_t count = 1;
  for (const Axis& axis : config.axes) count *= axis.values.size();
  const AdjacencyMatrix graph = probe_adjacency(config.fixed.resonators);

  Table table;
  for (const Axis& axis : config.axes) table.columns.push_back(axis.name);
  for (const std::string& out : config.outputs) table.columns.push_back(out);
  table.rows.resize(count);

  parallel_for(count, config.parallelism, [&](std::size_t index) {
    PointParameters p = config.fixed;
    std::vector<Cell> row;
    row.reserve(table.columns.size());
    std::size_t rem = index;
    std::size_t stride = count;
    std::optional<double> ratio;
    for (const Axis& axis : config.axes) {
      stride /= axis.values.size();
      const double value = axis.values[rem / stride];
      rem %= stride;
      row.emplace_back(value);
      if (axis.name == "r_over_alpha") ratio = value;
      else detail::set_axis(p, axis.name, value);
    }
    if (ratio) p.r = *ratio * p.alpha;
    for (const double x : evaluate_point(p, config.model, config.outputs, graph)) row.emplace_back(x);
    table.rows[index] = std::move(row);
  });
  return table;
}

/// S_nu along the full (optionally extended) schedule at zero damping.
inline Table time_trace(const std::vector<std::pair<double, double>>& r_alpha, const PointParameters& base,
                        double extension, std::size_t samples_per_segment, const std::vector<std::string>& outputs,
                        std::size_t parallelism = 1, const DampingSpec& damping = {}) {
  for (const std::string& out : outputs) {
    if (out != "S_nu" && out != "log10_S_nu" && out != "ln_S_nu" && out != "n_ph") {
      throw InvalidArgument("time_trace: unsupported observable '" + out + "'");
    }
  }
  std::vector<Trajectory> runs(r_alpha.size());
  parallel_for(r_alpha.size(), parallelism, [&](std::size_t i) {
    PointParameters p = base;
    p.r = r_alpha[i].first;
    p.alpha = r_alpha[i].second;
    const PulseSchedule schedule = build_schedule(detail::protocol_parameters(p), extension);
    runs[i] = run_protocol(schedule, damping, p.n_th, samples_per_segment);
  });

  Table table;
  table.columns = {"r", "alpha", "t", "step"};
  for (const std::string& out : outputs) table.columns.push_back(out);
  const ProtocolParameters proto = detail::protocol_parameters(base);
  const PulseSchedule reference = build_schedule(proto, extension);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const TrajectorySample& s : runs[i].samples) {
      std::vector<Cell> row{r_alpha[i].first, r_alpha[i].second, s.time,
                            std::string(s.time == 0.0 ? "init" : step_name(reference.segments()[s.segment].step))};
      for (const std::string& out : outputs) {
        if (out == "S_nu") row.emplace_back(s.average_nullifier);
        else if (out == "log10_S_nu") row.emplace_back(std::log10(s.average_nullifier));
        else if (out == "ln_S_nu") row.emplace_back(std::log(s.average_nullifier));
        else row.emplace_back(s.phonon_number);
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

enum class FigureId { Fig3a, Fig3b, Fig3c, Fig3d, Fig4a, Fig4b, Fig4c, Fig4d, Fig4e, Fig4f, Fig5b, Fig5c };

inline constexpr std::pair<std::string_view, FigureId> kFigureIds[] = {
    {"fig3a", FigureId::Fig3a}, {"fig3b", FigureId::Fig3b}, {"fig3c", FigureId::Fig3c}, {"fig3d", FigureId::Fig3d},
    {"fig4a", FigureId::Fig4a}, {"fig4b", FigureId::Fig4b}, {"fig4c", FigureId::Fig4c}, {"fig4d", FigureId::Fig4d},
    {"fig4e", FigureId::Fig4e}, {"fig4f", FigureId::Fig4f}, {"fig5b", FigureId::Fig5b}, {"fig5c", FigureId::Fig5c},
};

inline std::optional<FigureId> parse_figure_id(std::string_view name) {
  for (const auto& [key, id] : kFigureIds) {
    if (key == name) return id;
  }
  return std::nullopt;
}

inline std::string_view figure_name(FigureId id) {
  for (const auto& [key, value] : kFigureIds) {
    if (value == id) return key;
  }
  return "?";
}

/// Knobs a caller may override on top of the built-in figure definitions.
struct FigureOptions {
  std::size_t grid = 33;            ///< points per continuous axis
  std::size_t samples_per_segment = kDefaultSamplesPerSegment;
  std::size_t parallelism = 1;
  bool log10 = true;                ///< emit log10_S_nu
  bool ln = true;                   ///< emit ln_S_nu
  std::map<std::string, double> fixed;  ///< overrides of fixed point parameters
  std::map<std::string, std::pair<double, double>> ranges;  ///< overrides of continuous axis ranges
};

inline constexpr double kFigureGamma = 5e-4;
inline constexpr double kFigureThermal = 2.0;

namespace detail {

inline void apply_fixed_overrides(PointParameters& p, const std::map<std::string, double>& fixed) {
  for (const auto& [key, value] : fixed) {
    if (key == "r") p.r = value;
    else if (key == "alpha") p.alpha = value;
    else if (key == "theta") p.theta = value;
    else if (key == "g_i") p.g_i = value;
    else if (key == "g0") p.g0 = value;
    else if (key == "kappa") p.kappa = value;
    else if (key == "gamma") p.gamma = value;
    else if (key == "n_th") p.n_th = value;
    else if (key == "n") {
      if (!(value >= 1.0) || value != std::floor(value)) throw InvalidArgument("figure: n must be a positive integer");
      p.resonators = static_cast<std::size_t>(value);
    } else {
      throw InvalidArgument("figure: unknown parameter '" + key + "'");
    }
  }
}

inline std::vector<std::string> nullifier_outputs(const FigureOptions& opt) {
  std::vector<std::string> out{"S_nu"};
  if (opt.log10) out.emplace_back("log10_S_nu");
  if (opt.ln) out.emplace_back("ln_S_nu");
  return out;
}

}  // namespace detail

/// Parameter sets of each figure panel. Fig. 3 and 5(b) are lossless at zero
/// temperature; Fig. 4 and 5(c) use gamma = 5e-4 and n_th = 2, with kappa as
/// the panel states.
inline Table figure_data(FigureId id, const FigureOptions& opt = {}) {
  if (opt.grid < 2) throw InvalidArgument("figure: grid must be >= 2");
  std::size_t consumed_ranges = 0;
  const auto range = [&](const std::string& axis, double lo, double hi) {
    const auto it = opt.ranges.find(axis);
    if (it != opt.ranges.end()) {
      std::tie(lo, hi) = it->second;
      ++consumed_ranges;
    }
    return linspace(lo, hi, opt.grid);
  };
  PointParameters lossless;
  PointParameters lossy;
  lossy.gamma = kFigureGamma;
  lossy.n_th = kFigureThermal;
  lossy.alpha = 1.0;

  SweepConfig cfg;
  cfg.parallelism = opt.parallelism;
  cfg.outputs = detail::nullifier_outputs(opt);
  switch (id) {
    case FigureId::Fig3a: {
      if (!opt.ranges.empty()) throw InvalidArgument("figure fig3a: time traces have no continuous axis to override");
      detail::apply_fixed_overrides(lossless, opt.fixed);
      return time_trace({{3.0, 2.0}, {3.0, 0.0}, {0.0, 0.0}}, lossless, std::numbers::pi / lossless.g0,
                        opt.samples_per_segment, cfg.outputs, opt.parallelism);
    }
    case FigureId::Fig3b:
      cfg.axes = {{"r", range("r", 0.0, 3.0)}, {"alpha", range("alpha", 0.0, 3.0)}};
      cfg.fixed = lossless;
      break;
    case FigureId::Fig3c:
      cfg.axes = {{"r", range("r", 0.0, 3.0)}, {"alpha", {2.0, 1.0, 0.0}}};
      cfg.fixed = lossless;
      break;
    case FigureId::Fig3d:
      cfg.axes = {{"alpha", range("alpha", 0.0, 3.0)}, {"r_over_alpha", {1.5, 1.0, 0.5, 0.0}}};
      cfg.fixed = lossless;
      break;
    case FigureId::Fig4a:
      cfg.axes = {{"kappa", range("kappa", 0.0, 0.05)}, {"n_th", range("n_th", 0.0, 4.0)}};
      cfg.fixed = lossy;
      cfg.fixed.r = 1.5;
      cfg.model = Model::Damped;
      break;
    case FigureId::Fig4b:
      cfg.axes = {{"kappa", range("kappa", 0.0, 0.05)}, {"r", {1.5, 1.25, 1.0}}};
      cfg.fixed = lossy;
      cfg.model = Model::Damped;
      break;
    case FigureId::Fig4c:
    case FigureId::Fig4d:
      cfg.axes = {{"r", range("r", 0.0, 2.0)}, {"kappa", {0.04, 0.02, 0.0}}};
      cfg.fixed = lossy;
      cfg.model = Model::Damped;
      if (id == FigureId::Fig4d) cfg.outputs = {"n_ph"};
      break;
    case FigureId::Fig4e:
    case FigureId::Fig4f:
      cfg.axes = {{"r", range("r", 0.0, 3.0)}, {"alpha", range("alpha", 0.0, 3.0)}};
      cfg.fixed = lossy;
      cfg.fixed.kappa = id == FigureId::Fig4e ? 0.02 : 0.04;
      cfg.model = Model::Damped;
      break;
    case FigureId::Fig5b:
      cfg.axes = {{"r", range("r", 0.0, 2.0)}, {"alpha", {1.5, 1.0, 0.5}}};
      cfg.fixed = lossless;
      cfg.outputs = {"E_N", "E_N_log2"};
      break;
    case FigureId::Fig5c:
      cfg.axes = {{"r", range("r", 0.0, 2.0)}, {"kappa", {0.0, 0.01, 0.02, 0.04}}};
      cfg.fixed = lossy;
      cfg.model = Model::Damped;
      cfg.outputs = {"E_N", "E_N_log2"};
      break;
  }
  if (consumed_ranges != opt.ranges.size()) {
    throw InvalidArgument("figure " + std::string(figure_name(id)) + ": --range names an axis this panel does not sweep");
  }
  detail::apply_fixed_overrides(cfg.fixed, opt.fixed);
  return sweep(cfg);
}

}  // namespace cvcluster
