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

// Command-line front end: `protocol`, `figure` and `validate` subcommands.
//
// Requires CLI11 and nlohmann/json on the include path (see vendor/).

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvcluster/analysis.hpp"
#include "cvcluster/dynamics.hpp"
#include "cvcluster/error.hpp"
#include "cvcluster/protocol.hpp"
#include "cvcluster/validate.hpp"

namespace cvcluster::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailed = 1, kUsageError = 2, kNumericalFailure = 3 };

enum class Format { Csv, Json };
enum class LogBase { Natural, Ten, Both };

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline void write_csv(const Table& table, std::ostream& os) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      if (const auto* d = std::get_if<double>(&row[c])) os << format_double(*d);
      else os << std::get<std::string>(row[c]);
    }
    os << '\n';
  }
}

inline void write_json(const Table& table, std::ostream& os) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json rec = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (const auto* d = std::get_if<double>(&row[c])) rec[table.columns[c]] = *d;
      else rec[table.columns[c]] = std::get<std::string>(row[c]);
    }
    records.push_back(std::move(rec));
  }
  os << records.dump(2) << '\n';
}

inline void write_table(const Table& table, Format format, std::ostream& os) {
  if (format == Format::Csv) write_csv(table, os);
  else write_json(table, os);
}

namespace detail {

/// Expands `--config FILE` (INI-style `key = value` lines, `#` comments) into
/// `--key value` tokens placed before the explicit flags of the subcommand,
/// so that flags win under the take-last policy.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> injected;
  std::size_t insert_at = 0;
  bool seen_subcommand = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    std::string path;
    if (a == "--config") {
      if (i + 1 >= args.size()) throw InvalidArgument("--config needs a file argument");
      path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      out.push_back(a);
      if (!seen_subcommand && !a.empty() && a[0] != '-') {
        seen_subcommand = true;
        insert_at = out.size();
      }
      continue;
    }
    std::ifstream probe(path);
    if (!probe) throw InvalidArgument("cannot read config file '" + path + "'");
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
      if (!item.parents.empty()) throw InvalidArgument("config file: sections are not supported");
      if (item.inputs.size() != 1) {
        throw InvalidArgument("config file: key '" + item.name + "' needs exactly one value");
      }
      std::string key = item.name;
      std::replace(key.begin(), key.end(), '_', '-');
      injected.push_back("--" + key);
      injected.push_back(item.inputs.front());
    }
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(), injected.end());
  return out;
}

inline void emit(const Table& table, Format format, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    write_table(table, format, out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidArgument("cannot write '" + path + "'");
  write_table(table, format, file);
  if (!file) throw InvalidArgument("failed writing '" + path + "'");
}

inline void require_nonnegative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string("--") + name + " must be a finite value >= 0");
}

/// Long-format records (record, i, j, t, value); unused index cells are blank.
struct RecordWriter {
  Table table{{"record", "i", "j", "t", "value"}, {}};

  void add(const std::string& name, double value) { table.rows.push_back({name, std::string(), std::string(), std::string(), value}); }
  void add_i(const std::string& name, std::size_t i, double value) {
    table.rows.push_back({name, static_cast<double>(i), std::string(), std::string(), value});
  }
  void add_ij(const std::string& name, std::size_t i, std::size_t j, double value) {
    table.rows.push_back({name, static_cast<double>(i), static_cast<double>(j), std::string(), value});
  }
  void add_t(const std::string& name, double t, double value) {
    table.rows.push_back({name, std::string(), std::string(), t, value});
  }
};

inline void add_nullifier_records(RecordWriter& w, const std::string& prefix, double snu, LogBase base) {
  w.add(prefix + "S_nu", snu);
  if (base != LogBase::Ten) w.add(prefix + "ln_S_nu", std::log(snu));
  if (base != LogBase::Natural) w.add(prefix + "log10_S_nu", std::log10(snu));
}

struct CommonOutput {
  std::string output;
  Format format = Format::Csv;
  LogBase log_base = LogBase::Both;
};

inline void add_output_options(CLI::App* cmd, CommonOutput& o) {
  cmd->add_option("--output,-o", o.output, "Write results to FILE instead of standard output");
  cmd->add_option("--format", o.format, "Output format")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"csv", Format::Csv}, {"json", Format::Json}}));
  cmd->add_option("--log-base", o.log_base, "Logarithm columns for S_nu")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, LogBase>{{"e", LogBase::Natural}, {"10", LogBase::Ten}, {"both", LogBase::Both}}));
}

}  // namespace detail

struct ProtocolArgs {
  std::size_t n = 0;
  double alpha = 0.0;
  double r = 0.0;
  double theta = kDefaultTheta;
  double kappa = 0.0;
  double gamma = 0.0;
  double n_th = 0.0;
  std::optional<double> n_th_init;
  double g_i = 1.0;
  double g0 = 1.0;
  std::size_t samples = kDefaultSamplesPerSegment;
  double extend = 0.0;
  detail::CommonOutput out;
};

inline int protocol_command(const ProtocolArgs& a, std::ostream& out) {
  detail::require_nonnegative(a.alpha, "alpha");
  detail::require_nonnegative(a.kappa, "kappa");
  detail::require_nonnegative(a.gamma, "gamma");
  detail::require_nonnegative(a.n_th, "n-th");
  detail::require_nonnegative(a.extend, "extend");
  if (a.n_th_init) detail::require_nonnegative(*a.n_th_init, "n-th-init");
  if (a.samples == 0) throw InvalidArgument("--samples must be >= 1");

  ProtocolParameters p{a.n, a.alpha, a.r, a.theta, a.g_i, a.g0};
  const PulseSchedule schedule = build_schedule(p, a.extend);
  const DampingSpec spec{a.kappa, a.gamma, a.n_th, {}};
  const double n_init = a.n_th_init.value_or(a.n_th);
  const Trajectory traj = run_protocol(schedule, spec, n_init, a.samples);

  // Observables at tau_3 (the end of Step III, before any extension).
  const double tau3 = schedule.markers().tau3;
  const auto at_tau3 = std::find_if(traj.samples.begin(), traj.samples.end(), [&](const TrajectorySample& s) {
    return std::abs(s.time - tau3) <= 1e-9 * std::max(1.0, tau3);
  });
  const TrajectorySample& final = at_tau3 != traj.samples.end() ? *at_tau3 : traj.final();
  const NullifierSet nulls =
      nullifier_statistics(mechanical_state(final.covariance, schedule.layout()), schedule.target_adjacency());

  detail::RecordWriter w;
  detail::add_nullifier_records(w, "", nulls.average, a.out.log_base);
  const Vector var = nulls.variances();
  for (Eigen::Index i = 0; i < var.size(); ++i) w.add_i("nullifier_variance", static_cast<std::size_t>(i + 1), static_cast<double>(var(i)));
  const Matrix& adj = schedule.target_adjacency().matrix();
  for (Eigen::Index i = 0; i < adj.rows(); ++i) {
    for (Eigen::Index j = 0; j < adj.cols(); ++j) {
      w.add_ij("adjacency", static_cast<std::size_t>(i + 1), static_cast<std::size_t>(j + 1), static_cast<double>(adj(i, j)));
    }
  }
  w.add("n_ph", final.phonon_number);
  w.add("tau1", schedule.markers().tau1);
  w.add("tau2", schedule.markers().tau2);
  w.add("tau3", tau3);
  const bool damped = !spec.is_lossless() || a.extend > 0.0;
  if (damped) {
    for (const TrajectorySample& s : traj.samples) {
      w.add_t("trajectory_S_nu", s.time, s.average_nullifier);
      w.add_t("trajectory_n_ph", s.time, s.phonon_number);
    }
  }
  detail::emit(w.table, a.out.format, a.out.output, out);
  if (!a.out.output.empty()) {
    out << "S_nu = " << format_double(nulls.average) << " (ln " << format_double(std::log(nulls.average))
        << ", log10 " << format_double(std::log10(nulls.average)) << "), n_ph = " << format_double(final.phonon_number)
        << '\n';
  }
  return kSuccess;
}

struct FigureArgs {
  std::string id;
  std::size_t grid = 33;
  std::size_t samples = kDefaultSamplesPerSegment;
  std::size_t parallelism = 1;
  std::vector<std::string> set;
  std::vector<std::string> range;
  detail::CommonOutput out;
};

namespace detail {

inline double parse_number(const std::string& text, const std::string& what) {
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(x)) {
    throw InvalidArgument(what + ": '" + text + "' is not a finite number");
  }
  return x;
}

inline std::pair<std::string, std::string> split_once(const std::string& text, char sep, const std::string& what) {
  const auto pos = text.find(sep);
  if (pos == std::string::npos || pos == 0 || pos + 1 == text.size()) {
    throw InvalidArgument(what + ": expected KEY" + std::string(1, sep) + "VALUE, got '" + text + "'");
  }
  return {text.substr(0, pos), text.substr(pos + 1)};
}

}  // namespace detail

inline int figure_command(const FigureArgs& a, std::ostream& out) {
  const auto id = parse_figure_id(a.id);
  if (!id) throw InvalidArgument("unknown figure id '" + a.id + "'");
  if (a.parallelism == 0) throw InvalidArgument("--parallelism must be >= 1");
  if (a.samples == 0) throw InvalidArgument("--samples must be >= 1");
  FigureOptions opt;
  opt.grid = a.grid;
  opt.samples_per_segment = a.samples;
  opt.parallelism = a.parallelism;
  for (const std::string& kv : a.set) {
    auto [key, value] = detail::split_once(kv, '=', "--set");
    std::replace(key.begin(), key.end(), '-', '_');
    opt.fixed[key] = detail::parse_number(value, "--set " + key);
  }
  for (const std::string& kv : a.range) {
    auto [axis, span] = detail::split_once(kv, '=', "--range");
    const auto [lo, hi] = detail::split_once(span, ':', "--range " + axis);
    opt.ranges[axis] = {detail::parse_number(lo, "--range " + axis), detail::parse_number(hi, "--range " + axis)};
  }
  opt.log10 = a.out.log_base != LogBase::Natural;
  opt.ln = a.out.log_base != LogBase::Ten;
  const Table table = figure_data(*id, opt);
  detail::emit(table, a.out.format, a.out.output, out);
  if (!a.out.output.empty()) out << figure_name(*id) << ": " << table.rows.size() << " rows -> " << a.out.output << '\n';
  return kSuccess;
}

inline int validate_command(const std::string& fault, std::ostream& out) {
  ValidationOptions opt;
  if (fault == "sign-flip") opt.mutate_schedule = flip_step2_sign;
  else if (!fault.empty()) throw InvalidArgument("unknown fault '" + fault + "'");
  const std::vector<CheckResult> checks = run_validation(opt);
  bool ok = true;
  for (const CheckResult& c : checks) {
    ok = ok && c.passed;
    out << std::left << std::setw(32) << c.name << (c.passed ? "PASS" : "FAIL") << "  residual " << std::setw(12)
        << format_double(c.residual) << " tol " << std::setw(8) << format_double(c.tolerance) << "  " << c.detail
        << '\n';
  }
  out << (ok ? "all checks passed" : "validation FAILED") << '\n';
  return ok ? kSuccess : kValidationFailed;
}

inline constexpr std::string_view kFooter =
    "Settings may also come from --config FILE: one `key = value` per line, '#' starts a comment line.\n"
    "Keys are option names without the leading dashes. Explicit flags override the file, which overrides\n"
    "the built-in defaults. All rates are in units of g0 and times in 1/g0.\n"
    "Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical failure.";

/// Entry point; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulsed continuous-variable cluster states in phononic networks"};
  app.name("cvcluster");
  app.footer(std::string(kFooter));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  ProtocolArgs pa;
  CLI::App* protocol = app.add_subcommand("protocol", "Run one protocol instance and report the cluster quality");
  protocol->add_option("--n", pa.n, "Number of resonators (>= 2)")->required();
  protocol->add_option("--alpha", pa.alpha, "Step-I single-mode squeezing")->required();
  protocol->add_option("--r", pa.r, "Step-II two-mode squeezing")->required();
  protocol->add_option("--theta", pa.theta, "Step-III beam-splitter angle")->capture_default_str();
  protocol->add_option("--kappa", pa.kappa, "Cavity decay rate")->capture_default_str();
  protocol->add_option("--gamma", pa.gamma, "Mechanical decay rate")->capture_default_str();
  protocol->add_option("--n-th", pa.n_th, "Bath phonon number (also the initial one unless --n-th-init)")
      ->capture_default_str();
  protocol->add_option("--n-th-init", pa.n_th_init, "Initial mechanical phonon number");
  protocol->add_option("--g-i", pa.g_i, "Step-I coupling")->capture_default_str();
  protocol->add_option("--g0", pa.g0, "Step-II/III coupling")->capture_default_str();
  protocol->add_option("--samples", pa.samples, "Samples per segment")->capture_default_str();
  protocol->add_option("--extend", pa.extend, "Continue the Step-III drive for this long after tau_3")
      ->capture_default_str();
  detail::add_output_options(protocol, pa.out);

  FigureArgs fa;
  CLI::App* figure = app.add_subcommand("figure", "Emit the data behind one figure panel");
  figure->add_option("id", fa.id, "fig3a..fig3d, fig4a..fig4f, fig5b, fig5c")->required();
  figure->add_option("--grid", fa.grid, "Points per continuous axis")->capture_default_str();
  figure->add_option("--samples", fa.samples, "Samples per segment for time traces")->capture_default_str();
  figure->add_option("--parallelism,-j", fa.parallelism, "Worker threads")->capture_default_str();
  figure->add_option("--set", fa.set, "Override a fixed parameter, KEY=VALUE (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  figure->add_option("--range", fa.range, "Override a continuous axis, AXIS=LO:HI (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  detail::add_output_options(figure, fa.out);

  std::string fault;
  CLI::App* validate = app.add_subcommand("validate", "Run the built-in verification suite");
  validate->add_option("--inject-fault", fault)->group("");

  try {
    std::vector<std::string> tokens = detail::expand_config(args);
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kSuccess;
    const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*protocol) return protocol_command(pa, out);
    if (*figure) return figure_command(fa, out);
    return validate_command(fault, out);
  } catch (const UnphysicalState& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace cvcluster::cli
