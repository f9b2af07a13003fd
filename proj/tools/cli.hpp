/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpbound/mpbound.hpp"

// Command-line front end: round, bounds, mac, gemm.
namespace mpbound::cli {

/// Shortest decimal form that parses back to the same double; "nan"/"inf" otherwise.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// format_number, but integral values keep a ".0" so they read as reals.
inline std::string format_real(double v) {
  std::string s = format_number(v);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline std::string format_hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline std::string format_fraction(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

inline std::string flags_string(std::uint8_t flags) {
  std::string s;
  if (flags & kZeroReference) s += "zero_ref";
  if (flags & kRangeError) s += (s.empty() ? "" : "|") + std::string("range_error");
  return s;
}

/// "auto:<p>" or a plain number.
struct LambdaSpec {
  std::optional<double> fixed;
  double target = 0.0;

  static LambdaSpec parse(std::string_view s) {
    LambdaSpec spec;
    double v = 0.0;
    std::string_view num = s;
    const bool is_auto = s.starts_with("auto:");
    if (is_auto) num.remove_prefix(5);
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc{} || ptr != num.data() + num.size() || !std::isfinite(v))
      throw FormatError("bad lambda '" + std::string(s) + "'");
    if (is_auto) {
      if (!(v > 0.0 && v < 1.0)) throw FormatError("auto lambda target must lie in (0, 1)");
      spec.target = v;
    } else {
      if (v < 0.0) throw FormatError("lambda must be >= 0");
      spec.fixed = v;
    }
    return spec;
  }

  std::string str() const { return fixed ? format_number(*fixed) : "auto:" + format_number(target); }
};

inline double parse_real(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError("bad number '" + std::string(s) + "'");
  return v;
}

/// Fully resolved parameters of a run, echoed in JSON output.
struct RunConfig {
  std::string subcommand;
  std::string variant;
  std::string cfg;
  std::string storage;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string lambda_spec;
  double lambda = 0.0;
  std::optional<GemmShape> shape;
  unsigned threads = 0;
  std::string mode;
};

inline nlohmann::json to_json(const RunConfig& rc) {
  nlohmann::json j = {{"subcommand", rc.subcommand}, {"cfg", rc.cfg},         {"storage", rc.storage},
                      {"trials", rc.trials},         {"seed", rc.seed},       {"lambda_spec", rc.lambda_spec},
                      {"lambda", rc.lambda},         {"threads", rc.threads}, {"mode", rc.mode}};
  if (!rc.variant.empty()) j["variant"] = rc.variant;
  if (rc.shape) {
    const GemmShape& s = *rc.shape;
    j["shape"] = {{"m", s.m}, {"inner", s.inner}, {"t_out", s.t_out}, {"b1", s.b1}, {"b", s.b}, {"b2", s.b2}};
  }
  return j;
}

inline nlohmann::json to_json(const CoverageSummary& s) {
  return {{"n", s.n},
          {"flagged", s.flagged},
          {"max_err", s.max_err},
          {"max_dbea", s.max_dbea},
          {"max_vibea", s.max_vibea},
          {"frac_within_dbea", s.frac_within_dbea},
          {"frac_within_vibea", s.frac_within_vibea},
          {"min_prob_vibea", s.min_prob_vibea}};
}

/// CSV: trial,err_true,bound_dbea,bound_vibea,prob_vibea,flags (GEMM prepends row,col).
inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& records, bool with_position) {
  os << (with_position ? "row,col," : "") << "trial,err_true,bound_dbea,bound_vibea,prob_vibea,flags\n";
  for (const TrialRecord& r : records) {
    if (with_position) os << r.row << ',' << r.col << ',';
    os << r.trial << ',' << format_number(r.err_true) << ',' << format_number(r.bound_dbea) << ','
       << format_number(r.bound_vibea) << ',' << format_number(r.prob_vibea) << ',' << flags_string(r.flags) << '\n';
  }
}

inline void write_json(std::ostream& os, const RunConfig& rc, const CoverageSummary& summary,
                       const std::vector<TrialRecord>& records, bool with_position,
                       const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TrialRecord& r : records) {
    nlohmann::json row = {{"trial", r.trial},
                          {"err_true", r.err_true},
                          {"bound_dbea", r.bound_dbea},
                          {"bound_vibea", r.bound_vibea},
                          {"prob_vibea", r.prob_vibea},
                          {"flags", flags_string(r.flags)}};
    if (with_position) {
      row["row"] = r.row;
      row["col"] = r.col;
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json doc = {{"config", to_json(rc)}, {"summary", to_json(summary)}, {"records", std::move(rows)}};
  for (const auto& [k, v] : extra.items()) doc["summary"][k] = v;
  os << doc.dump(1) << '\n';
}

inline std::string summary_line(const CoverageSummary& s) {
  std::ostringstream os;
  os << "n=" << s.n << " flagged=" << s.flagged << " max_err=" << format_number(s.max_err)
     << " max_dbea=" << format_number(s.max_dbea) << " max_vibea=" << format_number(s.max_vibea)
     << " frac_within_dbea=" << format_fraction(s.frac_within_dbea)
     << " frac_within_vibea=" << format_fraction(s.frac_within_vibea)
     << " min_prob_vibea=" << format_fraction(s.min_prob_vibea);
  return os.str();
}

namespace detail {

struct Outputs {
  std::ostream& out;
  std::ostream& err;
};

/// Writes `body` to `path` ("-" = stdout). Returns false on I/O failure.
template <class Body>
bool emit(const std::string& path, std::ostream& stdout_stream, Body&& body) {
  if (path == "-") {
    body(stdout_stream);
    return static_cast<bool>(stdout_stream);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  body(f);
  f.close();
  return !f.fail();
}

inline void print_kv(std::ostream& os, std::string_view key, const std::string& value) {
  os << key << ": " << value << '\n';
}

}  // namespace detail

/// Entry point. Exit codes: 0 success, 1 runtime/domain error, 2 usage error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-precision rounding error emulator and bound calculator", "mpbound"};
  app.require_subcommand(1);

  // round
  std::string round_value, round_fmt;
  auto* round_cmd = app.add_subcommand("round", "Round a value into a format and show the realized error");
  round_cmd->add_option("value", round_value, "value to round")->required();
  round_cmd->add_option("format", round_fmt, "fp16 | fp32 | fp64 | custom:p=<int>,emin=<int>,emax=<int>")
      ->required();

  // bounds
  std::string bounds_kind, bounds_u_str, bounds_fmt = "fp32", bounds_lambda = "1", bounds_cfg = "fp16-fp32";
  std::uint64_t bounds_n = 2, bounds_inner = 4096, bounds_b = 4, bounds_m = 1, bounds_tout = 1;
  bool bounds_json = false;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate bound constants and kernel coefficients");
  bounds_cmd->add_option("kind", bounds_kind, "gamma | gamma-tilde | pb | mac | mpfma | tc")
      ->required()
      ->check(CLI::IsMember({"gamma", "gamma-tilde", "pb", "mac", "mpfma", "tc"}));
  bounds_cmd->add_option("--n", bounds_n, "number of rounding factors");
  bounds_cmd->add_option("--u", bounds_u_str, "unit roundoff (overrides --fmt)");
  bounds_cmd->add_option("--fmt", bounds_fmt, "format whose unit roundoff is used");
  bounds_cmd->add_option("--lambda", bounds_lambda, "lambda >= 0 or auto:<target probability>");
  bounds_cmd->add_option("--cfg", bounds_cfg, "fp16-fp32 | fp16-fp16 | low/high/mul/acc/out");
  bounds_cmd->add_option("--inner", bounds_inner, "inner GEMM dimension");
  bounds_cmd->add_option("--b", bounds_b, "inner block length");
  bounds_cmd->add_option("--m", bounds_m, "output rows");
  bounds_cmd->add_option("--tout", bounds_tout, "output columns");
  bounds_cmd->add_flag("--json", bounds_json, "print JSON");

  // shared experiment options
  std::uint64_t trials = 1000000, seed = 0;
  std::string lambda_str = "1", cfg_str = "fp16-fp32", out_path = "-", mode = "csv";
  unsigned threads = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--lambda", lambda_str, "lambda >= 0 or auto:<target probability>");
    cmd->add_option("--cfg", cfg_str, "fp16-fp32 | fp16-fp16 | low/high/mul/acc/out");
    cmd->add_option("--out", out_path, "output file, - for stdout");
    cmd->add_option("--mode", mode, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", threads, "worker threads, 0 = all cores");
  };

  std::string variant_str = "fma";
  auto* mac_cmd = app.add_subcommand("mac", "Monte Carlo a*b + c with a, b, c ~ U[1, 2]");
  mac_cmd->add_option("--variant", variant_str, "no_fma | fma | mpfma")
      ->check(CLI::IsMember({"no_fma", "no-fma", "fma", "mpfma"}));
  mac_cmd->add_option("--trials", trials, "number of trials");
  add_common(mac_cmd);

  GemmShape shape{std::size_t{1} << 8, std::size_t{1} << 12, std::size_t{1} << 3, 4, 4, 4};
  std::uint64_t gemm_trials = 1;
  bool paper_scale = false;
  auto* gemm_cmd = app.add_subcommand("gemm", "Monte Carlo tensor-core GEMM with A, B ~ U(-1, 1)");
  gemm_cmd->add_option("--m", shape.m, "rows of D");
  gemm_cmd->add_option("--inner", shape.inner, "inner dimension");
  gemm_cmd->add_option("--tout", shape.t_out, "columns of D");
  gemm_cmd->add_option("--b1", shape.b1, "tile rows");
  gemm_cmd->add_option("--b", shape.b, "inner block length");
  gemm_cmd->add_option("--b2", shape.b2, "tile columns");
  gemm_cmd->add_option("--trials", gemm_trials, "number of trials");
  gemm_cmd->add_flag("--paper-scale", paper_scale, "m = 2^10, inner = 2^15, t_out = 2^3");
  add_common(gemm_cmd);

  std::vector<const char*> argv;
  argv.push_back("mpbound");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*round_cmd) {
      const FloatFormat fmt = parse_format(round_fmt);
      const double v = parse_real(round_value);
      const RoundedValue r = round(v, fmt);
      out << format_real(r.value) << ' ' << (r.inexact ? "inexact" : "exact") << " δ=" << format_number(r.delta)
          << " hex=" << format_hex(r.value) << '\n';
      return 0;
    }

    if (*bounds_cmd) {
      const double u = bounds_u_str.empty() ? unit_roundoff(parse_format(bounds_fmt)) : parse_real(bounds_u_str);
      const LambdaSpec ls = LambdaSpec::parse(bounds_lambda);
      nlohmann::json j = nlohmann::json::object();
      std::vector<std::pair<std::string, std::string>> rows;
      auto put = [&](const std::string& k, double v) {
        j[k] = v;
        rows.emplace_back(k, format_number(v));
      };
      auto put_text = [&](const std::string& k, const std::string& v) {
        j[k] = v;
        rows.emplace_back(k, v);
      };

      if (bounds_kind == "gamma") {
        put_text("n", std::to_string(bounds_n));
        put("u", u);
        put("gamma", gamma(bounds_n, u));
      } else if (bounds_kind == "gamma-tilde" || bounds_kind == "pb") {
        const double lambda = ls.fixed ? *ls.fixed : lambda_for_probability(ls.target, u, bounds_n);
        put_text("n", std::to_string(bounds_n));
        put("u", u);
        put_text("lambda_spec", ls.str());
        put("lambda", lambda);
        if (bounds_kind == "gamma-tilde") put("gamma_tilde", gamma_tilde(bounds_n, u, lambda));
        const double p = prob_bound(lambda, u, bounds_n);
        put("pb_raw", p);
        put("pb_clamped", clamp_probability(p));
      } else if (bounds_kind == "mac") {
        const double lambda = ls.fixed ? *ls.fixed : lambda_for_probability(ls.target, u, 2);
        put("u", u);
        put_text("lambda_spec", ls.str());
        put("lambda", lambda);
        const CoefPair f = fma_coefs(u);
        const CoefPair nd = mac_no_fma_coefs(u), np = mac_no_fma_coefs(u, Analysis::probabilistic, lambda);
        const CoefPair rd = fma_repr_coefs(u), rp = fma_repr_coefs(u, Analysis::probabilistic, lambda);
        put("fma_coef_ab", f.coef_ab);
        put("fma_coef_c", f.coef_c);
        put("no_fma_dbea_coef_ab", nd.coef_ab);
        put("no_fma_vibea_coef_ab", np.coef_ab);
        put("no_fma_coef_c", nd.coef_c);
        put("fma_repr_dbea_coef_ab", rd.coef_ab);
        put("fma_repr_vibea_coef_ab", rp.coef_ab);
        put("fma_repr_coef_c", rd.coef_c);
        const double p = prob_bound(lambda, u, 2);
        put("pb_raw", p);
        put("pb_clamped", clamp_probability(p));
      } else if (bounds_kind == "mpfma") {
        const TensorCoreConfig cfg = parse_config(bounds_cfg);
        const double lambda = ls.fixed ? *ls.fixed : lambda_for_probability(ls.target, cfg.u_low(), 2);
        put_text("cfg", to_string(cfg));
        put_text("lambda_spec", ls.str());
        put("lambda", lambda);
        put_text("single_rounding", is_single_rounding(cfg) ? "true" : "false");
        put("mpfma_coef", mpfma_coefs(cfg).coef_ab);
        put("mpfma_two_stage_zeta", mpfma_zeta(cfg));
        const CoefPair rd = mpfma_repr_coefs(cfg), rp = mpfma_repr_coefs(cfg, Analysis::probabilistic, lambda);
        put("repr_dbea_coef_ab", rd.coef_ab);
        put("repr_vibea_coef_ab", rp.coef_ab);
        put("repr_coef_c", rd.coef_c);
        const double p = prob_bound(lambda, cfg.u_low(), 2);
        put("pb_raw", p);
        put("pb_clamped", clamp_probability(p));
      } else {  // tc
        const TensorCoreConfig cfg = parse_config(bounds_cfg);
        if (bounds_b == 0 || bounds_inner == 0 || bounds_inner % bounds_b != 0)
          throw ShapeError("--b must divide --inner");
        const std::uint64_t q = bounds_inner / bounds_b;
        const double lambda =
            ls.fixed ? *ls.fixed
                     : lambda_for_tc_probability(ls.target, bounds_m, bounds_tout, bounds_inner, bounds_b, cfg);
        put_text("cfg", to_string(cfg));
        put_text("inner", std::to_string(bounds_inner));
        put_text("b", std::to_string(bounds_b));
        put_text("q", std::to_string(q));
        put_text("m", std::to_string(bounds_m));
        put_text("t_out", std::to_string(bounds_tout));
        put_text("lambda_spec", ls.str());
        put("lambda", lambda);
        const double zd = tc_zeta(bounds_inner, q, cfg), zp = tc_zeta(bounds_inner, q, cfg, Analysis::probabilistic, lambda);
        const double cd = tc_repr_coef(bounds_inner, q, cfg);
        const double cp = tc_repr_coef(bounds_inner, q, cfg, Analysis::probabilistic, lambda);
        put("zeta_dbea", zd);
        put("zeta_vibea", zp);
        put("repr_coef_dbea", cd);
        put("repr_coef_vibea", cp);
        put("zeta_ratio", zp / zd);
        put("repr_ratio", cp / cd);
        const Probability p = tc_probability(bounds_m, bounds_tout, bounds_inner, bounds_b, q, cfg, lambda);
        put("probability_raw", p.raw);
        put("probability_clamped", p.clamped);
      }
      if (bounds_json) {
        out << j.dump(1) << '\n';
      } else {
        for (const auto& [k, v] : rows) detail::print_kv(out, k, v);
      }
      return 0;
    }

    const bool is_mac = static_cast<bool>(*mac_cmd);
    const TensorCoreConfig cfg = parse_config(cfg_str);
    const LambdaSpec ls = LambdaSpec::parse(lambda_str);
    RunConfig rc;
    rc.cfg = to_string(cfg);
    rc.storage = to_string(experiment_storage());
    rc.seed = seed;
    rc.lambda_spec = ls.str();
    rc.threads = threads;
    rc.mode = mode;
    const ExecPolicy policy{threads};

    std::vector<TrialRecord> records;
    nlohmann::json extra = nlohmann::json::object();
    std::string extra_line;
    if (is_mac) {
      const MacVariant variant = parse_mac_variant(variant_str);
      if (trials == 0) throw FormatError("--trials must be >= 1");
      rc.subcommand = "mac";
      rc.variant = std::string(to_string(variant));
      rc.trials = trials;
      rc.lambda = ls.fixed ? *ls.fixed : auto_lambda_mac(variant, ls.target, cfg);
      records = mac_experiment(variant, trials, seed, rc.lambda, cfg, policy);
    } else {
      if (paper_scale) {
        shape.m = std::size_t{1} << 10;
        shape.inner = std::size_t{1} << 15;
        shape.t_out = std::size_t{1} << 3;
      }
      validate(shape);
      if (gemm_trials == 0) throw FormatError("--trials must be >= 1");
      rc.subcommand = "gemm";
      rc.trials = gemm_trials;
      rc.shape = shape;
      rc.lambda = ls.fixed ? *ls.fixed : auto_lambda_gemm(shape, ls.target, cfg);
      records = gemm_experiment(shape, gemm_trials, seed, rc.lambda, cfg, policy);
      const double cd = tc_repr_coef(shape.inner, shape.q(), cfg);
      const double cp = tc_repr_coef(shape.inner, shape.q(), cfg, Analysis::probabilistic, rc.lambda);
      extra["tightness_ratio"] = cp / cd;
      extra_line = " tightness_ratio=" + format_number(cp / cd);
    }

    const CoverageSummary summary = coverage_summary(records);
    const bool ok = detail::emit(out_path, out, [&](std::ostream& os) {
      if (mode == "json")
        write_json(os, rc, summary, records, !is_mac, extra);
      else
        write_csv(os, records, !is_mac);
    });
    if (!ok) {
      err << "error: cannot write " << out_path << '\n';
      return 1;
    }
    std::ostream& summary_stream = out_path == "-" ? err : out;
    summary_stream << rc.subcommand << (is_mac ? " variant=" + rc.variant : std::string{}) << " cfg=" << rc.cfg
                   << " lambda=" << format_number(rc.lambda) << ' ' << summary_line(summary) << extra_line << '\n';
    return 0;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mpbound::cli
