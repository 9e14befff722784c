#pragma once

// Command-line surface. run() is separate from main() so the test suites can
// drive every subcommand in-process.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "webrt/webrt.hpp"

namespace webrt::cli {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("cannot write file: " + path);
}

/// HAR when the document starts with '{', worksheet CSV otherwise.
inline PageManifest load_manifest(const std::string& path) {
  const std::string bytes = read_file(path);
  const auto first = bytes.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first != std::string::npos && bytes[first] == '{') return parse_har(bytes);
  return parse_worksheet_csv(std::string_view(bytes));
}

inline ServerTimes load_server_times(const std::string& path) {
  std::istringstream in(read_file(path));
  ServerTimes out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    if (row == 1) {
      if (text::trim(line) != "url,server_ms") throw ParseError("expected header 'url,server_ms'", row);
      continue;
    }
    const auto f = text::split_csv(line);
    const auto v = f.size() == 2 ? text::parse_double(f[1]) : std::nullopt;
    if (!v || *v < 0) throw ParseError("row " + std::to_string(row) + ": invalid server time", row);
    out[f[0]] = *v;
  }
  return out;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Web page response time prediction toolkit", "webrt"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Derive a network profile from a last-mile measurement CSV");
  std::string measurements, country, out_profile, server_times_path;
  fit->add_option("--measurements", measurements, "CSV: " + std::string(kMeasurementHeader))->required();
  fit->add_option("--country", country, "Country code stored in the profile")->required();
  fit->add_option("--out", out_profile, "Profile file to write (stdout when omitted)");
  fit->add_option("--server-times", server_times_path, "CSV url,server_ms per base page (default 200 ms)");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict page response time from a manifest and profile");
  std::string manifest_path, profile_path, mode = "single-cdn", format = "table";
  std::optional<double> bpe_value, measured;
  bool include_render = false, exclude_server = false, from_sizes = false;
  predict->add_option("--manifest", manifest_path, "Worksheet CSV or HAR file")->required();
  predict->add_option("--profile", profile_path, "Network profile JSON")->required();
  predict->add_option("--bpe", bpe_value, "Explicit browser parallel efficiency (computed when omitted)")
      ->check(CLI::Range(1.0, 1e9));
  predict->add_option("--mode", mode, "DNS/connect accounting")
      ->check(CLI::IsMember({"single-cdn", "per-domain"}));
  predict->add_flag("--include-render", include_render, "Add the rendering-time term");
  predict->add_flag("--exclude-server", exclude_server, "Leave out the server processing time");
  predict->add_flag("--from-sizes", from_sizes, "Use the profile size models instead of measured times");
  predict->add_option("--measured", measured, "Measured response time (ms) to compare against")
      ->check(CLI::PositiveNumber);
  predict->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv"}));

  // bpe
  auto* bpe_cmd = app.add_subcommand("bpe", "Browser parallel efficiency from first byte and average download");
  double fb = 0, avg_cd = 0;
  bool round = false;
  bpe_cmd->add_option("--fb", fb, "First byte time (ms)")->required();
  bpe_cmd->add_option("--avg-cd", avg_cd, "Average content download time (ms)")->required();
  bpe_cmd->add_flag("--round", round, "Round to the nearest integer (half up)");

  // render
  auto* render = app.add_subcommand("render", "Rendering time from page weight and request count");
  double total_kb = 0;
  int requests = 0;
  render->add_option("--total-kb", total_kb, "Total page weight (KB)")->required()->check(CLI::NonNegativeNumber);
  render->add_option("--requests", requests, "Number of HTTP requests")->required()->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate parallel downloads over k connections");
  std::string components_path, schedule_path;
  int k = 0, k_max = 0;
  sim->add_option("--components", components_path,
                  "Worksheet CSV / HAR with measured times, or CSV " + std::string(kSimComponentsHeader))
      ->required();
  auto* k_opt = sim->add_option("--k", k, "Connection count")->check(CLI::PositiveNumber);
  auto* sweep_opt = sim->add_option("--sweep", k_max, "Simulate k = 1..K")->check(CLI::PositiveNumber);
  k_opt->excludes(sweep_opt);
  sim->add_option("--schedule", schedule_path, "Write the schedule CSV (with --k)")->needs(k_opt);

  // validate
  auto* val = app.add_subcommand("validate", "Error statistics of predicted vs measured response times");
  std::string pairs_path, val_format = "table";
  val->add_option("--pairs", pairs_path, "CSV with predicted_ms,measured_ms columns")->required();
  val->add_option("--format", val_format, "Output format")->check(CLI::IsMember({"table", "csv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "webrt: " << e.what() << "\n";
    err << "run 'webrt --help' for usage\n";
    return 2;
  }
  if (*sim && !*k_opt && !*sweep_opt) {
    err << "webrt simulate: one of --k or --sweep is required\n";
    return 2;
  }

  try {
    if (*fit) {
      const ServerTimes st = server_times_path.empty() ? ServerTimes{} : load_server_times(server_times_path);
      std::ifstream in(measurements, std::ios::binary);
      if (!in) throw Error("cannot read file: " + measurements);
      ProfileBuilder builder;
      const auto rows = read_measurements(in, [&](const MeasurementRecord& r) { builder.add(r); });
      const NetworkProfile profile = builder.finish(st, country);
      const std::string json = save_profile(profile);
      if (out_profile.empty()) {
        out << json;
      } else {
        write_file(out_profile, json);
        out << "fitted " << rows << " records -> " << out_profile << "\n";
      }
      return 0;
    }
    if (*predict) {
      const PageManifest manifest = load_manifest(manifest_path);
      const NetworkProfile profile = load_profile(read_file(profile_path));
      PredictionConfig config;
      if (bpe_value) config.bpe_source = ExplicitBpe{*bpe_value};
      config.dns_connect_mode = mode == "per-domain" ? DnsConnectMode::PerDomainOverBpe : DnsConnectMode::SingleCdn;
      config.include_render = include_render;
      config.include_server = !exclude_server;
      const auto breakdown = from_sizes ? predict_from_sizes(manifest, profile, config)
                                        : predict_worksheet(manifest, profile, config);
      out << (format == "csv" ? render_csv(breakdown, config, measured) : render_table(breakdown, config, measured));
      return 0;
    }
    if (*bpe_cmd) {
      const double v = bpe({fb, avg_cd, round ? Rounding::NearestInt : Rounding::Raw});
      out << (round ? text::fixed(v, 0) : text::fixed(v)) << "\n";
      return 0;
    }
    if (*render) {
      const double n = total_kb / requests;
      out << "class " << to_string(render_class(n)) << "\n";
      out << "avg_kb_per_request " << text::fixed(n) << "\n";
      out << "render_ms " << text::fixed(render_time_ms(total_kb, n)) << "\n";
      return 0;
    }
    if (*sim) {
      const std::string bytes = read_file(components_path);
      std::vector<SimComponent> comps;
      if (bytes.rfind(kSimComponentsHeader, 0) == 0) {
        std::istringstream in(bytes);
        comps = read_sim_components(in);
      } else {
        comps = sim_components(load_manifest(components_path));
      }
      const double serial = serial_sum(comps);
      if (*sweep_opt) {
        out << "k makespan_ms effective_parallelism\n";
        for (const auto& p : sweep(comps, k_max)) {
          out << p.k << " " << text::fixed(p.makespan_ms) << " "
              << (p.makespan_ms > 0 ? text::fixed(serial / p.makespan_ms) : std::string("-")) << "\n";
        }
        return 0;
      }
      const SimResult r = simulate(comps, k);
      out << "makespan_ms " << text::fixed(r.makespan_ms) << "\n";
      out << "connections_used " << r.connections_used << "\n";
      if (r.makespan_ms > 0) out << "effective_parallelism " << text::fixed(serial / r.makespan_ms) << "\n";
      if (!schedule_path.empty()) write_file(schedule_path, schedule_csv(r));
      return 0;
    }
    if (*val) {
      std::istringstream in(read_file(pairs_path));
      const auto pairs = read_pairs_csv(in);
      const ValidationStats s = validate(pairs);
      if (val_format == "csv") {
        out << "row,predicted_ms,measured_ms,error_pct\n";
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          out << i + 1 << "," << text::fixed(pairs[i].predicted_ms) << "," << text::fixed(pairs[i].measured_ms) << ","
              << text::fixed(s.per_row_error_pct[i]) << "\n";
        }
        out << "mean,,," << text::fixed(s.mean_error_pct) << "\n";
        out << "stddev,,," << (s.stddev_defined ? text::fixed(s.stddev_error_pct) : std::string()) << "\n";
      } else {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          out << i + 1 << "  predicted " << text::fixed(pairs[i].predicted_ms) << "  measured "
              << text::fixed(pairs[i].measured_ms) << "  error " << text::fixed(s.per_row_error_pct[i]) << "%\n";
        }
        out << "mean " << text::fixed(s.mean_error_pct) << "% stddev "
            << (s.stddev_defined ? text::fixed(s.stddev_error_pct) + "%" : std::string("n/a (n=1)")) << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "webrt: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace webrt::cli
