#include "varq/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "varq/errors.hpp"
#include "varq/io.hpp"
#include "varq/simulator.hpp"

namespace varq {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- audit -----------------------------------------------------------------

AuditReport audit_batch(const TStatBatch<double>& batch, const AuditOptions& options) {
  if (batch.size() < 1) throw ValidationError("audit: empty input");
  AuditReport out;
  out.n = static_cast<std::size_t>(batch.size());
  out.options = options;
  for (const auto metric : kAllMetrics) {
    MetricAudit audit;
    audit.metric = metric;
    try {
      switch (metric) {
        case MetricKind::Fpr: audit.estimate = fpr(batch, options.ci_level); break;
        case MetricKind::AvgT2: audit.estimate = avg_t2(batch); break;
        case MetricKind::Kurtosis: audit.estimate = kurtosis_g2(batch); break;
      }
      audit.report = metric_report(metric, batch, options.alpha, options.sidedness.of(metric),
                                   options.ci_level);
    } catch (const InsufficientDataError& e) {
      audit.unavailable = e.what();
    } catch (const DegenerateDispersionError& e) {
      audit.unavailable = e.what();
    } catch (const ZeroStandardError& e) {
      audit.unavailable = e.what();
    }
    out.metrics.push_back(std::move(audit));
  }
  return out;
}

AuditReport cmd_audit(const fs::path& input, const AuditOptions& options) {
  if (!(options.alpha > 0 && options.alpha < 1)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(options.ci_level > 0 && options.ci_level < 1)) throw ValidationError("ci_level must lie in (0, 1)");
  const auto file = read_tstat_file(input);
  const TStatBatch<double> batch =
      Eigen::Map<const Eigen::ArrayXd>(file.values.data(), static_cast<Eigen::Index>(file.values.size()));
  auto report = audit_batch(batch, options);
  report.experiments = std::set<std::string>(file.ids.begin(), file.ids.end()).size();
  return report;
}

json to_json(const AuditReport& report) {
  json metrics = json::array();
  for (const auto& m : report.metrics) {
    json entry = {{"metric", to_string(m.metric)},
                  {"estimate", m.estimate ? json(*m.estimate) : json(nullptr)},
                  {"available", m.report.has_value()}};
    if (m.report) {
      entry["null_value"] = m.report->null_value;
      entry["std_error"] = m.report->std_error;
      entry["z_score"] = m.report->z_score;
      entry["p_value"] = m.report->p_value;
      entry["reject"] = m.report->reject;
      entry["sidedness"] = to_string(m.report->sidedness);
    } else {
      entry["unavailable"] = m.unavailable;
    }
    metrics.push_back(entry);
  }
  return {{"n", report.n},
          {"experiments", report.experiments},
          {"alpha", report.options.alpha},
          {"ci_level", report.options.ci_level},
          {"metrics", metrics}};
}

std::string render_text(const AuditReport& report) {
  std::ostringstream out;
  out << "n = " << report.n << " t-statistics from " << report.experiments << " experiment(s); alpha = "
      << report.options.alpha << ", ci_level = " << report.options.ci_level << "\n";
  out << std::left << std::setw(10) << "metric" << std::setw(14) << "estimate" << std::setw(8) << "null"
      << std::setw(14) << "std_error" << std::setw(10) << "z" << std::setw(12) << "p" << "decision\n";
  for (const auto& m : report.metrics) {
    out << std::setw(10) << to_string(m.metric);
    out << std::setw(14) << (m.estimate ? format_real(*m.estimate).substr(0, 12) : "n/a");
    if (m.report) {
      const auto& r = *m.report;
      out << std::setw(8) << r.null_value << std::setw(14) << std::setprecision(6) << r.std_error
          << std::setw(10) << std::setprecision(4) << r.z_score << std::setw(12) << std::setprecision(4)
          << r.p_value << (r.reject ? "REJECT" : "accept") << "\n";
    } else {
      out << "UNAVAILABLE (" << m.unavailable << ")\n";
    }
  }
  return out.str();
}

// ---- sweep -----------------------------------------------------------------

std::string power_csv_body(const SweepResult& sweep) {
  std::string out = "theta,metric,n,power,trials\n";
  for (const auto& curve : sweep.curves) {
    for (const auto& p : curve.points) {
      out += format_real(p.theta) + "," + std::string(to_string(p.metric)) + "," + std::to_string(p.n_tests) +
             "," + format_real(p.power) + "," + std::to_string(p.trials) + "\n";
    }
  }
  return out;
}

std::string complexity_csv_body(const std::vector<SampleComplexityResult>& table) {
  std::string out = "metric,theta,target_power,n_required\n";
  for (const auto& r : table) {
    out += std::string(to_string(r.metric)) + "," + format_real(r.theta) + "," + format_real(r.target_power) +
           "," + (r.n_required ? format_real(*r.n_required) : "NOT_REACHED") + "\n";
  }
  return out;
}

std::string efficiency_csv_body(const std::vector<EfficiencyEntry>& table) {
  std::string out = "metric_1,metric_2,theta,target_power,e12\n";
  for (const auto& e : table) {
    out += std::string(to_string(e.metric_1)) + "," + std::string(to_string(e.metric_2)) + "," +
           format_real(e.theta) + "," + format_real(e.target_power) + "," +
           (e.e12 ? format_real(*e.e12) : "UNDEFINED") + "\n";
  }
  return out;
}

namespace {

json sweep_json(const SweepOutputs& o) {
  json power = json::array();
  for (const auto& curve : o.sweep.curves) {
    for (const auto& p : curve.points) {
      power.push_back({{"theta", p.theta},
                       {"metric", to_string(p.metric)},
                       {"n", p.n_tests},
                       {"power", p.power},
                       {"trials", p.trials},
                       {"rejections", p.rejections},
                       {"degenerate", p.degenerate}});
    }
  }
  json complexity = json::array();
  for (const auto& r : o.complexity) {
    complexity.push_back({{"metric", to_string(r.metric)},
                          {"theta", r.theta},
                          {"target_power", r.target_power},
                          {"n_required", r.n_required ? json(*r.n_required) : json(nullptr)},
                          {"interpolated", r.interpolated}});
  }
  json efficiency = json::array();
  for (const auto& e : o.efficiency) {
    efficiency.push_back({{"metric_1", to_string(e.metric_1)},
                          {"metric_2", to_string(e.metric_2)},
                          {"theta", e.theta},
                          {"target_power", e.target_power},
                          {"e12", e.e12 ? json(*e.e12) : json(nullptr)}});
  }
  return {{"manifest", to_json(o.manifest)},
          {"power", power},
          {"complexity", complexity},
          {"efficiency", efficiency}};
}

}  // namespace

SweepOutputs cmd_sweep(RunManifest manifest, const fs::path& out_dir, unsigned workers) {
  manifest.command = "sweep";
  manifest.started = utc_timestamp();
  try {
    manifest.config.validate();
    manifest.sweep.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  for (const double target : manifest.target_powers) {
    if (!(target > 0 && target < 1)) throw ValidationError("target powers must lie in (0, 1)");
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  // Fail on an unwritable directory before spending time on the sweep.
  write_file_atomic(out_dir / "manifest.json", to_json(manifest).dump(2) + "\n");

  SweepOutputs o;
  o.sweep = run_sweep(manifest.sweep, manifest.config, manifest.config.seed, workers);
  o.complexity = complexity_table(o.sweep.curves, manifest.target_powers, manifest.interpolation);
  o.efficiency = efficiency_table(o.sweep.curves, manifest.target_powers, manifest.interpolation);

  manifest.diagnostics.degenerate_batches = o.sweep.degenerate_batches;
  manifest.diagnostics.not_reached = static_cast<std::size_t>(std::count_if(
      o.complexity.begin(), o.complexity.end(), [](const auto& r) { return !r.n_required; }));
  manifest.diagnostics.undefined_efficiency = static_cast<std::size_t>(
      std::count_if(o.efficiency.begin(), o.efficiency.end(), [](const auto& e) { return !e.e12; }));
  manifest.finished = utc_timestamp();
  o.manifest = manifest;

  const std::string header = comment_block(to_json(manifest));
  write_file_atomic(out_dir / "power.csv", header + power_csv_body(o.sweep));
  write_file_atomic(out_dir / "complexity.csv", header + complexity_csv_body(o.complexity));
  write_file_atomic(out_dir / "efficiency.csv", header + efficiency_csv_body(o.efficiency));
  write_file_atomic(out_dir / "sweep.json", sweep_json(o).dump(2) + "\n");
  write_file_atomic(out_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
  return o;
}

// ---- plotdata --------------------------------------------------------------

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

double parse_number(const std::string& text, const std::string& source, std::size_t line) {
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DependencyError(source + ":" + std::to_string(line) + ": malformed number '" + text + "'");
  }
  return v;
}

// Insertion-ordered grouping.
template <typename T>
T& group(std::vector<std::pair<std::string, T>>& groups, const std::string& key) {
  for (auto& [k, v] : groups) {
    if (k == key) return v;
  }
  return groups.emplace_back(key, T{}).second;
}

std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series, bool log_y) {
  constexpr double width = 640, height = 420, left = 70, right = 160, top = 40, bottom = 50;
  constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double x_min = 0, x_max = 1, y_min = INFINITY, y_max = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      const double v = log_y ? std::log10(y) : y;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!std::isfinite(y_min)) y_min = 0, y_max = 1;
  if (y_max - y_min < 1e-12) y_min -= 0.5, y_max += 0.5;
  const auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (width - left - right); };
  const auto py = [&](double y) {
    const double v = log_y ? std::log10(y) : y;
    return height - bottom - (v - y_min) / (y_max - y_min) * (height - top - bottom);
  };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = x_min + (x_max - x_min) * i / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << format_real(std::round(x * 100) / 100) << "</text>\n";
    const double v = y_min + (y_max - y_min) * i / 4.0;
    const double label = log_y ? std::pow(10.0, v) : v;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << py(log_y ? label : v) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_real(std::round(label * 100) / 100) << "</text>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[k].points) svg << px(x) << "," << py(y) << " ";
    svg << "\"/>\n";
    const double ly = top + 16.0 * double(k);
    svg << "<line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 32 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - right + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << series[k].name
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

PlotDataSummary cmd_plotdata(const fs::path& sweep_dir, const fs::path& out_dir) {
  const auto power_path = sweep_dir / "power.csv";
  const auto efficiency_path = sweep_dir / "efficiency.csv";
  for (const auto& p : {power_path, efficiency_path}) {
    if (!fs::exists(p)) throw DependencyError("missing sweep output " + p.string());
  }
  const auto power = read_csv(power_path);
  const auto efficiency = read_csv(efficiency_path);
  require_header(power, kPowerHeader, power_path.string());
  require_header(efficiency, kEfficiencyHeader, efficiency_path.string());
  if (power.rows.empty()) throw DependencyError(power_path.string() + ": no rows");

  // theta -> metric -> (power, n)
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>>>
      fig1;
  for (std::size_t r = 0; r < power.rows.size(); ++r) {
    const auto& row = power.rows[r];
    if (row.size() != kPowerHeader.size()) {
      throw DependencyError(power_path.string() + ":" + std::to_string(power.row_lines[r]) + ": truncated row");
    }
    const double pw = parse_number(row[3], power_path.string(), power.row_lines[r]);
    const double n = parse_number(row[2], power_path.string(), power.row_lines[r]);
    group(group(fig1, row[0]), row[1]).emplace_back(pw, n);
  }

  // theta -> "m1 vs m2" -> (target_power, e12)
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>>>
      fig2;
  PlotDataSummary summary;
  for (std::size_t r = 0; r < efficiency.rows.size(); ++r) {
    const auto& row = efficiency.rows[r];
    if (row.size() != kEfficiencyHeader.size()) {
      throw DependencyError(efficiency_path.string() + ":" + std::to_string(efficiency.row_lines[r]) +
                            ": truncated row");
    }
    auto& per_pair = group(group(fig2, row[2]), row[0] + "," + row[1]);
    if (row[4] == "UNDEFINED") {
      ++summary.omitted_undefined;
      continue;
    }
    per_pair.emplace_back(parse_number(row[3], efficiency_path.string(), efficiency.row_lines[r]),
                          parse_number(row[4], efficiency_path.string(), efficiency.row_lines[r]));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  for (const auto& [theta, metrics] : fig1) {
    std::string csv = "metric,power,n\n";
    std::vector<Series> series;
    for (const auto& [metric, points] : metrics) {
      for (const auto& [pw, n] : points) csv += metric + "," + format_real(pw) + "," + format_real(n) + "\n";
      series.push_back({metric, points});
    }
    const auto path = out_dir / ("figure1_theta_" + theta + ".csv");
    write_file_atomic(path, csv);
    summary.figure1_files.push_back(path);
    const auto svg = out_dir / ("figure1_theta_" + theta + ".svg");
    write_file_atomic(svg, svg_plot("Sample complexity, theta = " + theta, "power", "n (log scale)", series, true));
    summary.svg_files.push_back(svg);
  }
  for (const auto& [theta, pairs] : fig2) {
    std::string csv = "metric_1,metric_2,target_power,e12\n";
    std::vector<Series> series;
    for (const auto& [pair, points] : pairs) {
      for (const auto& [tp, e] : points) csv += pair + "," + format_real(tp) + "," + format_real(e) + "\n";
      auto name = pair;
      std::replace(name.begin(), name.end(), ',', '/');
      if (!points.empty()) series.push_back({name, points});
    }
    const auto path = out_dir / ("figure2_theta_" + theta + ".csv");
    write_file_atomic(path, csv);
    summary.figure2_files.push_back(path);
    const auto svg = out_dir / ("figure2_theta_" + theta + ".svg");
    write_file_atomic(svg, svg_plot("Relative efficiency, theta = " + theta, "target power", "e12", series, false));
    summary.svg_files.push_back(svg);
  }
  return summary;
}

// ---- simulate --------------------------------------------------------------

TStatBatch<double> cmd_simulate(const ExperimentConfig& config, const std::optional<fs::path>& out,
                                unsigned workers, std::string* rendered) {
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config = config;
  manifest.started = utc_timestamp();
  auto batch = run_aa_batch(config, rng_substream(config.seed, 0), workers);
  manifest.finished = utc_timestamp();

  TStatFile file;
  file.manifest = to_json(manifest);
  file.values.assign(batch.data(), batch.data() + batch.size());
  file.ids.reserve(file.values.size());
  for (std::size_t j = 0; j < file.values.size(); ++j) file.ids.push_back("aa-" + std::to_string(j));
  const auto text = render_tstat(file);
  if (out) write_file_atomic(*out, text);
  if (rendered) *rendered = text;
  return batch;
}

}  // namespace varq
