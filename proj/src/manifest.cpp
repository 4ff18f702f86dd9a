#include "varq/manifest.hpp"

#include <chrono>
#include <ctime>

#include "varq/io.hpp"

#ifndef VARQ_VERSION
#define VARQ_VERSION "0.0.0"
#endif

namespace varq {

using nlohmann::json;

std::string artifact_version() { return VARQ_VERSION; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const ExperimentConfig& c) {
  json source;
  if (c.source.kind == SourceDistribution::Kind::Uniform) {
    source = {{"kind", "uniform"}, {"lo", c.source.a}, {"hi", c.source.b}};
  } else {
    source = {{"kind", "normal"}, {"mean", c.source.a}, {"sd", c.source.b}};
  }
  return {
      {"group_size", c.group_size},
      {"source", source},
      {"theta", c.noise.theta},
      {"n_tests", c.n_tests},
      {"alpha", c.alpha},
      {"ci_level", c.ci_level},
      {"sidedness",
       {{"FPR", to_string(c.sidedness.fpr)},
        {"AVG_T2", to_string(c.sidedness.avg_t2)},
        {"KURTOSIS", to_string(c.sidedness.kurtosis)}}},
      {"mode", to_string(c.mode)},
      {"seed", c.seed},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.group_size = j.value("group_size", c.group_size);
    if (j.contains("source")) {
      const auto& s = j.at("source");
      const auto kind = s.value("kind", std::string("uniform"));
      if (kind == "uniform") {
        c.source = SourceDistribution::uniform(s.value("lo", 5.0), s.value("hi", 6.0));
      } else if (kind == "normal") {
        c.source = SourceDistribution::normal(s.value("mean", 0.0), s.value("sd", 1.0));
      } else {
        throw ValidationError("unknown source kind: " + kind);
      }
    }
    c.noise.theta = j.value("theta", c.noise.theta);
    c.n_tests = j.value("n_tests", c.n_tests);
    c.alpha = j.value("alpha", c.alpha);
    c.ci_level = j.value("ci_level", c.ci_level);
    if (j.contains("sidedness")) {
      const auto& s = j.at("sidedness");
      c.sidedness.fpr = parse_sidedness(s.value("FPR", std::string("two")));
      c.sidedness.avg_t2 = parse_sidedness(s.value("AVG_T2", std::string("two")));
      c.sidedness.kurtosis = parse_sidedness(s.value("KURTOSIS", std::string("two")));
    }
    c.mode = parse_simulation_mode(j.value("mode", to_string(c.mode)));
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("manifest config: ") + e.what());
  }
  return c;
}

json to_json(const RunManifest& m) {
  json out = {
      {"command", m.command},
      {"artifact_version", m.artifact_version},
      {"seed", m.config.seed},
      {"config", to_json(m.config)},
  };
  if (m.command == "sweep") {
    json metrics = json::array();
    for (const auto metric : m.sweep.metrics) metrics.push_back(to_string(metric));
    out["sweep"] = {
        {"thetas", m.sweep.thetas},
        {"n_grid", m.sweep.n_grid},
        {"trials", m.sweep.trials},
        {"metrics", metrics},
        {"interpolation", to_string(m.interpolation)},
        {"target_powers", m.target_powers},
    };
    out["diagnostics"] = {
        {"degenerate_batches", m.diagnostics.degenerate_batches},
        {"not_reached", m.diagnostics.not_reached},
        {"undefined_efficiency", m.diagnostics.undefined_efficiency},
    };
  }
  out["started"] = m.started;
  out["finished"] = m.finished;
  return out;
}

RunManifest manifest_from_json(const json& doc) {
  const json& j = doc.contains("manifest") ? doc.at("manifest") : doc;
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  RunManifest m;
  try {
    m.command = j.value("command", m.command);
    if (j.contains("config")) m.config = config_from_json(j.at("config"));
    m.config.seed = j.value("seed", m.config.seed);
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      m.sweep.thetas = s.value("thetas", m.sweep.thetas);
      m.sweep.n_grid = s.value("n_grid", m.sweep.n_grid);
      m.sweep.trials = s.value("trials", m.sweep.trials);
      if (s.contains("metrics")) {
        m.sweep.metrics.clear();
        for (const auto& name : s.at("metrics")) m.sweep.metrics.push_back(parse_metric_kind(name.get<std::string>()));
      }
      m.interpolation = parse_interpolation(s.value("interpolation", to_string(m.interpolation)));
      m.target_powers = s.value("target_powers", m.target_powers);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace varq
