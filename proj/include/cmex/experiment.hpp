#pragma once

// Experiment runner behind the CLI: builds the model, runs one density
// propagator or sampler ensemble, writes the dump/marginal/report files,
// and compares prior output directories.
//
// report.json is bit-for-bit reproducible from (config, seed): wall-clock
// timing never enters any output file.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmex/io.hpp"
#include "cmex/metrics.hpp"
#include "cmex/model.hpp"
#include "cmex/model_io.hpp"
#include "cmex/probability.hpp"
#include "cmex/propagator.hpp"
#include "cmex/samplers.hpp"
#include "cmex/statespace.hpp"

namespace cmex {

enum class Method {
  exact,
  frozen_sum,
  lie_product,
  strang,
  column_split,
  reaction_product,
  ssa,
  tau_leap,
  accelerated,
  accelerated_split,
  symmetric,
};

inline bool is_sampler(Method m) {
  switch (m) {
    case Method::ssa:
    case Method::tau_leap:
    case Method::accelerated:
    case Method::accelerated_split:
    case Method::symmetric: return true;
    default: return false;
  }
}

inline bool needs_tau(Method m) {
  return m != Method::exact && m != Method::frozen_sum && m != Method::ssa;
}

inline const char* method_label(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::frozen_sum: return "frozen-sum";
    case Method::lie_product: return "lie-product";
    case Method::strang: return "strang";
    case Method::column_split: return "column-split";
    case Method::reaction_product: return "reaction-product";
    case Method::ssa: return "ssa";
    case Method::tau_leap: return "tau-leap";
    case Method::accelerated: return "accelerated";
    case Method::accelerated_split: return "accelerated-split";
    case Method::symmetric: return "symmetric";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  for (Method m : {Method::exact, Method::frozen_sum, Method::lie_product, Method::strang,
                   Method::column_split, Method::reaction_product, Method::ssa, Method::tau_leap,
                   Method::accelerated, Method::accelerated_split, Method::symmetric})
    if (name == method_label(m)) return m;
  throw std::invalid_argument("unknown method '" + name + "'");
}

struct ExperimentConfig {
  std::string model_source = "isomer";  // builtin name or model-file path
  Method method = Method::exact;
  double tau = 0.0;
  std::optional<double> horizon;  // default: the model file/builtin horizon
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  bool refreeze = false;       // lie-product freeze point follows the density mode
  bool paper_strang = false;   // printed Eq. weights (tau/2 on the diagonal factor)
  unsigned threads = 0;        // 0: CMEX_THREADS env or hardware default
};

struct SpeciesSummary {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;
  bool bimodal = false;
  std::vector<std::size_t> modes;
  std::vector<double> marginal;
};

struct ComparisonReport {
  std::string method;
  std::string model_label;
  double tau = 0.0;
  double horizon = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double mass = 1.0;  // pre-normalization density mass; 1 for ensembles
  double clamped_mass = 0.0;  // rounding debris removed by the propagators
  std::vector<SpeciesSummary> species;
  EnsembleDiagnostics diagnostics;
  double runtime_seconds = 0.0;  // in-memory only; never serialized
};

inline ParsedSystem load_system(const std::string& source) {
  if (source == "isomer") {
    BuiltinSystem b = builtin_isomer();
    return ParsedSystem{std::move(b.model), std::move(b.init), b.horizon};
  }
  if (source == "schlogl") {
    BuiltinSystem b = builtin_schlogl();
    return ParsedSystem{std::move(b.model), std::move(b.init), b.horizon};
  }
  std::ifstream in(source);
  if (!in) throw std::runtime_error("cannot open model file '" + source + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str());
}

inline nlohmann::ordered_json report_to_json(const ComparisonReport& rep) {
  nlohmann::ordered_json j;
  j["method"] = rep.method;
  j["model"] = rep.model_label;
  j["tau"] = rep.tau;
  j["T"] = rep.horizon;
  j["samples"] = rep.samples;
  j["seed"] = rep.seed;
  j["mass"] = rep.mass;
  j["species"] = nlohmann::ordered_json::array();
  for (const auto& s : rep.species) {
    nlohmann::ordered_json js;
    js["name"] = s.name;
    js["mean"] = s.mean;
    js["variance"] = s.variance;
    js["bimodal"] = s.bimodal;
    js["modes"] = s.modes;
    j["species"].push_back(js);
  }
  j["diagnostics"] = {{"negative_clamps", rep.diagnostics.negative_clamps},
                      {"cap_clips", rep.diagnostics.cap_clips},
                      {"clamped_mass", rep.clamped_mass}};
  return j;
}

inline ComparisonReport report_from_json(const nlohmann::json& j) {
  ComparisonReport rep;
  rep.method = j.at("method").get<std::string>();
  rep.model_label = j.at("model").get<std::string>();
  rep.tau = j.at("tau").get<double>();
  rep.horizon = j.at("T").get<double>();
  rep.samples = j.at("samples").get<std::uint64_t>();
  rep.seed = j.at("seed").get<std::uint64_t>();
  rep.mass = j.at("mass").get<double>();
  for (const auto& js : j.at("species")) {
    SpeciesSummary s;
    s.name = js.at("name").get<std::string>();
    s.mean = js.at("mean").get<double>();
    s.variance = js.at("variance").get<double>();
    s.bimodal = js.at("bimodal").get<bool>();
    s.modes = js.at("modes").get<std::vector<std::size_t>>();
    rep.species.push_back(std::move(s));
  }
  rep.diagnostics.negative_clamps = j.at("diagnostics").at("negative_clamps").get<std::uint64_t>();
  rep.diagnostics.cap_clips = j.at("diagnostics").at("cap_clips").get<std::uint64_t>();
  rep.clamped_mass = j.at("diagnostics").at("clamped_mass").get<double>();
  return rep;
}

/// Run one configured experiment, writing density/ensemble dumps, one
/// marginal CSV per species, and report.json into config.out_dir.
inline ComparisonReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ParsedSystem sys = load_system(config.model_source);
  const StateSpace space(sys.model.caps());
  const double horizon = config.horizon.value_or(sys.horizon);
  if (!(horizon > 0.0)) throw std::invalid_argument("experiment: need a positive horizon");
  if (needs_tau(config.method) && !(config.tau > 0.0))
    throw std::invalid_argument("experiment: this method needs --tau > 0");
  if (is_sampler(config.method) && config.samples == 0)
    throw std::invalid_argument("experiment: samplers need --samples > 0");

  ComparisonReport rep;
  rep.method = method_label(config.method);
  rep.model_label = config.model_source;
  rep.tau = needs_tau(config.method) ? config.tau : 0.0;
  rep.horizon = horizon;
  rep.samples = is_sampler(config.method) ? config.samples : 0;
  rep.seed = is_sampler(config.method) ? config.seed : 0;

  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

  auto finish_species = [&](auto&& marginal_of) {
    for (int i = 0; i < sys.model.num_species(); ++i) {
      SpeciesSummary s;
      s.name = sys.model.species_names()[static_cast<std::size_t>(i)];
      s.marginal = marginal_of(i);
      const Moments mom = moments(s.marginal);
      s.mean = mom.mean;
      s.variance = mom.variance;
      const BimodalityReport bi = detect_bimodality(s.marginal);
      s.bimodal = bi.bimodal;
      s.modes = bi.modes;
      rep.species.push_back(std::move(s));
    }
  };

  if (is_sampler(config.method)) {
    SampleMethod sm;
    switch (config.method) {
      case Method::ssa: sm = SampleMethod::ssa; break;
      case Method::tau_leap: sm = SampleMethod::tau_leap; break;
      case Method::accelerated: sm = SampleMethod::accelerated; break;
      case Method::accelerated_split: sm = SampleMethod::accelerated_split; break;
      default: sm = SampleMethod::symmetric; break;
    }
    const EnsembleResult ens = run_ensemble(sm, sys.model, sys.init.state, horizon, config.tau,
                                            config.samples, config.seed, config.threads);
    rep.diagnostics = ens.diagnostics;
    finish_species([&](int i) { return marginal(ens, i); });
    if (!config.out_dir.empty()) write_ensemble(config.out_dir / "ensemble.txt", ens, rep.model_label);
  } else {
    ProbabilityVector density;
    switch (config.method) {
      case Method::exact:
        density = exact_solution(sys.model, space, sys.init.state, horizon);
        break;
      case Method::frozen_sum:
        density = frozen_sum_solution(sys.model, space, sys.init.state, horizon);
        break;
      case Method::lie_product:
        density = lie_product_solution(sys.model, space, sys.init.state,
                                       StepPlan::from_horizon(horizon, config.tau), config.refreeze);
        break;
      case Method::strang:
        density = strang_solution(sys.model, space, sys.init.state,
                                  StepPlan::from_horizon(horizon, config.tau), config.paper_strang);
        break;
      case Method::column_split:
        density = column_split_solution(sys.model, space, sys.init.state,
                                        StepPlan::from_horizon(horizon, config.tau));
        break;
      default:
        density = reaction_product_solution(sys.model, space, sys.init.state,
                                            StepPlan::from_horizon(horizon, config.tau));
        break;
    }
    rep.mass = density.mass();
    rep.clamped_mass = density.clamped_mass();
    finish_species([&](int i) { return marginal(density, space, i); });
    if (!config.out_dir.empty()) write_density(config.out_dir / "density.txt", space, density);
  }

  if (!config.out_dir.empty()) {
    {
      auto out = detail::open_output(config.out_dir / "model.txt");
      out << serialize_model(sys.model, sys.init, sys.horizon);
    }
    for (const auto& s : rep.species)
      write_marginal_csv(config.out_dir / ("marginal_" + s.name + ".csv"), s.marginal);
    auto out = detail::open_output(config.out_dir / "report.json");
    out << report_to_json(rep).dump(2) << '\n';
  }
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Rebuild a report from a previously written output directory.
inline ComparisonReport report_from_dir(const std::filesystem::path& dir) {
  std::ifstream in(dir / "report.json");
  if (!in) throw std::runtime_error("missing report.json in " + dir.string());
  nlohmann::json j;
  in >> j;
  ComparisonReport rep = report_from_json(j);
  for (auto& s : rep.species) s.marginal = read_marginal_csv(dir / ("marginal_" + s.name + ".csv"));
  return rep;
}

struct SpeciesDelta {
  std::string name;
  double tv = 0.0;
  double l1 = 0.0;
  double mean_delta = 0.0;
  double variance_delta = 0.0;
};

struct CompareReport {
  std::vector<SpeciesDelta> species;
  double joint_tv = std::numeric_limits<double>::quiet_NaN();  // densities only
};

/// TV/L1/moment deltas between two prior reports (any mix of density and
/// ensemble outputs), species matched by name.
inline CompareReport compare(const ComparisonReport& a, const ComparisonReport& b) {
  if (a.species.size() != b.species.size())
    throw std::invalid_argument("compare: species counts differ");
  CompareReport out;
  for (std::size_t i = 0; i < a.species.size(); ++i) {
    const auto& sa = a.species[i];
    const auto& sb = b.species[i];
    if (sa.name != sb.name) throw std::invalid_argument("compare: species names differ");
    SpeciesDelta d;
    d.name = sa.name;
    d.tv = tv_distance(sa.marginal, sb.marginal);
    d.l1 = l1_distance(sa.marginal, sb.marginal);
    d.mean_delta = sb.mean - sa.mean;
    d.variance_delta = sb.variance - sa.variance;
    out.species.push_back(std::move(d));
  }
  return out;
}

inline CompareReport compare_dirs(const std::filesystem::path& dir_a,
                                  const std::filesystem::path& dir_b) {
  CompareReport out = compare(report_from_dir(dir_a), report_from_dir(dir_b));
  const auto da = dir_a / "density.txt";
  const auto db = dir_b / "density.txt";
  if (std::filesystem::exists(da) && std::filesystem::exists(db))
    out.joint_tv = tv_distance(read_density(da).values, read_density(db).values);
  return out;
}

inline nlohmann::ordered_json compare_to_json(const CompareReport& rep) {
  nlohmann::ordered_json j;
  j["species"] = nlohmann::ordered_json::array();
  for (const auto& d : rep.species) {
    nlohmann::ordered_json js;
    js["name"] = d.name;
    js["tv"] = d.tv;
    js["l1"] = d.l1;
    js["mean_delta"] = d.mean_delta;
    js["variance_delta"] = d.variance_delta;
    j["species"].push_back(js);
  }
  if (!std::isnan(rep.joint_tv)) j["joint_tv"] = rep.joint_tv;
  return j;
}

}  // namespace cmex
