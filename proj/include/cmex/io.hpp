#pragma once

// Stable on-disk formats:
//  - density dump:   one line per state, "index x1 .. xN probability",
//                    full-precision decimal, all Q states present
//  - ensemble dump:  "key value" header block (method, model, tau, T, n,
//                    seed, caps), blank line, then "state-index count" pairs
//  - marginal CSV:   header "value,probability", one row per count

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmex/probability.hpp"
#include "cmex/samplers.hpp"
#include "cmex/statespace.hpp"

namespace cmex {

namespace detail {

inline std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace detail

inline void write_density(const std::filesystem::path& path, const StateSpace& space,
                          const ProbabilityVector& p) {
  auto out = detail::open_output(path);
  State x(static_cast<std::size_t>(space.dims()));
  for (std::int64_t idx = 1; idx <= space.size(); ++idx) {
    space.state_into(idx, x);
    out << idx;
    for (int c : x) out << ' ' << c;
    out << ' ' << detail::full_precision(p[idx - 1]) << '\n';
  }
}

struct DensityFile {
  std::vector<int> caps;
  std::vector<double> values;  // indexed 0..Q-1
};

inline DensityFile read_density(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  DensityFile out;
  std::vector<std::vector<int>> states;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::int64_t idx = 0;
    if (!(is >> idx)) throw std::runtime_error("density file: malformed line '" + line + "'");
    std::vector<double> cells;
    double v = 0.0;
    while (is >> v) cells.push_back(v);
    if (cells.empty()) throw std::runtime_error("density file: missing probability");
    std::vector<int> x(cells.size() - 1);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) x[i] = static_cast<int>(cells[i]);
    if (static_cast<std::int64_t>(out.values.size()) < idx) out.values.resize(static_cast<std::size_t>(idx), 0.0);
    out.values[static_cast<std::size_t>(idx - 1)] = cells.back();
    states.push_back(std::move(x));
  }
  if (states.empty()) throw std::runtime_error("density file: empty");
  out.caps.assign(states.front().size(), 0);
  for (const auto& x : states)
    for (std::size_t i = 0; i < x.size(); ++i) out.caps[i] = std::max(out.caps[i], x[i]);
  return out;
}

inline void write_ensemble(const std::filesystem::path& path, const EnsembleResult& ens,
                           const std::string& model_label) {
  auto out = detail::open_output(path);
  out << "method " << ens.method << '\n';
  out << "model " << model_label << '\n';
  out << "tau " << detail::full_precision(ens.tau) << '\n';
  out << "T " << detail::full_precision(ens.horizon) << '\n';
  out << "n " << ens.n_samples << '\n';
  out << "seed " << ens.master_seed << '\n';
  out << "caps";
  for (int c : ens.caps) out << ' ' << c;
  out << '\n' << '\n';
  for (const auto& [idx, count] : ens.histogram) out << idx << ' ' << count << '\n';
}

inline EnsembleResult read_ensemble(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  EnsembleResult out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "method") is >> out.method;
    else if (key == "model") { /* label only, not needed to decode */ }
    else if (key == "tau") is >> out.tau;
    else if (key == "T") is >> out.horizon;
    else if (key == "n") is >> out.n_samples;
    else if (key == "seed") is >> out.master_seed;
    else if (key == "caps") {
      int c = 0;
      while (is >> c) out.caps.push_back(c);
    } else {
      throw std::runtime_error("ensemble file: unknown header '" + key + "'");
    }
  }
  std::uint64_t total = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::int64_t idx = 0;
    std::uint64_t count = 0;
    if (!(is >> idx >> count)) throw std::runtime_error("ensemble file: malformed pair '" + line + "'");
    out.histogram[idx] += count;
    total += count;
  }
  if (out.caps.empty()) throw std::runtime_error("ensemble file: missing caps header");
  if (total != out.n_samples) throw std::runtime_error("ensemble file: counts do not sum to n");
  return out;
}

inline void write_marginal_csv(const std::filesystem::path& path, const std::vector<double>& dist) {
  auto out = detail::open_output(path);
  out << "value,probability\n";
  for (std::size_t k = 0; k < dist.size(); ++k)
    out << k << ',' << detail::full_precision(dist[k]) << '\n';
}

inline std::vector<double> read_marginal_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "value,probability")
    throw std::runtime_error("marginal csv: missing header in " + path.string());
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("marginal csv: malformed row '" + line + "'");
    const std::size_t value = std::stoul(line.substr(0, comma));
    if (out.size() < value + 1) out.resize(value + 1, 0.0);
    out[value] = std::stod(line.substr(comma + 1));
  }
  if (out.empty()) throw std::runtime_error("marginal csv: empty " + path.string());
  return out;
}

}  // namespace cmex
