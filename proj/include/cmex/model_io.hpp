#pragma once

// Declarative model file format (UTF-8 text, one statement per line):
//
//   # comment
//   species <name> cap <int>
//   init <name> <int>
//   horizon <float>
//   reaction <rate> : <side> -> <side>
//
// A side is empty or `+`-separated terms `<m>*<name>` (bare `<name>` means
// m = 1). The stoichiometry column is rhs - lhs per species; the propensity
// orders are the lhs multiplicities, i.e. a(x) = rate * prod C(x_i, m_i).
// serialize_model/parse_model round-trip bit-exactly.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cmex/model.hpp"

namespace cmex {

struct ParsedSystem {
  ReactionModel model;
  InitialCondition init;
  double horizon = 0.0;
};

class ModelParseError : public std::runtime_error {
 public:
  ModelParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline double parse_number(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ModelParseError(line, std::string("malformed ") + what + " '" + tok + "'");
  }
}

inline long parse_int(const std::string& tok, int line, const char* what) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ModelParseError(line, std::string("malformed ") + what + " '" + tok + "'");
  return v;
}

// side of a reaction: per-species multiplicities
inline std::map<int, int> parse_side(std::string_view side, const std::map<std::string, int>& species,
                                     int line) {
  std::map<int, int> counts;
  side = trim(side);
  if (side.empty()) return counts;
  std::size_t pos = 0;
  while (pos <= side.size()) {
    const std::size_t plus = side.find('+', pos);
    std::string_view term = trim(side.substr(pos, plus == std::string_view::npos ? plus : plus - pos));
    if (term.empty()) throw ModelParseError(line, "empty term in reaction side");
    int mult = 1;
    std::string_view name = term;
    if (const std::size_t star = term.find('*'); star != std::string_view::npos) {
      mult = static_cast<int>(parse_int(std::string(trim(term.substr(0, star))), line, "multiplicity"));
      name = trim(term.substr(star + 1));
    }
    if (mult < 1) throw ModelParseError(line, "multiplicity must be >= 1");
    const auto it = species.find(std::string(name));
    if (it == species.end())
      throw ModelParseError(line, "unknown species '" + std::string(name) + "'");
    counts[it->second] += mult;
    if (plus == std::string_view::npos) break;
    pos = plus + 1;
  }
  return counts;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline ParsedSystem parse_model(const std::string& text) {
  std::vector<std::string> names;
  std::vector<int> caps;
  std::map<std::string, int> species;
  std::map<int, std::pair<int, int>> init_counts;  // species -> (count, line)
  std::vector<std::vector<int>> stoich;
  std::vector<PropensitySpec> propensities;
  double horizon = -1.0;

  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string_view sv = detail::trim(raw);
    if (sv.empty() || sv.front() == '#') continue;

    if (sv.starts_with("species ")) {
      const auto toks = detail::split_ws(sv);
      if (toks.size() != 4 || toks[2] != "cap")
        throw ModelParseError(line, "expected 'species <name> cap <int>'");
      if (species.count(toks[1])) throw ModelParseError(line, "duplicate species '" + toks[1] + "'");
      const long cap = detail::parse_int(toks[3], line, "cap");
      if (cap < 0) throw ModelParseError(line, "negative cap");
      species[toks[1]] = static_cast<int>(names.size());
      names.push_back(toks[1]);
      caps.push_back(static_cast<int>(cap));
    } else if (sv.starts_with("init ")) {
      const auto toks = detail::split_ws(sv);
      if (toks.size() != 3) throw ModelParseError(line, "expected 'init <name> <int>'");
      const auto it = species.find(toks[1]);
      if (it == species.end()) throw ModelParseError(line, "unknown species '" + toks[1] + "'");
      const long count = detail::parse_int(toks[2], line, "count");
      if (count < 0) throw ModelParseError(line, "negative initial count");
      init_counts[it->second] = {static_cast<int>(count), line};
    } else if (sv.starts_with("horizon ")) {
      const auto toks = detail::split_ws(sv);
      if (toks.size() != 2) throw ModelParseError(line, "expected 'horizon <float>'");
      horizon = detail::parse_number(toks[1], line, "horizon");
      if (!(horizon >= 0.0)) throw ModelParseError(line, "negative horizon");
    } else if (sv.starts_with("reaction ")) {
      const std::size_t colon = sv.find(':');
      if (colon == std::string_view::npos) throw ModelParseError(line, "missing ':' in reaction");
      const auto head = detail::split_ws(sv.substr(0, colon));
      if (head.size() != 2) throw ModelParseError(line, "expected 'reaction <rate> : ...'");
      const double rate = detail::parse_number(head[1], line, "rate");
      if (rate < 0.0) throw ModelParseError(line, "negative rate");
      const std::string_view body = sv.substr(colon + 1);
      const std::size_t arrow = body.find("->");
      if (arrow == std::string_view::npos) throw ModelParseError(line, "missing '->' in reaction");
      const auto lhs = detail::parse_side(body.substr(0, arrow), species, line);
      const auto rhs = detail::parse_side(body.substr(arrow + 2), species, line);

      std::vector<int> column(names.size(), 0);
      for (const auto& [sp, m] : rhs) column[static_cast<std::size_t>(sp)] += m;
      for (const auto& [sp, m] : lhs) column[static_cast<std::size_t>(sp)] -= m;
      bool nonzero = false;
      for (int v : column) nonzero = nonzero || v != 0;
      if (!nonzero) throw ModelParseError(line, "reaction has no net state change");

      PropensitySpec spec;
      spec.rate = rate;
      for (const auto& [sp, m] : lhs) spec.orders.push_back({sp, m});
      stoich.push_back(std::move(column));
      propensities.push_back(std::move(spec));
    } else {
      throw ModelParseError(line, "unrecognized statement '" + std::string(sv) + "'");
    }
  }

  if (names.empty()) throw ModelParseError(line, "no species declared");
  if (stoich.empty()) throw ModelParseError(line, "no reactions declared");
  if (horizon < 0.0) throw ModelParseError(line, "missing horizon");
  // species declared after a reaction would leave short columns
  for (auto& col : stoich) col.resize(names.size(), 0);

  State init(names.size(), 0);
  for (const auto& [sp, entry] : init_counts) {
    if (entry.first > caps[static_cast<std::size_t>(sp)])
      throw ModelParseError(entry.second, "initial count of '" +
                                              names[static_cast<std::size_t>(sp)] +
                                              "' exceeds its cap");
    init[static_cast<std::size_t>(sp)] = entry.first;
  }

  return ParsedSystem{ReactionModel(names, caps, stoich, propensities),
                      InitialCondition{std::move(init), 0.0}, horizon};
}

inline std::string serialize_model(const ReactionModel& model, const InitialCondition& init,
                                   double horizon) {
  std::ostringstream os;
  for (int i = 0; i < model.num_species(); ++i)
    os << "species " << model.species_names()[static_cast<std::size_t>(i)] << " cap "
       << model.caps()[static_cast<std::size_t>(i)] << '\n';
  for (int i = 0; i < model.num_species(); ++i)
    os << "init " << model.species_names()[static_cast<std::size_t>(i)] << ' '
       << init.state[static_cast<std::size_t>(i)] << '\n';
  os << "horizon " << detail::format_number(horizon) << '\n';
  for (int r = 0; r < model.num_reactions(); ++r) {
    const auto& spec = model.propensity_spec(r);
    const auto& col = model.stoich_column(r);
    std::vector<int> lhs(static_cast<std::size_t>(model.num_species()), 0);
    for (const auto& term : spec.orders) lhs[static_cast<std::size_t>(term.species)] += term.multiplicity;
    std::vector<int> rhs(lhs);
    for (int i = 0; i < model.num_species(); ++i) {
      rhs[static_cast<std::size_t>(i)] += col[static_cast<std::size_t>(i)];
      if (rhs[static_cast<std::size_t>(i)] < 0)
        throw std::invalid_argument(
            "serialize: reaction consumes a species not listed in its propensity orders");
    }

    auto side = [&](const std::vector<int>& counts) {
      std::string s;
      for (int i = 0; i < model.num_species(); ++i) {
        const int m = counts[static_cast<std::size_t>(i)];
        if (m == 0) continue;
        if (!s.empty()) s += " + ";
        if (m != 1) s += std::to_string(m) + "*";
        s += model.species_names()[static_cast<std::size_t>(i)];
      }
      return s;
    };
    os << "reaction " << detail::format_number(spec.rate) << " : " << side(lhs) << " -> "
       << side(rhs) << '\n';
  }
  return os.str();
}

}  // namespace cmex
