#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qthermo/audit.hpp"
#include "qthermo/cycles.hpp"
#include "qthermo/model_io.hpp"
#include "qthermo/search.hpp"

// JSON views of the library's reports.

namespace qthermo {

inline nlohmann::json to_json(const ThermoSample& s) {
  return {{"S", s.S},       {"U", s.U},       {"F", s.F},     {"f_d", s.f_d},     {"e_p", s.e_p},
          {"Q_ex", s.Q_ex}, {"Q_hk", s.Q_hk}, {"h_d", s.h_d}, {"dS_dt", s.dS_dt}};
}

inline nlohmann::json to_json(const EdgeTerm& t) { return {{"from", t.from}, {"to", t.to}, {"value", t.value}}; }

inline nlohmann::json to_json(const CycleReport& r) {
  return {{"cycles", r.cycles},
          {"log_ratios", r.log_ratios},
          {"max_abs_log_ratio", r.max_abs_log_ratio},
          {"balanced", r.balanced}};
}

inline nlohmann::json to_json(const TellegenResult& t) {
  nlohmann::json summands = nlohmann::json::array();
  for (const auto& s : t.summands) summands.push_back(to_json(s));
  return {{"summands", summands},
          {"total", t.total},
          {"max_abs_summand", t.max_abs_summand},
          {"total_vanishes", t.total_vanishes},
          {"circulating", t.circulating}};
}

inline nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json identities = nlohmann::json::array();
  for (const auto& c : r.identities) {
    identities.push_back({{"name", c.name},
                          {"max_residual", c.max_residual},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass},
                          {"gating", c.gating}});
  }
  nlohmann::json inequalities = nlohmann::json::array();
  for (const auto& o : r.inequalities) {
    inequalities.push_back(
        {{"name", o.name}, {"worst", o.worst}, {"holds", o.holds}, {"violations", o.violations}});
  }
  return {{"pass", r.pass},
          {"failed", r.failed_identities()},
          {"identities", identities},
          {"inequalities", inequalities},
          {"detailed_balance", r.detailed_balance},
          {"steady_state_reached", r.steady_state_reached},
          {"initial", to_json(r.initial)},
          {"final", to_json(r.final)},
          {"tellegen", to_json(r.tellegen)}};
}

inline nlohmann::json to_json(const SearchFinding& f) {
  nlohmann::json j{{"claim", std::string(claim_name(f.claim))},
                   {"trial", f.trial},
                   {"detailed_balance", f.detailed_balance},
                   {"rates", model_to_json(f.rates)["rates"]},
                   {"p", f.p.to_vector()},
                   {"q", f.q},
                   {"observed", f.observed},
                   {"margin", f.margin}};
  if (f.reference) j["reference"] = f.reference->to_vector();
  return j;
}

inline SearchFinding finding_from_json(const nlohmann::json& j) {
  SearchFinding f;
  const auto claim = parse_claim(j.at("claim").get<std::string>());
  if (!claim) throw Error(ErrorCode::kParseError, "unknown claim");
  f.claim = *claim;
  f.trial = j.at("trial").get<std::size_t>();
  f.detailed_balance = j.at("detailed_balance").get<bool>();
  const auto rows = j.at("rates").get<std::vector<std::vector<double>>>();
  f.rates = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      f.rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  f.p = Distribution::from(j.at("p").get<std::vector<double>>());
  if (j.contains("reference")) f.reference = Distribution::from(j.at("reference").get<std::vector<double>>());
  f.q = j.at("q").get<double>();
  f.observed = j.at("observed").get<double>();
  f.margin = j.at("margin").get<double>();
  return f;
}

}  // namespace qthermo
