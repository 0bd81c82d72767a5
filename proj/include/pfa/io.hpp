#pragma once

// Instance and outcome JSON.
//
//   instance: {"values": [..], "weights": [..], "budget": number | "inf"}
//   outcome:  {"alloc": [..], "pay": [..], "welfare": w, "revenue": r}
//
// Outcomes are written in input order. A canonical instance document has
// weights sorted non-increasing with one weight per agent; for those,
// serialize_instance(parse_instance(doc)) reproduces doc.

#include <string>
#include <string_view>

#include <json.hpp>

#include "pfa/core.hpp"

namespace pfa {

using Json = nlohmann::json;

namespace detail {

inline std::vector<double> number_array(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
  const Json& arr = doc.at(key);
  if (!arr.is_array()) throw InvalidInput(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const Json& x : arr) {
    if (!x.is_number()) throw InvalidInput(std::string("field '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline double budget_field(const Json& doc) {
  if (!doc.contains("budget")) throw InvalidInput("missing field 'budget'");
  const Json& b = doc.at("budget");
  if (b.is_string()) {
    if (b.get<std::string>() == "inf") return kInfinity;
    throw InvalidInput("budget string must be \"inf\"");
  }
  if (!b.is_number()) throw InvalidInput("budget must be a number or \"inf\"");
  return b.get<double>();
}

inline Json budget_json(double b) { return std::isinf(b) ? Json("inf") : Json(b); }

}  // namespace detail

inline BudgetedInstance instance_from_json(const Json& doc) {
  if (!doc.is_object()) throw InvalidInput("instance document must be an object");
  const auto values = detail::number_array(doc, "values");
  const auto weights = detail::number_array(doc, "weights");
  return normalize(values, weights, detail::budget_field(doc));
}

inline BudgetedInstance parse_instance(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string("malformed instance document: ") + e.what());
  }
  return instance_from_json(doc);
}

inline Json instance_to_json(const BudgetedInstance& inst) {
  return Json{{"values", input_order_values(inst)},
              {"weights", inst.env.weights},
              {"budget", detail::budget_json(inst.budget())}};
}

inline std::string serialize_instance(const BudgetedInstance& inst) { return instance_to_json(inst).dump(); }

/// `sorted` is indexed by rank; the document is in input order.
inline Json outcome_to_json(const BudgetedInstance& inst, const Outcome& sorted) {
  const Outcome out = to_input_order(inst, sorted);
  return Json{{"alloc", out.alloc},
              {"pay", out.pay},
              {"welfare", sorted.welfare(inst.values())},
              {"revenue", sorted.revenue()}};
}

inline std::string serialize_outcome(const BudgetedInstance& inst, const Outcome& sorted) {
  return outcome_to_json(inst, sorted).dump();
}

}  // namespace pfa
