#include "mirlab/eval/report.h"

#include <cstdio>

#include "json.hpp"

namespace mirlab::eval {

using nlohmann::ordered_json;

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  // Values that round to zero print without a sign.
  if (s.starts_with("-0.") && s.find_first_not_of("0.", 1) == std::string::npos) return s.substr(1);
  return s;
}

std::optional<double> mean_rho(const std::vector<ReachabilityRecord>& records, const std::string& method,
                               ReachCondition condition) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.method != method || r.condition != condition || !r.rho) continue;
    sum += *r.rho;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::string imitation_csv(const std::vector<ImitationResult>& results) {
  std::string out = "method,domain,demo_id,lift_rate,stack_rate,mean_goals_reached\n";
  for (const auto& r : results) {
    for (const auto& d : r.demos) {
      out += r.method + "," + std::string(sim::domain_name(r.domain)) + "," + std::to_string(d.demo_id) + "," +
             format_number(d.lift_rate()) + "," + format_number(d.stack_rate()) + "," +
             format_number(d.mean_goals_reached) + "\n";
    }
  }
  return out;
}

std::string reachability_csv(const std::vector<ReachabilityRecord>& records) {
  std::string out = "method,condition,domain,demo_id,rho,error\n";
  for (const auto& r : records) {
    out += r.method + "," + std::string(condition_name(r.condition)) + "," + std::string(sim::domain_name(r.domain)) +
           "," + std::to_string(r.demo_id) + "," + (r.rho ? format_number(*r.rho) : "") + "," + r.error + "\n";
  }
  return out;
}

std::string curve_csv(const ReachabilityCurve& curve) {
  std::string out = "frame,normalized_distance\n";
  for (std::size_t t = 0; t < curve.normalized.size(); ++t) {
    out += std::to_string(t) + "," + format_number(curve.normalized[t]) + "\n";
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  ordered_json root = ordered_json::object();
  ordered_json imitation = ordered_json::array();
  for (const auto& r : report.imitation) {
    ordered_json demos = ordered_json::array();
    for (const auto& d : r.demos) {
      demos.push_back({{"demo_id", d.demo_id},
                       {"attempts", d.attempts},
                       {"lifts", d.lifts},
                       {"stacks", d.stacks},
                       {"lift_rate", d.lift_rate()},
                       {"stack_rate", d.stack_rate()},
                       {"mean_goals_reached", d.mean_goals_reached},
                       {"goals_total", d.goals_total},
                       {"goals_histogram", d.goals_histogram}});
    }
    imitation.push_back({{"method", r.method},
                         {"domain", sim::domain_name(r.domain)},
                         {"attempts", r.attempts()},
                         {"lift_rate", r.lift_rate()},
                         {"stack_rate", r.stack_rate()},
                         {"demos", demos}});
  }
  root["imitation"] = imitation;

  ordered_json reach = ordered_json::object();
  for (const auto& r : report.reachability) {
    auto& entry = reach[r.method][std::string(condition_name(r.condition))];
    if (!entry.contains("rho")) entry["rho"] = ordered_json::array();
    entry["rho"].push_back(r.rho ? ordered_json(*r.rho) : ordered_json(nullptr));
  }
  for (auto& [method, conditions] : reach.items()) {
    for (auto& [name, entry] : conditions.items()) {
      const auto m = mean_rho(report.reachability, method, name == "same" ? ReachCondition::kSame : ReachCondition::kCross);
      entry["mean_rho"] = m ? ordered_json(*m) : ordered_json(nullptr);
    }
  }
  root["reachability"] = reach;
  root["alignment"] = report.alignment;
  return root.dump(2) + "\n";
}

}  // namespace mirlab::eval
