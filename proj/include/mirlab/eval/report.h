#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirlab/eval/imitation.h"
#include "mirlab/eval/metrics.h"

namespace mirlab::eval {

struct ReachabilityRecord {
  std::string method;
  ReachCondition condition = ReachCondition::kCross;
  sim::DomainKind domain = sim::DomainKind::kInvisibleArm;
  int demo_id = 0;
  std::optional<double> rho;
  std::string error;
};

// Mean rho over the records of one method and condition that have a value;
// nullopt when none do.
std::optional<double> mean_rho(const std::vector<ReachabilityRecord>& records, const std::string& method,
                               ReachCondition condition);

struct EvalReport {
  std::vector<ImitationResult> imitation;        // in method order, then domain order
  std::vector<ReachabilityRecord> reachability;
  std::map<std::string, double> alignment;      // method -> accuracy
};

// method,domain,demo_id,lift_rate,stack_rate,mean_goals_reached
std::string imitation_csv(const std::vector<ImitationResult>& results);
// method,condition,domain,demo_id,rho (empty rho with the error in the last column)
std::string reachability_csv(const std::vector<ReachabilityRecord>& records);
// frame,normalized_distance
std::string curve_csv(const ReachabilityCurve& curve);
// Per-demo attempts, rates and goal histograms, per-method aggregates,
// rho lists per condition with their means, and alignment accuracy.
std::string report_json(const EvalReport& report);

// Fixed-point formatting shared by every CSV writer.
std::string format_number(double v, int digits = 6);

}  // namespace mirlab::eval
