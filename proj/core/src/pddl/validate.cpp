#include "vplan/pddl/validate.hpp"

#include "vplan/pddl/error.hpp"
#include "vplan/pddl/semantics.hpp"

namespace vp::pddl {

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::valid: return "valid";
    case Verdict::precondition_failure: return "precondition-failure";
    case Verdict::goal_unsatisfied: return "goal-unsatisfied";
    case Verdict::unknown_action: return "unknown-action";
    case Verdict::arity_type_error: return "arity/type-error";
  }
  return "unknown";
}

std::string ValidationReport::to_text() const {
  std::string out = "verdict: ";
  out += to_string(verdict);
  out += '\n';
  out += "steps_executed: " + std::to_string(trace.empty() ? 0 : trace.size() - 1) + "\n";
  if (failing_step) out += "failing_step: " + std::to_string(*failing_step) + "\n";
  if (!detail.empty()) out += "detail: " + detail + "\n";
  return out;
}

ValidationReport validate_plan(const DomainDef& domain, const ProblemDef& problem, const Plan& plan) {
  ValidationReport report;
  report.trace.push_back(problem.init);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const PlanStep& step = plan[i];
    GroundAction action;
    try {
      action = resolve(domain, problem, step);
    } catch (const PddlError& e) {
      report.verdict = e.kind() == ErrorKind::unknown_action ? Verdict::unknown_action : Verdict::arity_type_error;
      report.failing_step = i;
      report.detail = step.text() + ": " + e.what();
      return report;
    }
    const State& cur = report.trace.back();
    if (!applicable(cur, action)) {
      report.verdict = Verdict::precondition_failure;
      report.failing_step = i;
      std::string missing;
      for (const auto& a : action.pre_pos) {
        if (!cur.contains(a)) missing += " " + a.text();
      }
      for (const auto& a : action.pre_neg) {
        if (cur.contains(a)) missing += " (not " + a.text() + ")";
      }
      report.detail = step.text() + " unsatisfied:" + missing;
      return report;
    }
    report.trace.push_back(apply_unchecked(cur, action));
  }
  if (!problem.goal_satisfied(report.trace.back())) {
    report.verdict = Verdict::goal_unsatisfied;
    std::string missing;
    for (const auto& g : problem.goal_pos) {
      if (!report.trace.back().contains(g)) missing += " " + g.text();
    }
    for (const auto& g : problem.goal_neg) {
      if (report.trace.back().contains(g)) missing += " (not " + g.text() + ")";
    }
    report.detail = "unmet goals:" + missing;
  }
  return report;
}

}  // namespace vp::pddl
