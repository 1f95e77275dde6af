#pragma once

#include <string>
#include <variant>
#include <vector>

namespace vvsgd {

// Online setting: eta_t = eta_bar (t+t0)^(-theta1), lambda_t = lambda_bar (t+t0)^(-theta2).
struct OnlineSchedule {
  double theta1 = 2.0 / 3.0;
  double theta2 = 1.0 / 3.0;
  double eta_bar = 1.0;
  double lambda_bar = 1.0;
  double t0 = 1.0;
};

// Finite-horizon setting: eta_t = eta1 T^(-theta3), lambda_t = lambda1 T^(-theta4),
// constant over t = 1..T.
struct FiniteHorizonSchedule {
  double theta3 = 2.0 / 3.0;
  double theta4 = 1.0 / 3.0;
  double eta1 = 0.5;
  double lambda1 = 1.0;
  long horizon = 2;
};

using Schedule = std::variant<OnlineSchedule, FiniteHorizonSchedule>;

struct StepParams {
  double eta;
  double lambda;
};

bool is_online(const Schedule& s);
StepParams step_params(const Schedule& s, long t);

// Constant values of the finite-horizon setting (eta_bar = eta1 T^-theta3 etc).
StepParams finite_constants(const FiniteHorizonSchedule& s);

enum class Target { prediction, estimation };
enum class Setting { online, finite };

// Exponent choices of the convergence theorems. The high-probability variants
// differ from the expectation ones only for online estimation with small r.
double preset_theta1(double r, double s, Target target, bool highprob);
double preset_theta3(double r, double s, Target target, bool highprob);
double preset_theta4(double r, double s, Target target, bool highprob);

// Decay exponent of the corresponding error bound (positive number theta in
// error ~ T^-theta), and whether the bound carries a log(T) factor.
double theorem_rate(double r, double s, Target target, Setting setting, bool highprob);
bool theorem_has_log(double r, double s, Target target, Setting setting, bool highprob);

// Fills the free constants so that every checkable hypothesis holds:
// eta_bar = 1, lambda_bar covers all product conditions with 5% margin, t0 is
// the smallest integer with (t0+1)^theta1 >= eta_bar (kappa^2 + lambda_bar)
// and t0 >= exp(1/theta1). Finite horizon: lambda1 = 1, eta1 = 1/(kappa^2+lambda1).
Schedule theorem_presets(double r, double s, Target target, Setting setting,
                         double kappa_sq = 1.0, long horizon = 0,
                         bool highprob = false);

struct Violation {
  std::string name;
  double margin;  // positive margin means satisfied, reported only for violations
};

struct ScheduleAudit {
  std::vector<Violation> violations;
  std::vector<std::string> unchecked;
  bool ok() const { return violations.empty(); }
};

ScheduleAudit validate(const Schedule& s, double kappa_sq, double r);

}  // namespace vvsgd
