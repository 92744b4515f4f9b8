#include "fracecon/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fracecon/config.hpp"

namespace fracecon {

DerivedParams derive_constants(const ModelParams& params) {
  DerivedParams d;
  d.h = params.H - 0.5;
  d.delta_C = 1.0 - params.alpha_C * (1.0 - params.gamma_C);
  d.delta_M = 1.0 - params.alpha_M * (1.0 - params.gamma_M);
  d.theta_C = 1.0 - params.gamma_C / d.delta_C;
  d.theta_M = 1.0 - params.gamma_M / d.delta_M;
  d.beta = params.beta1 - params.beta2;
  d.beta_C = d.beta * d.theta_C;
  d.beta_M = d.beta * d.theta_M;
  d.vol_scale = std::sqrt(2.0 * params.H) * std::pow(params.epsilon, d.h);
  d.var_scale = params.H * std::pow(params.epsilon, 2.0 * d.h);
  return d;
}

std::string ValidationReport::describe() const {
  std::ostringstream os;
  for (const auto& e : errors) os << "error: " << e.field << ": " << e.message << "\n";
  for (const auto& w : warnings) os << "warning: " << w.field << ": " << w.message << "\n";
  return os.str();
}

ValidationReport validate(const ModelParams& params) {
  ValidationReport report;
  auto error = [&](const char* field, std::string msg) {
    report.errors.push_back({field, std::move(msg)});
  };
  auto warn = [&](const char* field, std::string msg) {
    report.warnings.push_back({field, std::move(msg)});
  };

  const std::pair<const char*, double> all[] = {
      {"mu_D", params.mu_D},       {"sigma_D", params.sigma_D}, {"H", params.H},
      {"epsilon", params.epsilon}, {"gamma_C", params.gamma_C}, {"gamma_M", params.gamma_M},
      {"alpha_C", params.alpha_C}, {"alpha_M", params.alpha_M}, {"rho", params.rho},
      {"k", params.k},             {"p", params.p},             {"l_C", params.l_C},
      {"l_M", params.l_M},         {"beta1", params.beta1},     {"beta2", params.beta2}};
  for (const auto& [name, value] : all) {
    if (!std::isfinite(value)) error(name, "must be finite");
  }
  if (!report.ok()) return report;

  if (!(params.sigma_D > 0)) error("sigma_D", "sigma_D must be positive");
  if (!(params.H > 0 && params.H < 1)) error("H", "H must lie in (0,1)");
  if (!(params.epsilon > 0)) error("epsilon", "epsilon must be positive");
  if (!(params.gamma_C > 1)) error("gamma_C", "gamma_C must exceed 1");
  if (!(params.gamma_M > 1)) error("gamma_M", "gamma_M must exceed 1");
  if (params.gamma_M < params.gamma_C)
    error("gamma_M", "gamma_M must be at least gamma_C (controlling shareholder is less risk averse)");
  if (!(params.alpha_C > 0 && params.alpha_C <= 1)) error("alpha_C", "alpha_C must lie in (0,1]");
  if (!(params.alpha_M > 0 && params.alpha_M <= 1)) error("alpha_M", "alpha_M must lie in (0,1]");
  if (!(params.rho > 0)) error("rho", "rho must be positive");
  if (!(params.k > 0)) error("k", "k must be positive");
  if (!(params.p >= 0 && params.p <= 1)) error("p", "p must lie in [0,1]");
  if (params.l_C < 0) error("l_C", "l_C must be nonnegative");
  if (params.l_M < 0) error("l_M", "l_M must be nonnegative");
  if (!(params.l_C + params.l_M < 1)) error("l_C", "l_C + l_M must be below 1");
  if (params.beta1 < 0) error("beta1", "beta1 must be nonnegative");
  if (params.beta2 < 0) error("beta2", "beta2 must be nonnegative");
  if (params.beta2 > params.beta1) error("beta2", "beta2 must not exceed beta1");

  if (params.epsilon > 0 && !(params.epsilon > 0.01 && params.epsilon < 1))
    warn("epsilon", "epsilon outside the recommended interval (0.01, 1)");
  return report;
}

AdjustmentFns AdjustmentFns::exponential(double beta) {
  AdjustmentFns f;
  f.beta_ = beta;
  return f;
}

AdjustmentFns AdjustmentFns::exponential(const ModelParams& params) {
  return exponential(params.beta1 - params.beta2);
}

AdjustmentFns AdjustmentFns::general(Evaluator eval) {
  if (!eval) throw std::invalid_argument("adjustment evaluator is empty");
  AdjustmentFns f;
  f.custom_ = std::move(eval);
  return f;
}

VarphiValue AdjustmentFns::operator()(double Lambda) const {
  if (!std::isfinite(Lambda)) throw std::invalid_argument("adjustment_eval: non-finite Lambda");
  if (custom_) return custom_(Lambda);
  return {std::exp(beta_ * Lambda), beta_, beta_ * beta_};
}

VarphiValue adjustment_eval(const AdjustmentFns& fns, double Lambda) { return fns(Lambda); }

ModelParams params_from_entries(const std::map<std::string, std::string>& entries,
                                ModelParams base,
                                std::map<std::string, std::string>* rest) {
  const std::map<std::string, double ModelParams::*> fields = {
      {"mu_D", &ModelParams::mu_D},       {"sigma_D", &ModelParams::sigma_D},
      {"H", &ModelParams::H},             {"epsilon", &ModelParams::epsilon},
      {"gamma_C", &ModelParams::gamma_C}, {"gamma_M", &ModelParams::gamma_M},
      {"alpha_C", &ModelParams::alpha_C}, {"alpha_M", &ModelParams::alpha_M},
      {"rho", &ModelParams::rho},         {"k", &ModelParams::k},
      {"p", &ModelParams::p},             {"l_C", &ModelParams::l_C},
      {"l_M", &ModelParams::l_M},         {"beta1", &ModelParams::beta1},
      {"beta2", &ModelParams::beta2}};
  for (const auto& [key, value] : entries) {
    auto it = fields.find(key);
    if (it == fields.end()) {
      if (rest) (*rest)[key] = value;
      continue;
    }
    base.*(it->second) = parse_real(value, key);
  }
  return base;
}

}  // namespace fracecon
