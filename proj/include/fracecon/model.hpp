#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fracecon {

/// Exogenous constants of the economy. Defaults are the base numerical
/// setting (mu_D = 0.015, sigma_D = 0.13, gamma = (3, 3.5), k = 3, ...).
struct ModelParams {
  double mu_D = 0.015;     // output mean-growth rate
  double sigma_D = 0.13;   // output volatility
  double H = 0.65;         // Hurst index
  double epsilon = 0.1;    // kernel shift of the approximate fBm
  double gamma_C = 3.0;    // risk aversion, controlling shareholder
  double gamma_M = 3.5;    // risk aversion, minority shareholder
  double alpha_C = 0.5;    // past-information trade-off
  double alpha_M = 0.75;
  double rho = 0.05;       // time preference
  double k = 3.0;          // diversion cost magnitude
  double p = 0.6;          // investor protection
  double l_C = 0.1;        // labor-income shares
  double l_M = 0.5;
  double beta1 = 0.1;      // psi(L) = exp(beta1 L)
  double beta2 = 0.0;      // phi(L) = exp(beta2 L)

  double net_output_share() const { return 1.0 - l_C - l_M; }
};

/// Composite constants that every equilibrium formula consumes.
struct DerivedParams {
  double h = 0.0;        // H - 1/2
  double delta_C = 1.0;  // 1 - alpha (1 - gamma)
  double delta_M = 1.0;
  double theta_C = 0.0;  // 1 - gamma / delta
  double theta_M = 0.0;
  double beta = 0.0;     // beta1 - beta2
  double beta_C = 0.0;   // beta * theta_C
  double beta_M = 0.0;

  // Frequently used scale factors of the approximate fBm.
  double vol_scale = 1.0;   // sqrt(2H) eps^h
  double var_scale = 1.0;   // H eps^{2h}
};

DerivedParams derive_constants(const ModelParams& params);

struct Finding {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool ok() const { return errors.empty(); }
  std::string describe() const;
};

/// Hard errors where the model is undefined; warnings where values leave
/// the recommended range. Never throws.
ValidationReport validate(const ModelParams& params);

/// varphi = phi/psi evaluated at one memory level together with its
/// logarithmic derivative ratios varphi'/varphi and varphi''/varphi.
struct VarphiValue {
  double value = 1.0;
  double ratio1 = 0.0;
  double ratio2 = 0.0;
};

/// Adjustment-function family. The exponential family uses
/// varphi(L) = exp(beta L); a general family is a user callback returning the
/// three scalars directly.
class AdjustmentFns {
 public:
  using Evaluator = std::function<VarphiValue(double)>;

  static AdjustmentFns exponential(double beta);
  static AdjustmentFns exponential(const ModelParams& params);
  static AdjustmentFns general(Evaluator eval);

  bool is_exponential() const { return !custom_; }
  double beta() const { return beta_; }

  /// Throws std::invalid_argument on non-finite Lambda.
  VarphiValue operator()(double Lambda) const;

 private:
  double beta_ = 0.0;
  Evaluator custom_;
};

VarphiValue adjustment_eval(const AdjustmentFns& fns, double Lambda);

/// Overlays `key = value` entries onto params. Keys that are not ModelParams
/// fields are returned untouched in `rest`. Malformed numbers throw
/// std::invalid_argument.
ModelParams params_from_entries(const std::map<std::string, std::string>& entries,
                                ModelParams base = {},
                                std::map<std::string, std::string>* rest = nullptr);

}  // namespace fracecon
