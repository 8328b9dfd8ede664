#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace phi4lab {

enum class CaseLabel { A1, A2, A3, B };

std::string case_label_name(CaseLabel c);

// Renormalization constant sequences g_n, m_n, a_n multiplying the Wick
// quartic, quadratic and gradient terms of the action.
struct RenormSchedule {
  std::string name;
  int d = 4;
  std::map<int, double> g, m, a;
  std::optional<CaseLabel> declared_case;

  void validate() const;  // g_n >= 0 everywhere
  double g_at(int n) const;
  double m_at(int n) const;
  double a_at(int n) const;
};

// Normalized couplings at one cutoff: the three scale terms are
// (g c^2, m c, a d_n c); A_n is the dominating one and (lambda, alpha, beta)
// are the terms divided by A_n, so A_n * (lambda, alpha, beta) reconstructs
// the scale terms exactly.
struct CouplingSet {
  int n = 0;
  double g_n = 0.0, m_n = 0.0, a_n = 0.0;
  double c_n = 0.0;
  double d_n = 0.0;  // = n
  double lambda_n = 0.0, alpha_n = 0.0, beta_n = 0.0;
  double A_n = 0.0;
  CaseLabel case_label = CaseLabel::B;

  void validate() const;
  bool is_null() const { return A_n == 0.0; }
};

CouplingSet schedule_eval(const RenormSchedule& schedule, int n, double c_n);

// Internal variant that admits the all-zero (free) schedule instead of
// raising the degenerate-schedule error.
CouplingSet schedule_eval_or_null(const RenormSchedule& schedule, int n, double c_n);

struct CaseReport {
  std::string schedule;
  int d = 0;
  std::vector<int> n_range;
  double slope_g_term = 0.0, slope_m_term = 0.0, slope_a_term = 0.0;
  bool g_bounded = true, m_bounded = true, a_bounded = true;
  bool nonvanishing_coupling = false;  // g_n n^{d-4} does not tend to 0
  bool mass_side = false;              // m_n >= K n^2
  bool gradient_side = false;          // a_n >= K n
  int branch = 0;                      // 1 or 2; 0 = alternative not applicable
  std::string note;
};

CaseReport classify_case(const RenormSchedule& schedule, int d,
                         const std::vector<int>& n_range,
                         const std::function<double(int)>& c_of_n);

// Shipped presets; c_of_n supplies the covariance scale where a preset
// needs it (B presets use g_n = 1/c_n^2).
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
RenormSchedule make_preset(const std::string& name, const std::vector<int>& n_range,
                           const std::function<double(int)>& c_of_n);

// Inline schedule grammar: constants, n, log(n), + - * / ^ and parentheses.
double eval_schedule_expr(const std::string& expr, double n);
RenormSchedule make_expr_schedule(const std::string& g_expr, const std::string& m_expr,
                                  const std::string& a_expr, int d,
                                  const std::vector<int>& n_range);

}  // namespace phi4lab
