#include "phi4lab/schedule.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "phi4lab/errors.hpp"
#include "phi4lab/stats.hpp"

namespace phi4lab {

std::string case_label_name(CaseLabel c) {
  switch (c) {
    case CaseLabel::A1: return "A1";
    case CaseLabel::A2: return "A2";
    case CaseLabel::A3: return "A3";
    case CaseLabel::B: return "B";
  }
  return "?";
}

void RenormSchedule::validate() const {
  for (const auto& [n, v] : g)
    if (v < 0.0)
      throw input_error("schedule " + name + ": coupling g_" + std::to_string(n) +
                        " is negative");
}

namespace {
double map_at(const std::map<int, double>& m, int n, const char* what,
              const std::string& name) {
  auto it = m.find(n);
  if (it == m.end())
    throw input_error("schedule " + name + ": no " + what + " entry at n=" +
                      std::to_string(n));
  return it->second;
}
}  // namespace

double RenormSchedule::g_at(int n) const { return map_at(g, n, "g", name); }
double RenormSchedule::m_at(int n) const { return map_at(m, n, "m", name); }
double RenormSchedule::a_at(int n) const { return map_at(a, n, "a", name); }

void CouplingSet::validate() const {
  if (is_null()) return;
  double terms[3] = {g_n * c_n * c_n, m_n * c_n, a_n * d_n * c_n};
  double normd[3] = {lambda_n, alpha_n, beta_n};
  for (int i = 0; i < 3; ++i) {
    double lhs = A_n * normd[i];
    double scale = std::max(std::fabs(terms[i]), std::fabs(A_n));
    if (std::fabs(lhs - terms[i]) > 1e-12 * scale)
      throw numeric_error("coupling set: reconstruction identity violated");
  }
}

CouplingSet schedule_eval_or_null(const RenormSchedule& schedule, int n, double c_n) {
  schedule.validate();
  if (!(c_n > 0.0)) throw input_error("schedule_eval: c_n must be positive");
  CouplingSet cs;
  cs.n = n;
  cs.g_n = schedule.g_at(n);
  cs.m_n = schedule.m_at(n);
  cs.a_n = schedule.a_at(n);
  cs.c_n = c_n;
  cs.d_n = static_cast<double>(n);

  double tg = cs.g_n * c_n * c_n;
  double tm = cs.m_n * c_n;
  double ta = cs.a_n * cs.d_n * c_n;
  double mags[3] = {std::fabs(tg), std::fabs(tm), std::fabs(ta)};

  if (mags[0] == 0.0 && mags[1] == 0.0 && mags[2] == 0.0) {
    cs.A_n = 0.0;
    cs.lambda_n = cs.alpha_n = cs.beta_n = 0.0;
    cs.case_label = schedule.declared_case.value_or(CaseLabel::B);
    return cs;
  }

  CaseLabel label;
  if (schedule.declared_case.has_value()) {
    label = *schedule.declared_case;
  } else {
    int dominant = static_cast<int>(std::max_element(mags, mags + 3) - mags);
    label = dominant == 0 ? CaseLabel::A1 : (dominant == 1 ? CaseLabel::A2 : CaseLabel::A3);
  }
  double a_term = 0.0;
  switch (label) {
    case CaseLabel::A1: a_term = tg; break;
    case CaseLabel::A2: a_term = tm; break;
    case CaseLabel::A3: a_term = ta; break;
    case CaseLabel::B:
      // bounded case: normalize by the largest term
      a_term = mags[0] >= mags[1] && mags[0] >= mags[2] ? tg : (mags[1] >= mags[2] ? tm : ta);
      break;
  }
  if (a_term == 0.0)
    throw input_error("schedule_eval: declared case " + case_label_name(label) +
                      " has a vanishing dominating term at n=" + std::to_string(n));
  cs.A_n = a_term;
  cs.lambda_n = tg / a_term;
  cs.alpha_n = tm / a_term;
  cs.beta_n = ta / a_term;
  cs.case_label = label;
  cs.validate();
  return cs;
}

CouplingSet schedule_eval(const RenormSchedule& schedule, int n, double c_n) {
  CouplingSet cs = schedule_eval_or_null(schedule, n, c_n);
  if (cs.is_null())
    throw degenerate_error("schedule_eval: all three scale terms vanish at n=" +
                           std::to_string(n));
  return cs;
}

namespace {

// Fitted log-log slope; returns nullopt for an identically-zero series and
// throws on mixed signs (not a scale law).
std::optional<double> term_slope(const std::vector<int>& ns,
                                 const std::vector<double>& vals) {
  bool all_zero = true;
  for (double v : vals) all_zero = all_zero && v == 0.0;
  if (all_zero) return std::nullopt;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < ns.size(); ++i) {
    if (!(vals[i] > 0.0))
      throw input_error("classify_case: scale term not positive at n=" +
                        std::to_string(ns[i]));
    xs.push_back(std::log(static_cast<double>(ns[i])));
    ys.push_back(std::log(vals[i]));
  }
  return fit_line(xs, ys).slope;
}

constexpr double kBoundedSlope = 0.05;

}  // namespace

CaseReport classify_case(const RenormSchedule& schedule, int d,
                         const std::vector<int>& n_range,
                         const std::function<double(int)>& c_of_n) {
  if (n_range.size() < 3) throw input_error("classify_case: need >= 3 cutoffs");
  schedule.validate();
  CaseReport r;
  r.schedule = schedule.name;
  r.d = d;
  r.n_range = n_range;

  std::vector<double> tg, tm, ta, nonvan, mside, aside;
  for (int n : n_range) {
    double c = c_of_n(n);
    if (!(c > 0.0)) throw input_error("classify_case: c_n must be positive");
    tg.push_back(schedule.g_at(n) * c * c);
    tm.push_back(schedule.m_at(n) * c);
    ta.push_back(schedule.a_at(n) * n * c);
    nonvan.push_back(schedule.g_at(n) * std::pow(static_cast<double>(n), d - 4));
    mside.push_back(schedule.m_at(n) / (static_cast<double>(n) * n));
    aside.push_back(schedule.a_at(n) / static_cast<double>(n));
  }

  auto sg = term_slope(n_range, tg);
  auto sm = term_slope(n_range, tm);
  auto sa = term_slope(n_range, ta);
  r.slope_g_term = sg.value_or(0.0);
  r.slope_m_term = sm.value_or(0.0);
  r.slope_a_term = sa.value_or(0.0);
  r.g_bounded = !sg || *sg <= kBoundedSlope;
  r.m_bounded = !sm || *sm <= kBoundedSlope;
  r.a_bounded = !sa || *sa <= kBoundedSlope;

  auto holds_below = [&](const std::vector<double>& vals) {
    // "v_n >= K * growth" over the tested range: positive with a
    // non-decreasing trend of v_n / growth.
    auto s = term_slope(n_range, vals);
    return s.has_value() && *s >= -kBoundedSlope;
  };
  try {
    r.nonvanishing_coupling = holds_below(nonvan);
  } catch (const Error&) {
    r.nonvanishing_coupling = false;
  }
  try {
    r.mass_side = holds_below(mside);
  } catch (const Error&) {
    r.mass_side = false;
  }
  try {
    r.gradient_side = holds_below(aside);
  } catch (const Error&) {
    r.gradient_side = false;
  }

  bool all_bounded = r.g_bounded && r.m_bounded && r.a_bounded;
  if (all_bounded) {
    r.branch = 1;
    r.note = "all three scale terms bounded: strong convergence to the free field";
  } else if (d >= 4 && (r.nonvanishing_coupling || r.mass_side || r.gradient_side)) {
    r.branch = 2;
    r.note = r.nonvanishing_coupling
                 ? "unbounded scale term with non-vanishing coupling"
                 : (r.mass_side ? "unbounded scale term with mass side condition"
                                : "unbounded scale term with gradient side condition");
  } else {
    r.branch = 0;
    r.note = d >= 4 ? "unbounded term but no side condition holds"
                    : "unbounded scale term; the dichotomy needs d >= 4";
  }
  return r;
}

std::vector<std::string> preset_names() {
  return {"A1-d4", "A2-d4", "A3-d4", "B-d4", "B-d3", "d2-standard", "d3-standard", "null"};
}

bool is_preset(const std::string& name) {
  auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

RenormSchedule make_preset(const std::string& name, const std::vector<int>& n_range,
                           const std::function<double(int)>& c_of_n) {
  if (n_range.empty()) throw input_error("make_preset: empty n_range");
  RenormSchedule s;
  s.name = name;
  auto fill = [&](double gv, double mv, double av) {
    for (int n : n_range) {
      s.g[n] = gv;
      s.m[n] = mv;
      s.a[n] = av;
    }
  };
  if (name == "A1-d4") {
    s.d = 4;
    s.declared_case = CaseLabel::A1;
    fill(1.0, 0.0, 0.0);
  } else if (name == "A2-d4") {
    s.d = 4;
    s.declared_case = CaseLabel::A2;
    for (int n : n_range) {
      s.g[n] = 0.0;
      s.m[n] = static_cast<double>(n) * n;
      s.a[n] = 0.0;
    }
  } else if (name == "A3-d4") {
    s.d = 4;
    s.declared_case = CaseLabel::A3;
    for (int n : n_range) {
      s.g[n] = 0.0;
      s.m[n] = 0.0;
      s.a[n] = static_cast<double>(n);
    }
  } else if (name == "B-d4" || name == "B-d3") {
    s.d = name == "B-d4" ? 4 : 3;
    s.declared_case = CaseLabel::B;
    for (int n : n_range) {
      double c = c_of_n(n);
      s.g[n] = 1.0 / (c * c);
      s.m[n] = 0.0;
      s.a[n] = 0.0;
    }
  } else if (name == "d2-standard") {
    s.d = 2;
    s.declared_case = CaseLabel::A1;
    fill(1.0, 0.0, 0.0);
  } else if (name == "d3-standard") {
    s.d = 3;
    s.declared_case = CaseLabel::A1;
    for (int n : n_range) {
      s.g[n] = 1.0;
      s.m[n] = std::log(static_cast<double>(n));
      s.a[n] = 0.0;
    }
  } else if (name == "null") {
    s.d = 4;
    fill(0.0, 0.0, 0.0);
  } else {
    throw input_error("unknown schedule preset '" + name + "'");
  }
  return s;
}

namespace {

// Recursive-descent parser for the inline schedule grammar.
class ExprParser {
 public:
  ExprParser(const std::string& src, double n) : src_(src), n_(n) {}

  double parse() {
    double v = expr();
    skip_ws();
    if (pos_ != src_.size())
      throw input_error("schedule expression: trailing input at '" +
                        src_.substr(pos_) + "'");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) v *= unary();
      else if (eat('/')) {
        double w = unary();
        if (w == 0.0) throw input_error("schedule expression: division by zero");
        v /= w;
      } else return v;
    }
  }

  double unary() {
    if (eat('-')) return -unary();
    return power();
  }

  double power() {
    double base = atom();
    if (eat('^')) return std::pow(base, unary());
    return base;
  }

  double atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw input_error("schedule expression: unexpected end");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      double v = expr();
      if (!eat(')')) throw input_error("schedule expression: missing ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end = pos_;
      while (end < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.' ||
              src_[end] == 'e' || src_[end] == 'E' ||
              ((src_[end] == '+' || src_[end] == '-') && end > pos_ &&
               (src_[end - 1] == 'e' || src_[end - 1] == 'E'))))
        ++end;
      double v = std::stod(src_.substr(pos_, end - pos_));
      pos_ = end;
      return v;
    }
    if (src_.compare(pos_, 3, "log") == 0) {
      pos_ += 3;
      if (!eat('(')) throw input_error("schedule expression: log needs (n)");
      double v = expr();
      if (!eat(')')) throw input_error("schedule expression: missing ')'");
      if (!(v > 0.0)) throw input_error("schedule expression: log of non-positive value");
      return std::log(v);
    }
    if (c == 'n') {
      ++pos_;
      return n_;
    }
    throw input_error(std::string("schedule expression: unexpected character '") + c + "'");
  }

  const std::string& src_;
  double n_;
  size_t pos_ = 0;
};

}  // namespace

double eval_schedule_expr(const std::string& expr, double n) {
  return ExprParser(expr, n).parse();
}

RenormSchedule make_expr_schedule(const std::string& g_expr, const std::string& m_expr,
                                  const std::string& a_expr, int d,
                                  const std::vector<int>& n_range) {
  RenormSchedule s;
  s.name = "inline(g=" + g_expr + ",m=" + m_expr + ",a=" + a_expr + ")";
  s.d = d;
  for (int n : n_range) {
    s.g[n] = eval_schedule_expr(g_expr, n);
    s.m[n] = eval_schedule_expr(m_expr, n);
    s.a[n] = eval_schedule_expr(a_expr, n);
  }
  s.validate();
  return s;
}

}  // namespace phi4lab
