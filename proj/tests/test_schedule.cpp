#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phi4lab/errors.hpp"
#include "phi4lab/schedule.hpp"

using namespace phi4lab;

namespace {
// covariance stand-in with the right growth: c_n = 0.05 n^{d-2}
double c_model(int n, int d) { return 0.05 * std::pow(n, d - 2); }
}  // namespace

TEST_CASE("A1 preset: quartic normalization") {
  std::vector<int> ns{4, 6, 8};
  RenormSchedule s = make_preset("A1-d4", ns, [](int n) { return c_model(n, 4); });
  double c = c_model(8, 4);
  CouplingSet cs = schedule_eval(s, 8, c);
  CHECK(cs.lambda_n == 1.0);
  CHECK(cs.alpha_n == 0.0);
  CHECK(cs.beta_n == 0.0);
  CHECK(cs.A_n == doctest::Approx(c * c).epsilon(1e-14));
  CHECK(cs.case_label == CaseLabel::A1);
  CHECK(cs.d_n == 8.0);
}

TEST_CASE("B preset: A_n lambda_n stays bounded at 1") {
  std::vector<int> ns{4, 6, 8, 12};
  RenormSchedule s = make_preset("B-d4", ns, [](int n) { return c_model(n, 4); });
  for (int n : ns) {
    CouplingSet cs = schedule_eval(s, n, c_model(n, 4));
    CHECK(cs.A_n * cs.lambda_n == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cs.A_n == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("reconstruction identity for every preset") {
  std::vector<int> ns{4, 6, 8};
  for (const auto& name : preset_names()) {
    RenormSchedule s = make_preset(name, ns, [](int n) { return c_model(n, 4); });
    for (int n : ns) {
      CouplingSet cs = schedule_eval_or_null(s, n, c_model(n, 4));
      if (cs.is_null()) continue;
      CHECK(cs.A_n * cs.lambda_n == doctest::Approx(cs.g_n * cs.c_n * cs.c_n).epsilon(1e-12));
      CHECK(cs.A_n * cs.alpha_n == doctest::Approx(cs.m_n * cs.c_n).epsilon(1e-12));
      CHECK(cs.A_n * cs.beta_n ==
            doctest::Approx(cs.a_n * cs.d_n * cs.c_n).epsilon(1e-12));
    }
  }
}

TEST_CASE("exactly one normalized coupling is 1 in the A cases") {
  std::vector<int> ns{4, 6, 8};
  auto c = [](int n) { return c_model(n, 4); };
  auto ones = [](const CouplingSet& cs) {
    int k = 0;
    if (cs.lambda_n == 1.0) ++k;
    if (cs.alpha_n == 1.0) ++k;
    if (cs.beta_n == 1.0) ++k;
    return k;
  };
  CHECK(ones(schedule_eval(make_preset("A1-d4", ns, c), 6, c(6))) == 1);
  CHECK(ones(schedule_eval(make_preset("A2-d4", ns, c), 6, c(6))) == 1);
  CHECK(ones(schedule_eval(make_preset("A3-d4", ns, c), 6, c(6))) == 1);
  CHECK(schedule_eval(make_preset("A2-d4", ns, c), 6, c(6)).alpha_n == 1.0);
  CHECK(schedule_eval(make_preset("A3-d4", ns, c), 6, c(6)).beta_n == 1.0);
}

TEST_CASE("degenerate schedule raises; the null preset is accepted internally") {
  std::vector<int> ns{4, 6, 8};
  RenormSchedule s = make_preset("null", ns, [](int) { return 1.0; });
  CHECK_THROWS_AS(schedule_eval(s, 4, 1.0), Error);
  CouplingSet cs = schedule_eval_or_null(s, 4, 1.0);
  CHECK(cs.is_null());
  CHECK(cs.A_n == 0.0);
}

TEST_CASE("negative coupling rejected") {
  RenormSchedule s;
  s.name = "bad";
  s.g[4] = -1.0;
  s.m[4] = 0.0;
  s.a[4] = 0.0;
  CHECK_THROWS_AS(schedule_eval(s, 4, 1.0), Error);
}

TEST_CASE("classification is scale invariant and matches the branches") {
  std::vector<int> ns{8, 16, 32, 64};
  auto c4 = [](int n) { return c_model(n, 4); };

  CaseReport b = classify_case(make_preset("B-d4", ns, c4), 4, ns, c4);
  CHECK(b.branch == 1);
  CHECK(b.g_bounded);

  CaseReport a1 = classify_case(make_preset("A1-d4", ns, c4), 4, ns, c4);
  CHECK(a1.branch == 2);
  CHECK(a1.nonvanishing_coupling);

  // scale the whole schedule by a positive constant: same classification
  RenormSchedule scaled = make_preset("A1-d4", ns, c4);
  for (auto& [n, v] : scaled.g) v *= 37.0;
  CaseReport a1s = classify_case(scaled, 4, ns, c4);
  CHECK(a1s.branch == a1.branch);
  CHECK(a1s.nonvanishing_coupling == a1.nonvanishing_coupling);

  // vanishing coupling rescued by the mass side condition
  RenormSchedule mass;
  mass.name = "g-vanishing-mass";
  mass.d = 4;
  for (int n : ns) {
    mass.g[n] = 1.0 / n;
    mass.m[n] = static_cast<double>(n) * n;
    mass.a[n] = 0.0;
  }
  CaseReport m = classify_case(mass, 4, ns, c4);
  CHECK(m.branch == 2);
  CHECK_FALSE(m.nonvanishing_coupling);
  CHECK(m.mass_side);

  // d=3 contrast: unbounded term but the alternative needs d >= 4
  auto c3 = [](int n) { return c_model(n, 3); };
  CaseReport d3 = classify_case(make_preset("d3-standard", ns, c3), 3, ns, c3);
  CHECK(d3.branch == 0);
  CHECK_FALSE(d3.g_bounded);
}

TEST_CASE("classify_case input validation") {
  std::vector<int> two{4, 8};
  auto c4 = [](int n) { return c_model(n, 4); };
  CHECK_THROWS_AS(classify_case(make_preset("A1-d4", {4, 6, 8}, c4), 4, two, c4), Error);
}

TEST_CASE("schedule expression grammar") {
  CHECK(eval_schedule_expr("1", 8.0) == 1.0);
  CHECK(eval_schedule_expr("n", 8.0) == 8.0);
  CHECK(eval_schedule_expr("n^2", 8.0) == 64.0);
  CHECK(eval_schedule_expr("log(n)", 8.0) == doctest::Approx(std::log(8.0)));
  CHECK(eval_schedule_expr("2*n + 3", 8.0) == 19.0);
  CHECK(eval_schedule_expr("n^2 * log(n) / 2", 4.0) ==
        doctest::Approx(16.0 * std::log(4.0) / 2.0));
  CHECK(eval_schedule_expr("-n + 10", 8.0) == 2.0);
  CHECK(eval_schedule_expr("(1 + n)^2", 3.0) == 16.0);
  CHECK(eval_schedule_expr("2^n", 3.0) == 8.0);
  CHECK(eval_schedule_expr("1e-2 * n", 100.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eval_schedule_expr("n +", 8.0), Error);
  CHECK_THROWS_AS(eval_schedule_expr("log(0)", 8.0), Error);
  CHECK_THROWS_AS(eval_schedule_expr("x + 1", 8.0), Error);
  CHECK_THROWS_AS(eval_schedule_expr("1/0", 8.0), Error);
}

TEST_CASE("inline schedules build and validate") {
  std::vector<int> ns{4, 8, 16};
  RenormSchedule s = make_expr_schedule("1", "n^2", "0", 4, ns);
  CHECK(s.g_at(8) == 1.0);
  CHECK(s.m_at(8) == 64.0);
  CHECK(s.a_at(16) == 0.0);
  CHECK_THROWS_AS(make_expr_schedule("-1", "0", "0", 4, ns), Error);
}
