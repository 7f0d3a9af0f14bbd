#include <cmath>

#include "doctest.h"

#include "innermpi/hierarchy.hpp"
#include "innermpi/validation.hpp"

using namespace innermpi;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }
Polynomial c2(double v) { return Polynomial::constant(2, v); }
Polynomial r2() { return x(2, 0) * x(2, 0) + x(2, 1) * x(2, 1); }

SemialgebraicSet unit_disk() { return SemialgebraicSet({c2(1.0) - r2()}); }
OdeSystem contraction() { return OdeSystem({-x(2, 0), -x(2, 1)}); }
OdeSystem expansion() { return OdeSystem({x(2, 0), x(2, 1)}); }
OdeSystem vanderpol() {
  return OdeSystem({-2.0 * x(2, 1), 0.8 * x(2, 0) + 10.0 * (1.0404 * x(2, 0) * x(2, 0) - c2(0.2)) * x(2, 1)});
}

void set_gram(const SosProgram& prog, const SosVar& s, const Monomial& a, const Monomial& b, double value,
              std::vector<double>& values) {
  int ia = -1, ib = -1;
  for (int i = 0; i < static_cast<int>(s.basis.size()); ++i) {
    if (s.basis[i] == a) ia = i;
    if (s.basis[i] == b) ib = i;
  }
  REQUIRE(ia >= 0);
  REQUIRE(ib >= 0);
  for (const auto& v : prog.variables()) {
    if (v.kind == VarKind::Gram && v.block == s.block && v.row == std::min(ia, ib) && v.col == std::max(ia, ib)) {
      values[v.id] = value;
      return;
    }
  }
  FAIL("Gram entry not found");
}

void set_poly(const PolyVar& p, const Polynomial& value, std::vector<double>& values) {
  for (std::size_t j = 0; j < p.basis.size(); ++j) values[p.coefficients[j]] = value.coefficient(p.basis[j]);
}

const SosVar& multiplier(const Tightening& t, const std::string& name) {
  for (const auto& s : t.multipliers) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("no multiplier " + name);
}

}  // namespace

TEST_CASE("build_tightening preconditions") {
  const auto X = unit_disk();
  CHECK_THROWS(build_tightening(contraction(), X, 0, 1.0, CertificateMode::SlackU));
  CHECK_THROWS(build_tightening(contraction(), X, 1, 0.0, CertificateMode::SlackU));
  CHECK_NOTHROW(build_tightening(contraction(), X, 1, 0.0, CertificateMode::ForcedUZero));
  const SemialgebraicSet box({c2(1.0) - x(2, 0) * x(2, 0), c2(1.0) - x(2, 1) * x(2, 1)});
  CHECK_THROWS(build_tightening(contraction(), box, 1, 1.0, CertificateMode::SlackU));
  const SemialgebraicSet quartic({c2(1.0) - r2() * r2(), c2(1.0) - r2()});
  CHECK_THROWS(build_tightening(contraction(), quartic, 1, 1.0, CertificateMode::SlackU));
}

TEST_CASE("degree caps") {
  CHECK(free_sos_cap(4) == 4);
  CHECK(free_sos_cap(3) == 4);
  CHECK(free_sos_cap(0) == 0);
  // Van der Pol at k = 1: the Lie-derivative side has degree 2 + 3 - 1 = 4.
  const auto t = build_tightening(vanderpol(), unit_disk(), 1, 1.0, CertificateMode::SlackU);
  CHECK(vanderpol().degree() == 3);
  CHECK(multiplier(t, "q0").basis.back().degree() <= 2);
  CHECK(multiplier(t, "q1").basis.size() == 1);  // cap 2(k - k_1) = 0
  CHECK(t.v.basis.size() == 6);
  CHECK(t.w.basis.size() == 6);
  CHECK(t.signed_multipliers.size() == 1);
  CHECK(t.signed_multipliers[0].basis.size() == 1);
  // Blocks: q0, q1, p0, p1, s0, s1 and t0; t1+ - t1- is a free polynomial.
  CHECK(t.program.block_sizes().size() == 7);
}

TEST_CASE("mode toggling changes only u and the objective") {
  const auto slack = build_tightening(vanderpol(), unit_disk(), 2, 3.0, CertificateMode::SlackU);
  const auto forced = build_tightening(vanderpol(), unit_disk(), 2, 3.0, CertificateMode::ForcedUZero);
  REQUIRE(slack.u.has_value());
  CHECK_FALSE(forced.u.has_value());
  CHECK(slack.program.block_sizes() == forced.program.block_sizes());
  const auto ps = slack.program.compile(), pf = forced.program.compile();
  CHECK(ps.rows.size() == pf.rows.size());
  CHECK(ps.nonneg_count == pf.nonneg_count + 1);
  CHECK(ps.objective.size() == pf.objective.size() + 1);
  // Identity by identity, slack mode adds only the u term to the first one.
  for (std::size_t i = 0; i < slack.program.identities().size(); ++i) {
    const auto& ls = slack.program.identities()[i].residual;
    const auto& lf = forced.program.identities()[i].residual;
    CHECK(ls.terms().size() == lf.terms().size() + (i == 0 ? 1 : 0));
    CHECK(ls.constant() == lf.constant());
  }
}

TEST_CASE("hand-built certificate v = |x|^2 - 1 is feasible for the contraction") {
  const auto t = build_tightening(contraction(), unit_disk(), 1, 0.0, CertificateMode::ForcedUZero);
  std::vector<double> values(t.program.variables().size(), 0.0);
  const Monomial m1({1, 0}), m2({0, 1});
  set_poly(t.v, r2() - c2(1.0), values);
  set_poly(t.w, r2(), values);
  // -grad(v).f = 2|x|^2 = q0; w - v - 1 = 0; w = |x|^2 = s0; v = -1 * g.
  set_gram(t.program, multiplier(t, "q0"), m1, m1, 2.0, values);
  set_gram(t.program, multiplier(t, "q0"), m2, m2, 2.0, values);
  set_gram(t.program, multiplier(t, "s0"), m1, m1, 1.0, values);
  set_gram(t.program, multiplier(t, "s0"), m2, m2, 1.0, values);
  set_poly(t.signed_multipliers[0], c2(-1.0), values);

  for (const auto& id : t.program.identities()) CHECK(id.residual.evaluate(values).is_zero());
  const auto sdp = t.program.compile();
  const auto map = t.program.sdp_variable_map();
  std::vector<double> xs(sdp.variable_count(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) xs[map[i]] = values[i];
  for (const auto& row : sdp.rows) {
    double a = -row.rhs;
    for (const auto& e : row.entries) a += e.value * xs[e.var];
    CHECK(std::abs(a) < 1e-14);
  }
}

TEST_CASE("contraction hierarchy, forced mode") {
  const auto X = unit_disk();
  const std::vector<int> orders{1, 2, 3};
  const auto run = run_hierarchy(contraction(), X, orders, 0.0, CertificateMode::ForcedUZero);
  REQUIRE(run.certificates.size() == 3);
  double prev_obj = 1e300, prev_vol = -1.0;
  for (const auto& c : run.certificates) {
    CHECK(c.optimal());
    CHECK(c.u == 0.0);
    CHECK(std::abs(c.objective - c.moment_value) <= 10 * 1e-8 * (1.0 + std::abs(c.objective)));
    CHECK(c.objective <= prev_obj + 1e-6 * (1.0 + std::abs(prev_obj)));
    const double vol = inner_set_volume(c.v, X, 20000, 5).value;
    CHECK(vol >= prev_vol - 0.05);
    prev_obj = c.objective;
    prev_vol = vol;
  }
  CHECK(run.monotonicity_violations.empty());
  CHECK(prev_vol >= 0.9 * M_PI);
}

TEST_CASE("expansion hierarchy, slack mode, decreases toward pi") {
  const auto X = unit_disk();
  const std::vector<int> orders{1, 2, 3};
  const auto run = run_hierarchy(expansion(), X, orders, 2.0, CertificateMode::SlackU);
  for (const auto& c : run.certificates) {
    CHECK(c.optimal());
    CHECK(c.objective >= M_PI - 1e-6);
  }
  CHECK(run.monotonicity_violations.empty());
  CHECK(run.certificates.back().objective <= run.certificates.front().objective + 1e-6);
}

TEST_CASE("run_hierarchy reports every order and rejects unordered ranges") {
  std::vector<int> seen;
  const std::vector<int> orders{1, 2};
  run_hierarchy(contraction(), unit_disk(), orders, 0.0, CertificateMode::ForcedUZero, {}, {},
                [&](const Certificate& c) { seen.push_back(c.k); });
  CHECK(seen == orders);
  const std::vector<int> bad{2, 1};
  CHECK_THROWS(run_hierarchy(contraction(), unit_disk(), bad, 0.0, CertificateMode::ForcedUZero));
}

TEST_CASE("inner set membership") {
  Certificate c;
  c.v = r2() - c2(1.0);
  const auto X = unit_disk();
  CHECK(inner_set_membership(c, X, std::vector<double>{0.0, 0.0}));
  CHECK_FALSE(inner_set_membership(c, X, std::vector<double>{1.0, 0.0}));
  Certificate d;
  d.u = 0.1;
  d.v = c2(-0.05);
  CHECK_FALSE(inner_set_membership(d, X, std::vector<double>{0.0, 0.0}, 1.0));
  CHECK(inner_set_membership(d, X, std::vector<double>{0.0, 0.0}, 0.4));
}

TEST_CASE("certificate JSON round trip") {
  const std::vector<int> orders{2};
  const auto run = run_hierarchy(expansion(), unit_disk(), orders, 2.0, CertificateMode::SlackU);
  const auto& c = run.certificates[0];
  const auto j = certificate_to_json(c);
  CHECK(j["version"] == 1);
  const auto back = certificate_from_json(j);
  CHECK(back.k == c.k);
  CHECK(back.mode == c.mode);
  CHECK(back.u == c.u);
  CHECK(back.v == c.v);
  CHECK(back.w == c.w);
  CHECK(back.stats.status == c.stats.status);
  CHECK(back.degenerate == c.degenerate);
}

TEST_CASE("degenerate and conditioning flags") {
  const std::vector<int> orders{1};
  const auto run = run_hierarchy(expansion(), unit_disk(), orders, 2.0, CertificateMode::SlackU);
  const auto& c = run.certificates[0];
  CHECK(c.degenerate == (c.v.max_abs_coefficient() < kDegenerateCoefficient));
  CHECK_FALSE((c.usable() && c.degenerate));
}
