#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/rng.hpp"
#include "shieldsynth/shield.hpp"

using namespace shieldsynth;

namespace {

Shield pendulum_reference_shield() {
  // the published pendulum shield: theta = (-1.91256926, 0.98893131),
  // lambda = 0.21988415; K stores the negated coefficients
  Shield sh;
  sh.policy.K = (Mat(1, 2) << 1.91256926, -0.98893131).finished();
  sh.lambda = 0.21988415;
  sh.norm = Norm::Linf;
  sh.provenance = {"pendulum-v1", 7, 44};
  return sh;
}

// direct transcription of the three-line program text
double reference_program(double c, double x1, double x2, bool* intervened) {
  const double k = -1.91256926 * x1 + 0.98893131 * x2;
  if (std::abs(c - k) > 0.21988415) {
    *intervened = true;
    return k;
  }
  *intervened = false;
  return c;
}

Shield random_shield(Rng& rng, int outputs, int states) {
  Shield sh;
  sh.policy.K = Mat(outputs, states);
  for (int i = 0; i < outputs; ++i) {
    for (int j = 0; j < states; ++j) {
      double v = 0.0;
      while (v == 0.0) v = rng.uniform(-5.0, 5.0);
      sh.policy.K(i, j) = v;
    }
  }
  sh.lambda = rng.uniform(0.0, 3.0);
  sh.norm = rng.uniform() < 0.5 ? Norm::Linf : Norm::L2;
  sh.provenance = {"fuzz", rng.next_u64() % 1000, static_cast<long>(rng.next_u64() % 100)};
  return sh;
}

}  // namespace

TEST_CASE("agreeing command passes for any lambda") {
  Shield sh = pendulum_reference_shield();
  sh.lambda = 0.0;
  const Vec s = (Vec(2) << 0.2, -0.1).finished();
  const Vec k_cmd = sh.policy.command(s);
  const ShieldDecision dec = shield_command(sh, s, k_cmd);
  CHECK_FALSE(dec.intervened);
  CHECK(dec.command == k_cmd);
}

TEST_CASE("lambda zero intervenes on any disagreement") {
  Shield sh = pendulum_reference_shield();
  sh.lambda = 0.0;
  const Vec s = (Vec(2) << 0.1, 0.05).finished();
  const ShieldDecision dec = shield_command(sh, s, Vec::Constant(1, 0.5));
  CHECK(dec.intervened);
}

TEST_CASE("matches a direct transcription of the published program bitwise") {
  Shield sh = pendulum_reference_shield();
  Rng rng(1000);
  for (int i = 0; i < 1000; ++i) {
    const Vec s = (Vec(2) << rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)).finished();
    const Vec c = Vec::Constant(1, rng.uniform(-2.0, 2.0));
    bool ref_intervened = false;
    const double ref = reference_program(c[0], s[0], s[1], &ref_intervened);
    const ShieldDecision dec = shield_command(sh, s, c);
    REQUIRE(dec.intervened == ref_intervened);
    REQUIRE(dec.command[0] == ref);
  }
}

TEST_CASE("shield_command validates inputs") {
  Shield sh = pendulum_reference_shield();
  CHECK_THROWS_AS(shield_command(sh, Vec::Zero(3), Vec::Zero(1)), ContractViolation);
  CHECK_THROWS_AS(shield_command(sh, Vec::Zero(2), Vec::Zero(2)), ContractViolation);
  Vec bad = Vec::Zero(2);
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(shield_command(sh, bad, Vec::Zero(1)), NumericalError);
}

TEST_CASE("monotone permissiveness in lambda") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    Shield sh = random_shield(rng, 1 + static_cast<int>(rng.next_u64() % 3), 2);
    double l1 = rng.uniform(0.0, 2.0);
    double l2 = rng.uniform(0.0, 2.0);
    if (l1 > l2) std::swap(l1, l2);
    Shield a = sh, b = sh;
    a.lambda = l1;
    b.lambda = l2;
    const Vec s = (Vec(2) << rng.uniform(-1, 1), rng.uniform(-1, 1)).finished();
    Vec c(sh.policy.K.rows());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform(-3, 3);
    if (shield_command(b, s, c).intervened) {
      CHECK(shield_command(a, s, c).intervened);
    }
  }
}

TEST_CASE("idempotence: shielding its own output never intervenes") {
  Rng rng(56);
  for (int trial = 0; trial < 200; ++trial) {
    Shield sh = random_shield(rng, 1 + static_cast<int>(rng.next_u64() % 3), 3);
    const Vec s = (Vec(3) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).finished();
    Vec c(sh.policy.K.rows());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform(-9, 9);
    const ShieldDecision first = shield_command(sh, s, c);
    const ShieldDecision second = shield_command(sh, s, first.command);
    if (first.intervened) CHECK_FALSE(second.intervened);
    CHECK(second.command == first.command);
  }
}

TEST_CASE("emitted text has the published scalar shape") {
  Shield sh = pendulum_reference_shield();
  const std::string text = emit_program(sh);
  CHECK(text.find("def shield(c, x1, x2):\n") == 0);
  CHECK(text.find("    K = -1.91256926*x1 + 0.98893131*x2\n") != std::string::npos);
  CHECK(text.find("    if abs(c - K) > 0.21988415:\n") != std::string::npos);
  CHECK(text.find("        return K\n") != std::string::npos);
  CHECK(text.find("    return c\n") != std::string::npos);
  CHECK(text.find("# params: ") != std::string::npos);
}

TEST_CASE("zero-gain shield emits literal zero coefficients") {
  Shield sh;
  sh.policy.K = Mat::Zero(1, 2);
  sh.lambda = 0.5;
  const std::string text = emit_program(sh);
  CHECK(text.find("    K = 0*x1 + 0*x2\n") != std::string::npos);
}

TEST_CASE("emit -> parse -> emit is a fixed point") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Shield sh = random_shield(rng, 1 + static_cast<int>(rng.next_u64() % 4),
                              1 + static_cast<int>(rng.next_u64() % 6));
    const std::string once = emit_program(sh);
    const std::string twice = emit_program(parse_program(once));
    REQUIRE(once == twice);
  }
}

TEST_CASE("round-trip preserves runtime behavior exactly (1000 shields)") {
  Rng rng(78);
  for (int trial = 0; trial < 1000; ++trial) {
    const int outputs = 1 + static_cast<int>(rng.next_u64() % 3);
    const int states = 1 + static_cast<int>(rng.next_u64() % 5);
    Shield sh = random_shield(rng, outputs, states);
    Shield back = parse_program(emit_program(sh));
    REQUIRE(back.policy.K == sh.policy.K);
    REQUIRE(back.lambda == sh.lambda);
    REQUIRE(back.norm == sh.norm);
    Vec s(states), c(outputs);
    for (int j = 0; j < states; ++j) s[j] = rng.uniform(-1, 1);
    for (int i = 0; i < outputs; ++i) c[i] = rng.uniform(-5, 5);
    const ShieldDecision a = shield_command(sh, s, c);
    const ShieldDecision b = shield_command(back, s, c);
    REQUIRE(a.intervened == b.intervened);
    REQUIRE(a.command == b.command);
  }
}

TEST_CASE("parse errors carry line and column") {
  CHECK_THROWS_AS(parse_program("def shield(q):\n"), ParseError);
  try {
    parse_program("def shield(c, x1):\n    K = oops\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column > 1);
  }
  // truncated program
  CHECK_THROWS_AS(parse_program("def shield(c, x1):\n    K = 1*x1\n"), ParseError);
}

TEST_CASE("program text without the parameter block still parses") {
  const std::string text =
      "def shield(c, x1, x2):\n"
      "    K = -1.5*x1 + 0.25*x2\n"
      "    if abs(c - K) > 0.1:\n"
      "        return K\n"
      "    return c\n";
  Shield sh = parse_program(text);
  CHECK(sh.policy.K(0, 0) == 1.5);
  CHECK(sh.policy.K(0, 1) == -0.25);
  CHECK(sh.lambda == 0.1);
  CHECK(sh.norm == Norm::Linf);
  CHECK(sh.provenance.env.empty());
}

TEST_CASE("shield json round trip") {
  Shield sh = pendulum_reference_shield();
  Shield back = shield_from_json(shield_to_json(sh));
  CHECK(back.policy.K == sh.policy.K);
  CHECK(back.lambda == sh.lambda);
  CHECK(back.norm == sh.norm);
  CHECK(back.provenance.env == sh.provenance.env);
  CHECK(back.provenance.seed == sh.provenance.seed);
  CHECK(back.provenance.moas_horizon == sh.provenance.moas_horizon);
  CHECK_THROWS_AS(shield_from_json("{"), ContractViolation);
}

TEST_CASE("L2 norm multi-output emission round-trips") {
  Shield sh;
  sh.policy.K = (Mat(2, 2) << 1.0, -2.0, 0.5, 0.25).finished();
  sh.lambda = 0.75;
  sh.norm = Norm::L2;
  const std::string text = emit_program(sh);
  CHECK(text.find("((c1 - K1)**2 + (c2 - K2)**2)**0.5 > 0.75") != std::string::npos);
  Shield back = parse_program(text);
  CHECK(back.norm == Norm::L2);
  CHECK(back.policy.K == sh.policy.K);
}
