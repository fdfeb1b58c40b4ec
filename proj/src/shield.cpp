#include "shieldsynth/shield.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <vector>

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"

namespace shieldsynth {

namespace {

std::string format_double(double x) {
  if (x == 0.0) return "0";  // canonical zero, covers the -0.0 from negating K
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::string cmd_var(Eigen::Index outputs, Eigen::Index i) {
  return outputs == 1 ? "c" : "c" + std::to_string(i + 1);
}

std::string gain_var(Eigen::Index outputs, Eigen::Index i) {
  return outputs == 1 ? "K" : "K" + std::to_string(i + 1);
}

// Line-oriented cursor for the parser; columns are 1-based.
struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return done() ? '\0' : text[pos]; }

  void advance() {
    if (done()) return;
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

  void expect(const std::string& lit) {
    for (char ch : lit) {
      if (done() || peek() != ch) fail("expected '" + lit + "'");
      advance();
    }
  }

  bool try_consume(const std::string& lit) {
    if (text.compare(pos, lit.size(), lit) != 0) return false;
    for (size_t i = 0; i < lit.size(); ++i) advance();
    return true;
  }

  double number() {
    double value = 0.0;
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin) fail("expected a number");
    for (const char* p = begin; p != ptr; ++p) advance();
    return value;
  }

  long integer() {
    long value = 0;
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin) fail("expected an integer");
    for (const char* p = begin; p != ptr; ++p) advance();
    return value;
  }
};

nlohmann::json shield_json(const Shield& sh) {
  nlohmann::json j;
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < sh.policy.K.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < sh.policy.K.cols(); ++k) row.push_back(sh.policy.K(i, k));
    rows.push_back(std::move(row));
  }
  j["K"] = std::move(rows);
  j["lambda"] = sh.lambda;
  j["norm"] = norm_name(sh.norm);
  j["provenance"] = {{"env", sh.provenance.env},
                     {"seed", sh.provenance.seed},
                     {"moas_horizon", sh.provenance.moas_horizon}};
  return j;
}

Shield shield_from(const nlohmann::json& j) {
  Shield sh;
  const auto& rows = j.at("K");
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  sh.policy.K = Mat(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index k = 0; k < nc; ++k) sh.policy.K(i, k) = rows[i][k].get<double>();
  }
  sh.lambda = j.at("lambda").get<double>();
  sh.norm = norm_from_name(j.at("norm").get<std::string>());
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    sh.provenance.env = p.value("env", std::string{});
    sh.provenance.seed = p.value("seed", uint64_t{0});
    sh.provenance.moas_horizon = p.value("moas_horizon", long{-1});
  }
  return sh;
}

}  // namespace

const char* norm_name(Norm n) { return n == Norm::L2 ? "l2" : "linf"; }

Norm norm_from_name(const std::string& name) {
  if (name == "linf") return Norm::Linf;
  if (name == "l2") return Norm::L2;
  throw ContractViolation("unknown norm '" + name + "'");
}

ShieldDecision shield_command(const Shield& sh, const Vec& s, const Vec& c) {
  const Mat& k = sh.policy.K;
  if (s.size() != k.cols()) throw ContractViolation("shield_command: state dimension mismatch");
  if (c.size() != k.rows()) throw ContractViolation("shield_command: command dimension mismatch");
  if (!s.allFinite() || !c.allFinite()) {
    throw NumericalError("shield_command: non-finite input");
  }

  Vec k_cmd(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    double acc = -k(i, 0) * s[0];
    for (Eigen::Index j = 1; j < k.cols(); ++j) acc = acc + -k(i, j) * s[j];
    k_cmd[i] = acc;
  }

  double dist;
  if (sh.norm == Norm::Linf || k.rows() == 1) {
    dist = std::abs(c[0] - k_cmd[0]);
    for (Eigen::Index i = 1; i < k.rows(); ++i) dist = std::max(dist, std::abs(c[i] - k_cmd[i]));
  } else {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      const double d = c[i] - k_cmd[i];
      sum += d * d;
    }
    dist = std::sqrt(sum);
  }

  if (dist > sh.lambda) return {std::move(k_cmd), true};
  return {c, false};
}

std::string emit_program(const Shield& sh) {
  const Eigen::Index p = sh.policy.K.rows();
  const Eigen::Index m = sh.policy.K.cols();
  std::string out = "def shield(";
  for (Eigen::Index i = 0; i < p; ++i) out += cmd_var(p, i) + ", ";
  for (Eigen::Index j = 0; j < m; ++j) {
    out += "x" + std::to_string(j + 1);
    out += j + 1 < m ? ", " : "";
  }
  out += "):\n";

  for (Eigen::Index i = 0; i < p; ++i) {
    out += "    " + gain_var(p, i) + " = ";
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j > 0) out += " + ";
      out += format_double(-sh.policy.K(i, j)) + "*x" + std::to_string(j + 1);
    }
    out += "\n";
  }

  out += "    if ";
  if (p == 1) {
    out += "abs(c - K)";
  } else if (sh.norm == Norm::Linf) {
    out += "max(";
    for (Eigen::Index i = 0; i < p; ++i) {
      if (i > 0) out += ", ";
      out += "abs(" + cmd_var(p, i) + " - " + gain_var(p, i) + ")";
    }
    out += ")";
  } else {
    out += "(";
    for (Eigen::Index i = 0; i < p; ++i) {
      if (i > 0) out += " + ";
      out += "(" + cmd_var(p, i) + " - " + gain_var(p, i) + ")**2";
    }
    out += ")**0.5";
  }
  out += " > " + format_double(sh.lambda) + ":\n";

  out += "        return ";
  for (Eigen::Index i = 0; i < p; ++i) {
    if (i > 0) out += ", ";
    out += gain_var(p, i);
  }
  out += "\n    return ";
  for (Eigen::Index i = 0; i < p; ++i) {
    if (i > 0) out += ", ";
    out += cmd_var(p, i);
  }
  out += "\n# params: " + shield_json(sh).dump() + "\n";
  return out;
}

Shield parse_program(const std::string& text) {
  Cursor cur{text};
  cur.expect("def shield(");

  // command args: "c" or "c1, c2, ..."
  Eigen::Index outputs = 0;
  cur.expect("c");
  if (cur.peek() >= '1' && cur.peek() <= '9') {
    long idx = cur.integer();
    if (idx != 1) cur.fail("command arguments must start at c1");
    outputs = 1;
    while (cur.try_consume(", c")) {
      // lookahead: "c<k>" continues commands, "x" would have failed already
      long next = cur.integer();
      if (next != outputs + 1) cur.fail("command arguments must be consecutive");
      ++outputs;
    }
    // the final ", c" attempt never consumes on "x"; fall through
  } else {
    outputs = 1;
  }
  cur.expect(", x1");
  Eigen::Index states = 1;
  while (cur.try_consume(", x")) {
    long next = cur.integer();
    if (next != states + 1) cur.fail("state arguments must be consecutive");
    ++states;
  }
  cur.expect("):\n");

  Shield sh;
  sh.policy.K = Mat(outputs, states);
  for (Eigen::Index i = 0; i < outputs; ++i) {
    cur.expect("    " + gain_var(outputs, i) + " = ");
    for (Eigen::Index j = 0; j < states; ++j) {
      if (j > 0) cur.expect(" + ");
      const double theta = cur.number();
      cur.expect("*x" + std::to_string(j + 1));
      sh.policy.K(i, j) = -theta;
    }
    cur.expect("\n");
  }

  cur.expect("    if ");
  if (outputs == 1) {
    cur.expect("abs(c - K)");
    sh.norm = Norm::Linf;
  } else if (cur.try_consume("max(")) {
    for (Eigen::Index i = 0; i < outputs; ++i) {
      if (i > 0) cur.expect(", ");
      cur.expect("abs(" + cmd_var(outputs, i) + " - " + gain_var(outputs, i) + ")");
    }
    cur.expect(")");
    sh.norm = Norm::Linf;
  } else {
    cur.expect("(");
    for (Eigen::Index i = 0; i < outputs; ++i) {
      if (i > 0) cur.expect(" + ");
      cur.expect("(" + cmd_var(outputs, i) + " - " + gain_var(outputs, i) + ")**2");
    }
    cur.expect(")**0.5");
    sh.norm = Norm::L2;
  }
  cur.expect(" > ");
  sh.lambda = cur.number();
  cur.expect(":\n");

  cur.expect("        return ");
  for (Eigen::Index i = 0; i < outputs; ++i) {
    if (i > 0) cur.expect(", ");
    cur.expect(gain_var(outputs, i));
  }
  cur.expect("\n    return ");
  for (Eigen::Index i = 0; i < outputs; ++i) {
    if (i > 0) cur.expect(", ");
    cur.expect(cmd_var(outputs, i));
  }
  cur.expect("\n");

  if (cur.try_consume("# params: ")) {
    const size_t start = cur.pos;
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    try {
      const nlohmann::json j = nlohmann::json::parse(text.substr(start, end - start));
      if (j.contains("norm")) sh.norm = norm_from_name(j["norm"].get<std::string>());
      if (j.contains("provenance")) {
        const auto& p = j["provenance"];
        sh.provenance.env = p.value("env", std::string{});
        sh.provenance.seed = p.value("seed", uint64_t{0});
        sh.provenance.moas_horizon = p.value("moas_horizon", long{-1});
      }
    } catch (const nlohmann::json::exception&) {
      cur.fail("malformed parameter block");
    }
  }
  return sh;
}

std::string shield_to_json(const Shield& sh) { return shield_json(sh).dump(); }

Shield shield_from_json(const std::string& json_text) {
  try {
    return shield_from(nlohmann::json::parse(json_text));
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("shield_from_json: ") + e.what());
  }
}

}  // namespace shieldsynth
