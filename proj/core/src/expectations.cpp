#include <algorithm>
#include <regex>
#include <sstream>

#include "envmorph/bench.hpp"
#include "envmorph/errors.hpp"

namespace envmorph {
namespace {

struct Term {
  bool overall = false;
  std::string engine;
  std::string combo;  // empty for overall
};

struct Ref {
  std::string engine;
  std::string combo;
};

Term parse_term(const std::string& text, const std::string& line) {
  static const std::regex cell_re(R"(^\s*cell\s*\(\s*([^,\s()]+)\s*,\s*([^,\s()]+)\s*\)\s*$)");
  static const std::regex overall_re(R"(^\s*overall\s*\(\s*([^,\s()]+)\s*\)\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, cell_re)) return {false, m[1], m[2]};
  if (std::regex_match(text, m, overall_re)) return {true, m[1], ""};
  throw InvalidExpectation("cannot parse term '" + text + "' in expectation: " + line);
}

double lookup(const BenchmarkResult& r, const Ref& ref, bool overall) {
  return overall ? r.overall.at(ref.engine) : r.cell(ref.engine, ref.combo).mean;
}

std::string describe(const Ref& ref, bool overall, double v) {
  std::ostringstream out;
  out << (overall ? "overall(" + ref.engine + ")" : "cell(" + ref.engine + ", " + ref.combo + ")") << '=' << v;
  return out.str();
}

void check_refs(const BenchmarkResult& r, const Term& t, const std::string& line) {
  if (t.engine != "*" && r.cells.find(t.engine) == r.cells.end()) {
    throw InvalidExpectation("unknown engine '" + t.engine + "' in expectation: " + line);
  }
  if (!t.overall && t.combo != "*" && std::find(r.combos.begin(), r.combos.end(), t.combo) == r.combos.end()) {
    throw InvalidExpectation("unknown axis combination '" + t.combo + "' in expectation: " + line);
  }
}

ExpectationVerdict evaluate(const BenchmarkResult& r, const std::string& line) {
  static const std::regex op_re(R"(^(.*?)(<=|<)(.*)$)");
  std::smatch m;
  if (!std::regex_match(line, m, op_re)) throw InvalidExpectation("expected '<' or '<=' in expectation: " + line);
  const Term lhs = parse_term(m[1], line);
  const Term rhs = parse_term(m[3], line);
  const bool strict = m[2] == "<";
  check_refs(r, lhs, line);
  check_refs(r, rhs, line);

  std::vector<std::string> combos{""};
  if ((!lhs.overall && lhs.combo == "*") || (!rhs.overall && rhs.combo == "*")) combos = r.combos;
  auto engines_for = [&](const std::string& e) {
    return e == "*" ? r.engines : std::vector<std::string>{e};
  };

  ExpectationVerdict v{line, true, ""};
  std::size_t comparisons = 0;
  for (const auto& combo : combos) {
    for (const auto& le : engines_for(lhs.engine)) {
      for (const auto& re : engines_for(rhs.engine)) {
        if ((lhs.engine == "*" || rhs.engine == "*") && le == re) continue;
        const Ref a{le, lhs.combo == "*" ? combo : lhs.combo};
        const Ref b{re, rhs.combo == "*" ? combo : rhs.combo};
        const double x = lookup(r, a, lhs.overall);
        const double y = lookup(r, b, rhs.overall);
        ++comparisons;
        const bool ok = strict ? x < y : x <= y;
        if (!ok) {
          v.passed = false;
          if (!v.detail.empty()) v.detail += "; ";
          v.detail += describe(a, lhs.overall, x) + (strict ? " !< " : " !<= ") + describe(b, rhs.overall, y);
        }
      }
    }
  }
  if (comparisons == 0) throw InvalidExpectation("expectation compares nothing: " + line);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ExpectationVerdict> check_orderings(const BenchmarkResult& result, const std::string& expectations) {
  std::vector<ExpectationVerdict> out;
  std::istringstream in(expectations);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    const auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    out.push_back(evaluate(result, line));
  }
  return out;
}

}  // namespace envmorph
