#include "finmart/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <utility>

#include "finmart/errors.hpp"

namespace finmart {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

struct Line {
  int no = 0;  // 1-based
  std::string raw;
  std::vector<Token> tokens;
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  int no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string raw = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++no;
    std::size_t hash = raw.find('#');
    std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
    Line line;
    line.no = no;
    line.raw = raw;
    std::size_t i = 0;
    while (i < body.size()) {
      if (std::isspace(static_cast<unsigned char>(body[i]))) {
        ++i;
        continue;
      }
      std::size_t start = i;
      while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
      line.tokens.push_back({body.substr(start, i - start), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

Rat parse_rat_at(const std::string& text, int line, int col) {
  try {
    return parse_rat(text);
  } catch (const Error& e) {
    throw ParseError(e.what(), line, col);
  }
}

int parse_int_at(const std::string& text, int line, int col) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
      }))
    throw ParseError("expected a nonnegative integer, got '" + text + "'", line, col);
  return std::stoi(text);
}

// Character-level recursive descent for payoff expressions.
struct ExprParser {
  const std::string& s;
  std::size_t i = 0;
  int line = 0;
  int col0 = 0;  // column of s[0] in the original line

  int col() const { return col0 + static_cast<int>(i); }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col()); }

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i;
  }
  bool ident_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }
  std::string ident() {
    skip_ws();
    std::size_t start = i;
    while (i < s.size() && ident_char(s[i])) ++i;
    if (i == start) fail("expected a name");
    return s.substr(start, i - start);
  }

  ClaimExprPtr expr() {
    ClaimExprPtr left = term();
    while (true) {
      char c = peek();
      if (c != '+' && c != '-') return left;
      ++i;
      auto node = std::make_shared<ClaimExpr>();
      node->kind = c == '+' ? ClaimExpr::Kind::Add : ClaimExpr::Kind::Sub;
      node->lhs = left;
      node->rhs = term();
      left = node;
    }
  }

  ClaimExprPtr term() {
    ClaimExprPtr left = factor();
    while (true) {
      char c = peek();
      if (c != '*' && c != '/') return left;
      ++i;
      auto node = std::make_shared<ClaimExpr>();
      node->kind = c == '*' ? ClaimExpr::Kind::Mul : ClaimExpr::Kind::Div;
      node->lhs = left;
      node->rhs = factor();
      left = node;
    }
  }

  ClaimExprPtr factor() {
    char c = peek();
    if (c == '(') {
      ++i;
      ClaimExprPtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      int at = col();
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '/' ||
                              s[i] == '.'))
        ++i;
      auto node = std::make_shared<ClaimExpr>();
      node->kind = ClaimExpr::Kind::Number;
      node->number = parse_rat_at(s.substr(start, i - start), line, at);
      return node;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string word = ident();
      if (word == "S") {
        auto node = std::make_shared<ClaimExpr>();
        node->kind = ClaimExpr::Kind::Price;
        node->asset = ident();
        expect('[');
        if (peek() != 'T') fail("expected 'T'");
        ++i;
        expect(']');
        return node;
      }
      if (word == "max" || word == "min") {
        auto node = std::make_shared<ClaimExpr>();
        node->kind = word == "max" ? ClaimExpr::Kind::Max : ClaimExpr::Kind::Min;
        expect('(');
        node->lhs = expr();
        expect(',');
        node->rhs = expr();
        expect(')');
        return node;
      }
      fail("unknown word '" + word + "' (expected S, max, or min)");
    }
    fail("expected a number, S name[T], max(..), min(..), or (..)");
  }
};

struct ScenarioParser {
  std::vector<Line> lines;
  std::size_t at = 0;

  const Line& need(const std::string& what) {
    if (at >= lines.size()) {
      int last = lines.empty() ? 1 : lines.back().no + 1;
      throw ParseError("expected " + what, last, 1);
    }
    return lines[at];
  }
  const Line* peek() const { return at < lines.size() ? &lines[at] : nullptr; }

  // A directive line starting with `head` and exactly n tokens.
  const Line& directive(const std::string& head, std::size_t n, const std::string& shape) {
    const Line& line = need("'" + shape + "'");
    if (line.tokens[0].text != head)
      throw ParseError("expected '" + shape + "'", line.no, line.tokens[0].column);
    if (line.tokens.size() != n)
      throw ParseError("expected '" + shape + "'", line.no,
                       line.tokens.back().column);
    ++at;
    return line;
  }

  std::vector<std::vector<Rat>> value_rows(int horizon, int n_states) {
    std::vector<std::vector<Rat>> rows;
    for (int t = 0; t <= horizon; ++t) {
      const Line& line = need("row 't" + std::to_string(t) + "' with " +
                              std::to_string(n_states) + " values");
      if (line.tokens[0].text != "t" + std::to_string(t))
        throw ParseError("expected row 't" + std::to_string(t) + "'", line.no,
                         line.tokens[0].column);
      if (static_cast<int>(line.tokens.size()) != n_states + 1)
        throw ParseError("expected " + std::to_string(n_states) + " values after 't" +
                             std::to_string(t) + "'",
                         line.no, line.tokens.back().column);
      std::vector<Rat> row;
      for (int s = 0; s < n_states; ++s)
        row.push_back(parse_rat_at(line.tokens[s + 1].text, line.no,
                                   line.tokens[s + 1].column));
      rows.push_back(std::move(row));
      ++at;
    }
    return rows;
  }
};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  ScenarioParser p;
  p.lines = split_lines(text);
  Scenario s;

  const Line& head = p.need("'scenario v1'");
  if (head.tokens[0].text != "scenario" || head.tokens.size() != 2 ||
      head.tokens[1].text != "v1")
    throw ParseError("expected 'scenario v1'", head.no, head.tokens[0].column);
  ++p.at;

  const Line& mode = p.need("'mode rational' or 'mode float tol <r>'");
  if (mode.tokens[0].text != "mode")
    throw ParseError("expected a 'mode' directive", mode.no, mode.tokens[0].column);
  if (mode.tokens.size() == 2 && mode.tokens[1].text == "rational") {
    s.rational_mode = true;
  } else if (mode.tokens.size() == 4 && mode.tokens[1].text == "float" &&
             mode.tokens[2].text == "tol") {
    s.rational_mode = false;
    s.tol = parse_rat_at(mode.tokens[3].text, mode.no, mode.tokens[3].column);
    if (sgn(s.tol) < 0)
      throw ParseError("tolerance must be nonnegative", mode.no, mode.tokens[3].column);
  } else {
    throw ParseError("expected 'mode rational' or 'mode float tol <r>'", mode.no,
                     mode.tokens[0].column);
  }
  ++p.at;

  const Line& hor = p.directive("horizon", 2, "horizon <n>");
  s.horizon = parse_int_at(hor.tokens[1].text, hor.no, hor.tokens[1].column);

  const Line& st = p.directive("states", 2, "states <n>");
  int n_states = parse_int_at(st.tokens[1].text, st.no, st.tokens[1].column);
  if (n_states < 1)
    throw ParseError("need at least one state", st.no, st.tokens[1].column);

  for (int k = 0; k < n_states; ++k) {
    const Line& line = p.directive("state", 3, "state <id> <probability>");
    const std::string& id = line.tokens[1].text;
    if (std::find(s.space.atoms.begin(), s.space.atoms.end(), id) != s.space.atoms.end())
      throw ParseError("duplicate state id '" + id + "'", line.no, line.tokens[1].column);
    s.space.atoms.push_back(id);
    s.space.prob.push_back(parse_rat_at(line.tokens[2].text, line.no, line.tokens[2].column));
  }

  const Line& num = p.directive("numeraire", 2, "numeraire <asset>");
  s.numeraire = num.tokens[1].text;
  int numeraire_line = num.no;
  int numeraire_col = num.tokens[1].column;

  std::vector<std::vector<std::vector<Rat>>> per_asset;  // [asset][t][state]
  while (p.peek() && p.peek()->tokens[0].text == "asset") {
    const Line& line = p.directive("asset", 2, "asset <name>");
    const std::string& name = line.tokens[1].text;
    if (std::find(s.asset_names.begin(), s.asset_names.end(), name) != s.asset_names.end())
      throw ParseError("duplicate asset '" + name + "'", line.no, line.tokens[1].column);
    s.asset_names.push_back(name);
    per_asset.push_back(p.value_rows(s.horizon, n_states));
  }
  if (s.asset_names.empty()) {
    const Line* next = p.peek();
    int line_no = next ? next->no : numeraire_line + 1;
    throw ParseError("expected at least one 'asset' block", line_no, 1);
  }
  if (std::find(s.asset_names.begin(), s.asset_names.end(), s.numeraire) ==
      s.asset_names.end())
    throw ParseError("numeraire '" + s.numeraire + "' is not an asset", numeraire_line,
                     numeraire_col);
  s.prices.assign(s.horizon + 1,
                  std::vector<std::vector<Rat>>(s.asset_names.size()));
  for (std::size_t a = 0; a < per_asset.size(); ++a)
    for (int t = 0; t <= s.horizon; ++t) s.prices[t][a] = per_asset[a][t];

  while (p.peek() && p.peek()->tokens[0].text == "signal") {
    const Line& line = p.directive("signal", 4, "signal <name> reveal <t>");
    if (line.tokens[2].text != "reveal")
      throw ParseError("expected 'reveal'", line.no, line.tokens[2].column);
    Signal sig;
    sig.name = line.tokens[1].text;
    for (const Signal& other : s.signals)
      if (other.name == sig.name)
        throw ParseError("duplicate signal '" + sig.name + "'", line.no,
                         line.tokens[1].column);
    sig.reveal_time = parse_int_at(line.tokens[3].text, line.no, line.tokens[3].column);
    if (sig.reveal_time > s.horizon)
      throw ParseError("reveal time beyond the horizon", line.no, line.tokens[3].column);
    sig.values = p.value_rows(s.horizon, n_states);
    s.signals.push_back(std::move(sig));
  }

  while (p.peek() && p.peek()->tokens[0].text == "claim") {
    const Line& line = *p.peek();
    if (line.tokens.size() < 4 || line.tokens[2].text != "=")
      throw ParseError("expected 'claim <name> = <expression>'", line.no,
                       line.tokens[0].column);
    ScenarioClaim claim;
    claim.name = line.tokens[1].text;
    for (const ScenarioClaim& other : s.claims)
      if (other.name == claim.name)
        throw ParseError("duplicate claim '" + claim.name + "'", line.no,
                         line.tokens[1].column);
    std::size_t eq = line.raw.find('=');
    std::string tail = line.raw.substr(eq + 1);
    std::size_t hash = tail.find('#');
    if (hash != std::string::npos) tail = tail.substr(0, hash);
    ExprParser ep{tail, 0, line.no, static_cast<int>(eq) + 2};
    claim.expr = ep.expr();
    if (ep.peek() != '\0') ep.fail("unexpected trailing text");
    s.claims.push_back(std::move(claim));
    ++p.at;
  }

  if (p.peek())
    throw ParseError("unexpected directive '" + p.peek()->tokens[0].text + "'",
                     p.peek()->no, p.peek()->tokens[0].column);
  return s;
}

namespace {

int expr_prec(ClaimExpr::Kind k) {
  switch (k) {
    case ClaimExpr::Kind::Add:
    case ClaimExpr::Kind::Sub:
      return 1;
    case ClaimExpr::Kind::Mul:
    case ClaimExpr::Kind::Div:
      return 2;
    default:
      return 3;
  }
}

void print_expr(const ClaimExprPtr& e, int parent, std::string& out) {
  switch (e->kind) {
    case ClaimExpr::Kind::Number:
      out += format_rat(e->number);
      return;
    case ClaimExpr::Kind::Price:
      out += "S " + e->asset + "[T]";
      return;
    case ClaimExpr::Kind::Max:
    case ClaimExpr::Kind::Min:
      out += e->kind == ClaimExpr::Kind::Max ? "max(" : "min(";
      print_expr(e->lhs, 0, out);
      out += ", ";
      print_expr(e->rhs, 0, out);
      out += ")";
      return;
    default:
      break;
  }
  int prec = expr_prec(e->kind);
  bool parens = prec < parent;
  if (parens) out += "(";
  print_expr(e->lhs, prec, out);
  switch (e->kind) {
    case ClaimExpr::Kind::Add:
      out += " + ";
      break;
    case ClaimExpr::Kind::Sub:
      out += " - ";
      break;
    case ClaimExpr::Kind::Mul:
      out += " * ";
      break;
    default:
      out += " / ";
      break;
  }
  print_expr(e->rhs, prec + 1, out);
  if (parens) out += ")";
}

void emit_rows(std::ostringstream& out, const std::vector<std::vector<Rat>>& rows) {
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out << "  t" << t;
    for (const Rat& v : rows[t]) out << ' ' << format_rat(v);
    out << '\n';
  }
}

}  // namespace

std::string format_claim_expr(const ClaimExprPtr& e) {
  std::string out;
  print_expr(e, 0, out);
  return out;
}

std::string emit_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "scenario v1\n";
  if (s.rational_mode)
    out << "mode rational\n";
  else
    out << "mode float tol " << format_rat(s.tol) << '\n';
  out << "horizon " << s.horizon << '\n';
  out << "states " << s.space.atoms.size() << '\n';
  for (std::size_t k = 0; k < s.space.atoms.size(); ++k)
    out << "state " << s.space.atoms[k] << ' ' << format_rat(s.space.prob[k]) << '\n';
  out << "numeraire " << s.numeraire << '\n';
  for (std::size_t a = 0; a < s.asset_names.size(); ++a) {
    out << "asset " << s.asset_names[a] << '\n';
    std::vector<std::vector<Rat>> rows;
    for (int t = 0; t <= s.horizon; ++t) rows.push_back(s.prices[t][a]);
    emit_rows(out, rows);
  }
  for (const Signal& sig : s.signals) {
    out << "signal " << sig.name << " reveal " << sig.reveal_time << '\n';
    emit_rows(out, sig.values);
  }
  for (const ScenarioClaim& c : s.claims)
    out << "claim " << c.name << " = " << format_claim_expr(c.expr) << '\n';
  return out.str();
}

Market build_market(const Scenario& s) {
  FiniteProbSpace space = make_space(s.space.atoms, s.space.prob);
  int numeraire = static_cast<int>(
      std::find(s.asset_names.begin(), s.asset_names.end(), s.numeraire) -
      s.asset_names.begin());
  Market m = make_market(s.asset_names, s.prices, numeraire, std::move(space));
  if (!s.signals.empty()) m = with_ambient(m, enlarge(m.evolution, s.signals));
  return m;
}

namespace {

Rat eval_expr(const ClaimExprPtr& e, const Scenario& s, int state,
              const std::string& claim_name) {
  switch (e->kind) {
    case ClaimExpr::Kind::Number:
      return e->number;
    case ClaimExpr::Kind::Price: {
      auto it = std::find(s.asset_names.begin(), s.asset_names.end(), e->asset);
      if (it == s.asset_names.end())
        throw BadParams("claim " + claim_name + ": unknown asset '" + e->asset + "'");
      int a = static_cast<int>(it - s.asset_names.begin());
      return s.prices[s.horizon][a][state];
    }
    case ClaimExpr::Kind::Add:
      return eval_expr(e->lhs, s, state, claim_name) + eval_expr(e->rhs, s, state, claim_name);
    case ClaimExpr::Kind::Sub:
      return eval_expr(e->lhs, s, state, claim_name) - eval_expr(e->rhs, s, state, claim_name);
    case ClaimExpr::Kind::Mul:
      return eval_expr(e->lhs, s, state, claim_name) * eval_expr(e->rhs, s, state, claim_name);
    case ClaimExpr::Kind::Div: {
      Rat den = eval_expr(e->rhs, s, state, claim_name);
      if (sgn(den) == 0) throw BadParams("claim " + claim_name + ": division by zero");
      return eval_expr(e->lhs, s, state, claim_name) / den;
    }
    case ClaimExpr::Kind::Max: {
      Rat a = eval_expr(e->lhs, s, state, claim_name);
      Rat b = eval_expr(e->rhs, s, state, claim_name);
      return a > b ? a : b;
    }
    default: {
      Rat a = eval_expr(e->lhs, s, state, claim_name);
      Rat b = eval_expr(e->rhs, s, state, claim_name);
      return a < b ? a : b;
    }
  }
}

}  // namespace

Claim claim_payoff(const Scenario& s, const ScenarioClaim& c) {
  Claim out;
  out.name = c.name;
  for (int state = 0; state < static_cast<int>(s.space.atoms.size()); ++state) {
    Rat v = eval_expr(c.expr, s, state, c.name);
    if (sgn(v) < 0)
      throw ValidationError("claim " + c.name + ": negative payoff in state " +
                            s.space.atoms[state]);
    out.payoff.push_back(std::move(v));
  }
  return out;
}

const ScenarioClaim& find_claim(const Scenario& s, const std::string& name) {
  for (const ScenarioClaim& c : s.claims)
    if (c.name == name) return c;
  throw BadParams("scenario has no claim named '" + name + "'");
}

namespace {

ClaimExprPtr num_expr(const Rat& v) {
  auto e = std::make_shared<ClaimExpr>();
  e->kind = ClaimExpr::Kind::Number;
  e->number = v;
  return e;
}

ClaimExprPtr price_expr(const std::string& asset) {
  auto e = std::make_shared<ClaimExpr>();
  e->kind = ClaimExpr::Kind::Price;
  e->asset = asset;
  return e;
}

ClaimExprPtr bin_expr(ClaimExpr::Kind k, ClaimExprPtr a, ClaimExprPtr b) {
  auto e = std::make_shared<ClaimExpr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ScenarioClaim atm_call(const std::string& asset, const Rat& strike) {
  ScenarioClaim c;
  c.name = "call";
  c.expr = bin_expr(ClaimExpr::Kind::Max,
                    bin_expr(ClaimExpr::Kind::Sub, price_expr(asset), num_expr(strike)),
                    num_expr(Rat(0)));
  return c;
}

// Path scenario over an alphabet of per-period stock factors with constant
// per-period probabilities; the bond grows by 1 + r each period.
Scenario path_scenario(int periods, const std::vector<char>& letters,
                       const std::vector<Rat>& factors, const std::vector<Rat>& probs,
                       const Rat& r) {
  Scenario s;
  s.horizon = periods;
  int k = static_cast<int>(letters.size());
  int n = 1;
  for (int i = 0; i < periods; ++i) n *= k;
  for (int idx = 0; idx < n; ++idx) {
    std::string id;
    Rat prob(1);
    std::vector<int> digits;
    int rem = idx;
    for (int step = 0; step < periods; ++step) {
      digits.push_back(rem % k);
      rem /= k;
    }
    std::reverse(digits.begin(), digits.end());  // most significant step first
    for (int d : digits) {
      id += letters[d];
      prob *= probs[d];
    }
    s.space.atoms.push_back(id);
    s.space.prob.push_back(prob);
  }
  s.numeraire = "bond";
  s.asset_names = {"bond", "stock"};
  s.prices.assign(periods + 1, std::vector<std::vector<Rat>>(2, std::vector<Rat>(n)));
  for (int state = 0; state < n; ++state) {
    Rat bond(1), stock(1);
    s.prices[0][0][state] = bond;
    s.prices[0][1][state] = stock;
    const std::string& id = s.space.atoms[state];
    for (int t = 1; t <= periods; ++t) {
      bond *= Rat(1) + r;
      int d = static_cast<int>(
          std::find(letters.begin(), letters.end(), id[t - 1]) - letters.begin());
      stock *= factors[d];
      s.prices[t][0][state] = bond;
      s.prices[t][1][state] = stock;
    }
  }
  s.claims.push_back(atm_call("stock", Rat(1)));
  return s;
}

}  // namespace

Scenario make_crr_scenario(int periods, const Rat& u, const Rat& d, const Rat& r,
                           const Rat& p) {
  if (periods < 1) throw BadParams("need at least one period");
  if (sgn(p) <= 0 || p >= 1) throw BadParams("up probability must be strictly in (0, 1)");
  if (sgn(d) <= 0 || !(d < u)) throw BadParams("need 0 < d < u");
  if (!(d < Rat(1) + r && Rat(1) + r < u))
    throw BadParams("need d < 1 + r < u, otherwise one asset dominates the other");
  return path_scenario(periods, {'u', 'd'}, {u, d}, {p, Rat(1) - p}, r);
}

Scenario make_trinomial_scenario(int periods) {
  if (periods < 1) throw BadParams("need at least one period");
  return path_scenario(periods, {'u', 'm', 'd'}, {Rat(2), Rat(1), rat(1, 2)},
                       {rat(1, 3), rat(1, 3), rat(1, 3)}, Rat(0));
}

Scenario make_insider_scenario(const Rat& accuracy) {
  if (!(accuracy > rat(1, 2)) || !(accuracy < 1))
    throw BadParams("signal accuracy must be strictly between 1/2 and 1");
  Scenario s;
  s.horizon = 1;
  s.space.atoms = {"ug", "ub", "dg", "db"};
  Rat good = accuracy / 2;        // direction call is right
  Rat bad = (Rat(1) - accuracy) / 2;  // direction call is wrong
  s.space.prob = {good, bad, bad, good};
  s.numeraire = "bond";
  s.asset_names = {"bond", "stock"};
  s.prices.assign(2, std::vector<std::vector<Rat>>(2, std::vector<Rat>(4)));
  for (int state = 0; state < 4; ++state) {
    s.prices[0][0][state] = Rat(1);
    s.prices[1][0][state] = Rat(1);
    s.prices[0][1][state] = Rat(1);
    s.prices[1][1][state] = state < 2 ? Rat(2) : rat(1, 2);
  }
  Signal tip;
  tip.name = "tip";
  tip.reveal_time = 0;
  std::vector<Rat> row = {Rat(1), Rat(0), Rat(1), Rat(0)};  // 1 = up call
  tip.values = {row, row};
  s.signals.push_back(std::move(tip));
  s.claims.push_back(atm_call("stock", Rat(1)));
  return s;
}

}  // namespace finmart
