#include <opaq/model.hpp>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace opaq::model {

namespace {

const std::set<std::string> kKeywords = {
    "pta",   "params", "clocks",    "loc",  "edge", "init",
    "private", "final", "urgent", "invariant", "when", "act",  "reset"};

struct Token {
  enum Kind { Id, Number, Op, End } kind = End;
  std::string text;
  Rational value{0};
  std::size_t column = 0;
};

class LineLexer {
 public:
  LineLexer(const std::string& line, int line_no) : line_(line), line_no_(line_no) {
    tokenize();
  }

  const Token& peek() const { return tokens_[pos_]; }
  Token next() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }
  bool at_end() const { return peek().kind == Token::End; }

  [[noreturn]] void fail(const std::string& msg, std::size_t column) const {
    std::ostringstream os;
    os << "line " << line_no_ << ", column " << column + 1 << ": " << msg;
    throw ModelError(os.str());
  }
  [[noreturn]] void fail_here(const std::string& msg) const { fail(msg, peek().column); }

  std::string expect_id(const std::string& what) {
    if (peek().kind != Token::Id) fail_here("expected " + what);
    return next().text;
  }
  void expect_op(const std::string& op) {
    if (peek().kind != Token::Op || peek().text != op)
      fail_here("expected '" + op + "'");
    next();
  }
  bool accept_op(const std::string& op) {
    if (peek().kind == Token::Op && peek().text == op) {
      next();
      return true;
    }
    return false;
  }

 private:
  void tokenize() {
    std::size_t i = 0;
    const std::string& s = line_;
    auto is_id_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto is_id_char = [&](char c) { return is_id_start(c) || std::isdigit(static_cast<unsigned char>(c)); };
    while (i < s.size()) {
      char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      std::size_t col = i;
      if (is_id_start(c)) {
        std::size_t j = i;
        while (j < s.size() && is_id_char(s[j])) ++j;
        tokens_.push_back({Token::Id, s.substr(i, j - i), 0, col});
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        std::string text = s.substr(i, j - i);
        // Rational literal "n/d" (no spaces) extends the integer grammar and
        // keeps substituted models renderable and re-parseable.
        if (j + 1 < s.size() && s[j] == '/' &&
            std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
          std::size_t k = j + 1;
          while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
          text = s.substr(i, k - i);
          j = k;
        }
        auto v = rat_from_string(text);
        if (!v) fail("malformed number '" + text + "'", col);
        tokens_.push_back({Token::Number, text, *v, col});
        i = j;
        continue;
      }
      auto two = s.substr(i, 2);
      if (two == "<=" || two == ">=" || two == "->" || two == "&&") {
        tokens_.push_back({Token::Op, two, 0, col});
        i += 2;
        continue;
      }
      if (c == '<' || c == '>' || c == '=' || c == '+' || c == '-' || c == '*') {
        tokens_.push_back({Token::Op, std::string(1, c), 0, col});
        ++i;
        continue;
      }
      fail(std::string("unexpected character '") + c + "'", col);
    }
    tokens_.push_back({Token::End, "", 0, s.size()});
  }

  std::string line_;
  int line_no_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

struct ParseContext {
  PTA pta;
  bool saw_pta = false;
  bool saw_params = false;
  bool saw_clocks = false;
  bool saw_loc = false;
  bool saw_edge = false;
  std::set<std::string> names;  // params, clocks, locations share a namespace
};

void check_fresh_name(ParseContext& ctx, LineLexer& lex, const std::string& name) {
  if (kKeywords.count(name)) lex.fail_here("'" + name + "' is a reserved word");
  if (ctx.names.count(name)) lex.fail_here("duplicate identifier '" + name + "'");
  ctx.names.insert(name);
}

Rel parse_rel(LineLexer& lex) {
  const Token& t = lex.peek();
  if (t.kind == Token::Op) {
    if (t.text == "<") return lex.next(), Rel::Lt;
    if (t.text == "<=") return lex.next(), Rel::Le;
    if (t.text == "=") return lex.next(), Rel::Eq;
    if (t.text == ">=") return lex.next(), Rel::Ge;
    if (t.text == ">") return lex.next(), Rel::Gt;
  }
  lex.fail_here("expected a comparison operator");
}

LinearTerm parse_linear_term(const PTA& pta, LineLexer& lex) {
  LinearTerm term;
  bool first = true;
  while (true) {
    Rational sign = 1;
    if (lex.accept_op("-"))
      sign = -1;
    else if (!first)
      lex.expect_op("+");
    else
      lex.accept_op("+");
    const Token& t = lex.peek();
    if (t.kind == Token::Number) {
      Rational value = lex.next().value;
      if (lex.accept_op("*")) {
        std::string id = lex.expect_id("a parameter after '*'");
        if (!pta.is_param(id)) lex.fail_here("'" + id + "' is not a parameter");
        term.coeffs[id] += sign * value;
      } else {
        term.constant += sign * value;
      }
    } else if (t.kind == Token::Id) {
      std::string id = lex.expect_id("a parameter");
      if (!pta.is_param(id)) lex.fail_here("'" + id + "' is not a parameter");
      term.coeffs[id] += sign;
    } else {
      lex.fail_here("expected a term");
    }
    first = false;
    // Continue only on an explicit +/- joiner.
    const Token& nx = lex.peek();
    if (nx.kind == Token::Op && (nx.text == "+" || nx.text == "-"))
      continue;
    break;
  }
  for (auto it = term.coeffs.begin(); it != term.coeffs.end();)
    it = it->second == 0 ? term.coeffs.erase(it) : std::next(it);
  return term;
}

Ineq parse_ineq(const PTA& pta, LineLexer& lex) {
  Ineq ineq;
  const Token& t = lex.peek();
  if (t.kind == Token::Number) {
    ineq.lhs_kind = AtomKind::Int;
    ineq.lhs_value = lex.next().value;
  } else if (t.kind == Token::Id) {
    std::string id = lex.expect_id("a clock, parameter, or integer");
    if (pta.is_clock(id))
      ineq.lhs_kind = AtomKind::Clock;
    else if (pta.is_param(id))
      ineq.lhs_kind = AtomKind::Param;
    else
      lex.fail_here("unknown identifier '" + id + "'");
    ineq.lhs_name = id;
  } else {
    lex.fail_here("expected a clock, parameter, or integer");
  }
  ineq.rel = parse_rel(lex);
  ineq.rhs = parse_linear_term(pta, lex);
  return ineq;
}

Guard parse_guard(const PTA& pta, LineLexer& lex) {
  Guard guard;
  guard.push_back(parse_ineq(pta, lex));
  while (lex.accept_op("&&")) guard.push_back(parse_ineq(pta, lex));
  return guard;
}

void parse_loc_line(ParseContext& ctx, LineLexer& lex) {
  if (ctx.saw_edge) lex.fail_here("locations must be declared before edges");
  ctx.saw_loc = true;
  Location loc;
  loc.name = lex.expect_id("a location name");
  check_fresh_name(ctx, lex, loc.name);
  while (!lex.at_end()) {
    std::string flag = lex.expect_id("a location attribute");
    if (flag == "init")
      loc.is_init = true;
    else if (flag == "private")
      loc.is_private = true;
    else if (flag == "final")
      loc.is_final = true;
    else if (flag == "urgent")
      loc.is_urgent = true;
    else if (flag == "invariant") {
      loc.invariant = parse_guard(ctx.pta, lex);
      break;
    } else {
      lex.fail_here("unknown location attribute '" + flag + "'");
    }
  }
  if (!lex.at_end()) lex.fail_here("trailing tokens after location");
  ctx.pta.locations.push_back(std::move(loc));
}

void parse_edge_line(ParseContext& ctx, LineLexer& lex) {
  ctx.saw_edge = true;
  Edge edge;
  edge.source = lex.expect_id("a source location");
  if (!ctx.pta.has_location(edge.source))
    lex.fail_here("unknown location '" + edge.source + "'");
  lex.expect_op("->");
  edge.target = lex.expect_id("a target location");
  if (!ctx.pta.has_location(edge.target))
    lex.fail_here("unknown location '" + edge.target + "'");
  while (!lex.at_end()) {
    std::string word = lex.expect_id("'when', 'act', or 'reset'");
    if (word == "when") {
      edge.guard = parse_guard(ctx.pta, lex);
    } else if (word == "act") {
      std::string act = lex.expect_id("an action name");
      if (kKeywords.count(act)) lex.fail_here("'" + act + "' is a reserved word");
      edge.action = act;
    } else if (word == "reset") {
      while (lex.peek().kind == Token::Id && !kKeywords.count(lex.peek().text)) {
        std::string clk = lex.next().text;
        if (!ctx.pta.is_clock(clk)) lex.fail_here("'" + clk + "' is not a clock");
        if (std::find(edge.resets.begin(), edge.resets.end(), clk) != edge.resets.end())
          lex.fail_here("duplicate reset of '" + clk + "'");
        edge.resets.push_back(clk);
      }
      if (edge.resets.empty()) lex.fail_here("expected at least one clock to reset");
    } else {
      lex.fail_here("unknown edge attribute '" + word + "'");
    }
  }
  ctx.pta.edges.push_back(std::move(edge));
}

}  // namespace

const Location& PTA::location(const std::string& name) const {
  for (const auto& l : locations)
    if (l.name == name) return l;
  throw ModelError("unknown location '" + name + "'");
}

Location& PTA::location(const std::string& name) {
  for (auto& l : locations)
    if (l.name == name) return l;
  throw ModelError("unknown location '" + name + "'");
}

bool PTA::has_location(const std::string& name) const {
  return std::any_of(locations.begin(), locations.end(),
                     [&](const Location& l) { return l.name == name; });
}

const Location& PTA::initial() const {
  for (const auto& l : locations)
    if (l.is_init) return l;
  throw ModelError("model has no initial location");
}

const Location& PTA::final() const {
  for (const auto& l : locations)
    if (l.is_final) return l;
  throw ModelError("model has no final location");
}

const Location* PTA::private_location() const {
  for (const auto& l : locations)
    if (l.is_private) return &l;
  return nullptr;
}

bool PTA::is_clock(const std::string& name) const {
  return std::find(clocks.begin(), clocks.end(), name) != clocks.end();
}

bool PTA::is_param(const std::string& name) const {
  return std::find(params.begin(), params.end(), name) != params.end();
}

PTA parse_model(const std::string& text) {
  ParseContext ctx;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    LineLexer lex(raw, line_no);
    if (lex.at_end()) continue;
    std::string head = lex.expect_id("a directive");
    if (head == "pta") {
      if (ctx.saw_pta) lex.fail_here("duplicate 'pta' line");
      ctx.saw_pta = true;
      ctx.pta.name = lex.expect_id("a model name");
      if (kKeywords.count(ctx.pta.name)) lex.fail_here("reserved model name");
      if (!lex.at_end()) lex.fail_here("trailing tokens after model name");
      continue;
    }
    if (!ctx.saw_pta) lex.fail_here("the first directive must be 'pta'");
    if (head == "params") {
      if (ctx.saw_params) lex.fail_here("duplicate 'params' line");
      if (ctx.saw_loc || ctx.saw_edge)
        lex.fail_here("'params' must precede locations and edges");
      ctx.saw_params = true;
      while (lex.peek().kind == Token::Id) {
        std::string p = lex.next().text;
        check_fresh_name(ctx, lex, p);
        ctx.pta.params.push_back(p);
      }
      if (!lex.at_end()) lex.fail_here("expected parameter names");
      if (ctx.pta.params.empty()) lex.fail_here("'params' declares no names");
    } else if (head == "clocks") {
      if (ctx.saw_clocks) lex.fail_here("duplicate 'clocks' line");
      if (ctx.saw_loc || ctx.saw_edge)
        lex.fail_here("'clocks' must precede locations and edges");
      ctx.saw_clocks = true;
      while (lex.peek().kind == Token::Id) {
        std::string c = lex.next().text;
        check_fresh_name(ctx, lex, c);
        ctx.pta.clocks.push_back(c);
      }
      if (!lex.at_end()) lex.fail_here("expected clock names");
      if (ctx.pta.clocks.empty()) lex.fail_here("'clocks' declares no names");
    } else if (head == "loc") {
      parse_loc_line(ctx, lex);
    } else if (head == "edge") {
      parse_edge_line(ctx, lex);
    } else {
      lex.fail_here("unknown directive '" + head + "'");
    }
  }
  if (!ctx.saw_pta) throw ModelError("empty model: missing 'pta' line");
  int inits = 0, finals = 0, privates = 0;
  for (const auto& l : ctx.pta.locations) {
    inits += l.is_init ? 1 : 0;
    finals += l.is_final ? 1 : 0;
    privates += l.is_private ? 1 : 0;
  }
  if (inits != 1) throw ModelError("model must have exactly one initial location");
  if (finals != 1) throw ModelError("model must have exactly one final location");
  if (privates > 1) throw ModelError("model must have at most one private location");
  return ctx.pta;
}

std::string rel_to_string(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

namespace {

std::string render_linear_term(const LinearTerm& t) {
  std::string out;
  for (const auto& [p, c] : t.coeffs) {
    if (c == 0) continue;
    Rational k = c < 0 ? Rational(-c) : c;
    std::string piece = (k == 1) ? p : rat_to_string(k) + "*" + p;
    if (out.empty())
      out = (c < 0 ? "-" : "") + piece;
    else
      out += (c < 0 ? " - " : " + ") + piece;
  }
  if (t.constant != 0 || out.empty()) {
    if (out.empty())
      out = rat_to_string(t.constant);
    else if (t.constant < 0)
      out += " - " + rat_to_string(-t.constant);
    else
      out += " + " + rat_to_string(t.constant);
  }
  return out;
}

std::string render_ineq(const Ineq& q) {
  std::string lhs = q.lhs_kind == AtomKind::Int ? rat_to_string(q.lhs_value) : q.lhs_name;
  return lhs + " " + rel_to_string(q.rel) + " " + render_linear_term(q.rhs);
}

}  // namespace

std::string render_guard(const Guard& guard) {
  std::string out;
  for (const auto& q : guard) {
    if (!out.empty()) out += " && ";
    out += render_ineq(q);
  }
  return out;
}

std::string render_model(const PTA& pta) {
  std::ostringstream os;
  os << "pta " << pta.name << "\n";
  if (!pta.params.empty()) {
    os << "params";
    for (const auto& p : pta.params) os << " " << p;
    os << "\n";
  }
  if (!pta.clocks.empty()) {
    os << "clocks";
    for (const auto& c : pta.clocks) os << " " << c;
    os << "\n";
  }
  for (const auto& l : pta.locations) {
    os << "loc " << l.name;
    if (l.is_init) os << " init";
    if (l.is_private) os << " private";
    if (l.is_final) os << " final";
    if (l.is_urgent) os << " urgent";
    if (!l.invariant.empty()) os << " invariant " << render_guard(l.invariant);
    os << "\n";
  }
  for (const auto& e : pta.edges) {
    os << "edge " << e.source << " -> " << e.target;
    if (!e.guard.empty()) os << " when " << render_guard(e.guard);
    if (!e.action.empty()) os << " act " << e.action;
    if (!e.resets.empty()) {
      os << " reset";
      for (const auto& c : e.resets) os << " " << c;
    }
    os << "\n";
  }
  return os.str();
}

Diagnostics validate(const PTA& pta) {
  Diagnostics d;
  d.num_clocks = static_cast<int>(pta.clocks.size());
  d.num_params = static_cast<int>(pta.params.size());
  std::set<std::string> parametric;
  auto scan_guard = [&](const Guard& g) {
    for (const auto& q : g) {
      if (q.lhs_kind == AtomKind::Clock && !q.rhs.coeffs.empty())
        parametric.insert(q.lhs_name);
    }
  };
  for (const auto& l : pta.locations) scan_guard(l.invariant);
  for (const auto& e : pta.edges) scan_guard(e.guard);
  for (const auto& c : pta.clocks)
    if (parametric.count(c)) d.parametric_clocks.push_back(c);
  d.class_parametric_clocks = static_cast<int>(d.parametric_clocks.size());
  d.class_nonparametric_clocks = d.num_clocks - d.class_parametric_clocks;
  d.class_params = d.num_params;
  d.reset_free = std::all_of(pta.edges.begin(), pta.edges.end(),
                             [](const Edge& e) { return e.resets.empty(); });
  d.exact_pet_available = d.num_clocks == 1;
  if (d.num_clocks != 1)
    d.warnings.push_back(
        "exact duration-set computation needs exactly one clock; only the "
        "two-clock semi-algorithm applies");
  if (pta.private_location() == nullptr)
    d.warnings.push_back("no private location: opacity analyses are degenerate");
  return d;
}

PTA substitute(const PTA& pta, const std::map<std::string, Rational>& valuation) {
  for (const auto& [p, v] : valuation) {
    if (!pta.is_param(p)) throw ModelError("valuation binds unknown parameter '" + p + "'");
    if (v < 0) throw ModelError("parameter '" + p + "' bound to a negative value");
  }
  for (const auto& p : pta.params)
    if (!valuation.count(p)) throw ModelError("valuation misses parameter '" + p + "'");

  PTA out = pta;
  out.params.clear();
  auto subst_guard = [&](Guard& g) {
    for (auto& q : g) {
      if (q.lhs_kind == AtomKind::Param) {
        q.lhs_kind = AtomKind::Int;
        q.lhs_value = valuation.at(q.lhs_name);
        q.lhs_name.clear();
      }
      for (const auto& [p, c] : q.rhs.coeffs) q.rhs.constant += c * valuation.at(p);
      q.rhs.coeffs.clear();
    }
  };
  for (auto& l : out.locations) subst_guard(l.invariant);
  for (auto& e : out.edges) subst_guard(e.guard);
  return out;
}

std::vector<geo::Row> guard_to_rows(const Guard& guard) {
  std::vector<geo::Row> rows;
  rows.reserve(guard.size());
  for (const auto& q : guard) {
    geo::Row row;
    // lhs - rhs REL 0, written as sum(coeffs) REL const.
    if (q.lhs_kind != AtomKind::Int) row.coeffs[q.lhs_name] += 1;
    for (const auto& [p, c] : q.rhs.coeffs) row.coeffs[p] -= c;
    row.constant = q.rhs.constant - (q.lhs_kind == AtomKind::Int ? q.lhs_value : Rational(0));
    Rel rel = q.rel;
    if (rel == Rel::Ge || rel == Rel::Gt) {
      for (auto& [v, c] : row.coeffs) c = -c;
      row.constant = -row.constant;
      rel = rel == Rel::Ge ? Rel::Le : Rel::Lt;
    }
    switch (rel) {
      case Rel::Lt: row.rel = geo::Rel::Lt; break;
      case Rel::Le: row.rel = geo::Rel::Le; break;
      case Rel::Eq: row.rel = geo::Rel::Eq; break;
      default: break;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, Rational> parse_valuation(const std::string& text) {
  std::map<std::string, Rational> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    std::string part = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    auto eq = part.find('=');
    if (eq == std::string::npos)
      throw ModelError("malformed valuation entry '" + part + "' (want name=value)");
    std::string name = part.substr(0, eq);
    std::string value = part.substr(eq + 1);
    auto strip = [](std::string& s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    strip(name);
    strip(value);
    auto v = rat_from_string(value);
    if (name.empty() || !v)
      throw ModelError("malformed valuation entry '" + part + "' (want name=value)");
    if (out.count(name)) throw ModelError("duplicate valuation for '" + name + "'");
    out[name] = *v;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ModelError("empty valuation");
  return out;
}

}  // namespace opaq::model
