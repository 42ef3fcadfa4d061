#pragma once

// The .cover text format for bd-cover sequences.
//
//   document      := header level*
//   header        := "cover" IDENT "mode" ("bouquet" | "materialized") ["version" INT]
//   level         := "level" INT "{" (cycle+ | graph) "}"
//   cycle         := "c" INT ["[" INT "]"] ":=" formula ";"
//   formula       := term ("+" term)*
//   term          := [INT | VAR] atom | comprehension
//   atom          := "e" | "c" INT
//   comprehension := "sum" "(" VAR "=" INT ".." (INT | "k") ")" "{" formula "}"
//   graph         := "vertices" INT ";" "edges" [edge ("," edge)*] ";" ["map" INT ("," INT)* ";"]
//   edge          := INT "->" INT
//
// In a bouquet `level L` block, atoms name cycles of level L-1 and the bound
// `k` is k_{L-1} = 2 (1 + sum_i |c_{L-1,i}|). `c1[695]` declares the cycle's
// length, which validation checks against the formula. Bouquet documents
// start at level 1 (level 0 is the bare base vertex); materialized documents
// start at level 0. `#` starts a comment. Integers are unbounded decimals.

#include <cctype>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaoscope/bigint.hpp"
#include "chaoscope/bouquet.hpp"
#include "chaoscope/graph_core.hpp"

namespace chaoscope::dsl {

struct SourceLocation
{
  std::size_t line = 1;
  std::size_t column = 1;

  // Locations are diagnostics only; they never affect structural equality.
  friend bool operator==(const SourceLocation&, const SourceLocation&) { return true; }
};

class DslError : public std::runtime_error
{
public:
  DslError(SourceLocation where, const std::string& message)
    : std::runtime_error(std::to_string(where.line) + ":" + std::to_string(where.column) + ": " + message),
      where_(where)
  {
  }
  SourceLocation where() const { return where_; }

private:
  SourceLocation where_;
};

/// `coefficient` copies of an atom (cycle 0 = e), or j copies when indexed.
struct SimpleTerm
{
  BigInt coefficient = 1;
  bool indexed = false;
  std::size_t cycle = 0;
  SourceLocation where;

  friend bool operator==(const SimpleTerm&, const SimpleTerm&) = default;
};

struct Comprehension
{
  std::string variable;
  BigInt first = 1;
  std::optional<BigInt> last; // empty = "k"
  std::vector<SimpleTerm> body;
  SourceLocation where;

  friend bool operator==(const Comprehension&, const Comprehension&) = default;
};

using FormulaTerm = std::variant<SimpleTerm, Comprehension>;

struct CycleDecl
{
  std::size_t index = 1;
  std::optional<BigInt> declared_length;
  std::vector<FormulaTerm> formula;
  SourceLocation where;

  friend bool operator==(const CycleDecl&, const CycleDecl&) = default;
};

struct GraphBody
{
  std::uint64_t vertex_count = 0;
  std::vector<graph::Edge> edges;
  std::optional<std::vector<graph::VertexId>> map;

  friend bool operator==(const GraphBody&, const GraphBody&) = default;
};

struct LevelBlock
{
  std::size_t level = 0;
  std::vector<CycleDecl> cycles;
  std::optional<GraphBody> graph;
  SourceLocation where;

  friend bool operator==(const LevelBlock&, const LevelBlock&) = default;
};

enum class Mode
{
  Bouquet,
  Materialized,
};

struct CoverDocument
{
  std::string name = "cover";
  Mode mode = Mode::Bouquet;
  std::uint64_t version = 1;
  std::vector<LevelBlock> levels;

  friend bool operator==(const CoverDocument&, const CoverDocument&) = default;
};

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok
{
  Ident,
  Int,
  Assign, // :=
  Arrow,  // ->
  DotDot, // ..
  Plus,
  Semi,
  Comma,
  Eq,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  End,
};

struct Token
{
  Tok kind;
  std::string text;
  SourceLocation where;
};

inline std::vector<Token> lex(std::string_view src)
{
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == '#') {
      while (i < src.size() && src[i] != '\n')
        advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    const SourceLocation at{line, col};
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t n = 0;
      while (i + n < src.size() && std::isdigit(static_cast<unsigned char>(src[i + n])))
        ++n;
      out.push_back({Tok::Int, std::string(src.substr(i, n)), at});
      advance(n);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t n = 0;
      while (i + n < src.size() && (std::isalnum(static_cast<unsigned char>(src[i + n])) || src[i + n] == '_'))
        ++n;
      out.push_back({Tok::Ident, std::string(src.substr(i, n)), at});
      advance(n);
      continue;
    }
    auto two = [&](char a, char b) { return ch == a && i + 1 < src.size() && src[i + 1] == b; };
    Tok kind;
    std::size_t width = 1;
    if (two(':', '=')) {
      kind = Tok::Assign;
      width = 2;
    } else if (two('-', '>')) {
      kind = Tok::Arrow;
      width = 2;
    } else if (two('.', '.')) {
      kind = Tok::DotDot;
      width = 2;
    } else {
      switch (ch) {
      case '+': kind = Tok::Plus; break;
      case ';': kind = Tok::Semi; break;
      case ',': kind = Tok::Comma; break;
      case '=': kind = Tok::Eq; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case '[': kind = Tok::LBracket; break;
      case ']': kind = Tok::RBracket; break;
      default:
        throw DslError(at, std::string("unexpected character '") + ch + "'");
      }
    }
    out.push_back({kind, std::string(src.substr(i, width)), at});
    advance(width);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

inline std::optional<std::size_t> cycle_atom(const std::string& ident)
{
  if (ident.size() < 2 || ident[0] != 'c')
    return std::nullopt;
  for (std::size_t k = 1; k < ident.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(ident[k])))
      return std::nullopt;
  }
  if (ident[1] == '0')
    return std::nullopt;
  return std::stoul(ident.substr(1));
}

class Parser
{
public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  CoverDocument document()
  {
    CoverDocument doc;
    keyword("cover");
    doc.name = expect(Tok::Ident, "document name").text;
    keyword("mode");
    const Token mode = expect(Tok::Ident, "'bouquet' or 'materialized'");
    if (mode.text == "bouquet")
      doc.mode = Mode::Bouquet;
    else if (mode.text == "materialized")
      doc.mode = Mode::Materialized;
    else
      throw DslError(mode.where, "unknown mode '" + mode.text + "'");
    if (peek_ident("version")) {
      ++pos_;
      doc.version = small_int("version");
    }
    while (peek().kind != Tok::End)
      doc.levels.push_back(level());
    return doc;
  }

private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool peek_ident(std::string_view word) const { return peek().kind == Tok::Ident && peek().text == word; }

  const Token& expect(Tok kind, const std::string& what)
  {
    const Token& t = peek();
    if (t.kind != kind)
      throw DslError(t.where, "expected " + what + ", found " + (t.kind == Tok::End ? "end of input" : "'" + t.text + "'"));
    ++pos_;
    return t;
  }

  void keyword(std::string_view word)
  {
    const Token& t = peek();
    if (t.kind != Tok::Ident || t.text != word)
      throw DslError(t.where, "expected '" + std::string(word) + "'");
    ++pos_;
  }

  BigInt integer(const std::string& what) { return parse_decimal(expect(Tok::Int, what).text); }

  std::uint64_t small_int(const std::string& what)
  {
    const Token& t = expect(Tok::Int, what);
    const BigInt v = parse_decimal(t.text);
    if (v > std::numeric_limits<std::uint32_t>::max())
      throw DslError(t.where, what + " is too large");
    return static_cast<std::uint64_t>(v);
  }

  LevelBlock level()
  {
    LevelBlock block;
    block.where = peek().where;
    keyword("level");
    block.level = small_int("level number");
    expect(Tok::LBrace, "'{'");
    if (peek_ident("vertices")) {
      block.graph = graph_body();
    } else {
      do {
        block.cycles.push_back(cycle());
      } while (peek().kind != Tok::RBrace);
    }
    expect(Tok::RBrace, "'}'");
    return block;
  }

  GraphBody graph_body()
  {
    GraphBody g;
    keyword("vertices");
    g.vertex_count = small_int("vertex count");
    expect(Tok::Semi, "';'");
    keyword("edges");
    if (peek().kind != Tok::Semi) {
      do {
        const auto from = static_cast<graph::VertexId>(small_int("vertex id"));
        expect(Tok::Arrow, "'->'");
        const auto to = static_cast<graph::VertexId>(small_int("vertex id"));
        g.edges.push_back({from, to});
      } while (peek().kind == Tok::Comma && (++pos_, true));
    }
    expect(Tok::Semi, "';'");
    if (peek_ident("map")) {
      ++pos_;
      std::vector<graph::VertexId> map;
      do {
        map.push_back(static_cast<graph::VertexId>(small_int("vertex id")));
      } while (peek().kind == Tok::Comma && (++pos_, true));
      expect(Tok::Semi, "';'");
      g.map = std::move(map);
    }
    return g;
  }

  CycleDecl cycle()
  {
    CycleDecl decl;
    decl.where = peek().where;
    const Token& name = expect(Tok::Ident, "cycle name");
    const auto index = cycle_atom(name.text);
    if (!index)
      throw DslError(name.where, "expected a cycle name like c1, found '" + name.text + "'");
    decl.index = *index;
    if (peek().kind == Tok::LBracket) {
      ++pos_;
      decl.declared_length = integer("cycle length");
      expect(Tok::RBracket, "']'");
    }
    expect(Tok::Assign, "':='");
    decl.formula = formula(nullptr);
    expect(Tok::Semi, "';'");
    return decl;
  }

  std::vector<FormulaTerm> formula(const std::string* variable)
  {
    std::vector<FormulaTerm> terms;
    terms.push_back(term(variable));
    while (peek().kind == Tok::Plus) {
      ++pos_;
      terms.push_back(term(variable));
    }
    return terms;
  }

  FormulaTerm term(const std::string* variable)
  {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "sum" && peek(1).kind == Tok::LParen) {
      if (variable)
        throw DslError(t.where, "nested comprehensions are not supported");
      return comprehension();
    }
    SimpleTerm st;
    st.where = t.where;
    if (t.kind == Tok::Int) {
      st.coefficient = integer("coefficient");
    } else if (t.kind == Tok::Ident && variable && t.text == *variable) {
      ++pos_;
      st.indexed = true;
    }
    const Token& a = expect(Tok::Ident, "'e' or a cycle name");
    if (a.text == "e") {
      st.cycle = 0;
    } else if (const auto c = cycle_atom(a.text)) {
      st.cycle = *c;
    } else {
      throw DslError(a.where, "unknown identifier '" + a.text + "'");
    }
    return st;
  }

  FormulaTerm comprehension()
  {
    Comprehension c;
    c.where = peek().where;
    keyword("sum");
    expect(Tok::LParen, "'('");
    const Token& var = expect(Tok::Ident, "comprehension variable");
    if (var.text == "e" || var.text == "k" || var.text == "sum" || cycle_atom(var.text))
      throw DslError(var.where, "'" + var.text + "' cannot be a comprehension variable");
    c.variable = var.text;
    expect(Tok::Eq, "'='");
    c.first = integer("lower bound");
    expect(Tok::DotDot, "'..'");
    if (peek_ident("k"))
      ++pos_;
    else
      c.last = integer("upper bound or 'k'");
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    for (auto& t : formula(&c.variable))
      c.body.push_back(std::get<SimpleTerm>(std::move(t)));
    expect(Tok::RBrace, "'}'");
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

} // namespace detail

/// Parses .cover text. Throws DslError with the location of the first error.
inline CoverDocument parse(std::string_view text) { return detail::Parser(text).document(); }

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string atom_name(std::size_t cycle) { return cycle == 0 ? "e" : "c" + std::to_string(cycle); }

inline std::string format(const SimpleTerm& t, const std::string& variable)
{
  if (t.indexed)
    return variable + " " + atom_name(t.cycle);
  if (t.coefficient == 1)
    return atom_name(t.cycle);
  return to_decimal(t.coefficient) + " " + atom_name(t.cycle);
}

} // namespace detail

/// Canonical text: one cycle per line, comprehensions kept folded.
inline std::string serialize(const CoverDocument& doc)
{
  std::ostringstream os;
  os << "cover " << doc.name << " mode " << (doc.mode == Mode::Bouquet ? "bouquet" : "materialized") << " version "
     << doc.version << "\n";
  for (const auto& block : doc.levels) {
    os << "\nlevel " << block.level << " {\n";
    if (block.graph) {
      const auto& g = *block.graph;
      os << "  vertices " << g.vertex_count << ";\n  edges";
      for (std::size_t k = 0; k < g.edges.size(); ++k)
        os << (k ? ", " : " ") << g.edges[k].from << " -> " << g.edges[k].to;
      os << ";\n";
      if (g.map) {
        os << "  map";
        for (std::size_t k = 0; k < g.map->size(); ++k)
          os << (k ? ", " : " ") << (*g.map)[k];
        os << ";\n";
      }
    }
    for (const auto& c : block.cycles) {
      os << "  c" << c.index;
      if (c.declared_length)
        os << "[" << to_decimal(*c.declared_length) << "]";
      os << " :=";
      for (std::size_t k = 0; k < c.formula.size(); ++k) {
        os << (k ? " + " : " ");
        if (const auto* st = std::get_if<SimpleTerm>(&c.formula[k])) {
          os << detail::format(*st, "");
        } else {
          const auto& comp = std::get<Comprehension>(c.formula[k]);
          os << "sum(" << comp.variable << "=" << to_decimal(comp.first) << ".."
             << (comp.last ? to_decimal(*comp.last) : std::string("k")) << "){ ";
          for (std::size_t b = 0; b < comp.body.size(); ++b)
            os << (b ? " + " : "") << detail::format(comp.body[b], comp.variable);
          os << " }";
        }
      }
      os << ";\n";
    }
    os << "}\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation

struct DslViolation
{
  enum class Kind
  {
    ModeMismatch,
    NonContiguousLevels,
    CycleNumbering,
    UnknownCycle,
    EdgeBoundViolation,
    ZeroCount,
    EmptyRange,
    LengthMismatch,
    DegenerateCycle,
    InvalidVertex,
    MissingMap,
    NotEdgeSurjective,
    NotHomomorphism,
    NotBidirectional,
  };

  Kind kind;
  std::size_t level = 0;
  std::size_t cycle = 0;
  std::string message;
  SourceLocation where;
};

inline std::string to_string(DslViolation::Kind kind)
{
  using K = DslViolation::Kind;
  switch (kind) {
  case K::ModeMismatch: return "ModeMismatch";
  case K::NonContiguousLevels: return "NonContiguousLevels";
  case K::CycleNumbering: return "CycleNumbering";
  case K::UnknownCycle: return "UnknownCycle";
  case K::EdgeBoundViolation: return "EdgeBoundViolation";
  case K::ZeroCount: return "ZeroCount";
  case K::EmptyRange: return "EmptyRange";
  case K::LengthMismatch: return "LengthMismatch";
  case K::DegenerateCycle: return "DegenerateCycle";
  case K::InvalidVertex: return "InvalidVertex";
  case K::MissingMap: return "MissingMap";
  case K::NotEdgeSurjective: return "NotEdgeSurjective";
  case K::NotHomomorphism: return "NotHomomorphism";
  case K::NotBidirectional: return "NotBidirectional";
  }
  return "Unknown";
}

inline std::string describe(const DslViolation& v)
{
  return std::to_string(v.where.line) + ":" + std::to_string(v.where.column) + ": " + to_string(v.kind) +
         " (level " + std::to_string(v.level) + (v.cycle ? ", c" + std::to_string(v.cycle) : std::string()) +
         "): " + v.message;
}

namespace detail {

inline std::size_t first_atom(const FormulaTerm& t)
{
  if (const auto* st = std::get_if<SimpleTerm>(&t))
    return st->cycle;
  return std::get<Comprehension>(t).body.front().cycle;
}

inline std::size_t last_atom(const FormulaTerm& t)
{
  if (const auto* st = std::get_if<SimpleTerm>(&t))
    return st->cycle;
  return std::get<Comprehension>(t).body.back().cycle;
}

inline std::vector<Term> to_terms(const std::vector<FormulaTerm>& formula, const BigInt& k)
{
  std::vector<Term> out;
  for (const auto& ft : formula) {
    if (const auto* st = std::get_if<SimpleTerm>(&ft)) {
      out.push_back(Run{st->cycle, st->coefficient});
      continue;
    }
    const auto& c = std::get<Comprehension>(ft);
    Series s{c.first, c.last ? *c.last : k, {}};
    for (const auto& part : c.body)
      s.body.push_back(SeriesPart{part.cycle, part.coefficient, part.indexed});
    out.push_back(std::move(s));
  }
  return out;
}

class Validator
{
public:
  explicit Validator(const CoverDocument& doc) : doc_(doc) {}

  std::vector<DslViolation> run()
  {
    if (doc_.mode == Mode::Bouquet)
      bouquet();
    else
      materialized();
    return std::move(out_);
  }

  std::vector<std::shared_ptr<const LevelSpec>> specs;

private:
  void add(DslViolation::Kind kind, std::size_t level, std::size_t cycle, std::string message, SourceLocation where)
  {
    out_.push_back({kind, level, cycle, std::move(message), where});
  }

  bool numbering_ok(const LevelBlock& block, std::size_t expected_level)
  {
    bool ok = true;
    if (block.level != expected_level) {
      add(DslViolation::Kind::NonContiguousLevels, block.level, 0,
          "expected level " + std::to_string(expected_level), block.where);
      ok = false;
    }
    return ok;
  }

  void bouquet()
  {
    std::vector<BigInt> lengths; // cycle lengths of the level below
    std::vector<std::vector<std::vector<Term>>> formulas;
    std::vector<std::vector<BigInt>> all_lengths{{}};
    bool structural_ok = true;
    for (std::size_t b = 0; b < doc_.levels.size(); ++b) {
      const LevelBlock& block = doc_.levels[b];
      const std::size_t level = b + 1;
      if (block.graph) {
        add(DslViolation::Kind::ModeMismatch, block.level, 0, "graph body in a bouquet document", block.where);
        structural_ok = false;
        continue;
      }
      if (!numbering_ok(block, level))
        structural_ok = false;
      const BigInt k = k_value_for(lengths);
      std::vector<BigInt> atoms{1};
      atoms.insert(atoms.end(), lengths.begin(), lengths.end());
      std::vector<BigInt> next_lengths;
      std::vector<std::vector<Term>> level_formulas;
      for (std::size_t ci = 0; ci < block.cycles.size(); ++ci) {
        const CycleDecl& c = block.cycles[ci];
        if (c.index != ci + 1) {
          add(DslViolation::Kind::CycleNumbering, level, c.index, "expected c" + std::to_string(ci + 1), c.where);
          structural_ok = false;
        }
        if (!formula_ok(c, level, lengths.size())) {
          structural_ok = false;
          next_lengths.push_back(0);
          level_formulas.emplace_back();
          continue;
        }
        auto terms = to_terms(c.formula, k);
        const PathExpr f(terms, atoms);
        if (c.declared_length && *c.declared_length != f.length())
          add(DslViolation::Kind::LengthMismatch, level, c.index,
              "declared " + to_decimal(*c.declared_length) + ", formula gives " + to_decimal(f.length()), c.where);
        if (f.length() < 2) {
          add(DslViolation::Kind::DegenerateCycle, level, c.index, "a cycle needs at least two edges", c.where);
          structural_ok = false;
        }
        next_lengths.push_back(f.length());
        level_formulas.push_back(std::move(terms));
      }
      formulas.push_back(std::move(level_formulas));
      all_lengths.push_back(next_lengths);
      lengths = std::move(next_lengths);
    }
    if (!structural_ok || !out_.empty())
      return;
    for (std::size_t n = 0; n < all_lengths.size(); ++n) {
      static const std::vector<std::vector<Term>> none;
      specs.push_back(
          std::make_shared<const LevelSpec>(make_level_spec(n, all_lengths[n], n < formulas.size() ? formulas[n] : none)));
    }
  }

  bool formula_ok(const CycleDecl& c, std::size_t level, std::size_t lower_cycles)
  {
    bool ok = true;
    auto check_atom = [&](std::size_t atom, SourceLocation where) {
      if (atom > lower_cycles) {
        add(DslViolation::Kind::UnknownCycle, level, c.index,
            "c" + std::to_string(atom) + " is not a cycle of level " + std::to_string(level - 1), where);
        ok = false;
      }
    };
    for (const auto& ft : c.formula) {
      if (const auto* st = std::get_if<SimpleTerm>(&ft)) {
        check_atom(st->cycle, st->where);
        if (st->coefficient < 1) {
          add(DslViolation::Kind::ZeroCount, level, c.index, "coefficient must be at least 1", st->where);
          ok = false;
        }
        continue;
      }
      const auto& comp = std::get<Comprehension>(ft);
      if (comp.last && *comp.last < comp.first) {
        add(DslViolation::Kind::EmptyRange, level, c.index, "comprehension range is empty", comp.where);
        ok = false;
      }
      for (const auto& part : comp.body) {
        check_atom(part.cycle, part.where);
        if ((part.indexed && comp.first < 1) || (!part.indexed && part.coefficient < 1)) {
          add(DslViolation::Kind::ZeroCount, level, c.index, "comprehension count can be 0", part.where);
          ok = false;
        }
      }
    }
    if (detail::first_atom(c.formula.front()) != 0 || detail::last_atom(c.formula.back()) != 0) {
      add(DslViolation::Kind::EdgeBoundViolation, level, c.index, "formula must begin and end with the base edge e",
          c.where);
      ok = false;
    }
    return ok;
  }

  void materialized()
  {
    graph::GraphPtr below;
    for (std::size_t b = 0; b < doc_.levels.size(); ++b) {
      const LevelBlock& block = doc_.levels[b];
      if (!block.graph) {
        add(DslViolation::Kind::ModeMismatch, block.level, 0, "cycle declarations in a materialized document",
            block.where);
        below.reset();
        continue;
      }
      numbering_ok(block, b);
      const GraphBody& body = *block.graph;
      graph::GraphPtr g;
      try {
        g = std::make_shared<const graph::MaterializedGraph>(body.vertex_count, body.edges);
      } catch (const graph::GraphError& e) {
        add(DslViolation::Kind::InvalidVertex, block.level, 0, e.what(), block.where);
        below.reset();
        continue;
      }
      if (!graph::validate_edge_surjective(*g).empty())
        add(DslViolation::Kind::NotEdgeSurjective, block.level, 0,
            graph::describe(graph::validate_edge_surjective(*g).front()), block.where);
      if (b == 0) {
        if (body.map)
          add(DslViolation::Kind::ModeMismatch, block.level, 0, "level 0 has no level below to map to", block.where);
      } else if (!body.map) {
        add(DslViolation::Kind::MissingMap, block.level, 0, "vertex map to the level below is missing", block.where);
      } else if (below) {
        try {
          const graph::CoverMap cover(g, below, *body.map);
          const auto hom = graph::validate_homomorphism(cover);
          if (!hom.empty()) {
            add(DslViolation::Kind::NotHomomorphism, block.level, 0, graph::describe(hom.front()), block.where);
          } else {
            const auto bd = graph::validate_bidirectional(cover);
            if (!bd.empty())
              add(DslViolation::Kind::NotBidirectional, block.level, 0, graph::describe(bd.front()), block.where);
          }
        } catch (const graph::GraphError& e) {
          add(DslViolation::Kind::InvalidVertex, block.level, 0, e.what(), block.where);
        }
      }
      below = g;
    }
  }

  const CoverDocument& doc_;
  std::vector<DslViolation> out_;
};

} // namespace detail

/// Every rule violation in the document (empty = valid).
inline std::vector<DslViolation> validate_document(const CoverDocument& doc) { return detail::Validator(doc).run(); }

/// The bouquet tower a valid document describes. Throws std::invalid_argument
/// listing the first violation otherwise.
inline ExplicitTower to_tower(const CoverDocument& doc)
{
  if (doc.mode != Mode::Bouquet)
    throw std::invalid_argument("only bouquet documents describe a symbolic tower");
  detail::Validator v(doc);
  const auto violations = v.run();
  if (!violations.empty())
    throw std::invalid_argument("invalid cover document: " + describe(violations.front()));
  return ExplicitTower(std::move(v.specs));
}

/// True iff the document's levels 1..up_to_level have the same cycle lengths
/// and term-for-term the same image formulas as the built-in construction.
inline bool builtin_equivalence(const CoverDocument& doc, std::size_t up_to_level)
{
  if (doc.mode != Mode::Bouquet || doc.levels.size() < up_to_level || !validate_document(doc).empty())
    return false;
  const ExplicitTower tower = to_tower(doc);
  for (std::size_t n = 0; n < up_to_level; ++n) {
    const auto mine = tower.spec(n);
    const auto reference = build_level_spec(n);
    if (mine->cycle_lengths != reference->cycle_lengths || mine->image_formulas != reference->image_formulas)
      return false;
  }
  return true;
}

/// .cover text of the built-in construction for levels 1..max_level, written
/// out from the formula patterns (declared lengths from the recurrence).
inline std::string builtin_document_text(std::size_t max_level)
{
  std::ostringstream os;
  os << "# bouquet construction: phi_n maps level n+1 cycles onto level n\n";
  os << "cover builtin mode bouquet version 1\n";
  for (std::size_t level = 1; level <= max_level; ++level) {
    const std::size_t n = level - 1; // symbols live on level n
    os << "\nlevel " << level << " {\n";
    auto declare = [&](std::size_t i) {
      os << "  c" << i << "[" << to_decimal(cycle_length(level, i)) << "] := ";
    };
    if (n == 0) {
      declare(1);
      os << "10 e;\n}\n";
      continue;
    }
    declare(1);
    os << "sum(j=1..k){ j e + 2 c1 } + e";
    for (std::size_t i = 2; i <= n; ++i)
      os << " + 2 c" << i;
    os << " + e;\n";
    for (std::size_t i = 2; i <= n; ++i) {
      declare(i);
      os << "e";
      for (std::size_t l = i; l <= n; ++l)
        os << " + 2 c" << l;
      os << " + e;\n";
    }
    BigInt sum = 0;
    for (std::size_t i = 1; i <= n; ++i)
      sum += cycle_length(n, i);
    declare(n + 1);
    os << to_decimal(BigInt((n + 2) * (n + 2)) * sum) << " e;\n}\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON export (mirrors the grammar)

inline nlohmann::json to_json(const SimpleTerm& t)
{
  return {{"atom", detail::atom_name(t.cycle)},
          {"count", t.indexed ? nlohmann::json("var") : nlohmann::json(to_decimal(t.coefficient))}};
}

inline nlohmann::json to_json(const CoverDocument& doc)
{
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& block : doc.levels) {
    nlohmann::json jb{{"level", block.level}};
    if (block.graph) {
      nlohmann::json edges = nlohmann::json::array();
      for (const auto& e : block.graph->edges)
        edges.push_back({e.from, e.to});
      jb["vertices"] = block.graph->vertex_count;
      jb["edges"] = edges;
      if (block.graph->map)
        jb["map"] = *block.graph->map;
    }
    nlohmann::json cycles = nlohmann::json::array();
    for (const auto& c : block.cycles) {
      nlohmann::json formula = nlohmann::json::array();
      for (const auto& ft : c.formula) {
        if (const auto* st = std::get_if<SimpleTerm>(&ft)) {
          formula.push_back({{"term", to_json(*st)}});
          continue;
        }
        const auto& comp = std::get<Comprehension>(ft);
        nlohmann::json body = nlohmann::json::array();
        for (const auto& part : comp.body)
          body.push_back(to_json(part));
        formula.push_back({{"comprehension",
                            {{"variable", comp.variable},
                             {"first", to_decimal(comp.first)},
                             {"last", comp.last ? to_decimal(*comp.last) : std::string("k")},
                             {"body", body}}}});
      }
      nlohmann::json jc{{"cycle", c.index}, {"formula", formula}};
      if (c.declared_length)
        jc["length"] = to_decimal(*c.declared_length);
      cycles.push_back(jc);
    }
    if (!block.cycles.empty())
      jb["cycles"] = cycles;
    levels.push_back(jb);
  }
  return {{"cover", doc.name},
          {"mode", doc.mode == Mode::Bouquet ? "bouquet" : "materialized"},
          {"version", doc.version},
          {"levels", levels}};
}

} // namespace chaoscope::dsl
