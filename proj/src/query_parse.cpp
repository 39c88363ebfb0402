#include <algorithm>
#include <cctype>
#include <optional>

#include "veriscope/errors.hpp"
#include "veriscope/query.hpp"

namespace veriscope {

namespace {

enum class Tok : uint8_t { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;   // keywords uppercased separately on demand
  size_t pos = 0;
};

struct Lexer {
  const std::string& src;
  size_t i = 0;
  Token cur;

  explicit Lexer(const std::string& s) : src(s) { advance(); }

  [[noreturn]] void fail(const std::string& msg, size_t pos) const {
    throw QueryError(msg, pos);
  }

  void advance() {
    while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i])))
      ++i;
    cur.pos = i;
    if (i >= src.size()) {
      cur = {Tok::End, "", i};
      return;
    }
    char c = src[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) ||
              src[i] == '_'))
        ++i;
      cur = {Tok::Ident, src.substr(start, i - start), start};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < src.size() &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t start = i;
      if (c == '-') ++i;
      while (i < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[i])) ||
              src[i] == '.' || src[i] == 'e' || src[i] == 'E' ||
              ((src[i] == '+' || src[i] == '-') &&
               (src[i - 1] == 'e' || src[i - 1] == 'E'))))
        ++i;
      cur = {Tok::Number, src.substr(start, i - start), start};
      return;
    }
    if (c == '\'') {
      size_t start = i++;
      std::string value;
      while (true) {
        if (i >= src.size()) fail("unterminated string literal", start);
        if (src[i] == '\'') {
          if (i + 1 < src.size() && src[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value += src[i++];
      }
      cur = {Tok::String, value, start};
      return;
    }
    // multi-char operators first
    static const char* two[] = {"<=", ">=", "<>", "!="};
    for (const char* t : two) {
      if (src.compare(i, 2, t) == 0) {
        cur = {Tok::Punct, t, i};
        i += 2;
        return;
      }
    }
    if (std::string("=<>(),.").find(c) != std::string::npos) {
      cur = {Tok::Punct, std::string(1, c), i};
      ++i;
      return;
    }
    fail(std::string("unexpected character '") + c + "'", i);
  }

  static std::string upper(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return u;
  }

  bool at_keyword(const std::string& kw) const {
    return cur.kind == Tok::Ident && upper(cur.text) == kw;
  }

  void expect_keyword(const std::string& kw) {
    if (!at_keyword(kw)) fail("expected " + kw, cur.pos);
    advance();
  }

  bool accept_punct(const std::string& p) {
    if (cur.kind == Tok::Punct && cur.text == p) {
      advance();
      return true;
    }
    return false;
  }

  void expect_punct(const std::string& p) {
    if (!accept_punct(p)) fail("expected '" + p + "'", cur.pos);
  }

  std::string expect_ident(const std::string& what) {
    if (cur.kind != Tok::Ident) fail("expected " + what, cur.pos);
    std::string s = cur.text;
    advance();
    return s;
  }
};

const char* kReserved[] = {"SELECT", "DISTINCT", "FROM",  "WHERE", "AND",
                           "UNION",  "AS",       "ILIKE", "YEAR",  "DATE_PART"};

bool is_reserved(const std::string& ident) {
  std::string u = Lexer::upper(ident);
  for (const char* r : kReserved)
    if (u == r) return true;
  return false;
}

struct BoundTable {
  std::string alias;
  const RelationSchema* schema;
  int offset;  // of its first column in the concatenated row
};

struct Block {
  std::vector<BoundTable> tables;

  // Resolves "alias.column" or a bare column name (must be unambiguous).
  std::pair<int, ColumnType> resolve(const std::string& alias,
                                     const std::string& column,
                                     size_t pos) const {
    std::optional<std::pair<int, ColumnType>> found;
    for (const auto& t : tables) {
      if (!alias.empty() && t.alias != alias) continue;
      int ci = t.schema->column_index(column);
      if (ci < 0) continue;
      if (found && alias.empty())
        throw QueryError("ambiguous column '" + column + "'", pos);
      found = {t.offset + ci,
               t.schema->columns[static_cast<size_t>(ci)].type};
      if (!alias.empty()) break;
    }
    if (!found) {
      throw QueryError("unknown column '" +
                           (alias.empty() ? column : alias + "." + column) +
                           "'",
                       pos);
    }
    return *found;
  }

  bool has_alias(const std::string& alias) const {
    for (const auto& t : tables)
      if (t.alias == alias) return true;
    return false;
  }
};

struct Parser {
  Lexer lex;
  const std::vector<RelationSchema>& schemas;

  Parser(const std::string& text, const std::vector<RelationSchema>& s)
      : lex(text), schemas(s) {}

  const RelationSchema* find_schema(const std::string& name, int* index) const {
    for (size_t i = 0; i < schemas.size(); ++i) {
      if (schemas[i].name == name) {
        *index = static_cast<int>(i);
        return &schemas[i];
      }
    }
    return nullptr;
  }

  ScalarExpr parse_operand(const Block& block) {
    ScalarExpr e;
    size_t pos = lex.cur.pos;
    if (lex.cur.kind == Tok::Number) {
      std::string t = lex.cur.text;
      lex.advance();
      e.kind = ScalarExpr::Kind::Literal;
      e.display = t;
      if (t.find_first_of(".eE") == std::string::npos) {
        e.literal = Cell(static_cast<int64_t>(std::stoll(t)));
        e.type = ColumnType::Int;
      } else {
        e.literal = Cell(std::stod(t));
        e.type = ColumnType::Float;
      }
      return e;
    }
    if (lex.cur.kind == Tok::String) {
      e.kind = ScalarExpr::Kind::Literal;
      e.literal = Cell(lex.cur.text);
      e.type = ColumnType::String;
      e.display = "'" + lex.cur.text + "'";
      lex.advance();
      return e;
    }
    if (lex.at_keyword("YEAR") || lex.at_keyword("DATE_PART")) {
      bool date_part = lex.at_keyword("DATE_PART");
      lex.advance();
      lex.expect_punct("(");
      if (date_part) {
        if (lex.cur.kind != Tok::String ||
            Lexer::upper(lex.cur.text) != "YEAR")
          lex.fail("DATE_PART supports only 'YEAR'", lex.cur.pos);
        lex.advance();
        lex.expect_punct(",");
      }
      auto [off, type] = parse_column(block);
      if (type != ColumnType::Date)
        throw QueryError("YEAR() argument must be a date column", pos);
      lex.expect_punct(")");
      e.kind = ScalarExpr::Kind::Year;
      e.column_offset = off;
      e.type = ColumnType::Int;
      e.display = "YEAR(...)";
      return e;
    }
    if (lex.cur.kind == Tok::Ident && !is_reserved(lex.cur.text)) {
      auto [off, type] = parse_column(block);
      e.kind = ScalarExpr::Kind::Column;
      e.column_offset = off;
      e.type = type;
      return e;
    }
    lex.fail("expected column, literal, or YEAR()", lex.cur.pos);
  }

  std::pair<int, ColumnType> parse_column(const Block& block) {
    size_t pos = lex.cur.pos;
    std::string first = lex.expect_ident("column reference");
    std::string alias, column;
    if (lex.accept_punct(".")) {
      alias = first;
      column = lex.expect_ident("column name");
      if (!block.has_alias(alias))
        throw QueryError("unknown table alias '" + alias + "'", pos);
    } else {
      column = first;
    }
    return block.resolve(alias, column, pos);
  }

  CmpOp parse_op() {
    if (lex.at_keyword("ILIKE")) {
      lex.advance();
      return CmpOp::ILike;
    }
    if (lex.cur.kind != Tok::Punct) lex.fail("expected comparison operator", lex.cur.pos);
    std::string t = lex.cur.text;
    CmpOp op;
    if (t == "=")
      op = CmpOp::Eq;
    else if (t == "!=" || t == "<>")
      op = CmpOp::Ne;
    else if (t == "<")
      op = CmpOp::Lt;
    else if (t == "<=")
      op = CmpOp::Le;
    else if (t == ">")
      op = CmpOp::Gt;
    else if (t == ">=")
      op = CmpOp::Ge;
    else
      lex.fail("expected comparison operator", lex.cur.pos);
    lex.advance();
    return op;
  }

  static bool numeric(ColumnType t) {
    return t == ColumnType::Int || t == ColumnType::Float;
  }

  Atom parse_atom(const Block& block) {
    size_t pos = lex.cur.pos;
    Atom a;
    a.lhs = parse_operand(block);
    a.op = parse_op();
    a.rhs = parse_operand(block);
    if (a.op == CmpOp::ILike) {
      if (a.lhs.type != ColumnType::String || a.rhs.type != ColumnType::String)
        throw QueryError("ILIKE requires string operands", pos);
      if (a.rhs.kind != ScalarExpr::Kind::Literal)
        throw QueryError("ILIKE pattern must be a literal", pos);
    } else {
      bool ok = (numeric(a.lhs.type) && numeric(a.rhs.type)) ||
                (a.lhs.type == a.rhs.type);
      if (!ok)
        throw QueryError("type mismatch: " + to_string(a.lhs.type) + " vs " +
                             to_string(a.rhs.type),
                         pos);
    }
    return a;
  }

  // One SELECT block; returns its Project plan and the output metadata.
  PlanPtr parse_block(std::vector<std::string>* names,
                      std::vector<ColumnType>* types) {
    lex.expect_keyword("SELECT");
    lex.expect_keyword("DISTINCT");

    // Projection list is parsed first but resolved after FROM.
    struct RawCol {
      std::string alias, column;
      size_t pos;
    };
    std::vector<RawCol> raw;
    while (true) {
      size_t pos = lex.cur.pos;
      std::string first = lex.expect_ident("projected column");
      RawCol rc{.alias = "", .column = first, .pos = pos};
      if (lex.accept_punct(".")) {
        rc.alias = first;
        rc.column = lex.expect_ident("column name");
      }
      raw.push_back(rc);
      if (!lex.accept_punct(",")) break;
    }

    lex.expect_keyword("FROM");
    Block block;
    std::vector<PlanPtr> scans;
    int offset = 0;
    while (true) {
      size_t pos = lex.cur.pos;
      std::string rel = lex.expect_ident("relation name");
      int rel_index = -1;
      const RelationSchema* schema = find_schema(rel, &rel_index);
      if (!schema) throw QueryError("unknown relation '" + rel + "'", pos);
      std::string alias = rel;
      if (lex.at_keyword("AS")) {
        lex.advance();
        alias = lex.expect_ident("alias");
      } else if (lex.cur.kind == Tok::Ident && !is_reserved(lex.cur.text)) {
        alias = lex.expect_ident("alias");
      }
      if (block.has_alias(alias))
        throw QueryError("duplicate alias '" + alias + "'", pos);
      block.tables.push_back({alias, schema, offset});
      offset += static_cast<int>(schema->columns.size());
      auto node = std::make_unique<PlanNode>();
      node->op = ScanOp{rel, alias, rel_index};
      scans.push_back(std::move(node));
      if (!lex.accept_punct(",")) break;
    }

    PlanPtr plan;
    if (scans.size() == 1) {
      plan = std::move(scans.front());
    } else {
      auto join = std::make_unique<PlanNode>();
      join->op = JoinOp{std::move(scans)};
      plan = std::move(join);
    }

    if (lex.at_keyword("WHERE")) {
      lex.advance();
      std::vector<Atom> atoms;
      atoms.push_back(parse_atom(block));
      while (lex.at_keyword("AND")) {
        lex.advance();
        atoms.push_back(parse_atom(block));
      }
      auto sel = std::make_unique<PlanNode>();
      sel->op = SelectOp{std::move(plan), std::move(atoms)};
      plan = std::move(sel);
    }

    std::vector<int> cols;
    for (const auto& rc : raw) {
      if (!rc.alias.empty() && !block.has_alias(rc.alias))
        throw QueryError("unknown table alias '" + rc.alias + "'", rc.pos);
      auto [off, type] = block.resolve(rc.alias, rc.column, rc.pos);
      cols.push_back(off);
      names->push_back(rc.column);
      types->push_back(type);
    }
    auto proj = std::make_unique<PlanNode>();
    proj->op = ProjectOp{std::move(plan), std::move(cols), true};
    return proj;
  }
};

}  // namespace

QueryPlan parse_query(const std::string& text,
                      const std::vector<RelationSchema>& schemas) {
  Parser parser(text, schemas);
  QueryPlan plan;
  std::vector<PlanPtr> blocks;
  while (true) {
    std::vector<std::string> names;
    std::vector<ColumnType> types;
    blocks.push_back(parser.parse_block(&names, &types));
    if (blocks.size() == 1) {
      plan.output_columns = names;
      plan.output_types = types;
    } else {
      if (types.size() != plan.output_types.size())
        throw QueryError("UNION blocks have different arity", parser.lex.cur.pos);
      for (size_t i = 0; i < types.size(); ++i)
        if (types[i] != plan.output_types[i])
          throw QueryError("UNION blocks have mismatched column types",
                           parser.lex.cur.pos);
    }
    if (parser.lex.at_keyword("UNION")) {
      parser.lex.advance();
      continue;
    }
    break;
  }
  if (parser.lex.cur.kind != Tok::End)
    throw QueryError("trailing input after query", parser.lex.cur.pos);
  if (blocks.size() == 1) {
    plan.root = std::move(blocks.front());
  } else {
    auto u = std::make_unique<PlanNode>();
    u->op = UnionOp{std::move(blocks)};
    plan.root = std::move(u);
  }
  return plan;
}

}  // namespace veriscope
