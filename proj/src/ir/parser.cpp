#include <cctype>
#include <map>
#include <memory>
#include <unordered_map>

#include <fmt/format.h>

#include "rvx/ir.h"

namespace rvx {
namespace {

enum class Tok : uint8_t { Word, Local, Global, AttrRef, Int, String, Meta, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int64_t value = 0;
  int line = 0;
  int col = 0;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '$' ||
         c == '-';
}

std::vector<Token> lex(std::string_view src, std::string_view file) {
  std::vector<Token> out;
  int line = 1;
  size_t line_start = 0;
  size_t i = 0;
  auto fail = [&](size_t at, const std::string& msg) {
    throw Error(fmt::format("{}:{}:{}: {}", file, line, static_cast<int>(at - line_start) + 1, msg));
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      line_start = ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ';') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.col = static_cast<int>(i - line_start) + 1;
    if (c == '%' || c == '@') {
      t.kind = c == '%' ? Tok::Local : Tok::Global;
      ++i;
      if (i < src.size() && src[i] == '"') {
        size_t end = src.find('"', i + 1);
        if (end == std::string_view::npos) fail(i, "unterminated quoted name");
        t.text = std::string(src.substr(i + 1, end - i - 1));
        i = end + 1;
      } else {
        size_t b = i;
        while (i < src.size() && is_name_char(src[i])) ++i;
        if (i == b) fail(b, "expected a name after sigil");
        t.text = std::string(src.substr(b, i - b));
      }
    } else if (c == '#') {
      size_t b = ++i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i == b) fail(b, "expected attribute group number");
      t.kind = Tok::AttrRef;
      t.text = std::string(src.substr(b - 1, i - b + 1));
    } else if (c == '!') {
      size_t b = i++;
      while (i < src.size() && is_name_char(src[i])) ++i;
      t.kind = Tok::Meta;
      t.text = std::string(src.substr(b, i - b));
    } else if (c == '"') {
      size_t end = src.find('"', i + 1);
      if (end == std::string_view::npos) fail(i, "unterminated string");
      t.kind = Tok::String;
      t.text = std::string(src.substr(i + 1, end - i - 1));
      i = end + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t b = i;
      if (c == '-') ++i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(b, i - b));
      if (i - b > 20) fail(b, "integer literal too long");
      t.value = std::stoll(t.text);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      size_t b = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' ||
                                src[i] == '.' || src[i] == '$'))
        ++i;
      t.kind = Tok::Word;
      t.text = std::string(src.substr(b, i - b));
    } else if (std::string_view("=,(){}[]*:<>").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      ++i;
    } else {
      fail(i, fmt::format("unexpected character '{}'", c));
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line + 1;
  out.push_back(end);
  return out;
}

// Aggregate-capable type used only while parsing (gep source types, allocas).
struct PType {
  enum Kind { Int, Ptr, Void, Array, Struct } kind = Int;
  int bits = 32;
  int64_t count = 0;
  std::vector<std::shared_ptr<PType>> elems;
};
using PTypeRef = std::shared_ptr<PType>;

int64_t type_align(const PType& t);

int64_t type_size(const PType& t) {
  switch (t.kind) {
    case PType::Int: return t.bits <= 8 ? 1 : t.bits / 8;
    case PType::Ptr: return 4;
    case PType::Void: return 0;
    case PType::Array: return t.count * type_size(*t.elems[0]);
    case PType::Struct: {
      int64_t off = 0;
      for (const auto& e : t.elems) {
        int64_t a = type_align(*e);
        off = (off + a - 1) / a * a + type_size(*e);
      }
      int64_t a = type_align(t);
      return (off + a - 1) / a * a;
    }
  }
  return 0;
}

int64_t type_align(const PType& t) {
  switch (t.kind) {
    case PType::Array: return type_align(*t.elems[0]);
    case PType::Struct: {
      int64_t a = 1;
      for (const auto& e : t.elems) a = std::max(a, type_align(*e));
      return a;
    }
    default: return std::max<int64_t>(1, type_size(t));
  }
}

struct PendingRef {
  size_t inst;
  size_t operand;
  Token tok;
  IrType annotated;
};

class Parser {
public:
  Parser(std::string_view text, std::string_view file) : file_(file), toks_(lex(text, file)) {}

  IrModule run() {
    IrModule m;
    m.source_name = std::string(file_);
    prescan_globals(m);
    while (peek().kind != Tok::End) top_level(m);
    resolve_attribute_groups(m);
    return m;
  }

private:
  std::string file_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::map<std::string, PTypeRef> named_types_;
  std::map<std::string, std::vector<std::string>> attr_groups_;
  // (function index, attribute position) pairs that reference a group.
  struct GroupUse { size_t fn; size_t at; std::string group; Token tok; };
  std::vector<GroupUse> group_uses_;

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw Error(fmt::format("{}:{}:{}: {}", file_, t.line, t.col, msg));
  }

  bool is_punct(const Token& t, char c) const { return t.kind == Tok::Punct && t.text[0] == c; }
  bool is_word(const Token& t, std::string_view w) const { return t.kind == Tok::Word && t.text == w; }

  void expect_punct(char c) {
    const Token& t = next();
    if (!is_punct(t, c)) fail(t, fmt::format("expected '{}'", c));
  }
  void expect_word(std::string_view w) {
    const Token& t = next();
    if (!is_word(t, w)) fail(t, fmt::format("expected '{}'", w));
  }
  bool accept_punct(char c) {
    if (is_punct(peek(), c)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    if (is_word(peek(), w)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_line(int line) {
    while (peek().kind != Tok::End && peek().line == line) ++pos_;
  }

  // Consumes trailing ", align N" / ", !md !N" decorations on the current line.
  void skip_trailers(int line) {
    while (is_punct(peek(), ',') && peek().line == line) {
      while (peek().kind != Tok::End && peek().line == line && !is_punct(peek(), '}')) ++pos_;
    }
  }

  void prescan_globals(IrModule& m) {
    for (size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (toks_[i].kind == Tok::Global && is_punct(toks_[i + 1], '=') &&
          (i == 0 || toks_[i - 1].line != toks_[i].line)) {
        if (m.find_global(toks_[i].text) >= 0) fail(toks_[i], "redefinition of global @" + toks_[i].text);
        GlobalVar g;
        g.name = toks_[i].text;
        m.globals.push_back(g);
      }
    }
  }

  // ---- types ----

  bool at_type_start() const {
    const Token& t = peek();
    if (t.kind == Tok::Word)
      return t.text == "ptr" || t.text == "void" ||
             (t.text.size() > 1 && t.text[0] == 'i' &&
              std::all_of(t.text.begin() + 1, t.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }));
    if (t.kind == Tok::Local) return named_types_.count(t.text) > 0;
    return is_punct(t, '[') || is_punct(t, '{');
  }

  PTypeRef parse_type() {
    const Token& t = next();
    PTypeRef ty = std::make_shared<PType>();
    if (t.kind == Tok::Word && t.text == "ptr") {
      ty->kind = PType::Ptr;
    } else if (t.kind == Tok::Word && t.text == "void") {
      ty->kind = PType::Void;
    } else if (t.kind == Tok::Word && t.text.size() > 1 && t.text[0] == 'i') {
      ty->kind = PType::Int;
      try {
        ty->bits = std::stoi(t.text.substr(1));
      } catch (...) {
        fail(t, "expected a type");
      }
    } else if (t.kind == Tok::Local) {
      auto it = named_types_.find(t.text);
      if (it == named_types_.end()) fail(t, "unknown type %" + t.text);
      ty = it->second;
    } else if (is_punct(t, '[')) {
      const Token& n = next();
      if (n.kind != Tok::Int || n.value < 0) fail(n, "expected array length");
      expect_word("x");
      ty->kind = PType::Array;
      ty->count = n.value;
      ty->elems.push_back(parse_type());
      expect_punct(']');
    } else if (is_punct(t, '{')) {
      ty->kind = PType::Struct;
      if (!accept_punct('}')) {
        do ty->elems.push_back(parse_type());
        while (accept_punct(','));
        expect_punct('}');
      }
    } else {
      fail(t, "expected a type");
    }
    while (is_punct(peek(), '*')) {
      ++pos_;
      auto p = std::make_shared<PType>();
      p->kind = PType::Ptr;
      ty = p;
    }
    check_no_i64(*ty, t);
    return ty;
  }

  void check_no_i64(const PType& t, const Token& at) const {
    if (t.kind == PType::Int && t.bits == 64) fail(at, "i64 unsupported");
    for (const auto& e : t.elems) check_no_i64(*e, at);
  }

  IrType scalar(const PTypeRef& t, const Token& at, bool allow_void = false) const {
    switch (t->kind) {
      case PType::Ptr: return IrType::Ptr;
      case PType::Void:
        if (!allow_void) fail(at, "void is not a value type");
        return IrType::Void;
      case PType::Int:
        if (t->bits == 32) return IrType::I32;
        fail(at, fmt::format("unsupported type 'i{}'", t->bits));
      default:
        fail(at, "aggregate types are only supported in getelementptr and alloca");
    }
  }

  IrType parse_scalar_type(bool allow_void = false) {
    Token at = peek();
    return scalar(parse_type(), at, allow_void);
  }

  // ---- top level ----

  void top_level(IrModule& m) {
    const Token& t = peek();
    if (is_word(t, "source_filename") || is_word(t, "target")) {
      skip_line(t.line);
    } else if (t.kind == Tok::Meta) {
      skip_line(t.line);
    } else if (t.kind == Tok::Local && is_punct(peek(1), '=') && is_word(peek(2), "type")) {
      std::string name = t.text;
      pos_ += 3;
      if (accept_word("opaque")) {
        named_types_[name] = std::make_shared<PType>();
        named_types_[name]->kind = PType::Struct;
      } else {
        named_types_[name] = parse_type();
      }
    } else if (t.kind == Tok::Global && is_punct(peek(1), '=')) {
      parse_global(m);
    } else if (is_word(t, "define")) {
      parse_function(m);
    } else if (is_word(t, "declare")) {
      skip_line(t.line);
    } else if (is_word(t, "attributes")) {
      parse_attribute_group();
    } else {
      fail(t, "expected a top-level entity");
    }
  }

  void parse_global(IrModule& m) {
    Token name = next();
    expect_punct('=');
    while (peek().kind == Tok::Word && !is_word(peek(), "global") && !is_word(peek(), "constant"))
      ++pos_;
    if (!accept_word("global") && !accept_word("constant")) fail(peek(), "expected 'global'");
    Token tt = peek();
    IrType ty = parse_scalar_type();
    if (ty != IrType::I32) fail(tt, "globals must have type i32");
    GlobalVar& g = m.globals[static_cast<size_t>(m.find_global(name.text))];
    g.value_type = ty;
    const Token& init = peek();
    if (init.kind == Tok::Int && init.line == name.line) {
      ++pos_;
      g.initializer = checked_i32(init);
    } else if (is_word(init, "zeroinitializer")) {
      ++pos_;
    }
    skip_trailers(name.line);
  }

  int32_t checked_i32(const Token& t) const {
    if (t.value < INT32_MIN || t.value > INT32_MAX) fail(t, "integer constant does not fit in 32 signed bits");
    return static_cast<int32_t>(t.value);
  }

  void parse_attribute_group() {
    expect_word("attributes");
    Token ref = next();
    if (ref.kind != Tok::AttrRef) fail(ref, "expected attribute group reference");
    expect_punct('=');
    expect_punct('{');
    std::vector<std::string> tags;
    while (!is_punct(peek(), '}')) {
      if (peek().kind == Tok::End) fail(peek(), "unterminated attribute group");
      tags.push_back(parse_attribute_tag());
    }
    ++pos_;
    attr_groups_[ref.text] = std::move(tags);
  }

  std::string parse_attribute_tag() {
    const Token& t = next();
    std::string tag;
    if (t.kind == Tok::String) {
      tag = "\"" + t.text + "\"";
      if (is_punct(peek(), '=') && peek(1).kind == Tok::String) {
        tag += "=\"" + peek(1).text + "\"";
        pos_ += 2;
      }
      return tag;
    }
    if (t.kind != Tok::Word) fail(t, "expected attribute");
    tag = t.text;
    if (is_punct(peek(), '(')) {
      int depth = 0;
      do {
        const Token& p = next();
        if (p.kind == Tok::End) fail(p, "unterminated attribute");
        if (is_punct(p, '(')) ++depth;
        if (is_punct(p, ')')) --depth;
        if (is_punct(p, ':') || is_punct(p, ',')) tag += p.text + " ";
        else tag += p.text;
      } while (depth > 0);
    }
    return tag;
  }

  void resolve_attribute_groups(IrModule& m) {
    // Insert back to front so earlier insertion points stay valid.
    for (auto it = group_uses_.rbegin(); it != group_uses_.rend(); ++it) {
      auto g = attr_groups_.find(it->group);
      if (g == attr_groups_.end()) fail(it->tok, "undefined attribute group " + it->group);
      auto& attrs = m.functions[it->fn].attributes;
      std::vector<std::string> fresh;
      for (const auto& tag : g->second)
        if (std::find(attrs.begin(), attrs.end(), tag) == attrs.end() &&
            std::find(fresh.begin(), fresh.end(), tag) == fresh.end())
          fresh.push_back(tag);
      attrs.insert(attrs.begin() + static_cast<long>(it->at), fresh.begin(), fresh.end());
    }
  }

  // ---- functions ----

  void parse_function(IrModule& m) {
    Token def = next();
    while (!(at_type_start() && peek(1).kind == Tok::Global)) {
      if (peek().kind != Tok::Word) fail(peek(), "expected return type");
      ++pos_;
    }
    IrFunction f;
    f.return_type = parse_scalar_type(true);
    Token name = next();
    if (name.kind != Tok::Global) fail(name, "expected function name");
    if (m.find_function(name.text) || m.find_global(name.text) >= 0)
      fail(name, "redefinition of @" + name.text);
    f.name = name.text;
    expect_punct('(');
    if (!accept_punct(')')) {
      do {
        IrParam p;
        p.type = parse_scalar_type();
        while (peek().kind != Tok::Local) {
          if (peek().kind == Tok::End || is_punct(peek(), ')')) fail(peek(), "expected parameter name");
          ++pos_;
        }
        p.name = next().text;
        for (const auto& q : f.params)
          if (q.name == p.name) fail(peek(), "redefinition of %" + p.name);
        f.params.push_back(p);
      } while (accept_punct(','));
      expect_punct(')');
    }
    size_t fn_index = m.functions.size();
    while (!is_punct(peek(), '{')) {
      const Token& t = peek();
      if (t.kind == Tok::AttrRef) {
        group_uses_.push_back({fn_index, f.attributes.size(), t.text, t});
        ++pos_;
      } else if (t.kind == Tok::Word || t.kind == Tok::String) {
        std::string tag = parse_attribute_tag();
        if (!f.has_attribute(tag)) f.attributes.push_back(tag);
      } else {
        fail(t, "expected '{'");
      }
    }
    expect_punct('{');
    parse_body(m, f);
    m.functions.push_back(std::move(f));
  }

  void parse_body(const IrModule& m, IrFunction& f) {
    BasicBlock bb;
    std::vector<PendingRef> pending;
    std::unordered_map<std::string, Token> defined;
    bool seen_label = false;
    while (!accept_punct('}')) {
      const Token& t = peek();
      if (t.kind == Tok::End) fail(t, "unterminated function body");
      if ((t.kind == Tok::Word || t.kind == Tok::Int) && is_punct(peek(1), ':')) {
        if (seen_label || !bb.insts.empty()) fail(t, "multiple basic blocks are not supported");
        seen_label = true;
        bb.label = t.text;
        pos_ += 2;
        continue;
      }
      parse_inst(m, f, bb, pending, defined);
    }
    f.blocks.push_back(std::move(bb));
    resolve_locals(f, pending);
  }

  void resolve_locals(IrFunction& f, const std::vector<PendingRef>& pending) {
    std::unordered_map<std::string, IrValue> names;
    for (size_t i = 0; i < f.params.size(); ++i)
      names[f.params[i].name] = IrValue::arg(static_cast<int32_t>(i), f.params[i].type);
    for (const auto& inst : f.body().insts)
      if (inst.has_result()) names[inst.name] = inst.result();
    for (const auto& p : pending) {
      auto it = names.find(p.tok.text);
      if (it == names.end()) fail(p.tok, "use of undefined value %" + p.tok.text);
      if (it->second.type != p.annotated)
        fail(p.tok, fmt::format("%{} has type {}, but is used as {}", p.tok.text,
                                type_name(it->second.type), type_name(p.annotated)));
      f.body().insts[p.inst].operands[p.operand] = it->second;
    }
  }

  IrValue parse_value(const IrModule& m, IrType ty, size_t inst_index, size_t operand_index,
                      std::vector<PendingRef>& pending) {
    const Token& t = next();
    switch (t.kind) {
      case Tok::Local:
        pending.push_back({inst_index, operand_index, t, ty});
        return IrValue::inst(-1, ty);
      case Tok::Global: {
        int g = m.find_global(t.text);
        if (g < 0) fail(t, "use of undefined global @" + t.text);
        if (ty != IrType::Ptr) fail(t, "global reference must have type ptr");
        return IrValue::global(g);
      }
      case Tok::Int:
        if (ty != IrType::I32) fail(t, "integer constant must have type i32");
        return IrValue::constant(checked_i32(t));
      case Tok::Word:
        if (t.text == "poison" || t.text == "undef") return IrValue::undef(ty);
        fail(t, "unsupported constant '" + t.text + "'");
      default:
        fail(t, "expected a value");
    }
  }

  void skip_flags(std::initializer_list<std::string_view> flags) {
    for (;;) {
      bool any = false;
      for (auto fl : flags)
        if (accept_word(fl)) any = true;
      if (!any) return;
    }
  }

  void parse_inst(const IrModule& m, IrFunction& f, BasicBlock& bb, std::vector<PendingRef>& pending,
                  std::unordered_map<std::string, Token>& defined) {
    Token start = peek();
    IrInst inst;
    if (start.kind == Tok::Local) {
      if (defined.count(start.text)) fail(start, "redefinition of %" + start.text);
      for (const auto& p : f.params)
        if (p.name == start.text) fail(start, "redefinition of %" + start.text);
      defined[start.text] = start;
      inst.name = start.text;
      pos_ += 1;
      expect_punct('=');
    }
    accept_word("tail") || accept_word("musttail") || accept_word("notail");
    Token op = next();
    if (op.kind != Tok::Word) fail(op, "expected an instruction");
    size_t idx = bb.insts.size();
    const std::string& o = op.text;
    bool keep = true;
    if (o == "alloca") {
      inst.op = Opcode::Alloca;
      Token tt = peek();
      PTypeRef ty = parse_type();
      if (ty->kind == PType::Void) fail(tt, "cannot allocate void");
      inst.alloca_size = static_cast<int32_t>(type_size(*ty));
      inst.type = IrType::Ptr;
    } else if (o == "load") {
      inst.op = Opcode::Load;
      accept_word("volatile");
      inst.type = parse_scalar_type();
      expect_punct(',');
      IrType at = parse_scalar_type();
      inst.operands.push_back(parse_value(m, at, idx, 0, pending));
    } else if (o == "store") {
      inst.op = Opcode::Store;
      accept_word("volatile");
      IrType vt = parse_scalar_type();
      inst.operands.push_back(parse_value(m, vt, idx, 0, pending));
      expect_punct(',');
      IrType at = parse_scalar_type();
      inst.operands.push_back(parse_value(m, at, idx, 1, pending));
    } else if (o == "getelementptr") {
      inst.op = Opcode::Gep;
      inst.type = IrType::Ptr;
      accept_word("inbounds");
      Token st = peek();
      PTypeRef source = parse_type();
      expect_punct(',');
      IrType bt = parse_scalar_type();
      inst.operands.push_back(parse_value(m, bt, idx, 0, pending));
      int64_t offset = 0;
      PTypeRef cur = source;
      bool first = true;
      while (accept_punct(',')) {
        if (!at_type_start()) {
          --pos_;
          break;
        }
        Token it = peek();
        IrType ity = parse_scalar_type();
        if (ity != IrType::I32) fail(it, "gep index must be i32");
        const Token& v = next();
        if (v.kind != Tok::Int) fail(v, "gep indices must be integer constants");
        if (first) {
          offset += v.value * type_size(*cur);
          first = false;
        } else if (cur->kind == PType::Array) {
          cur = cur->elems[0];
          offset += v.value * type_size(*cur);
        } else if (cur->kind == PType::Struct) {
          if (v.value < 0 || static_cast<size_t>(v.value) >= cur->elems.size())
            fail(v, "struct field index out of range");
          int64_t off = 0;
          for (int64_t k = 0; k <= v.value; ++k) {
            int64_t a = type_align(*cur->elems[static_cast<size_t>(k)]);
            off = (off + a - 1) / a * a;
            if (k < v.value) off += type_size(*cur->elems[static_cast<size_t>(k)]);
          }
          offset += off;
          cur = cur->elems[static_cast<size_t>(v.value)];
        } else {
          fail(v, "cannot index into a scalar type");
        }
      }
      if (offset < INT32_MIN || offset > INT32_MAX) fail(st, "gep offset out of range");
      inst.operands.push_back(IrValue::constant(static_cast<int32_t>(offset)));
    } else if (o == "call") {
      keep = parse_call(m, inst, idx, pending);
    } else if (o == "ret") {
      inst.op = Opcode::Ret;
      Token tt = peek();
      IrType t = parse_scalar_type(true);
      if (t != IrType::Void) inst.operands.push_back(parse_value(m, t, idx, 0, pending));
      (void)tt;
    } else if (o == "not") {
      // Shorthand for xor with all ones; there is no separate opcode.
      inst.op = Opcode::Xor;
      inst.type = parse_scalar_type();
      inst.operands.push_back(parse_value(m, inst.type, idx, 0, pending));
      inst.operands.push_back(IrValue::constant(-1));
    } else {
      static const std::map<std::string, Opcode, std::less<>> kBinary = {
          {"add", Opcode::Add}, {"sub", Opcode::Sub}, {"mul", Opcode::Mul},
          {"and", Opcode::And}, {"or", Opcode::Or}, {"xor", Opcode::Xor},
          {"shl", Opcode::Shl}, {"lshr", Opcode::LShr}, {"ashr", Opcode::AShr}};
      auto it = kBinary.find(o);
      if (it == kBinary.end()) fail(op, "unknown opcode '" + o + "'");
      inst.op = it->second;
      skip_flags({"nsw", "nuw", "exact", "disjoint"});
      inst.type = parse_scalar_type();
      inst.operands.push_back(parse_value(m, inst.type, idx, 0, pending));
      expect_punct(',');
      inst.operands.push_back(parse_value(m, inst.type, idx, 1, pending));
    }
    skip_trailers(start.line);
    if (!keep) {
      // Discarded intrinsic: drop any references it recorded.
      while (!pending.empty() && pending.back().inst == idx) pending.pop_back();
      return;
    }
    bool wants_result = inst.op != Opcode::Store && inst.op != Opcode::Ret &&
                        inst.type != IrType::Void;
    if (wants_result && inst.name.empty()) fail(start, "instruction result must be named");
    if (!wants_result && !inst.name.empty()) fail(start, "instruction does not produce a value");
    if (wants_result) inst.id = f.fresh_id();
    bb.insts.push_back(std::move(inst));
  }

  // Returns false for intrinsics that are accepted but discarded.
  bool parse_call(const IrModule& m, IrInst& inst, size_t idx, std::vector<PendingRef>& pending) {
    while (peek().kind == Tok::Word && !at_type_start()) ++pos_;
    Token tt = peek();
    PTypeRef rt = parse_type_allow_i64();
    Token callee = next();
    if (callee.kind != Tok::Global) fail(callee, "expected callee");
    std::string_view name = callee.text;
    bool lifetime = name.rfind("llvm.lifetime.", 0) == 0;
    if (lifetime) {
      expect_punct('(');
      int depth = 1;
      while (depth > 0) {
        const Token& t = next();
        if (t.kind == Tok::End) fail(t, "unterminated call");
        if (is_punct(t, '(')) ++depth;
        if (is_punct(t, ')')) --depth;
      }
      while (peek().kind == Tok::AttrRef && peek().line == callee.line) ++pos_;
      return false;
    }
    check_no_i64(*rt, tt);
    if (name == "llvm.fshl.i32") inst.op = Opcode::Fshl;
    else if (name == "llvm.fshr.i32") inst.op = Opcode::Fshr;
    else if (name.find(".i64") != std::string_view::npos) fail(callee, "i64 unsupported");
    else fail(callee, "unsupported call to @" + callee.text);
    inst.type = scalar(rt, tt);
    expect_punct('(');
    size_t k = 0;
    if (!accept_punct(')')) {
      do {
        IrType at = parse_scalar_type();
        while (peek().kind == Tok::Word && !is_word(peek(), "poison") && !is_word(peek(), "undef"))
          ++pos_;
        inst.operands.push_back(parse_value(m, at, idx, k++, pending));
      } while (accept_punct(','));
      expect_punct(')');
    }
    if (inst.operands.size() != 3) fail(callee, "funnel shift takes three operands");
    while (peek().kind == Tok::AttrRef && peek().line == callee.line) ++pos_;
    return true;
  }

  PTypeRef parse_type_allow_i64() {
    const Token& t = peek();
    if (t.kind == Tok::Word && t.text == "i64") {
      ++pos_;
      auto ty = std::make_shared<PType>();
      ty->bits = 64;
      return ty;
    }
    return parse_type();
  }
};

}  // namespace

IrModule parse_ir(std::string_view text, std::string_view source_name, ParseOptions opts) {
  Parser p(text, source_name);
  IrModule m = p.run();
  if (opts.verify) {
    auto violations = verify(m);
    if (!violations.empty())
      throw Error(fmt::format("{}: {}", source_name, format_violation(violations.front())));
  }
  return m;
}

}  // namespace rvx
