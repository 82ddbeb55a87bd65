#include "lift/lang.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace lift {

bool operator==(const Statement &x, const Statement &y) {
  return x.kind == y.kind && x.neg == y.neg && x.a == y.a && x.b == y.b &&
         x.sel == y.sel && x.sel2 == y.sel2 && x.num == y.num && x.op == y.op &&
         x.outs == y.outs && x.ins == y.ins;
}

Statement Statement::complement() const {
  Statement s = *this;
  if (!is_guard()) throw LiftError("complement of non-guard");
  s.neg = !s.neg;
  return s;
}

std::string Statement::str() const {
  std::ostringstream o;
  auto rhs = [&](const std::string &v) { return v.empty() ? std::string("NULL") : v; };
  switch (kind) {
  case StmtKind::AssignVar: o << a << " = " << b; break;
  case StmtKind::AssignSel: o << a << " = " << b << "->" << sel; break;
  case StmtKind::AssignMalloc: o << a << " = malloc()"; break;
  case StmtKind::AssignNull: o << a << " = NULL"; break;
  case StmtKind::StoreSel: o << a << "->" << sel << " = " << rhs(b); break;
  case StmtKind::Free: o << "free(" << a << ")"; break;
  case StmtKind::GuardPtr: o << a << (neg ? " != " : " == ") << rhs(b); break;
  case StmtKind::GuardNondet: o << (neg ? "!nondet()" : "nondet()"); break;
  case StmtKind::StoreConst: o << a << "->" << sel << " = " << num; break;
  case StmtKind::CopyData: o << a << "->" << sel << " = " << b << "->" << sel2; break;
  case StmtKind::GuardData:
    o << a << "->" << sel << (neg ? " != " : " == ") << b << "->" << sel2;
    break;
  case StmtKind::Skip: o << "skip"; break;
  case StmtKind::Call: {
    if (outs.size() == 1) o << outs[0] << " = ";
    else if (outs.size() > 1) {
      o << "(";
      for (size_t i = 0; i < outs.size(); ++i) o << (i ? ", " : "") << outs[i];
      o << ") = ";
    }
    o << op << "(";
    for (size_t i = 0; i < ins.size(); ++i) o << (i ? ", " : "") << ins[i];
    o << ")";
    break;
  }
  case StmtKind::GuardEnd: o << a << (neg ? " != " : " == ") << "end(" << b << ")"; break;
  case StmtKind::GuardIsEmpty: o << "0" << (neg ? " != " : " == ") << "is_empty(" << b << ")"; break;
  }
  return o.str();
}

bool Program::is_ptr_var(const std::string &v) const {
  return std::find(ptr_vars.begin(), ptr_vars.end(), v) != ptr_vars.end();
}
bool Program::is_ctr_var(const std::string &v) const {
  return std::find(ctr_vars.begin(), ctr_vars.end(), v) != ctr_vars.end();
}
bool Program::is_data_sel(const std::string &s) const {
  return std::find(data_sels.begin(), data_sels.end(), s) != data_sels.end();
}

namespace {

struct Lexer {
  const std::string &src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string &s) : src(s) {}

  void skip_ws() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
        while (pos < src.size() && src[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') { ++line; col = 0; }
        ++pos; ++col;
      } else break;
    }
  }
  bool eof() { skip_ws(); return pos >= src.size(); }
  char peek() { skip_ws(); return pos < src.size() ? src[pos] : '\0'; }
  bool lookahead(const std::string &s) {
    skip_ws();
    return src.compare(pos, s.size(), s) == 0;
  }
  void expect(const std::string &s) {
    skip_ws();
    if (src.compare(pos, s.size(), s) != 0)
      throw ParseError("expected '" + s + "'", line, col);
    pos += s.size(); col += (int)s.size();
  }
  bool accept(const std::string &s) {
    skip_ws();
    if (src.compare(pos, s.size(), s) == 0) {
      // keywords must not swallow identifier prefixes
      if (std::isalpha(static_cast<unsigned char>(s[0]))) {
        size_t end = pos + s.size();
        if (end < src.size() &&
            (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
          return false;
      }
      pos += s.size(); col += (int)s.size();
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    if (pos >= src.size() || !(std::isalpha(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      throw ParseError("expected identifier", line, col);
    size_t s = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
      ++pos; ++col;
    }
    return src.substr(s, pos - s);
  }
  long long number() {
    skip_ws();
    bool negv = false;
    if (pos < src.size() && src[pos] == '-') { negv = true; ++pos; ++col; }
    if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
      throw ParseError("expected number", line, col);
    long long v = 0;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
      v = v * 10 + (src[pos] - '0'); ++pos; ++col;
    }
    return negv ? -v : v;
  }
};

struct Parser {
  Lexer lx;
  Program prog;
  bool allow_container;

  Parser(const std::string &s, bool ac) : lx(s), allow_container(ac) {}

  [[noreturn]] void err(const std::string &m) { throw ParseError(m, lx.line, lx.col); }

  void check_ptr_var(const std::string &v) {
    if (!prog.is_ptr_var(v)) err("undeclared pointer variable '" + v + "'");
  }
  void check_ctr_var(const std::string &v) {
    if (!prog.is_ctr_var(v)) err("undeclared container variable '" + v + "'");
  }
  bool is_ptr_sel(const std::string &s) { return s == kSelNext || s == kSelPrev; }
  void check_sel(const std::string &s) {
    if (!is_ptr_sel(s) && !prog.is_data_sel(s)) err("unknown selector '" + s + "'");
  }

  Program run() {
    parse_header();
    while (true) {
      if (lx.accept("ptr")) {
        prog.ptr_vars.push_back(lx.ident());
        lx.expect(";");
      } else if (lx.accept("data")) {
        std::string d = lx.ident();
        if (!prog.is_data_sel(d)) prog.data_sels.push_back(d);
        lx.expect(";");
      } else if (lx.lookahead("list")) {
        if (!allow_container) err("container statement in input");
        lx.accept("list");
        prog.ctr_vars.push_back(lx.ident());
        lx.expect(";");
      } else break;
    }
    prog.body = parse_block_items();
    if (!lx.eof()) err("trailing input");
    return std::move(prog);
  }

  void parse_header() {
    lx.expect("struct");
    lx.expect("{");
    std::vector<std::string> fields;
    fields.push_back(lx.ident());
    while (lx.accept(",")) fields.push_back(lx.ident());
    lx.expect("}");
    lx.expect(";");
    if (fields.size() < 2 || fields[0] != kSelNext || fields[1] != kSelPrev)
      err("record header must start with next, prev");
    for (size_t i = 2; i < fields.size(); ++i) prog.data_sels.push_back(fields[i]);
  }

  Block parse_block_items() {
    Block b;
    while (!lx.eof() && !lx.lookahead("}")) b.items.push_back(parse_item());
    return b;
  }

  Block parse_braced() {
    lx.expect("{");
    Block b = parse_block_items();
    lx.expect("}");
    return b;
  }

  Item parse_item() {
    if (lx.accept("if")) {
      Item it; it.kind = Item::If;
      it.leaf_id = prog.next_leaf++;
      lx.expect("(");
      it.stmt = parse_guard();
      lx.expect(")");
      it.arm1 = std::make_unique<Block>(parse_braced());
      it.arm2 = std::make_unique<Block>();
      if (lx.accept("else")) *it.arm2 = parse_braced();
      return it;
    }
    if (lx.accept("while")) {
      Item it; it.kind = Item::While;
      it.leaf_id = prog.next_leaf++;
      lx.expect("(");
      it.stmt = parse_guard();
      lx.expect(")");
      it.arm1 = std::make_unique<Block>(parse_braced());
      return it;
    }
    Item it; it.kind = Item::Plain;
    it.stmt = parse_plain();
    it.leaf_id = prog.next_leaf++;
    lx.expect(";");
    return it;
  }

  void require_container(const char *what) {
    if (!allow_container) err(std::string("container statement in input (") + what + ")");
  }

  Statement parse_guard() {
    Statement s;
    if (lx.accept("nondet")) {
      lx.expect("("); lx.expect(")");
      s.kind = StmtKind::GuardNondet;
      return s;
    }
    if (lx.lookahead("0")) { // 0 ==/!= is_empty(L)
      lx.expect("0");
      bool negv = parse_cmp();
      lx.expect("is_empty");
      lx.expect("(");
      std::string L = lx.ident();
      lx.expect(")");
      require_container("is_empty");
      check_ctr_var(L);
      s.kind = StmtKind::GuardIsEmpty; s.neg = negv; s.b = L;
      return s;
    }
    std::string v = lx.ident();
    check_ptr_var(v);
    if (lx.accept("->")) {
      std::string d = lx.ident();
      if (!prog.is_data_sel(d)) err("data guard needs a data selector");
      bool negv = parse_cmp();
      std::string v2 = lx.ident();
      check_ptr_var(v2);
      lx.expect("->");
      std::string d2 = lx.ident();
      if (!prog.is_data_sel(d2)) err("data guard needs a data selector");
      s.kind = StmtKind::GuardData; s.neg = negv;
      s.a = v; s.sel = d; s.b = v2; s.sel2 = d2;
      return s;
    }
    bool negv = parse_cmp();
    if (lx.accept("NULL")) {
      s.kind = StmtKind::GuardPtr; s.neg = negv; s.a = v;
      return s;
    }
    if (lx.accept("end")) {
      lx.expect("(");
      std::string L = lx.ident();
      lx.expect(")");
      require_container("end");
      check_ctr_var(L);
      s.kind = StmtKind::GuardEnd; s.neg = negv; s.a = v; s.b = L;
      return s;
    }
    std::string v2 = lx.ident();
    check_ptr_var(v2);
    s.kind = StmtKind::GuardPtr; s.neg = negv; s.a = v; s.b = v2;
    return s;
  }

  bool parse_cmp() {
    if (lx.accept("==")) return false;
    if (lx.accept("!=")) return true;
    err("expected == or !=");
  }

  static const std::vector<std::string> &container_ops() {
    static const std::vector<std::string> ops = {
        "push_back", "push_front", "pop_back", "pop_front",
        "create_empty", "destroy_empty", "front", "back", "next", "prev"};
    return ops;
  }

  Statement parse_plain() {
    Statement s;
    if (lx.accept("free")) {
      lx.expect("(");
      s.a = lx.ident();
      check_ptr_var(s.a);
      lx.expect(")");
      s.kind = StmtKind::Free;
      return s;
    }
    if (lx.accept("skip")) { s.kind = StmtKind::Skip; return s; }
    if (lx.lookahead("(")) { // (y1, y2) = op(xs)
      lx.expect("(");
      std::vector<std::string> outs;
      outs.push_back(lx.ident());
      while (lx.accept(",")) outs.push_back(lx.ident());
      lx.expect(")");
      lx.expect("=");
      return parse_call(outs);
    }
    std::string v = lx.ident();
    // bare container call without outputs
    if (std::find(container_ops().begin(), container_ops().end(), v) != container_ops().end() &&
        lx.lookahead("(")) {
      // rewind not possible; handle directly
      return finish_call({}, v);
    }
    if (lx.accept("->")) {
      std::string f = lx.ident();
      check_sel(f);
      lx.expect("=");
      if (is_ptr_sel(f)) {
        s.kind = StmtKind::StoreSel; s.a = v; s.sel = f;
        check_ptr_var(v);
        if (lx.accept("NULL")) { s.b.clear(); return s; }
        s.b = lx.ident();
        check_ptr_var(s.b);
        return s;
      }
      check_ptr_var(v);
      if (lx.peek() == '-' || std::isdigit(static_cast<unsigned char>(lx.peek()))) {
        s.kind = StmtKind::StoreConst; s.a = v; s.sel = f; s.num = lx.number();
        return s;
      }
      std::string v2 = lx.ident();
      check_ptr_var(v2);
      lx.expect("->");
      std::string f2 = lx.ident();
      if (!prog.is_data_sel(f2)) err("data copy needs a data selector");
      s.kind = StmtKind::CopyData; s.a = v; s.sel = f; s.b = v2; s.sel2 = f2;
      return s;
    }
    lx.expect("=");
    if (lx.accept("malloc")) {
      lx.expect("("); lx.expect(")");
      check_ptr_var(v);
      s.kind = StmtKind::AssignMalloc; s.a = v;
      return s;
    }
    if (lx.accept("NULL")) {
      check_ptr_var(v);
      s.kind = StmtKind::AssignNull; s.a = v;
      return s;
    }
    std::string r = lx.ident();
    if (std::find(container_ops().begin(), container_ops().end(), r) != container_ops().end() &&
        lx.lookahead("(")) {
      return finish_call({v}, r);
    }
    if (lx.accept("->")) {
      check_ptr_var(v);
      std::string f = lx.ident();
      check_sel(f);
      if (!is_ptr_sel(f)) err("pointer assignment needs a pointer selector");
      check_ptr_var(r);
      s.kind = StmtKind::AssignSel; s.a = v; s.b = r; s.sel = f;
      return s;
    }
    check_ptr_var(v);
    check_ptr_var(r);
    s.kind = StmtKind::AssignVar; s.a = v; s.b = r;
    return s;
  }

  Statement parse_call(std::vector<std::string> outs) {
    std::string op = lx.ident();
    return finish_call(std::move(outs), op);
  }

  Statement finish_call(std::vector<std::string> outs, const std::string &op) {
    require_container(op.c_str());
    if (std::find(container_ops().begin(), container_ops().end(), op) == container_ops().end())
      err("unknown container operation '" + op + "'");
    Statement s;
    s.kind = StmtKind::Call; s.op = op; s.outs = std::move(outs);
    lx.expect("(");
    if (!lx.lookahead(")")) {
      s.ins.push_back(lx.ident());
      while (lx.accept(",")) s.ins.push_back(lx.ident());
    }
    lx.expect(")");
    for (auto &o : s.outs)
      if (!prog.is_ptr_var(o) && !prog.is_ctr_var(o)) err("undeclared output '" + o + "'");
    for (auto &i : s.ins)
      if (!prog.is_ptr_var(i) && !prog.is_ctr_var(i)) err("undeclared input '" + i + "'");
    return s;
  }
};

void print_block(std::ostringstream &o, const Block &b, int ind);

void print_item(std::ostringstream &o, const Item &it, int ind) {
  std::string pad(ind * 2, ' ');
  switch (it.kind) {
  case Item::Plain:
    o << pad << it.stmt.str() << ";\n";
    break;
  case Item::If:
    o << pad << "if (" << it.stmt.str() << ") {\n";
    print_block(o, *it.arm1, ind + 1);
    o << pad << "}";
    if (!it.arm2->items.empty()) {
      o << " else {\n";
      print_block(o, *it.arm2, ind + 1);
      o << pad << "}";
    }
    o << "\n";
    break;
  case Item::While:
    o << pad << "while (" << it.stmt.str() << ") {\n";
    print_block(o, *it.arm1, ind + 1);
    o << pad << "}\n";
    break;
  }
}

void print_block(std::ostringstream &o, const Block &b, int ind) {
  for (const auto &it : b.items) print_item(o, it, ind);
}

} // namespace

Program parse_program(const std::string &text, bool allow_container) {
  Parser p(text, allow_container);
  return p.run();
}

std::string print_program(const Program &p) {
  std::ostringstream o;
  o << "struct { " << kSelNext << ", " << kSelPrev;
  for (const auto &d : p.data_sels) o << ", " << d;
  o << " };\n";
  for (const auto &v : p.ptr_vars) o << "ptr " << v << ";\n";
  for (const auto &v : p.ctr_vars) o << "list " << v << ";\n";
  o << "\n";
  print_block(o, p.body, 0);
  return o.str();
}

std::vector<int> Cfg::out_edges(int loc) const {
  std::vector<int> r;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].src == loc) r.push_back((int)i);
  return r;
}
std::vector<int> Cfg::in_edges(int loc) const {
  std::vector<int> r;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].dst == loc) r.push_back((int)i);
  return r;
}

bool Cfg::check_invariants(std::string *why) const {
  std::set<std::pair<int, int>> seen;
  for (const auto &e : edges) {
    if (!seen.insert({e.src, e.dst}).second) {
      if (why) *why = "duplicate edge between " + std::to_string(e.src) + " and " + std::to_string(e.dst);
      return false;
    }
  }
  std::vector<char> reach(n_locs, 0);
  std::vector<int> stack{entry};
  reach[entry] = 1;
  while (!stack.empty()) {
    int l = stack.back(); stack.pop_back();
    for (const auto &e : edges)
      if (e.src == l && !reach[e.dst]) { reach[e.dst] = 1; stack.push_back(e.dst); }
  }
  for (int l = 0; l < n_locs; ++l)
    if (!reach[l]) {
      if (why) *why = "location " + std::to_string(l) + " unreachable";
      return false;
    }
  return true;
}

namespace {

struct Lowerer {
  LoweredCfg out;
  std::set<std::pair<int, int>> used;

  int fresh() { return out.cfg.n_locs++; }

  // Adds (src,stmt,dst), inserting a skip hop if (src,dst) is taken.
  void add_edge(int src, const Statement &st, int dst, int leaf) {
    if (used.count({src, dst})) {
      int mid = fresh();
      used.insert({src, mid});
      if (leaf >= 0) out.leaf_edges[leaf].push_back((int)out.cfg.edges.size());
      out.cfg.edges.push_back({src, st, mid, leaf});
      Statement sk; sk.kind = StmtKind::Skip;
      used.insert({mid, dst});
      out.cfg.edges.push_back({mid, sk, dst, -1});
      return;
    }
    used.insert({src, dst});
    if (leaf >= 0) out.leaf_edges[leaf].push_back((int)out.cfg.edges.size());
    out.cfg.edges.push_back({src, st, dst, leaf});
  }

  // Lowers block starting at `from`, returns the location after it.
  int lower_block(Block &b, int from) {
    int cur = from;
    for (size_t i = 0; i < b.items.size(); ++i) {
      Item &it = b.items[i];
      if (it.kind == Item::Plain) {
        int nxt = fresh();
        out.anchors[nxt] = {LocAnchor::Point, &b, (int)i + 1, nullptr, nullptr, 0};
        add_edge(cur, it.stmt, nxt, it.leaf_id);
        cur = nxt;
      } else if (it.kind == Item::If) {
        int t0 = fresh();
        out.anchors[t0] = {LocAnchor::Point, it.arm1.get(), 0, nullptr, nullptr, 0};
        size_t g1 = out.cfg.edges.size();
        add_edge(cur, it.stmt, t0, it.leaf_id);
        int join = -1;
        int tEnd = lower_block(*it.arm1, t0);
        join = fresh();
        out.anchors[join] = {LocAnchor::Point, &b, (int)i + 1, nullptr, nullptr, 0};
        link(tEnd, join);
        size_t g2 = out.cfg.edges.size();
        if (it.arm2->items.empty()) {
          add_edge(cur, it.stmt.complement(), join, it.leaf_id);
        } else {
          int e0 = fresh();
          out.anchors[e0] = {LocAnchor::Point, it.arm2.get(), 0, nullptr, nullptr, 0};
          add_edge(cur, it.stmt.complement(), e0, it.leaf_id);
          int eEnd = lower_block(*it.arm2, e0);
          link(eEnd, join);
        }
        out.guard_edges[cur] = {(int)g1, (int)g2};
        cur = join;
      } else { // While
        // `cur` becomes the loop head.
        out.anchors[cur] = {LocAnchor::LoopHead, nullptr, 0, &it, &b, (int)i};
        int body0 = fresh();
        out.anchors[body0] = {LocAnchor::Point, it.arm1.get(), 0, nullptr, nullptr, 0};
        size_t g1 = out.cfg.edges.size();
        add_edge(cur, it.stmt, body0, it.leaf_id);
        int bodyEnd = lower_block(*it.arm1, body0);
        link(bodyEnd, cur); // back edge
        int after = fresh();
        out.anchors[after] = {LocAnchor::Point, &b, (int)i + 1, nullptr, nullptr, 0};
        size_t g2 = out.cfg.edges.size();
        add_edge(cur, it.stmt.complement(), after, it.leaf_id);
        out.guard_edges[cur] = {(int)g1, (int)g2};
        cur = after;
      }
    }
    return cur;
  }

  void link(int a, int b) {
    if (a == b) return;
    Statement sk; sk.kind = StmtKind::Skip;
    add_edge(a, sk, b, -1);
  }
};

} // namespace

LoweredCfg build_cfg(Program &p) {
  Lowerer lw;
  int entry = lw.fresh();
  lw.out.anchors[entry] = {LocAnchor::Point, &p.body, 0, nullptr, nullptr, 0};
  lw.out.cfg.entry = entry;
  int last = lw.lower_block(p.body, entry);
  lw.out.cfg.exit = last;
  std::string why;
  if (!lw.out.cfg.check_invariants(&why)) throw LiftError("cfg invariant: " + why);
  return std::move(lw.out);
}

static bool complementary(const Statement &x, const Statement &y) {
  if (x.kind != y.kind || x.neg == y.neg) return false;
  switch (x.kind) {
  case StmtKind::GuardPtr: return x.a == y.a && x.b == y.b;
  case StmtKind::GuardNondet: return true;
  case StmtKind::GuardData:
    return x.a == y.a && x.b == y.b && x.sel == y.sel && x.sel2 == y.sel2;
  case StmtKind::GuardEnd: return x.a == y.a && x.b == y.b;
  case StmtKind::GuardIsEmpty: return x.b == y.b;
  default: return false;
  }
}

std::vector<Diagnostic> check_branch_determinism(const Cfg &cfg) {
  std::vector<Diagnostic> ds;
  for (int l = 0; l < cfg.n_locs; ++l) {
    auto outs = cfg.out_edges(l);
    if (outs.size() <= 1) continue;
    if (outs.size() == 2) {
      const Statement &x = cfg.edges[outs[0]].stmt;
      const Statement &y = cfg.edges[outs[1]].stmt;
      if (complementary(x, y)) continue;
      ds.push_back({"branch at location " + std::to_string(l) +
                        " is not a complementary guard pair: '" + x.str() +
                        "' vs '" + y.str() + "'",
                    l});
    } else {
      ds.push_back({"location " + std::to_string(l) + " has " +
                        std::to_string(outs.size()) + " successors",
                    l});
    }
  }
  return ds;
}

} // namespace lift
