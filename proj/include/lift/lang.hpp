#pragma once

#include "lift/base.hpp"

#include <memory>

namespace lift {

enum class StmtKind {
  AssignVar,    // a = b
  AssignSel,    // a = b->sel
  AssignMalloc, // a = malloc()
  AssignNull,   // a = NULL
  StoreSel,     // a->sel = b   (b empty means NULL)
  Free,         // free(a)
  GuardPtr,     // a ==/!= b    (b empty means NULL)
  GuardNondet,  // nondet() branch; neg marks the false branch
  StoreConst,   // a->sel = num
  CopyData,     // a->sel = b->sel2
  GuardData,    // a->sel ==/!= b->sel2
  Skip,
  Call,         // outs = op(ins)
  GuardEnd,     // a ==/!= end(b)
  GuardIsEmpty, // 0 ==/!= is_empty(b)
};

struct Statement {
  StmtKind kind = StmtKind::Skip;
  bool neg = false; // for guards: true means "!="
  std::string a, b, sel, sel2;
  long long num = 0;
  std::string op;
  std::vector<std::string> outs, ins;

  bool is_guard() const {
    switch (kind) {
    case StmtKind::GuardPtr:
    case StmtKind::GuardNondet:
    case StmtKind::GuardData:
    case StmtKind::GuardEnd:
    case StmtKind::GuardIsEmpty:
      return true;
    default:
      return false;
    }
  }
  Statement complement() const; // guard with flipped sense
  std::string str() const;      // surface syntax

  friend bool operator==(const Statement &x, const Statement &y);
};

// Structured program body; Plain leaves carry the statement.
struct Block;
struct Item {
  enum Kind { Plain, If, While } kind = Plain;
  Statement stmt;               // Plain: the statement; If/While: the guard (positive sense)
  std::unique_ptr<Block> arm1;  // then / loop body
  std::unique_ptr<Block> arm2;  // else (If only)
  int leaf_id = -1;             // stable id mapping items to CFG edges
};
struct Block {
  std::vector<Item> items;
};

struct Program {
  std::vector<std::string> data_sels; // from the struct header (next/prev excluded)
  std::vector<std::string> ptr_vars;
  std::vector<std::string> ctr_vars; // container programs only
  Block body;
  int next_leaf = 0;

  bool is_ptr_var(const std::string &v) const;
  bool is_ctr_var(const std::string &v) const;
  bool is_data_sel(const std::string &s) const;
};

struct ParseError : LiftError {
  int line, col;
  ParseError(const std::string &msg, int line_, int col_)
      : LiftError(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

// Parses the mini pointer language. Container statements are rejected unless
// allow_container is set (used when re-reading lifted output).
Program parse_program(const std::string &text, bool allow_container = false);

std::string print_program(const Program &p);

// Where a CFG location sits in the structured program, for edge addition.
struct LocAnchor {
  enum Kind { Point, LoopHead, None } kind = None;
  Block *block = nullptr;
  int index = 0;     // Point: insertion index in block
  Item *loop = nullptr; // LoopHead: the while item
  Block *outer = nullptr; // LoopHead: block containing the loop
  int outer_index = 0;    // LoopHead: its index there
};

struct CfgEdge {
  int src = -1;
  Statement stmt;
  int dst = -1;
  int leaf = -1; // originating AST item, -1 for structural skip edges
};

struct Cfg {
  int entry = 0;
  int exit = 0;
  int n_locs = 0;
  std::vector<CfgEdge> edges;

  std::vector<int> out_edges(int loc) const;
  std::vector<int> in_edges(int loc) const;
  bool check_invariants(std::string *why = nullptr) const;
};

// CFG plus the bookkeeping needed to mirror edge edits back onto the AST.
struct LoweredCfg {
  Cfg cfg;
  std::map<int, LocAnchor> anchors;            // location -> structural position
  std::map<int, std::vector<int>> guard_edges; // branch location -> its two edge ids
  std::map<int, std::vector<int>> leaf_edges;  // item leaf id -> its edge ids
};

LoweredCfg build_cfg(Program &p);

struct Diagnostic {
  std::string msg;
  int loc = -1;
};

// Empty iff every branching is a complementary guard pair (or declared nondet).
std::vector<Diagnostic> check_branch_determinism(const Cfg &cfg);

} // namespace lift
