#include "lift/transform.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace lift {

// ---------------------------------------------------------------------------
// Plan construction and application
// ---------------------------------------------------------------------------

RewritePlan make_plan(const AnnotatedCfg &a, const std::vector<OpSpec> &lib,
                      const Recipe &r, const ParamAssignment &nu) {
  RewritePlan plan;
  for (const auto &e : r.entries)
    for (size_t i = 0; i < e.chain.edges.size(); ++i)
      if (e.chain.implementing[i]) plan.removed_edges.insert(e.chain.edges[i]);

  std::set<std::string> declared_p, declared_c;
  auto declare = [&](const std::string &name, bool ctr) {
    if (ctr) {
      if (declared_c.insert(name).second) plan.new_ctr_vars.push_back(name);
    } else {
      if (declared_p.insert(name).second) plan.new_ptr_vars.push_back(name);
    }
  };

  for (const auto &ent : nu.entries) plan.additions[ent.first].push_back(ent.second);

  for (const auto &site : r.sites) {
    const OpSpec &spec = lib[site.spec_idx];
    Statement call;
    call.kind = StmtKind::Call;
    call.op = site.op;
    for (const auto &p : spec.outs) call.outs.push_back(site.lam.at(p));
    for (const auto &p : spec.ins) call.ins.push_back(site.lam.at(p));
    plan.additions[site.loc].push_back(call);
    // parameter kinds follow the chain bindings
    const ChainMatch &m = r.entries[site.chain_ids[0]].chain;
    for (const auto &p : spec.ins) declare(site.lam.at(p), m.bind_in_c.count(p) != 0);
    for (const auto &p : spec.outs) declare(site.lam.at(p), m.bind_out_c.count(p) != 0);
  }
  for (const auto &ent : nu.entries) {
    const Statement &st = ent.second;
    if (st.kind == StmtKind::Call && st.op == "create_empty") declare(st.outs[0], true);
  }
  // order per location: assignments first, then calls, both deterministically
  for (auto &kv : plan.additions) {
    std::stable_sort(kv.second.begin(), kv.second.end(),
                     [](const Statement &x, const Statement &y) {
                       bool xc = x.kind == StmtKind::Call && op_is_destructive(x.op);
                       bool yc = y.kind == StmtKind::Call && op_is_destructive(y.op);
                       if (xc != yc) return yc;
                       return x.str() < y.str();
                     });
  }
  return plan;
}

namespace {

Item *find_item(Block &b, int leaf) {
  for (auto &it : b.items) {
    if (it.leaf_id == leaf) return &it;
    if (it.arm1)
      if (Item *r = find_item(*it.arm1, leaf)) return r;
    if (it.arm2)
      if (Item *r = find_item(*it.arm2, leaf)) return r;
  }
  return nullptr;
}

} // namespace

void replace_destructive(Program &p, const LoweredCfg &low, const RewritePlan &plan) {
  for (int ei : plan.removed_edges) {
    int leaf = low.cfg.edges[ei].leaf;
    if (leaf < 0) throw LiftError("removed edge has no statement item");
    Item *it = find_item(p.body, leaf);
    if (!it || it->kind != Item::Plain)
      throw LiftError("removed edge is not a plain statement");
    it->stmt = Statement{}; // skip
  }
  for (const auto &v : plan.new_ptr_vars) p.ptr_vars.push_back(v);
  for (const auto &v : plan.new_ctr_vars) p.ctr_vars.push_back(v);

  // group insertions per anchor block, apply at descending indices
  struct Ins {
    Block *block;
    int index;
    std::vector<Statement> stmts;
  };
  std::vector<Ins> inss;
  for (const auto &kv : plan.additions) {
    auto it = low.anchors.find(kv.first);
    if (it == low.anchors.end() || it->second.kind == LocAnchor::None)
      throw LiftError("no anchor for location " + std::to_string(kv.first));
    const LocAnchor &an = it->second;
    if (an.kind == LocAnchor::Point) {
      inss.push_back({an.block, an.index, kv.second});
    } else { // LoopHead: before the loop and at the end of its body
      inss.push_back({an.outer, an.outer_index, kv.second});
      inss.push_back({an.loop->arm1.get(), (int)an.loop->arm1->items.size(), kv.second});
    }
  }
  std::stable_sort(inss.begin(), inss.end(),
                   [](const Ins &x, const Ins &y) { return x.index > y.index; });
  for (auto &ins : inss) {
    int at = std::min<int>(ins.index, (int)ins.block->items.size());
    for (size_t k = 0; k < ins.stmts.size(); ++k) {
      Item it;
      it.kind = Item::Plain;
      it.stmt = ins.stmts[k];
      it.leaf_id = p.next_leaf++;
      ins.block->items.insert(ins.block->items.begin() + at + (int)k, std::move(it));
    }
  }
}

// ---------------------------------------------------------------------------
// Container-variable labeling (App. E)
// ---------------------------------------------------------------------------

Labeling propagate_container_names(const AnnotatedCfg &a, const Recipe &r) {
  Labeling lab;
  std::set<int> chain_edges;
  for (const auto &e : r.entries)
    for (int ei : e.chain.edges) chain_edges.insert(ei);

  auto seed = [&](int spc, const CtrAbs &cs, const std::string &name) {
    if (cs.top || cs.cs.empty()) return;
    auto key = std::make_pair(spc, cs.cs.object_set());
    if (!lab.count(key)) lab[key] = name;
  };
  for (const auto &site : r.sites)
    for (int ci : site.chain_ids) {
      const ChainMatch &m = r.entries[ci].chain;
      for (const auto &kv : m.bind_out_c)
        seed(m.spc_trace.back(), kv.second, site.lam.at(kv.first));
      for (const auto &kv : m.bind_in_c)
        seed(m.spc_trace.front(), kv.second, site.lam.at(kv.first));
    }

  // object relation per succ entry
  std::map<std::tuple<int, int, int>, int> key2idx;
  for (size_t i = 0; i < a.succ.size(); ++i)
    key2idx[{a.succ[i].src_spc, a.succ[i].dst_spc, a.succ[i].edge}] = (int)i;
  std::map<int, Rel> rel_of;
  for (const auto &t : a.trans) {
    auto it = key2idx.find({t.src_spc, t.dst_spc, t.edge});
    if (it != key2idx.end()) rel_of[it->second].push_back({t.src, t.dst});
  }

  bool grew = true;
  while (grew) {
    grew = false;
    for (size_t si = 0; si < a.succ.size(); ++si) {
      const auto &se = a.succ[si];
      if (chain_edges.count(se.edge)) continue;
      const Rel &rel = rel_of.count((int)si) ? rel_of[(int)si] : Rel{};
      std::vector<std::pair<std::pair<int, std::set<ObjId>>, std::string>> stage;
      for (const auto &kv : lab) {
        if (kv.first.first != se.src_spc) continue;
        Rel restr;
        std::set<ObjId> img;
        for (const auto &p : rel)
          if (kv.first.second.count(p.first)) {
            restr.push_back(p);
            img.insert(p.second);
          }
        if (img.empty()) continue;
        img = close_objects(a.spcs[se.dst_spc].g, img);
        Spc sub0 = induced_sub(a.spcs[se.src_spc], kv.first.second);
        Spc sub1 = induced_sub(a.spcs[se.dst_spc], img);
        if (!update_is_identity(sub0, restr, sub1)) continue;
        bool is_cs = false;
        for (const auto &cs : container_shapes(a.spcs[se.dst_spc].g))
          if (cs.object_set() == img) is_cs = true;
        if (!is_cs) continue;
        stage.push_back({{se.dst_spc, img}, kv.second});
      }
      for (auto &s : stage)
        if (!lab.count(s.first)) {
          lab[s.first] = s.second;
          grew = true;
        }
    }
  }
  return lab;
}

// ---------------------------------------------------------------------------
// Non-destructive operations (App. E)
// ---------------------------------------------------------------------------

namespace {

struct EdgeCtx {
  const AnnotatedCfg &a;
  const Labeling &lab;
  std::vector<int> sources(int edge) const {
    std::vector<int> s;
    for (const auto &se : a.succ)
      if (se.edge == edge) s.push_back(se.src_spc);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }
  // container shapes labeled L in the given spc
  std::optional<Cs> labeled_cs(int spc, const std::string &L) const {
    for (const auto &kv : lab) {
      if (kv.first.first != spc || kv.second != L) continue;
      for (const auto &cs : container_shapes(a.spcs[spc].g))
        if (cs.object_set() == kv.first.second) return cs;
    }
    return std::nullopt;
  }
  bool has_any_cs(int spc) const {
    return !container_shapes(a.spcs[spc].g).empty();
  }
  std::vector<std::string> label_names() const {
    std::set<std::string> n;
    for (const auto &kv : lab) n.insert(kv.second);
    return {n.begin(), n.end()};
  }
};

Val eval_var(const Spc &c, const std::string &v) {
  auto it = c.sp.find(v);
  return it == c.sp.end() ? Val::top() : it->second;
}

// the value "p" or "p->s" in an SPC; nullopt when not evaluable to a value
std::optional<Val> eval_form(const Spc &c, const std::string &v,
                             const std::string &sel) {
  Val base = eval_var(c, v);
  if (sel.empty()) return base;
  if (!base.is_reg()) return std::nullopt;
  if (c.g.erased_slot(base.reg, sel)) return std::nullopt;
  const Val *x = c.g.pget(base.reg, sel);
  if (!x) return std::nullopt;
  return *x;
}

bool in_cs(const Cs &cs, const Val &v) {
  if (!v.is_reg()) return false;
  for (const auto &o : cs.seq) {
    if (!o.dls && o.front == v.reg) return true;
    // a variable cannot point into a segment interior, ends suffice
  }
  return false;
}

// go-to-front / go-to-back for `lhs = v` or `lhs = v->sel`
std::optional<Statement> match_goto(const EdgeCtx &ctx, int edge,
                                    const std::string &lhs, const std::string &v,
                                    const std::string &sel) {
  auto srcs = ctx.sources(edge);
  if (srcs.empty()) return std::nullopt;
  for (const std::string &mode : {"front", "next", "prev", "back"}) {
    if ((mode == "next" && sel != kSelNext) || (mode == "prev" && sel != kSelPrev))
      continue;
    for (const auto &L : ctx.label_names()) {
      bool ok = true;
      for (int spc : srcs) {
        const Spc &C = ctx.a.spcs[spc];
        auto cs = ctx.labeled_cs(spc, L);
        if (mode == "front" || mode == "back") {
          auto val = eval_form(C, v, sel);
          if (!ctx.has_any_cs(spc)) {
            if (!val || !val->is_null()) { ok = false; break; }
            continue;
          }
          if (!cs || cs->empty() || !val) { ok = false; break; }
          int want = mode == "front" ? cs->seq.front().front : cs->seq.back().back;
          if (!(val->is_reg() && val->reg == want)) { ok = false; break; }
        } else {
          // go-to-next / go-to-prev need the cursor inside the container
          if (!cs || cs->empty()) { ok = false; break; }
          Val cur = eval_var(C, v);
          if (!in_cs(*cs, cur)) { ok = false; break; }
        }
      }
      if (!ok) continue;
      Statement st;
      st.kind = StmtKind::Call;
      st.outs = {lhs};
      if (mode == "front" || mode == "back") {
        st.op = mode;
        st.ins = {L};
      } else {
        st.op = mode;
        st.ins = {L, v};
      }
      return st;
    }
  }
  return std::nullopt;
}

// end-reached / is-empty for guards `a cmp b` (b empty = NULL)
std::optional<Statement> match_query(const EdgeCtx &ctx, int edge, const Statement &g) {
  auto srcs = ctx.sources(edge);
  if (srcs.empty()) return std::nullopt;
  int loc = ctx.a.cfg.edges[edge].src;
  struct Slot {
    std::string name; // empty = NULL literal
  };
  std::vector<std::pair<Slot, Slot>> xy;
  xy.push_back({{g.a}, {g.b}});
  if (!g.b.empty()) xy.push_back({{g.b}, {g.a}});
  auto val_of = [&](const Spc &C, const Slot &s) {
    return s.name.empty() ? Val::null() : eval_var(C, s.name);
  };
  for (const auto &L : ctx.label_names()) {
    for (const auto &[x, y] : xy) {
      if (x.name.empty()) continue; // the tested side must be a variable
      bool common = true;
      for (int spc : srcs) {
        const Spc &C = ctx.a.spcs[spc];
        if (!val_of(C, y).is_null()) { common = false; break; }
        auto cs = ctx.labeled_cs(spc, L);
        Val xv = val_of(C, x);
        if (!ctx.has_any_cs(spc)) {
          if (!xv.is_null()) { common = false; break; }
          continue;
        }
        if (!cs) { common = false; break; }
        if (!(xv.is_null() || in_cs(*cs, xv))) { common = false; break; }
      }
      if (!common) continue;
      // end-reached: both witness SPCs at the location
      bool some_null = false, some_in = false, all_in = true;
      for (int spc : ctx.a.at(loc)) {
        const Spc &C = ctx.a.spcs[spc];
        auto cs = ctx.labeled_cs(spc, L);
        if (!cs) continue;
        Val xv = val_of(C, x);
        if (xv.is_null()) some_null = true;
        if (in_cs(*cs, xv)) some_in = true;
      }
      for (int spc : srcs) {
        const Spc &C = ctx.a.spcs[spc];
        auto cs = ctx.labeled_cs(spc, L);
        if (!cs) continue;
        if (!in_cs(*cs, val_of(C, x))) all_in = false;
      }
      if (some_null && some_in) {
        Statement st;
        st.kind = StmtKind::GuardEnd;
        st.a = x.name;
        st.b = L;
        st.neg = g.neg;
        return st;
      }
      // is-empty: x belongs to the container whenever a shape exists
      bool shape_somewhere = false;
      for (int spc : ctx.a.at(loc))
        if (ctx.labeled_cs(spc, L)) shape_somewhere = true;
      if (shape_somewhere && all_in && !some_null) {
        Statement st;
        st.kind = StmtKind::GuardIsEmpty;
        st.b = L;
        st.neg = !g.neg; // `x == NULL` holds exactly when is_empty(L) != 0
        return st;
      }
    }
  }
  return std::nullopt;
}

} // namespace

void replace_nondestructive(Program &p, const LoweredCfg &low, const AnnotatedCfg &a,
                            const Labeling &lab) {
  EdgeCtx ctx{a, lab};
  for (const auto &kv : low.leaf_edges) {
    Item *it = find_item(p.body, kv.first);
    if (!it) continue;
    if (it->kind == Item::Plain) {
      const Statement &st = it->stmt;
      int edge = kv.second[0];
      std::optional<Statement> rep;
      if (st.kind == StmtKind::AssignVar)
        rep = match_goto(ctx, edge, st.a, st.b, "");
      else if (st.kind == StmtKind::AssignSel)
        rep = match_goto(ctx, edge, st.a, st.b, st.sel);
      if (rep) it->stmt = *rep;
    } else {
      // guards: rewrite when both directions agree on the same query
      if (it->stmt.kind != StmtKind::GuardPtr) continue;
      if (kv.second.size() != 2) continue;
      auto rep_t = match_query(ctx, kv.second[0], low.cfg.edges[kv.second[0]].stmt);
      auto rep_f = match_query(ctx, kv.second[1], low.cfg.edges[kv.second[1]].stmt);
      if (rep_t && rep_f && *rep_f == rep_t->complement()) it->stmt = *rep_t;
    }
  }
}

// ---------------------------------------------------------------------------
// Cleanup
// ---------------------------------------------------------------------------

namespace {

void stmt_uses_defs(const Statement &st, std::set<std::string> &uses,
                    std::set<std::string> &defs) {
  switch (st.kind) {
  case StmtKind::AssignVar: defs.insert(st.a); uses.insert(st.b); break;
  case StmtKind::AssignSel: defs.insert(st.a); uses.insert(st.b); break;
  case StmtKind::AssignMalloc: defs.insert(st.a); break;
  case StmtKind::AssignNull: defs.insert(st.a); break;
  case StmtKind::StoreSel:
    uses.insert(st.a);
    if (!st.b.empty()) uses.insert(st.b);
    break;
  case StmtKind::Free: uses.insert(st.a); break;
  case StmtKind::GuardPtr:
    uses.insert(st.a);
    if (!st.b.empty()) uses.insert(st.b);
    break;
  case StmtKind::GuardNondet: break;
  case StmtKind::StoreConst: uses.insert(st.a); break;
  case StmtKind::CopyData: uses.insert(st.a); uses.insert(st.b); break;
  case StmtKind::GuardData: uses.insert(st.a); uses.insert(st.b); break;
  case StmtKind::Skip: break;
  case StmtKind::Call:
    for (const auto &i : st.ins) uses.insert(i);
    for (const auto &o : st.outs) defs.insert(o);
    break;
  case StmtKind::GuardEnd: uses.insert(st.a); uses.insert(st.b); break;
  case StmtKind::GuardIsEmpty: uses.insert(st.b); break;
  }
}

// liveness for the whole program at once: live-in per edge destination
struct Liveness {
  LoweredCfg low;
  std::vector<std::set<std::string>> live; // per location: live at entry of loc

  explicit Liveness(Program &p) : low(build_cfg(p)) {
    const Cfg &cfg = low.cfg;
    live.assign(cfg.n_locs, {});
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = (int)cfg.edges.size() - 1; i >= 0; --i) {
        const auto &e = cfg.edges[i];
        std::set<std::string> uses, defs;
        stmt_uses_defs(e.stmt, uses, defs);
        std::set<std::string> in = live[e.dst];
        for (const auto &d : defs) in.erase(d);
        for (const auto &u : uses) in.insert(u);
        size_t before = live[e.src].size();
        for (const auto &v : in) live[e.src].insert(v);
        if (live[e.src].size() != before) changed = true;
      }
    }
  }

  // live set after the item's (unique) edge
  std::optional<std::set<std::string>> live_after(int leaf) const {
    auto it = low.leaf_edges.find(leaf);
    if (it == low.leaf_edges.end() || it->second.empty()) return std::nullopt;
    return live[low.cfg.edges[it->second[0]].dst];
  }
};

// deref safety from the original annotations: every SPC at the statement's
// original source location gives the base variable a region
bool deref_safe(const AnnotatedCfg &a, const LoweredCfg &oldlow, int leaf,
                const std::string &base) {
  auto it = oldlow.leaf_edges.find(leaf);
  if (it == oldlow.leaf_edges.end()) return false; // inserted statement
  int loc = oldlow.cfg.edges[it->second[0]].src;
  const auto &sids = a.at(loc);
  if (sids.empty()) return false;
  for (int sid : sids) {
    auto v = a.spcs[sid].sp.find(base);
    if (v == a.spcs[sid].sp.end() || !v->second.is_reg()) return false;
  }
  return true;
}

// Purity is judged on the statement the guard was lowered from; App.E
// rewrites replace guards by equivalent ones, so the original evidence holds.
bool guard_pure(const AnnotatedCfg &a, const LoweredCfg &oldlow, const Item &it) {
  auto le = oldlow.leaf_edges.find(it.leaf_id);
  if (le == oldlow.leaf_edges.end()) return false;
  const Statement &g = oldlow.cfg.edges[le->second[0]].stmt;
  if (g.kind == StmtKind::GuardNondet) return false; // scheduling visible
  int loc = oldlow.cfg.edges[le->second[0]].src;
  const auto &sids = a.at(loc);
  if (sids.empty()) return false;
  for (int sid : sids) {
    const Spc &C = a.spcs[sid];
    auto defined = [&](const std::string &v) {
      auto x = C.sp.find(v);
      return x != C.sp.end() && !x->second.is_top();
    };
    if (g.kind == StmtKind::GuardPtr) {
      if (!defined(g.a)) return false;
      if (!g.b.empty() && !defined(g.b)) return false;
    } else if (g.kind == StmtKind::GuardData) {
      auto cell = [&](const std::string &v, const std::string &sel) {
        auto x = C.sp.find(v);
        if (x == C.sp.end() || !x->second.is_reg()) return false;
        const DataVal *d = C.g.dget(x->second.reg, sel);
        return d && !d->top;
      };
      if (!cell(g.a, g.sel) || !cell(g.b, g.sel2)) return false;
    } else {
      return false; // container guards and rewritten forms stay
    }
  }
  return true;
}

bool block_all_skip(const Block &b) {
  for (const auto &it : b.items) {
    if (it.kind != Item::Plain || it.stmt.kind != StmtKind::Skip) return false;
  }
  return true;
}

} // namespace

void cleanup(Program &p, const LoweredCfg &oldlow, const AnnotatedCfg &a) {
  bool changed = true;
  while (changed) {
    changed = false;
    Liveness lv(p);
    std::function<void(Block &)> sweep = [&](Block &b) {
      for (auto &it : b.items) {
        if (it.kind == Item::Plain) {
          const Statement &st = it.stmt;
          bool removable = false;
          if (st.kind == StmtKind::AssignVar || st.kind == StmtKind::AssignNull ||
              st.kind == StmtKind::AssignMalloc) {
            auto la = lv.live_after(it.leaf_id);
            removable = la && !la->count(st.a);
            if (st.kind == StmtKind::AssignMalloc) removable = false; // heap effect
          } else if (st.kind == StmtKind::AssignSel) {
            auto la = lv.live_after(it.leaf_id);
            removable = la && !la->count(st.a) && deref_safe(a, oldlow, it.leaf_id, st.b);
          } else if (st.kind == StmtKind::Call && !op_is_destructive(st.op)) {
            // pure container reads; their origin statement proves absence of faults
            auto le = oldlow.leaf_edges.find(it.leaf_id);
            if (le != oldlow.leaf_edges.end()) {
              const Statement &orig = oldlow.cfg.edges[le->second[0]].stmt;
              bool origin_pure =
                  orig.kind == StmtKind::AssignVar ||
                  (orig.kind == StmtKind::AssignSel &&
                   deref_safe(a, oldlow, it.leaf_id, orig.b));
              auto la = lv.live_after(it.leaf_id);
              removable = origin_pure && la;
              if (removable)
                for (const auto &o : st.outs)
                  if (la->count(o)) removable = false;
            }
          }
          if (removable) {
            it.stmt = Statement{}; // skip
            changed = true;
          }
        } else {
          sweep(*it.arm1);
          if (it.arm2) sweep(*it.arm2);
        }
      }
      // trivial branch elimination
      for (auto &it : b.items) {
        if (it.kind != Item::If) continue;
        if (block_all_skip(*it.arm1) && block_all_skip(*it.arm2) &&
            guard_pure(a, oldlow, it)) {
          it.kind = Item::Plain;
          it.stmt = Statement{};
          it.arm1.reset();
          it.arm2.reset();
          changed = true;
        }
      }
      // skip compression
      size_t before = b.items.size();
      b.items.erase(std::remove_if(b.items.begin(), b.items.end(),
                                   [](const Item &it) {
                                     return it.kind == Item::Plain &&
                                            it.stmt.kind == StmtKind::Skip;
                                   }),
                    b.items.end());
      if (b.items.size() != before) changed = true;
    };
    sweep(p.body);
  }
}

std::string print_container_program(const Program &p) {
  // prune declarations of unused variables
  std::set<std::string> used;
  std::function<void(const Block &)> scan = [&](const Block &b) {
    for (const auto &it : b.items) {
      std::set<std::string> u, d;
      stmt_uses_defs(it.stmt, u, d);
      for (const auto &x : u) used.insert(x);
      for (const auto &x : d) used.insert(x);
      if (it.arm1) scan(*it.arm1);
      if (it.arm2) scan(*it.arm2);
    }
  };
  scan(p.body);
  Program q;
  q.data_sels = p.data_sels;
  for (const auto &v : p.ptr_vars)
    if (used.count(v)) q.ptr_vars.push_back(v);
  for (const auto &v : p.ctr_vars)
    if (used.count(v)) q.ctr_vars.push_back(v);
  std::ostringstream o;
  o << "struct { " << kSelNext << ", " << kSelPrev;
  for (const auto &d : q.data_sels) o << ", " << d;
  o << " };\n";
  for (const auto &v : q.ptr_vars) o << "ptr " << v << ";\n";
  for (const auto &v : q.ctr_vars) o << "list " << v << ";\n";
  o << "\n";
  // reuse the plain program printer for the body
  Program tmp;
  std::string body = print_program(p);
  auto cut = body.find("\n\n");
  o << (cut == std::string::npos ? body : body.substr(cut + 2));
  return o.str();
}

} // namespace lift
