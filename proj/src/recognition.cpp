#include "lift/recognition.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace lift {

std::vector<int> ChainMatch::path_locs(const AnnotatedCfg &a) const {
  std::vector<int> ls;
  for (int s : spc_trace) ls.push_back(a.spc_loc[s]);
  return ls;
}

Spc induced_sub(const Spc &full, const std::set<ObjId> &objs) {
  Spc out;
  std::set<ObjId> closed = objs;
  for (const auto &o : objs)
    if (o.dls) {
      closed.insert(ObjId::region(o.front));
      closed.insert(ObjId::region(o.back));
    }
  for (const auto &o : closed) {
    if (o.dls) out.g.dls.insert({o.front, o.back});
    else out.g.regs.insert(o.front);
  }
  for (const auto &e : full.g.pv) {
    int r = e.first.first;
    if (!out.g.regs.count(r)) continue;
    if (auto d = full.g.erased_slot(r, e.first.second)) {
      if (out.g.dls.count(*d)) out.g.pv[e.first] = e.second;
      continue;
    }
    if (e.second.is_reg() && !out.g.regs.count(e.second.reg)) continue;
    out.g.pv[e.first] = e.second;
  }
  for (const auto &e : full.g.dv)
    if (out.g.regs.count(e.first.first)) out.g.dv[e.first] = e.second;
  return out;
}

namespace {

// succ entries grouped by traversal source, with per-entry object relations
struct SuccIndex {
  std::map<int, std::vector<int>> by_src;
  std::map<int, Rel> rel_of;

  SuccIndex(const AnnotatedCfg &a, bool reversed) {
    for (size_t i = 0; i < a.succ.size(); ++i)
      by_src[reversed ? a.succ[i].dst_spc : a.succ[i].src_spc].push_back((int)i);
    std::map<std::tuple<int, int, int>, int> key2idx;
    for (size_t i = 0; i < a.succ.size(); ++i)
      key2idx[{a.succ[i].src_spc, a.succ[i].dst_spc, a.succ[i].edge}] = (int)i;
    for (const auto &t : a.trans) {
      auto it = key2idx.find({t.src_spc, t.dst_spc, t.edge});
      if (it == key2idx.end()) continue;
      if (reversed) rel_of[it->second].push_back({t.dst, t.src});
      else rel_of[it->second].push_back({t.src, t.dst});
    }
  }
};

SymbolicUpdate reverse_update(const SymbolicUpdate &u) {
  SymbolicUpdate r;
  r.in = u.out;
  r.out = u.in;
  for (const auto &p : u.rel) r.rel.push_back({p.second, p.first});
  return r;
}

std::string objs_key(const std::set<ObjId> &s) {
  std::string k;
  for (const auto &o : s) k += o.str() + ";";
  return k;
}

struct ChainSearch {
  const AnnotatedCfg &a;
  const SuccIndex &idx;
  const SymbolicUpdate &u; // oriented along the search direction
  const std::vector<AtomicUpdate> &atoms;
  bool reversed;
  std::vector<ChainMatch> &out;
  int spec_idx, update_idx;
  std::string opname;
  const SymbolicUpdate &fwd_u; // original orientation
  std::set<std::string> visited;

  struct State {
    int spc = -1;
    std::set<ObjId> objs;
    unsigned used = 0;
    std::vector<int> edges;
    std::vector<int> spcs;
    std::vector<std::set<ObjId>> objsets;
    std::vector<char> impl;
    std::vector<Rel> rels;
  };

  void finish(const State &st, const Embedding &start_emb) {
    ChainMatch m;
    m.spec_idx = spec_idx;
    m.update_idx = update_idx;
    m.op = opname;
    if (!reversed) {
      m.edges = st.edges;
      m.spc_trace = st.spcs;
      m.objs = st.objsets;
      m.implementing = st.impl;
      m.step_rels = st.rels;
    } else {
      m.edges.assign(st.edges.rbegin(), st.edges.rend());
      m.spc_trace.assign(st.spcs.rbegin(), st.spcs.rend());
      m.objs.assign(st.objsets.rbegin(), st.objsets.rend());
      m.implementing.assign(st.impl.rbegin(), st.impl.rend());
      for (auto it = st.rels.rbegin(); it != st.rels.rend(); ++it) {
        Rel inv;
        for (const auto &p : *it) inv.push_back({p.second, p.first});
        m.step_rels.push_back(inv);
      }
    }
    const Spc &first = a.spcs[m.spc_trace.front()];
    const Spc &last = a.spcs[m.spc_trace.back()];
    SymbolicUpdate u_tau;
    u_tau.in = induced_sub(first, m.objs.front());
    u_tau.out = induced_sub(last, m.objs.back());
    Rel composed = rel_identity(u_tau.in.g);
    for (const auto &r : m.step_rels) composed = compose(composed, r);
    u_tau.rel = composed;

    auto try_bindings = [&](const std::map<std::string, Val> &ip,
                            const std::map<std::string, CtrAbs> &ic,
                            const std::map<std::string, Val> &op,
                            const std::map<std::string, CtrAbs> &oc) {
      SymbolicUpdate cand = u_tau;
      for (const auto &kv : ip) cand.in.sp[kv.first] = kv.second;
      for (const auto &kv : ic) cand.in.sc[kv.first] = kv.second;
      for (const auto &kv : op) cand.out.sp[kv.first] = kv.second;
      for (const auto &kv : oc) cand.out.sc[kv.first] = kv.second;
      if (!update_entails(cand, fwd_u)) return false;
      ChainMatch done = m;
      done.bind_in_p = ip;
      done.bind_in_c = ic;
      done.bind_out_p = op;
      done.bind_out_c = oc;
      out.push_back(std::move(done));
      return true;
    };
    if (!reversed) {
      for (const auto &emb : find_embeddings(u_tau.out, fwd_u.out))
        if (try_bindings(start_emb.bind_sp, start_emb.bind_sc, emb.bind_sp,
                         emb.bind_sc))
          return;
    } else {
      for (const auto &emb : find_embeddings(u_tau.in, fwd_u.in))
        if (try_bindings(emb.bind_sp, emb.bind_sc, start_emb.bind_sp,
                         start_emb.bind_sc))
          return;
    }
  }

  void extend(State st, const Embedding &start_emb) {
    if (st.used == (1u << atoms.size()) - 1) {
      finish(st, start_emb);
      return; // the control path ends with its last implementing edge
    }
    std::string key = std::to_string(st.spc) + "|" + objs_key(st.objs) + "|" +
                      std::to_string(st.used);
    if (!visited.insert(key).second) return;
    auto it = idx.by_src.find(st.spc);
    if (it == idx.by_src.end()) return;
    for (int si : it->second) {
      const auto &se = a.succ[si];
      int nxt = reversed ? se.src_spc : se.dst_spc;
      static const Rel kEmpty;
      const Rel &full = idx.rel_of.count(si) ? idx.rel_of.at(si) : kEmpty;
      Rel restr;
      std::set<ObjId> img;
      for (const auto &p : full)
        if (st.objs.count(p.first)) {
          restr.push_back(p);
          img.insert(p.second);
        }
      img = close_objects(a.spcs[reversed ? se.src_spc : se.dst_spc].g, img);
      Spc sub0 = induced_sub(a.spcs[reversed ? nxt : st.spc],
                             reversed ? img : st.objs);
      Spc sub1 = induced_sub(a.spcs[reversed ? st.spc : nxt],
                             reversed ? st.objs : img);
      Rel fwd_restr = restr;
      if (reversed) {
        Rel inv;
        for (const auto &p : restr) inv.push_back({p.second, p.first});
        fwd_restr = inv;
      }
      SymbolicUpdate step{sub0, sub1, fwd_restr};
      bool ident = update_is_identity(step.in, step.rel, step.out);
      auto advance = [&](bool impl, unsigned used) {
        State s2 = st;
        s2.spc = nxt;
        s2.objs = img;
        s2.used = used;
        s2.edges.push_back(se.edge);
        s2.spcs.push_back(nxt);
        s2.objsets.push_back(img);
        s2.impl.push_back(impl ? 1 : 0);
        s2.rels.push_back(restr);
        extend(std::move(s2), start_emb);
      };
      if (ident) {
        if (!st.edges.empty()) advance(false, st.used); // trimmed start
      } else {
        for (size_t ai = 0; ai < atoms.size(); ++ai) {
          if (st.used & (1u << ai)) continue;
          if (!update_entails(step, atoms[ai].u)) continue;
          advance(true, st.used | (1u << ai));
        }
      }
    }
  }
};

} // namespace

std::vector<ChainMatch> find_chains(const AnnotatedCfg &a,
                                    const std::vector<OpSpec> &lib) {
  std::vector<ChainMatch> out;
  SuccIndex fwd(a, false);
  SuccIndex bwd(a, true);
  for (size_t li = 0; li < lib.size(); ++li) {
    const OpSpec &spec = lib[li];
    if (!op_is_destructive(spec.name)) continue;
    for (size_t ui = 0; ui < spec.updates.size(); ++ui) {
      const SymbolicUpdate &u = spec.updates[ui];
      UpdateDeltas d = compute_deltas(u);
      if (!d.violations.empty()) continue;
      bool reversed = !d.allocs.empty();
      SymbolicUpdate oriented = reversed ? reverse_update(u) : u;
      std::vector<AtomicUpdate> atoms;
      try {
        atoms = atomic_decomposition(oriented);
      } catch (const LiftError &) {
        continue;
      }
      if (atoms.empty() || atoms.size() > 24) continue;
      const SuccIndex &idx = reversed ? bwd : fwd;
      for (size_t sid = 0; sid < a.spcs.size(); ++sid) {
        for (const auto &emb : find_embeddings(a.spcs[sid], oriented.in)) {
          std::set<ObjId> objs;
          for (const auto &kv : emb.w) objs.insert(kv.first);
          objs = close_objects(a.spcs[sid].g, objs);
          ChainSearch cs{a,   idx,      oriented,  atoms, reversed,
                         out, (int)li,  (int)ui,   spec.name, u};
          ChainSearch::State st;
          st.spc = (int)sid;
          st.objs = objs;
          st.spcs = {(int)sid};
          st.objsets = {objs};
          cs.extend(std::move(st), emb);
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ChainMatch &x, const ChainMatch &y) {
    return std::tie(x.edges, x.spc_trace, x.spec_idx, x.update_idx) <
           std::tie(y.edges, y.spc_trace, y.spec_idx, y.update_idx);
  });
  // ties between operations over one path are broken by library order
  out.erase(std::unique(out.begin(), out.end(),
                        [](const ChainMatch &x, const ChainMatch &y) {
                          return x.edges == y.edges && x.spc_trace == y.spc_trace;
                        }),
            out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Footprints and replacement locations
// ---------------------------------------------------------------------------

namespace {

// Anchors every object of every trace position to its earliest ancestor so
// that heap footprints along one chain are comparable.
struct ChainFrame {
  // (position, obj) -> anchor string
  std::map<std::pair<int, ObjId>, std::string> anchor;

  ChainFrame(const AnnotatedCfg &a, const ChainMatch &m) {
    int pos = 0;
    for (const auto &o : a.spcs[m.spc_trace[0]].g.objects())
      anchor[{0, o}] = "0:" + o.str();
    for (size_t i = 0; i < m.edges.size(); ++i) {
      // full relation over the step
      std::map<ObjId, std::string> prev;
      for (const auto &kv : anchor)
        if (kv.first.first == (int)i) prev[kv.first.second] = kv.second;
      for (const auto &t : a.trans) {
        if (t.edge != m.edges[i] || t.src_spc != m.spc_trace[i] ||
            t.dst_spc != m.spc_trace[i + 1])
          continue;
        auto it = prev.find(t.src);
        if (it == prev.end()) continue;
        auto cur = anchor.find({(int)i + 1, t.dst});
        if (cur == anchor.end() || cur->second > it->second)
          anchor[{(int)i + 1, t.dst}] = it->second;
      }
      for (const auto &o : a.spcs[m.spc_trace[i + 1]].g.objects())
        if (!anchor.count({(int)i + 1, o}))
          anchor[{(int)i + 1, o}] = std::to_string(i + 1) + ":" + o.str();
      ++pos;
    }
    (void)pos;
  }

  std::string of(int pos, int region) const {
    auto it = anchor.find({pos, ObjId::region(region)});
    return it == anchor.end() ? ("?" + std::to_string(pos) + ":r" + std::to_string(region))
                              : it->second;
  }
};

struct Footprint {
  std::set<std::string> var_r, var_w;
  std::set<std::pair<std::string, std::string>> cell_r, cell_w; // (anchor, sel|*)
};

bool cells_conflict(const std::set<std::pair<std::string, std::string>> &w,
                    const std::set<std::pair<std::string, std::string>> &rw) {
  for (const auto &a : w)
    for (const auto &b : rw) {
      if (a.first != b.first) continue;
      if (a.second == "*" || b.second == "*" || a.second == b.second) return true;
    }
  return false;
}

bool conflict(const Footprint &x, const Footprint &y) {
  for (const auto &v : x.var_w)
    if (y.var_r.count(v) || y.var_w.count(v)) return true;
  for (const auto &v : y.var_w)
    if (x.var_r.count(v)) return true;
  if (cells_conflict(x.cell_w, y.cell_r) || cells_conflict(x.cell_w, y.cell_w) ||
      cells_conflict(y.cell_w, x.cell_r))
    return true;
  return false;
}

// Footprint of the chain's i-th edge (1-based position i, SPC at i-1).
Footprint footprint(const AnnotatedCfg &a, const ChainMatch &m,
                    const ChainFrame &frame, int i) {
  Footprint f;
  const Statement &st = a.cfg.edges[m.edges[i]].stmt;
  const Spc &pre = a.spcs[m.spc_trace[i]];
  auto reg_of = [&](const std::string &v) -> int {
    auto it = pre.sp.find(v);
    return (it != pre.sp.end() && it->second.is_reg()) ? it->second.reg : -1;
  };
  auto cell = [&](const std::string &v, const std::string &sel, bool write) {
    int r = reg_of(v);
    std::string anch = r >= 0 ? frame.of(i, r) : ("$" + v);
    if (write) f.cell_w.insert({anch, sel});
    else f.cell_r.insert({anch, sel});
  };
  switch (st.kind) {
  case StmtKind::AssignVar: f.var_w.insert(st.a); f.var_r.insert(st.b); break;
  case StmtKind::AssignNull: f.var_w.insert(st.a); break;
  case StmtKind::AssignMalloc: f.var_w.insert(st.a); break;
  case StmtKind::AssignSel:
    f.var_w.insert(st.a); f.var_r.insert(st.b);
    cell(st.b, st.sel, false);
    break;
  case StmtKind::StoreSel:
    f.var_r.insert(st.a);
    if (!st.b.empty()) f.var_r.insert(st.b);
    cell(st.a, st.sel, true);
    break;
  case StmtKind::Free:
    f.var_r.insert(st.a);
    cell(st.a, "*", true);
    break;
  case StmtKind::GuardPtr:
    f.var_r.insert(st.a);
    if (!st.b.empty()) f.var_r.insert(st.b);
    break;
  case StmtKind::GuardNondet: break;
  case StmtKind::StoreConst: f.var_r.insert(st.a); cell(st.a, st.sel, true); break;
  case StmtKind::CopyData:
    f.var_r.insert(st.a); f.var_r.insert(st.b);
    cell(st.b, st.sel2, false);
    cell(st.a, st.sel, true);
    break;
  case StmtKind::GuardData:
    f.var_r.insert(st.a); f.var_r.insert(st.b);
    cell(st.a, st.sel, false);
    cell(st.b, st.sel2, false);
    break;
  default: break;
  }
  return f;
}

} // namespace

std::vector<int> replacement_positions(const AnnotatedCfg &a, const ChainMatch &m) {
  ChainFrame frame(a, m);
  int n = (int)m.edges.size();
  std::vector<Footprint> fp;
  for (int i = 0; i < n; ++i) fp.push_back(footprint(a, m, frame, i));
  std::vector<int> impl_pos, valid;
  for (int i = 0; i < n; ++i)
    if (m.implementing[i]) impl_pos.push_back(i);
  if (impl_pos.empty()) return valid;
  for (int k = impl_pos.front() + 1; k <= n; ++k) {
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      if (m.implementing[j]) continue;
      if (j < k) { // prefix: implementing edges before j move after it
        for (int i : impl_pos)
          if (i < j && conflict(fp[i], fp[j])) { ok = false; break; }
      } else { // suffix: implementing edges after j move before it
        for (int i : impl_pos)
          if (i > j && conflict(fp[i], fp[j])) { ok = false; break; }
      }
    }
    if (ok) valid.push_back(k);
  }
  return valid;
}

// ---------------------------------------------------------------------------
// Symbolic traces
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> symbolic_traces(const AnnotatedCfg &a) {
  std::vector<std::vector<int>> traces;
  std::map<int, std::vector<int>> by_src;
  for (size_t i = 0; i < a.succ.size(); ++i)
    by_src[a.succ[i].src_spc].push_back((int)i);
  const size_t kTraceCap = 20000;
  std::function<void(int, std::vector<int> &, std::map<int, int> &)> dfs =
      [&](int spc, std::vector<int> &cur, std::map<int, int> &uses) {
        if (traces.size() >= kTraceCap) return;
        bool extended = false;
        auto it = by_src.find(spc);
        if (it != by_src.end()) {
          for (int si : it->second) {
            if (uses[si] >= 2) continue;
            ++uses[si];
            cur.push_back(si);
            dfs(a.succ[si].dst_spc, cur, uses);
            cur.pop_back();
            --uses[si];
            extended = true;
          }
        }
        if (!extended) traces.push_back(cur);
      };
  for (const auto &kv : a.mem)
    if (kv.first == a.cfg.entry)
      for (int sid : kv.second) {
        std::vector<int> cur;
        std::map<int, int> uses;
        dfs(sid, cur, uses);
      }
  return traces;
}

// ---------------------------------------------------------------------------
// Consistency checks
// ---------------------------------------------------------------------------

namespace {

// occurrences of a chain inside a trace: start offsets
std::vector<int> occurrences(const AnnotatedCfg &a, const std::vector<int> &trace,
                             const ChainMatch &m) {
  std::vector<int> offs;
  if (trace.empty()) return offs;
  for (size_t s = 0; s + m.edges.size() <= trace.size(); ++s) {
    bool ok = a.succ[trace[s]].src_spc == m.spc_trace[0];
    for (size_t i = 0; ok && i < m.edges.size(); ++i) {
      const auto &se = a.succ[trace[s + i]];
      ok = se.edge == m.edges[i] && se.src_spc == m.spc_trace[i] &&
           se.dst_spc == m.spc_trace[i + 1];
    }
    if (ok) offs.push_back((int)s);
  }
  return offs;
}

} // namespace

std::vector<Diagnostic> check_local_consistency(const AnnotatedCfg &a,
                                                const std::vector<OpSpec> &lib,
                                                const Recipe &r) {
  std::vector<Diagnostic> ds;
  for (size_t ci = 0; ci < r.entries.size(); ++ci) {
    const auto &e = r.entries[ci];
    const ChainMatch &m = e.chain;
    std::string tag = "chain " + std::to_string(ci) + " (" + m.op + ")";
    if (m.edges.empty() || !m.implementing.front() || !m.implementing.back()) {
      ds.push_back({tag + ": control path must start and end with an implementing edge",
                    m.start_loc(a)});
      continue;
    }
    // re-verify the implementation relation
    SymbolicUpdate u_tau;
    u_tau.in = induced_sub(a.spcs[m.spc_trace.front()], m.objs.front());
    u_tau.out = induced_sub(a.spcs[m.spc_trace.back()], m.objs.back());
    Rel composed = rel_identity(u_tau.in.g);
    for (const auto &sr : m.step_rels) composed = compose(composed, sr);
    u_tau.rel = composed;
    for (const auto &kv : m.bind_in_p) u_tau.in.sp[kv.first] = kv.second;
    for (const auto &kv : m.bind_in_c) u_tau.in.sc[kv.first] = kv.second;
    for (const auto &kv : m.bind_out_p) u_tau.out.sp[kv.first] = kv.second;
    for (const auto &kv : m.bind_out_c) u_tau.out.sc[kv.first] = kv.second;
    const SymbolicUpdate &spec_u = lib[m.spec_idx].updates[m.update_idx];
    if (!update_entails(u_tau, spec_u))
      ds.push_back({tag + ": does not implement its operation", m.start_loc(a)});
    // replacement location valid
    auto valid = replacement_positions(a, m);
    if (std::find(valid.begin(), valid.end(), e.rl_pos) == valid.end())
      ds.push_back({tag + ": replacement location is not valid", e.rl_loc});
    // implementing edges must not write into foreign container shapes
    std::set<ObjId> input_objs = m.objs.front();
    for (size_t i = 0; i < m.edges.size(); ++i) {
      if (!m.implementing[i]) continue;
      Spc sub0 = induced_sub(a.spcs[m.spc_trace[i]], m.objs[i]);
      Spc sub1 = induced_sub(a.spcs[m.spc_trace[i + 1]], m.objs[i + 1]);
      SymbolicUpdate step{sub0, sub1, m.step_rels[i]};
      UpdateDeltas d = compute_deltas(step);
      // image of the chain's input objects at position i
      std::set<ObjId> in_img = m.objs.front();
      for (size_t j = 0; j < i; ++j) {
        std::set<ObjId> nxt;
        for (const auto &p : m.step_rels[j])
          if (in_img.count(p.first)) nxt.insert(p.second);
        in_img = close_objects(a.spcs[m.spc_trace[j + 1]].g, nxt);
      }
      const Spc &pre = a.spcs[m.spc_trace[i]];
      for (const auto &w : d.writes) {
        for (const auto &cs : container_shapes(pre.g)) {
          auto objs = cs.object_set();
          if (!objs.count(w.in_obj)) continue;
          bool inside_input = true;
          for (const auto &o : objs)
            if (!in_img.count(o)) inside_input = false;
          if (!inside_input)
            ds.push_back({tag + ": implementing edge writes into a container shape "
                                "that is not the operation's input",
                          a.cfg.edges[m.edges[i]].src});
        }
      }
    }
  }
  return ds;
}

std::vector<Diagnostic> check_global_consistency(const AnnotatedCfg &a,
                                                 const Recipe &r) {
  std::vector<Diagnostic> ds;
  auto traces = symbolic_traces(a);

  struct Occ {
    int chain;
    int start;
    int len;
    int rl_trace_pos; // trace index of the replacement location
  };
  // Pt 4: same replacement location -> same operation
  std::map<int, std::string> op_at;
  for (size_t ci = 0; ci < r.entries.size(); ++ci) {
    const auto &e = r.entries[ci];
    auto it = op_at.find(e.rl_loc);
    if (it != op_at.end() && it->second != e.chain.op)
      ds.push_back({"Pt4: operations " + it->second + " and " + e.chain.op +
                        " share replacement location",
                    e.rl_loc});
    op_at[e.rl_loc] = e.chain.op;
  }
  // Pt 5: an edge implementing for two chains must have one replacement location
  std::map<int, std::set<int>> impl_rl; // edge -> rl locations
  for (const auto &e : r.entries)
    for (size_t i = 0; i < e.chain.edges.size(); ++i)
      if (e.chain.implementing[i]) impl_rl[e.chain.edges[i]].insert(e.rl_loc);
  for (const auto &kv : impl_rl)
    if (kv.second.size() > 1)
      ds.push_back({"Pt5: edge " + std::to_string(kv.first) +
                        " is implementing for chains with different replacement locations",
                    a.cfg.edges[kv.first].src});

  std::set<int> rl_locs;
  for (const auto &e : r.entries) rl_locs.insert(e.rl_loc);
  std::set<int> impl_edges;
  for (const auto &e : r.entries)
    for (size_t i = 0; i < e.chain.edges.size(); ++i)
      if (e.chain.implementing[i]) impl_edges.insert(e.chain.edges[i]);

  for (const auto &tr : traces) {
    if (tr.empty()) continue;
    std::vector<Occ> occs;
    for (size_t ci = 0; ci < r.entries.size(); ++ci) {
      const auto &e = r.entries[ci];
      for (int off : occurrences(a, tr, e.chain))
        occs.push_back({(int)ci, off, (int)e.chain.edges.size(), off + e.rl_pos});
    }
    // trace location sequence: loc of position p (0..len)
    auto loc_at = [&](int p) {
      return p == 0 ? a.spc_loc[a.succ[tr[0]].src_spc]
                    : a.cfg.edges[a.succ[tr[p - 1]].edge].dst;
    };
    int len = (int)tr.size();
    // Pt 1
    for (int p = 0; p <= len; ++p) {
      int loc = loc_at(p);
      if (!rl_locs.count(loc)) continue;
      bool covered = false;
      for (const auto &oc : occs)
        if (r.entries[oc.chain].rl_loc == loc && oc.rl_trace_pos == p) covered = true;
      if (!covered)
        ds.push_back({"Pt1: a symbolic trace passes replacement location " +
                          std::to_string(loc) + " outside any chain",
                      loc});
    }
    // Pt 2
    for (int p = 0; p < len; ++p) {
      int edge = a.succ[tr[p]].edge;
      if (!impl_edges.count(edge)) continue;
      bool covered = false;
      for (const auto &oc : occs) {
        const auto &ch = r.entries[oc.chain].chain;
        int rel = p - oc.start;
        if (rel >= 0 && rel < oc.len && ch.implementing[rel]) covered = true;
      }
      if (!covered)
        ds.push_back({"Pt2: a symbolic trace passes implementing edge " +
                          std::to_string(edge) + " outside any chain",
                      a.cfg.edges[edge].src});
    }
    // Pt 3
    for (size_t i = 0; i < occs.size(); ++i)
      for (size_t j = i + 1; j < occs.size(); ++j) {
        const Occ &x = occs[i], &y = occs[j];
        int lo = std::max(x.start, y.start);
        int hi = std::min(x.start + x.len, y.start + y.len);
        if (lo >= hi) continue; // no shared step
        bool shared_impl_both = false;
        for (int p = lo; p < hi; ++p) {
          bool xi = x.start <= p && p < x.start + x.len &&
                    r.entries[x.chain].chain.implementing[p - x.start];
          bool yi = y.start <= p && p < y.start + y.len &&
                    r.entries[y.chain].chain.implementing[p - y.start];
          if (xi && yi) shared_impl_both = true;
        }
        int rlx = r.entries[x.chain].rl_loc, rly = r.entries[y.chain].rl_loc;
        if (rlx == rly) {
          bool x_in_y = x.start >= y.start && x.start + x.len <= y.start + y.len;
          bool y_in_x = y.start >= x.start && y.start + y.len <= x.start + x.len;
          if (!x_in_y && !y_in_x)
            ds.push_back({"Pt3b: chains share a replacement location but neither "
                          "is an infix of the other",
                          rlx});
        } else {
          bool nested = (x.start >= y.start && x.start + x.len <= y.start + y.len) ||
                        (y.start >= x.start && y.start + y.len <= x.start + x.len);
          if (shared_impl_both || !nested)
            ds.push_back({"Pt3a: overlapping chains have different replacement "
                          "locations",
                          rlx});
        }
      }
  }
  // dedupe
  std::sort(ds.begin(), ds.end(), [](const Diagnostic &x, const Diagnostic &y) {
    return std::tie(x.msg, x.loc) < std::tie(y.msg, y.loc);
  });
  ds.erase(std::unique(ds.begin(), ds.end(),
                       [](const Diagnostic &x, const Diagnostic &y) {
                         return x.msg == y.msg && x.loc == y.loc;
                       }),
           ds.end());
  return ds;
}

// ---------------------------------------------------------------------------
// Connectedness (App. B)
// ---------------------------------------------------------------------------

namespace {

struct CsNode {
  int spc;
  std::set<ObjId> objs;
  friend bool operator<(const CsNode &a, const CsNode &b) {
    return std::tie(a.spc, a.objs) < std::tie(b.spc, b.objs);
  }
};

struct CsGraph {
  // successor steps: node -> (succ entry idx, image node exists?, identity?)
  struct Step {
    int succ_idx;
    bool image_is_cs;
    CsNode image;
    bool identity;
  };
  std::map<CsNode, std::vector<Step>> fwd;
  std::map<CsNode, std::vector<Step>> bwd; // steps leading INTO the node

  CsGraph(const AnnotatedCfg &a) {
    std::map<int, Rel> rel_of;
    std::map<std::tuple<int, int, int>, int> key2idx;
    for (size_t i = 0; i < a.succ.size(); ++i)
      key2idx[{a.succ[i].src_spc, a.succ[i].dst_spc, a.succ[i].edge}] = (int)i;
    for (const auto &t : a.trans) {
      auto it = key2idx.find({t.src_spc, t.dst_spc, t.edge});
      if (it != key2idx.end()) rel_of[it->second].push_back({t.src, t.dst});
    }
    std::map<int, std::vector<Cs>> shapes;
    for (size_t s = 0; s < a.spcs.size(); ++s) shapes[(int)s] = container_shapes(a.spcs[s].g);
    for (size_t si = 0; si < a.succ.size(); ++si) {
      const auto &se = a.succ[si];
      const Rel &rel = rel_of.count((int)si) ? rel_of[(int)si] : Rel{};
      for (const auto &cs : shapes[se.src_spc]) {
        CsNode n{se.src_spc, cs.object_set()};
        Rel restr;
        std::set<ObjId> img;
        for (const auto &p : rel)
          if (n.objs.count(p.first)) { restr.push_back(p); img.insert(p.second); }
        img = close_objects(a.spcs[se.dst_spc].g, img);
        bool is_cs = false;
        CsNode image{se.dst_spc, img};
        for (const auto &cs2 : shapes[se.dst_spc])
          if (cs2.object_set() == img) is_cs = true;
        Spc sub0 = induced_sub(a.spcs[se.src_spc], n.objs);
        Spc sub1 = induced_sub(a.spcs[se.dst_spc], img);
        bool ident = update_is_identity(sub0, restr, sub1);
        fwd[n].push_back({(int)si, is_cs, image, ident});
        bwd[image].push_back({(int)si, true, n, ident});
      }
    }
  }
};

} // namespace

std::vector<Diagnostic> check_connectedness(const AnnotatedCfg &a, const Recipe &r) {
  std::vector<Diagnostic> ds;
  CsGraph g(a);
  std::set<int> chain_edges;
  for (const auto &e : r.entries)
    for (int ei : e.chain.edges) chain_edges.insert(ei);

  auto cs_of_binding = [&](const ChainMatch &m, bool input) -> std::vector<CsNode> {
    std::vector<CsNode> ns;
    const auto &binds = input ? m.bind_in_c : m.bind_out_c;
    int spc = input ? m.spc_trace.front() : m.spc_trace.back();
    for (const auto &kv : binds) {
      if (kv.second.top || kv.second.cs.empty()) continue;
      ns.push_back({spc, kv.second.cs.object_set()});
    }
    return ns;
  };
  std::set<CsNode> chain_inputs, chain_outputs;
  for (const auto &e : r.entries) {
    for (const auto &n : cs_of_binding(e.chain, true)) chain_inputs.insert(n);
    for (const auto &n : cs_of_binding(e.chain, false)) chain_outputs.insert(n);
  }

  auto walk = [&](const std::set<CsNode> &starts, bool forward) {
    std::set<CsNode> seen = starts;
    std::vector<CsNode> work(starts.begin(), starts.end());
    const auto &graph = forward ? g.fwd : g.bwd;
    const auto &stops = forward ? chain_inputs : chain_outputs;
    while (!work.empty()) {
      CsNode n = work.back();
      work.pop_back();
      bool boundary = stops.count(n) && !starts.count(n);
      if (boundary) continue;
      auto it = graph.find(n);
      if (it == graph.end()) continue;
      for (const auto &st : it->second) {
        int edge = a.succ[st.succ_idx].edge;
        if (chain_edges.count(edge)) continue; // steps inside chain paths
        if (!st.identity) {
          ds.push_back({std::string("connectedness: container shape is modified by a "
                                    "raw statement '") +
                            a.cfg.edges[edge].stmt.str() + "' (edge " +
                            std::to_string(edge) + ")",
                        a.cfg.edges[edge].src});
          continue;
        }
        if (seen.insert(st.image).second) work.push_back(st.image);
      }
    }
  };
  walk(chain_outputs, true);
  walk(chain_inputs, false);
  std::sort(ds.begin(), ds.end(), [](const Diagnostic &x, const Diagnostic &y) {
    return std::tie(x.msg, x.loc) < std::tie(y.msg, y.loc);
  });
  ds.erase(std::unique(ds.begin(), ds.end(),
                       [](const Diagnostic &x, const Diagnostic &y) {
                         return x.msg == y.msg && x.loc == y.loc;
                       }),
           ds.end());
  return ds;
}

// ---------------------------------------------------------------------------
// Parameter assignment (App. C)
// ---------------------------------------------------------------------------

namespace {

struct BackStep {
  int pred_spc;
  ObjId pre;
};

// unique region preimages of `obj` over all incoming succ entries of spc
std::vector<std::pair<int, std::vector<BackStep>>> preds_of(
    const AnnotatedCfg &a, int spc, const ObjId &obj) {
  std::vector<std::pair<int, std::vector<BackStep>>> out; // (succ idx, steps)
  std::map<std::tuple<int, int, int>, int> key2idx;
  for (size_t i = 0; i < a.succ.size(); ++i)
    if (a.succ[i].dst_spc == spc) {
      std::vector<BackStep> pres;
      for (const auto &t : a.trans)
        if (t.edge == a.succ[i].edge && t.src_spc == a.succ[i].src_spc &&
            t.dst_spc == spc && t.dst == obj)
          pres.push_back({a.succ[i].src_spc, t.src});
      out.push_back({(int)i, pres});
    }
  return out;
}

std::vector<std::string> access_paths(const Spc &c, int region) {
  std::vector<std::string> ps;
  for (const auto &kv : c.sp)
    if (kv.second.is_reg() && kv.second.reg == region) ps.push_back(kv.first);
  for (const auto &kv : c.sp) {
    if (!kv.second.is_reg()) continue;
    for (const std::string &sel : {kSelNext, kSelPrev}) {
      const Val *v = c.g.pget(kv.second.reg, sel);
      if (v && v->is_reg() && v->reg == region) ps.push_back(kv.first + "->" + sel);
    }
  }
  std::sort(ps.begin(), ps.end(), [](const std::string &x, const std::string &y) {
    bool xp = x.find("->") != std::string::npos;
    bool yp = y.find("->") != std::string::npos;
    if (xp != yp) return yp; // plain variables first
    return x < y;
  });
  return ps;
}

// path a must be evaluable without fault in every SPC at the location
bool path_safe_everywhere(const AnnotatedCfg &a, int loc, const std::string &path) {
  auto arrow = path.find("->");
  std::string v = arrow == std::string::npos ? path : path.substr(0, arrow);
  for (int sid : a.at(loc)) {
    auto it = a.spcs[sid].sp.find(v);
    if (it == a.spcs[sid].sp.end() || it->second.is_top()) return false;
    if (arrow != std::string::npos) {
      if (!it->second.is_reg()) return false;
      const Val *val = a.spcs[sid].g.pget(it->second.reg, path.substr(arrow + 2));
      if (!val || val->is_top()) return false;
    }
  }
  return true;
}

Statement assign_stmt(const std::string &lhs, const std::string &path) {
  Statement s;
  auto arrow = path.find("->");
  if (arrow == std::string::npos) {
    s.kind = StmtKind::AssignVar;
    s.a = lhs;
    s.b = path;
  } else {
    s.kind = StmtKind::AssignSel;
    s.a = lhs;
    s.b = path.substr(0, arrow);
    s.sel = path.substr(arrow + 2);
  }
  return s;
}

} // namespace

ParamAssignment compute_param_assignment(const AnnotatedCfg &a,
                                         const std::vector<OpSpec> &lib, Recipe &r) {
  ParamAssignment nu;
  nu.complete = true;

  // sites: group entries by replacement location
  r.sites.clear();
  std::map<int, std::vector<int>> by_loc;
  for (size_t i = 0; i < r.entries.size(); ++i)
    by_loc[r.entries[i].rl_loc].push_back((int)i);
  for (const auto &kv : by_loc) {
    Recipe::Site s;
    s.loc = kv.first;
    s.chain_ids = kv.second;
    s.op = r.entries[kv.second[0]].chain.op;
    s.spec_idx = r.entries[kv.second[0]].chain.spec_idx;
    r.sites.push_back(s);
  }

  // lambda names
  for (auto &s : r.sites) {
    const OpSpec &spec = lib[s.spec_idx];
    for (const auto &p : spec.ins)
      s.lam[p] = spec.name + "_" + std::to_string(s.loc) + "_" + p;
    for (const auto &p : spec.outs)
      s.lam[p] = spec.name + "_" + std::to_string(s.loc) + "_" + p;
  }

  CsGraph csg(a);
  // container shapes that are the outputs of sites, with their lambda names
  struct OutCs {
    CsNode node;
    int site;
    std::string param;
  };
  std::vector<OutCs> outs;
  for (size_t si = 0; si < r.sites.size(); ++si)
    for (int ci : r.sites[si].chain_ids) {
      const ChainMatch &m = r.entries[ci].chain;
      for (const auto &kv : m.bind_out_c) {
        if (kv.second.top || kv.second.cs.empty()) continue;
        outs.push_back({{m.spc_trace.back(), kv.second.cs.object_set()}, (int)si,
                        kv.first});
      }
    }
  std::set<int> chain_edges;
  for (const auto &e : r.entries)
    for (int ei : e.chain.edges) chain_edges.insert(ei);

  // succ-closure per output CS (excluding chain-path edges)
  auto succ_closure = [&](const CsNode &start) {
    std::set<CsNode> seen{start};
    std::vector<CsNode> work{start};
    while (!work.empty()) {
      CsNode n = work.back();
      work.pop_back();
      auto it = csg.fwd.find(n);
      if (it == csg.fwd.end()) continue;
      for (const auto &st : it->second) {
        if (chain_edges.count(a.succ[st.succ_idx].edge)) continue;
        if (!st.identity || !st.image_is_cs) continue;
        if (seen.insert(st.image).second) work.push_back(st.image);
      }
    }
    return seen;
  };
  std::vector<std::set<CsNode>> out_closures;
  for (const auto &o : outs) out_closures.push_back(succ_closure(o.node));

  std::set<std::pair<int, std::string>> emitted; // dedupe (loc, stmt text)
  auto emit = [&](int loc, const Statement &st) {
    if (emitted.insert({loc, st.str()}).second) nu.entries.push_back({loc, st});
  };

  for (size_t si = 0; si < r.sites.size(); ++si) {
    auto &site = r.sites[si];
    const OpSpec &spec = lib[site.spec_idx];
    for (int ci : site.chain_ids) {
      const ChainMatch &m = r.entries[ci].chain;
      int start_spc = m.spc_trace.front();
      // container inputs
      for (const auto &kv : m.bind_in_c) {
        const std::string &param = kv.first;
        if (kv.second.top) { nu.complete = false; nu.chains_to_drop.push_back(ci); continue; }
        if (kv.second.cs.empty()) {
          // empty container: initialize at the farthest location backward
          std::set<int> seen{start_spc};
          std::vector<int> work{start_spc};
          int farthest = start_spc;
          while (!work.empty()) {
            int s = work.back();
            work.pop_back();
            for (const auto &se : a.succ)
              if (se.dst_spc == s && !seen.count(se.src_spc)) {
                seen.insert(se.src_spc);
                work.push_back(se.src_spc);
                if (a.spc_loc[se.src_spc] == a.cfg.entry) farthest = se.src_spc;
              }
          }
          Statement call;
          call.kind = StmtKind::Call;
          call.op = "create_empty";
          call.outs = {site.lam[param]};
          emit(a.spc_loc[farthest], call);
          continue;
        }
        // nonempty: identify with the output of a preceding operation
        CsNode sx{start_spc, kv.second.cs.object_set()};
        // predecessor closure of sx, excluding chain-path edges
        std::set<CsNode> pred{sx};
        std::vector<CsNode> work{sx};
        while (!work.empty()) {
          CsNode n = work.back();
          work.pop_back();
          auto it = csg.bwd.find(n);
          if (it == csg.bwd.end()) continue;
          for (const auto &st : it->second) {
            if (chain_edges.count(a.succ[st.succ_idx].edge)) continue;
            if (!st.identity) continue;
            if (pred.insert(st.image).second) work.push_back(st.image);
          }
        }
        // candidate identification: members covered by exactly one out-closure
        bool found = false;
        for (const auto &member : pred) {
          int loc = a.spc_loc[member.spc];
          // all pred members at this location must lie in one output's closure
          std::vector<const CsNode *> here;
          for (const auto &mm : pred)
            if (a.spc_loc[mm.spc] == loc) here.push_back(&mm);
          int who = -1;
          bool unique = true;
          for (size_t oi = 0; oi < outs.size(); ++oi) {
            bool all = true;
            for (const auto *h : here)
              if (!out_closures[oi].count(*h)) all = false;
            if (all) {
              if (who >= 0 &&
                  (outs[who].site != outs[oi].site || outs[who].param != outs[oi].param))
                unique = false;
              if (who < 0) who = (int)oi;
            }
          }
          if (who >= 0 && unique) {
            Statement st;
            st.kind = StmtKind::AssignVar;
            st.a = site.lam[param];
            st.b = r.sites[outs[who].site].lam[outs[who].param];
            emit(loc, st);
            found = true;
          }
        }
        if (!found) {
          nu.complete = false;
          nu.chains_to_drop.push_back(ci);
        }
      }
      // region inputs
      for (const auto &kv : m.bind_in_p) {
        const std::string &param = kv.first;
        if (!kv.second.is_reg()) continue;
        // frontier walk backwards while the location is unique and the
        // preimage exists uniquely
        struct Node { int spc; ObjId obj; };
        std::vector<Node> frontier{{start_spc, ObjId::region(kv.second.reg)}};
        std::vector<std::pair<int, std::string>> candidates; // (loc, path)
        std::set<int> visited{start_spc};
        while (true) {
          std::set<int> locs;
          for (const auto &n : frontier) locs.insert(a.spc_loc[n.spc]);
          if (locs.size() != 1) break;
          int loc = *locs.begin();
          // common access path across the frontier, safe in every SPC at loc
          std::vector<std::string> common;
          for (size_t ni = 0; ni < frontier.size(); ++ni) {
            auto ps = access_paths(a.spcs[frontier[ni].spc], frontier[ni].obj.front);
            if (ni == 0) common = ps;
            else {
              std::vector<std::string> keep;
              for (const auto &p : common)
                if (std::find(ps.begin(), ps.end(), p) != ps.end()) keep.push_back(p);
              common = keep;
            }
          }
          std::string chosen;
          for (const auto &p : common)
            if (path_safe_everywhere(a, loc, p)) { chosen = p; break; }
          if (!chosen.empty()) candidates.push_back({loc, chosen});
          // step back
          std::vector<Node> nf;
          bool ok = true;
          for (const auto &n : frontier) {
            auto preds = preds_of(a, n.spc, n.obj);
            if (preds.empty()) { ok = false; break; }
            for (auto &pr : preds) {
              std::vector<BackStep> regions;
              for (auto &b : pr.second)
                if (!b.pre.dls) regions.push_back(b);
              if (regions.size() != 1) { ok = false; break; }
              nf.push_back({regions[0].pred_spc, regions[0].pre});
            }
            if (!ok) break;
          }
          if (!ok || nf.empty()) break;
          bool fresh = false;
          for (auto &n : nf)
            if (visited.insert(n.spc).second) fresh = true;
          frontier = std::move(nf);
          if (!fresh) break;
        }
        if (candidates.empty()) {
          nu.complete = false;
          nu.chains_to_drop.push_back(ci);
        } else {
          auto best = candidates.back(); // farthest location reached
          emit(best.first, assign_stmt(site.lam[param], best.second));
        }
      }
    }
  }

  // coalesce: input container fed only by this site's own output (plus
  // create_empty initializations) becomes one loop-carried variable
  for (auto &site : r.sites) {
    const OpSpec &spec = lib[site.spec_idx];
    for (const auto &in_param : spec.ins) {
      auto lam_in = site.lam.find(in_param);
      if (lam_in == site.lam.end()) continue;
      std::string out_name;
      bool coalescable = true;
      bool any = false;
      for (const auto &ent : nu.entries) {
        if (ent.second.kind == StmtKind::AssignVar && ent.second.a == lam_in->second) {
          any = true;
          bool own = false;
          for (const auto &out_param : spec.outs)
            if (ent.second.b == site.lam[out_param]) {
              own = true;
              out_name = site.lam[out_param];
            }
          if (!own) coalescable = false;
        }
        if (ent.second.kind == StmtKind::AssignSel && ent.second.a == lam_in->second)
          coalescable = false;
      }
      if (!any || !coalescable || out_name.empty()) continue;
      // rename lam(in) to lam(out) and drop the self assignments
      std::string old = lam_in->second;
      site.lam[in_param] = out_name;
      std::vector<std::pair<int, Statement>> kept;
      for (auto &ent : nu.entries) {
        if (ent.second.kind == StmtKind::AssignVar && ent.second.a == old &&
            ent.second.b == out_name)
          continue;
        Statement st = ent.second;
        if (st.a == old) st.a = out_name;
        for (auto &o : st.outs)
          if (o == old) o = out_name;
        kept.push_back({ent.first, st});
      }
      nu.entries = std::move(kept);
    }
  }

  // container variable names L<k> in discovery order (by site location)
  std::map<std::string, std::string> rename;
  int k = 0;
  for (auto &site : r.sites) {
    const OpSpec &spec = lib[site.spec_idx];
    for (const auto &p : spec.outs) {
      // container outputs are those bound to shapes, not regions
      bool is_ctr = false;
      for (int ci : site.chain_ids)
        if (r.entries[ci].chain.bind_out_c.count(p)) is_ctr = true;
      if (!is_ctr) continue;
      auto &nm = site.lam[p];
      if (!rename.count(nm)) rename[nm] = "L" + std::to_string(k++);
      nm = rename[nm];
    }
    for (const auto &p : spec.ins) {
      auto it = site.lam.find(p);
      if (it != site.lam.end() && rename.count(it->second))
        it->second = rename[it->second];
    }
  }
  for (auto &ent : nu.entries) {
    auto fix = [&](std::string &s) {
      auto it = rename.find(s);
      if (it != rename.end()) s = it->second;
    };
    fix(ent.second.a);
    fix(ent.second.b);
    for (auto &o : ent.second.outs) fix(o);
    for (auto &i : ent.second.ins) fix(i);
  }
  std::sort(nu.chains_to_drop.begin(), nu.chains_to_drop.end());
  nu.chains_to_drop.erase(
      std::unique(nu.chains_to_drop.begin(), nu.chains_to_drop.end()),
      nu.chains_to_drop.end());
  return nu;
}

// ---------------------------------------------------------------------------
// Recipe construction
// ---------------------------------------------------------------------------

namespace {

// chains that share an implementing edge must share a replacement location
std::vector<std::vector<int>> rl_groups(const std::vector<ChainMatch> &ms) {
  std::vector<int> parent(ms.size());
  for (size_t i = 0; i < ms.size(); ++i) parent[i] = (int)i;
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  std::map<int, std::vector<int>> by_impl_edge;
  for (size_t i = 0; i < ms.size(); ++i)
    for (size_t e = 0; e < ms[i].edges.size(); ++e)
      if (ms[i].implementing[e]) by_impl_edge[ms[i].edges[e]].push_back((int)i);
  for (const auto &kv : by_impl_edge)
    for (size_t i = 1; i < kv.second.size(); ++i)
      parent[find(kv.second[i])] = find(kv.second[0]);
  std::map<int, std::vector<int>> groups;
  for (size_t i = 0; i < ms.size(); ++i) groups[find((int)i)].push_back((int)i);
  std::vector<std::vector<int>> out;
  for (auto &kv : groups) out.push_back(kv.second);
  return out;
}

// foreign implementing edges inside a chain must reposition consistently
bool foreign_reposition_ok(const AnnotatedCfg &a, const Recipe &r) {
  for (size_t ci = 0; ci < r.entries.size(); ++ci) {
    const auto &e = r.entries[ci];
    const ChainMatch &m = e.chain;
    ChainFrame frame(a, m);
    auto locs = m.path_locs(a);
    for (size_t j = 0; j < m.edges.size(); ++j) {
      if (m.implementing[j]) continue;
      // is this edge implementing for another recipe chain?
      int owner = -1;
      for (size_t cj = 0; cj < r.entries.size(); ++cj) {
        if (cj == ci) continue;
        const auto &o = r.entries[cj].chain;
        for (size_t k = 0; k < o.edges.size(); ++k)
          if (o.edges[k] == m.edges[j] && o.implementing[k]) owner = (int)cj;
      }
      if (owner < 0) continue;
      int rl_owner = r.entries[owner].rl_loc;
      auto pos_it = std::find(locs.begin(), locs.end(), rl_owner);
      if (pos_it == locs.end()) return false;
      int eff = (int)(pos_it - locs.begin()); // effective position of the write
      Footprint fj = footprint(a, m, frame, (int)j);
      for (size_t i = 0; i < m.edges.size(); ++i) {
        if (!m.implementing[i]) continue;
        bool before_orig = (int)i < (int)j;
        bool before_new = (int)i < eff ? true : false;
        // own implementing edges consolidate at the own replacement location
        int own_rl_pos = e.rl_pos;
        before_new = own_rl_pos <= eff; // op block sits at rl_pos
        bool orig_order = before_orig;
        bool new_order = own_rl_pos < eff || (own_rl_pos == eff && before_orig);
        if (orig_order != new_order && conflict(footprint(a, m, frame, (int)i), fj))
          return false;
      }
    }
  }
  return true;
}

} // namespace

Recipe prune_to_fixpoint(const AnnotatedCfg &a, const std::vector<OpSpec> &lib,
                         std::vector<ChainMatch> matches, ParamAssignment *nu_out) {
  // deterministic pruning order: shorter paths and lexicographically earlier
  // edge lists are dropped first
  auto order = [](const ChainMatch &x, const ChainMatch &y) {
    return std::tie(x.edges, x.spc_trace, x.spec_idx, x.update_idx) <
           std::tie(y.edges, y.spc_trace, y.spec_idx, y.update_idx);
  };
  auto drop_rank = [](const ChainMatch &x, const ChainMatch &y) {
    if (x.edges.size() != y.edges.size()) return x.edges.size() < y.edges.size();
    return std::tie(x.edges, x.spec_idx, x.update_idx) <
           std::tie(y.edges, y.spec_idx, y.update_idx);
  };
  std::sort(matches.begin(), matches.end(), order);

  Recipe recipe;
  while (true) {
    recipe.entries.clear();
    recipe.sites.clear();
    if (matches.empty()) break;

    // assign replacement locations per group
    auto groups = rl_groups(matches);
    bool dropped = false;
    std::vector<std::pair<int, int>> rl(matches.size(), {-1, -1}); // (pos, loc)
    for (auto &grp : groups) {
      // intersect candidate locations
      std::map<int, int> count;      // location -> members having it
      std::map<int, int> best_pos;   // location -> min position (for order)
      std::vector<std::vector<std::pair<int, int>>> cands(grp.size());
      for (size_t gi = 0; gi < grp.size(); ++gi) {
        auto poss = replacement_positions(a, matches[grp[gi]]);
        auto locs = matches[grp[gi]].path_locs(a);
        for (int p : poss) cands[gi].push_back({p, locs[p]});
      }
      std::set<int> common;
      for (size_t gi = 0; gi < grp.size(); ++gi) {
        std::set<int> locs;
        for (auto &c : cands[gi]) locs.insert(c.second);
        if (gi == 0) common = locs;
        else {
          std::set<int> inter;
          for (int l : common)
            if (locs.count(l)) inter.insert(l);
          common = inter;
        }
      }
      if (common.empty()) {
        // drop the group's first chain in pruning order
        int victim = grp[0];
        for (int gi : grp)
          if (drop_rank(matches[gi], matches[victim])) victim = gi;
        recipe.log.push_back("dropping chain with no shared replacement location");
        matches.erase(matches.begin() + victim);
        dropped = true;
        break;
      }
      // latest common location: maximal sum of positions
      int best_loc = -1;
      long best_score = -1;
      for (int l : common) {
        long score = 0;
        for (size_t gi = 0; gi < grp.size(); ++gi)
          for (auto &c : cands[gi])
            if (c.second == l) { score += c.first; break; }
        if (score > best_score || (score == best_score && l > best_loc)) {
          best_score = score;
          best_loc = l;
        }
      }
      for (size_t gi = 0; gi < grp.size(); ++gi) {
        int pos = -1;
        for (auto &c : cands[gi])
          if (c.second == best_loc) { pos = c.first; break; }
        rl[grp[gi]] = {pos, best_loc};
      }
    }
    if (dropped) continue;

    for (size_t i = 0; i < matches.size(); ++i) {
      Recipe::Entry e;
      e.chain = matches[i];
      e.rl_pos = rl[i].first;
      e.rl_loc = rl[i].second;
      recipe.entries.push_back(std::move(e));
    }

    auto drop_indices = [&](std::set<int> byIdx, const std::string &why) {
      if (byIdx.empty()) return false;
      int victim = *byIdx.begin();
      for (int i : byIdx)
        if (drop_rank(matches[i], matches[victim])) victim = i;
      recipe.log.push_back("dropping chain: " + why);
      matches.erase(matches.begin() + victim);
      return true;
    };

    auto local = check_local_consistency(a, lib, recipe);
    if (!local.empty()) {
      std::set<int> flagged;
      for (const auto &d : local) {
        auto c = d.msg.find("chain ");
        if (c == 0) flagged.insert(std::stoi(d.msg.substr(6)));
      }
      if (flagged.empty())
        for (size_t i = 0; i < matches.size(); ++i) flagged.insert((int)i);
      if (drop_indices(flagged, local[0].msg)) continue;
    }

    auto global = check_global_consistency(a, recipe);
    if (!global.empty()) {
      // drop some chain involved with the first diagnostic's location
      std::set<int> flagged;
      for (size_t i = 0; i < recipe.entries.size(); ++i) {
        auto locs = recipe.entries[i].chain.path_locs(a);
        if (recipe.entries[i].rl_loc == global[0].loc ||
            std::find(locs.begin(), locs.end(), global[0].loc) != locs.end())
          flagged.insert((int)i);
      }
      if (flagged.empty())
        for (size_t i = 0; i < matches.size(); ++i) flagged.insert((int)i);
      if (drop_indices(flagged, global[0].msg)) continue;
    }

    if (!foreign_reposition_ok(a, recipe)) {
      std::set<int> all;
      for (size_t i = 0; i < matches.size(); ++i) all.insert((int)i);
      if (drop_indices(all, "foreign implementing edge cannot be repositioned"))
        continue;
    }

    auto conn = check_connectedness(a, recipe);
    if (!conn.empty()) {
      std::set<int> all;
      for (size_t i = 0; i < matches.size(); ++i) all.insert((int)i);
      if (drop_indices(all, conn[0].msg)) continue;
    }

    ParamAssignment nu = compute_param_assignment(a, lib, recipe);
    if (!nu.complete) {
      std::set<int> flagged(nu.chains_to_drop.begin(), nu.chains_to_drop.end());
      if (flagged.empty())
        for (size_t i = 0; i < matches.size(); ++i) flagged.insert((int)i);
      if (drop_indices(flagged, "incomplete parameter assignment")) continue;
    }
    if (nu_out) *nu_out = nu;
    return recipe;
  }
  if (nu_out) *nu_out = ParamAssignment{true, {}, {}};
  recipe.entries.clear();
  recipe.sites.clear();
  return recipe;
}

std::string dump_recipe(const AnnotatedCfg &a, const Recipe &r,
                        const ParamAssignment &nu) {
  std::ostringstream o;
  o << "{\n  \"chains\": [\n";
  for (size_t i = 0; i < r.entries.size(); ++i) {
    const auto &e = r.entries[i];
    o << "    {\"op\": \"" << e.chain.op << "\", \"edges\": [";
    for (size_t j = 0; j < e.chain.edges.size(); ++j) {
      o << (j ? "," : "") << e.chain.edges[j];
    }
    o << "], \"implementing\": [";
    bool first = true;
    for (size_t j = 0; j < e.chain.edges.size(); ++j)
      if (e.chain.implementing[j]) {
        o << (first ? "" : ",") << e.chain.edges[j];
        first = false;
      }
    o << "], \"replacement_location\": " << e.rl_loc << "}";
    o << (i + 1 < r.entries.size() ? ",\n" : "\n");
  }
  o << "  ],\n  \"sites\": [\n";
  for (size_t i = 0; i < r.sites.size(); ++i) {
    const auto &s = r.sites[i];
    o << "    {\"location\": " << s.loc << ", \"op\": \"" << s.op << "\", \"lambda\": {";
    bool first = true;
    for (const auto &kv : s.lam) {
      o << (first ? "" : ", ") << "\"" << kv.first << "\": \"" << kv.second << "\"";
      first = false;
    }
    o << "}}" << (i + 1 < r.sites.size() ? ",\n" : "\n");
  }
  o << "  ],\n  \"assignments\": [\n";
  for (size_t i = 0; i < nu.entries.size(); ++i) {
    o << "    {\"location\": " << nu.entries[i].first << ", \"stmt\": \""
      << nu.entries[i].second.str() << "\"}"
      << (i + 1 < nu.entries.size() ? ",\n" : "\n");
  }
  o << "  ]\n}\n";
  return o.str();
}

} // namespace lift
