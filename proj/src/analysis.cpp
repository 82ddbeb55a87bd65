#include "lift/analysis.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lift {

using nlohmann::json;

const std::vector<int> &AnnotatedCfg::at(int loc) const {
  static const std::vector<int> none;
  auto it = mem.find(loc);
  return it == mem.end() ? none : it->second;
}

int AnnotatedCfg::owner_spc(const ObjId &o) const {
  for (size_t i = 0; i < spcs.size(); ++i)
    if (spcs[i].g.has_region(o.front)) return (int)i;
  return -1;
}

bool AnnotatedCfg::check_invariants(std::string *why) const {
  std::set<int> seen;
  for (size_t i = 0; i < spcs.size(); ++i) {
    std::string w;
    if (!spcs[i].check_invariants(&w)) {
      if (why) *why = "spc " + std::to_string(i) + ": " + w;
      return false;
    }
    for (int r : spcs[i].g.regs)
      if (!seen.insert(r).second) {
        if (why) *why = "region r" + std::to_string(r) + " appears in two SPCs";
        return false;
      }
  }
  for (const auto &s : succ) {
    if (s.src_spc < 0 || s.src_spc >= (int)spcs.size() || s.dst_spc < 0 ||
        s.dst_spc >= (int)spcs.size() || s.edge < 0 ||
        s.edge >= (int)cfg.edges.size()) {
      if (why) *why = "successor entry out of range";
      return false;
    }
    if (spc_loc[s.src_spc] != cfg.edges[s.edge].src ||
        spc_loc[s.dst_spc] != cfg.edges[s.edge].dst) {
      if (why) *why = "successor entry does not follow its edge";
      return false;
    }
  }
  std::set<std::tuple<int, int, int>> succset;
  for (const auto &s : succ) succset.insert({s.src_spc, s.dst_spc, s.edge});
  for (const auto &t : trans) {
    if (!spcs[t.src_spc].g.has_region(t.src.front) ||
        !spcs[t.dst_spc].g.has_region(t.dst.front)) {
      if (why) *why = "transform entry mentions foreign object";
      return false;
    }
    if (!succset.count({t.src_spc, t.dst_spc, t.edge})) {
      if (why) *why = "transform entry without matching successor entry";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Abstract transformer
// ---------------------------------------------------------------------------

namespace {

Val sigma_of(const Spc &c, const std::string &v) {
  auto it = c.sp.find(v);
  return it == c.sp.end() ? Val::top() : it->second;
}

// Splits c so that slot (r,sel) is a plain value. Returns per-case (spc, rel).
std::vector<PostOut> ensure_plain(const Spc &c, int r, const std::string &sel,
                                  int &next_region,
                                  const std::vector<std::string> &data_sels) {
  auto d = c.g.erased_slot(r, sel);
  if (!d) return {{c, rel_identity(c.g)}};
  bool front_end = d->first == r;
  std::vector<PostOut> outs;
  for (auto &m : materialize(c.g, *d, front_end, next_region, data_sels)) {
    Spc c2 = c;
    c2.g = std::move(m.g);
    outs.push_back({std::move(c2), std::move(m.rel)});
  }
  return outs;
}

void drop_garbage(Spc &c, Rel &rel, std::vector<std::string> *notes) {
  std::set<int> reach;
  std::vector<int> stack;
  for (const auto &kv : c.sp)
    if (kv.second.is_reg()) { stack.push_back(kv.second.reg); }
  while (!stack.empty()) {
    int r = stack.back();
    stack.pop_back();
    if (!c.g.has_region(r) || reach.count(r)) continue;
    reach.insert(r);
    for (const std::string &sel : {kSelNext, kSelPrev}) {
      const Val *v = c.g.pget(r, sel);
      if (v && v->is_reg()) stack.push_back(v->reg);
    }
    for (const auto &d : c.g.dls) { // segment ends are co-reachable
      if (d.first == r) stack.push_back(d.second);
      if (d.second == r) stack.push_back(d.first);
    }
  }
  std::vector<int> dead;
  for (int r : c.g.regs)
    if (!reach.count(r)) dead.push_back(r);
  if (dead.empty()) return;
  for (int r : dead) {
    if (notes)
      notes->push_back("garbage region r" + std::to_string(r) + " dropped");
    c.g.remove_region(r);
  }
  for (auto it = c.g.dls.begin(); it != c.g.dls.end();)
    it = (!c.g.has_region(it->first) || !c.g.has_region(it->second))
             ? c.g.dls.erase(it)
             : std::next(it);
  Rel nr;
  for (auto &p : rel)
    if (c.g.has_region(p.second.front) && c.g.has_region(p.second.back) &&
        (!p.second.dls || c.g.dls.count({p.second.front, p.second.back})))
      nr.push_back(p);
  rel = std::move(nr);
}

} // namespace

PostResult abstract_post(const Statement &st, const Spc &c0, int &next_region,
                         const std::vector<std::string> &data_sels) {
  PostResult res;
  auto fault = [&](const std::string &m) { res.faults.push_back(m); };
  auto emit = [&](Spc s, Rel r) {
    res.outs.push_back({std::move(s), std::move(r)});
  };

  switch (st.kind) {
  case StmtKind::Skip: {
    emit(c0, rel_identity(c0.g));
    return res;
  }
  case StmtKind::AssignVar: {
    Spc c = c0;
    c.sp[st.a] = sigma_of(c0, st.b);
    emit(std::move(c), rel_identity(c0.g));
    return res;
  }
  case StmtKind::AssignNull: {
    Spc c = c0;
    c.sp[st.a] = Val::null();
    emit(std::move(c), rel_identity(c0.g));
    return res;
  }
  case StmtKind::AssignMalloc: {
    Spc c = c0;
    int r = next_region++;
    c.g.regs.insert(r);
    c.g.pset(r, kSelNext, Val::top());
    c.g.pset(r, kSelPrev, Val::top());
    for (const auto &ds : data_sels) c.g.dset(r, ds, DataVal::tv());
    c.sp[st.a] = Val::region(r);
    emit(std::move(c), rel_identity(c0.g));
    return res;
  }
  case StmtKind::AssignSel: {
    Val v = sigma_of(c0, st.b);
    if (!v.is_reg()) {
      fault(v.is_null() ? "null dereference" : "undefined dereference");
      return res;
    }
    for (auto &po : ensure_plain(c0, v.reg, st.sel, next_region, data_sels)) {
      Spc c = po.spc;
      const Val *val = c.g.pget(v.reg, st.sel);
      c.sp[st.a] = val ? *val : Val::top();
      emit(std::move(c), po.rel);
    }
    return res;
  }
  case StmtKind::StoreSel: {
    Val v = sigma_of(c0, st.a);
    if (!v.is_reg()) {
      fault(v.is_null() ? "null dereference" : "undefined dereference");
      return res;
    }
    Val rhs = st.b.empty() ? Val::null() : sigma_of(c0, st.b);
    for (auto &po : ensure_plain(c0, v.reg, st.sel, next_region, data_sels)) {
      Spc c = po.spc;
      c.g.pset(v.reg, st.sel, rhs);
      emit(std::move(c), po.rel);
    }
    return res;
  }
  case StmtKind::Free: {
    Val v = sigma_of(c0, st.a);
    if (!v.is_reg()) {
      fault(v.is_null() ? "free of NULL" : "free of undefined");
      return res;
    }
    // peel the region out of any segments it bounds
    std::vector<PostOut> states{{c0, rel_identity(c0.g)}};
    for (const std::string &sel : {kSelNext, kSelPrev}) {
      std::vector<PostOut> nxt;
      for (auto &po : states)
        for (auto &po2 : ensure_plain(po.spc, v.reg, sel, next_region, data_sels))
          nxt.push_back({std::move(po2.spc), compose(po.rel, po2.rel)});
      states = std::move(nxt);
    }
    for (auto &po : states) {
      Spc c = po.spc;
      c.g.remove_region(v.reg);
      for (auto &e : c.g.pv)
        if (e.second.is_reg() && e.second.reg == v.reg) e.second = Val::top();
      for (auto &kv : c.sp)
        if (kv.second.is_reg() && kv.second.reg == v.reg) kv.second = Val::top();
      Rel nr;
      for (auto &p : po.rel)
        if (p.second != ObjId::region(v.reg)) nr.push_back(p);
      emit(std::move(c), std::move(nr));
    }
    return res;
  }
  case StmtKind::GuardNondet: {
    emit(c0, rel_identity(c0.g)); // both branches are feasible
    return res;
  }
  case StmtKind::GuardPtr: {
    Val va = sigma_of(c0, st.a);
    Val vb = st.b.empty() ? Val::null() : sigma_of(c0, st.b);
    if (va.is_top() || vb.is_top()) {
      fault("guard on undefined pointer");
      return res;
    }
    bool eq = va == vb; // distinct abstract regions never alias
    if (eq != st.neg) emit(c0, rel_identity(c0.g));
    return res;
  }
  case StmtKind::StoreConst: {
    Val v = sigma_of(c0, st.a);
    if (!v.is_reg()) {
      fault("data store dereference");
      return res;
    }
    Spc c = c0;
    c.g.dset(v.reg, st.sel, DataVal::of(st.num));
    emit(std::move(c), rel_identity(c0.g));
    return res;
  }
  case StmtKind::CopyData: {
    Val vb = sigma_of(c0, st.b);
    Val va = sigma_of(c0, st.a);
    if (!vb.is_reg() || !va.is_reg()) {
      fault("data copy dereference");
      return res;
    }
    Spc c = c0;
    const DataVal *d = c.g.dget(vb.reg, st.sel2);
    c.g.dset(va.reg, st.sel, d ? *d : DataVal::tv());
    emit(std::move(c), rel_identity(c0.g));
    return res;
  }
  case StmtKind::GuardData: {
    Val va = sigma_of(c0, st.a), vb = sigma_of(c0, st.b);
    if (!va.is_reg() || !vb.is_reg()) {
      fault("data guard dereference");
      return res;
    }
    const DataVal *da = c0.g.dget(va.reg, st.sel);
    const DataVal *db = c0.g.dget(vb.reg, st.sel2);
    if (!da || !db || da->top || db->top) {
      fault("guard on undefined data");
      return res;
    }
    if ((da->num == db->num) != st.neg) emit(c0, rel_identity(c0.g));
    return res;
  }
  default:
    fault("container statement reached the analysis");
    return res;
  }
}

// ---------------------------------------------------------------------------
// Fixpoint engine
// ---------------------------------------------------------------------------

std::set<int> loop_heads(const Cfg &cfg) {
  std::set<int> heads;
  std::vector<int> color(cfg.n_locs, 0); // 0 white, 1 grey, 2 black
  std::vector<std::pair<int, int>> stack{{cfg.entry, 0}};
  // iterative DFS with edge indices for determinism
  std::vector<std::vector<int>> outs(cfg.n_locs);
  for (size_t i = 0; i < cfg.edges.size(); ++i)
    outs[cfg.edges[i].src].push_back((int)i);
  color[cfg.entry] = 1;
  while (!stack.empty()) {
    auto &[loc, idx] = stack.back();
    if (idx < (int)outs[loc].size()) {
      int dst = cfg.edges[outs[loc][idx]].dst;
      ++idx;
      if (color[dst] == 1) heads.insert(dst);
      else if (color[dst] == 0) {
        color[dst] = 1;
        stack.push_back({dst, 0});
      }
    } else {
      color[loc] = 2;
      stack.pop_back();
    }
  }
  return heads;
}

namespace {

// Folds every eligible plain doubly-linked run of length >= 2.
void widen(Spc &c, Rel &rel) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<int> named;
    for (const auto &kv : c.sp)
      if (kv.second.is_reg()) named.insert(kv.second.reg);
    std::set<int> dls_ends;
    for (const auto &d : c.g.dls) { dls_ends.insert(d.first); dls_ends.insert(d.second); }
    auto mutual = [&](int a, int b) {
      const Val *n = c.g.pget(a, kSelNext);
      const Val *p = c.g.pget(b, kSelPrev);
      return n && p && n->is_reg() && n->reg == b && p->is_reg() && p->reg == a;
    };
    for (int r : c.g.regs) {
      if (dls_ends.count(r)) continue;
      // candidate run start: no mutual predecessor
      bool has_pred = false;
      for (int q : c.g.regs)
        if (q != r && mutual(q, r)) has_pred = true;
      if (has_pred) continue;
      std::vector<int> run{r};
      int cur = r;
      while (true) {
        const Val *n = c.g.pget(cur, kSelNext);
        if (!n || !n->is_reg() || dls_ends.count(n->reg)) break;
        int nx = n->reg;
        if (!mutual(cur, nx)) break;
        run.push_back(nx);
        cur = nx;
      }
      // trim so that no interior region is variable-named or externally referenced
      if (run.size() < 2) continue;
      auto interior_ok = [&](int x) {
        if (named.count(x)) return false;
        for (const auto &e : c.g.pv) {
          if (!e.second.is_reg() || e.second.reg != x) continue;
          int src = e.first.first;
          if (!mutual(src, x) && !mutual(x, src)) return false;
        }
        return true;
      };
      bool ok = true;
      for (size_t i = 1; i + 1 < run.size(); ++i)
        if (!interior_ok(run[i])) { ok = false; break; }
      if (!ok) continue;
      Smg folded = fold(c.g, run);
      Rel fr;
      for (const auto &o : c.g.objects()) {
        bool interior = false;
        for (size_t i = 1; i + 1 < run.size(); ++i)
          if (o == ObjId::region(run[i])) interior = true;
        if (interior) fr.push_back({o, ObjId::segment(run.front(), run.back())});
        else fr.push_back({o, o});
      }
      c.g = std::move(folded);
      rel = compose(rel, fr);
      changed = true;
      break;
    }
  }
}

} // namespace

AnalysisResult analyze(const Cfg &cfg, const Program &prog,
                       const AnalysisOptions &opts) {
  AnalysisResult out;
  AnnotatedCfg &a = out.acfg;
  a.cfg = cfg;
  std::set<int> heads = loop_heads(cfg);
  int next_region = 0;

  Spc init;
  for (const auto &v : prog.ptr_vars) init.sp[v] = Val::top();
  a.spcs.push_back(init);
  a.spc_loc.push_back(cfg.entry);
  a.mem[cfg.entry] = {0};

  std::deque<int> work{0};
  std::set<std::pair<int, int>> done; // (spc, edge)

  while (!work.empty()) {
    int sid = work.front();
    work.pop_front();
    int loc = a.spc_loc[sid];
    for (int ei : cfg.out_edges(loc)) {
      if (!done.insert({sid, ei}).second) continue;
      const CfgEdge &e = cfg.edges[ei];
      PostResult pr = abstract_post(e.stmt, a.spcs[sid], next_region, prog.data_sels);
      for (const auto &f : pr.faults)
        out.fault_reports.push_back("location " + std::to_string(loc) + ", '" +
                                    e.stmt.str() + "': " + f);
      for (auto &po : pr.outs) {
        Spc spc = std::move(po.spc);
        Rel rel = std::move(po.rel);
        drop_garbage(spc, rel, &out.garbage_notes);
        if (heads.count(e.dst)) widen(spc, rel);
        // fresh global ids keep region sets of stored SPCs disjoint
        std::map<int, int> ren;
        for (int r : spc.g.regs) ren[r] = next_region++;
        Spc stored = rename_regions(spc, ren);
        Rel rel2;
        for (auto &p : rel) rel2.push_back({p.first, rename_obj(p.second, ren)});

        int target = -1;
        Witness w;
        for (int tid : a.mem[e.dst]) {
          auto went = entails(stored, a.spcs[tid]);
          if (went) { target = tid; w = *went; break; }
        }
        if (target >= 0) {
          Rel routed;
          for (auto &p : rel2) {
            auto it = w.find(p.second);
            if (it != w.end()) routed.push_back({p.first, it->second});
          }
          a.succ.push_back({sid, target, ei});
          for (auto &p : routed)
            a.trans.push_back({p.first, p.second, sid, target, ei});
        } else {
          int nid = (int)a.spcs.size();
          a.spcs.push_back(stored);
          a.spc_loc.push_back(e.dst);
          a.mem[e.dst].push_back(nid);
          if ((int)a.mem[e.dst].size() > opts.spc_cap) {
            out.ok = false;
            out.error = "SPC cap exceeded at location " + std::to_string(e.dst);
            return out;
          }
          a.succ.push_back({sid, nid, ei});
          for (auto &p : rel2)
            a.trans.push_back({p.first, p.second, sid, nid, ei});
          work.push_back(nid);
        }
      }
    }
  }
  std::string why;
  if (!a.check_invariants(&why)) {
    out.ok = false;
    out.error = "annotated CFG invariant violated: " + why;
    return out;
  }
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// JSON import/export
// ---------------------------------------------------------------------------

json stmt_to_json(const Statement &s) {
  json j;
  j["kind"] = (int)s.kind;
  j["neg"] = s.neg;
  if (!s.a.empty()) j["a"] = s.a;
  if (!s.b.empty()) j["b"] = s.b;
  if (!s.sel.empty()) j["sel"] = s.sel;
  if (!s.sel2.empty()) j["sel2"] = s.sel2;
  if (s.kind == StmtKind::StoreConst) j["num"] = s.num;
  if (!s.op.empty()) j["op"] = s.op;
  if (!s.outs.empty()) j["outs"] = s.outs;
  if (!s.ins.empty()) j["ins"] = s.ins;
  j["text"] = s.str();
  return j;
}

Statement stmt_from_json(const json &j) {
  Statement s;
  s.kind = (StmtKind)j.at("kind").get<int>();
  s.neg = j.value("neg", false);
  s.a = j.value("a", "");
  s.b = j.value("b", "");
  s.sel = j.value("sel", "");
  s.sel2 = j.value("sel2", "");
  s.num = j.value("num", 0LL);
  s.op = j.value("op", "");
  if (j.contains("outs")) s.outs = j.at("outs").get<std::vector<std::string>>();
  if (j.contains("ins")) s.ins = j.at("ins").get<std::vector<std::string>>();
  return s;
}

std::string val_str(const Val &v) {
  if (v.is_null()) return "NULL";
  if (v.is_top()) return "TOP";
  return "r" + std::to_string(v.reg);
}

Val val_from(const std::string &s) {
  if (s == "NULL") return Val::null();
  if (s == "TOP") return Val::top();
  if (s.size() > 1 && s[0] == 'r') return Val::region(std::stoi(s.substr(1)));
  throw LiftError("bad value encoding: " + s);
}

std::string obj_str(const ObjId &o) {
  if (!o.dls) return "r" + std::to_string(o.front);
  return "d:r" + std::to_string(o.front) + ":r" + std::to_string(o.back);
}

ObjId obj_from(const std::string &s) {
  if (s.rfind("d:", 0) == 0) {
    auto c = s.find(':', 2);
    return ObjId::segment(std::stoi(s.substr(3, c - 3)), std::stoi(s.substr(c + 2)));
  }
  return ObjId::region(std::stoi(s.substr(1)));
}

json smg_to_json(const Smg &g) {
  json j;
  j["regions"] = json::array();
  for (int r : g.regs) j["regions"].push_back("r" + std::to_string(r));
  j["dls"] = json::array();
  for (const auto &d : g.dls)
    j["dls"].push_back({"r" + std::to_string(d.first), "r" + std::to_string(d.second)});
  json val = json::object();
  for (int r : g.regs) {
    json row = json::object();
    for (const std::string &sel : {kSelNext, kSelPrev}) {
      const Val *v = g.pget(r, sel);
      if (v) row[sel] = val_str(*v);
    }
    for (const auto &e : g.dv)
      if (e.first.first == r)
        row[e.first.second] = e.second.top ? json("TOP") : json(e.second.num);
    if (!row.empty()) val["r" + std::to_string(r)] = row;
  }
  j["val"] = val;
  return j;
}

Smg smg_from_json(const json &j) {
  Smg g;
  for (const auto &r : j.at("regions")) g.regs.insert(std::stoi(r.get<std::string>().substr(1)));
  for (const auto &d : j.at("dls"))
    g.dls.insert({std::stoi(d[0].get<std::string>().substr(1)),
                  std::stoi(d[1].get<std::string>().substr(1))});
  for (auto it = j.at("val").begin(); it != j.at("val").end(); ++it) {
    int r = std::stoi(it.key().substr(1));
    for (auto f = it.value().begin(); f != it.value().end(); ++f) {
      if (f.key() == kSelNext || f.key() == kSelPrev)
        g.pset(r, f.key(), val_from(f.value().get<std::string>()));
      else if (f.value().is_string())
        g.dset(r, f.key(), DataVal::tv());
      else
        g.dset(r, f.key(), DataVal::of(f.value().get<long long>()));
    }
  }
  return g;
}

json spc_to_json(const Spc &s) {
  json j;
  j["smg"] = smg_to_json(s.g);
  json sig = json::object();
  for (const auto &kv : s.sp) sig[kv.first] = val_str(kv.second);
  j["sigma"] = sig;
  json sigc = json::object();
  for (const auto &kv : s.sc) {
    if (kv.second.top) sigc[kv.first] = "TOP";
    else {
      json arr = json::array();
      for (const auto &o : kv.second.cs.seq) arr.push_back(obj_str(o));
      sigc[kv.first] = arr;
    }
  }
  j["sigmac"] = sigc;
  return j;
}

Spc spc_from_json(const json &j) {
  Spc s;
  s.g = smg_from_json(j.at("smg"));
  for (auto it = j.at("sigma").begin(); it != j.at("sigma").end(); ++it)
    s.sp[it.key()] = val_from(it.value().get<std::string>());
  for (auto it = j.at("sigmac").begin(); it != j.at("sigmac").end(); ++it) {
    if (it.value().is_string()) s.sc[it.key()] = CtrAbs::tv();
    else {
      Cs cs;
      for (const auto &o : it.value()) cs.seq.push_back(obj_from(o.get<std::string>()));
      s.sc[it.key()] = CtrAbs::of(cs);
    }
  }
  return s;
}

std::string export_annotated(const AnnotatedCfg &a) {
  json j;
  j["schema"] = "annotated-cfg/1";
  j["locations"] = a.cfg.n_locs;
  j["entry"] = a.cfg.entry;
  j["exit"] = a.cfg.exit;
  json edges = json::array();
  for (size_t i = 0; i < a.cfg.edges.size(); ++i) {
    json e;
    e["id"] = (int)i;
    e["src"] = a.cfg.edges[i].src;
    e["dst"] = a.cfg.edges[i].dst;
    e["stmt"] = stmt_to_json(a.cfg.edges[i].stmt);
    edges.push_back(e);
  }
  j["edges"] = edges;
  json spcs = json::array();
  for (size_t i = 0; i < a.spcs.size(); ++i) {
    json s = spc_to_json(a.spcs[i]);
    s["id"] = (int)i;
    s["location"] = a.spc_loc[i];
    spcs.push_back(s);
  }
  j["spcs"] = spcs;
  json succ = json::array();
  for (const auto &s : a.succ) succ.push_back({s.src_spc, s.dst_spc, s.edge});
  j["succ"] = succ;
  json tr = json::array();
  for (const auto &t : a.trans)
    tr.push_back({obj_str(t.src), obj_str(t.dst), t.edge, t.src_spc, t.dst_spc});
  j["transform"] = tr;
  return j.dump(1);
}

AnnotatedCfg import_annotated(const std::string &text) {
  json j = json::parse(text);
  if (j.value("schema", "") != "annotated-cfg/1")
    throw LiftError("unsupported annotated-cfg schema");
  AnnotatedCfg a;
  a.cfg.n_locs = j.at("locations").get<int>();
  a.cfg.entry = j.at("entry").get<int>();
  a.cfg.exit = j.at("exit").get<int>();
  for (const auto &e : j.at("edges")) {
    CfgEdge edge;
    edge.src = e.at("src").get<int>();
    edge.dst = e.at("dst").get<int>();
    edge.stmt = stmt_from_json(e.at("stmt"));
    a.cfg.edges.push_back(edge);
  }
  for (const auto &s : j.at("spcs")) {
    a.spcs.push_back(spc_from_json(s));
    a.spc_loc.push_back(s.at("location").get<int>());
    a.mem[s.at("location").get<int>()].push_back((int)a.spcs.size() - 1);
  }
  for (const auto &s : j.at("succ"))
    a.succ.push_back({s[0].get<int>(), s[1].get<int>(), s[2].get<int>()});
  for (const auto &t : j.at("transform")) {
    AnnotatedCfg::TransEntry e;
    e.src = obj_from(t[0].get<std::string>());
    e.dst = obj_from(t[1].get<std::string>());
    e.edge = t[2].get<int>();
    e.src_spc = t[3].get<int>();
    e.dst_spc = t[4].get<int>();
    a.trans.push_back(e);
  }
  std::string why;
  if (!a.check_invariants(&why)) throw LiftError("invalid annotated CFG: " + why);
  return a;
}

} // namespace lift
