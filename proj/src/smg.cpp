#include "lift/smg.hpp"

#include <algorithm>
#include <sstream>

namespace lift {

std::optional<std::pair<int, int>> Smg::erased_slot(int r, const std::string &sel) const {
  for (const auto &d : dls) {
    if (d.first == d.second) continue; // degenerate (r,r) has no erased slots
    if (sel == kSelNext && d.first == r) return d;
    if (sel == kSelPrev && d.second == r) return d;
  }
  return std::nullopt;
}

std::vector<ObjId> Smg::objects() const {
  std::vector<ObjId> o;
  for (int r : regs) o.push_back(ObjId::region(r));
  for (const auto &d : dls) o.push_back(ObjId::segment(d.first, d.second));
  return o;
}

void Smg::remove_region(int r) {
  regs.erase(r);
  for (auto it = pv.begin(); it != pv.end();)
    it = (it->first.first == r) ? pv.erase(it) : std::next(it);
  for (auto it = dv.begin(); it != dv.end();)
    it = (it->first.first == r) ? dv.erase(it) : std::next(it);
}

bool Smg::check_invariants(std::string *why) const {
  for (const auto &d : dls) {
    if (!regs.count(d.first) || !regs.count(d.second)) {
      if (why) *why = "DLS end not a region";
      return false;
    }
    if (d.first != d.second) {
      const Val *n = pget(d.first, kSelNext);
      const Val *p = pget(d.second, kSelPrev);
      if ((n && !n->is_top()) || (p && !p->is_top())) {
        if (why) *why = "DLS erased slot holds a value";
        return false;
      }
    }
  }
  for (const auto &e : pv)
    if (!regs.count(e.first.first) ||
        (e.second.is_reg() && !regs.count(e.second.reg))) {
      if (why) *why = "selector entry mentions unknown region";
      return false;
    }
  for (const auto &e : dv)
    if (!regs.count(e.first.first)) {
      if (why) *why = "data entry on unknown region";
      return false;
    }
  return true;
}

bool Spc::check_invariants(std::string *why) const {
  if (!g.check_invariants(why)) return false;
  for (const auto &kv : sp)
    if (kv.second.is_reg() && !g.has_region(kv.second.reg)) {
      if (why) *why = "sigma targets unknown region";
      return false;
    }
  for (const auto &kv : sc)
    if (!kv.second.top && !is_container_shape(g, kv.second.cs)) {
      if (why) *why = "sigma names a non-container-shape";
      return false;
    }
  return true;
}

namespace {

bool mutual_link(const Smg &g, int a, int b) {
  const Val *n = g.pget(a, kSelNext);
  const Val *p = g.pget(b, kSelPrev);
  return n && p && n->is_reg() && n->reg == b && p->is_reg() && p->reg == a;
}

// Walks a NULL-terminated SDLL starting at region r; empty result if none.
std::vector<ObjId> walk_cs(const Smg &g, int r) {
  const Val *pf = g.pget(r, kSelPrev);
  if (!pf || !pf->is_null()) return {};
  std::vector<ObjId> seq;
  std::set<int> seen;
  int cur = r;
  seq.push_back(ObjId::region(cur));
  seen.insert(cur);
  while (true) {
    if (auto d = g.erased_slot(cur, kSelNext)) {
      if (seen.count(d->second)) return {};
      seq.push_back(ObjId::segment(d->first, d->second));
      cur = d->second;
      seq.push_back(ObjId::region(cur));
      seen.insert(cur);
      continue;
    }
    const Val *n = g.pget(cur, kSelNext);
    if (!n) return {};
    if (n->is_null()) return seq;
    if (n->is_top()) return {};
    int nx = n->reg;
    if (seen.count(nx) || !mutual_link(g, cur, nx)) return {};
    seq.push_back(ObjId::region(nx));
    cur = nx;
    seen.insert(cur);
  }
}

} // namespace

std::vector<Cs> container_shapes(const Smg &g) {
  std::vector<Cs> out;
  for (int r : g.regs) {
    auto seq = walk_cs(g, r);
    if (!seq.empty()) out.push_back(Cs{seq});
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_container_shape(const Smg &g, const Cs &cs) {
  if (cs.empty()) return true;
  if (!cs.seq.front().dls && g.has_region(cs.seq.front().front)) {
    auto seq = walk_cs(g, cs.seq.front().front);
    return seq == cs.seq;
  }
  return false;
}

Smg fold(const Smg &g0, const std::vector<int> &segment) {
  if (segment.empty()) throw LiftError("fold: empty segment");
  Smg g = g0;
  for (int r : segment)
    if (!g.has_region(r)) throw LiftError("fold: unknown region");
  if (segment.size() == 1) {
    g.dls.insert({segment[0], segment[0]});
    return g;
  }
  for (size_t i = 0; i + 1 < segment.size(); ++i)
    if (!mutual_link(g, segment[i], segment[i + 1]))
      throw LiftError("fold: segment is not a doubly-linked run");
  std::set<int> interior(segment.begin() + 1, segment.end() - 1);
  for (const auto &e : g.pv) {
    if (interior.count(e.first.first)) continue;
    if (e.second.is_reg() && interior.count(e.second.reg))
      if (!(e.first.first == segment.front() && e.first.second == kSelNext) &&
          !(e.first.first == segment.back() && e.first.second == kSelPrev))
        throw LiftError("fold: external pointer into segment interior");
  }
  for (const auto &d : g.dls)
    if (interior.count(d.first) || interior.count(d.second))
      throw LiftError("fold: segment interior is a DLS end");
  for (int r : interior) g.remove_region(r);
  g.pset(segment.front(), kSelNext, Val::top());
  g.pset(segment.back(), kSelPrev, Val::top());
  g.dls.insert({segment.front(), segment.back()});
  return g;
}

std::vector<Materialization> materialize(const Smg &g0, std::pair<int, int> d,
                                         bool front_end, int &next_region,
                                         const std::vector<std::string> &data_sels) {
  if (!g0.dls.count(d)) throw LiftError("materialize: not a DLS of the graph");
  std::vector<Materialization> out;
  auto ident = [&](const Smg &g) {
    std::vector<std::pair<ObjId, ObjId>> rel;
    for (const auto &o : g0.objects())
      if (o != ObjId::segment(d.first, d.second)) rel.push_back({o, o});
    return rel;
  };
  if (d.first == d.second) {
    Materialization m;
    m.g = g0;
    m.g.dls.erase(d);
    m.rel = ident(m.g);
    out.push_back(std::move(m));
    return out;
  }
  { // inner length 0: the two ends link directly
    Materialization m;
    m.g = g0;
    m.g.dls.erase(d);
    m.g.pset(d.first, kSelNext, Val::region(d.second));
    m.g.pset(d.second, kSelPrev, Val::region(d.first));
    m.rel = ident(m.g);
    out.push_back(std::move(m));
  }
  { // inner length >= 1: peel one fresh region off the chosen end
    Materialization m;
    m.g = g0;
    m.g.dls.erase(d);
    int mr = next_region++;
    m.g.regs.insert(mr);
    for (const auto &ds : data_sels) m.g.dset(mr, ds, DataVal::tv());
    std::pair<int, int> rest;
    if (front_end) {
      m.g.pset(d.first, kSelNext, Val::region(mr));
      m.g.pset(mr, kSelPrev, Val::region(d.first));
      m.g.pset(mr, kSelNext, Val::top());
      rest = {mr, d.second};
    } else {
      m.g.pset(d.second, kSelPrev, Val::region(mr));
      m.g.pset(mr, kSelNext, Val::region(d.second));
      m.g.pset(mr, kSelPrev, Val::top());
      rest = {d.first, mr};
    }
    m.g.dls.insert(rest);
    m.rel = ident(m.g);
    ObjId od = ObjId::segment(d.first, d.second);
    m.rel.push_back({od, ObjId::region(mr)});
    m.rel.push_back({od, ObjId::segment(rest.first, rest.second)});
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matching engine: realizes "[[subject]] subseteq [[pattern]]" structurally.
// ---------------------------------------------------------------------------

namespace {

struct SideInfo {
  enum Kind { Absent, IsNull, IsTop, IsReg, Slot } kind = Absent;
  int reg = -1;
  std::pair<int, int> d{-1, -1};
};

SideInfo classify(const Smg &g, int r, const std::string &sel) {
  if (auto d = g.erased_slot(r, sel)) return {SideInfo::Slot, -1, *d};
  const Val *v = g.pget(r, sel);
  if (!v) return {};
  if (v->is_null()) return {SideInfo::IsNull};
  if (v->is_top()) return {SideInfo::IsTop};
  return {SideInfo::IsReg, v->reg};
}

struct MState {
  std::map<ObjId, ObjId> w;  // subject object -> pattern object
  std::map<int, int> inv;    // pattern region -> subject region
  std::vector<std::pair<int, int>> queue; // (subject reg, pattern reg)
  std::set<std::pair<int, int>> processed;
};

struct Matcher {
  const Spc &A; // subject
  const Spc &B; // pattern
  std::vector<MState> solutions;
  size_t cap = 64;

  Matcher(const Spc &a, const Spc &b) : A(a), B(b) {}

  static bool pin(MState &st, int sreg, int preg) {
    ObjId so = ObjId::region(sreg), po = ObjId::region(preg);
    auto it = st.w.find(so);
    if (it != st.w.end()) return it->second == po;
    auto iv = st.inv.find(preg);
    if (iv != st.inv.end()) return iv->second == sreg;
    st.w[so] = po;
    st.inv[preg] = sreg;
    st.queue.push_back({sreg, preg});
    return true;
  }

  static bool pin_dls(MState &st, std::pair<int, int> sd, std::pair<int, int> pd) {
    ObjId so = ObjId::segment(sd.first, sd.second);
    ObjId po = ObjId::segment(pd.first, pd.second);
    auto it = st.w.find(so);
    if (it != st.w.end()) return it->second == po;
    st.w[so] = po;
    return true;
  }

  static bool absorb(MState &st, int sreg, std::pair<int, int> pd) {
    ObjId so = ObjId::region(sreg);
    ObjId po = ObjId::segment(pd.first, pd.second);
    auto it = st.w.find(so);
    if (it != st.w.end()) return it->second == po;
    st.w[so] = po;
    return true;
  }

  // Subject run from `cur` in direction `sel` gets absorbed into pattern DLS
  // `pd` until some region is pinned to `pother`.
  void walk_segment(MState st, int cur, const std::string &sel,
                    std::pair<int, int> pd, int pother,
                    std::vector<MState> &out) {
    const std::string opp = (sel == kSelNext) ? kSelPrev : kSelNext;
    SideInfo s = classify(A.g, cur, sel);
    if (s.kind == SideInfo::Slot) {
      MState st2 = st;
      if (!pin_dls(st2, s.d, pd)) return;
      int far = (sel == kSelNext) ? s.d.second : s.d.first;
      {
        MState st3 = st2;
        if (pin(st3, far, pother)) out.push_back(std::move(st3));
      }
      MState st4 = st2;
      if (absorb(st4, far, pd)) walk_segment(std::move(st4), far, sel, pd, pother, out);
      return;
    }
    if (s.kind == SideInfo::IsReg) {
      int nx = s.reg;
      SideInfo back = classify(A.g, nx, opp);
      if (!(back.kind == SideInfo::IsReg && back.reg == cur)) return; // not doubly linked
      {
        MState st3 = st;
        if (pin(st3, nx, pother)) out.push_back(std::move(st3));
      }
      MState st4 = st;
      if (absorb(st4, nx, pd)) walk_segment(std::move(st4), nx, sel, pd, pother, out);
      return;
    }
    // Null / Top / Absent: the run ends before reaching the pattern's far end.
  }

  void match_side(const MState &st, int sreg, int preg, const std::string &sel,
                  std::vector<MState> &out) {
    SideInfo p = classify(B.g, preg, sel);
    SideInfo s = classify(A.g, sreg, sel);
    switch (p.kind) {
    case SideInfo::Absent:
      out.push_back(st);
      return;
    case SideInfo::IsNull:
      if (s.kind == SideInfo::IsNull) out.push_back(st);
      return;
    case SideInfo::IsTop:
      if (s.kind == SideInfo::IsTop) out.push_back(st);
      return;
    case SideInfo::IsReg: {
      if (s.kind != SideInfo::IsReg) return;
      MState st2 = st;
      if (pin(st2, s.reg, p.reg)) out.push_back(std::move(st2));
      return;
    }
    case SideInfo::Slot: {
      int pother = (sel == kSelNext) ? p.d.second : p.d.first;
      walk_segment(st, sreg, sel, p.d, pother, out);
      return;
    }
    }
  }

  bool data_ok(int sreg, int preg) const {
    for (const auto &e : B.g.dv) {
      if (e.first.first != preg) continue;
      const DataVal *sv = A.g.dget(sreg, e.first.second);
      if (!sv || *sv != e.second) return false;
    }
    return true;
  }

  void search(MState st) {
    if (solutions.size() >= cap) return;
    while (!st.queue.empty()) {
      auto [sreg, preg] = st.queue.back();
      st.queue.pop_back();
      if (st.processed.count({sreg, preg})) continue;
      st.processed.insert({sreg, preg});
      if (!data_ok(sreg, preg)) return;
      std::vector<MState> states{st};
      for (const std::string &sel : {kSelNext, kSelPrev}) {
        std::vector<MState> nxt;
        for (auto &s2 : states) match_side(s2, sreg, preg, sel, nxt);
        states = std::move(nxt);
        if (states.empty()) return;
      }
      if (states.size() == 1) {
        st = std::move(states[0]);
        continue;
      }
      for (auto &s2 : states) search(std::move(s2));
      return;
    }
    // queue drained: bind any still-unpinned pattern regions
    for (int preg : B.g.regs) {
      if (st.inv.count(preg)) continue;
      for (int sreg : A.g.regs) {
        if (st.w.count(ObjId::region(sreg))) continue;
        MState st2 = st;
        if (pin(st2, sreg, preg)) search(std::move(st2));
      }
      return;
    }
    if (finalize(st)) solutions.push_back(std::move(st));
  }

  // Global conditions that are not captured by local propagation.
  bool finalize(const MState &st) const {
    // every pattern region realized
    for (int preg : B.g.regs)
      if (!st.inv.count(preg)) return false;
    // pattern DLSs with nonempty absorption are in range(w) automatically;
    // those with empty interiors are realized by their pinned ends.
    // absorbed subject regions must be unreferenced from outside their run
    std::set<int> absorbed;
    for (const auto &kv : st.w)
      if (!kv.first.dls && kv.second.dls) absorbed.insert(kv.first.front);
    if (!absorbed.empty()) {
      for (const auto &e : A.g.pv) {
        if (!e.second.is_reg() || !absorbed.count(e.second.reg)) continue;
        int src = e.first.first;
        // allowed: the doubly-linked neighbours of the absorbed region
        if (!mutual_link(A.g, src, e.second.reg) && !mutual_link(A.g, e.second.reg, src))
          return false;
      }
      for (const auto &kv : A.sp)
        if (kv.second.is_reg() && absorbed.count(kv.second.reg)) return false;
      for (const auto &kv : A.sc) {
        if (kv.second.top) continue;
        bool aligned = B.sc.count(kv.first) != 0;
        if (aligned) continue; // handled by the container alignment itself
        for (const auto &o : kv.second.cs.seq)
          if (!o.dls && absorbed.count(o.front)) return false;
      }
    }
    return true;
  }

  // Initial pins from the pattern valuation; false on immediate mismatch.
  bool init(MState &st) const {
    for (const auto &kv : B.sp) {
      auto it = A.sp.find(kv.first);
      if (kv.second.is_top()) continue; // forgotten: covers anything
      if (it == A.sp.end()) return false;
      if (kv.second.is_null()) {
        if (!it->second.is_null()) return false;
      } else {
        if (!it->second.is_reg()) return false;
        if (!pin(st, it->second.reg, kv.second.reg)) return false;
      }
    }
    for (const auto &kv : B.sc) {
      if (kv.second.top) continue;
      auto it = A.sc.find(kv.first);
      if (it == A.sc.end() || it->second.top) return false;
      const Cs &pcs = kv.second.cs;
      const Cs &scs = it->second.cs;
      if (pcs.empty() != scs.empty()) return false;
      if (pcs.empty()) continue;
      // pin fronts and backs; the run structure aligns the rest
      if (!pin(st, scs.seq.front().front, pcs.seq.front().front)) return false;
      if (!pin(st, scs.seq.back().back, pcs.seq.back().back)) return false;
    }
    return true;
  }

  std::vector<MState> run() {
    MState st;
    if (init(st)) search(std::move(st));
    return std::move(solutions);
  }
};

} // namespace

std::optional<Witness> entails(const Spc &a, const Spc &b) {
  Matcher m(a, b);
  m.cap = 1;
  auto sols = m.run();
  if (sols.empty()) return std::nullopt;
  return sols[0].w;
}

std::vector<Witness> entails_all(const Spc &a, const Spc &b, size_t cap) {
  Matcher m(a, b);
  m.cap = cap;
  auto sols = m.run();
  std::vector<Witness> ws;
  for (auto &s : sols) ws.push_back(std::move(s.w));
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  return ws;
}

std::vector<Embedding> find_embeddings(const Spc &subject, const Spc &pattern) {
  // Enumerate candidate bindings for the pattern valuation, then match.
  std::vector<Embedding> out;
  std::vector<std::pair<std::string, Val>> pvars;   // params bound to pattern regions
  std::vector<std::pair<std::string, Cs>> cvars;    // container params
  Spc pat = pattern;
  for (const auto &kv : pattern.sp)
    pvars.push_back({kv.first, kv.second});
  for (const auto &kv : pattern.sc) {
    if (kv.second.top) continue;
    cvars.push_back({kv.first, kv.second.cs});
  }
  std::vector<Cs> shapes = container_shapes(subject.g);

  // choose a subject CS (or empty) per container param, a subject value per ptr param
  std::vector<std::map<std::string, CtrAbs>> cs_choices{{}};
  for (const auto &cv : cvars) {
    std::vector<std::map<std::string, CtrAbs>> nxt;
    for (const auto &base : cs_choices) {
      if (cv.second.empty()) {
        auto m2 = base;
        m2[cv.first] = CtrAbs::of(Cs{});
        nxt.push_back(std::move(m2));
      } else {
        for (const auto &sh : shapes) {
          auto m2 = base;
          m2[cv.first] = CtrAbs::of(sh);
          nxt.push_back(std::move(m2));
        }
      }
    }
    cs_choices = std::move(nxt);
  }
  std::vector<std::map<std::string, Val>> ptr_choices{{}};
  for (const auto &pv : pvars) {
    std::vector<std::map<std::string, Val>> nxt;
    for (const auto &base : ptr_choices) {
      if (pv.second.is_null() || pv.second.is_top()) {
        auto m2 = base;
        m2[pv.first] = pv.second.is_null() ? Val::null() : Val::top();
        nxt.push_back(std::move(m2));
      } else {
        for (int r : subject.g.regs) {
          auto m2 = base;
          m2[pv.first] = Val::region(r);
          nxt.push_back(std::move(m2));
        }
      }
    }
    ptr_choices = std::move(nxt);
  }

  for (const auto &cc : cs_choices) {
    for (const auto &pc : ptr_choices) {
      Spc subj = subject;
      subj.sp.clear();
      subj.sc.clear();
      for (const auto &kv : pc) subj.sp[kv.first] = kv.second;
      for (const auto &kv : cc) subj.sc[kv.first] = kv.second;
      Matcher m(subj, pat);
      m.cap = 4;
      auto sols = m.run();
      for (auto &s : sols) {
        Embedding e;
        e.w = s.w;
        e.bind_sp = pc;
        e.bind_sc = cc;
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

bool member_of(const Pc &c, const Spc &A) {
  Spc subj;
  for (const auto &kv : c.mg.pv) {
    subj.g.regs.insert(kv.first);
    for (const auto &sv : kv.second) subj.g.pset(kv.first, sv.first, sv.second);
  }
  for (const auto &kv : c.mg.dv)
    for (const auto &sv : kv.second) subj.g.dset(kv.first, sv.first, sv.second);
  for (const auto &kv : c.sp) subj.sp[kv.first] = kv.second;
  for (const auto &kv : c.sc) {
    if (kv.second.top) subj.sc[kv.first] = CtrAbs::tv();
    else {
      Cs cs;
      for (int r : kv.second.regs) cs.seq.push_back(ObjId::region(r));
      subj.sc[kv.first] = CtrAbs::of(cs);
    }
  }
  return entails(subj, A).has_value();
}

// ---------------------------------------------------------------------------
// Bounded concretization
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> data_sel_universe(const Smg &g) {
  std::set<std::string> s;
  for (const auto &e : g.dv) s.insert(e.first.second);
  return {s.begin(), s.end()};
}

struct Expansion {
  Mg mg;
  std::map<int, std::vector<int>> dls_runs; // abstract dls front -> full region run
};

void expand_dls(const Smg &g, std::vector<std::pair<std::pair<int, int>, int>> &counts,
                size_t idx, int k, const std::vector<std::string> &dsels,
                std::vector<Expansion> &out) {
  std::vector<std::pair<int, int>> all(g.dls.begin(), g.dls.end());
  if (idx == all.size()) {
    // build the concrete skeleton for the chosen inner counts
    Expansion ex;
    int fresh = 0;
    for (int r : g.regs) fresh = std::max(fresh, r + 1);
    for (int r : g.regs) {
      ex.mg.pv[r][kSelNext] = Val::top();
      ex.mg.pv[r][kSelPrev] = Val::top();
    }
    for (const auto &e : g.pv)
      ex.mg.pv[e.first.first][e.first.second] = e.second;
    for (const auto &e : g.dv) ex.mg.dv[e.first.first][e.first.second] = e.second;
    for (const auto &cd : counts) {
      auto [d, inner] = cd;
      if (d.first == d.second) { ex.dls_runs[d.first] = {d.first}; continue; }
      std::vector<int> run{d.first};
      for (int i = 0; i < inner; ++i) run.push_back(fresh++);
      run.push_back(d.second);
      for (size_t i = 0; i + 1 < run.size(); ++i) {
        ex.mg.pv[run[i]][kSelNext] = Val::region(run[i + 1]);
        ex.mg.pv[run[i + 1]][kSelPrev] = Val::region(run[i]);
      }
      for (size_t i = 1; i + 1 < run.size(); ++i)
        for (const auto &ds : dsels) ex.mg.dv[run[i]][ds] = DataVal::tv();
      ex.dls_runs[d.first] = run;
    }
    out.push_back(std::move(ex));
    return;
  }
  auto d = all[idx];
  int lo = 0, hi = d.first == d.second ? 0 : k - 1;
  for (int inner = lo; inner <= hi; ++inner) {
    counts.push_back({d, inner});
    expand_dls(g, counts, idx + 1, k, dsels, out);
    counts.pop_back();
  }
}

template <typename F>
void enum_choices(std::vector<std::vector<int>> &domains, std::vector<int> &pick,
                  size_t i, F &&emit) {
  if (i == domains.size()) { emit(pick); return; }
  for (int v : domains[i]) {
    pick.push_back(v);
    enum_choices(domains, pick, i + 1, emit);
    pick.pop_back();
  }
}

} // namespace

std::vector<Pc> concretize_upto(const Spc &a, int k) {
  if (k < 1) throw LiftError("concretize_upto: k must be >= 1");
  std::vector<std::string> dsels = data_sel_universe(a.g);
  std::vector<Expansion> skeletons;
  std::vector<std::pair<std::pair<int, int>, int>> counts;
  expand_dls(a.g, counts, 0, k, dsels, skeletons);

  std::vector<Pc> out;
  std::set<std::string> seen;
  for (const auto &ex : skeletons) {
    // collect the open slots
    std::vector<int> regions;
    for (const auto &kv : ex.mg.pv) regions.push_back(kv.first);
    // pointer slots: absent entries of explicit regions (inner run regions are fully linked)
    struct PSlot { int r; std::string sel; };
    struct DSlot { int r; std::string sel; };
    std::vector<PSlot> pslots;
    std::vector<DSlot> dslots;
    for (int r : a.g.regs) {
      for (const std::string &sel : {kSelNext, kSelPrev}) {
        if (a.g.erased_slot(r, sel)) continue; // structural, filled by expansion
        if (!a.g.pget(r, sel)) pslots.push_back({r, sel});
      }
      for (const auto &ds : dsels)
        if (!a.g.dget(r, ds)) dslots.push_back({r, ds});
    }
    // inner-run data slots
    for (const auto &dr : ex.dls_runs) {
      const auto &run = dr.second;
      for (size_t i = 1; i + 1 < run.size(); ++i)
        for (const auto &ds : dsels) dslots.push_back({run[i], ds});
    }
    // forgotten variables
    std::vector<std::string> topvars;
    for (const auto &kv : a.sp)
      if (kv.second.is_top()) topvars.push_back(kv.first);

    std::vector<std::vector<int>> domains;
    // pointer slot domain: 0=Top, 1=Null, 2+i = region i
    for (size_t i = 0; i < pslots.size(); ++i) {
      std::vector<int> d{0, 1};
      for (size_t j = 0; j < regions.size(); ++j) d.push_back(2 + (int)j);
      domains.push_back(d);
    }
    for (size_t i = 0; i < dslots.size(); ++i) domains.push_back({0, 1, 2}); // Top,0,1
    for (size_t i = 0; i < topvars.size(); ++i) {
      std::vector<int> d{0, 1};
      for (size_t j = 0; j < regions.size(); ++j) d.push_back(2 + (int)j);
      domains.push_back(d);
    }

    std::vector<int> pick;
    enum_choices(domains, pick, 0, [&](const std::vector<int> &sel) {
      Pc pc;
      pc.mg = ex.mg;
      size_t s = 0;
      for (const auto &ps : pslots) {
        int v = sel[s++];
        pc.mg.pv[ps.r][ps.sel] =
            v == 0 ? Val::top() : v == 1 ? Val::null() : Val::region(regions[v - 2]);
      }
      for (const auto &ds : dslots) {
        int v = sel[s++];
        pc.mg.dv[ds.r][ds.sel] = v == 0 ? DataVal::tv() : DataVal::of(v - 1);
      }
      std::map<std::string, Val> tvals;
      for (const auto &tv : topvars) {
        int v = sel[s++];
        tvals[tv] = v == 0 ? Val::top() : v == 1 ? Val::null() : Val::region(regions[v - 2]);
      }
      for (const auto &kv : a.sp)
        pc.sp[kv.first] = kv.second.is_top() ? tvals[kv.first] : kv.second;
      bool ok = true;
      for (const auto &kv : a.sc) {
        if (kv.second.top) { pc.sc[kv.first] = CtrVal::tv(); continue; }
        std::vector<int> regs;
        for (const auto &o : kv.second.cs.seq) {
          if (o.dls) {
            const auto &run = ex.dls_runs.at(o.front);
            for (size_t i = 1; i + 1 < run.size(); ++i) regs.push_back(run[i]);
          } else {
            regs.push_back(o.front);
          }
        }
        pc.sc[kv.first] = CtrVal::of(regs);
        (void)ok;
      }
      int mx = 0;
      for (const auto &kv : pc.mg.pv) mx = std::max(mx, kv.first + 1);
      pc.next_region = mx;
      std::string key = canonical_pc(pc);
      if (seen.insert(key).second) out.push_back(std::move(pc));
    });
  }
  return out;
}

std::vector<Mg> concretize_upto(const Smg &g, int k) {
  Spc a;
  a.g = g;
  std::vector<Mg> out;
  for (auto &pc : concretize_upto(a, k)) out.push_back(std::move(pc.mg));
  return out;
}

std::set<ObjId> close_objects(const Smg &g, std::set<ObjId> objs) {
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<ObjId> add;
    for (const auto &o : objs)
      if (o.dls) {
        if (!objs.count(ObjId::region(o.front))) add.push_back(ObjId::region(o.front));
        if (!objs.count(ObjId::region(o.back))) add.push_back(ObjId::region(o.back));
      }
    for (const auto &d : g.dls) {
      ObjId od = ObjId::segment(d.first, d.second);
      if (!objs.count(od) && objs.count(ObjId::region(d.first)) &&
          objs.count(ObjId::region(d.second)))
        add.push_back(od);
    }
    for (const auto &o : add) {
      objs.insert(o);
      grew = true;
    }
  }
  return objs;
}

Smg rename_regions(const Smg &g, const std::map<int, int> &ren) {
  auto rn = [&](int r) {
    auto it = ren.find(r);
    return it == ren.end() ? r : it->second;
  };
  Smg o;
  for (int r : g.regs) o.regs.insert(rn(r));
  for (const auto &d : g.dls) o.dls.insert({rn(d.first), rn(d.second)});
  for (const auto &e : g.pv) {
    Val v = e.second;
    if (v.is_reg()) v = Val::region(rn(v.reg));
    o.pv[{rn(e.first.first), e.first.second}] = v;
  }
  for (const auto &e : g.dv) o.dv[{rn(e.first.first), e.first.second}] = e.second;
  return o;
}

ObjId rename_obj(const ObjId &o, const std::map<int, int> &ren) {
  auto rn = [&](int r) {
    auto it = ren.find(r);
    return it == ren.end() ? r : it->second;
  };
  return o.dls ? ObjId::segment(rn(o.front), rn(o.back)) : ObjId::region(rn(o.front));
}

Spc rename_regions(const Spc &a, const std::map<int, int> &ren) {
  auto rn = [&](int r) {
    auto it = ren.find(r);
    return it == ren.end() ? r : it->second;
  };
  Spc o;
  o.g = rename_regions(a.g, ren);
  for (const auto &kv : a.sp) {
    Val v = kv.second;
    if (v.is_reg()) v = Val::region(rn(v.reg));
    o.sp[kv.first] = v;
  }
  for (const auto &kv : a.sc) {
    if (kv.second.top) { o.sc[kv.first] = CtrAbs::tv(); continue; }
    Cs cs;
    for (const auto &ob : kv.second.cs.seq) cs.seq.push_back(rename_obj(ob, ren));
    o.sc[kv.first] = CtrAbs::of(cs);
  }
  return o;
}

} // namespace lift
