#include "lift/concrete.hpp"

#include <algorithm>
#include <sstream>

namespace lift {

std::vector<int> Mg::regions() const {
  std::vector<int> r;
  for (const auto &kv : pv) r.push_back(kv.first);
  return r;
}

int Pc::alloc(const std::vector<std::string> &data_sels) {
  int r = next_region++;
  mg.pv[r][kSelNext] = Val::top();
  mg.pv[r][kSelPrev] = Val::top();
  for (const auto &d : data_sels) mg.dv[r][d] = DataVal::tv();
  return r;
}

void Pc::free_region(int r) {
  mg.pv.erase(r);
  mg.dv.erase(r);
  for (auto &kv : mg.pv)
    for (auto &sv : kv.second)
      if (sv.second.is_reg() && sv.second.reg == r) sv.second = Val::top();
  for (auto &kv : sp)
    if (kv.second.is_reg() && kv.second.reg == r) kv.second = Val::top();
}

namespace {

StepResult fail(const std::string &m) { return {StepResult::Faulted, {m}}; }
StepResult guard(bool pass) {
  return {pass ? StepResult::GuardPass : StepResult::GuardFail, {}};
}

// A defined container value must be a NULL-terminated DLL of the current heap.
bool ctr_valid(const Pc &pc, const CtrVal &c, std::string *why) {
  if (c.top) { if (why) *why = "container value undefined"; return false; }
  const auto &rs = c.regs;
  for (size_t i = 0; i < rs.size(); ++i) {
    if (!pc.mg.has_region(rs[i])) { if (why) *why = "container references freed region"; return false; }
  }
  for (size_t i = 0; i + 1 < rs.size(); ++i) {
    if (pc.mg.pv.at(rs[i]).at(kSelNext) != Val::region(rs[i + 1]) ||
        pc.mg.pv.at(rs[i + 1]).at(kSelPrev) != Val::region(rs[i])) {
      if (why) *why = "container links broken";
      return false;
    }
  }
  if (!rs.empty()) {
    if (pc.mg.pv.at(rs.front()).at(kSelPrev) != Val::null() ||
        pc.mg.pv.at(rs.back()).at(kSelNext) != Val::null()) {
      if (why) *why = "container not NULL-terminated";
      return false;
    }
  }
  return true;
}

StepResult exec_call(const Statement &st, Pc &pc, const Program &prog) {
  auto ctr_in = [&](size_t i, CtrVal &out) -> std::optional<StepResult> {
    if (i >= st.ins.size()) return fail("missing container argument");
    auto it = pc.sc.find(st.ins[i]);
    if (it == pc.sc.end() || it->second.top) return fail("container argument undefined");
    std::string why;
    if (!ctr_valid(pc, it->second, &why)) return fail(why);
    out = it->second;
    return std::nullopt;
  };
  auto ptr_in = [&](size_t i, Val &out) -> std::optional<StepResult> {
    if (i >= st.ins.size()) return fail("missing pointer argument");
    auto it = pc.sp.find(st.ins[i]);
    if (it == pc.sp.end() || it->second.is_top()) return fail("pointer argument undefined");
    out = it->second;
    return std::nullopt;
  };
  auto set_out = [&](size_t i, const Val &v) { pc.sp[st.outs[i]] = v; };

  const std::string &op = st.op;
  if (op == "create_empty") {
    if (st.outs.size() != 1) return fail("create_empty arity");
    pc.sc[st.outs[0]] = CtrVal::of({});
    return {};
  }
  if (op == "destroy_empty") {
    CtrVal x;
    if (auto e = ctr_in(0, x)) return *e;
    if (!x.regs.empty()) return fail("destroy_empty on non-empty container");
    pc.sc[st.ins[0]] = CtrVal::tv();
    return {};
  }
  if (op == "push_back" || op == "push_front") {
    CtrVal x; Val y;
    if (auto e = ctr_in(0, x)) return *e;
    if (auto e = ptr_in(1, y)) return *e;
    if (!y.is_reg()) return fail("push of NULL");
    if (std::find(x.regs.begin(), x.regs.end(), y.reg) != x.regs.end())
      return fail("pushed region already inside the container");
    if (st.outs.size() != 1) return fail("push arity");
    int r = y.reg;
    if (x.regs.empty()) {
      pc.mg.pv[r][kSelNext] = Val::null();
      pc.mg.pv[r][kSelPrev] = Val::null();
      pc.sc[st.outs[0]] = CtrVal::of({r});
      return {};
    }
    std::vector<int> rs = x.regs;
    if (op == "push_back") {
      pc.mg.pv[rs.back()][kSelNext] = Val::region(r);
      pc.mg.pv[r][kSelPrev] = Val::region(rs.back());
      pc.mg.pv[r][kSelNext] = Val::null();
      rs.push_back(r);
    } else {
      pc.mg.pv[rs.front()][kSelPrev] = Val::region(r);
      pc.mg.pv[r][kSelNext] = Val::region(rs.front());
      pc.mg.pv[r][kSelPrev] = Val::null();
      rs.insert(rs.begin(), r);
    }
    pc.sc[st.outs[0]] = CtrVal::of(rs);
    return {};
  }
  if (op == "pop_front" || op == "pop_back") {
    CtrVal x;
    if (auto e = ctr_in(0, x)) return *e;
    if (x.regs.empty()) return fail(op + " on empty container");
    if (st.outs.size() != 2) return fail("pop arity");
    std::vector<int> rs = x.regs;
    int taken;
    if (op == "pop_front") {
      taken = rs.front();
      rs.erase(rs.begin());
      if (!rs.empty()) pc.mg.pv[rs.front()][kSelPrev] = Val::null();
    } else {
      taken = rs.back();
      rs.pop_back();
      if (!rs.empty()) pc.mg.pv[rs.back()][kSelNext] = Val::null();
    }
    pc.sc[st.outs[0]] = CtrVal::of(rs);
    pc.sp[st.outs[1]] = Val::region(taken);
    return {};
  }
  if (op == "front" || op == "back") {
    CtrVal x;
    if (auto e = ctr_in(0, x)) return *e;
    if (st.outs.size() != 1) return fail("front/back arity");
    if (x.regs.empty()) set_out(0, Val::null());
    else set_out(0, Val::region(op == "front" ? x.regs.front() : x.regs.back()));
    return {};
  }
  if (op == "next" || op == "prev") {
    CtrVal x; Val p;
    if (auto e = ctr_in(0, x)) return *e;
    if (auto e = ptr_in(1, p)) return *e;
    if (!p.is_reg()) return fail(op + " cursor is NULL");
    auto it = std::find(x.regs.begin(), x.regs.end(), p.reg);
    if (it == x.regs.end()) return fail(op + " cursor not in container");
    if (st.outs.size() != 1) return fail("next/prev arity");
    if (op == "next") {
      ++it;
      set_out(0, it == x.regs.end() ? Val::null() : Val::region(*it));
    } else {
      set_out(0, it == x.regs.begin() ? Val::null() : Val::region(*(it - 1)));
    }
    return {};
  }
  return fail("unknown container operation " + op);
}

} // namespace

StepResult exec_stmt(const Statement &st, Pc &pc, const Program &prog,
                     const Oracle &oracle, size_t &oracle_pos) {
  auto ptr_of = [&](const std::string &v) { return pc.sp.count(v) ? pc.sp[v] : Val::top(); };
  switch (st.kind) {
  case StmtKind::AssignVar:
    pc.sp[st.a] = ptr_of(st.b);
    return {};
  case StmtKind::AssignSel: {
    Val v = ptr_of(st.b);
    if (v.is_null()) return fail("null dereference");
    if (v.is_top()) return fail("undefined dereference");
    pc.sp[st.a] = pc.mg.pv.at(v.reg).at(st.sel);
    return {};
  }
  case StmtKind::AssignMalloc:
    pc.sp[st.a] = Val::region(pc.alloc(prog.data_sels));
    return {};
  case StmtKind::AssignNull:
    pc.sp[st.a] = Val::null();
    return {};
  case StmtKind::StoreSel: {
    Val v = ptr_of(st.a);
    if (v.is_null()) return fail("null dereference");
    if (v.is_top()) return fail("undefined dereference");
    pc.mg.pv[v.reg][st.sel] = st.b.empty() ? Val::null() : ptr_of(st.b);
    return {};
  }
  case StmtKind::Free: {
    Val v = ptr_of(st.a);
    if (v.is_null()) return fail("free of NULL");
    if (v.is_top()) return fail("free of undefined or already freed");
    pc.free_region(v.reg);
    return {};
  }
  case StmtKind::GuardPtr: {
    Val va = ptr_of(st.a);
    Val vb = st.b.empty() ? Val::null() : ptr_of(st.b);
    if (va.is_top() || vb.is_top()) return fail("guard on undefined pointer");
    return guard((va == vb) != st.neg);
  }
  case StmtKind::GuardNondet: {
    bool bit = oracle_pos < oracle.size() && oracle[oracle_pos];
    ++oracle_pos;
    return guard(bit != st.neg);
  }
  case StmtKind::StoreConst: {
    Val v = ptr_of(st.a);
    if (!v.is_reg()) return fail(v.is_null() ? "null dereference" : "undefined dereference");
    pc.mg.dv[v.reg][st.sel] = DataVal::of(st.num);
    return {};
  }
  case StmtKind::CopyData: {
    Val vb = ptr_of(st.b);
    if (!vb.is_reg()) return fail(vb.is_null() ? "null dereference" : "undefined dereference");
    DataVal d = pc.mg.dv.at(vb.reg).at(st.sel2);
    Val va = ptr_of(st.a);
    if (!va.is_reg()) return fail(va.is_null() ? "null dereference" : "undefined dereference");
    pc.mg.dv[va.reg][st.sel] = d;
    return {};
  }
  case StmtKind::GuardData: {
    Val va = ptr_of(st.a), vb = ptr_of(st.b);
    if (!va.is_reg() || !vb.is_reg()) return fail("data guard dereference");
    DataVal da = pc.mg.dv.at(va.reg).at(st.sel);
    DataVal db = pc.mg.dv.at(vb.reg).at(st.sel2);
    if (da.top || db.top) return fail("guard on undefined data");
    return guard((da.num == db.num) != st.neg);
  }
  case StmtKind::Skip:
    return {};
  case StmtKind::Call:
    return exec_call(st, pc, prog);
  case StmtKind::GuardEnd: {
    Val va = ptr_of(st.a);
    if (va.is_top()) return fail("guard on undefined pointer");
    auto it = pc.sc.find(st.b);
    if (it == pc.sc.end() || it->second.top) return fail("end() on undefined container");
    return guard((va == Val::null()) != st.neg);
  }
  case StmtKind::GuardIsEmpty: {
    auto it = pc.sc.find(st.b);
    if (it == pc.sc.end() || it->second.top) return fail("is_empty() on undefined container");
    bool empty = it->second.regs.empty();
    return guard((!empty) != st.neg); // 0 == is_empty(L) passes when non-empty
  }
  }
  return fail("unreachable");
}

Pc initial_pc(const Program &prog) {
  Pc pc;
  for (const auto &v : prog.ptr_vars) pc.sp[v] = Val::top();
  for (const auto &v : prog.ctr_vars) pc.sc[v] = CtrVal::tv();
  return pc;
}

RunResult run(const Cfg &cfg, const Program &prog, Pc init, const Oracle &oracle,
              int step_bound) {
  RunResult r;
  size_t opos = 0;
  int loc = cfg.entry;
  Pc pc = std::move(init);
  r.trace.push_back({loc, pc});
  for (int step = 0;; ++step) {
    if (loc == cfg.exit) { r.kind = RunResult::Done; return r; }
    if (step >= step_bound) { r.kind = RunResult::BoundExceeded; return r; }
    auto outs = cfg.out_edges(loc);
    if (outs.empty()) { r.kind = RunResult::Stuck; r.fault_loc = loc; return r; }
    if (outs.size() == 1 && !cfg.edges[outs[0]].stmt.is_guard()) {
      const auto &e = cfg.edges[outs[0]];
      StepResult sr = exec_stmt(e.stmt, pc, prog, oracle, opos);
      if (sr.kind == StepResult::Faulted) {
        r.kind = RunResult::Faulted; r.fault = sr.fault; r.fault_loc = loc;
        return r;
      }
      loc = e.dst;
      r.trace.push_back({loc, pc});
      continue;
    }
    // branch: all out edges must be guards
    int chosen = -1;
    int passes = 0;
    bool nondet_pair =
        outs.size() == 2 && cfg.edges[outs[0]].stmt.kind == StmtKind::GuardNondet &&
        cfg.edges[outs[1]].stmt.kind == StmtKind::GuardNondet;
    if (nondet_pair) {
      bool bit = opos < oracle.size() && oracle[opos];
      ++opos;
      for (int ei : outs)
        if (cfg.edges[ei].stmt.neg != bit) chosen = ei;
      passes = 1;
    } else {
      for (int ei : outs) {
        const auto &e = cfg.edges[ei];
        if (!e.stmt.is_guard()) { r.kind = RunResult::Nondeterministic; r.fault_loc = loc; return r; }
        Pc tmp = pc;
        StepResult sr = exec_stmt(e.stmt, tmp, prog, oracle, opos);
        if (sr.kind == StepResult::Faulted) {
          r.kind = RunResult::Faulted; r.fault = sr.fault; r.fault_loc = loc;
          return r;
        }
        if (sr.kind == StepResult::GuardPass) { ++passes; chosen = ei; }
      }
    }
    if (passes == 0) { r.kind = RunResult::Stuck; r.fault_loc = loc; return r; }
    if (passes > 1) { r.kind = RunResult::Nondeterministic; r.fault_loc = loc; return r; }
    loc = cfg.edges[chosen].dst;
    r.trace.push_back({loc, pc});
  }
}

std::string dump_trace(const RunResult &r) {
  std::ostringstream o;
  for (const auto &ts : r.trace) {
    o << ts.loc << " | regions=" << ts.pc.mg.pv.size() << " |";
    for (const auto &kv : ts.pc.sp) {
      o << " " << kv.first << "=";
      if (kv.second.is_null()) o << "NULL";
      else if (kv.second.is_top()) o << "TOP";
      else o << "r" << kv.second.reg;
    }
    for (const auto &kv : ts.pc.sc) {
      o << " " << kv.first << "=";
      if (kv.second.top) o << "TOP";
      else {
        o << "[";
        for (size_t i = 0; i < kv.second.regs.size(); ++i)
          o << (i ? "," : "") << "r" << kv.second.regs[i];
        o << "]";
      }
    }
    o << "\n";
  }
  switch (r.kind) {
  case RunResult::Done: o << "done\n"; break;
  case RunResult::Faulted: o << "fault: " << r.fault.msg << " at " << r.fault_loc << "\n"; break;
  case RunResult::Stuck: o << "stuck at " << r.fault_loc << "\n"; break;
  case RunResult::Nondeterministic: o << "nondeterministic at " << r.fault_loc << "\n"; break;
  case RunResult::BoundExceeded: o << "bound exceeded\n"; break;
  }
  return o.str();
}

namespace {

struct Canon {
  const Pc &pc;
  std::map<int, int> index;
  std::vector<int> order;

  explicit Canon(const Pc &p) : pc(p) {}

  void visit(int r) {
    if (r < 0 || !pc.mg.has_region(r) || index.count(r)) return;
    std::vector<int> queue{r};
    index[r] = (int)order.size();
    order.push_back(r);
    size_t qi = 0;
    while (qi < queue.size()) {
      int cur = queue[qi++];
      for (const std::string &sel : {kSelNext, kSelPrev}) {
        Val v = pc.mg.pv.at(cur).at(sel);
        if (v.is_reg() && pc.mg.has_region(v.reg) && !index.count(v.reg)) {
          index[v.reg] = (int)order.size();
          order.push_back(v.reg);
          queue.push_back(v.reg);
        }
      }
    }
  }

  std::string enc_val(const Val &v) const {
    if (v.is_null()) return "N";
    if (v.is_top()) return "T";
    auto it = index.find(v.reg);
    if (it == index.end()) return "X"; // dangling (freed) — cannot occur for live graphs
    return "#" + std::to_string(it->second);
  }

  std::string enc_region(int r) const {
    std::ostringstream o;
    o << "{";
    for (const std::string &sel : {kSelNext, kSelPrev})
      o << sel << "=" << enc_val(pc.mg.pv.at(r).at(sel)) << ";";
    if (pc.mg.dv.count(r))
      for (const auto &dv : pc.mg.dv.at(r)) {
        o << dv.first << "=";
        if (dv.second.top) o << "T";
        else o << dv.second.num;
        o << ";";
      }
    o << "}";
    return o.str();
  }

  std::string enc_all() const {
    std::ostringstream o;
    for (size_t i = 0; i < order.size(); ++i) o << i << enc_region(order[i]);
    return o.str();
  }
};

} // namespace

std::string canonical_pc(const Pc &pc, const std::vector<std::string> &vars) {
  std::vector<std::string> pvars, cvars;
  if (vars.empty()) {
    for (const auto &kv : pc.sp) pvars.push_back(kv.first);
    for (const auto &kv : pc.sc) cvars.push_back(kv.first);
  } else {
    for (const auto &v : vars) {
      if (pc.sp.count(v)) pvars.push_back(v);
      if (pc.sc.count(v)) cvars.push_back(v);
    }
  }
  std::sort(pvars.begin(), pvars.end());
  std::sort(cvars.begin(), cvars.end());

  Canon c(pc);
  for (const auto &v : pvars) {
    Val pv = pc.sp.at(v);
    if (pv.is_reg()) c.visit(pv.reg);
  }
  for (const auto &v : cvars) {
    const CtrVal &cv = pc.sc.at(v);
    if (!cv.top)
      for (int r : cv.regs) c.visit(r);
  }
  // remaining (garbage) components: canonical start = minimal encoding
  while (true) {
    std::vector<int> rest;
    for (int r : pc.mg.regions())
      if (!c.index.count(r)) rest.push_back(r);
    if (rest.empty()) break;
    int best = -1;
    std::string best_enc;
    for (int cand : rest) {
      Canon probe = c;
      probe.visit(cand);
      std::string e = probe.enc_all();
      if (best == -1 || e < best_enc) { best = cand; best_enc = e; }
    }
    c.visit(best);
  }

  std::ostringstream o;
  o << c.enc_all() << "|";
  for (const auto &v : pvars) o << v << "=" << c.enc_val(pc.sp.at(v)) << ";";
  for (const auto &v : cvars) {
    const CtrVal &cv = pc.sc.at(v);
    o << v << "=";
    if (cv.top) o << "T";
    else {
      o << "[";
      for (int r : cv.regs) o << c.enc_val(Val::region(r)) << ",";
      o << "]";
    }
    o << ";";
  }
  return o.str();
}

bool mg_isomorphic(const Pc &a, const Pc &b, const std::vector<std::string> &vars) {
  std::vector<std::string> shared = vars;
  if (shared.empty()) {
    for (const auto &kv : a.sp)
      if (b.sp.count(kv.first)) shared.push_back(kv.first);
    for (const auto &kv : a.sc)
      if (b.sc.count(kv.first)) shared.push_back(kv.first);
  }
  return canonical_pc(a, shared) == canonical_pc(b, shared);
}

} // namespace lift
