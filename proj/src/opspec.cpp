#include "lift/opspec.hpp"

#include <algorithm>
#include <sstream>

namespace lift {

Rel compose(const Rel &a, const Rel &b) {
  Rel out;
  for (const auto &p : a)
    for (const auto &q : b)
      if (p.second == q.first) out.push_back({p.first, q.second});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Rel rel_identity(const Smg &g) {
  Rel r;
  for (const auto &o : g.objects()) r.push_back({o, o});
  return r;
}

namespace {

const Val *entry(const Spc &s, int reg, const std::string &sel) {
  return s.g.pget(reg, sel);
}

bool vals_correspond(const Val &a, const Val &b, const Rel &rel) {
  if (a.kind != b.kind) return false;
  if (!a.is_reg()) return true;
  for (const auto &p : rel)
    if (p.first == ObjId::region(a.reg) && p.second == ObjId::region(b.reg)) return true;
  return false;
}

} // namespace

UpdateDeltas compute_deltas(const SymbolicUpdate &u) {
  UpdateDeltas d;
  std::set<ObjId> in_mapped, out_mapped;
  for (const auto &p : u.rel) { in_mapped.insert(p.first); out_mapped.insert(p.second); }

  for (const auto &o : u.in.g.objects())
    if (!in_mapped.count(o)) {
      if (o.dls) continue; // a vanishing DLS denotes nothing destructive
      d.deallocs.push_back(o);
    }
  for (const auto &o : u.out.g.objects())
    if (!out_mapped.count(o)) {
      if (o.dls) continue;
      d.allocs.push_back(o);
    }

  for (const auto &p : u.rel) {
    if (p.first.dls && p.second.dls) continue;
    if (p.first.dls != p.second.dls) continue; // fold/materialize style pair
    int ri = p.first.front, ro = p.second.front;
    for (const std::string &sel : {kSelNext, kSelPrev}) {
      if (u.in.g.erased_slot(ri, sel) || u.out.g.erased_slot(ro, sel))
        continue; // structural slots, handled by segment objects
      const Val *vi = entry(u.in, ri, sel);
      const Val *vo = entry(u.out, ro, sel);
      if (!vo) {
        if (vi) d.violations.push_back("selector " + sel + " of " + p.first.str() +
                                       " loses its value invisibly");
        continue;
      }
      if (vi && vals_correspond(*vi, *vo, u.rel)) continue;
      d.writes.push_back({p.first, p.second, sel, vi, *vo});
    }
    // data changes are cut away by the Delta_const intersection
    for (const auto &e : u.out.g.dv) {
      if (e.first.first != ro) continue;
      const DataVal *di = u.in.g.dget(ri, e.first.second);
      if (!di || *di != e.second)
        d.data_changes.push_back("data selector " + e.first.second + " of " +
                                 p.second.str() + " violates Delta_const");
    }
    for (const auto &e : u.in.g.dv) {
      if (e.first.first != ri) continue;
      if (!u.out.g.dget(ro, e.first.second))
        d.data_changes.push_back("data selector " + e.first.second + " of " +
                                 p.first.str() + " is dropped");
    }
  }
  return d;
}

bool update_is_identity(const Spc &in, const Rel &rel, const Spc &out) {
  SymbolicUpdate u{in, out, rel};
  UpdateDeltas d = compute_deltas(u);
  return d.writes.empty() && d.allocs.empty() && d.deallocs.empty() &&
         d.violations.empty();
}

// ---------------------------------------------------------------------------
// Builtin library
// ---------------------------------------------------------------------------

namespace {

Spc mk_spc(std::vector<int> regs, std::set<std::pair<int, int>> dls,
           std::map<std::pair<int, std::string>, Val> pv,
           std::map<std::string, Val> sp, std::map<std::string, Cs> sc) {
  Spc s;
  for (int r : regs) s.g.regs.insert(r);
  s.g.dls = std::move(dls);
  s.g.pv = std::move(pv);
  s.sp = std::move(sp);
  for (auto &kv : sc) s.sc[kv.first] = CtrAbs::of(kv.second);
  return s;
}

Cs cs_regs(std::vector<int> rs) {
  Cs c;
  for (int r : rs) c.seq.push_back(ObjId::region(r));
  return c;
}

Cs cs_seg(int f, int b) { // [f, (f,b), b]
  Cs c;
  c.seq.push_back(ObjId::region(f));
  c.seq.push_back(ObjId::segment(f, b));
  c.seq.push_back(ObjId::region(b));
  return c;
}

Rel id_regs(std::vector<int> rs, bool seg_fb = false, int f = 0, int b = 1) {
  Rel r;
  for (int x : rs) r.push_back({ObjId::region(x), ObjId::region(x)});
  if (seg_fb) r.push_back({ObjId::segment(f, b), ObjId::segment(f, b)});
  return r;
}

OpSpec make_push(bool back) {
  OpSpec s;
  s.name = back ? "push_back" : "push_front";
  s.ins = {"x", "y"};
  s.outs = {"z"};
  const std::string selToNew = back ? kSelNext : kSelPrev;
  const std::string selFromNew = back ? kSelPrev : kSelNext;
  // empty container
  {
    SymbolicUpdate u;
    u.in = mk_spc({0}, {}, {}, {{"y", Val::region(0)}}, {{"x", Cs{}}});
    u.out = mk_spc({0}, {},
                   {{{0, kSelNext}, Val::null()}, {{0, kSelPrev}, Val::null()}},
                   {}, {{"z", cs_regs({0})}});
    u.rel = id_regs({0});
    s.updates.push_back(std::move(u));
  }
  // single-region container
  {
    SymbolicUpdate u;
    u.in = mk_spc({0, 1}, {},
                  {{{0, kSelNext}, Val::null()}, {{0, kSelPrev}, Val::null()}},
                  {{"y", Val::region(1)}}, {{"x", cs_regs({0})}});
    std::map<std::pair<int, std::string>, Val> pv{
        {{0, selToNew}, Val::region(1)},
        {{0, selFromNew}, Val::null()},
        {{1, selFromNew}, Val::region(0)},
        {{1, selToNew}, Val::null()}};
    u.out = mk_spc({0, 1}, {}, std::move(pv), {},
                   {{"z", back ? cs_regs({0, 1}) : cs_regs({1, 0})}});
    u.rel = id_regs({0, 1});
    s.updates.push_back(std::move(u));
  }
  // longer container, summarized by a DLS
  {
    SymbolicUpdate u;
    u.in = mk_spc({0, 1, 2}, {{0, 1}},
                  {{{0, kSelNext}, Val::top()},
                   {{1, kSelPrev}, Val::top()},
                   {{0, kSelPrev}, Val::null()},
                   {{1, kSelNext}, Val::null()}},
                  {{"y", Val::region(2)}}, {{"x", cs_seg(0, 1)}});
    std::map<std::pair<int, std::string>, Val> pv{
        {{0, kSelNext}, Val::top()}, {{1, kSelPrev}, Val::top()}};
    Cs outcs;
    if (back) {
      pv[{0, kSelPrev}] = Val::null();
      pv[{1, kSelNext}] = Val::region(2);
      pv[{2, kSelPrev}] = Val::region(1);
      pv[{2, kSelNext}] = Val::null();
      outcs = cs_seg(0, 1);
      outcs.seq.push_back(ObjId::region(2));
    } else {
      pv[{1, kSelNext}] = Val::null();
      pv[{0, kSelPrev}] = Val::region(2);
      pv[{2, kSelNext}] = Val::region(0);
      pv[{2, kSelPrev}] = Val::null();
      outcs.seq.push_back(ObjId::region(2));
      Cs rest = cs_seg(0, 1);
      for (auto &o : rest.seq) outcs.seq.push_back(o);
    }
    u.out = mk_spc({0, 1, 2}, {{0, 1}}, std::move(pv), {}, {{"z", outcs}});
    u.rel = id_regs({0, 1, 2}, true);
    s.updates.push_back(std::move(u));
  }
  return s;
}

OpSpec make_pop(bool back) {
  OpSpec s;
  s.name = back ? "pop_back" : "pop_front";
  s.ins = {"x"};
  s.outs = {"z", "w"};
  // single-region container: nothing destructive happens
  {
    SymbolicUpdate u;
    u.in = mk_spc({0}, {},
                  {{{0, kSelNext}, Val::null()}, {{0, kSelPrev}, Val::null()}},
                  {}, {{"x", cs_regs({0})}});
    u.out = mk_spc({0}, {},
                   {{{0, kSelNext}, Val::null()}, {{0, kSelPrev}, Val::null()}},
                   {{"w", Val::region(0)}}, {{"z", Cs{}}});
    u.rel = id_regs({0});
    s.updates.push_back(std::move(u));
  }
  // two-region container
  {
    SymbolicUpdate u;
    u.in = mk_spc({0, 1}, {},
                  {{{0, kSelNext}, Val::region(1)},
                   {{0, kSelPrev}, Val::null()},
                   {{1, kSelPrev}, Val::region(0)},
                   {{1, kSelNext}, Val::null()}},
                  {}, {{"x", cs_regs({0, 1})}});
    std::map<std::pair<int, std::string>, Val> pv;
    int taken = back ? 1 : 0, kept = back ? 0 : 1;
    // the taken region keeps its stale link into the rest
    pv[{taken, back ? kSelPrev : kSelNext}] = Val::region(kept);
    pv[{taken, back ? kSelNext : kSelPrev}] = Val::null();
    pv[{kept, kSelNext}] = Val::null();
    pv[{kept, kSelPrev}] = Val::null();
    u.out = mk_spc({0, 1}, {}, std::move(pv), {{"w", Val::region(taken)}},
                   {{"z", cs_regs({kept})}});
    u.rel = id_regs({0, 1});
    s.updates.push_back(std::move(u));
  }
  // longer container: [r0, r1, seg(r1..r2)] front case (mirrored for back)
  {
    SymbolicUpdate u;
    std::map<std::pair<int, std::string>, Val> pin, pout;
    Cs incs, outcs;
    if (!back) {
      // in: 0 -> 1 ~~ 2 -> NULL
      pin[{0, kSelPrev}] = Val::null();
      pin[{0, kSelNext}] = Val::region(1);
      pin[{1, kSelPrev}] = Val::region(0);
      pin[{1, kSelNext}] = Val::top();
      pin[{2, kSelPrev}] = Val::top();
      pin[{2, kSelNext}] = Val::null();
      incs.seq = {ObjId::region(0), ObjId::region(1), ObjId::segment(1, 2),
                  ObjId::region(2)};
      pout = pin;
      pout[{1, kSelPrev}] = Val::null(); // detach
      outcs.seq = {ObjId::region(1), ObjId::segment(1, 2), ObjId::region(2)};
    } else {
      // in: 0 ~~ 1 <- 2, i.e. [0, seg(0,1), 1, 2]
      pin[{0, kSelPrev}] = Val::null();
      pin[{0, kSelNext}] = Val::top();
      pin[{1, kSelPrev}] = Val::top();
      pin[{1, kSelNext}] = Val::region(2);
      pin[{2, kSelPrev}] = Val::region(1);
      pin[{2, kSelNext}] = Val::null();
      incs.seq = {ObjId::region(0), ObjId::segment(0, 1), ObjId::region(1),
                  ObjId::region(2)};
      pout = pin;
      pout[{1, kSelNext}] = Val::null();
      outcs.seq = {ObjId::region(0), ObjId::segment(0, 1), ObjId::region(1)};
    }
    int taken = back ? 2 : 0;
    u.in = mk_spc({0, 1, 2}, {back ? std::make_pair(0, 1) : std::make_pair(1, 2)},
                  std::move(pin), {}, {{"x", incs}});
    u.out = mk_spc({0, 1, 2}, {back ? std::make_pair(0, 1) : std::make_pair(1, 2)},
                   std::move(pout), {{"w", Val::region(taken)}}, {{"z", outcs}});
    u.rel = id_regs({0, 1, 2}, true, back ? 0 : 1, back ? 1 : 2);
    s.updates.push_back(std::move(u));
  }
  return s;
}

} // namespace

std::vector<OpSpec> builtin_library() {
  std::vector<OpSpec> lib;
  lib.push_back(make_push(true));
  lib.push_back(make_push(false));
  lib.push_back(make_pop(true));
  lib.push_back(make_pop(false));
  {
    OpSpec s;
    s.name = "create_empty";
    s.outs = {"z"};
    SymbolicUpdate u;
    u.in = mk_spc({}, {}, {}, {}, {});
    u.out = mk_spc({}, {}, {}, {}, {{"z", Cs{}}});
    s.updates.push_back(std::move(u));
    lib.push_back(std::move(s));
  }
  {
    OpSpec s;
    s.name = "destroy_empty";
    s.ins = {"x"};
    SymbolicUpdate u;
    u.in = mk_spc({}, {}, {}, {}, {{"x", Cs{}}});
    u.out = mk_spc({}, {}, {}, {}, {});
    s.updates.push_back(std::move(u));
    lib.push_back(std::move(s));
  }
  return lib;
}

bool op_is_destructive(const std::string &name) {
  return name == "push_back" || name == "push_front" || name == "pop_back" ||
         name == "pop_front" || name == "create_empty" || name == "destroy_empty";
}

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

std::vector<AtomicUpdate> atomic_decomposition(const SymbolicUpdate &u) {
  UpdateDeltas d = compute_deltas(u);
  if (!d.violations.empty())
    throw LiftError("atomic_decomposition: update is not transparent: " + d.violations[0]);
  std::vector<AtomicUpdate> atoms;
  std::map<ObjId, ObjId> rel_inv; // out region -> in region (unique for regions)
  for (const auto &p : u.rel)
    if (!p.first.dls && !p.second.dls) rel_inv[p.second] = p.first;

  for (const auto &w : d.writes) {
    AtomicUpdate a;
    a.kind = AtomicUpdate::SelWrite;
    // input pattern: written region with its old entry, plus the target's preimage
    Spc in, out;
    in.g.regs.insert(0);
    out.g.regs.insert(0);
    a.u.rel.push_back({ObjId::region(0), ObjId::region(0)});
    if (w.oldv) {
      Val ov = *w.oldv;
      if (ov.is_reg()) ov = Val::region(1); // normalized target id below
      in.g.pset(0, w.sel, ov);
    }
    Val nv = w.newv;
    int next_id = 1;
    std::map<int, int> remap; // original spec region -> atom-local id
    auto local_in = [&](int orig) {
      auto it = remap.find(orig);
      if (it != remap.end()) return it->second;
      int id = next_id++;
      remap[orig] = id;
      in.g.regs.insert(id);
      out.g.regs.insert(id);
      a.u.rel.push_back({ObjId::region(id), ObjId::region(id)});
      return id;
    };
    if (w.oldv && w.oldv->is_reg()) {
      auto pre = rel_inv.find(ObjId::region(w.oldv->reg));
      if (pre == rel_inv.end())
        throw LiftError("atomic_decomposition: old value has no preimage");
      in.g.pset(0, w.sel, Val::region(local_in(pre->second.front)));
    }
    if (nv.is_reg()) {
      auto pre = rel_inv.find(ObjId::region(nv.reg));
      if (pre == rel_inv.end())
        throw LiftError("atomic_decomposition: written value has no preimage");
      nv = Val::region(local_in(pre->second.front));
    }
    out.g.pset(0, w.sel, nv);
    a.u.in = std::move(in);
    a.u.out = std::move(out);
    a.desc = w.sel + " of " + w.in_obj.str() + " := " +
             (w.newv.is_null() ? "NULL"
                               : w.newv.is_top() ? "TOP" : "r" + std::to_string(w.newv.reg));
    atoms.push_back(std::move(a));
  }
  for (const auto &al : d.allocs) {
    AtomicUpdate a;
    a.kind = AtomicUpdate::Alloc;
    a.u.out.g.regs.insert(0);
    a.desc = "alloc " + al.str();
    atoms.push_back(std::move(a));
    // explicit writes initializing the fresh region's selectors
    for (const std::string &sel : {kSelNext, kSelPrev}) {
      const Val *v = u.out.g.pget(al.front, sel);
      if (!v || v->is_top()) continue;
      AtomicUpdate w;
      w.kind = AtomicUpdate::SelWrite;
      w.u.in.g.regs.insert(0);
      w.u.out.g.regs.insert(0);
      w.u.rel.push_back({ObjId::region(0), ObjId::region(0)});
      Val nv = *v;
      if (nv.is_reg()) {
        w.u.in.g.regs.insert(1);
        w.u.out.g.regs.insert(1);
        w.u.rel.push_back({ObjId::region(1), ObjId::region(1)});
        nv = Val::region(1);
      }
      w.u.out.g.pset(0, sel, nv);
      w.desc = sel + " of fresh " + al.str();
      atoms.push_back(std::move(w));
    }
  }
  for (const auto &de : d.deallocs) {
    AtomicUpdate a;
    a.kind = AtomicUpdate::Dealloc;
    a.u.in.g.regs.insert(0);
    a.desc = "free " + de.str();
    atoms.push_back(std::move(a));
  }
  return atoms;
}

// ---------------------------------------------------------------------------
// Update entailment
// ---------------------------------------------------------------------------

namespace {

bool rel_has(const Rel &r, const ObjId &a, const ObjId &b) {
  return std::find(r.begin(), r.end(), std::make_pair(a, b)) != r.end();
}

// Entries of object o equal on both sides modulo the identity-ish rel pairing.
bool pair_unchanged(const SymbolicUpdate &u, const ObjId &i, const ObjId &o) {
  if (i.dls || o.dls) return true;
  for (const std::string &sel : {kSelNext, kSelPrev}) {
    bool si = u.in.g.erased_slot(i.front, sel).has_value();
    bool so = u.out.g.erased_slot(o.front, sel).has_value();
    if (si != so) return false;
    if (si) continue;
    const Val *vi = u.in.g.pget(i.front, sel);
    const Val *vo = u.out.g.pget(o.front, sel);
    if ((vi == nullptr) != (vo == nullptr)) return false;
    if (vi && !vals_correspond(*vi, *vo, u.rel)) return false;
  }
  return true;
}

} // namespace

namespace {

bool update_entails_with(const SymbolicUpdate &a, const SymbolicUpdate &b,
                         const UpdateDeltas &da, const UpdateDeltas &db,
                         const Witness &win, const Witness &wout);

} // namespace

bool update_entails(const SymbolicUpdate &a, const SymbolicUpdate &b) {
  UpdateDeltas da = compute_deltas(a);
  UpdateDeltas db = compute_deltas(b);
  if (!da.violations.empty() || !db.violations.empty()) return false;
  auto wins = entails_all(a.in, b.in);
  if (wins.empty()) return false;
  auto wouts = entails_all(a.out, b.out);
  if (wouts.empty()) return false;
  for (const auto &win : wins)
    for (const auto &wout : wouts)
      if (update_entails_with(a, b, da, db, win, wout)) return true;
  return false;
}

namespace {

bool update_entails_with(const SymbolicUpdate &a, const SymbolicUpdate &b,
                         const UpdateDeltas &da, const UpdateDeltas &db,
                         const Witness &win, const Witness &wout) {
  // rel correspondence, both directions
  Rel image;
  for (const auto &p : a.rel) {
    auto i1 = win.find(p.first);
    auto i2 = wout.find(p.second);
    if ((i1 == win.end()) != (i2 == wout.end())) return false;
    if (i1 == win.end()) {
      if (!pair_unchanged(a, p.first, p.second)) return false;
      continue;
    }
    image.push_back({i1->second, i2->second});
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  Rel brel = b.rel;
  std::sort(brel.begin(), brel.end());
  brel.erase(std::unique(brel.begin(), brel.end()), brel.end());
  for (const auto &p : image)
    if (!rel_has(brel, p.first, p.second)) return false;
  for (const auto &p : brel)
    if (!rel_has(image, p.first, p.second)) return false;

  // dealloc/alloc correspondence
  auto as_set = [](const std::vector<ObjId> &v) {
    return std::set<ObjId>(v.begin(), v.end());
  };
  std::set<ObjId> adel = as_set(da.deallocs), bdel = as_set(db.deallocs);
  std::set<ObjId> aal = as_set(da.allocs), bal = as_set(db.allocs);
  std::set<ObjId> adel_img, aal_img;
  for (const auto &o : adel) {
    auto it = win.find(o);
    if (it == win.end()) return false; // junk may not be deallocated
    adel_img.insert(it->second);
  }
  for (const auto &o : aal) {
    auto it = wout.find(o);
    if (it == wout.end()) return false;
    aal_img.insert(it->second);
  }
  if (adel_img != bdel || aal_img != bal) return false;
  // no surviving a-region may map onto a b-dealloc/alloc region
  for (const auto &kv : win)
    if (bdel.count(kv.second) && !adel.count(kv.first)) return false;
  for (const auto &kv : wout)
    if (bal.count(kv.second) && !aal.count(kv.first)) return false;

  // every a-write must be visible on the b side
  for (const auto &w : da.writes) {
    auto i1 = win.find(w.in_obj);
    auto i2 = wout.find(w.out_obj);
    if (i1 == win.end() || i2 == wout.end()) return false; // invisible change
    if (i1->second.dls || i2->second.dls) return false;
    bool bin = b.in.g.pget(i1->second.front, w.sel) != nullptr ||
               b.in.g.erased_slot(i1->second.front, w.sel).has_value();
    bool bout = b.out.g.pget(i2->second.front, w.sel) != nullptr ||
                b.out.g.erased_slot(i2->second.front, w.sel).has_value();
    if (!bin && !bout) return false; // not explicit in the pattern
  }
  return true;
}

} // namespace

// ---------------------------------------------------------------------------
// Bounded concrete application
// ---------------------------------------------------------------------------

namespace {

// Lifts c to a subject Spc whose valuation domain matches pat's.
Spc lift_pc(const Pc &c) {
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
  return subj;
}

} // namespace

std::vector<Pc> apply_symbolic(const Pc &c, const SymbolicUpdate &u) {
  std::vector<Pc> outs;
  Spc subj = lift_pc(c);
  // The update's in-valuation names parameters; the subject PC's variables
  // are exactly those parameters, so the valuation pins the witness.
  auto w = entails(subj, u.in);
  if (!w) return outs;
  UpdateDeltas d = compute_deltas(u);
  // map pattern region -> subject region
  std::map<int, int> inv;
  for (const auto &kv : *w)
    if (!kv.first.dls && !kv.second.dls) inv[kv.second.front] = kv.first.front;
  // rel as region maps between pattern sides
  std::map<int, int> relmap; // in pattern region -> out pattern region
  std::map<int, int> relinv;
  for (const auto &p : u.rel)
    if (!p.first.dls && !p.second.dls) {
      relmap[p.first.front] = p.second.front;
      relinv[p.second.front] = p.first.front;
    }
  Pc out = c;
  if (!d.allocs.empty()) return outs; // allocating ops not used by the library
  for (const auto &de : d.deallocs) {
    auto it = inv.find(de.front);
    if (it == inv.end()) return outs;
    out.free_region(it->second);
  }
  for (const auto &wd : d.writes) {
    int subj_r = inv.count(wd.in_obj.front) ? inv[wd.in_obj.front] : -1;
    if (subj_r < 0) return outs;
    Val nv = wd.newv;
    if (nv.is_reg()) {
      int in_pat = relinv.count(nv.reg) ? relinv[nv.reg] : -1;
      if (in_pat < 0 || !inv.count(in_pat)) return outs;
      nv = Val::region(inv[in_pat]);
    }
    out.mg.pv[subj_r][wd.sel] = nv;
  }
  // output valuation: keep only the update's output parameters
  Pc res;
  res.mg = out.mg;
  res.next_region = out.next_region;
  for (const auto &kv : u.out.sp) {
    Val v = kv.second;
    if (v.is_reg()) {
      int in_pat = relinv.count(v.reg) ? relinv[v.reg] : -1;
      if (in_pat < 0 || !inv.count(in_pat)) return outs;
      v = Val::region(inv[in_pat]);
    }
    res.sp[kv.first] = v;
  }
  for (const auto &kv : u.out.sc) {
    if (kv.second.top) { res.sc[kv.first] = CtrVal::tv(); continue; }
    std::vector<int> regs;
    for (const auto &o : kv.second.cs.seq) {
      if (o.dls) {
        // expand via the subject's concrete run between the mapped ends
        int f = o.front, b = o.back;
        int in_f = relinv.count(f) ? relinv[f] : f;
        int in_b = relinv.count(b) ? relinv[b] : b;
        if (!inv.count(in_f) || !inv.count(in_b)) return outs;
        int cur = inv[in_f], stop = inv[in_b];
        // interior regions strictly between cur and stop in the original heap
        std::vector<int> inner;
        int x = cur;
        while (x != stop) {
          Val nx = c.mg.pv.at(x).at(kSelNext);
          if (!nx.is_reg()) return outs;
          x = nx.reg;
          if (x != stop) inner.push_back(x);
        }
        for (int ir : inner) regs.push_back(ir);
      } else {
        int in_pat = relinv.count(o.front) ? relinv[o.front] : o.front;
        if (!inv.count(in_pat)) return outs;
        regs.push_back(inv[in_pat]);
      }
    }
    res.sc[kv.first] = CtrVal::of(regs);
  }
  outs.push_back(std::move(res));
  return outs;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<std::string> validate_spec(const OpSpec &s, int bound) {
  std::vector<std::string> diags;
  std::set<std::string> xs(s.ins.begin(), s.ins.end());
  std::set<std::string> ys(s.outs.begin(), s.outs.end());
  for (size_t i = 0; i < s.updates.size(); ++i) {
    const auto &u = s.updates[i];
    std::set<std::string> din, dout;
    for (const auto &kv : u.in.sp) din.insert(kv.first);
    for (const auto &kv : u.in.sc) din.insert(kv.first);
    for (const auto &kv : u.out.sp) dout.insert(kv.first);
    for (const auto &kv : u.out.sc) dout.insert(kv.first);
    if (din != xs)
      diags.push_back("update " + std::to_string(i) +
                      ": input valuation domain differs from the input parameters");
    if (dout != ys)
      diags.push_back("update " + std::to_string(i) +
                      ": output valuation domain differs from the output parameters");
    UpdateDeltas d = compute_deltas(u);
    for (const auto &v : d.violations)
      diags.push_back("update " + std::to_string(i) + ": " + v);
    for (const auto &v : d.data_changes)
      diags.push_back("update " + std::to_string(i) + ": " + v);
  }
  // bounded determinism of [[Delta]] cap Delta_const
  std::vector<std::pair<Pc, Pc>> graph; // (input, output) canonical pairs
  for (const auto &u : s.updates) {
    UpdateDeltas d = compute_deltas(u);
    if (!d.violations.empty()) continue;
    for (const auto &c : concretize_upto(u.in, bound)) {
      auto res = apply_symbolic(c, u);
      for (const auto &r : res) graph.push_back({c, r});
    }
  }
  for (size_t i = 0; i < graph.size(); ++i)
    for (size_t j = i + 1; j < graph.size(); ++j) {
      if (!mg_isomorphic(graph[i].first, graph[j].first)) continue;
      // same input (up to renaming): outputs must agree; compare via a joint
      // canonical form of (input, output) as one configuration
      auto joint = [](const std::pair<Pc, Pc> &g) {
        Pc j = g.first;
        for (const auto &kv : g.second.sp) j.sp["out$" + kv.first] = kv.second;
        for (const auto &kv : g.second.sc) j.sc["out$" + kv.first] = kv.second;
        // the output heap is the one that matters post-update
        j.mg = g.second.mg;
        for (const auto &kv : g.first.sp) j.sp["in$" + kv.first] = kv.second;
        return canonical_pc(j);
      };
      if (joint(graph[i]) != joint(graph[j])) {
        diags.push_back("nondeterministic at bound " + std::to_string(bound));
        i = graph.size();
        break;
      }
    }
  return diags;
}

} // namespace lift
