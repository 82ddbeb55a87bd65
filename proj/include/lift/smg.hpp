#pragma once

#include "lift/concrete.hpp"

namespace lift {

// Symbolic memory graph. Selector maps may be partial: an absent entry is an
// unconstrained value (sub-SMGs and operation patterns), while an explicit Top
// entry is the strictly-undefined value. For a DLS (f,b) with f != b the slots
// (f,next) and (b,prev) are erased by folding and hold Top.
struct Smg {
  std::set<int> regs;
  std::set<std::pair<int, int>> dls; // (front, back)
  std::map<std::pair<int, std::string>, Val> pv;
  std::map<std::pair<int, std::string>, DataVal> dv;

  bool has_region(int r) const { return regs.count(r) != 0; }
  const Val *pget(int r, const std::string &sel) const {
    auto it = pv.find({r, sel});
    return it == pv.end() ? nullptr : &it->second;
  }
  const DataVal *dget(int r, const std::string &sel) const {
    auto it = dv.find({r, sel});
    return it == dv.end() ? nullptr : &it->second;
  }
  void pset(int r, const std::string &sel, Val v) { pv[{r, sel}] = v; }
  void dset(int r, const std::string &sel, DataVal v) { dv[{r, sel}] = v; }

  // The DLS whose erased slot (r,sel) is, if any.
  std::optional<std::pair<int, int>> erased_slot(int r, const std::string &sel) const;

  std::vector<ObjId> objects() const;
  void remove_region(int r);
  bool check_invariants(std::string *why = nullptr) const;
};

// Container shape: alternating object sequence [reg f, (dls f x, reg x,)* ...];
// empty sequence stands for the empty container.
struct Cs {
  std::vector<ObjId> seq;

  bool empty() const { return seq.empty(); }
  std::set<ObjId> object_set() const { return {seq.begin(), seq.end()}; }
  friend bool operator==(const Cs &a, const Cs &b) { return a.seq == b.seq; }
  friend bool operator<(const Cs &a, const Cs &b) { return a.seq < b.seq; }
};

struct CtrAbs {
  bool top = true;
  Cs cs;
  static CtrAbs tv() { return {true, {}}; }
  static CtrAbs of(Cs c) { return {false, std::move(c)}; }
  friend bool operator==(const CtrAbs &a, const CtrAbs &b) {
    return a.top == b.top && (a.top || a.cs == b.cs);
  }
};

// Symbolic program configuration.
struct Spc {
  Smg g;
  std::map<std::string, Val> sp;    // sigma(v) Top means "forgotten" (covers anything)
  std::map<std::string, CtrAbs> sc;

  bool check_invariants(std::string *why = nullptr) const;
};

// All NULL-terminated SDLL sub-SMGs, ordered by front region id.
std::vector<Cs> container_shapes(const Smg &g);

// Is this object sequence a container shape of g (empty allowed)?
bool is_container_shape(const Smg &g, const Cs &cs);

// Folds a plain doubly-linked run into a DLS. Throws on precondition violation.
Smg fold(const Smg &g, const std::vector<int> &segment);

struct Materialization {
  Smg g;
  std::vector<std::pair<ObjId, ObjId>> rel; // old object -> new object
};

// Case split of a DLS at the chosen end; fresh inner regions get ids from
// next_region. Union of concretizations is preserved.
std::vector<Materialization> materialize(const Smg &g, std::pair<int, int> d,
                                         bool front_end, int &next_region,
                                         const std::vector<std::string> &data_sels);

using Witness = std::map<ObjId, ObjId>; // subject object -> pattern object

// Entailment [[a]] subseteq [[b]] with the covering witness. Complete on
// list-shaped SMGs; compares valuations on dom(b).
std::optional<Witness> entails(const Spc &a, const Spc &b);
std::vector<Witness> entails_all(const Spc &a, const Spc &b, size_t cap = 8);

// Membership of a concrete configuration in [[A]] up to renaming.
bool member_of(const Pc &c, const Spc &A);

// Bounded concretization: each DLS expands to runs with 0..k-1 inner regions,
// unconstrained data ranges over {0,1,Top}, forgotten variables over every
// value expressible in the expanded graph.
std::vector<Pc> concretize_upto(const Spc &a, int k);
std::vector<Mg> concretize_upto(const Smg &g, int k);

// Embedding enumeration: all ways the pattern (an operation's input/output
// SPC) maps into a configuration, binding the pattern valuation. Used by the
// chain search.
struct Embedding {
  Witness w;              // subject object -> pattern object
  std::map<std::string, Val> bind_sp;     // pattern var -> subject value
  std::map<std::string, CtrAbs> bind_sc;  // pattern var -> subject shape
};
std::vector<Embedding> find_embeddings(const Spc &subject, const Spc &pattern);

// Closes an object image under the graph's structure: segment ends accompany
// their segments, and a segment joins when both of its end regions are present.
std::set<ObjId> close_objects(const Smg &g, std::set<ObjId> objs);

Smg rename_regions(const Smg &g, const std::map<int, int> &ren);
Spc rename_regions(const Spc &a, const std::map<int, int> &ren);
ObjId rename_obj(const ObjId &o, const std::map<int, int> &ren);

} // namespace lift
