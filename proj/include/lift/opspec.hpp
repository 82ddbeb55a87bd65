#pragma once

#include "lift/smg.hpp"

namespace lift {

using Rel = std::vector<std::pair<ObjId, ObjId>>; // transformation relation

// Symbolic update (C, ~>, C'). Valuation domains are the operation parameters.
struct SymbolicUpdate {
  Spc in, out;
  Rel rel;
};

struct OpSpec {
  std::string name;
  std::vector<std::string> ins;  // input parameter names (container or pointer)
  std::vector<std::string> outs; // output parameter names
  std::vector<SymbolicUpdate> updates;
};

// One destructive change: a selector write, an allocation, or a deallocation.
struct AtomicUpdate {
  enum Kind { SelWrite, Alloc, Dealloc } kind = SelWrite;
  SymbolicUpdate u; // localized pattern (empty valuations)
  std::string desc;
};

// Entry-level difference between rel-related regions.
struct SelDelta {
  ObjId in_obj, out_obj;
  std::string sel;
  const Val *oldv; // nullptr: unconstrained before
  Val newv;
};

struct UpdateDeltas {
  std::vector<SelDelta> writes;
  std::vector<ObjId> allocs;   // out regions without a rel predecessor
  std::vector<ObjId> deallocs; // in regions without a rel successor
  std::vector<std::string> violations;   // transparency violations
  std::vector<std::string> data_changes; // excluded by Delta_const, not destructive
};

UpdateDeltas compute_deltas(const SymbolicUpdate &u);

Rel compose(const Rel &a, const Rel &b);
Rel rel_identity(const Smg &g);

std::vector<OpSpec> builtin_library();

// Parameter-domain, determinism (bounded) and transparency diagnostics.
std::vector<std::string> validate_spec(const OpSpec &s, int bound = 3);

// Atoms whose application in any definedness-respecting order composes to u.
std::vector<AtomicUpdate> atomic_decomposition(const SymbolicUpdate &u);

// [[a]] subseteq [[b]].
bool update_entails(const SymbolicUpdate &a, const SymbolicUpdate &b);

// [[(S, rel, S')]] cap Delta_const subseteq identity — syntactic by transparency.
bool update_is_identity(const Spc &in, const Rel &rel, const Spc &out);

// Applies the update to a member of [[u.in]]; the results for all embeddings
// of a deterministic operation are isomorphic. Empty when c is not a member.
std::vector<Pc> apply_symbolic(const Pc &c, const SymbolicUpdate &u);

// Destructive ops recognized by chain search (the others are App.E-style).
bool op_is_destructive(const std::string &name);

} // namespace lift
