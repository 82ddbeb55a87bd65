#pragma once

#include "lift/analysis.hpp"

namespace lift {

// A transformation chain, trimmed so that its control path starts and ends
// with an implementing edge.
struct ChainMatch {
  int spec_idx = -1;
  int update_idx = -1;
  std::string op;
  std::vector<int> edges;                 // CFG edge ids, path order
  std::vector<int> spc_trace;             // spc ids, length edges+1
  std::vector<std::set<ObjId>> objs;      // tracked sub-SMG objects per position
  std::vector<char> implementing;         // per edge
  std::vector<Rel> step_rels;             // restricted relation per edge
  std::map<std::string, Val> bind_in_p;   // input parameter bindings at position 0
  std::map<std::string, CtrAbs> bind_in_c;
  std::map<std::string, Val> bind_out_p;  // output bindings at the last position
  std::map<std::string, CtrAbs> bind_out_c;

  int start_loc(const AnnotatedCfg &a) const { return a.spc_loc[spc_trace.front()]; }
  int end_loc(const AnnotatedCfg &a) const { return a.spc_loc[spc_trace.back()]; }
  std::vector<int> path_locs(const AnnotatedCfg &a) const;
};

Spc induced_sub(const Spc &full, const std::set<ObjId> &objs);

std::vector<ChainMatch> find_chains(const AnnotatedCfg &a,
                                    const std::vector<OpSpec> &lib);

// Valid replacement positions (index k: the location after the k-th path
// edge) under the syntactic commutation check.
std::vector<int> replacement_positions(const AnnotatedCfg &a, const ChainMatch &m);

struct Recipe {
  struct Entry {
    ChainMatch chain;
    int rl_pos = -1; // index into chain.path_locs
    int rl_loc = -1;
  };
  std::vector<Entry> entries;
  struct Site {
    int loc = -1;
    std::string op;
    int spec_idx = -1;
    std::vector<int> chain_ids; // indices into entries
    std::map<std::string, std::string> lam; // parameter -> fresh name
  };
  std::vector<Site> sites;
  std::vector<std::string> log; // pruning decisions
};

std::vector<Diagnostic> check_local_consistency(const AnnotatedCfg &a,
                                                const std::vector<OpSpec> &lib,
                                                const Recipe &r);
std::vector<Diagnostic> check_global_consistency(const AnnotatedCfg &a,
                                                 const Recipe &r);
std::vector<Diagnostic> check_connectedness(const AnnotatedCfg &a, const Recipe &r);

struct ParamAssignment {
  bool complete = false;
  // (location, assignment statement); statements use the lambda names
  std::vector<std::pair<int, Statement>> entries;
  std::vector<int> chains_to_drop; // recipe entry indices forcing a re-run
};

ParamAssignment compute_param_assignment(const AnnotatedCfg &a,
                                         const std::vector<OpSpec> &lib, Recipe &r);

// Builds the maximal consistent, connected recipe with a complete parameter
// assignment; deterministic pruning. Empty recipe when nothing survives.
Recipe prune_to_fixpoint(const AnnotatedCfg &a, const std::vector<OpSpec> &lib,
                         std::vector<ChainMatch> matches, ParamAssignment *nu_out);

// Maximal symbolic traces (edge-visit cap 2), as sequences of succ indices.
std::vector<std::vector<int>> symbolic_traces(const AnnotatedCfg &a);

std::string dump_recipe(const AnnotatedCfg &a, const Recipe &r,
                        const ParamAssignment &nu);

} // namespace lift
