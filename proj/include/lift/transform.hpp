#pragma once

#include "lift/recognition.hpp"

namespace lift {

// Edge removals and per-location insertions derived from a recipe.
struct RewritePlan {
  std::set<int> removed_edges;                          // become skip
  std::map<int, std::vector<Statement>> additions;      // location -> stmts, exec order
  std::vector<std::string> new_ptr_vars, new_ctr_vars;
};

RewritePlan make_plan(const AnnotatedCfg &a, const std::vector<OpSpec> &lib,
                      const Recipe &r, const ParamAssignment &nu);

// Applies the plan onto the structured program the CFG was lowered from.
void replace_destructive(Program &p, const LoweredCfg &low, const RewritePlan &plan);

// Container-variable labeling of container shapes, per SPC.
using Labeling = std::map<std::pair<int, std::set<ObjId>>, std::string>;

Labeling propagate_container_names(const AnnotatedCfg &a, const Recipe &r);

// App.E-style per-edge rewriting of iterator initialisation, iteration and
// emptiness/end tests. Untouched edges keep their statements.
void replace_nondestructive(Program &p, const LoweredCfg &low, const AnnotatedCfg &a,
                            const Labeling &lab);

// Liveness-based dead assignment removal, trivial-branch elimination, skip
// compression. Guard purity is justified against the original annotations.
void cleanup(Program &p, const LoweredCfg &oldlow, const AnnotatedCfg &a);

// Deterministic printing; re-parseable with the container extension.
std::string print_container_program(const Program &p);

} // namespace lift
