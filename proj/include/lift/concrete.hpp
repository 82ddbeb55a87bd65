#pragma once

#include "lift/lang.hpp"

#include <functional>

namespace lift {

// Concrete memory graph: every selector map is total on the region set.
struct Mg {
  std::map<int, std::map<std::string, Val>> pv;      // region -> {next,prev} -> value
  std::map<int, std::map<std::string, DataVal>> dv;  // region -> data sel -> value

  bool has_region(int r) const { return pv.count(r) != 0; }
  std::vector<int> regions() const;
};

struct CtrVal {
  bool top = true;
  std::vector<int> regs; // front..back, empty list allowed

  static CtrVal tv() { return {true, {}}; }
  static CtrVal of(std::vector<int> rs) { return {false, std::move(rs)}; }
  friend bool operator==(const CtrVal &a, const CtrVal &b) {
    return a.top == b.top && (a.top || a.regs == b.regs);
  }
};

// Concrete program configuration.
struct Pc {
  Mg mg;
  std::map<std::string, Val> sp;     // pointer vars
  std::map<std::string, CtrVal> sc;  // container vars
  int next_region = 0;

  int alloc(const std::vector<std::string> &data_sels);
  void free_region(int r);
};

struct Fault {
  std::string msg;
};

struct StepResult {
  enum Kind { Ok, GuardPass, GuardFail, Faulted } kind = Ok;
  Fault fault;
};

using Oracle = std::vector<bool>;

// Standard C semantics of one statement; nondet guards consume one oracle bit.
StepResult exec_stmt(const Statement &st, Pc &pc, const Program &prog,
                     const Oracle &oracle, size_t &oracle_pos);

struct TraceState {
  int loc;
  Pc pc;
};

struct RunResult {
  enum Kind { Done, Faulted, Stuck, Nondeterministic, BoundExceeded } kind = Done;
  Fault fault;
  int fault_loc = -1;
  std::vector<TraceState> trace;

  const Pc &final_pc() const { return trace.back().pc; }
  int final_loc() const { return trace.back().loc; }
};

RunResult run(const Cfg &cfg, const Program &prog, Pc init, const Oracle &oracle,
              int step_bound);

Pc initial_pc(const Program &prog);

std::string dump_trace(const RunResult &r);

// Isomorphism up to region renaming, restricted to the given variables
// (all shared variables when empty).
bool mg_isomorphic(const Pc &a, const Pc &b, const std::vector<std::string> &vars = {});

// Canonical encoding used by mg_isomorphic; also handy for set-based oracles.
std::string canonical_pc(const Pc &pc, const std::vector<std::string> &vars = {});

} // namespace lift
