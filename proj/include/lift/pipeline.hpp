#pragma once

#include "lift/transform.hpp"

namespace lift {

struct RunConfig {
  std::string opspecs_path;
  std::string annotated_path; // import instead of running the analysis
  int k = 4;                  // concretization bound
  int trials = 200;
  int max_len = 8;
  unsigned long long seed = 1;
  int spc_cap = 64;
  int step_bound = 20000;
  bool dump_recipe = false;
  bool emit_cfg_json = false;
  bool verify_soundness = false;
};

// exit codes: 0 ok (also: nothing recognized), 2 analysis failure,
// 3 invariant/validation failure
struct LiftOutcome {
  int code = 0;
  bool transformed = false;
  std::string output;      // program text, or CFG JSON with emit_cfg_json
  std::string recipe_json; // with dump_recipe
  std::vector<std::string> notes;
};

LiftOutcome cmd_lift(const RunConfig &cfg, const std::string &source);

struct AnnotateOutcome {
  int code = 0;
  std::string json;
  std::vector<std::string> notes;
};

AnnotateOutcome cmd_annotate(const RunConfig &cfg, const std::string &source);

struct EquivReport {
  struct Entry {
    int schedule = -1;
    std::string verdict; // pass | mismatch | fault-divergence
    std::string detail;
  };
  int passed = 0;
  int failed = 0;
  std::vector<Entry> failures;
  std::string summary() const;
};

EquivReport cmd_check_equiv(const RunConfig &cfg, const std::string &orig_source,
                            const std::string &lifted_source);

// opspecs.json: overrides/extends the builtin library by name
std::vector<OpSpec> load_opspecs(const std::string &json_text);
std::string save_opspecs(const std::vector<OpSpec> &lib);

std::vector<OpSpec> library_with(const std::string &opspecs_path);

} // namespace lift
