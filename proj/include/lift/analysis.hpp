#pragma once

#include "lift/opspec.hpp"

#include <nlohmann/json.hpp>

namespace lift {

// Annotated CFG: memory invariant, successor relation, transformation relation.
// Region ids are globally unique across all stored SPCs.
struct AnnotatedCfg {
  Cfg cfg;
  std::vector<Spc> spcs;
  std::vector<int> spc_loc;                 // spc id -> location
  std::map<int, std::vector<int>> mem;      // location -> spc ids
  struct SuccEntry {
    int src_spc, dst_spc, edge;
    friend bool operator<(const SuccEntry &a, const SuccEntry &b) {
      return std::tie(a.src_spc, a.dst_spc, a.edge) < std::tie(b.src_spc, b.dst_spc, b.edge);
    }
  };
  std::vector<SuccEntry> succ;              // the relation on SPCs, per edge
  struct TransEntry {
    ObjId src, dst;
    int src_spc, dst_spc, edge;
  };
  std::vector<TransEntry> trans;            // the relation on objects, per edge

  const std::vector<int> &at(int loc) const;
  int owner_spc(const ObjId &o) const;      // spc containing the object
  bool check_invariants(std::string *why = nullptr) const;
};

struct PostOut {
  Spc spc;
  Rel rel;
};

struct PostResult {
  std::vector<PostOut> outs;           // guard-filtered, case-split
  std::vector<std::string> faults;     // definite faults
};

// Abstract transformer for pointer/data/skip statements. Materializes DLS
// ends before any selector access so every destructive change is explicit.
PostResult abstract_post(const Statement &st, const Spc &c, int &next_region,
                         const std::vector<std::string> &data_sels);

struct AnalysisOptions {
  int spc_cap = 64;
};

struct AnalysisResult {
  bool ok = false;
  std::string error;
  AnnotatedCfg acfg;
  std::vector<std::string> fault_reports;   // definite faults found on the way
  std::vector<std::string> garbage_notes;
};

AnalysisResult analyze(const Cfg &cfg, const Program &prog,
                       const AnalysisOptions &opts = {});

std::string export_annotated(const AnnotatedCfg &a);
AnnotatedCfg import_annotated(const std::string &json_text);

// shared JSON encodings (annotated CFGs, operation spec files)
nlohmann::json stmt_to_json(const Statement &s);
Statement stmt_from_json(const nlohmann::json &j);
nlohmann::json spc_to_json(const Spc &s);
Spc spc_from_json(const nlohmann::json &j);
std::string obj_str(const ObjId &o);
ObjId obj_from(const std::string &s);

// Back-edge targets of a deterministic DFS from the entry.
std::set<int> loop_heads(const Cfg &cfg);

} // namespace lift
