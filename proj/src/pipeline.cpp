#include "lift/pipeline.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace lift {

using nlohmann::json;

std::vector<OpSpec> load_opspecs(const std::string &text) {
  json j = json::parse(text);
  if (j.value("schema", "") != "opspecs/1")
    throw LiftError("unsupported opspecs schema");
  std::vector<OpSpec> specs;
  for (const auto &sj : j.at("specs")) {
    OpSpec s;
    s.name = sj.at("name").get<std::string>();
    if (sj.contains("ins")) s.ins = sj.at("ins").get<std::vector<std::string>>();
    if (sj.contains("outs")) s.outs = sj.at("outs").get<std::vector<std::string>>();
    for (const auto &uj : sj.at("updates")) {
      SymbolicUpdate u;
      u.in = spc_from_json(uj.at("in"));
      u.out = spc_from_json(uj.at("out"));
      for (const auto &p : uj.at("rel"))
        u.rel.push_back({obj_from(p[0].get<std::string>()),
                         obj_from(p[1].get<std::string>())});
      s.updates.push_back(std::move(u));
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

std::string save_opspecs(const std::vector<OpSpec> &lib) {
  json j;
  j["schema"] = "opspecs/1";
  json specs = json::array();
  for (const auto &s : lib) {
    json sj;
    sj["name"] = s.name;
    sj["ins"] = s.ins;
    sj["outs"] = s.outs;
    json ups = json::array();
    for (const auto &u : s.updates) {
      json uj;
      uj["in"] = spc_to_json(u.in);
      uj["out"] = spc_to_json(u.out);
      json rel = json::array();
      for (const auto &p : u.rel) rel.push_back({obj_str(p.first), obj_str(p.second)});
      uj["rel"] = rel;
      ups.push_back(uj);
    }
    sj["updates"] = ups;
    specs.push_back(sj);
  }
  j["specs"] = specs;
  return j.dump(1);
}

std::vector<OpSpec> library_with(const std::string &opspecs_path) {
  std::vector<OpSpec> lib = builtin_library();
  if (opspecs_path.empty()) return lib;
  std::ifstream in(opspecs_path);
  if (!in) throw LiftError("cannot open opspecs file " + opspecs_path);
  std::stringstream ss;
  ss << in.rdbuf();
  for (auto &s : load_opspecs(ss.str())) {
    bool replaced = false;
    for (auto &b : lib)
      if (b.name == s.name) {
        b = s;
        replaced = true;
      }
    if (!replaced) lib.push_back(std::move(s));
  }
  return lib;
}

namespace {

std::string cfg_json(const Cfg &cfg) {
  json j;
  j["schema"] = "cfg/1";
  j["locations"] = cfg.n_locs;
  j["entry"] = cfg.entry;
  j["exit"] = cfg.exit;
  json edges = json::array();
  for (size_t i = 0; i < cfg.edges.size(); ++i) {
    json e;
    e["id"] = (int)i;
    e["src"] = cfg.edges[i].src;
    e["dst"] = cfg.edges[i].dst;
    e["stmt"] = stmt_to_json(cfg.edges[i].stmt);
    edges.push_back(e);
  }
  j["edges"] = edges;
  return j.dump(1);
}

bool cfg_matches(const Cfg &a, const Cfg &b, std::string *why) {
  if (a.n_locs != b.n_locs || a.entry != b.entry || a.exit != b.exit ||
      a.edges.size() != b.edges.size()) {
    if (why) *why = "CFG shape differs from the program's";
    return false;
  }
  for (size_t i = 0; i < a.edges.size(); ++i)
    if (a.edges[i].src != b.edges[i].src || a.edges[i].dst != b.edges[i].dst ||
        !(a.edges[i].stmt == b.edges[i].stmt)) {
      if (why) *why = "edge " + std::to_string(i) + " differs from the program's";
      return false;
    }
  return true;
}

} // namespace

LiftOutcome cmd_lift(const RunConfig &cfg, const std::string &source) {
  LiftOutcome out;
  Program prog;
  try {
    prog = parse_program(source, false);
  } catch (const ParseError &e) {
    out.code = 3;
    out.notes.push_back(std::string("parse error: ") + e.what());
    return out;
  }
  LoweredCfg low = build_cfg(prog);
  auto det = check_branch_determinism(low.cfg);
  if (!det.empty()) {
    out.code = 3;
    for (const auto &d : det) out.notes.push_back("nondeterministic branching: " + d.msg);
    return out;
  }

  AnnotatedCfg acfg;
  if (!cfg.annotated_path.empty()) {
    std::ifstream in(cfg.annotated_path);
    if (!in) {
      out.code = 3;
      out.notes.push_back("cannot open annotated CFG " + cfg.annotated_path);
      return out;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      acfg = import_annotated(ss.str());
    } catch (const std::exception &e) {
      out.code = 3;
      out.notes.push_back(std::string("annotated CFG rejected: ") + e.what());
      return out;
    }
    std::string why;
    if (!cfg_matches(acfg.cfg, low.cfg, &why)) {
      out.code = 3;
      out.notes.push_back("annotated CFG rejected: " + why);
      return out;
    }
  } else {
    AnalysisOptions opts;
    opts.spc_cap = cfg.spc_cap;
    AnalysisResult ar = analyze(low.cfg, prog, opts);
    if (!ar.ok) {
      out.code = 2;
      out.notes.push_back("analysis failure: " + ar.error);
      return out;
    }
    for (const auto &f : ar.fault_reports)
      out.notes.push_back("possible fault: " + f);
    acfg = std::move(ar.acfg);
  }

  std::vector<OpSpec> lib;
  try {
    lib = library_with(cfg.opspecs_path);
  } catch (const std::exception &e) {
    out.code = 3;
    out.notes.push_back(e.what());
    return out;
  }

  auto matches = find_chains(acfg, lib);
  ParamAssignment nu;
  Recipe recipe = prune_to_fixpoint(acfg, lib, matches, &nu);
  if (cfg.dump_recipe) out.recipe_json = dump_recipe(acfg, recipe, nu);

  if (recipe.entries.empty()) {
    out.notes.push_back("no container operations recognized; program unchanged");
    out.transformed = false;
    out.output = cfg.emit_cfg_json ? cfg_json(low.cfg) : print_container_program(prog);
    out.code = 0;
    return out;
  }

  RewritePlan plan = make_plan(acfg, lib, recipe, nu);
  replace_destructive(prog, low, plan);
  Labeling lab = propagate_container_names(acfg, recipe);
  replace_nondestructive(prog, low, acfg, lab);
  cleanup(prog, low, acfg);

  std::string text = print_container_program(prog);
  try {
    Program check = parse_program(text, true);
    LoweredCfg clow = build_cfg(check);
    std::string why;
    if (!clow.cfg.check_invariants(&why)) throw LiftError(why);
  } catch (const std::exception &e) {
    out.code = 3;
    out.notes.push_back(std::string("output validation failed: ") + e.what());
    return out;
  }
  out.transformed = true;
  if (cfg.emit_cfg_json) {
    Program check = parse_program(text, true);
    out.output = cfg_json(build_cfg(check).cfg);
  } else {
    out.output = text;
  }
  out.code = 0;
  return out;
}

AnnotateOutcome cmd_annotate(const RunConfig &cfg, const std::string &source) {
  AnnotateOutcome out;
  Program prog;
  try {
    prog = parse_program(source, false);
  } catch (const ParseError &e) {
    out.code = 3;
    out.notes.push_back(std::string("parse error: ") + e.what());
    return out;
  }
  LoweredCfg low = build_cfg(prog);
  AnalysisOptions opts;
  opts.spc_cap = cfg.spc_cap;
  AnalysisResult ar = analyze(low.cfg, prog, opts);
  if (!ar.ok) {
    out.code = 2;
    out.notes.push_back("analysis failure: " + ar.error);
    return out;
  }
  if (cfg.verify_soundness) {
    std::mt19937_64 rng(cfg.seed);
    int checked = 0, violations = 0;
    for (int t = 0; t < std::min(cfg.trials, 50); ++t) {
      Oracle oracle;
      size_t len = rng() % (cfg.max_len + 1);
      for (size_t i = 0; i < len; ++i) oracle.push_back(rng() & 1);
      RunResult rr = run(low.cfg, prog, initial_pc(prog), oracle, cfg.step_bound);
      for (const auto &ts : rr.trace) {
        bool member = false;
        for (int sid : ar.acfg.at(ts.loc))
          if (member_of(ts.pc, ar.acfg.spcs[sid])) member = true;
        ++checked;
        if (!member) ++violations;
      }
    }
    out.notes.push_back("soundness spot-check: " + std::to_string(checked) +
                        " states, " + std::to_string(violations) + " violations");
    if (violations) out.code = 3;
  }
  out.json = export_annotated(ar.acfg);
  return out;
}

std::string EquivReport::summary() const {
  std::ostringstream o;
  o << passed << " passed, " << failed << " failed";
  return o.str();
}

EquivReport cmd_check_equiv(const RunConfig &cfg, const std::string &orig_source,
                            const std::string &lifted_source) {
  EquivReport rep;
  Program orig = parse_program(orig_source, false);
  Program lifted = parse_program(lifted_source, true);
  LoweredCfg olow = build_cfg(orig);
  LoweredCfg llow = build_cfg(lifted);

  // compare on the original variables still present in the lifted program
  std::vector<std::string> vars;
  for (const auto &v : orig.ptr_vars)
    if (lifted.is_ptr_var(v)) vars.push_back(v);

  std::mt19937_64 rng(cfg.seed);
  for (int t = 0; t < cfg.trials; ++t) {
    Oracle oracle;
    size_t len = rng() % (cfg.max_len + 1);
    for (size_t i = 0; i < len; ++i) oracle.push_back(rng() & 1);
    RunResult r1 = run(olow.cfg, orig, initial_pc(orig), oracle, cfg.step_bound);
    RunResult r2 = run(llow.cfg, lifted, initial_pc(lifted), oracle, cfg.step_bound);
    std::string verdict, detail;
    if (r1.kind == RunResult::Done && r2.kind == RunResult::Done) {
      if (mg_isomorphic(r1.final_pc(), r2.final_pc(), vars)) verdict = "pass";
      else {
        verdict = "mismatch";
        detail = "final configurations differ\n-- original --\n" + dump_trace(r1) +
                 "-- lifted --\n" + dump_trace(r2);
      }
    } else if (r1.kind == RunResult::Faulted && r2.kind == RunResult::Faulted) {
      if (r1.fault.msg == r2.fault.msg) verdict = "pass";
      else {
        verdict = "fault-divergence";
        detail = "original: " + r1.fault.msg + ", lifted: " + r2.fault.msg;
      }
    } else if (r1.kind == r2.kind) {
      verdict = "pass"; // both stuck / both exceeded the bound
    } else {
      verdict = "fault-divergence";
      detail = "outcome kinds differ\n-- original --\n" + dump_trace(r1) +
               "-- lifted --\n" + dump_trace(r2);
    }
    if (verdict == "pass") ++rep.passed;
    else {
      ++rep.failed;
      rep.failures.push_back({t, verdict, detail});
    }
  }
  return rep;
}

} // namespace lift
