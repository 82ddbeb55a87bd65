#include "lift/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw lift::LiftError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string &path, const std::string &text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw lift::LiftError("cannot write " + path);
  out << text;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"source-to-source lifting of low-level list code to container operations"};
  app.require_subcommand(1);

  lift::RunConfig cfg;
  std::vector<std::string> inputs;
  std::string out_path, emit, orig_path, lifted_path;

  auto *liftc = app.add_subcommand("lift", "lift a program to container operations");
  liftc->add_option("files", inputs, "input programs")->required();
  liftc->add_option("--opspecs", cfg.opspecs_path, "operation specification file");
  liftc->add_option("--annotated", cfg.annotated_path,
                    "use an exported annotated CFG instead of the built-in analysis");
  liftc->add_option("-o", out_path, "output file");
  liftc->add_flag("--dump-recipe", cfg.dump_recipe, "print the replacement recipe");
  liftc->add_option("--emit", emit, "output form: program (default) or cfg-json");
  liftc->add_option("--spc-cap", cfg.spc_cap, "abstract states per location");

  auto *ann = app.add_subcommand("annotate", "export the annotated CFG as JSON");
  ann->add_option("file", orig_path, "input program")->required();
  ann->add_option("-o", out_path, "output file");
  ann->add_flag("--verify-soundness", cfg.verify_soundness,
                "spot-check sampled runs against the invariant");
  ann->add_option("--seed", cfg.seed, "RNG seed");
  ann->add_option("--spc-cap", cfg.spc_cap, "abstract states per location");

  auto *chk = app.add_subcommand("check-equiv", "differential equivalence check");
  chk->add_option("original", orig_path, "original program")->required();
  chk->add_option("lifted", lifted_path, "lifted program")->required();
  chk->add_option("--trials", cfg.trials, "number of random schedules");
  chk->add_option("--max-len", cfg.max_len, "maximum schedule length");
  chk->add_option("--seed", cfg.seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (liftc->parsed()) {
      cfg.emit_cfg_json = emit == "cfg-json";
      std::vector<std::future<lift::LiftOutcome>> futs;
      std::vector<std::string> sources;
      for (const auto &f : inputs) sources.push_back(slurp(f));
      for (const auto &s : sources)
        futs.push_back(std::async(std::launch::async,
                                  [&cfg, s] { return lift::cmd_lift(cfg, s); }));
      int code = 0;
      for (size_t i = 0; i < futs.size(); ++i) {
        lift::LiftOutcome out = futs[i].get();
        for (const auto &n : out.notes) std::cerr << inputs[i] << ": " << n << "\n";
        if (!out.recipe_json.empty()) std::cerr << out.recipe_json;
        if (inputs.size() > 1) std::cout << "// == " << inputs[i] << " ==\n";
        if (out.code == 0) write_out(inputs.size() > 1 ? "" : out_path, out.output);
        code = std::max(code, out.code);
      }
      return code;
    }
    if (ann->parsed()) {
      lift::AnnotateOutcome out = lift::cmd_annotate(cfg, slurp(orig_path));
      for (const auto &n : out.notes) std::cerr << n << "\n";
      if (out.code == 0) write_out(out_path, out.json + "\n");
      return out.code;
    }
    if (chk->parsed()) {
      lift::EquivReport rep =
          lift::cmd_check_equiv(cfg, slurp(orig_path), slurp(lifted_path));
      for (const auto &f : rep.failures)
        std::cout << "schedule " << f.schedule << ": " << f.verdict << "\n"
                  << f.detail << "\n";
      std::cout << rep.summary() << "\n";
      return rep.failed == 0 ? 0 : 1;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
