// carddl — batch reasoner for description logics with global and local
// cardinality constraints.
//
// Exit codes: 0 positive verdict (SAT / consistent / entailed / model ok),
// 1 negative verdict, 2 resource cap hit, 3 input or usage error.
// JSON verdicts go to stdout, diagnostics to stderr.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "carddl/config.hpp"
#include "carddl/consist.hpp"
#include "carddl/encodings.hpp"
#include "carddl/model_json.hpp"
#include "carddl/normalize.hpp"
#include "carddl/oracle.hpp"
#include "carddl/parser.hpp"
#include "carddl/qfbapa.hpp"
#include "carddl/query.hpp"
#include "carddl/satpp.hpp"
#include "carddl/transforms.hpp"

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct Options {
  carddl::RunConfig cfg;
  std::string modelPath;
  bool dumpDelta = false;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--max-venn", opt.cfg.maxVennRegions, "Venn region cap per solver call")
      ->envname("CARDDL_MAX_VENN");
  cmd->add_option("--max-types", opt.cfg.maxTypes, "type count cap")->envname("CARDDL_MAX_TYPES");
  cmd->add_option("--timeout", opt.cfg.timeLimitSeconds, "time limit in seconds")
      ->envname("CARDDL_TIMEOUT");
  cmd->add_option("--jobs", opt.cfg.jobs, "parallel consistency checks upper bound")
      ->envname("CARDDL_JOBS");
  cmd->add_option("--oracle-size", opt.cfg.oracleMaxSize, "oracle domain bound")
      ->envname("CARDDL_ORACLE_SIZE");
  cmd->add_option("--seed", opt.cfg.seed, "seed echoed into outputs")->envname("CARDDL_SEED");
  cmd->add_flag("--trace", opt.cfg.trace, "emit elimination traces")->envname("CARDDL_TRACE");
}

json delta_json(const carddl::satpp::Reduction& red) {
  auto f = red.delta();
  json j;
  j["vars"] = f.vars;
  j["formula"] = carddl::qfbapa::render(f);
  j["types"] = red.types().size();
  return j;
}

int emit(const json& j, int code) {
  std::cout << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reasoner for DLs with global and local cardinality constraints"};
  app.require_subcommand(1);

  Options opt;
  std::string kbPath, queryPath, modelPath2;

  auto* satCmd = app.add_subcommand("sat", "concept satisfiability (goal: section)");
  satCmd->add_option("file", kbPath)->required();
  satCmd->add_option("--model", opt.modelPath, "write the extracted model JSON here");
  satCmd->add_flag("--dump-delta", opt.dumpDelta, "dump the QFBAPA reduction");
  add_common(satCmd, opt);

  auto* conCmd = app.add_subcommand("consistent", "ABox consistency w.r.t. an ERCBox");
  conCmd->add_option("file", kbPath)->required();
  conCmd->add_option("--model", opt.modelPath);
  add_common(conCmd, opt);

  auto* entCmd = app.add_subcommand("entails", "conjunctive query entailment");
  entCmd->add_option("kb", kbPath)->required();
  entCmd->add_option("query", queryPath)->required();
  entCmd->add_option("--model", opt.modelPath, "write the countermodel here");
  add_common(entCmd, opt);

  auto* chkCmd = app.add_subcommand("check", "audit a model JSON against a KB");
  chkCmd->add_option("model", modelPath2)->required();
  chkCmd->add_option("kb", kbPath)->required();
  add_common(chkCmd, opt);

  auto* oraCmd = app.add_subcommand("oracle", "enumerate models up to --oracle-size");
  oraCmd->add_option("kb", kbPath)->required();
  oraCmd->add_option("--model", opt.modelPath, "write the first model here");
  add_common(oraCmd, opt);

  auto* labCmd = app.add_subcommand("lab", "model transformations (test tooling)");
  std::string labOp, labOut;
  int labK = 2;
  labCmd->add_option("op", labOp, "unravel | loosen | girth")->required();
  labCmd->add_option("model", modelPath2)->required();
  labCmd->add_option("-k,--k", labK, "depth / blocking parameter");
  labCmd->add_option("-o,--out", labOut, "output model path");
  add_common(labCmd, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    opt.cfg.validate();
    if (satCmd->parsed()) {
      auto kb = carddl::parse_kb(slurp(kbPath));
      if (!kb.goal) throw std::runtime_error("sat needs a goal: section");
      if (!kb.conceptAssertions.empty() || !kb.roleAssertions.empty() || kb.erc)
        throw std::runtime_error("sat accepts goal/tbox/ec sections only");
      carddl::ConceptPtr goal = kb.goal;
      // conjoin TBox and ECBox through their constraint encodings
      std::vector<carddl::ConceptPtr> conj{goal};
      for (auto& ci : kb.tbox) {
        auto violating = carddl::mk_and({ci.lhs, carddl::mk_not(ci.rhs)});
        conj.push_back(carddl::mk_constr(carddl::ca_card_eq(
            carddl::pa_card(carddl::mk_concept_set(violating)), carddl::pa_const(0))));
      }
      if (kb.ec) conj.push_back(carddl::ecbox_to_concept(kb.ec));
      carddl::ConceptPtr full = conj.size() == 1 ? conj[0] : carddl::mk_and(conj);
      carddl::Signature sig;
      carddl::collect_names(full, sig);
      std::vector<std::string> roles(sig.roles.begin(), sig.roles.end());
      full = carddl::scc_to_pp(full, roles);
      carddl::satpp::Reduction red(full, opt.cfg);
      if (opt.dumpDelta) std::cerr << delta_json(red).dump(2) << "\n";
      auto r = red.sat();
      json j;
      j["seed"] = opt.cfg.seed;
      switch (r.verdict) {
        case carddl::qfbapa::Verdict::Sat: {
          j["verdict"] = "SAT";
          if (!opt.modelPath.empty()) {
            write_file(opt.modelPath, carddl::model_to_json(*r.model));
            j["model"] = opt.modelPath;
          }
          return emit(j, 0);
        }
        case carddl::qfbapa::Verdict::Unsat:
          j["verdict"] = "UNSAT";
          return emit(j, 1);
        case carddl::qfbapa::Verdict::ResourceExceeded:
          j["verdict"] = "RESOURCE_EXCEEDED";
          return emit(j, 2);
      }
    }
    if (conCmd->parsed()) {
      auto kb = carddl::parse_kb(slurp(kbPath));
      if (kb.conceptAssertions.empty() && kb.roleAssertions.empty())
        throw std::runtime_error("ABox must be non-empty");
      auto r = carddl::consist::consistent(kb, opt.cfg);
      json j;
      j["seed"] = opt.cfg.seed;
      if (opt.cfg.trace) {
        for (auto& t : r.trace) {
          json line;
          line["step"] = t.step;
          line["type"] = t.type;
          line["note"] = t.note;
          std::cerr << line.dump() << "\n";
        }
      }
      switch (r.verdict) {
        case carddl::qfbapa::Verdict::Sat:
          j["verdict"] = "CONSISTENT";
          if (!opt.modelPath.empty()) {
            write_file(opt.modelPath, carddl::model_to_json(*r.model));
            j["model"] = opt.modelPath;
          }
          return emit(j, 0);
        case carddl::qfbapa::Verdict::Unsat:
          j["verdict"] = "INCONSISTENT";
          return emit(j, 1);
        case carddl::qfbapa::Verdict::ResourceExceeded:
          j["verdict"] = "RESOURCE_EXCEEDED";
          return emit(j, 2);
      }
    }
    if (entCmd->parsed()) {
      auto kb = carddl::parse_kb(slurp(kbPath));
      auto q = carddl::parse_query(slurp(queryPath));
      auto r = carddl::query::entails(kb, q, opt.cfg);
      json j;
      j["seed"] = opt.cfg.seed;
      switch (r.verdict) {
        case carddl::query::Entailment::Entailed:
          j["verdict"] = "ENTAILED";
          return emit(j, 0);
        case carddl::query::Entailment::NotEntailed:
          j["verdict"] = "NOT_ENTAILED";
          if (!opt.modelPath.empty()) {
            write_file(opt.modelPath, carddl::model_to_json(*r.countermodel));
            j["model"] = opt.modelPath;
          }
          return emit(j, 1);
        case carddl::query::Entailment::ResourceExceeded:
          j["verdict"] = "RESOURCE_EXCEEDED";
          return emit(j, 2);
      }
    }
    if (chkCmd->parsed()) {
      auto I = carddl::model_from_json(slurp(modelPath2));
      auto kb = carddl::parse_kb(slurp(kbPath));
      auto rep = carddl::satisfies(I, kb);
      json j;
      j["satisfied"] = rep.satisfied;
      j["violations"] = rep.violations;
      return emit(j, rep.satisfied ? 0 : 1);
    }
    if (oraCmd->parsed()) {
      auto kb = carddl::parse_kb(slurp(kbPath));
      long long count = carddl::count_models(kb, opt.cfg.oracleMaxSize, 1000000);
      json j;
      j["models"] = count;
      if (!opt.modelPath.empty()) {
        auto first = carddl::first_model(kb, opt.cfg.oracleMaxSize);
        if (first) {
          write_file(opt.modelPath, carddl::model_to_json(*first));
          j["model"] = opt.modelPath;
        }
      }
      return emit(j, count > 0 ? 0 : 1);
    }
    if (labCmd->parsed()) {
      auto I = carddl::model_from_json(slurp(modelPath2));
      json j;
      if (labOp == "girth") {
        auto g = carddl::girth(I);
        if (g)
          j["girth"] = *g;
        else
          j["girth"] = "infinity";
        return emit(j, 0);
      }
      carddl::Unraveling u =
          labOp == "unravel" ? carddl::unravel(I, labK) : carddl::k_loosening(I, labK);
      if (labOp != "unravel" && labOp != "loosen") throw std::runtime_error("unknown lab op");
      j["elements"] = u.I.size();
      if (!labOut.empty()) {
        write_file(labOut, carddl::model_to_json(u.I));
        j["model"] = labOut;
      }
      return emit(j, 0);
    }
  } catch (const carddl::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
