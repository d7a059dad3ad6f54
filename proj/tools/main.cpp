// Command-line front end: solve the l1 models, check solution uniqueness,
// certify support/sign patterns, and generate test instances. All reports are
// JSON on stdout with sorted keys; matrices and vectors travel as headerless
// CSV. Exit codes: 0 = verdict computed (whatever it is), 2 = input error,
// 3 = numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "l1cert/generator.hpp"
#include "l1cert/io.hpp"
#include "l1cert/linalg.hpp"
#include "l1cert/oracle.hpp"
#include "l1cert/solvers.hpp"
#include "l1cert/uniqueness.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using namespace l1cert;

json to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json to_json(const IndexSet& idx) {
  json arr = json::array();
  for (Index i : idx) arr.push_back(i);
  return arr;
}

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;  // +inf margins serialize as null
}

json to_json(const DualCertificate& cert) {
  return json{{"y", to_json(cert.y)},
              {"eq_residual", cert.eq_residual},
              {"margin", number_or_null(cert.margin)}};
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kUnique: return "unique";
    case Verdict::kNotUnique: return "not_unique";
    case Verdict::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::string witness_name(WitnessKind k) {
  switch (k) {
    case WitnessKind::kNullDirection: return "null_direction";
    case WitnessKind::kSecondPoint: return "second_point";
    case WitnessKind::kNone: break;
  }
  return "none";
}

std::string status_name(UniquenessCondition::Status s) {
  switch (s) {
    case UniquenessCondition::Status::kHolds: return "holds";
    case UniquenessCondition::Status::kFails: return "fails";
    case UniquenessCondition::Status::kBorderline: return "borderline";
  }
  return "fails";
}

Model parse_model(const std::string& name) {
  if (name == "bp") return Model::kBasisPursuit;
  if (name == "lasso") return Model::kPenalizedLS;
  if (name == "res-con") return Model::kResidualConstrained;
  if (name == "l1-con") return Model::kL1Constrained;
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::string model_name(Model m) {
  switch (m) {
    case Model::kBasisPursuit: return "bp";
    case Model::kPenalizedLS: return "lasso";
    case Model::kResidualConstrained: return "res-con";
    case Model::kL1Constrained: return "l1-con";
  }
  return "bp";
}

Engine parse_engine(const std::string& name) {
  if (name == "lp") return Engine::kLP;
  if (name == "barrier") return Engine::kBarrier;
  if (name == "admm") return Engine::kADMM;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

json instance_digest(Model model, const Matrix& a, std::optional<double> param) {
  json digest{{"m", a.rows()}, {"n", a.cols()}, {"model", model_name(model)}};
  digest["param"] = param.has_value() ? json(*param) : json(nullptr);
  return digest;
}

void require_dims(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) {
    std::ostringstream msg;
    msg << "dimension mismatch: A has " << a.rows() << " rows but b has " << b.size()
        << " entries";
    throw std::invalid_argument(msg.str());
  }
}

struct CmdArgs {
  std::string a_path, b_path, x_path, out_dir;
  std::string model = "bp";
  std::string engine = "lp";
  std::string ensemble = "gaussian";
  double lambda = 0.0;
  double param = 0.0;
  double tol = 1e-10;
  double delta = 0.1;
  bool with_oracle = false;
  bool nonunique = false;
  long long m = 0, n = 0, k = 0;
  unsigned long long seed = 0;
};

json run_solve(const CmdArgs& args, bool lambda_given) {
  const Matrix a = read_matrix_csv(args.a_path);
  const Vector b = read_vector_csv(args.b_path);
  require_dims(a, b);
  const Model model = parse_model(args.model);
  json report{{"command", "solve"}};
  if (model == Model::kBasisPursuit) {
    report["instance"] = instance_digest(model, a, std::nullopt);
    const BPSolution sol = solve_bp(a, b);
    report["x"] = to_json(sol.x);
    report["y"] = to_json(sol.y);
    report["objective"] = sol.objective;
    report["duality_gap"] = std::abs(sol.objective - b.dot(sol.y));
    report["iterations"] = nullptr;
  } else if (model == Model::kPenalizedLS) {
    if (!lambda_given) throw std::invalid_argument("solve --model lasso requires --lambda");
    report["instance"] = instance_digest(model, a, args.lambda);
    LassoOptions opts;
    opts.tol = args.tol;
    const LassoResult sol = solve_lasso_full(a, b, args.lambda, opts);
    report["x"] = to_json(sol.x);
    report["y"] = nullptr;
    report["objective"] = sol.objectives.back();
    report["duality_gap"] = nullptr;
    report["iterations"] = sol.iterations;
  } else {
    throw std::invalid_argument("solve supports --model bp or lasso");
  }
  return report;
}

json run_check(const CmdArgs& args, bool param_given) {
  const Matrix a = read_matrix_csv(args.a_path);
  const Vector b = read_vector_csv(args.b_path);
  const Vector x = read_vector_csv(args.x_path);
  require_dims(a, b);
  if (x.size() != a.cols()) {
    throw std::invalid_argument("dimension mismatch: x length does not match A columns");
  }
  const Model model = parse_model(args.model);
  std::optional<double> param;
  if (model != Model::kBasisPursuit) {
    if (!param_given) throw std::invalid_argument("this model requires --param");
    param = args.param;
  }
  const ProblemInstance inst = make_instance(model, a, b, param);
  if (!inst.full_row_rank) {
    std::cerr << "warning: A does not have full row rank\n";
  }
  const Engine engine = parse_engine(args.engine);
  const UniquenessVerdict verdict = verify_model(inst, x, engine);

  json report{{"command", "check"}, {"instance", instance_digest(model, a, param)}};
  report["verdict"] = verdict_name(verdict.status);
  report["reason"] = verdict.reason;
  report["eps_star"] = number_or_null(verdict.eps_star);
  report["support"] = to_json(verdict.pattern.support);
  json signs = json::array();
  for (int s : verdict.pattern.signs) signs.push_back(s);
  report["signs"] = signs;
  report["certificate"] = verdict.certificate ? to_json(*verdict.certificate) : json(nullptr);
  report["witness"] =
      verdict.witness
          ? json{{"kind", witness_name(verdict.witness_kind)}, {"vector", to_json(*verdict.witness)}}
          : json(nullptr);

  if (model == Model::kPenalizedLS) {
    const EquicorrelationSet eq = equicorrelation(a, b, *param, x);
    json values = json::array();
    for (double v : eq.values) values.push_back(v);
    report["equicorrelation"] = json{{"indices", to_json(eq.j)}, {"values", values}};
  } else {
    report["equicorrelation"] = nullptr;
  }

  const ReducedCondition c2 = check_reduced_condition(inst, x, engine);
  if (c2.applicable) {
    report["active_set"] = json{{"indices", to_json(c2.active_set.p)},
                                {"kind", model_name(c2.active_set.kind)},
                                {"multiplier", c2.active_set.multiplier},
                                {"reduced_check", status_name(c2.status)}};
  } else {
    report["active_set"] = nullptr;
  }

  if (args.with_oracle && verdict.status != Verdict::kIndeterminate) {
    const bool unique = oracle_unique(inst, x);
    report["oracle"] = json{{"unique", unique}};
    report["agreement"] = unique == (verdict.status == Verdict::kUnique);
  } else {
    report["oracle"] = nullptr;
    report["agreement"] = nullptr;
  }
  return report;
}

std::vector<long long> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse " + what + " entry '" + cell + "'");
    }
  }
  return out;
}

json run_certify(const CmdArgs& args, const std::string& support_text,
                 const std::string& signs_text) {
  const Matrix a = read_matrix_csv(args.a_path);
  IndexSet support;
  for (long long v : parse_int_list(support_text, "--support")) {
    support.push_back(static_cast<Index>(v));
  }
  std::vector<int> signs;
  for (long long v : parse_int_list(signs_text, "--signs")) {
    if (v != 1 && v != -1) throw std::invalid_argument("--signs entries must be +1 or -1");
    signs.push_back(static_cast<int>(v));
  }
  const SupportPattern sp = make_pattern(std::move(support), std::move(signs));
  if (sp.size() > 0 && sp.support.back() >= a.cols()) {
    throw std::invalid_argument("--support index out of range");
  }
  const Engine engine = parse_engine(args.engine);

  json report{{"command", "certify"},
              {"instance", instance_digest(Model::kBasisPursuit, a, std::nullopt)},
              {"engine", args.engine}};
  const Matrix a_sup = column_submatrix(a, sp.support);
  report["rank_ok"] = numerical_rank(a_sup) == sp.size();

  if (engine == Engine::kLP) {
    const MaxMarginResult mm = certificate_lp(a, sp);
    report["status"] = mm.equality_consistent ? "ok" : "no_equality_solution";
    report["equality_consistent"] = mm.equality_consistent;
    report["eps_star"] = mm.equality_consistent ? number_or_null(mm.eps_star) : json(nullptr);
    report["certificate"] =
        mm.equality_consistent ? to_json(evaluate_certificate(a, sp, mm.y)) : json(nullptr);
    report["iterations"] = nullptr;
  } else {
    // The sign equalities decide consistency regardless of engine.
    const bool consistent =
        sp.size() == 0 || least_norm_solution(a_sup.transpose(), sign_vector(sp)).has_value();
    const EngineCertificate eng =
        engine == Engine::kBarrier ? certificate_barrier(a, sp) : certificate_admm(a, sp);
    const bool ok = eng.status == CertEngineStatus::kConverged;
    report["status"] = !consistent ? "no_equality_solution"
                       : ok        ? "ok"
                       : eng.status == CertEngineStatus::kInfeasible ? "infeasible"
                                                                     : "diverged";
    report["equality_consistent"] = consistent;
    report["eps_star"] = ok ? number_or_null(eng.certificate.margin) : json(nullptr);
    report["certificate"] = ok ? to_json(eng.certificate) : json(nullptr);
    report["iterations"] = eng.iterations;
  }
  return report;
}

json run_generate(const CmdArgs& args) {
  GeneratorSpec spec;
  spec.m = static_cast<Index>(args.m);
  spec.n = static_cast<Index>(args.n);
  spec.k = static_cast<Index>(args.k);
  spec.delta = args.delta;
  spec.seed = args.seed;
  if (const char* env = std::getenv("L1CERT_SEED")) {
    spec.seed = std::strtoull(env, nullptr, 10);
  }
  if (args.ensemble == "gaussian") {
    spec.ensemble = Ensemble::kGaussian;
  } else if (args.ensemble == "partial-identity") {
    spec.ensemble = Ensemble::kPartialIdentity;
  } else {
    throw std::invalid_argument("unknown ensemble '" + args.ensemble + "'");
  }

  const GeneratedInstance inst =
      args.nonunique ? generate_nonunique(spec) : generate_unique(spec);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  write_matrix_csv((out / "A.csv").string(), inst.a);
  write_vector_csv((out / "b.csv").string(), inst.b);
  write_vector_csv((out / "xstar.csv").string(), inst.x_star);

  const SupportPattern sp = pattern_of(inst.x_star);
  const UniquenessCondition cond = check_uniqueness_condition(inst.a, sp);
  ProblemInstance bp;
  bp.model = Model::kBasisPursuit;
  bp.a = inst.a;
  bp.b = inst.b;
  const bool oracle = oracle_unique(bp, inst.x_star);

  json validation{{"uniqueness_condition", status_name(cond.status)},
                  {"eps_star", number_or_null(cond.eps_star)},
                  {"certificate_margin", number_or_null(inst.certificate.margin)},
                  {"certificate_eq_residual", inst.certificate.eq_residual},
                  {"oracle_unique", oracle}};
  json meta{{"m", args.m},
            {"n", args.n},
            {"k", args.k},
            {"delta", args.delta},
            {"seed", spec.seed},
            {"ensemble", args.ensemble},
            {"nonunique", args.nonunique},
            {"model", "bp"},
            {"validation", validation}};
  {
    std::ofstream js((out / "instance.json").string());
    if (!js) throw IOError("cannot write " + (out / "instance.json").string());
    js << meta.dump(2) << '\n';
  }

  json report = meta;
  report["command"] = "generate";
  report["files"] = json{{"A", (out / "A.csv").string()},
                         {"b", (out / "b.csv").string()},
                         {"xstar", (out / "xstar.csv").string()},
                         {"instance", (out / "instance.json").string()}};
  report["redraws"] = inst.redraws;
  report["pocs_iterations"] = inst.pocs_iterations;
  return report;
}

int emit_error(int code, const std::string& kind, const std::string& message) {
  json err{{"error", {{"code", kind}, {"message", message}}}};
  std::cout << err.dump(2) << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1cert: solution-uniqueness certification for l1 minimization"};
  app.require_subcommand(1);
  bool timings = false;
  app.add_flag("--timings", timings, "include wall-clock timings in the report");

  CmdArgs args;
  bool lambda_given = false, param_given = false;
  std::string support_text, signs_text;

  CLI::App* solve = app.add_subcommand("solve", "solve a bp or lasso instance");
  solve->add_option("--model", args.model, "bp | lasso")->required();
  solve->add_option("--A", args.a_path, "matrix CSV")->required();
  solve->add_option("--b", args.b_path, "vector CSV")->required();
  solve->add_option("--lambda", args.lambda)->each([&](const std::string&) { lambda_given = true; });
  solve->add_option("--tol", args.tol, "solver tolerance");

  CLI::App* check = app.add_subcommand("check", "decide uniqueness of a given point");
  check->add_option("--model", args.model, "bp | lasso | res-con | l1-con")->required();
  check->add_option("--A", args.a_path)->required();
  check->add_option("--b", args.b_path)->required();
  check->add_option("--param", args.param)->each([&](const std::string&) { param_given = true; });
  check->add_option("--x", args.x_path, "candidate point CSV")->required();
  check->add_option("--engine", args.engine, "lp | barrier | admm");
  check->add_flag("--with-oracle", args.with_oracle, "add the brute-force verdict");

  CLI::App* certify = app.add_subcommand("certify", "max-margin certificate for a pattern");
  certify->add_option("--A", args.a_path)->required();
  certify->add_option("--support", support_text, "comma list of 0-based indices")->required();
  certify->add_option("--signs", signs_text, "comma list of +1/-1")->required();
  certify->add_option("--engine", args.engine, "lp | barrier | admm");

  CLI::App* generate = app.add_subcommand("generate", "write a validated test instance");
  generate->add_option("--m", args.m)->required();
  generate->add_option("--n", args.n)->required();
  generate->add_option("--k", args.k)->required();
  generate->add_option("--delta", args.delta, "margin target in (0,1)");
  generate->add_option("--seed", args.seed, "overridden by L1CERT_SEED when set");
  generate->add_option("--out", args.out_dir, "output directory")->required();
  generate->add_option("--ensemble", args.ensemble, "gaussian | partial-identity");
  generate->add_flag("--nonunique", args.nonunique, "plant an exact degeneracy instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error(2, "input_error", e.what());
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    json report;
    if (solve->parsed()) {
      report = run_solve(args, lambda_given);
    } else if (check->parsed()) {
      report = run_check(args, param_given);
    } else if (certify->parsed()) {
      report = run_certify(args, support_text, signs_text);
    } else {
      report = run_generate(args);
    }
    if (timings) {
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
      report["timing_ms"] = ms;
    }
    std::cout << report.dump(2) << std::endl;
    return 0;
  } catch (const l1cert::IOError& e) {
    return emit_error(2, "input_error", e.what());
  } catch (const l1cert::InfeasibleSystem& e) {
    return emit_error(2, "infeasible", e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error(2, "input_error", e.what());
  } catch (const l1cert::GenerationFailed& e) {
    return emit_error(3, "generation_failed", e.what());
  } catch (const l1cert::LassoDidNotConverge& e) {
    return emit_error(3, "did_not_converge", e.what());
  } catch (const l1cert::NumericalError& e) {
    return emit_error(3, "numerical_error", e.what());
  } catch (const std::exception& e) {
    return emit_error(3, "numerical_error", e.what());
  }
}
