// Command line front end: scenario verification runs and moment-to-transform
// conversion over JSON files.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "freeprob/freeprob.hpp"

namespace {

using namespace freeprob;

AlgebraPtr parse_algebra(const std::string& spec) {
  // "matrix:2", "diagonal:3", or a path to an algebra-spec JSON file
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::string kind = spec.substr(0, colon);
    int n = std::stoi(spec.substr(colon + 1));
    if (kind == "matrix") return make_matrix_algebra(n);
    if (kind == "diagonal") return make_diagonal_algebra(n);
    throw ValidationError("algebra spec must be matrix:k, diagonal:d or a JSON file");
  }
  return algebra_from_json(load_json_file(spec));
}

void print_report(const Report& rep) {
  std::printf("scenario %-14s order %d seed %llu: %s (max dev %.3e, %.0f ms)\n",
              rep.scenario.c_str(), rep.order, (unsigned long long)rep.seed,
              rep.pass ? "PASS" : "FAIL", rep.max_abs_dev, rep.runtime_ms);
  for (const auto& [k, v] : rep.diagnostics) std::printf("  %-28s %.3e\n", k.c_str(), v);
  if (!rep.error.empty()) std::printf("  error: %s\n", rep.error.c_str());
}

int finish(const Report& rep, const std::string& json_out) {
  print_report(rep);
  if (!json_out.empty()) save_json_file(json_out, rep.to_json());
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator-valued free probability transform verifier"};
  app.require_subcommand(1);

  std::string algebra = "matrix:2";
  int order = 3;
  std::uint64_t seed = 42;
  double tol = 1e-7;
  int trials = 20;
  std::string x_file, y_file, json_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--algebra", algebra, "algebra spec: matrix:k | diagonal:d | file.json");
    sub->add_option("--order", order, "compare order N_cmp")->check(CLI::Range(1, 4));
    sub->add_option("--seed", seed, "instance seed");
    sub->add_option("--tol", tol, "acceptance tolerance");
    sub->add_option("--trials", trials, "trial count");
    sub->add_option("--x", x_file, "moment data JSON for x");
    sub->add_option("--y", y_file, "moment data JSON for y");
    sub->add_option("--json-out", json_out, "write the report JSON here");
  };

  CLI::App* verify_s = app.add_subcommand("verify-s", "twisted multiplicativity of S");
  add_common(verify_s);
  CLI::App* verify_r = app.add_subcommand("verify-r", "additivity of R");
  add_common(verify_r);
  CLI::App* commutative = app.add_subcommand("commutative", "commutative reduction of the twist");
  add_common(commutative);
  CLI::App* counterexample =
      app.add_subcommand("counterexample", "witness that the twist is necessary");
  add_common(counterexample);
  CLI::App* selftest = app.add_subcommand("selftest", "full invariant catalog");
  selftest->add_option("--seed", seed, "suite seed");
  selftest->add_option("--json-out", json_out, "write the report JSON here");

  std::string kind_str = "s", in_file, out_file;
  CLI::App* transform = app.add_subcommand("transform", "moment data -> S or R transform jet");
  transform->add_option("--kind", kind_str, "s | r")->check(CLI::IsMember({"s", "r"}));
  transform->add_option("--input", in_file, "moment data JSON")->required();
  transform->add_option("--output", out_file, "output jet JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    using freeprob::ScenarioConfig;
    auto make_cfg = [&](freeprob::ScenarioKind k) {
      ScenarioConfig cfg;
      cfg.kind = k;
      cfg.alg = parse_algebra(algebra);
      cfg.order = order;
      cfg.seed = seed;
      cfg.tol = tol;
      cfg.trials = trials;
      if (!x_file.empty()) cfg.x_moments = moment_data_from_json(load_json_file(x_file));
      if (!y_file.empty()) cfg.y_moments = moment_data_from_json(load_json_file(y_file));
      return cfg;
    };
    if (verify_s->parsed())
      return finish(run_s_scenario(make_cfg(freeprob::ScenarioKind::verify_s)), json_out);
    if (verify_r->parsed()) {
      auto cfg = make_cfg(freeprob::ScenarioKind::verify_r);
      if (tol == 1e-7 && !verify_r->count("--tol")) cfg.tol = 1e-8;
      return finish(run_r_scenario(cfg), json_out);
    }
    if (commutative->parsed())
      return finish(run_commutative_scenario(make_cfg(freeprob::ScenarioKind::commutative)),
                    json_out);
    if (counterexample->parsed())
      return finish(
          run_counterexample_scenario(make_cfg(freeprob::ScenarioKind::counterexample)),
          json_out);
    if (selftest->parsed()) return finish(freeprob::run_selftest(seed), json_out);
    if (transform->parsed()) {
      MomentData m = moment_data_from_json(load_json_file(in_file));
      TransformResult r = (kind_str == "s") ? s_transform(m) : r_transform(m);
      save_json_file(out_file, transform_result_to_json(r));
      std::printf("wrote %s-transform (degree %d) to %s\n", kind_str.c_str(), r.jet.degree(),
                  out_file.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
