#include "curvlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "curvlab/chain.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/frac_checks.hpp"
#include "curvlab/frac_kernel.hpp"
#include "curvlab/lattice.hpp"
#include "curvlab/relaxation.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/semigroup.hpp"

namespace curvlab::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kCommands = {
    "curvature",      "mlsi",        "evolve",       "relaxation",       "lattice-liyau",
    "lattice-harnack", "frac-kernel", "frac-cly",     "frac-harnack",     "cd-counterexample"};

const std::set<std::string> kCsvCommands = {"evolve", "relaxation", "lattice-liyau", "frac-kernel"};

Chain chain_from_spec(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "complete") return complete_graph(j.at("n").get<int>());
  if (kind == "hypercube") return hypercube_graph(j.at("n").get<int>());
  if (kind == "star") return star_graph(j.at("m").get<int>());
  if (kind == "tensor") return tensor_product(chain_from_spec(j.at("a")), chain_from_spec(j.at("b")));
  if (kind == "file") {
    std::ifstream in(j.at("path").get<std::string>());
    if (!in) throw std::runtime_error("cannot open chain file: " + j.at("path").get<std::string>());
    json cj;
    in >> cj;
    return Chain::from_json(cj);
  }
  if (kind == "inline") return Chain::from_json(j.at("chain"));
  throw std::invalid_argument("unknown chain kind: " + kind);
}

std::vector<double> times_from_spec(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  const double t0 = j.at("t0").get<double>();
  const double t1 = j.at("t1").get<double>();
  const int count = j.at("count").get<int>();
  const std::string spacing = j.value("spacing", "linear");
  if (count < 1 || t1 <= t0) throw std::invalid_argument("bad time grid parameters");
  std::vector<double> out(count);
  if (spacing == "log") {
    if (t0 <= 0.0) throw std::invalid_argument("log spacing needs t0 > 0");
    for (int i = 0; i < count; ++i)
      out[i] = std::exp(std::log(t0) + (std::log(t1) - std::log(t0)) * i / std::max(1, count - 1));
  } else {
    for (int i = 0; i < count; ++i) out[i] = t0 + (t1 - t0) * i / std::max(1, count - 1);
  }
  return out;
}

SearchBudget budget_from_spec(const json& params) {
  SearchBudget b;
  if (params.contains("budget")) {
    const json& jb = params["budget"];
    b.samples = jb.value("samples", b.samples);
    b.descents = jb.value("descents", b.descents);
    b.descent_iters = jb.value("descent_iters", b.descent_iters);
  }
  return b;
}

Eigen::VectorXd lattice_u0_from_spec(const json& j, int M, std::uint64_t seed) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bump") {
    const double amp = j.value("amplitude", 1.0);
    const int width = j.value("width", 4);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(M);
    for (int i = -3 * width; i <= 3 * width; ++i) {
      const int idx = ((M / 2 + i) % M + M) % M;
      u[idx] += amp * std::exp(-0.5 * i * i / (width * width + 0.0));
    }
    return u;
  }
  if (kind == "random") {
    const double amp = j.value("amplitude", 0.5);
    CounterRng rng(seed ^ 0xa11ce);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(M);
    for (int i = 0; i < M; ++i) u[i] += amp * rng.uniform(7, i);
    return u;
  }
  if (kind == "file") {
    std::ifstream in(j.at("path").get<std::string>());
    if (!in) throw std::runtime_error("cannot open u0 file");
    json v;
    in >> v;
    const auto vals = v.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != M) throw std::invalid_argument("u0 length must equal M");
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), M);
  }
  throw std::invalid_argument("unknown u0 kind: " + kind);
}

RelaxationProfile lattice_profile(const LatticeKernel& kern, const json& params,
                                  const std::vector<double>& times, std::uint64_t seed) {
  CdFunction F;
  if (params.at("F").is_string() && params["F"].get<std::string>() == "fit")
    F = fit_cd_function(kern, params.value("fit_samples", 4000), seed);
  else
    F = CdFunction::from_json(params.at("F"));
  const double t_min = *std::min_element(times.begin(), times.end());
  const double t_max = *std::max_element(times.begin(), times.end());
  return solve_relaxation(F, 0.5 * std::max(t_min, 1e-8), 1.25 * t_max, 1e-6);
}

json run_curvature(const json& params, std::uint64_t seed, int& exit_code) {
  const Chain c = chain_from_spec(params.at("chain"));
  const std::string mode = params.at("mode").get<std::string>();
  if (mode == "classical") {
    double d = std::numeric_limits<double>::infinity();
    if (params.contains("d") && !params["d"].is_string()) d = params["d"].get<double>();
    return classical_optimal_kappa(c, d).to_json();
  }
  if (mode == "upsilon") return estimate_upsilon_kappa(c, budget_from_spec(params), seed).to_json();
  if (mode == "verify") {
    const double kappa = params.at("kappa").get<double>();
    CdFunction F;
    const bool has_f = params.contains("F") && !params["F"].is_null();
    if (has_f) F = CdFunction::from_json(params["F"]);
    const CdVerification v =
        verify_cd_upsilon(c, kappa, has_f ? &F : nullptr, budget_from_spec(params), seed);
    if (v.violation_found) exit_code = 2;
    return v.to_json();
  }
  throw std::invalid_argument("unknown curvature mode: " + mode);
}

json run_lattice_liyau(const json& params, std::uint64_t seed, int& exit_code, std::string* csv) {
  const LatticeKernel kern =
      build_lattice_kernel(params.at("beta").get<double>(), params.value("c", 1.0),
                           params.at("J").get<int>(), params.at("M").get<int>());
  const std::vector<double> times = times_from_spec(params.at("times"));
  const RelaxationProfile phi = lattice_profile(kern, params, times, seed);
  const Eigen::VectorXd u0 = lattice_u0_from_spec(params.at("u0"), kern.M, seed);
  const LiYauReport rep = li_yau_check(kern, u0, phi, times);
  if (rep.violations > 0) exit_code = 2;
  if (csv) *csv = rep.to_csv();
  return rep.to_json();
}

json run_lattice_harnack(const json& params, std::uint64_t seed, int& exit_code) {
  const LatticeKernel kern =
      build_lattice_kernel(params.at("beta").get<double>(), params.value("c", 1.0),
                           params.at("J").get<int>(), params.at("M").get<int>());
  const Eigen::VectorXd u0 = lattice_u0_from_spec(params.at("u0"), kern.M, seed);

  std::vector<HarnackPair> pairs;
  std::vector<double> times;
  if (params.at("pairs").is_array()) {
    for (const auto& p : params["pairs"]) {
      pairs.push_back({p.at(0).get<double>(), p.at(1).get<int>(), p.at(2).get<double>(),
                       p.at(3).get<int>()});
      times.push_back(pairs.back().t1);
      times.push_back(pairs.back().t2);
    }
  } else {
    const json& pj = params["pairs"];
    const int count = pj.at("count").get<int>();
    const int zero_count = pj.value("t1_zero_count", 0);
    const double t_max = pj.value("t_max", 10.0);
    CounterRng rng(seed ^ 0x9a1c5);
    for (int i = 0; i < count; ++i) {
      HarnackPair p;
      p.t1 = i < zero_count ? 0.0 : t_max * rng.uniform(1, i);
      p.t2 = p.t1 + 0.05 + (1.05 * t_max - p.t1 - 0.05) * rng.uniform(2, i);
      p.x1 = static_cast<int>(kern.M * rng.uniform(3, i)) % kern.M;
      p.x2 = static_cast<int>(kern.M * rng.uniform(4, i)) % kern.M;
      pairs.push_back(p);
      times.push_back(p.t1);
      times.push_back(p.t2);
    }
  }
  const RelaxationProfile phi = lattice_profile(kern, params, times, seed);
  const HarnackReport rep = harnack_check(kern, u0, phi, pairs);
  if (rep.min_residual < 0.0) exit_code = 2;
  return rep.to_json();
}

json run_frac_harnack(const json& params, int& exit_code) {
  (void)exit_code;
  const double beta = params.at("beta").get<double>();
  const double X = params.value("X", 12.0);
  const double h = params.value("h", 0.02);
  std::vector<FracHarnackPair> pairs;
  std::set<double> tset;
  for (const auto& p : params.at("pairs")) {
    pairs.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(),
                     p.at(3).get<double>()});
    tset.insert(pairs.back().t1);
    tset.insert(pairs.back().t2);
  }
  const std::vector<double> times(tset.begin(), tset.end());
  double c_ly;
  json extra;
  if (params.at("c_ly").is_string()) {
    const ClyReport cly = estimate_cly(beta, times, X, h);
    c_ly = cly.C_LY_hat;
    extra = cly.to_json();
  } else {
    c_ly = params["c_ly"].get<double>();
  }
  const SolutionFamily fam = kernel_solution(beta, times, X, h);
  json out = harnack_fit(beta, c_ly, pairs, fam).to_json();
  out["c_ly"] = c_ly;
  if (!extra.is_null()) out["cly_report"] = extra;
  return out;
}

json run_cd_counterexample(const json& params, std::uint64_t seed, int& exit_code) {
  const double beta = params.at("beta").get<double>();
  const double kappa = params.at("kappa").get<double>();
  const double N = params.at("N").get<double>();
  const double R = params.at("R").get<double>();
  const int x_samples = params.value("x_samples", 7);

  CounterexampleReport rep;
  if (params.at("u").value("kind", "bump") == "search") {
    rep = counterexample_search(beta, kappa, N, R, params["u"].value("iterations", 120), seed);
  } else {
    const json& uj = params.at("u");
    GridFunction u;
    const double X = uj.value("X", 3.0 * R + 6.0);
    u.h = uj.value("h", 0.05);
    u.x0 = -X;
    const int n = static_cast<int>(2 * X / u.h) + 1;
    u.v = Eigen::VectorXd::Zero(n);
    const double amp = uj.value("amplitude", 1.0);
    const double ctr = uj.value("center", 0.0);
    const double w = uj.value("width", 1.0);
    for (int i = 0; i < n; ++i) {
      const double z = (u.x0 + i * u.h - ctr) / w;
      if (std::abs(z) < 1.0) u.v[i] = amp * std::exp(-1.0 / (1.0 - z * z));
    }
    u.tail = TailModel::zero();
    rep = verify_cd_counterexample(beta, u, kappa, N, R, x_samples);
  }
  if (rep.certificate) exit_code = 2;  // verified violation of the CD inequality
  return rep.to_json();
}

}  // namespace

bool command_is_stochastic(const std::string& command) {
  return command == "mlsi" || command == "lattice-liyau" || command == "lattice-harnack" ||
         command == "cd-counterexample" || command == "curvature";
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

std::vector<std::string> validate(const json& config) {
  std::vector<std::string> problems;
  if (!config.is_object()) {
    problems.push_back("config must be a JSON object");
    return problems;
  }
  if (!config.contains("command") || !config["command"].is_string()) {
    problems.push_back("missing string field: command");
    return problems;
  }
  const std::string cmd = config["command"].get<std::string>();
  if (!kCommands.count(cmd)) {
    problems.push_back("unknown command: " + cmd);
    return problems;
  }
  const std::string format = config.value("format", "json");
  if (format != "json" && format != "csv") problems.push_back("format must be json or csv");
  if (format == "csv" && !kCsvCommands.count(cmd))
    problems.push_back("csv output is not available for command " + cmd);
  if (command_is_stochastic(cmd) && !config.contains("seed"))
    problems.push_back("missing seed for stochastic command " + cmd);

  const json params = config.value("params", json::object());
  auto need = [&](const char* field) {
    if (!params.contains(field))
      problems.push_back(std::string("missing params field: ") + field + " (command " + cmd + ")");
  };
  if (cmd == "curvature") {
    need("chain");
    need("mode");
    if (params.value("mode", "") == "verify") need("kappa");
  } else if (cmd == "mlsi") {
    need("chain");
    need("samples");
  } else if (cmd == "evolve") {
    need("chain");
    need("f0");
    need("times");
  } else if (cmd == "relaxation") {
    need("F");
    need("t_min");
    need("t_max");
    need("tol");
  } else if (cmd == "lattice-liyau") {
    need("beta");
    need("J");
    need("M");
    need("times");
    need("u0");
    need("F");
  } else if (cmd == "lattice-harnack") {
    need("beta");
    need("J");
    need("M");
    need("pairs");
    need("u0");
    need("F");
  } else if (cmd == "frac-kernel") {
    need("beta");
    need("t");
    need("X");
    need("h");
  } else if (cmd == "frac-cly") {
    need("beta");
    need("t_list");
    need("X");
    need("h");
  } else if (cmd == "frac-harnack") {
    need("beta");
    need("pairs");
    need("c_ly");
  } else if (cmd == "cd-counterexample") {
    need("beta");
    need("kappa");
    need("N");
    need("R");
    need("u");
  }
  // referenced files must exist
  auto check_file = [&](const json& node) {
    if (node.is_object() && node.value("kind", "") == "file") {
      const std::string p = node.value("path", "");
      std::ifstream in(p);
      if (!in) problems.push_back("referenced input file does not exist: " + p);
    }
  };
  if (params.contains("chain")) check_file(params["chain"]);
  if (params.contains("u0")) check_file(params["u0"]);
  return problems;
}

RunResult run(const json& config) {
  const std::vector<std::string> problems = validate(config);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
  const std::string cmd = config["command"].get<std::string>();
  const std::uint64_t seed = config.value("seed", 0ull);
  const json params = config.value("params", json::object());

  RunResult result;
  result.format = config.value("format", "json");
  int exit_code = 0;
  json body;
  std::string csv;

  if (cmd == "curvature") {
    body = run_curvature(params, seed, exit_code);
  } else if (cmd == "mlsi") {
    const Chain c = chain_from_spec(params.at("chain"));
    body["kappa_mlsi"] = estimate_mlsi(c, params.at("samples").get<int>(), seed);
  } else if (cmd == "evolve") {
    const Chain c = chain_from_spec(params.at("chain"));
    Eigen::VectorXd f0;
    if (params["f0"].is_array()) {
      const auto vals = params["f0"].get<std::vector<double>>();
      f0 = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
    } else if (params["f0"].value("kind", "") == "uniform") {
      f0 = Eigen::VectorXd::Ones(c.n());
    } else {
      throw std::invalid_argument("evolve: f0 must be a vector or {kind: uniform}");
    }
    const SemigroupTrace trace = evolve(c, normalize_density(c, f0), times_from_spec(params.at("times")));
    body = trace_report_json(trace);
    csv = trace_to_csv(trace);
  } else if (cmd == "relaxation") {
    const CdFunction F = CdFunction::from_json(params.at("F"));
    const RelaxationProfile p =
        solve_relaxation(F, params.at("t_min").get<double>(), params.at("t_max").get<double>(),
                         params.at("tol").get<double>(), params.value("grid_points", 400));
    body = p.metadata_json();
    std::ostringstream os;
    os.precision(17);
    os << "t,phi\n";
    for (std::size_t i = 0; i < p.t.size(); ++i) os << p.t[i] << "," << p.phi[i] << "\n";
    csv = os.str();
  } else if (cmd == "lattice-liyau") {
    body = run_lattice_liyau(params, seed, exit_code, &csv);
  } else if (cmd == "lattice-harnack") {
    body = run_lattice_harnack(params, seed, exit_code);
  } else if (cmd == "frac-kernel") {
    const FracKernelGrid g =
        frac_kernel(params.at("beta").get<double>(), params.at("t").get<double>(),
                    params.at("X").get<double>(), params.at("h").get<double>());
    body = g.to_json();
    csv = g.to_csv();
  } else if (cmd == "frac-cly") {
    const std::vector<double> ts = params.at("t_list").get<std::vector<double>>();
    body = estimate_cly(params.at("beta").get<double>(), ts, params.at("X").get<double>(),
                        params.at("h").get<double>())
               .to_json();
  } else if (cmd == "frac-harnack") {
    body = run_frac_harnack(params, exit_code);
  } else if (cmd == "cd-counterexample") {
    body = run_cd_counterexample(params, seed, exit_code);
  }

  result.exit_code = exit_code;
  if (result.format == "csv") {
    result.report = csv;
  } else {
    json report;
    report["command"] = cmd;
    report["config"] = config;  // full resolved config for provenance
    report["exit_code"] = exit_code;
    report["report"] = body;
    report["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();
    result.report = report.dump(2) + "\n";
  }
  return result;
}

}  // namespace curvlab::cli
