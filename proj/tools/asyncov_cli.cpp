// asyncov: estimate, simulate, nufft-check, epps, bench.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "asyncov/bench.hpp"
#include "asyncov/epps.hpp"
#include "asyncov/error.hpp"
#include "asyncov/estimator.hpp"
#include "asyncov/nufft.hpp"
#include "asyncov/simulate.hpp"
#include "asyncov/tickdata.hpp"
#include "cli_support.hpp"

#ifndef ASYNCOV_VERSION
#define ASYNCOV_VERSION "0.0.0"
#endif

using namespace asyncov;
using cli::g17;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }

Basis parse_basis(const std::string& s) {
  if (s == "dirichlet") return Basis::Dirichlet;
  if (s == "fejer") return Basis::Fejer;
  usage("unknown basis '" + s + "'");
}

Kernel parse_kernel(const std::string& s) {
  if (s == "gaussian" || s == "fgg") return Kernel::Gaussian;
  if (s == "kb") return Kernel::KaiserBessel;
  if (s == "es") return Kernel::ExpSemicircle;
  usage("unknown kernel '" + s + "'");
}

Engine parse_engine(const std::string& s, const std::string& kernel, double eps) {
  if (s == "forloop") return Engine::forloop();
  if (s == "vectorised") return Engine::vectorised();
  if (s == "fft") return Engine::fft();
  if (s == "zfft") return Engine::zfft();
  if (s == "nufft") return Engine::nufft(parse_kernel(kernel), eps);
  // "nufft-kb" style labels as written by bench tables.
  if (s.rfind("nufft-", 0) == 0) return Engine::nufft(parse_kernel(s.substr(6)), eps);
  usage("unknown engine '" + s + "'");
}

NMode parse_n_mode(const std::string& s) {
  if (s == "nyquist") return NyquistAuto{};
  if (s.rfind("fixed:", 0) == 0) {
    const double v = cli::parse_number(s.substr(6));
    if (v < 1 || v != std::floor(v)) usage("fixed:N needs an integer N >= 1");
    return FixedN{static_cast<int>(v)};
  }
  if (s.rfind("dt:", 0) == 0) {
    const double v = cli::parse_number(s.substr(3));
    if (!(v > 0.0)) usage("dt:SECONDS needs a positive time-scale");
    return FromDt{v};
  }
  usage("n-mode must be nyquist, fixed:N or dt:SECONDS");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback = 1) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ASYNCOV_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      usage("ASYNCOV_SEED is not an unsigned integer");
    }
  }
  return fallback;
}

void base_meta(cli::Meta& meta, const std::string& command) {
  meta.set("tool", "asyncov");
  meta.set("version", ASYNCOV_VERSION);
  meta.set("command", command);
}

std::string matrix_json(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + g17(m(i, j));
    s += "]";
  }
  return s + "]";
}

std::string matrix_json(const Eigen::MatrixXi& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + std::to_string(m(i, j));
    s += "]";
  }
  return s + "]";
}

template <class M>
void matrix_csv(std::ostream& out, const std::string& label, const std::vector<std::string>& assets, const M& m,
                bool integer = false) {
  out << label;
  for (const auto& a : assets) out << ',' << a;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << assets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << ',' << (integer ? std::to_string(static_cast<long long>(m(i, j))) : g17(static_cast<double>(m(i, j))));
    }
    out << '\n';
  }
}

// Checks the fields cmd_simulate writes; returns the format tag.
std::string validate_sidecar(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(cli::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, "sidecar '" + path + "': " + e.what());
  }
  auto need = [&](const char* key, bool (nlohmann::json::*pred)() const noexcept) {
    if (!j.contains(key) || !(j[key].*pred)()) {
      throw Error(ErrorKind::Parse, std::string("sidecar '") + path + "': missing or mistyped field '" + key + "'");
    }
  };
  need("format", &nlohmann::json::is_string);
  need("rng", &nlohmann::json::is_string);
  need("seed", &nlohmann::json::is_number_unsigned);
  need("n", &nlohmann::json::is_number_integer);
  need("dt", &nlohmann::json::is_number);
  need("assets", &nlohmann::json::is_array);
  need("mu", &nlohmann::json::is_array);
  need("sigma", &nlohmann::json::is_array);
  need("s0", &nlohmann::json::is_array);
  need("asynchrony", &nlohmann::json::is_string);
  need("integrated_truth", &nlohmann::json::is_array);
  const auto tag = j["format"].get<std::string>();
  if (tag != "asyncov-sim/1") throw Error(ErrorKind::Parse, "sidecar '" + path + "': unsupported format '" + tag + "'");
  return tag;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string input;
  std::string layout = "auto";
  std::string basis = "dirichlet";
  std::string engine = "nufft";
  std::string kernel = "gaussian";
  double eps = 1e-12;
  std::string n_mode = "nyquist";
  bool pairwise = false;
  std::string out = "-";
  std::string format = "csv";
  std::string sidecar;
  std::string diagnostics;
  int threads = 1;
};

TableLayout parse_layout(const std::string& s) {
  if (s == "auto") return TableLayout::Auto;
  if (s == "long") return TableLayout::Long;
  if (s == "wide") return TableLayout::Wide;
  usage("layout must be auto, long or wide");
}

int cmd_estimate(const EstimateArgs& a) {
  if (a.format != "csv" && a.format != "json") usage("format must be csv or json");
  (void)parse_basis(a.basis);
  (void)parse_engine(a.engine, a.kernel, a.eps);
  (void)parse_n_mode(a.n_mode);
  const std::string bytes = cli::read_file(a.input);
  std::istringstream in(bytes);
  const auto ingest = ingest_taq(in, parse_layout(a.layout));
  if (!a.diagnostics.empty()) {
    cli::Output d(a.diagnostics);
    d.stream() << ingest.diagnostics.to_json() << '\n';
    d.close();
  }
  std::string sidecar_format;
  if (!a.sidecar.empty()) sidecar_format = validate_sidecar(a.sidecar);

  EstimatorConfig cfg;
  cfg.basis = parse_basis(a.basis);
  cfg.engine = parse_engine(a.engine, a.kernel, a.eps);
  cfg.n_mode = parse_n_mode(a.n_mode);
  cfg.pairwise_n = a.pairwise;
  cfg.threads = a.threads;
  const auto est = covariance_matrix(std::span<const EventSeries>(ingest.series), cfg);

  cli::Meta meta;
  base_meta(meta, "estimate");
  meta.set("input", std::filesystem::path(a.input).filename().string());
  meta.set("input_hash", cli::fnv1a_hex(bytes));
  meta.set("layout", a.layout);
  meta.set("basis", std::string(to_string(cfg.basis)));
  meta.set("engine", std::string(to_string(cfg.engine.kind)));
  if (cfg.engine.kind == EngineKind::NUFFT) {
    meta.set("kernel", std::string(to_string(cfg.engine.kernel)));
    meta.set("eps", cfg.engine.epsilon);
  }
  meta.set("n-mode", a.n_mode);
  meta.set("pairwise-n", a.pairwise);
  meta.set("N", est.n_global);
  meta.set("zfft_asynchronous_input", est.zfft_asynchronous_input);
  meta.set("psd_warning", est.psd_warning);
  if (!sidecar_format.empty()) meta.set("sidecar_format", sidecar_format);

  cli::Output out(a.out);
  auto& os = out.stream();
  if (a.format == "json") {
    os << "{\n  \"assets\": [";
    for (std::size_t i = 0; i < est.assets.size(); ++i) os << (i ? ", " : "") << cli::json_string(est.assets[i]);
    os << "],\n  \"sigma\": " << matrix_json(est.sigma) << ",\n  \"corr\": " << matrix_json(est.corr)
       << ",\n  \"n_used\": " << matrix_json(est.n_used) << ",\n  \"meta\": {";
    bool first = true;
    for (const auto& [k, v] : meta.items()) {
      os << (first ? "\n    " : ",\n    ") << cli::json_string(k) << ": ";
      const bool literal = v == "true" || v == "false" || k == "N" || k == "eps";
      os << (literal ? v : cli::json_string(v));
      first = false;
    }
    os << "\n  }\n}\n";
  } else if (a.format == "csv") {
    meta.write_comment_block(os);
    matrix_csv(os, "sigma", est.assets, est.sigma);
    os << '\n';
    matrix_csv(os, "corr", est.assets, est.corr);
    os << '\n';
    matrix_csv(os, "n_used", est.assets, est.n_used, true);
  } else {
    usage("format must be csv or json");
  }
  out.close();
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  int n = 10000;
  int assets = 2;
  std::string cov;
  bool random_cov = false;
  double variance = 0.1;
  std::string mu = "0.01";
  std::string s0 = "100";
  double dt = 1.0 / 86400.0;
  std::optional<std::uint64_t> seed;
  std::string asynchrony = "none";
  std::string layout = "long";
  std::string out = "-";
  std::string sidecar;
};

Eigen::VectorXd broadcast(const std::vector<double>& v, int D, const char* what) {
  if (v.size() == 1) return Eigen::VectorXd::Constant(D, v[0]);
  if (static_cast<int>(v.size()) != D) usage(std::string(what) + " needs 1 or " + std::to_string(D) + " values");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), D);
}

void write_events(std::ostream& os, const std::vector<EventSeries>& events, const std::string& layout) {
  if (layout == "long") {
    os << "asset,time,price,volume\n";
    for (const auto& s : events) {
      for (std::size_t h = 0; h < s.size(); ++h) {
        os << s.asset_id() << ',' << g17(s.times()[h]) << ',' << g17(s.prices()[h]) << ",1\n";
      }
    }
    return;
  }
  std::vector<double> times;
  for (const auto& s : events) times.insert(times.end(), s.times().begin(), s.times().end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  os << "time";
  for (const auto& s : events) os << ',' << s.asset_id();
  os << '\n';
  std::vector<std::size_t> pos(events.size(), 0);
  for (double t : times) {
    os << g17(t);
    for (std::size_t i = 0; i < events.size(); ++i) {
      os << ',';
      const auto& s = events[i];
      if (pos[i] < s.size() && s.times()[pos[i]] == t) os << g17(s.prices()[pos[i]++]);
    }
    os << '\n';
  }
}

int cmd_simulate(const SimulateArgs& a) {
  if (a.layout != "long" && a.layout != "wide") usage("layout must be long or wide");
  const std::uint64_t seed = resolve_seed(a.seed);
  GbmSpec spec;
  spec.n = a.n;
  spec.seed = seed;
  spec.dt = a.dt;
  if (!a.cov.empty() && a.random_cov) usage("--cov and --random-cov are exclusive");
  if (!a.cov.empty()) {
    spec.sigma = cli::parse_matrix(a.cov);
  } else if (a.random_cov) {
    spec.sigma = random_covariance(a.assets, seed, a.variance);
  } else if (a.assets == 2) {
    spec.sigma = GbmSpec::bivariate_daily(a.n, seed).sigma;
  } else {
    spec.sigma = a.variance * Eigen::MatrixXd::Identity(a.assets, a.assets);
  }
  const int D = static_cast<int>(spec.sigma.rows());
  spec.mu = broadcast(cli::parse_list(a.mu), D, "--mu");
  spec.s0 = broadcast(cli::parse_list(a.s0), D, "--s0");

  const auto paths = gbm_paths(spec);
  std::vector<EventSeries> events;
  const std::string& scheme = a.asynchrony;
  if (scheme == "none") {
    events = synchronous(paths);
  } else if (scheme == "regular") {
    events = regular_nonsynchronous(paths);
  } else if (scheme.rfind("missing:", 0) == 0) {
    events = sample_missing(paths, cli::parse_number(scheme.substr(8)), seed);
  } else if (scheme.rfind("arrivals:", 0) == 0) {
    const Eigen::VectorXd lambda = broadcast(cli::parse_list(scheme.substr(9)), D, "arrivals");
    events = sample_arrivals(paths, std::vector<double>(lambda.data(), lambda.data() + D), seed);
  } else {
    usage("asynchrony must be none, missing:FRAC, arrivals:L1,L2,... or regular");
  }

  cli::Meta meta;
  base_meta(meta, "simulate");
  meta.set("rng", std::string(kRngName));
  meta.set("seed", std::to_string(seed));
  meta.set("n", a.n);
  meta.set("dt", a.dt);
  meta.set("asynchrony", scheme);
  meta.set("layout", a.layout);

  cli::Output out(a.out);
  meta.write_comment_block(out.stream());
  write_events(out.stream(), events, a.layout);
  out.close();

  std::string sidecar = a.sidecar;
  if (sidecar.empty() && a.out != "-" && !a.out.empty()) sidecar = a.out + ".json";
  if (!sidecar.empty()) {
    nlohmann::ordered_json j;
    j["format"] = "asyncov-sim/1";
    j["rng"] = std::string(kRngName);
    j["seed"] = seed;
    j["n"] = a.n;
    j["dt"] = a.dt;
    j["asynchrony"] = scheme;
    j["layout"] = a.layout;
    j["assets"] = paths.asset_ids;
    j["mu"] = std::vector<double>(spec.mu.data(), spec.mu.data() + D);
    j["s0"] = std::vector<double>(spec.s0.data(), spec.s0.data() + D);
    auto rows = [](const Eigen::MatrixXd& m) {
      std::vector<std::vector<double>> r(static_cast<std::size_t>(m.rows()));
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) r[static_cast<std::size_t>(i)].push_back(m(i, k));
      }
      return r;
    };
    j["sigma"] = rows(spec.sigma);
    j["integrated_truth"] = rows(integrated_truth(spec));
    std::vector<std::size_t> counts;
    for (const auto& s : events) counts.push_back(s.size());
    j["observations"] = counts;
    cli::Output side(sidecar);
    side.stream() << j.dump(2) << '\n';
    side.close();
  }
  return kExitOk;
}

// ------------------------------------------------------------- nufft-check

struct NufftCheckArgs {
  std::string eps = "1e-4,1e-6,1e-8,1e-10,1e-12,1e-14";
  std::string kernels = "gaussian,kb,es";
  int n = 1000;
  int modes = 166;
  int trials = 3;
  int msp_offset = 0;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
};

int cmd_nufft_check(const NufftCheckArgs& a) {
  const auto eps_list = cli::parse_list(a.eps);
  std::vector<Kernel> kernels;
  std::stringstream ks(a.kernels);
  for (std::string k; std::getline(ks, k, ',');) kernels.push_back(parse_kernel(k));
  if (a.n < 1 || a.modes < 1 || a.trials < 1) usage("--n, --modes and --trials must be positive");
  // Validate every tolerance before any work so a bad value fails fast.
  for (double e : eps_list) (void)spreading_half_width(Kernel::Gaussian, e);
  const std::uint64_t seed = resolve_seed(a.seed);

  cli::Meta meta;
  base_meta(meta, "nufft-check");
  meta.set("eps", a.eps);
  meta.set("kernels", a.kernels);
  meta.set("n", a.n);
  meta.set("modes", a.modes);
  meta.set("trials", a.trials);
  meta.set("msp-offset", a.msp_offset);
  meta.set("seed", std::to_string(seed));

  cli::Output out(a.out);
  auto& os = out.stream();
  meta.write_comment_block(os);
  os << "kernel,eps,half_width,trial,rel_l2_error,status\n";
  bool all_pass = true;
  for (int trial = 0; trial < a.trials; ++trial) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> normal(0.0, 0.01);
    ReturnSeries s;
    s.asset_id = "trial" + std::to_string(trial);
    for (int h = 0; h < a.n; ++h) s.times.push_back(unif(rng));
    std::sort(s.times.begin(), s.times.end());
    for (int h = 0; h < a.n; ++h) s.deltas.push_back(normal(rng));
    s.last_time = s.times.back();
    const auto exact = coeffs_forloop(s, a.modes);
    for (Kernel k : kernels) {
      for (double e : eps_list) {
        const auto plan = make_plan(k, 2 * a.modes + 1, e, a.msp_offset);
        const double err = relative_l2_error(nufft_type1(plan, s), exact);
        const bool pass = err <= e;
        all_pass = all_pass && pass;
        os << to_string(k) << ',' << g17(e) << ',' << plan.half_width << ',' << trial << ',' << g17(err) << ','
           << (pass ? "PASS" : "FAIL") << '\n';
      }
    }
  }
  out.close();
  if (!all_pass) throw Error(ErrorKind::Tolerance, "at least one cell exceeded its requested tolerance");
  return kExitOk;
}

// -------------------------------------------------------------------- epps

struct EppsArgs {
  std::string input;
  std::string layout = "auto";
  bool simulate = false;
  std::string dt = "1:100:1";
  std::string basis = "dirichlet";
  std::string engine = "nufft";
  std::string kernel = "gaussian";
  double eps = 1e-12;
  int bootstrap = 0;
  double confidence = -1.0;
  std::optional<double> theory_c;
  std::optional<double> theory_lambda;
  // simulation
  int reps = 100;
  double horizon = 28800;
  std::string lambda = "1/5";
  double rho = 0.35;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out = "-";
};

int cmd_epps(const EppsArgs& a) {
  const auto dts = cli::parse_range(a.dt);
  EstimatorConfig cfg;
  cfg.basis = parse_basis(a.basis);
  cfg.engine = parse_engine(a.engine, a.kernel, a.eps);
  cfg.threads = a.threads;

  cli::Meta meta;
  base_meta(meta, "epps");
  meta.set("dt", a.dt);
  meta.set("basis", a.basis);
  meta.set("engine", engine_label(cfg.engine));
  if (cfg.engine.kind == EngineKind::NUFFT) meta.set("eps", a.eps);

  std::vector<EppsCurve> curves;
  std::vector<double> rates;  // per-asset intensity for the theory column
  if (a.simulate) {
    if (!a.input.empty()) usage("--simulate takes no input file");
    const std::uint64_t seed = resolve_seed(a.seed);
    EppsSimulation sim;
    sim.gbm = GbmSpec::bivariate_daily(static_cast<int>(a.horizon) + 1, seed);
    const double c = a.rho * std::sqrt(0.1 * 0.2);
    sim.gbm.sigma << 0.1, c, c, 0.2;
    const auto lam = cli::parse_list(a.lambda);
    sim.lambda = lam.size() == 1 ? std::vector<double>{lam[0], lam[0]} : lam;
    if (sim.lambda.size() != 2) usage("--lambda needs one or two rates");
    sim.replications = a.reps;
    sim.confidence = a.confidence > 0 ? a.confidence : 0.68;
    curves = epps_simulated(sim, dts, cfg);
    rates = sim.lambda;
    meta.set("mode", "simulate");
    meta.set("rng", std::string(kRngName));
    meta.set("seed", std::to_string(seed));
    meta.set("horizon", a.horizon);
    meta.set("lambda", a.lambda);
    meta.set("rho", a.rho);
    meta.set("reps", a.reps);
    meta.set("confidence", sim.confidence);
  } else {
    if (a.input.empty()) usage("epps needs an input file or --simulate");
    const std::string bytes = cli::read_file(a.input);
    std::istringstream in(bytes);
    const auto series = ingest_taq(in, parse_layout(a.layout)).series;
    double lo = series.front().times().front(), hi = series.front().times().back();
    for (const auto& s : series) {
      lo = std::min(lo, s.times().front());
      hi = std::max(hi, s.times().back());
    }
    for (const auto& s : series) rates.push_back(static_cast<double>(s.size()) / (hi - lo));
    meta.set("mode", "empirical");
    meta.set("input", std::filesystem::path(a.input).filename().string());
    meta.set("input_hash", cli::fnv1a_hex(bytes));
    if (a.bootstrap > 0) {
      const double conf = a.confidence > 0 ? a.confidence : 0.95;
      curves = block_bootstrap(series, dts, cfg, a.bootstrap, conf);
      meta.set("bootstrap_blocks", a.bootstrap);
      meta.set("confidence", conf);
    } else {
      curves = epps_curve(series, dts, cfg);
    }
  }
  if (a.theory_c) meta.set("theory_c", *a.theory_c);

  cli::Output out(a.out);
  auto& os = out.stream();
  meta.write_comment_block(os);
  os << "asset_i,asset_j,dt,n_modes,rho_mean,rho_err,basis,replications";
  if (a.theory_c) os << ",theory_lambda,rho_theory";
  os << '\n';
  std::size_t pair = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t j = i + 1; j < rates.size(); ++j, ++pair) {
      const auto& c = curves[pair];
      // Pairs with unequal intensities take the larger one.
      const double lam = a.theory_lambda.value_or(std::max(rates[i], rates[j]));
      for (std::size_t d = 0; d < c.dt_values.size(); ++d) {
        os << c.asset_i << ',' << c.asset_j << ',' << g17(c.dt_values[d]) << ',' << c.n_modes[d] << ','
           << g17(c.rho_mean[d]) << ',' << g17(c.rho_err[d]) << ',' << to_string(c.basis) << ',' << c.replications;
        if (a.theory_c) os << ',' << g17(lam) << ',' << g17(epps_theoretical(*a.theory_c, lam, c.dt_values[d]));
        os << '\n';
      }
    }
  }
  out.close();
  return kExitOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::string experiment;
  std::string out = "-";
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  bool full_scale = false;
  std::string engines;
  std::string n_values;
  std::string d_values = "2";
  std::string bases = "dirichlet,fejer";
  std::string eps = "1e-12";
  std::string scenarios = "synchronous,missing,arrival";
  std::string n_modes = "1,5,10,25,50";
  double memory_budget_gib = 2.0;
  int threads = 1;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

std::vector<Engine> parse_engines(const std::string& s, double eps = 1e-12) {
  std::vector<Engine> out;
  for (const auto& e : split(s)) out.push_back(parse_engine(e, "gaussian", eps));
  if (out.empty()) usage("no engines given");
  return out;
}

std::vector<Basis> parse_bases(const std::string& s) {
  std::vector<Basis> out;
  for (const auto& b : split(s)) out.push_back(parse_basis(b));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : cli::parse_list(s)) {
    if (v != std::floor(v) || v < 1) usage("expected positive integers, got '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

int cmd_bench(const BenchArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  cli::Meta meta;
  base_meta(meta, "bench");
  meta.set("experiment", a.experiment);
  meta.set("seed", std::to_string(seed));
  meta.set("rng", std::string(kRngName));
  meta.set("full-scale", a.full_scale);
  meta.set("threads", a.threads);

  std::ostringstream table;
  if (a.experiment == "timing") {
    TimingConfig c;
    c.seed = seed;
    if (!a.engines.empty()) c.engines = parse_engines(a.engines);
    c.n_values = !a.n_values.empty() ? parse_ints(a.n_values)
                 : a.full_scale     ? std::vector<int>{1000, 10000, 100000}
                                    : std::vector<int>{1024, 2048, 4096, 8192};
    c.D_values = parse_ints(a.d_values);
    c.bases = parse_bases(a.bases);
    c.reps = a.reps.value_or(10);
    c.memory_budget_bytes = a.memory_budget_gib * 1024.0 * 1024.0 * 1024.0;
    meta.set("reps", c.reps);
    meta.set("memory_budget_gib", a.memory_budget_gib);
    const auto rows = timing_sweep(c);
    table << "engine,basis,n,D,N,reps,seconds,status\n";
    for (const auto& r : rows) {
      table << r.engine << ',' << to_string(r.basis) << ',' << r.n << ',' << r.D << ',' << r.N << ',' << r.reps << ','
            << (r.skipped ? "" : g17(r.seconds)) << ',' << (r.skipped ? "skipped" : "ok") << '\n';
    }
  } else if (a.experiment == "accuracy") {
    AccuracyConfig c;
    c.seed = seed;
    c.threads = a.threads;
    if (!a.engines.empty()) c.engines = parse_engines(a.engines);
    c.epsilons = cli::parse_list(a.eps);
    c.bases = parse_bases(a.bases);
    c.scenarios.clear();
    for (const auto& s : split(a.scenarios)) {
      if (s == "synchronous") c.scenarios.push_back(Scenario::Synchronous);
      else if (s == "missing") c.scenarios.push_back(Scenario::Missing);
      else if (s == "arrival") c.scenarios.push_back(Scenario::Arrival);
      else usage("unknown scenario '" + s + "'");
    }
    c.reps = a.reps.value_or(a.full_scale ? 100 : 20);
    meta.set("reps", c.reps);
    meta.set("eps", a.eps);
    const auto rows = accuracy_sweep(c);
    table << "scenario,basis,engine,eps,mean_abs_diff,max_abs_diff,mean_rho_vectorised,reps\n";
    for (const auto& r : rows) {
      table << to_string(r.scenario) << ',' << to_string(r.basis) << ',' << r.engine << ','
            << (r.epsilon > 0 ? g17(r.epsilon) : "") << ',' << g17(r.mean_abs_diff) << ',' << g17(r.max_abs_diff)
            << ',' << g17(r.mean_rho_reference) << ',' << r.reps << '\n';
    }
  } else if (a.experiment == "mse-bias") {
    MseBiasConfig c;
    c.seed = seed;
    c.threads = a.threads;
    if (!a.engines.empty()) c.engines = parse_engines(a.engines);
    c.N_values = parse_ints(a.n_modes);
    const auto bases = parse_bases(a.bases);
    c.reps = a.reps.value_or(1000);
    meta.set("reps", c.reps);
    table << "engine,basis,N,bias11,se11,mse11,bias12,se12,mse12\n";
    for (Basis b : bases) {
      c.basis = b;
      for (const auto& r : mse_bias(c)) {
        table << r.engine << ',' << to_string(r.basis) << ',' << r.N << ',' << g17(r.bias11) << ',' << g17(r.se11)
              << ',' << g17(r.mse11) << ',' << g17(r.bias12) << ',' << g17(r.se12) << ',' << g17(r.mse12) << '\n';
      }
    }
  } else if (a.experiment == "sensitivity") {
    SensitivityConfig c;
    c.seed = seed;
    c.threads = a.threads;
    if (!a.engines.empty()) c.engines = parse_engines(a.engines);
    c.bases = parse_bases(a.bases);
    c.reps = a.reps.value_or(a.full_scale ? 200 : 50);
    meta.set("reps", c.reps);
    const auto rows = sensitivity(c);
    table << "target,truth,engine,basis,mean_estimate,se\n";
    for (const auto& r : rows) {
      table << r.target << ',' << g17(r.truth) << ',' << r.engine << ',' << to_string(r.basis) << ','
            << g17(r.mean_estimate) << ',' << g17(r.se) << '\n';
    }
    table << "\ntarget,engine,basis,slope,intercept\n";
    for (const auto& e : c.engines) {
      for (Basis b : c.bases) {
        for (const char* t : {"sigma11", "sigma12"}) {
          const auto fit = sensitivity_fit(rows, t, engine_label(e), b);
          table << t << ',' << engine_label(e) << ',' << to_string(b) << ',' << g17(fit.slope) << ','
                << g17(fit.intercept) << '\n';
        }
      }
    }
  } else {
    usage("unknown experiment '" + a.experiment + "' (timing, accuracy, mse-bias, sensitivity)");
  }
  meta.set("config_hash", meta.config_hash());
  meta.set("host", cli::host_descriptor());

  cli::Output out(a.out);
  meta.write_comment_block(out.stream());
  out.stream() << table.str();
  out.close();
  return kExitOk;
}

void report(const std::string& kind, const std::string& message, std::optional<std::size_t> line) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["line"] = line ? nlohmann::json(*line) : nlohmann::json(nullptr);
  std::cerr << j.dump() << '\n';
}

std::vector<std::string> option_names(CLI::App* app) {
  std::vector<std::string> names;
  for (const auto* opt : app->get_options()) {
    for (const auto& n : opt->get_lnames()) names.push_back(n);
  }
  return names;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier covariance estimation for asynchronous event data"};
  app.set_version_flag("--version", ASYNCOV_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; flags override it");
  };

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Covariance and correlation matrices from a tick file");
  e->add_option("input", est.input, "Long or wide CSV")->required();
  e->add_option("--layout", est.layout, "auto|long|wide");
  e->add_option("--basis", est.basis, "dirichlet|fejer");
  e->add_option("--engine", est.engine, "forloop|vectorised|fft|zfft|nufft");
  e->add_option("--kernel", est.kernel, "gaussian|kb|es (nufft only)");
  e->add_option("--eps", est.eps, "NUFFT tolerance");
  e->add_option("--n-mode", est.n_mode, "nyquist|fixed:N|dt:SECONDS");
  e->add_flag("--pairwise-n", est.pairwise, "Per-pair min(N_i, N_j)");
  e->add_option("--out", est.out, "Output path (- for stdout)");
  e->add_option("--format", est.format, "csv|json");
  e->add_option("--sidecar", est.sidecar, "Validate a simulate sidecar JSON");
  e->add_option("--diagnostics", est.diagnostics, "Write ingest diagnostics JSON here");
  e->add_option("--threads", est.threads, "Worker threads");
  add_config(e);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Correlated GBM with an asynchrony scheme");
  s->add_option("--n", sim.n, "Grid points (seconds)");
  s->add_option("--assets", sim.assets, "Number of assets without --cov");
  s->add_option("--cov", sim.cov, "Covariance per unit interval, rows split by ';'");
  s->add_flag("--random-cov", sim.random_cov, "Random positive covariance");
  s->add_option("--variance", sim.variance, "Target variance for --random-cov");
  s->add_option("--mu", sim.mu, "Drift, scalar or list");
  s->add_option("--s0", sim.s0, "Initial price, scalar or list");
  s->add_option("--dt", sim.dt, "Step in units of the interval");
  s->add_option("--seed", sim.seed, "Seed (falls back to ASYNCOV_SEED)");
  s->add_option("--asynchrony", sim.asynchrony, "none|missing:FRAC|arrivals:L1,L2,...|regular");
  s->add_option("--layout", sim.layout, "long|wide");
  s->add_option("--out", sim.out, "CSV path (- for stdout)");
  s->add_option("--sidecar", sim.sidecar, "Spec JSON path (default OUT.json)");
  add_config(s);

  NufftCheckArgs nc;
  auto* c = app.add_subcommand("nufft-check", "NUFFT error against direct summation");
  c->add_option("--eps", nc.eps, "Comma-separated tolerances");
  c->add_option("--kernels", nc.kernels, "Comma-separated kernels");
  c->add_option("--n", nc.n, "Sources per trial");
  c->add_option("--modes", nc.modes, "Mode cutoff N");
  c->add_option("--trials", nc.trials, "Random inputs");
  c->add_option("--msp-offset", nc.msp_offset, "Debug: perturb the spreading half-width");
  c->add_option("--seed", nc.seed, "Seed (falls back to ASYNCOV_SEED)");
  c->add_option("--out", nc.out, "Output path (- for stdout)");
  add_config(c);

  EppsArgs ep;
  auto* p = app.add_subcommand("epps", "Correlation against sampling time-scale");
  p->add_option("input", ep.input, "Tick file (omit with --simulate)");
  p->add_option("--layout", ep.layout, "auto|long|wide");
  p->add_flag("--simulate", ep.simulate, "Replicated Poisson-sampled GBM");
  p->add_option("--dt", ep.dt, "List a,b,c or range start:stop:step (seconds)");
  p->add_option("--basis", ep.basis, "dirichlet|fejer");
  p->add_option("--engine", ep.engine, "Estimator engine");
  p->add_option("--kernel", ep.kernel, "NUFFT kernel");
  p->add_option("--eps", ep.eps, "NUFFT tolerance");
  p->add_option("--bootstrap", ep.bootstrap, "Calendar blocks for the block bootstrap (0 = off)");
  p->add_option("--confidence", ep.confidence, "Error-bar level (default 0.68 simulated, 0.95 bootstrap)");
  p->add_option("--theory-c", ep.theory_c, "Add the Poisson-asynchrony curve with this c");
  p->add_option("--theory-lambda", ep.theory_lambda, "Intensity for the theory curve");
  p->add_option("--reps", ep.reps, "Simulated replications");
  p->add_option("--horizon", ep.horizon, "Simulated span T in seconds");
  p->add_option("--lambda", ep.lambda, "Simulated arrival rates");
  p->add_option("--rho", ep.rho, "Simulated correlation");
  p->add_option("--seed", ep.seed, "Seed (falls back to ASYNCOV_SEED)");
  p->add_option("--threads", ep.threads, "Worker threads");
  p->add_option("--out", ep.out, "Output path (- for stdout)");
  add_config(p);

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "Timing, accuracy, MSE/bias and sensitivity experiments");
  b->add_option("experiment", bn.experiment, "timing|accuracy|mse-bias|sensitivity")->required();
  b->add_option("--out", bn.out, "Output path (- for stdout)");
  b->add_option("--seed", bn.seed, "Seed (falls back to ASYNCOV_SEED)");
  b->add_option("--reps", bn.reps, "Repetitions or replications");
  b->add_flag("--full-scale", bn.full_scale, "Full-size grids and repetition counts");
  b->add_option("--engines", bn.engines, "Comma-separated engines (e.g. forloop,nufft-kb)");
  b->add_option("--n", bn.n_values, "Timing: path lengths");
  b->add_option("--D", bn.d_values, "Timing: asset counts");
  b->add_option("--bases", bn.bases, "Comma-separated bases");
  b->add_option("--eps", bn.eps, "Accuracy: NUFFT tolerances");
  b->add_option("--scenarios", bn.scenarios, "Accuracy: synchronous,missing,arrival");
  b->add_option("--n-modes", bn.n_modes, "MSE/bias: N values");
  b->add_option("--memory-budget-gib", bn.memory_budget_gib, "Timing: vectorised memory budget");
  b->add_option("--threads", bn.threads, "Worker threads");
  add_config(b);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Config values join the command line only where no flag was given.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config" || args[i].rfind("--config=", 0) == 0) {
        const std::string path = args[i] == "--config" ? args[i + 1] : args[i].substr(9);
        CLI::App* target = nullptr;
        for (auto* sub : app.get_subcommands({})) {
          if (std::find(args.begin(), args.end(), sub->get_name()) != args.end()) target = sub;
        }
        if (target == nullptr) throw Error(ErrorKind::Usage, "--config needs a subcommand");
        cli::merge_config(args, path, option_names(target));
        break;
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    std::cout << ASYNCOV_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    report("usage_error", err.what(), std::nullopt);
    return kExitUsage;
  } catch (const Error& err) {
    report(std::string(to_string(err.kind())), err.what(), err.line());
    return kExitUsage;
  }

  try {
    if (*e) return cmd_estimate(est);
    if (*s) return cmd_simulate(sim);
    if (*c) return cmd_nufft_check(nc);
    if (*p) return cmd_epps(ep);
    if (*b) return cmd_bench(bn);
  } catch (const Error& err) {
    report(std::string(to_string(err.kind())), err.what(), err.line());
    return err.kind() == ErrorKind::Usage ? kExitUsage : kExitRuntime;
  } catch (const std::exception& err) {
    report("internal_error", err.what(), std::nullopt);
    return kExitRuntime;
  }
  return kExitUsage;
}
