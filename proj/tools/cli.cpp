#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vortexlab/energy.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/io.hpp"
#include "vortexlab/kernels.hpp"
#include "vortexlab/parallel.hpp"

namespace vortexlab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const char* const kSubcommands[] = {"robin", "steady", "sweep", "evolve", "pointvortex", "stability", "probe"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw CLI::ValidationError(std::string(what) + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
  return out;
}

Vec2 parse_point(const std::string& text, const char* what) {
  const auto v = parse_list(text, what);
  if (v.size() != 2) throw CLI::ValidationError(std::string(what) + ": expected x,y");
  return {v[0], v[1]};
}

// key=value lines, '#' comments. Each becomes "--key=value" ahead of the
// command-line flags, so flags given explicitly win.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot read config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key == "config")
      throw CLI::ValidationError(path + ":" + std::to_string(lineno) + ": invalid key");
    tokens.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return tokens;
}

struct Common {
  std::string config;
  std::string domain = "disk";
  double ellipse_a = 1.5;
  double ellipse_b = 1.0;
  std::string mask;
  int nx = 128;
  double tol = 1e-10;
  int max_iter = 20000;
  std::string solver = "direct";
  std::string out = "out";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string isa = "auto";
};

struct ClassOpts {
  std::string kind = "global";
  std::string center = "0,0";
  double radius = 0.3;
  std::string init;
  double steady_tol = 0.0;
  int steady_max_iter = 500;
  bool escape = true;
};

struct EvolveOpts {
  double horizon = 10.0;
  double dt_max = 0.05;
  double cfl = 0.5;
  int stride = 10;
  std::string interp = "cubic";
  int backtrack = 2;
  bool conserve = true;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value file; flags override it");
  sub->add_option("--domain", c.domain, "disk | ellipse | mask")->check(CLI::IsMember({"disk", "ellipse", "mask"}));
  sub->add_option("--ellipse-a", c.ellipse_a, "ellipse semi-axis along x");
  sub->add_option("--ellipse-b", c.ellipse_b, "ellipse semi-axis along y");
  sub->add_option("--mask", c.mask, "mask file: 'nx ny x0 y0 h' then rows of 0/1");
  sub->add_option("--nx", c.nx, "cells across the bounding box")->check(CLI::Range(16, 1 << 14));
  sub->add_option("--tol", c.tol, "Poisson relative residual tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", c.max_iter, "Poisson iteration limit")->check(CLI::PositiveNumber);
  sub->add_option("--solver", c.solver, "direct | cg")->check(CLI::IsMember({"direct", "cg"}));
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "run seed");
  sub->add_option("--threads", c.threads, "worker threads, 0 = all cores");
  sub->add_option("--isa", c.isa, "auto | scalar | avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
}

void add_class(CLI::App* sub, ClassOpts& c, const std::string& kind, bool with_init) {
  c.kind = kind;
  sub->add_option("--class", c.kind, "global | local")->check(CLI::IsMember({"global", "local"}));
  sub->add_option("--center", c.center, "local class ball center x,y");
  sub->add_option("--radius", c.radius, "local class ball radius")->check(CLI::PositiveNumber);
  if (with_init) sub->add_option("--init", c.init, "initial patch center x,y (default: class center)");
  sub->add_option("--steady-tol", c.steady_tol, "stop when an update changes omega by less than this in L1");
  sub->add_option("--steady-max-iter", c.steady_max_iter, "construction iteration limit")->check(CLI::PositiveNumber);
  sub->add_option("--escape", c.escape, "try whole-cell translations at fixed points");
}

void add_evolve(CLI::App* sub, EvolveOpts& e, double horizon) {
  e.horizon = horizon;
  sub->add_option("--horizon", e.horizon, "final time")->check(CLI::PositiveNumber);
  sub->add_option("--dt-max", e.dt_max, "largest time step")->check(CLI::PositiveNumber);
  sub->add_option("--cfl", e.cfl, "CFL number in (0, 0.5]");
  sub->add_option("--stride", e.stride, "steps between diagnostics")->check(CLI::PositiveNumber);
  sub->add_option("--interp", e.interp, "cubic | bilinear")->check(CLI::IsMember({"cubic", "bilinear"}));
  sub->add_option("--backtrack-iterations", e.backtrack, "midpoint fixed-point sweeps")->check(CLI::PositiveNumber);
  sub->add_option("--conserve", e.conserve, "restore circulation after each step");
}

DomainPtr make_domain(const Common& c, const CLI::App* sub) {
  if (c.domain == "disk") return build_domain(DomainSpec::unit_disk(), c.nx);
  if (c.domain == "ellipse") return build_domain(DomainSpec::ellipse(c.ellipse_a, c.ellipse_b), c.nx);
  if (c.mask.empty()) throw InputError("--domain mask needs --mask FILE");
  MaskBitmap bm = read_mask_file(c.mask);
  const int nx = sub->count("--nx") > 0 ? c.nx : bm.nx;
  return build_domain(DomainSpec::from_mask(std::move(bm)), nx);
}

PoissonSolver make_solver(const Common& c, DomainPtr dom) {
  PoissonOptions po;
  po.tolerance = c.tol;
  po.max_iterations = c.max_iter;
  po.method = c.solver == "cg" ? PoissonOptions::Method::ConjugateGradient : PoissonOptions::Method::Direct;
  return PoissonSolver(std::move(dom), po);
}

ConstraintClass make_class(const ClassOpts& c) {
  if (c.kind == "global") return ConstraintClass::global();
  return ConstraintClass::local(parse_point(c.center, "--center"), c.radius);
}

Vec2 init_center(const ClassOpts& c, const DomainPtr& dom) {
  if (!c.init.empty()) return parse_point(c.init, "--init");
  if (c.kind == "local") return parse_point(c.center, "--center");
  return dom->spec().center();
}

SteadyOptions make_steady(const ClassOpts& c) {
  SteadyOptions so;
  so.tolerance = c.steady_tol;
  so.max_iterations = c.steady_max_iter;
  so.escape_pinning = c.escape;
  return so;
}

SolverConfig make_config(const EvolveOpts& e) {
  if (!(e.cfl > 0.0 && e.cfl <= 0.5)) throw InputError("cfl must lie in (0, 0.5]");
  SolverConfig cfg;
  cfg.dt_max = e.dt_max;
  cfg.cfl = e.cfl;
  cfg.diagnostic_stride = e.stride;
  cfg.interpolation = e.interp == "bilinear" ? kernels::Interpolation::Bilinear : kernels::Interpolation::CubicClamped;
  cfg.backtrack_iterations = e.backtrack;
  cfg.conserve_circulation = e.conserve;
  return cfg;
}

std::string option_value(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  std::string v;
  for (const auto& r : opt->reduced_results()) v += (v.empty() ? "" : ",") + r;
  return v;
}

// Files are collected in memory and written by one writer once the run succeeds.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  std::ostream& file(const std::string& name) {
    auto& s = files_[name];
    if (!s) s = std::make_unique<std::ostringstream>();
    return *s;
  }
  void flush() const {
    fs::create_directories(dir_);
    for (const auto& [name, text] : files_) {
      const fs::path p = dir_ / name;
      fs::create_directories(p.parent_path());
      std::ofstream f(p, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + p.string());
      f << text->str();
      if (!f) throw std::runtime_error("failed writing " + p.string());
    }
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::unique_ptr<std::ostringstream>> files_;
};

std::string dump_name(int step) {
  std::ostringstream os;
  os << "fields/omega_" << std::setw(7) << std::setfill('0') << step << ".field";
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady vortex patch laboratory", "vortexlab"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  ClassOpts cls;
  EvolveOpts evo;
  std::function<void(Outputs&, ordered_json&)> action;

  // robin
  auto* robin_cmd = app.add_subcommand("robin", "Robin function H and its critical points");
  int robin_stride = 1;
  bool robin_analytic = false;
  double grad_tol = 1e-8, deg_tol = kDefaultDegeneracyTol;
  add_common(robin_cmd, common);
  robin_cmd->add_option("--stride", robin_stride, "sample every stride-th cell")->check(CLI::PositiveNumber);
  robin_cmd->add_option("--analytic", robin_analytic, "use the closed form on the disk");
  robin_cmd->add_option("--grad-tol", grad_tol, "critical point gradient tolerance")->check(CLI::PositiveNumber);
  robin_cmd->add_option("--degeneracy-tol", deg_tol, "Hessian eigenvalue threshold")->check(CLI::PositiveNumber);

  // steady
  auto* steady_cmd = app.add_subcommand("steady", "Construct one steady patch");
  double lambda = 100.0;
  add_common(steady_cmd, common);
  add_class(steady_cmd, cls, "global", true);
  steady_cmd->add_option("--lambda", lambda, "vorticity strength")->check(CLI::PositiveNumber);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Concentration asymptotics over a lambda list");
  std::string lambdas = "50,100,200,400", target;
  add_common(sweep_cmd, common);
  add_class(sweep_cmd, cls, "global", true);
  sweep_cmd->add_option("--lambdas", lambdas, "increasing comma-separated list");
  sweep_cmd->add_option("--target", target, "expected concentration point x,y (default: class center)");

  // evolve
  auto* evolve_cmd = app.add_subcommand("evolve", "Euler evolution with conservation diagnostics");
  std::string initial = "steady", patch_center = "0,0";
  int dump_stride = 0;
  add_common(evolve_cmd, common);
  add_class(evolve_cmd, cls, "global", true);
  add_evolve(evolve_cmd, evo, 10.0);
  evolve_cmd->add_option("--lambda", lambda, "vorticity strength")->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--initial", initial, "steady | ball | concentrated")
      ->check(CLI::IsMember({"steady", "ball", "concentrated"}));
  evolve_cmd->add_option("--patch-center", patch_center, "center x,y for ball and concentrated patches");
  evolve_cmd->add_option("--dump-stride", dump_stride, "steps between field dumps, 0 = none")
      ->check(CLI::NonNegativeNumber);

  // pointvortex
  auto* pv_cmd = app.add_subcommand("pointvortex", "Kirchhoff-Routh point vortex trajectory");
  std::string x0 = "0.5,0", model = "auto", orbit_center;
  double pv_horizon = 30.0, pv_dt = 1e-2, step_tol = 0.0;
  add_common(pv_cmd, common);
  pv_cmd->add_option("--x0", x0, "initial position x,y");
  pv_cmd->add_option("--horizon", pv_horizon, "final time")->check(CLI::PositiveNumber);
  pv_cmd->add_option("--dt", pv_dt, "RK4 step")->check(CLI::PositiveNumber);
  pv_cmd->add_option("--model", model, "auto | analytic | robin")->check(CLI::IsMember({"auto", "analytic", "robin"}));
  pv_cmd->add_option("--robin-stride", robin_stride, "Robin sampling stride for the robin model")
      ->check(CLI::PositiveNumber);
  pv_cmd->add_option("--step-tol", step_tol, "per-step |dH| tolerance, 0 = default");
  pv_cmd->add_option("--orbit-center", orbit_center, "center for the period measurement (default: domain center)");

  // stability
  auto* stab_cmd = app.add_subcommand("stability", "Isovortical perturbation experiment");
  std::string deltas = "0.05,0.025";
  int trials = 5;
  add_common(stab_cmd, common);
  add_class(stab_cmd, cls, "global", true);
  add_evolve(stab_cmd, evo, 10.0);
  stab_cmd->add_option("--lambda", lambda, "vorticity strength")->check(CLI::PositiveNumber);
  stab_cmd->add_option("--deltas", deltas, "initial L1 distances, comma-separated");
  stab_cmd->add_option("--trials", trials, "trials per delta")->check(CLI::PositiveNumber);

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Multi-start uniqueness probe");
  int starts = 10;
  add_common(probe_cmd, common);
  add_class(probe_cmd, cls, "local", false);
  probe_cmd->add_option("--lambda", lambda, "vorticity strength")->check(CLI::PositiveNumber);
  probe_cmd->add_option("--starts", starts, "number of random starts")->check(CLI::PositiveNumber);

  // Splice the config file in right after the subcommand name.
  std::vector<std::string> tokens = args;
  try {
    std::string config_path;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (tokens[k] == "--config" && k + 1 < tokens.size()) config_path = tokens[k + 1];
      if (tokens[k].rfind("--config=", 0) == 0) config_path = tokens[k].substr(9);
    }
    if (!config_path.empty()) {
      const auto extra = read_config(config_path);
      std::size_t at = 0;
      if (!tokens.empty() && std::find(std::begin(kSubcommands), std::end(kSubcommands), tokens[0]) != std::end(kSubcommands))
        at = 1;
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
    }
    std::vector<std::string> rev(tokens.rbegin(), tokens.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  ordered_json manifest;
  manifest["program"] = "vortexlab";
  manifest["subcommand"] = name;
  ordered_json params = ordered_json::object();
  std::vector<const CLI::Option*> opts;
  for (const auto* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h,--help") continue;
    opts.push_back(opt);
  }
  std::sort(opts.begin(), opts.end(),
            [](const CLI::Option* a, const CLI::Option* b) { return a->get_single_name() < b->get_single_name(); });
  for (const auto* opt : opts) params[opt->get_single_name()] = option_value(opt);
  manifest["parameters"] = params;

  try {
    set_thread_count(common.threads);
    if (common.isa == "scalar") kernels::set_isa(kernels::Isa::Scalar);
    if (common.isa == "avx2") kernels::set_isa(kernels::Isa::Avx2);
    manifest["isa"] = kernels::isa_name(kernels::active_isa());

    const DomainPtr dom = make_domain(common, sub);
    const PoissonSolver solver = make_solver(common, dom);
    manifest["grid"] = {{"nx", dom->nx()}, {"ny", dom->ny()}, {"h", dom->h()}, {"domain", dom->spec().describe()}};
    ordered_json results = ordered_json::object();
    Outputs files(common.out);

    if (name == "robin") {
      RobinOptions ro;
      ro.stride = robin_stride;
      ro.analytic = robin_analytic;
      const RobinField rf = robin(solver, ro);
      const auto points = find_critical_points(rf, grad_tol, deg_tol);
      io::write_field(files.file("robin.field"), rf.values());
      io::write_critical_points_csv(files.file("critical_points.csv"), points);
      results["critical_points"] = points.size();
    } else if (name == "steady") {
      const auto c = make_class(cls);
      const SteadyPatch sp = construct(solver, lambda, c, init_center(cls, dom), make_steady(cls));
      const EnergyReport rep = excess_energy(sp);
      const double resid = steadiness_residual(sp.patch.field(), sp.psi, default_test_battery(dom));
      io::save_steady_patch(fs::path(common.out) / "steady", sp);
      io::CsvWriter csv(files.file("steady.csv"),
                        {"lambda", "E", "T", "mu", "identity_residual", "steadiness_residual"});
      csv << sp.patch.lambda << rep.E << rep.T << rep.mu << rep.identity_residual << resid;
      csv.end_row();
      io::CsvWriter hist(files.file("energy_history.csv"), {"iteration", "E"});
      for (std::size_t k = 0; k < sp.energy_history.size(); ++k) {
        hist << k << sp.energy_history[k];
        hist.end_row();
      }
      results["converged"] = sp.converged;
      results["iterations"] = sp.iterations;
      results["status"] = sp.status;
    } else if (name == "sweep") {
      const auto list = parse_list(lambdas, "--lambdas");
      const auto c = make_class(cls);
      const Vec2 tgt = target.empty() ? (cls.kind == "local" ? c.center : dom->spec().center())
                                      : parse_point(target, "--target");
      const auto rows = asymptotics_sweep(solver, list, c, init_center(cls, dom), tgt, make_steady(cls));
      io::write_sweep_csv(files.file("sweep.csv"), rows);
      ordered_json errors = ordered_json::array();
      for (const auto& r : rows)
        if (!r.error.empty()) errors.push_back({{"lambda", r.lambda_nominal}, {"error", r.error}});
      results["errors"] = errors;
    } else if (name == "evolve") {
      const SolverConfig cfg = make_config(evo);
      ScalarField w0;
      double lam = 0.0;
      if (initial == "steady") {
        const SteadyPatch sp = construct(solver, lambda, make_class(cls), init_center(cls, dom), make_steady(cls));
        if (!sp.converged) throw NumericalError("steady construction did not converge: " + sp.status);
        w0 = sp.patch.field();
        lam = sp.patch.lambda;
      } else {
        const Vec2 pc = parse_point(patch_center, "--patch-center");
        const Patch p = initial == "ball" ? patch_from_ball(dom, pc, lambda) : concentrated_patch(dom, pc, lambda);
        w0 = p.field();
        lam = p.lambda;
      }
      if (dump_stride > 0) io::write_field(files.file(dump_name(0)), w0);
      const auto rec = evolve(solver, w0, evo.horizon, cfg, lam, [&](const EvolutionState& s, int k) {
        if (dump_stride > 0 && k % dump_stride == 0) io::write_field(files.file(dump_name(k)), s.w);
      });
      io::write_evolution_csv(files.file("evolution.csv"), rec);
      results["steps"] = rec.dts.size();
      results["lambda"] = lam;
    } else if (name == "pointvortex") {
      const bool analytic = model == "analytic" || (model == "auto" && dom->spec().kind() == DomainKind::Disk);
      std::unique_ptr<RobinField> rf;
      KirchhoffRouth kr = [&] {
        if (analytic) return KirchhoffRouth::analytic_disk(dom);
        RobinOptions ro;
        ro.stride = robin_stride;
        rf = std::make_unique<RobinField>(robin(solver, ro));
        return KirchhoffRouth::from_robin(*rf);
      }();
      const auto traj = integrate(kr, parse_point(x0, "--x0"), pv_horizon, pv_dt, step_tol);
      const Vec2 oc = orbit_center.empty() ? dom->spec().center() : parse_point(orbit_center, "--orbit-center");
      io::write_trajectory_csv(files.file("trajectory.csv"), traj);
      double dh = 0.0;
      for (double h : traj.H) dh = std::max(dh, std::abs(h - traj.H.front()));
      results["model"] = analytic ? "analytic" : "robin";
      results["period"] = orbit_period(traj, oc);
      results["max_H_change"] = dh;
      results["rejected_steps"] = traj.rejected_steps;
    } else if (name == "stability") {
      const auto list = parse_list(deltas, "--deltas");
      const SteadyPatch sp = construct(solver, lambda, make_class(cls), init_center(cls, dom), make_steady(cls));
      if (!sp.converged) throw NumericalError("steady construction did not converge: " + sp.status);
      StabilityOptions so;
      so.horizon = evo.horizon;
      so.trials = trials;
      so.seed = common.seed;
      so.solver = make_config(evo);
      std::vector<StabilityRecord> records;
      records.push_back(diffusion_budget(solver, sp, so));
      auto trials_out = stability_experiment(solver, sp, list, so);
      ordered_json skipped = ordered_json::array();
      for (auto& r : trials_out) {
        if (!r.ok()) skipped.push_back({{"delta", r.delta}, {"trial", r.trial}, {"error", r.error}});
        records.push_back(std::move(r));
      }
      io::write_stability_csv(files.file("stability.csv"), records);
      results["skipped"] = skipped;
      results["budget_sup_drift"] = records.front().sup_drift;
    } else if (name == "probe") {
      const auto rep = uniqueness_probe(solver, lambda, make_class(cls), starts, common.seed, make_steady(cls));
      io::write_probe_csv(files.file("probe.csv"), rep);
      results["clusters"] = rep.cluster_count;
    }

    manifest["results"] = results;
    files.file("manifest.json") << manifest.dump(2) << "\n";
    files.flush();
    out << name << ": wrote " << files.dir().string() << "\n";
    return kOk;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace vortexlab::cli
