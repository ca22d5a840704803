#include "vortexlab/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "vortexlab/error.hpp"

namespace vortexlab::io {

std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (at_ == columns_) throw InputError("CSV row has too many values");
  if (at_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  if (v.find_first_of(",\"\n") == std::string::npos) {
    out_ << v;
  } else {
    out_ << '"';
    for (char c : v) out_ << (c == '"' ? "\"\"" : std::string(1, c));
    out_ << '"';
  }
  return *this;
}

void CsvWriter::end_row() {
  if (at_ != columns_) throw InputError("CSV row has too few values");
  out_ << '\n';
  at_ = 0;
}

void write_field(std::ostream& out, const ScalarField& f) {
  const auto& d = f.dom();
  const auto grid = f.to_grid();
  out << "field " << d.nx() << ' ' << d.ny() << ' ' << format(d.origin().x) << ' ' << format(d.origin().y) << ' '
      << format(d.h()) << '\n';
  for (int j = 0; j < d.ny(); ++j) {
    for (int i = 0; i < d.nx(); ++i) {
      if (i > 0) out << ' ';
      out << format(grid[d.grid_index(i, j)]);
    }
    out << '\n';
  }
}

ScalarField read_field(std::istream& in, const DomainPtr& dom) {
  std::string tag;
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, h = 0.0;
  if (!(in >> tag >> nx >> ny >> x0 >> y0 >> h) || tag != "field") throw InputError("malformed field header");
  const auto& d = *dom;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  if (nx != d.nx() || ny != d.ny() || !near(x0, d.origin().x) || !near(y0, d.origin().y) || !near(h, d.h()))
    throw InputError("field dump does not match the domain grid");
  std::vector<double> grid(d.grid_size());
  for (auto& v : grid)
    if (!(in >> v)) throw InputError("field dump is truncated");
  return ScalarField::from_grid(dom, grid);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  CsvWriter csv(out, {"lambda_nominal", "lambda_effective", "K", "eps", "diam_over_eps", "centroid_err", "T",
                      "E_plus_logterm", "mu_plus_logterm", "iterations", "converged"});
  for (const auto& r : rows) {
    csv << r.lambda_nominal << r.lambda_effective << r.K << r.eps << r.diam_over_eps << r.centroid_err << r.T
        << r.E_plus_logterm << r.mu_plus_logterm << r.iterations << (r.converged ? 1 : 0);
    csv.end_row();
  }
}

void write_critical_points_csv(std::ostream& out, const std::vector<CriticalPoint>& points) {
  CsvWriter csv(out, {"x", "y", "grad_norm", "h11", "h12", "h22", "class"});
  for (const auto& p : points) {
    csv << p.location.x << p.location.y << p.gradient_norm << p.hessian.xx << p.hessian.xy << p.hessian.yy
        << std::string(critical_kind_name(p.kind));
    csv.end_row();
  }
}

void write_evolution_csv(std::ostream& out, const ExperimentRecord& rec) {
  CsvWriter csv(out, {"t", "E", "l1_drift", "centroid_x", "centroid_y", "diam", "dist_q1", "dist_q2", "dist_q3"});
  for (const auto& r : rec.rows) {
    csv << r.t << r.E << r.l1_drift << r.centroid.x << r.centroid.y << r.diam << r.dist[0] << r.dist[1] << r.dist[2];
    csv.end_row();
  }
}

void write_trajectory_csv(std::ostream& out, const VortexTrajectory& traj) {
  CsvWriter csv(out, {"t", "x", "y", "H"});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    csv << traj.times[k] << traj.positions[k].x << traj.positions[k].y << traj.H[k];
    csv.end_row();
  }
}

void write_stability_csv(std::ostream& out, const std::vector<StabilityRecord>& records) {
  CsvWriter csv(out, {"lambda", "delta_in", "trial", "seed", "horizon", "sup_drift", "end_drift", "drift_slope",
                      "boundary_delta", "distribution_drift"});
  for (const auto& r : records) {
    if (!r.ok()) continue;
    csv << r.lambda << r.delta_in << r.trial << static_cast<long long>(r.seed) << r.horizon << r.sup_drift
        << r.end_drift << r.drift_slope << r.boundary_delta << r.distribution_drift;
    csv.end_row();
  }
}

void write_probe_csv(std::ostream& out, const ProbeReport& report) {
  CsvWriter csv(out, {"start", "init_x", "init_y", "converged", "energy", "cluster", "error"});
  for (const auto& r : report.runs) {
    csv << r.start << r.init_center.x << r.init_center.y << (r.converged ? 1 : 0) << r.energy << r.cluster << r.error;
    csv.end_row();
  }
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
  if (!f) throw InputError("failed writing " + path.string());
}

std::string field_text(const ScalarField& f) {
  std::ostringstream os;
  write_field(os, f);
  return os.str();
}

}  // namespace

void save_steady_patch(const std::filesystem::path& dir, const SteadyPatch& p) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json m;
  m["lambda_nominal"] = p.lambda_nominal;
  m["lambda"] = p.patch.lambda;
  m["mu"] = p.mu;
  m["mu_kth"] = p.mu_kth;
  m["K"] = p.K;
  m["energy"] = p.energy_history.empty() ? 0.0 : p.energy_history.back();
  m["iterations"] = p.iterations;
  m["converged"] = p.converged;
  m["cycle_length"] = p.cycle_length;
  m["escapes"] = p.escapes;
  m["touches_constraint"] = p.touches_constraint;
  m["status"] = p.status;
  m["energy_history"] = p.energy_history;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  write_file(dir / "omega.field", field_text(p.patch.field()));
  write_file(dir / "psi.field", field_text(p.psi));
}

SteadyPatch load_steady_patch(const std::filesystem::path& dir, const DomainPtr& dom) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw InputError("cannot read " + (dir / "manifest.json").string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed steady manifest: ") + e.what());
  }
  std::ifstream wf(dir / "omega.field"), pf(dir / "psi.field");
  if (!wf || !pf) throw InputError("steady patch directory lacks field dumps");
  const ScalarField w = read_field(wf, dom);
  SteadyPatch p;
  try {
    p.lambda_nominal = m.at("lambda_nominal").get<double>();
    p.patch = Patch{dom, m.at("lambda").get<double>(), {}};
    p.mu = m.at("mu").get<double>();
    p.mu_kth = m.at("mu_kth").get<double>();
    p.K = m.at("K").get<std::size_t>();
    p.iterations = m.at("iterations").get<int>();
    p.converged = m.at("converged").get<bool>();
    p.cycle_length = m.at("cycle_length").get<int>();
    p.escapes = m.at("escapes").get<int>();
    p.touches_constraint = m.at("touches_constraint").get<bool>();
    p.status = m.at("status").get<std::string>();
    p.energy_history = m.at("energy_history").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed steady manifest: ") + e.what());
  }
  for (std::size_t c = 0; c < w.size(); ++c)
    if (w[c] != 0.0) p.patch.cells.push_back(static_cast<int>(c));
  if (p.patch.cells.size() != p.K) throw InputError("steady patch field does not hold K cells");
  p.psi = read_field(pf, dom);
  return p;
}

}  // namespace vortexlab::io
