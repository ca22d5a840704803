#include "vortexlab/poisson.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <sstream>

#include "vortexlab/error.hpp"
#include "vortexlab/kernels.hpp"

namespace vortexlab {

struct PoissonSolver::Impl {
  std::vector<double> diag;  // dense grid, units of 1/h^2
  std::vector<double> mask;  // dense grid, 1 on domain cells
  std::vector<double> inv_diag;
  kernels::StencilView view;
  // Factorization of h^2 * A in domain-cell ordering.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
};

namespace {

double norm_l2(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

}  // namespace

PoissonSolver::PoissonSolver(DomainPtr dom, PoissonOptions options)
    : dom_(std::move(dom)), options_(options), impl_(std::make_unique<Impl>()) {
  if (!(options_.tolerance > 0.0)) throw InputError("solver tolerance must be positive");
  if (options_.max_iterations < 1) throw InputError("solver max-iterations must be positive");
  const auto& d = *dom_;
  const std::size_t n = d.grid_size();
  auto& im = *impl_;
  im.diag.assign(n, 0.0);
  im.mask.assign(n, 0.0);
  im.inv_diag.assign(n, 0.0);
  for (int g : d.cells()) {
    im.diag[g] = 4.0;
    im.mask[g] = 1.0;
  }
  // A cut replaces the missing neighbor by the ghost (g - (1-theta) psi_c)/theta,
  // so the diagonal gains 1/theta - 1 and the data enters the right side.
  for (const auto& cut : d.cuts()) im.diag[d.grid_of(cut.cell)] += 1.0 / cut.theta - 1.0;
  const double h2 = d.h() * d.h();
  for (int g : d.cells()) im.inv_diag[g] = h2 / im.diag[g];
  im.view = {d.nx(), d.ny(), 1.0 / h2, im.diag.data(), im.mask.data()};

  if (options_.method == PoissonOptions::Method::Direct) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(d.cell_count() * 5);
    for (int c = 0; c < static_cast<int>(d.cell_count()); ++c) {
      const int g = d.grid_of(c);
      trips.emplace_back(c, c, im.diag[g]);
      const int i = d.grid_i(g), j = d.grid_j(g);
      for (int dir = 0; dir < 4; ++dir) {
        const int nb = d.cell_of_grid(d.grid_index(i + kDi[dir], j + kDj[dir]));
        if (nb >= 0) trips.emplace_back(c, nb, -1.0);
      }
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(d.cell_count()),
                                  static_cast<Eigen::Index>(d.cell_count()));
    a.setFromTriplets(trips.begin(), trips.end());
    im.ldlt.compute(a);
    if (im.ldlt.info() != Eigen::Success) throw NumericalError("Poisson factorization failed");
  }
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

const std::vector<double>& PoissonSolver::stencil_diagonal() const { return impl_->diag; }

std::vector<double> PoissonSolver::rhs(const ScalarField& f, const BoundaryData* g) const {
  if (f.domain() != dom_) throw InputError("field is on a different domain than the solver");
  std::vector<double> b(f.values().begin(), f.values().end());
  if (g) {
    const double h2 = dom_->h() * dom_->h();
    for (const auto& cut : dom_->cuts()) b[cut.cell] += (*g)(cut.point) / (cut.theta * h2);
  }
  return b;
}

ScalarField PoissonSolver::apply(const ScalarField& psi) const {
  const auto grid = psi.to_grid();
  std::vector<double> out(grid.size());
  kernels::apply_stencil(impl_->view, grid, out);
  return ScalarField::from_grid(dom_, out);
}

double PoissonSolver::relative_residual(const ScalarField& psi, const ScalarField& f,
                                        const BoundaryData* g) const {
  const auto b = rhs(f, g);
  auto r = apply(psi);
  for (std::size_t k = 0; k < b.size(); ++k) r[k] = b[k] - r[k];
  const double bn = norm_l2(b);
  return bn == 0.0 ? norm_l2(r.values()) : norm_l2(r.values()) / bn;
}

ScalarField PoissonSolver::solve(const ScalarField& f, SolveReport* report) const {
  return solve_impl(rhs(f, nullptr), nullptr, report);
}

ScalarField PoissonSolver::solve(const ScalarField& f, const BoundaryData& g, SolveReport* report) const {
  return solve_impl(rhs(f, &g), nullptr, report);
}

ScalarField PoissonSolver::solve(const ScalarField& f, const ScalarField& guess, SolveReport* report) const {
  if (guess.domain() != dom_) throw InputError("initial guess is on a different domain");
  return solve_impl(rhs(f, nullptr), &guess, report);
}

ScalarField PoissonSolver::solve_impl(const std::vector<double>& b, const ScalarField* guess,
                                      SolveReport* report) const {
  const auto& d = *dom_;
  const auto& im = *impl_;
  const double bnorm = norm_l2(b);
  SolveReport rep;
  if (bnorm == 0.0) {
    if (report) *report = rep;
    return ScalarField(dom_);
  }
  const double h2 = d.h() * d.h();
  const auto cells = d.cells();
  const std::size_t n = d.grid_size();

  auto fail = [&](double residual) {
    std::ostringstream os;
    os << "Poisson solve did not reach relative residual " << options_.tolerance << " (final "
       << residual << ")";
    throw SolverError(os.str(), residual);
  };

  if (options_.method == PoissonOptions::Method::Direct) {
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = im.ldlt.solve(h2 * bv);
    std::vector<double> grid(n, 0.0), ax(n, 0.0), r(b.size());
    auto residual = [&] {
      for (std::size_t k = 0; k < cells.size(); ++k) grid[cells[k]] = x[static_cast<Eigen::Index>(k)];
      kernels::apply_stencil(im.view, grid, ax);
      for (std::size_t k = 0; k < cells.size(); ++k) r[k] = b[k] - ax[cells[k]];
      return norm_l2(r) / bnorm;
    };
    double rel = residual();
    int sweeps = 0;
    while (rel > options_.tolerance && sweeps < options_.max_iterations) {
      Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
      x += im.ldlt.solve(h2 * rv);
      ++sweeps;
      const double next = residual();
      if (!(next < rel)) {
        rel = next;
        break;
      }
      rel = next;
    }
    if (!(rel <= options_.tolerance)) fail(rel);
    rep.relative_residual = rel;
    rep.iterations = sweeps;
    if (report) *report = rep;
    return ScalarField(dom_, std::vector<double>(x.data(), x.data() + x.size()));
  }

  // Jacobi-preconditioned conjugate gradients on the dense grid, restarted
  // from the true residual until it meets the tolerance.
  std::vector<double> x(n, 0.0), r(n), z(n), p(n), ap(n);
  if (guess) {
    for (std::size_t k = 0; k < cells.size(); ++k) x[cells[k]] = (*guess)[k];
  }
  auto true_residual = [&] {
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t k = 0; k < cells.size(); ++k) r[cells[k]] = b[k];
    kernels::apply_stencil(im.view, x, ap);
    kernels::axpy(-1.0, ap, r);
    return norm_l2(r) / bnorm;
  };
  double rel = true_residual();
  int it = 0;
  while (rel > options_.tolerance && it < options_.max_iterations) {
    kernels::multiply(im.inv_diag, r, z);
    p = z;
    double rz = kernels::dot(r, z);
    double recursive = rel;
    while (recursive > options_.tolerance && it < options_.max_iterations) {
      kernels::apply_stencil(im.view, p, ap);
      const double pap = kernels::dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      kernels::axpy(alpha, p, x);
      kernels::axpy(-alpha, ap, r);
      kernels::multiply(im.inv_diag, r, z);
      const double rz_next = kernels::dot(r, z);
      kernels::xpay(z, rz_next / rz, p);
      rz = rz_next;
      ++it;
      recursive = norm_l2(r) / bnorm;
    }
    const double next = true_residual();
    if (!(next < rel) && recursive > options_.tolerance) {
      rel = next;
      break;
    }
    rel = next;
  }
  if (!(rel <= options_.tolerance)) fail(rel);
  rep.relative_residual = rel;
  rep.iterations = it;
  if (report) *report = rep;
  return ScalarField::from_grid(dom_, x);
}

}  // namespace vortexlab
