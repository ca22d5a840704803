#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vortexlab/euler.hpp"
#include "vortexlab/green.hpp"
#include "vortexlab/pointvortex.hpp"
#include "vortexlab/stability.hpp"
#include "vortexlab/steady.hpp"

namespace vortexlab::io {

// Shortest round-trip decimal form; identical doubles always print identically.
std::string format(double v);

// Comma-separated rows with a header line.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  void sep();
  std::ostream& out_;
  std::size_t columns_;
  std::size_t at_ = 0;
};

// "field nx ny x0 y0 h", then ny lines of nx values, bottom row first;
// cells outside the domain are written as 0.
void write_field(std::ostream& out, const ScalarField& f);
// Reads a dump written for `dom`; throws InputError on a grid mismatch.
ScalarField read_field(std::istream& in, const DomainPtr& dom);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_critical_points_csv(std::ostream& out, const std::vector<CriticalPoint>& points);
void write_evolution_csv(std::ostream& out, const ExperimentRecord& rec);
void write_trajectory_csv(std::ostream& out, const VortexTrajectory& traj);
void write_stability_csv(std::ostream& out, const std::vector<StabilityRecord>& records);
void write_probe_csv(std::ostream& out, const ProbeReport& report);

// manifest.json with lambda, mu, K, energy and status, plus omega.field and psi.field.
void save_steady_patch(const std::filesystem::path& dir, const SteadyPatch& p);
SteadyPatch load_steady_patch(const std::filesystem::path& dir, const DomainPtr& dom);

}  // namespace vortexlab::io
