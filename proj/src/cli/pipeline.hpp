#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/io.hpp"
#include "mgle/linops.hpp"
#include "mgle/mori.hpp"
#include "mgle/nonstationary.hpp"
#include "mgle/report.hpp"
#include "mgle/trajectory.hpp"

namespace mgle::app {

struct MatrixSetup {
  linops::OperatorModel model;
  Vector z;
  bool skew;
};

struct TrajectorySetup {
  trajectory::SystemSpec spec;  ///< spec.z is the resolved observable
  trajectory::Pairing pairing = trajectory::Pairing::generator;
  bool measure_preserving = false;  ///< L^dagger = -L on L2(rho)
  std::optional<Complex> kernel_reference;
};

struct NsSetup {
  nonstationary::Generator generator;
  std::size_t dim = 0;
  hilbert::Space base = hilbert::Space::coordinate_identity(1);
  Vector z;
  std::size_t substeps = 4;
};

MatrixSetup build_matrix(const RunConfig& cfg);
TrajectorySetup build_trajectory(const RunConfig& cfg);
NsSetup build_nonstationary(const RunConfig& cfg);

volterra::TimeGrid run_grid(const RunConfig& cfg);

/// Everything a run can emit. Unused parts stay empty for backends that do not produce them.
struct RunResult {
  volterra::TimeGrid grid;
  std::vector<CheckResult> checks;
  std::optional<mori::GleInputs> inputs;
  std::optional<volterra::Series> K;
  std::vector<Column> forces;  ///< summary columns for forces.csv
  std::vector<Column> kernel_extra;
};

std::shared_ptr<const trajectory::TrajectoryEnsemble> simulate(const RunConfig& cfg, const TrajectorySetup& setup);

/// C, g, h and omega straight from an ensemble.
mori::GleInputs correlate(const TrajectorySetup& setup, std::shared_ptr<const trajectory::TrajectoryEnsemble> ens);

/// Full pipeline for any backend; `ens` may supply a precomputed trajectory ensemble.
RunResult execute(const RunConfig& cfg, std::shared_ptr<const trajectory::TrajectoryEnsemble> ens = nullptr);

/// Writes kernel.csv, correlation.csv and forces.csv for whatever the result holds.
void write_artifacts(const std::filesystem::path& dir, const RunResult& result);
void write_correlation(const std::filesystem::path& path, const mori::GleInputs& in);
void write_kernel(const std::filesystem::path& path, const volterra::Series& K, const std::vector<Column>& extra = {});

Environment environment(const RunConfig& cfg);

/// 0 if every check passes or is not applicable, 2 otherwise.
int exit_code(const std::vector<CheckResult>& checks);

}  // namespace mgle::app
