#pragma once

#include <filesystem>

#include "bdflow/config.hpp"

namespace bdflow {

/// Writes steady.json and phi.csv: eigenvalue, variational level, regime,
/// residual, and the stationary profile.
void cmd_steady(const RunConfig& config, const std::filesystem::path& out_dir);

/// Writes trajectory.csv and summary.json (plus trajectory2.csv and a
/// comparison verdict when the config carries a second ordered initial
/// datum).
void cmd_evolve(const RunConfig& config, const std::filesystem::path& out_dir);

/// Writes spectrum.json and modes.csv for the linearization at the steady
/// state selected by the config.
void cmd_spectrum(const RunConfig& config, const std::filesystem::path& out_dir);

/// Evolves, rescales if physical, fits the decay model, expands in
/// eigenmodes when exponential; writes rates.json and modes_series.csv.
void cmd_rates(const RunConfig& config, const std::filesystem::path& out_dir);

/// Runs the acceptance checks; writes verify.json and prints one verdict per
/// item. Returns true when every item passed.
bool cmd_verify(const RunConfig* config, const std::filesystem::path& out_dir);

}  // namespace bdflow
