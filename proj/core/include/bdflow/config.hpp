#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "bdflow/evolution.hpp"
#include "bdflow/geometry.hpp"

namespace bdflow {

enum class DtnMethod { Spectral, Mfs };

struct DtnConfig {
  DtnMethod method = DtnMethod::Spectral;
  double offset = 0.6;
  double reg = 1e-12;
};

struct RatesConfig {
  double window_fraction = 0.4;
  double tail_fraction = 0.5;
  int modes = 8;  // eigenmode count in CSV exports
};

/// One reproducible run: domain, problem data as finite trigonometric
/// coefficients (smooth by construction), stepping controls, operator
/// choice, and output destination. `hash` is the FNV-1a digest of the
/// canonical serialization, embedded in every output file.
struct RunConfig {
  CurveSpec domain;
  int n = 64;

  double p = 2.0;
  FourierSeries a;
  double zero_tol_rel = 1e-8;

  std::optional<FourierSeries> initial;
  double initial_offset = 0.0;
  std::optional<FourierSeries> initial_second;  // ordered-pair comparison runs
  std::optional<double> mass_target;

  FlowMode mode = FlowMode::Physical;
  StepControls controls;

  DtnConfig dtn;
  RatesConfig rates;

  std::string out_dir = "out";
  std::uint64_t seed = 1234;
  std::optional<int> verify_n_override;

  std::string hash;
};

/// Parses and validates the JSON text of a config document. Structural
/// problems and rejected values throw ValidationError.
RunConfig parse_config(const std::string& json_text);

RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit digest as fixed-width hex.
std::string fnv1a_hex(const std::string& text);

}  // namespace bdflow
