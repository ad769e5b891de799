#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spdc/beam.hpp"
#include "spdc/config.hpp"
#include "spdc/errors.hpp"

namespace spdc {

inline constexpr const char* kToolVersion = "0.1.0";

/// A pipeline failure tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct CommandResult {
  std::vector<std::filesystem::path> files;  // manifest last
  int exit_code = 0;
};

struct SimulateOptions {
  std::optional<std::filesystem::path> output_dir;  // falls back to output.dir
  bool direct = false;
};

/// ring.pgm, ring.csv, profile.csv, metrics.csv and manifest.txt.
CommandResult cmd_simulate(const RunConfig& config, const SimulateOptions& options = {});

/// One sweep table plus manifest.txt. Failed rows are written with a
/// `failed` marker and an error footer, and the exit code is nonzero.
/// Throws ValidationError if config.sweep.kind is set and differs from `kind`.
CommandResult cmd_sweep(const RunConfig& config, SweepKind kind,
                        const std::optional<std::filesystem::path>& output_dir = std::nullopt,
                        std::ostream* log = nullptr);

struct FitBeamOptions {
  double pgm_pitch_mm = 1.0;
  std::optional<std::filesystem::path> output_dir;  // no file when unset
  bool fit_offset = false;
};

/// Fits a vortex profile of order l to a PGM or CSV image and prints the
/// `parameter,value` table to `out`.
BeamFit cmd_fit_beam(const std::filesystem::path& image, int l, const FitBeamOptions& options, std::ostream& out);

std::string beam_fit_csv(const BeamFit& fit, int l);

}  // namespace spdc
