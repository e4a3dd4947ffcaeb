#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ancod/error.hpp"
#include "ancod/frame.hpp"

namespace ancod::cli {

inline constexpr const char* kToolName = "ancod";
inline constexpr const char* kVersion = "0.1.0";

/// Invalid command-line configuration; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::string subcommand;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<int> k;
  std::optional<double> beta;
  std::optional<double> p;
  std::vector<std::string> frames;
  std::string field = "real";
  std::optional<double> sdr_db;
  std::string sdr_grid = "0:60:1";
  std::optional<int> trials;
  std::uint64_t seed = 0;
  std::optional<int> bins;
  std::string out;
  std::string format = "csv";

  // Subcommand-specific knobs.
  std::string mode = "auto";  ///< mlie: auto | exhaustive | mc
  bool exhaustive = false;    ///< ie-hist
  double sigma_x2 = 1.0;
  std::optional<double> sigma_q2;
  bool noiseless = false;
  std::string trace;
  std::string frame_out;
  std::vector<double> epsilons{1e-3};
  int verify_trials = 200;
  int iterations = 200;
  int budget = 2000;
  bool verify_only = false;
};

/// Resolved dimensions of one frame request.
struct Geometry {
  std::string label;  ///< CLI name: bl, iid, dss, spectrum, paley
  FrameKind kind = FrameKind::custom;
  int n = 0;
  int m = 0;
  int k = 0;

  [[nodiscard]] double beta() const { return static_cast<double>(m) / k; }
  [[nodiscard]] double p() const { return static_cast<double>(k) / n; }
};

/// Applies the geometry rules for one frame label and validates k ≤ m ≤ n.
Geometry resolve_geometry(const ExperimentConfig& config, const std::string& label);

Frame build_frame(const Geometry& geometry, const ExperimentConfig& config);

/// lo:hi:step in dB, inclusive of hi up to rounding.
std::vector<double> parse_sdr_grid(const std::string& spec);

/// Echo of every option that affects the result.
nlohmann::ordered_json config_json(const ExperimentConfig& config);

/// Parses argv and runs the subcommand. Returns the process exit code:
/// 0 success, 2 configuration error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ancod::cli
