#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sced/builder.hpp"
#include "sced/pricing.hpp"
#include "sced/solver.hpp"

namespace sced::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Format { Table, Csv };

/// Process exit codes.
enum Exit : int {
  kOk = 0,
  kInputError = 1,
  kInfeasible = 2,
  kNumerical = 3,
  kLimitViolation = 4,
};

struct CommonOptions {
  std::string mode = "bidirectional";
  double tol = 1e-8;
  std::optional<std::filesystem::path> out_dir;
  Format format = Format::Table;
};

/// positive-only | bidirectional | up | down | updown. Throws ValidationError.
BuildOptions build_options(const std::string& mode);

/// --out-dir, else $SCED_OUT_DIR, else ./sced_out.
std::filesystem::path output_dir(const std::optional<std::filesystem::path>& flag);

nlohmann::json dispatch_to_json(const DispatchSolution& d);
DispatchSolution dispatch_from_json(const nlohmann::json& doc);
nlohmann::json prices_to_json(const PriceSet& p);
PriceSet prices_from_json(const nlohmann::json& doc);
nlohmann::json duals_to_json(const DualSolution& d);

/// Each command prints to out and returns an exit code; exceptions escape
/// to the caller, which maps them through exit_code_for().
int cmd_run(const std::filesystem::path& scenario_path, const CommonOptions& opt,
            std::ostream& out);

int cmd_sweep(const std::filesystem::path& scenario_path, const std::string& parameter,
              const std::vector<double>& values, const CommonOptions& opt, std::ostream& out);

struct VerifyOptions {
  std::optional<double> loss;
  std::optional<double> step;
  std::optional<double> horizon;
};

int cmd_verify(const std::filesystem::path& run_dir, const VerifyOptions& v,
               const CommonOptions& opt, std::ostream& out);

struct SettleFlags {
  double rtp = 0.0;
  std::optional<double> rtp_negative;
  bool eta_adjust_ibrs = true;
};

int cmd_settle(const std::filesystem::path& run_dir, const std::filesystem::path& trace_path,
               const SettleFlags& s, const CommonOptions& opt, std::ostream& out);

/// Exit code for an exception thrown by a command.
int exit_code_for(const std::exception& e);

}  // namespace sced::cli
