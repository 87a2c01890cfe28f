#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "plirls/types.hpp"

namespace plirls::harness {

/// Raised for anything wrong with a config file (schema, values, referenced
/// files); mapped to exit code 1 by the CLI.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

enum class ProblemKind { SparseLsq, L0Regression, LowRank, Multiblock, Custom };
const char *kind_name(ProblemKind kind);
ProblemKind parse_kind(const std::string &name);

struct GenerateParams {
    std::uint64_t seed = 0;
    // regression kinds
    std::size_t rows = 0, cols = 0, sparsity = 0;
    double noise_fraction = 0.0;
    double noise_amplitude = 5.0;
    // low-rank kinds
    std::size_t side = 0, rank = 0;
    double corruption_fraction = 0.0;
    double corruption_amplitude = 3.0;
};

struct FileSource {
    std::filesystem::path a, b;            // regression kinds
    std::filesystem::path d;               // low-rank kinds
    std::filesystem::path bmat, coff;      // custom: stacked B and c
    std::filesystem::path ground_truth;    // optional
};

struct CustomTermConfig {
    std::string f_kind = "zero"; // zero | l1 | l0 | sparsity | l1-ball | box
    double f_lambda = 1.0;
    std::size_t f_k = 0;
    double f_radius = 1.0;
    Vector box_lower, box_upper;
    bool smooth_quadratic = false; // s = (scale/2)||A x - b||^2 from files
    std::filesystem::path s_a, s_b;
    double s_scale = 1.0;
};

struct AlgorithmConfig {
    double gamma = 1.1;
    double epsilon = 0.1;
    double nu = 1.0;
    double lambda = 1.0;
    double nuclear_weight = 1.0; // multiblock only
    double l1_weight = 1.0;      // multiblock only
    double step_tol = 0.0;       // <= 0: solver default
    double w_tol = 0.0;
    double tau0 = 0.0;
    std::size_t max_iters = 100000;
    /// "zero" (default), "lsq" (regularized least-squares warm start for the
    /// regression kinds), or a vector file path.
    std::string x0 = "zero";
    std::size_t continuation_stages = 0; // 0: off; j-th stage uses eps*2^-j
};

struct RunConfig {
    ProblemKind kind = ProblemKind::SparseLsq;
    bool generated = false;
    GenerateParams gen;
    FileSource files;
    CustomTermConfig custom;
    AlgorithmConfig algo;
    std::filesystem::path out_dir = ".";
    std::string trace_csv = "trace.csv";
    std::string trace_json;   // empty: skip
    std::string summary = "summary.json";
};

/// Strict parser: versioned schema field required, unknown keys rejected.
RunConfig parse_config_text(const std::string &text, const std::filesystem::path &base_dir);
RunConfig parse_config_file(const std::filesystem::path &path);

/// Runs one config end to end and writes trace/summary files.
/// Exit codes: 0 Converged, 2 MaxIters, 3 Diverged, 1 config or runtime error.
int cmd_solve(const std::filesystem::path &config_path, std::ostream &err,
              const std::filesystem::path &out_override = {});

/// Runs configs concurrently (worker count capped by PLIRLS_THREADS);
/// returns 1 if any run reports a config error, otherwise the max exit code.
int cmd_solve_batch(const std::vector<std::filesystem::path> &configs, std::ostream &err);

/// Writes a deterministic synthetic instance (plus ground truth and
/// meta.json) into out_dir.
int cmd_generate(ProblemKind kind, const GenerateParams &params,
                 const std::filesystem::path &out_dir, std::ostream &err);

enum class CheckLevel { Quick, Full };

struct CheckOptions {
    CheckLevel level = CheckLevel::Quick;
    std::uint64_t base_seed = 91;
    /// Internal fault-injection hook (see SolveOptions); used by the test
    /// suite to prove the invariant checks actually fire.
    double fault_gamma = 0.0;
};

struct Violation {
    std::string inequality;
    std::uint64_t seed = 0;
    std::string detail;
};

/// Oracle/invariant suites at quick (~seconds) or full depth.
std::vector<Violation> run_self_check(const CheckOptions &opts, std::ostream &log);

/// Prints one line per violated inequality; exit 0 when clean, 1 otherwise.
int cmd_check(CheckLevel level, std::ostream &out);

/// Extracts "k objective w_norm" columns from a trace CSV into a
/// gnuplot-ready whitespace-separated data file.
int cmd_trace_plot(const std::filesystem::path &trace_path,
                   const std::filesystem::path &out_path, std::ostream &err);

} // namespace plirls::harness
