#pragma once

#include <filesystem>
#include <string>

#include "plirls/multiblock.hpp"
#include "plirls/solver.hpp"
#include "plirls/types.hpp"

namespace plirls {

/// Dense text format: first line "rows cols", then row-major whitespace
/// separated decimals. Writing uses %.17g so files round-trip exactly.
Matrix load_matrix(const std::filesystem::path &path);
void save_matrix(const std::filesystem::path &path, const Matrix &m);

/// Vectors are stored as n x 1 matrices; loading accepts 1 x n as well.
Vector load_vector(const std::filesystem::path &path);
void save_vector(const std::filesystem::path &path, const Vector &v);

/// Trace serialization. CSV uses the fixed header
/// k,objective,step_norm,w_norm,c_k,rho1_witness,rho2_witness
/// (multiblock appends step_norm_X,step_norm_Y); bytes are deterministic for
/// identical traces. JSON is an array of records with the same keys.
std::string trace_csv(const std::vector<IterationRecord> &trace);
std::string trace_csv(const std::vector<MultiblockRecord> &trace);
void write_trace_csv(const std::filesystem::path &path,
                     const std::vector<IterationRecord> &trace);
void write_trace_csv(const std::filesystem::path &path,
                     const std::vector<MultiblockRecord> &trace);
std::string trace_json(const std::vector<IterationRecord> &trace);
std::string trace_json(const std::vector<MultiblockRecord> &trace);
void write_trace_json(const std::filesystem::path &path,
                      const std::vector<IterationRecord> &trace);
void write_trace_json(const std::filesystem::path &path,
                      const std::vector<MultiblockRecord> &trace);

/// Columns of a previously written trace needed by the plotting helper.
struct TraceColumns {
    std::vector<double> k;
    std::vector<double> objective;
    std::vector<double> w_norm;
};

/// Reads a CSV trace in either schema (solver-core or multiblock).
TraceColumns read_trace_csv(const std::filesystem::path &path);

void write_text_file(const std::filesystem::path &path, const std::string &content);
std::string read_text_file(const std::filesystem::path &path);

/// %.17g rendering used everywhere a double becomes text.
std::string format_double(double v);

} // namespace plirls
