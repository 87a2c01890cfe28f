#include "plirls/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace plirls {

namespace {

void append_double(std::string &out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

template <class Record>
nlohmann::json record_json(const Record &r) {
    nlohmann::json j{
        {"k", r.k},
        {"objective", r.objective},
        {"step_norm", r.step_norm},
        {"w_norm", r.w_norm},
        {"c_k", r.c_k},
        {"rho1_witness", r.rho1_witness},
        {"rho2_witness", r.rho2_witness},
    };
    if constexpr (std::is_same_v<Record, MultiblockRecord>) {
        j["step_norm_X"] = r.step_norm_x;
        j["step_norm_Y"] = r.step_norm_y;
    }
    return j;
}

template <class Record>
std::string trace_json_impl(const std::vector<Record> &trace) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Record &r : trace)
        arr.push_back(record_json(r));
    return arr.dump(2) + "\n";
}

} // namespace

std::string format_double(double v) {
    std::string s;
    append_double(s, v);
    return s;
}

Matrix load_matrix(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open matrix file: " + path.string());
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols))
        throw std::runtime_error("bad matrix header in " + path.string());
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!(in >> m.data[i]))
            throw std::runtime_error("truncated matrix data in " + path.string());
    return m;
}

void save_matrix(const std::filesystem::path &path, const Matrix &m) {
    std::string out;
    out.reserve(m.size() * 20 + 32);
    out += std::to_string(m.rows);
    out += ' ';
    out += std::to_string(m.cols);
    out += '\n';
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j)
                out += ' ';
            append_double(out, m(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

Vector load_vector(const std::filesystem::path &path) {
    Matrix m = load_matrix(path);
    if (m.cols != 1 && m.rows != 1)
        throw std::runtime_error("vector file must be n x 1 or 1 x n: " + path.string());
    return m.data;
}

void save_vector(const std::filesystem::path &path, const Vector &v) {
    Matrix m(v.size(), 1);
    m.data = v;
    save_matrix(path, m);
}

namespace {

template <class Record>
void append_common_fields(std::string &out, const Record &r) {
    out += std::to_string(r.k);
    out += ',';
    append_double(out, r.objective);
    out += ',';
    append_double(out, r.step_norm);
    out += ',';
    append_double(out, r.w_norm);
    out += ',';
    append_double(out, r.c_k);
    out += ',';
    append_double(out, r.rho1_witness);
    out += ',';
    append_double(out, r.rho2_witness);
}

} // namespace

std::string trace_csv(const std::vector<IterationRecord> &trace) {
    std::string out = "k,objective,step_norm,w_norm,c_k,rho1_witness,rho2_witness\n";
    for (const IterationRecord &r : trace) {
        append_common_fields(out, r);
        out += '\n';
    }
    return out;
}

std::string trace_csv(const std::vector<MultiblockRecord> &trace) {
    std::string out = "k,objective,step_norm,w_norm,c_k,rho1_witness,rho2_witness,"
                      "step_norm_X,step_norm_Y\n";
    for (const MultiblockRecord &r : trace) {
        append_common_fields(out, r);
        out += ',';
        append_double(out, r.step_norm_x);
        out += ',';
        append_double(out, r.step_norm_y);
        out += '\n';
    }
    return out;
}

void write_trace_csv(const std::filesystem::path &path,
                     const std::vector<IterationRecord> &trace) {
    write_text_file(path, trace_csv(trace));
}

void write_trace_csv(const std::filesystem::path &path,
                     const std::vector<MultiblockRecord> &trace) {
    write_text_file(path, trace_csv(trace));
}

std::string trace_json(const std::vector<IterationRecord> &trace) {
    return trace_json_impl(trace);
}

std::string trace_json(const std::vector<MultiblockRecord> &trace) {
    return trace_json_impl(trace);
}

void write_trace_json(const std::filesystem::path &path,
                      const std::vector<IterationRecord> &trace) {
    write_text_file(path, trace_json(trace));
}

void write_trace_json(const std::filesystem::path &path,
                      const std::vector<MultiblockRecord> &trace) {
    write_text_file(path, trace_json(trace));
}

TraceColumns read_trace_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty trace file: " + path.string());
    if (line.rfind("k,objective,step_norm,w_norm,c_k", 0) != 0)
        throw std::runtime_error("unrecognized trace header in " + path.string());
    TraceColumns cols;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<double> row;
        while (std::getline(ss, field, ','))
            row.push_back(std::stod(field));
        if (row.size() < 7)
            throw std::runtime_error("short trace row in " + path.string());
        cols.k.push_back(row[0]);
        cols.objective.push_back(row[1]);
        cols.w_norm.push_back(row[3]);
    }
    return cols;
}

void write_text_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path.string());
    out << content;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace plirls
