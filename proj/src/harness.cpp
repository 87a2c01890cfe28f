#include "plirls/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "plirls/apps.hpp"
#include "plirls/instance_gen.hpp"
#include "plirls/io.hpp"
#include "plirls/kernels.hpp"
#include "plirls/multiblock.hpp"

namespace plirls::harness {

using nlohmann::json;

const char *kind_name(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::SparseLsq: return "sparse-lsq";
    case ProblemKind::L0Regression: return "l0-regression";
    case ProblemKind::LowRank: return "lowrank";
    case ProblemKind::Multiblock: return "multiblock";
    case ProblemKind::Custom: return "custom";
    }
    return "?";
}

ProblemKind parse_kind(const std::string &name) {
    if (name == "sparse-lsq")
        return ProblemKind::SparseLsq;
    if (name == "l0-regression")
        return ProblemKind::L0Regression;
    if (name == "lowrank")
        return ProblemKind::LowRank;
    if (name == "multiblock")
        return ProblemKind::Multiblock;
    if (name == "custom")
        return ProblemKind::Custom;
    throw ConfigError("unknown problem kind: " + name);
}

namespace {

void check_keys(const json &j, std::initializer_list<const char *> allowed,
                const std::string &context) {
    if (!j.is_object())
        throw ConfigError(context + " must be a JSON object");
    for (const auto &item : j.items()) {
        bool ok = false;
        for (const char *key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError("unknown key \"" + item.key() + "\" in " + context);
    }
}

double num_field(const json &j, const char *key, double fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number())
        throw ConfigError(std::string("field ") + key + " must be a number");
    return j[key].get<double>();
}

std::size_t count_field(const json &j, const char *key, std::size_t fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number_unsigned())
        throw ConfigError(std::string("field ") + key + " must be a nonnegative integer");
    return j[key].get<std::size_t>();
}

std::string str_field(const json &j, const char *key, const std::string &fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_string())
        throw ConfigError(std::string("field ") + key + " must be a string");
    return j[key].get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

void parse_generate(const json &j, ProblemKind kind, GenerateParams &out) {
    check_keys(j,
               {"seed", "rows", "cols", "sparsity", "noise_fraction", "noise_amplitude",
                "side", "rank", "corruption_fraction", "corruption_amplitude"},
               "instance.generate");
    if (!j.contains("seed") || !j["seed"].is_number_unsigned())
        throw ConfigError("instance.generate.seed (unsigned integer) is required");
    out.seed = j["seed"].get<std::uint64_t>();
    if (kind == ProblemKind::SparseLsq || kind == ProblemKind::L0Regression) {
        out.rows = count_field(j, "rows", 0);
        out.cols = count_field(j, "cols", 0);
        if (out.rows == 0 || out.cols == 0)
            throw ConfigError("instance.generate needs positive rows and cols");
        out.sparsity = count_field(j, "sparsity", std::max<std::size_t>(1, out.cols / 10));
        out.noise_fraction = num_field(j, "noise_fraction", 0.0);
        out.noise_amplitude = num_field(j, "noise_amplitude", 5.0);
    } else if (kind == ProblemKind::LowRank || kind == ProblemKind::Multiblock) {
        out.side = count_field(j, "side", 0);
        if (out.side == 0)
            throw ConfigError("instance.generate needs a positive side");
        out.rank = count_field(j, "rank", 1);
        out.corruption_fraction = num_field(j, "corruption_fraction", 0.05);
        out.corruption_amplitude = num_field(j, "corruption_amplitude", 3.0);
    } else {
        throw ConfigError("custom problems cannot use a generated instance");
    }
}

void parse_files(const json &j, ProblemKind kind, const std::filesystem::path &base,
                 FileSource &out) {
    check_keys(j, {"A", "b", "D", "B", "c", "ground_truth"}, "instance.files");
    auto need = [&](const char *key) -> std::filesystem::path {
        if (!j.contains(key))
            throw ConfigError(std::string("instance.files.") + key + " is required for " +
                              std::string(kind_name(kind)));
        return resolve(base, j[key].get<std::string>());
    };
    switch (kind) {
    case ProblemKind::SparseLsq:
    case ProblemKind::L0Regression:
        out.a = need("A");
        out.b = need("b");
        break;
    case ProblemKind::LowRank:
    case ProblemKind::Multiblock:
        out.d = need("D");
        break;
    case ProblemKind::Custom:
        out.bmat = need("B");
        out.coff = need("c");
        break;
    }
    if (j.contains("ground_truth"))
        out.ground_truth = resolve(base, j["ground_truth"].get<std::string>());
}

void parse_custom(const json &j, const std::filesystem::path &base,
                  CustomTermConfig &out) {
    check_keys(j, {"f", "s", "rowwise"}, "custom");
    if (j.contains("rowwise") && !j["rowwise"].get<bool>())
        throw ConfigError("custom.rowwise=false is not supported; terms are rows of B");
    if (j.contains("f")) {
        const json &f = j["f"];
        check_keys(f, {"kind", "lambda", "k", "radius", "lower", "upper"}, "custom.f");
        out.f_kind = str_field(f, "kind", "zero");
        out.f_lambda = num_field(f, "lambda", 1.0);
        out.f_k = count_field(f, "k", 0);
        out.f_radius = num_field(f, "radius", 1.0);
        if (f.contains("lower"))
            out.box_lower = f["lower"].get<Vector>();
        if (f.contains("upper"))
            out.box_upper = f["upper"].get<Vector>();
    }
    if (j.contains("s")) {
        const json &s = j["s"];
        check_keys(s, {"kind", "A", "b", "scale"}, "custom.s");
        if (str_field(s, "kind", "quadratic") != "quadratic")
            throw ConfigError("custom.s.kind must be \"quadratic\"");
        out.smooth_quadratic = true;
        out.s_a = resolve(base, str_field(s, "A", ""));
        out.s_b = resolve(base, str_field(s, "b", ""));
        out.s_scale = num_field(s, "scale", 1.0);
        if (out.s_a.empty() || out.s_b.empty())
            throw ConfigError("custom.s needs A and b files");
    }
}

void parse_algorithm(const json &j, const std::filesystem::path &base,
                     AlgorithmConfig &out) {
    check_keys(j,
               {"gamma", "epsilon", "nu", "lambda", "nuclear_weight", "l1_weight",
                "step_tol", "w_tol", "tau0", "max_iters", "x0", "continuation"},
               "algorithm");
    out.gamma = num_field(j, "gamma", 1.1);
    out.epsilon = num_field(j, "epsilon", 0.1);
    out.nu = num_field(j, "nu", 1.0);
    out.lambda = num_field(j, "lambda", 1.0);
    out.nuclear_weight = num_field(j, "nuclear_weight", 1.0);
    out.l1_weight = num_field(j, "l1_weight", 1.0);
    out.step_tol = num_field(j, "step_tol", 0.0);
    out.w_tol = num_field(j, "w_tol", 0.0);
    out.tau0 = num_field(j, "tau0", 0.0);
    out.max_iters = count_field(j, "max_iters", 100000);
    if (j.contains("x0")) {
        out.x0 = str_field(j, "x0", "zero");
        if (out.x0 != "zero" && out.x0 != "lsq" && out.x0 != "data")
            out.x0 = resolve(base, out.x0).string();
    }
    if (j.contains("continuation")) {
        const json &c = j["continuation"];
        check_keys(c, {"stages"}, "algorithm.continuation");
        out.continuation_stages = count_field(c, "stages", 0);
        if (out.continuation_stages > 40)
            throw ConfigError("algorithm.continuation.stages must be <= 40");
    }
    if (out.gamma <= 1.0)
        throw ConfigError("algorithm.gamma must be > 1");
    if (out.epsilon <= 0.0)
        throw ConfigError("algorithm.epsilon must be > 0");
    if (out.nu <= 0.0 || out.nu > 1.0)
        throw ConfigError("algorithm.nu must lie in (0, 1]");
    if (out.lambda <= 0.0)
        throw ConfigError("algorithm.lambda must be > 0");
    if (out.max_iters == 0)
        throw ConfigError("algorithm.max_iters must be positive");
}

} // namespace

RunConfig parse_config_text(const std::string &text,
                            const std::filesystem::path &base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(j, {"schema", "problem", "instance", "algorithm", "output", "custom"},
               "config");
    if (str_field(j, "schema", "") != "plirls-config/1")
        throw ConfigError("config.schema must be \"plirls-config/1\"");
    if (!j.contains("problem"))
        throw ConfigError("config.problem is required");

    RunConfig cfg;
    cfg.kind = parse_kind(j["problem"].get<std::string>());

    if (!j.contains("instance"))
        throw ConfigError("config.instance is required");
    const json &inst = j["instance"];
    check_keys(inst, {"generate", "files"}, "instance");
    const bool has_gen = inst.contains("generate");
    const bool has_files = inst.contains("files");
    if (has_gen == has_files)
        throw ConfigError("instance must contain exactly one of generate/files");
    cfg.generated = has_gen;
    if (has_gen)
        parse_generate(inst["generate"], cfg.kind, cfg.gen);
    else
        parse_files(inst["files"], cfg.kind, base_dir, cfg.files);

    if (cfg.kind == ProblemKind::Custom) {
        if (!j.contains("custom"))
            throw ConfigError("custom problems need a custom section");
        parse_custom(j["custom"], base_dir, cfg.custom);
    } else if (j.contains("custom")) {
        throw ConfigError("custom section is only valid for problem=custom");
    }

    if (j.contains("algorithm"))
        parse_algorithm(j["algorithm"], base_dir, cfg.algo);

    if (j.contains("output")) {
        const json &o = j["output"];
        check_keys(o, {"dir", "trace_csv", "trace_json", "summary"}, "output");
        cfg.out_dir = resolve(base_dir, str_field(o, "dir", "."));
        cfg.trace_csv = str_field(o, "trace_csv", "trace.csv");
        cfg.trace_json = str_field(o, "trace_json", "");
        cfg.summary = str_field(o, "summary", "summary.json");
    } else {
        cfg.out_dir = base_dir;
    }
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path &path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
    return parse_config_text(text, path.parent_path().empty()
                                       ? std::filesystem::path(".")
                                       : path.parent_path());
}

namespace {

struct LoadedInstance {
    // regression kinds
    Matrix a;
    Vector b;
    Vector x_true;
    bool has_x_true = false;
    // low-rank kinds
    Matrix d;
    Matrix low_rank_true;
    bool has_low_rank_true = false;
};

LoadedInstance materialize(const RunConfig &cfg) {
    LoadedInstance out;
    const bool regression =
        cfg.kind == ProblemKind::SparseLsq || cfg.kind == ProblemKind::L0Regression;
    if (cfg.generated) {
        if (regression) {
            RegressionInstance inst = generate_regression_instance(
                cfg.gen.seed, cfg.gen.rows, cfg.gen.cols, cfg.gen.sparsity,
                cfg.gen.noise_fraction, cfg.gen.noise_amplitude);
            out.a = std::move(inst.a);
            out.b = std::move(inst.b);
            out.x_true = std::move(inst.x_true);
            out.has_x_true = true;
        } else {
            LowRankInstance inst = generate_lowrank_instance(
                cfg.gen.seed, cfg.gen.side, cfg.gen.rank, cfg.gen.corruption_fraction,
                cfg.gen.corruption_amplitude);
            out.d = std::move(inst.d);
            out.low_rank_true = std::move(inst.low_rank_true);
            out.has_low_rank_true = true;
        }
        return out;
    }
    try {
        if (regression) {
            out.a = load_matrix(cfg.files.a);
            out.b = load_vector(cfg.files.b);
            if (!cfg.files.ground_truth.empty()) {
                out.x_true = load_vector(cfg.files.ground_truth);
                out.has_x_true = true;
            }
        } else if (cfg.kind == ProblemKind::LowRank ||
                   cfg.kind == ProblemKind::Multiblock) {
            out.d = load_matrix(cfg.files.d);
            if (!cfg.files.ground_truth.empty()) {
                out.low_rank_true = load_matrix(cfg.files.ground_truth);
                out.has_low_rank_true = true;
            }
        } else {
            out.a = load_matrix(cfg.files.bmat);
            out.b = load_vector(cfg.files.coff);
        }
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
    return out;
}

ProblemSpec build_custom_spec(const RunConfig &cfg, const LoadedInstance &inst) {
    const Matrix &bmat = inst.a;
    const Vector &coff = inst.b;
    if (coff.size() != bmat.rows)
        throw ConfigError("custom: c length must equal the rows of B");
    ProblemSpec spec;
    spec.dim = bmat.cols;
    spec.epsilon = cfg.algo.epsilon;
    spec.nu = cfg.algo.nu;

    const CustomTermConfig &c = cfg.custom;
    if (c.f_kind == "zero")
        spec.f = ProxFriendlyTerm::zero();
    else if (c.f_kind == "l1")
        spec.f = ProxFriendlyTerm::l1(c.f_lambda);
    else if (c.f_kind == "l0")
        spec.f = ProxFriendlyTerm::l0(c.f_lambda);
    else if (c.f_kind == "sparsity")
        spec.f = ProxFriendlyTerm::sparsity_constraint(c.f_k);
    else if (c.f_kind == "l1-ball")
        spec.f = ProxFriendlyTerm::l1_ball_constraint(c.f_radius);
    else if (c.f_kind == "box") {
        if (c.box_lower.size() != spec.dim || c.box_upper.size() != spec.dim)
            throw ConfigError("custom box bounds must have the problem dimension");
        spec.f = ProxFriendlyTerm::box_constraint(c.box_lower, c.box_upper);
    } else {
        throw ConfigError("unknown custom f kind: " + c.f_kind);
    }

    if (c.smooth_quadratic) {
        Matrix sa;
        Vector sb;
        try {
            sa = load_matrix(c.s_a);
            sb = load_vector(c.s_b);
        } catch (const std::exception &e) {
            throw ConfigError(e.what());
        }
        if (sa.cols != spec.dim)
            throw ConfigError("custom.s: A columns must match the problem dimension");
        spec.s = SmoothTerm::quadratic_loss(std::make_shared<DenseLinearMap>(sa),
                                            std::move(sb), c.s_scale);
    } else {
        spec.s = SmoothTerm::zero();
    }

    auto shared = std::make_shared<Matrix>(bmat);
    spec.terms.reserve(bmat.rows);
    for (std::size_t i = 0; i < bmat.rows; ++i)
        spec.terms.emplace_back(std::make_shared<MatrixRowMap>(shared, i),
                                Vector{coff[i]});
    return spec;
}

Vector initial_point(const RunConfig &cfg, const LoadedInstance &inst,
                     std::size_t dim) {
    if (cfg.algo.x0 == "zero")
        return Vector(dim, 0.0);
    if (cfg.algo.x0 == "data")
        throw ConfigError("x0=data is only available for the low-rank kinds");
    if (cfg.algo.x0 == "lsq") {
        if (cfg.kind != ProblemKind::SparseLsq && cfg.kind != ProblemKind::L0Regression)
            throw ConfigError("x0=lsq is only available for the regression kinds");
        return least_squares_start(inst.a, inst.b);
    }
    Vector x0;
    try {
        x0 = load_vector(cfg.algo.x0);
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
    if (x0.size() != dim)
        throw ConfigError("x0 file has the wrong dimension");
    return x0;
}

double relative_error(Span got, Span truth) {
    const double denom = kernels::nrm2(truth.data(), truth.size());
    const double diff = std::sqrt(kernels::nrm2sq_diff(got.data(), truth.data(),
                                                       truth.size()));
    return denom > 0.0 ? diff / denom : diff;
}

int status_exit_code(SolveStatus status) {
    switch (status) {
    case SolveStatus::Converged: return 0;
    case SolveStatus::MaxIters: return 2;
    case SolveStatus::Diverged: return 3;
    }
    return 1;
}

struct RunOutcome {
    SolveStatus status = SolveStatus::MaxIters;
    std::size_t iterations = 0;
    double final_objective = 0.0;
    double final_w_norm = 0.0;
    std::optional<double> recovery_error;
    std::string trace_csv_text;
    std::string trace_json_text;
};

template <class Record>
void merge_stage_trace(std::vector<Record> &total, std::vector<Record> stage) {
    const std::size_t offset = total.empty() ? 0 : total.back().k;
    for (Record &r : stage) {
        r.k += offset;
        total.push_back(std::move(r));
    }
}

RunOutcome run_vector_problem(const RunConfig &cfg, const LoadedInstance &inst) {
    const std::size_t stages = cfg.algo.continuation_stages;
    SolveOptions opts;
    opts.gamma = cfg.algo.gamma;
    opts.tau0 = cfg.algo.tau0;
    opts.max_iters = cfg.algo.max_iters;
    opts.step_tol = cfg.algo.step_tol;
    opts.w_tol = cfg.algo.w_tol;

    auto build = [&](double eps) -> ProblemSpec {
        switch (cfg.kind) {
        case ProblemKind::SparseLsq:
            return build_sparse_lsq(inst.a, inst.b, cfg.algo.lambda, cfg.algo.nu, eps);
        case ProblemKind::L0Regression:
            return build_l0_regression(inst.a, inst.b, cfg.algo.lambda, eps);
        default: {
            RunConfig scaled = cfg;
            scaled.algo.epsilon = eps;
            return build_custom_spec(scaled, inst);
        }
        }
    };

    Vector x = initial_point(cfg, inst, inst.a.cols);
    std::vector<IterationRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
    for (std::size_t j = 0; j <= stages; ++j) {
        const double eps = cfg.algo.epsilon * std::pow(2.0, -static_cast<double>(j));
        ProblemSpec spec = build(eps);
        SolveResult res = run_plirls(spec, std::move(x), opts);
        x = std::move(res.x);
        status = res.status;
        merge_stage_trace(trace, std::move(res.trace));
    }

    RunOutcome out;
    out.status = status;
    out.iterations = trace.size();
    out.final_objective = trace.empty() ? 0.0 : trace.back().objective;
    out.final_w_norm = trace.empty() ? 0.0 : trace.back().w_norm;
    if (inst.has_x_true)
        out.recovery_error = relative_error(x, inst.x_true);
    out.trace_csv_text = trace_csv(trace);
    out.trace_json_text = trace_json(trace);
    return out;
}

RunOutcome run_lowrank_problem(const RunConfig &cfg, const LoadedInstance &inst) {
    SolveOptions opts;
    opts.gamma = cfg.algo.gamma;
    opts.max_iters = cfg.algo.max_iters;
    opts.step_tol = cfg.algo.step_tol;
    opts.w_tol = cfg.algo.w_tol;

    Matrix x(inst.d.rows, inst.d.cols);
    if (cfg.algo.x0 == "data")
        x = inst.d;
    else if (cfg.algo.x0 != "zero")
        throw ConfigError("lowrank: x0 must be \"zero\" or \"data\"");
    std::vector<IterationRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
    const std::size_t stages = cfg.algo.continuation_stages;
    for (std::size_t j = 0; j <= stages; ++j) {
        const double eps = cfg.algo.epsilon * std::pow(2.0, -static_cast<double>(j));
        LowRankProblem prob = build_lowrank(inst.d, cfg.algo.lambda, eps);
        LowRankResult res = run_lowrank(prob, std::move(x), opts);
        x = std::move(res.x);
        status = res.status;
        merge_stage_trace(trace, std::move(res.trace));
    }

    RunOutcome out;
    out.status = status;
    out.iterations = trace.size();
    out.final_objective = trace.empty() ? 0.0 : trace.back().objective;
    out.final_w_norm = trace.empty() ? 0.0 : trace.back().w_norm;
    if (inst.has_low_rank_true)
        out.recovery_error =
            relative_error(x.data, inst.low_rank_true.data);
    out.trace_csv_text = trace_csv(trace);
    out.trace_json_text = trace_json(trace);
    return out;
}

RunOutcome run_multiblock_problem(const RunConfig &cfg, const LoadedInstance &inst) {
    MultiblockOptions opts;
    opts.max_iters = cfg.algo.max_iters;
    opts.step_tol = cfg.algo.step_tol;

    const std::size_t side = inst.d.rows;
    if (inst.d.cols != side)
        throw ConfigError("multiblock D must be square");

    Matrix x(side, side), y(side, side);
    if (cfg.algo.x0 == "data")
        x = inst.d;
    else if (cfg.algo.x0 != "zero")
        throw ConfigError("multiblock: x0 must be \"zero\" or \"data\"");
    std::vector<MultiblockRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
    const std::size_t stages = cfg.algo.continuation_stages;
    for (std::size_t j = 0; j <= stages; ++j) {
        DecompositionSpec spec;
        spec.a_op = std::make_shared<IdentityMap>(side * side);
        spec.side = side;
        spec.b = inst.d.data;
        spec.epsilon = cfg.algo.epsilon * std::pow(2.0, -static_cast<double>(j));
        spec.gamma = cfg.algo.gamma;
        spec.nuclear_weight = cfg.algo.nuclear_weight;
        spec.l1_weight = cfg.algo.l1_weight;
        MultiblockResult res = run_multiblock(spec, std::move(x), std::move(y), opts);
        x = std::move(res.x);
        y = std::move(res.y);
        status = res.status;
        merge_stage_trace(trace, std::move(res.trace));
    }

    RunOutcome out;
    out.status = status;
    out.iterations = trace.size();
    out.final_objective = trace.empty() ? 0.0 : trace.back().objective;
    out.final_w_norm = trace.empty() ? 0.0 : trace.back().w_norm;
    if (inst.has_low_rank_true)
        out.recovery_error = relative_error(x.data, inst.low_rank_true.data);
    out.trace_csv_text = trace_csv(trace);
    out.trace_json_text = trace_json(trace);
    return out;
}

void write_outputs(const RunConfig &cfg, const RunOutcome &outcome) {
    std::filesystem::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir / cfg.trace_csv, outcome.trace_csv_text);
    if (!cfg.trace_json.empty())
        write_text_file(cfg.out_dir / cfg.trace_json, outcome.trace_json_text);

    json summary;
    summary["problem"] = kind_name(cfg.kind);
    summary["status"] = status_name(outcome.status);
    summary["iterations"] = outcome.iterations;
    summary["final_objective"] = outcome.final_objective;
    summary["final_w_norm"] = outcome.final_w_norm;
    if (outcome.recovery_error)
        summary["recovery_error"] = *outcome.recovery_error;
    if (cfg.generated)
        summary["seed"] = cfg.gen.seed;
    if (cfg.algo.continuation_stages > 0) {
        summary["continuation"] = {
            {"enabled", true},
            {"stages", cfg.algo.continuation_stages},
            {"note", "epsilon continuation is a harness feature; the convergence "
                     "theory covers each fixed-epsilon stage only"},
        };
    }
    write_text_file(cfg.out_dir / cfg.summary, summary.dump(2) + "\n");
}

} // namespace

int cmd_solve(const std::filesystem::path &config_path, std::ostream &err,
              const std::filesystem::path &out_override) {
    RunConfig cfg;
    try {
        cfg = parse_config_file(config_path);
        if (!out_override.empty())
            cfg.out_dir = out_override;
        LoadedInstance inst = materialize(cfg);
        RunOutcome outcome;
        switch (cfg.kind) {
        case ProblemKind::SparseLsq:
        case ProblemKind::L0Regression:
        case ProblemKind::Custom:
            outcome = run_vector_problem(cfg, inst);
            break;
        case ProblemKind::LowRank:
            outcome = run_lowrank_problem(cfg, inst);
            break;
        case ProblemKind::Multiblock:
            outcome = run_multiblock_problem(cfg, inst);
            break;
        }
        write_outputs(cfg, outcome);
        return status_exit_code(outcome.status);
    } catch (const ConfigError &e) {
        err << "config error (" << config_path.string() << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "error (" << config_path.string() << "): " << e.what() << "\n";
        return 1;
    }
}

int cmd_solve_batch(const std::vector<std::filesystem::path> &configs,
                    std::ostream &err) {
    if (configs.empty()) {
        err << "no configs given\n";
        return 1;
    }
    if (configs.size() == 1)
        return cmd_solve(configs[0], err);

    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("PLIRLS_THREADS")) {
        char *end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed > 0)
            workers = static_cast<std::size_t>(parsed);
    }
    workers = std::min(workers, configs.size());

    std::atomic<std::size_t> next{0};
    std::vector<int> codes(configs.size(), 0);
    std::mutex err_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size())
                return;
            std::ostringstream local;
            codes[i] = cmd_solve(configs[i], local);
            if (!local.str().empty()) {
                std::lock_guard<std::mutex> lock(err_mutex);
                err << local.str();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i)
        pool.emplace_back(worker);
    for (std::thread &t : pool)
        t.join();

    int aggregate = 0;
    for (int code : codes) {
        if (code == 1)
            return 1;
        aggregate = std::max(aggregate, code);
    }
    return aggregate;
}

int cmd_generate(ProblemKind kind, const GenerateParams &params,
                 const std::filesystem::path &out_dir, std::ostream &err) {
    try {
        std::filesystem::create_directories(out_dir);
        json meta;
        meta["kind"] = kind_name(kind);
        meta["seed"] = params.seed;
        if (kind == ProblemKind::SparseLsq || kind == ProblemKind::L0Regression) {
            RegressionInstance inst = generate_regression_instance(
                params.seed, params.rows, params.cols, params.sparsity,
                params.noise_fraction, params.noise_amplitude);
            save_matrix(out_dir / "A.txt", inst.a);
            save_vector(out_dir / "b.txt", inst.b);
            save_vector(out_dir / "x_true.txt", inst.x_true);
            meta["rows"] = params.rows;
            meta["cols"] = params.cols;
            meta["sparsity"] = params.sparsity;
            meta["noise_fraction"] = params.noise_fraction;
            meta["noise_amplitude"] = params.noise_amplitude;
            meta["corrupted_count"] = inst.corrupted.size();
        } else if (kind == ProblemKind::LowRank || kind == ProblemKind::Multiblock) {
            LowRankInstance inst = generate_lowrank_instance(
                params.seed, params.side, params.rank, params.corruption_fraction,
                params.corruption_amplitude);
            save_matrix(out_dir / "D.txt", inst.d);
            save_matrix(out_dir / "low_rank_true.txt", inst.low_rank_true);
            save_matrix(out_dir / "sparse_true.txt", inst.sparse_true);
            meta["side"] = params.side;
            meta["rank"] = params.rank;
            meta["corruption_fraction"] = params.corruption_fraction;
            meta["corruption_amplitude"] = params.corruption_amplitude;
        } else {
            err << "generate does not support custom problems\n";
            return 1;
        }
        write_text_file(out_dir / "meta.json", meta.dump(2) + "\n");
        return 0;
    } catch (const std::exception &e) {
        err << "generate failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_trace_plot(const std::filesystem::path &trace_path,
                   const std::filesystem::path &out_path, std::ostream &err) {
    try {
        TraceColumns cols = read_trace_csv(trace_path);
        std::string out = "# k objective w_norm\n";
        for (std::size_t i = 0; i < cols.k.size(); ++i) {
            out += std::to_string(static_cast<std::size_t>(cols.k[i]));
            out += ' ';
            out += format_double(cols.objective[i]);
            out += ' ';
            out += format_double(cols.w_norm[i]);
            out += '\n';
        }
        write_text_file(out_path, out);
        return 0;
    } catch (const std::exception &e) {
        err << "trace-plot failed: " << e.what() << "\n";
        return 1;
    }
}

} // namespace plirls::harness
