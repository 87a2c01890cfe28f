// plirls command line front end: synthetic instance generation, config-driven
// solves, invariant self-checks, and trace plotting data.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plirls/harness.hpp"

int main(int argc, char **argv) {
    using namespace plirls::harness;

    CLI::App app{"PL-IRLS solver for nonconvex nonsmooth composite problems"};
    app.require_subcommand(1);

    // solve
    auto *solve = app.add_subcommand("solve", "run one or more JSON configs");
    std::vector<std::string> config_paths;
    std::string out_dir;
    solve->add_option("--config", config_paths, "config file (repeatable)")
        ->required()
        ->expected(-1);
    solve->add_option("--out", out_dir, "output directory override (single config)");

    // generate
    auto *gen = app.add_subcommand("generate", "write a synthetic instance");
    std::string gen_kind = "sparse-lsq";
    GenerateParams params;
    std::string gen_out = ".";
    gen->add_option("--kind", gen_kind, "sparse-lsq | l0-regression | lowrank | multiblock")
        ->required();
    gen->add_option("--seed", params.seed, "64-bit seed")->required();
    gen->add_option("--rows", params.rows, "rows of A (regression kinds)");
    gen->add_option("--cols", params.cols, "cols of A (regression kinds)");
    gen->add_option("--sparsity", params.sparsity, "nonzeros in the ground truth");
    gen->add_option("--noise-fraction", params.noise_fraction,
                    "fraction of corrupted entries of b");
    gen->add_option("--noise-amplitude", params.noise_amplitude, "impulse amplitude");
    gen->add_option("--side", params.side, "matrix side (low-rank kinds)");
    gen->add_option("--rank", params.rank, "ground-truth rank");
    gen->add_option("--corruption-fraction", params.corruption_fraction,
                    "fraction of corrupted entries of D");
    gen->add_option("--corruption-amplitude", params.corruption_amplitude,
                    "impulse amplitude");
    gen->add_option("--out", gen_out, "output directory");

    // check
    auto *check = app.add_subcommand("check", "run the oracle/invariant suites");
    std::string level = "quick";
    check->add_option("--level", level, "quick | full")
        ->check(CLI::IsMember({"quick", "full"}));

    // trace-plot
    auto *plot = app.add_subcommand("trace-plot",
                                    "emit a gnuplot-ready objective/w_norm data file");
    std::string trace_in, plot_out = "trace.dat";
    plot->add_option("trace", trace_in, "trace CSV file")->required();
    plot->add_option("--out", plot_out, "output data file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            if (config_paths.size() == 1)
                return cmd_solve(config_paths[0], std::cerr, out_dir);
            if (!out_dir.empty()) {
                std::cerr << "--out is only valid with a single config\n";
                return 1;
            }
            std::vector<std::filesystem::path> paths(config_paths.begin(),
                                                     config_paths.end());
            return cmd_solve_batch(paths, std::cerr);
        }
        if (gen->parsed()) {
            ProblemKind kind = parse_kind(gen_kind);
            if ((kind == ProblemKind::SparseLsq || kind == ProblemKind::L0Regression) &&
                (params.rows == 0 || params.cols == 0)) {
                std::cerr << "generate: --rows and --cols are required for " << gen_kind
                          << "\n";
                return 1;
            }
            if ((kind == ProblemKind::LowRank || kind == ProblemKind::Multiblock) &&
                params.side == 0) {
                std::cerr << "generate: --side is required for " << gen_kind << "\n";
                return 1;
            }
            if (params.rank == 0)
                params.rank = 1;
            if (params.sparsity == 0 && params.cols > 0)
                params.sparsity = std::max<std::size_t>(1, params.cols / 10);
            return cmd_generate(kind, params, gen_out, std::cerr);
        }
        if (check->parsed())
            return cmd_check(level == "full" ? CheckLevel::Full : CheckLevel::Quick,
                             std::cout);
        if (plot->parsed())
            return cmd_trace_plot(trace_in, plot_out, std::cerr);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
