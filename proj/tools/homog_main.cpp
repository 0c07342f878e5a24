// homog — outcome-homogenization measurement CLI.
//
// Subcommands: metrics (one matrix), experiment (fixed/disjoint study),
// correlate (metric series table), verify (fast path vs. brute-force
// oracles). Exit codes: 0 success, 1 internal disagreement, 2 input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homog/dataio.hpp"
#include "homog/errors.hpp"
#include "homog/experiment.hpp"
#include "homog/metrics.hpp"
#include "homog/parallel.hpp"
#include "homog/reference.hpp"
#include "homog/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDisagreement = 1;
constexpr int kExitInputError = 2;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("HOMOG_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw homog::InvalidArgument("HOMOG_SEED is not an integer: " + std::string(env));
        }
    }
    return homog::kDefaultSplitSeed;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw homog::InvalidArgument("cannot open input file: " + path);
    return in;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw homog::InvalidArgument("cannot open output file: " + path);
    out << bytes;
}

homog::ReportFormat parse_format(const std::string& name) {
    if (name == "json") return homog::ReportFormat::Json;
    if (name == "csv") return homog::ReportFormat::Csv;
    throw homog::InvalidArgument("unknown format: " + name);
}

// ---------------------------------------------------------------------------
// metrics

int run_metrics(const std::string& input, const std::string& weighting, bool loss_metrics,
                const std::string& output, const std::string& format) {
    auto in = open_input(input);
    const homog::OutcomeMatrix matrix = homog::load_outcome_csv(in);

    const homog::ValidationReport validation = homog::validate(matrix);

    homog::MetricsRequest request;
    request.loss_metrics = loss_metrics;
    if (weighting == "average") {
        request.group_uniform = request.group_worst = false;
    } else if (weighting == "uniform") {
        request.group_average = request.group_worst = false;
    } else if (weighting == "worst") {
        request.group_average = request.group_uniform = false;
    } else if (weighting != "all") {
        throw homog::InvalidArgument("unknown group weighting: " + weighting);
    }

    homog::MetricsReport report = homog::compute_metrics_report(matrix, request);
    for (const auto& violation : validation.violations) {
        report.warnings.push_back("validation: " + violation.message);
    }

    const std::string bytes = homog::write_report(report, parse_format(format));
    if (output.empty()) {
        std::cout << bytes;
    } else {
        write_file(output, bytes);
    }

    std::cout << "metrics: " << matrix.n_individuals() << " individuals x "
              << matrix.n_deployments() << " deployments";
    if (report.oh_individual.is_defined()) {
        std::cout << ", oh_individual = " << report.oh_individual.value;
    } else {
        std::cout << ", oh_individual degenerate (no expected systemic failures)";
    }
    std::cout << "\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";

    return validation.ok() ? kExitOk : kExitInputError;
}

// ---------------------------------------------------------------------------
// experiment

homog::TabularDataset load_experiment_dataset(const std::string& spec,
                                              const std::vector<std::string>& tasks,
                                              const std::string& group_col,
                                              std::uint64_t seed) {
    if (spec == "synthetic") {
        return homog::synthesize_dataset(homog::kSyntheticRows, homog::kSyntheticDims,
                                         homog::kSyntheticTasks, homog::kSyntheticSharedSignal,
                                         homog::kSyntheticLabelNoise, homog::kSyntheticGroups,
                                         seed);
    }
    auto in = open_input(spec);
    if (!tasks.empty()) {
        std::optional<std::string> group;
        if (!group_col.empty()) group = group_col;
        return homog::load_tabular_csv(in, tasks, group, seed);
    }
    return homog::load_german_credit(in, seed);
}

int run_experiment(const std::string& dataset_spec, const std::vector<std::string>& tasks,
                   const std::string& group_col, const std::vector<std::string>& protocols,
                   const std::vector<std::size_t>& sizes, const std::string& model,
                   std::uint64_t seed, std::size_t trials_samples, std::size_t trials_seeds,
                   const std::string& output_dir, unsigned threads) {
    const homog::TabularDataset dataset =
        load_experiment_dataset(dataset_spec, tasks, group_col, seed);

    homog::StudyConfig config;
    config.train_sizes = sizes;
    config.n_data_samples = trials_samples;
    config.n_seeds_per_sample = trials_seeds;
    config.model_family =
        model == "mlp" ? homog::ModelFamily::Mlp : homog::ModelFamily::Logreg;
    if (model != "mlp" && model != "logreg") {
        throw homog::InvalidArgument("unknown model family: " + model);
    }
    config.base_seed = seed;
    config.n_threads = threads;

    std::filesystem::create_directories(output_dir);

    std::ostringstream combined;
    combined << "protocol,n,metric,mean,stderr\n";
    for (const auto& name : protocols) {
        if (name == "fixed") {
            config.protocol = homog::Protocol::Fixed;
        } else if (name == "disjoint") {
            config.protocol = homog::Protocol::Disjoint;
        } else {
            throw homog::InvalidArgument("unknown protocol: " + name);
        }

        const homog::StudyResult result = homog::run_study(dataset, config);
        const std::string json_path = output_dir + "/study_" + name + ".json";
        write_file(json_path, homog::write_report(result, homog::ReportFormat::Json));

        std::istringstream csv(homog::write_report(result, homog::ReportFormat::Csv));
        std::string line;
        std::getline(csv, line);  // drop the per-study header
        while (std::getline(csv, line)) combined << line << "\n";

        std::cout << "protocol " << name << ": " << result.trials.size() << " trials, wrote "
                  << json_path << "\n";
        for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
    }
    write_file(output_dir + "/plot.csv", combined.str());
    std::cout << "wrote " << output_dir << "/plot.csv\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// correlate

int run_correlate(const std::string& input, std::size_t permutations, std::uint64_t seed,
                  const std::string& output, const std::string& format) {
    auto in = open_input(input);
    std::vector<std::string> names;
    std::vector<std::vector<double>> series;
    homog::load_series_csv(in, names, series);

    // Single-threaded by contract; the permutation loop is thread-invariant
    // anyway, so this only trades CPU, never results.
    const homog::CorrelationReport report =
        homog::correlate_all(names, series, permutations, seed, 1);
    const std::string bytes = homog::write_report(report, parse_format(format));
    if (output.empty()) {
        std::cout << bytes;
    } else {
        write_file(output, bytes);
    }

    std::cout << "correlate: " << names.size() << " series, " << report.pairs.size()
              << " pairs, " << permutations << " permutations\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const std::string& input, std::size_t fuzz, std::uint64_t seed, bool inject_fault) {
    std::vector<std::string> disagreements;
    std::size_t checked = 0;

    if (!input.empty()) {
        auto in = open_input(input);
        const homog::OutcomeMatrix matrix = homog::load_outcome_csv(in);
        disagreements = homog::reference::verify_against_oracle(matrix);
        ++checked;
    }
    if (fuzz > 0) {
        homog::rng::Engine engine(seed);
        homog::reference::FuzzOptions options;
        for (std::size_t i = 0; i < fuzz && disagreements.empty(); ++i) {
            const homog::OutcomeMatrix matrix =
                homog::reference::random_outcome_matrix(engine, options);
            disagreements = homog::reference::verify_against_oracle(matrix);
            ++checked;
        }
    }
    if (checked == 0) {
        throw homog::InvalidArgument("verify needs --input and/or --fuzz");
    }

    if (inject_fault && disagreements.empty()) {
        // Test-only hook: prove the harness reports disagreements.
        disagreements.push_back("oh_individual: injected fault");
    }

    if (!disagreements.empty()) {
        std::cout << "verify: FAIL after " << checked << " matrices\n";
        std::cout << "  first disagreement: " << disagreements.front() << "\n";
        return kExitDisagreement;
    }
    std::cout << "verify: OK, " << checked << " matrices, all metrics agree with the oracle\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outcome-homogenization metrics and data-sharing experiments"};
    app.require_subcommand(1);
    app.set_config("--config");
    app.failure_message(CLI::FailureMessage::simple);

    unsigned threads = homog::default_thread_count();
    app.add_option("--threads", threads, "Cap worker threads (default: machine parallelism)");

    // Let global options like --threads appear after the subcommand too.
    const auto subcommand = [&app](const char* name, const char* description) {
        CLI::App* cmd = app.add_subcommand(name, description);
        cmd->fallthrough();
        return cmd;
    };

    // metrics
    auto* metrics_cmd = subcommand("metrics", "Compute all metrics for one outcome CSV");
    std::string metrics_input, metrics_output, metrics_format = "json";
    std::string weighting = "all";
    bool loss_metrics = false;
    metrics_cmd->add_option("--input", metrics_input, "Outcome CSV path")->required();
    metrics_cmd->add_option("--group-weighting", weighting, "average|uniform|worst|all");
    metrics_cmd->add_flag("--loss-metrics", loss_metrics, "Include loss-based metrics");
    metrics_cmd->add_option("--output", metrics_output, "Report path (stdout if omitted)");
    metrics_cmd->add_option("--format", metrics_format, "json|csv");

    // experiment
    auto* exp_cmd = subcommand("experiment", "Run a fixed/disjoint data-sharing study");
    std::string dataset_spec, group_col, model = "logreg";
    std::vector<std::string> tasks;
    std::vector<std::string> protocols = {"fixed", "disjoint"};
    std::vector<std::size_t> sizes = {50, 100, 200, 400};
    std::size_t trials_samples = 5, trials_seeds = 5;
    std::string exp_output = "study_out";
    std::uint64_t exp_seed = 0;
    bool exp_seed_given = false;
    exp_cmd->add_option("--dataset", dataset_spec,
                        "Tabular CSV path (with --tasks), German Credit path, or 'synthetic'")
        ->required();
    exp_cmd->add_option("--tasks", tasks, "Task column names for tabular CSV")->delimiter(',');
    exp_cmd->add_option("--group-col", group_col, "Group column name for tabular CSV");
    exp_cmd->add_option("--protocols", protocols, "Subset of fixed,disjoint")->delimiter(',');
    exp_cmd->add_option("--sizes", sizes, "Training sizes n")->delimiter(',');
    exp_cmd->add_option("--model", model, "logreg|mlp");
    exp_cmd->add_option("--seed", exp_seed, "Base seed")->capture_default_str();
    exp_cmd->add_option("--trials-samples", trials_samples, "Data samples per size");
    exp_cmd->add_option("--trials-seeds", trials_seeds, "Training seeds per sample");
    exp_cmd->add_option("--output", exp_output, "Output directory")->required();

    // correlate
    auto* corr_cmd = subcommand("correlate", "All-pairs correlations over metric series");
    std::string corr_input, corr_output, corr_format = "json", pairs = "all";
    std::size_t permutations = 10000;
    std::uint64_t corr_seed = 0;
    bool corr_seed_given = false;
    corr_cmd->add_option("--input", corr_input, "Metric series CSV")->required();
    corr_cmd->add_option("--pairs", pairs, "Pair selection (only 'all' is supported)");
    corr_cmd->add_option("--permutations", permutations, "Permutation-test iterations");
    corr_cmd->add_option("--seed", corr_seed, "Permutation seed");
    corr_cmd->add_option("--output", corr_output, "Report path (stdout if omitted)");
    corr_cmd->add_option("--format", corr_format, "json|csv");

    // verify
    auto* verify_cmd = subcommand("verify", "Cross-check fast metrics against oracles");
    std::string verify_input;
    std::size_t fuzz = 0;
    std::uint64_t verify_seed = 0;
    bool verify_seed_given = false;
    bool inject_fault = false;
    verify_cmd->add_option("--input", verify_input, "Outcome CSV to check");
    verify_cmd->add_option("--fuzz", fuzz, "Number of random matrices to check");
    verify_cmd->add_option("--seed", verify_seed, "Fuzz seed");
    verify_cmd
        ->add_flag("--inject-fault", inject_fault,
                   "Force a reported disagreement (harness self-test)")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);

        exp_seed_given = exp_cmd->count("--seed") > 0;
        corr_seed_given = corr_cmd->count("--seed") > 0;
        verify_seed_given = verify_cmd->count("--seed") > 0;

        if (metrics_cmd->parsed()) {
            return run_metrics(metrics_input, weighting, loss_metrics, metrics_output,
                               metrics_format);
        }
        if (exp_cmd->parsed()) {
            if (!exp_seed_given) exp_seed = default_seed();
            return run_experiment(dataset_spec, tasks, group_col, protocols, sizes, model,
                                  exp_seed, trials_samples, trials_seeds, exp_output, threads);
        }
        if (corr_cmd->parsed()) {
            if (!corr_seed_given) corr_seed = default_seed();
            if (pairs != "all") throw homog::InvalidArgument("--pairs supports only 'all'");
            return run_correlate(corr_input, permutations, corr_seed, corr_output, corr_format);
        }
        if (verify_cmd->parsed()) {
            if (!verify_seed_given) verify_seed = default_seed();
            return run_verify(verify_input, fuzz, verify_seed, inject_fault);
        }
        return kExitInputError;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    } catch (const homog::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const homog::InvalidArgument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const homog::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDisagreement;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDisagreement;
    }
}
