// subfuse command-line front end: simulation studies, single fits on CSV
// data, sampling-probability export, and covariate screening.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "subfuse/config.hpp"
#include "subfuse/csv.hpp"
#include "subfuse/estimator.hpp"
#include "subfuse/sampling.hpp"
#include "subfuse/screening.hpp"
#include "subfuse/simulation.hpp"
#include "subfuse/tuning.hpp"

namespace {

using namespace subfuse;

constexpr int kExitRuntime = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw Error("cannot write " + path);
    return file;
}

int cmd_simulate(const std::string& config_path, std::optional<int> workers_override) {
    LoadedConfig loaded = load_experiment_config(config_path);
    if (workers_override) loaded.experiment.workers = *workers_override;
    const ExperimentResult result = run_experiment(loaded.experiment);
    std::ofstream file;
    std::ostream& out = open_output(file, loaded.output);
    write_results_csv(out, loaded.experiment, result);
    return 0;
}

struct FitOptions {
    std::string target_path;
    std::string external_path;
    std::string penalty = "l1";
    std::string sampler = "leverage";
    std::string criterion = "bic";
    double rate = 0.12;
    double combined_fraction = 0.5;
    int grid_size = 20;
    std::uint64_t seed = 1;
    bool no_intercept = false;
    std::string tuning_report_path;
};

SubsampleSelection make_selection(const FitOptions& opt, const RegressionDataset& target,
                                  const RegressionDataset& external) {
    const Index n = external.n();
    const double r = opt.rate * static_cast<double>(n);
    RngStream rng = RngStream::child(opt.seed, {0xf17});
    if (opt.sampler == "full") {
        SubsampleSelection sel;
        for (Index e = 0; e < n; ++e) sel.indices.push_back(e);
        sel.weights = Vector::Ones(n);
        sel.nominal_size = static_cast<double>(n);
        sel.rate = 1.0;
        return sel;
    }
    if (opt.sampler == "uniform") {
        return poisson_sample(uniform_probabilities(n, r), rng);
    }
    if (opt.sampler == "leverage") {
        return poisson_sample(optimal_probabilities(external.X, r), rng);
    }
    if (opt.sampler == "osmac") {
        const Vector pilot = fit_ols(target);
        return poisson_sample(osmac_probabilities(external.X, external.y, pilot, r).probs, rng);
    }
    if (opt.sampler == "tg") {
        const Index count = std::max<Index>(Index{1}, static_cast<Index>(std::llround(r)));
        return target_guided_select(external, fit_ols(target), count);
    }
    if (opt.sampler == "dc") {
        const Index r_total = std::max<Index>(Index{1}, static_cast<Index>(std::llround(r)));
        const double c = opt.combined_fraction;
        const Vector pilot = fit_ols(target);
        if (c >= 1.0) return target_guided_select(external, pilot, r_total);
        const double r_random = (1.0 - c) * static_cast<double>(r_total);
        const auto probs = optimal_probabilities(external.X, r_random);
        return combined_select(external, pilot, probs, r_total, c, rng);
    }
    throw ValidationError("unknown sampler '" + opt.sampler + "'");
}

int cmd_fit(const FitOptions& opt) {
    const RegressionDataset target = read_dataset_csv(opt.target_path, !opt.no_intercept);
    const RegressionDataset external = read_dataset_csv(opt.external_path, !opt.no_intercept);
    if (target.dim() != external.dim()) {
        throw DimensionMismatch("target and external CSVs have different column counts");
    }

    PenaltySpec penalty;
    if (opt.penalty == "l1") penalty.kind = PenaltyKind::L1;
    else if (opt.penalty == "l2") penalty.kind = PenaltyKind::L2;
    else throw ValidationError("penalty must be l1 or l2");

    Criterion criterion;
    if (opt.criterion == "aic") criterion = Criterion::AIC;
    else if (opt.criterion == "bic") criterion = Criterion::BIC;
    else throw ValidationError("criterion must be aic or bic");

    const SubsampleSelection sel = make_selection(opt, target, external);
    const FusedProblem problem = assemble_problem(target, external, sel, penalty);
    const Vector grid = lambda_grid(problem, opt.grid_size);
    const auto [fit, report] = select_lambda(problem, grid, criterion);

    if (!opt.tuning_report_path.empty()) {
        std::ofstream file;
        std::ostream& out = open_output(file, opt.tuning_report_path);
        write_tuning_csv(out, report);
    }

    nlohmann::json out;
    out["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
    out["lambda"] = fit.penalty.lambda;
    out["df"] = fit.df;
    out["aic"] = fit.aic;
    out["bic"] = fit.bic;
    out["selection_size"] = sel.indices.size();
    out["converged"] = fit.converged;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_screen(const std::string& target_path, double fdr, const std::string& output) {
    // Covariates as given in the file; the response is the last column.
    const RegressionDataset data = read_dataset_csv(target_path, /*add_intercept=*/false);
    const ScreeningResult result = screen_covariates(data.X, data.y, fdr);
    std::ofstream file;
    std::ostream& out = open_output(file, output);
    write_screening_csv(out, result);
    return 0;
}

int cmd_probs(const std::string& external_path, const std::string& scheme, double rate,
              const std::string& pilot_path, bool no_intercept, const std::string& output) {
    const RegressionDataset external = read_dataset_csv(external_path, !no_intercept);
    const double r = rate * static_cast<double>(external.n());
    Vector scores;
    SamplingProbabilities probs;
    if (scheme == "uniform") {
        probs = uniform_probabilities(external.n(), r);
        scores = Vector::Ones(external.n());
    } else if (scheme == "leverage") {
        scores = leverage_norms(external.X);
        probs = make_probabilities(water_fill(scores, r), r);
    } else if (scheme == "osmac") {
        if (pilot_path.empty()) {
            throw ValidationError("osmac probabilities need --pilot <target csv>");
        }
        const RegressionDataset pilot_data = read_dataset_csv(pilot_path, !no_intercept);
        if (pilot_data.dim() != external.dim()) {
            throw DimensionMismatch("pilot and external CSVs have different column counts");
        }
        const Vector pilot = fit_ols(pilot_data);
        scores = (external.y - external.X * pilot)
                     .cwiseAbs()
                     .cwiseProduct(leverage_norms(external.X));
        probs = osmac_probabilities(external.X, external.y, pilot, r).probs;
    } else {
        throw ValidationError("scheme must be uniform, leverage, or osmac");
    }
    std::ofstream file;
    std::ostream& out = open_output(file, output);
    write_probs_csv(out, scores, probs.pi);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust transfer learning by subsampling a contaminated external dataset"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Run a replication study from a JSON config");
    std::string config_path;
    std::optional<int> workers_override;
    simulate->add_option("config", config_path, "JSON experiment config")->required();
    simulate->add_option("--workers", workers_override, "override the config worker count");

    auto* fit = app.add_subcommand("fit", "Fit the fusion estimator on target/external CSVs");
    FitOptions fopt;
    fit->add_option("--target", fopt.target_path, "target CSV (last column = response)")->required();
    fit->add_option("--external", fopt.external_path, "external CSV")->required();
    fit->add_option("--penalty", fopt.penalty, "l1 or l2");
    fit->add_option("--sampler", fopt.sampler, "full, uniform, leverage, tg, osmac, or dc");
    fit->add_option("--rate", fopt.rate, "sampling rate rho in (0, 1]");
    fit->add_option("--criterion", fopt.criterion, "aic or bic");
    fit->add_option("--grid-size", fopt.grid_size, "lambda grid size");
    fit->add_option("--seed", fopt.seed, "sampling seed");
    fit->add_option("--c", fopt.combined_fraction, "target-guided share for the dc sampler");
    fit->add_option("--tuning-report", fopt.tuning_report_path, "write the per-lambda trace CSV here");
    fit->add_flag("--no-intercept", fopt.no_intercept, "do not prepend an all-ones column");

    auto* screen = app.add_subcommand("screen", "Marginal t-test screening with BH FDR control");
    std::string screen_target, screen_output;
    double fdr = 0.1;
    screen->add_option("--target", screen_target, "target CSV")->required();
    screen->add_option("--fdr", fdr, "false discovery rate level");
    screen->add_option("--output", screen_output, "output CSV (default stdout)");

    auto* probs = app.add_subcommand("probs", "Export sampling probabilities for an external CSV");
    std::string probs_external, probs_scheme = "leverage", probs_pilot, probs_output;
    double probs_rate = 0.12;
    bool probs_no_intercept = false;
    probs->add_option("--external", probs_external, "external CSV")->required();
    probs->add_option("--scheme", probs_scheme, "uniform, leverage, or osmac");
    probs->add_option("--rate", probs_rate, "sampling rate rho in (0, 1]");
    probs->add_option("--pilot", probs_pilot, "target CSV for the osmac pilot fit");
    probs->add_option("--output", probs_output, "output CSV (default stdout)");
    probs->add_flag("--no-intercept", probs_no_intercept, "do not prepend an all-ones column");

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(config_path, workers_override);
        if (fit->parsed()) return cmd_fit(fopt);
        if (screen->parsed()) return cmd_screen(screen_target, fdr, screen_output);
        if (probs->parsed()) {
            return cmd_probs(probs_external, probs_scheme, probs_rate, probs_pilot,
                             probs_no_intercept, probs_output);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const subfuse::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const subfuse::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
