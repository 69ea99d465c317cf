// Command line front end: fit, predict, eval, synth and validate
// subcommands over the core library. Standard output carries
// machine-readable results; progress goes to standard error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mvdnmf/data_io.hpp"
#include "mvdnmf/errors.hpp"
#include "mvdnmf/eval.hpp"
#include "mvdnmf/inference.hpp"
#include "mvdnmf/synthetic.hpp"

using namespace mvdnmf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

struct HyperFlags {
    double alpha = 0.1;
    double beta = 0.1;
    double gamma = 1.0;
    double lambda = 1e-6;
    int k1 = 4, k2 = 2, k3 = 4, k4 = 2;
    std::string loss = "ce";
    int max_iters = 300;
    double tol = 1e-5;
    std::uint64_t seed = 0;

    Hyperparams to_hyperparams() const {
        Hyperparams hp;
        hp.alpha = alpha;
        hp.beta = beta;
        hp.gamma = gamma;
        hp.lambda_ridge = lambda;
        hp.dims = {k1, k2, k3, k4};
        if (loss == "ce")
            hp.loss = LossMode::CrossEntropy;
        else if (loss == "mse")
            hp.loss = LossMode::SquaredError;
        else
            throw DataError("unknown loss '" + loss + "', expected ce or mse");
        hp.max_iters = max_iters;
        hp.rel_tol = tol;
        hp.seed = seed;
        return hp;
    }
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& flags) {
    cmd->add_option("--alpha", flags.alpha, "Orthogonality weight")
        ->capture_default_str();
    cmd->add_option("--beta", flags.beta, "Sparsity weight")->capture_default_str();
    cmd->add_option("--gamma", flags.gamma, "Label loss weight")->capture_default_str();
    cmd->add_option("--lambda", flags.lambda, "Ridge term of the projection solves")
        ->capture_default_str();
    cmd->add_option("--k1", flags.k1, "Common discriminative factors")
        ->capture_default_str();
    cmd->add_option("--k2", flags.k2, "Common non-discriminative factors")
        ->capture_default_str();
    cmd->add_option("--k3", flags.k3, "View-specific discriminative factors")
        ->capture_default_str();
    cmd->add_option("--k4", flags.k4, "View-specific non-discriminative factors")
        ->capture_default_str();
    cmd->add_option("--loss", flags.loss, "Label loss: ce or mse")
        ->capture_default_str();
    cmd->add_option("--max-iters", flags.max_iters, "Iteration cap")
        ->capture_default_str();
    cmd->add_option("--tol", flags.tol, "Relative objective change for convergence")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "Random seed")->capture_default_str();
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// One key=value override per token; used by the eval --grid file.
void apply_override(HyperFlags& flags, const std::string& key, const std::string& value) {
    if (key == "alpha") flags.alpha = std::stod(value);
    else if (key == "beta") flags.beta = std::stod(value);
    else if (key == "gamma") flags.gamma = std::stod(value);
    else if (key == "lambda") flags.lambda = std::stod(value);
    else if (key == "k1") flags.k1 = std::stoi(value);
    else if (key == "k2") flags.k2 = std::stoi(value);
    else if (key == "k3") flags.k3 = std::stoi(value);
    else if (key == "k4") flags.k4 = std::stoi(value);
    else if (key == "loss") flags.loss = value;
    else if (key == "max-iters") flags.max_iters = std::stoi(value);
    else if (key == "tol") flags.tol = std::stod(value);
    else if (key == "seed") flags.seed = std::stoull(value);
    else throw DataError("unknown grid key '" + key + "'");
}

std::vector<std::pair<std::string, HyperFlags>> read_grid(const std::string& path,
                                                          const HyperFlags& base) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grid file " + path);
    std::vector<std::pair<std::string, HyperFlags>> grid;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[line.find_first_not_of(" \t")] == '#') continue;
        HyperFlags flags = base;
        std::stringstream ss(line);
        std::string token;
        std::string label;
        while (ss >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos)
                throw DataError("grid line '" + line + "': expected key=value tokens");
            apply_override(flags, token.substr(0, eq), token.substr(eq + 1));
            if (!label.empty()) label += ",";
            label += token;
        }
        grid.emplace_back("mvdnmf[" + label + "]", flags);
    }
    if (grid.empty()) throw DataError("grid file " + path + " has no entries");
    return grid;
}

int run_fit(const std::string& data_path, const std::string& out_path,
            const HyperFlags& flags, const std::string& trace_path,
            const std::string& embeddings_path) {
    const MultiViewDataset dataset = io::load_dataset(data_path);
    const Hyperparams hp = flags.to_hyperparams();
    const solver::FitResult result =
        solver::fit(dataset, hp, [](const TraceRecord& rec) {
            std::fprintf(stderr, "iter=%d total=%.10g\n", rec.iteration, rec.total);
        });

    io::ModelMeta meta;
    meta.iterations = result.trace.iterations();
    meta.final_objective = result.final_objective.total;
    meta.status = solver::fit_status_name(result.status);
    io::save_model(result.model, hp, meta, out_path);
    if (!trace_path.empty()) io::export_trace(result.trace, trace_path);
    if (!embeddings_path.empty())
        io::export_embeddings(result.model, dataset, embeddings_path);

    std::cout << "status=" << meta.status << "\n"
              << "iterations=" << meta.iterations << "\n"
              << "objective=" << format_double(meta.final_objective) << "\n"
              << "model=" << out_path << "\n";
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
    const io::LoadedModel loaded = io::load_model(model_path);
    const MultiViewDataset dataset = io::load_dataset(data_path);
    const FoldInResult folded = fold_in(loaded.model, dataset.views, loaded.hp);
    const Matrix probs = predict_proba(loaded.model, folded.coefficients);
    const std::vector<int> labels = predict_labels(probs);

    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write " + out_path);
    out << "instance,predicted";
    for (int i = 0; i < loaded.model.num_classes; ++i) out << ",p" << i;
    out << '\n';
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        out << j << ',' << labels[j];
        for (Eigen::Index i = 0; i < probs.rows(); ++i)
            out << ',' << format_double(probs(i, j));
        out << '\n';
    }
    std::cout << "predictions=" << out_path << "\n"
              << "instances=" << probs.cols() << "\n";
    return kExitOk;
}

int run_eval(const std::string& data_path, const HyperFlags& flags, int folds,
             int repeats, int jobs, const std::string& grid_path,
             bool with_baselines, const std::string& out_path) {
    const MultiViewDataset dataset = io::load_dataset(data_path);
    const io::DatasetManifest manifest = io::read_manifest(data_path);
    const eval::CrossValOptions options{folds, repeats, jobs};

    std::vector<std::pair<std::string, HyperFlags>> runs;
    if (grid_path.empty())
        runs.emplace_back("mvdnmf", flags);
    else
        runs = read_grid(grid_path, flags);

    std::vector<eval::MethodScores> methods;
    for (const auto& [name, run_flags] : runs) {
        const Hyperparams hp = run_flags.to_hyperparams();
        methods.push_back({name, eval::cross_validate(dataset, hp, options)});
        std::fprintf(stderr, "%s: mean=%.4f std=%.4f\n", name.c_str(),
                     methods.back().result.mean, methods.back().result.stddev);
    }
    if (with_baselines) {
        const Hyperparams hp = flags.to_hyperparams();
        for (int v = 0; v < dataset.num_views(); ++v)
            methods.push_back(
                {"knn_view" + std::to_string(v),
                 eval::knn_cross_validate(dataset, options, eval::KnnSpace::SingleView,
                                          v, hp.seed)});
        methods.push_back(
            {"knn_concat",
             eval::knn_cross_validate(dataset, options, eval::KnnSpace::Concatenated,
                                      0, hp.seed)});
        methods.push_back(
            {"nmf_view0",
             eval::nmf_cross_validate(dataset, hp, options, 0, hp.dims.total())});
    }

    if (out_path.empty())
        std::cout << eval::results_csv_string(methods, manifest.name);
    else
        eval::write_results_csv(methods, manifest.name, out_path);
    return kExitOk;
}

int run_synth(const SyntheticSpec& spec, const std::string& out_dir,
              const std::string& name) {
    const SyntheticData data = generate_synthetic(spec);
    const std::string manifest = io::save_dataset(data.dataset, out_dir, name);
    std::cout << "manifest=" << manifest << "\n"
              << "instances=" << data.dataset.num_instances() << "\n"
              << "views=" << data.dataset.num_views() << "\n"
              << "classes=" << data.dataset.num_classes << "\n";
    if (!spec.class_coverage_ok())
        std::fprintf(stderr,
                     "warning: k1+k3 < classes, some classes get no "
                     "discriminative component\n");
    return kExitOk;
}

int run_validate(const std::string& data_path, const std::string& model_path) {
    const MultiViewDataset dataset = io::load_dataset(data_path);
    std::cout << "dataset=ok\n";
    if (!model_path.empty()) {
        const io::LoadedModel loaded = io::load_model(model_path);
        const std::vector<Violation> violations = validate(loaded.model, dataset);
        if (!violations.empty()) {
            for (const Violation& v : violations) std::cout << v.to_string() << "\n";
            return kExitData;
        }
        std::cout << "model=ok\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view discriminant non-negative matrix factorization toolkit"};
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Factorize a dataset and save the model");
    std::string fit_data, fit_out, fit_trace, fit_embeddings;
    HyperFlags fit_flags;
    fit_cmd->add_option("--data", fit_data, "Dataset manifest path")->required();
    fit_cmd->add_option("--out", fit_out, "Output model path")->required();
    add_hyper_flags(fit_cmd, fit_flags);
    fit_cmd->add_option("--trace", fit_trace, "Write the per-iteration trace CSV here");
    fit_cmd->add_option("--embeddings", fit_embeddings,
                        "Write the discriminative feature CSV here");

    // predict
    auto* predict_cmd =
        app.add_subcommand("predict", "Predict labels for a dataset with a saved model");
    std::string predict_model, predict_data, predict_out;
    predict_cmd->add_option("--model", predict_model, "Model path")->required();
    predict_cmd->add_option("--data", predict_data, "Dataset manifest path")->required();
    predict_cmd->add_option("--out", predict_out, "Output CSV path")->required();

    // eval
    auto* eval_cmd =
        app.add_subcommand("eval", "Stratified cross-validation with accuracy stats");
    std::string eval_data, eval_grid, eval_out;
    HyperFlags eval_flags;
    int eval_folds = 5, eval_repeats = 10, eval_jobs = 1;
    bool eval_baselines = false;
    eval_cmd->add_option("--data", eval_data, "Dataset manifest path")->required();
    add_hyper_flags(eval_cmd, eval_flags);
    eval_cmd->add_option("--folds", eval_folds, "Folds")->capture_default_str();
    eval_cmd->add_option("--repeats", eval_repeats, "Repeats")->capture_default_str();
    eval_cmd->add_option("--jobs", eval_jobs, "Folds evaluated in parallel")
        ->capture_default_str();
    eval_cmd->add_option("--grid", eval_grid,
                         "File of key=value hyperparameter combinations");
    eval_cmd->add_flag("--with-baselines", eval_baselines,
                       "Also score 1-NN and plain-NMF baselines");
    eval_cmd->add_option("--out", eval_out, "Results CSV path (stdout when absent)");

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a planted-model synthetic dataset");
    SyntheticSpec spec;
    std::string synth_dir, synth_name = "synthetic";
    synth_cmd->add_option("--out-dir", synth_dir, "Output directory")->required();
    synth_cmd->add_option("--name", synth_name, "Dataset name")->capture_default_str();
    synth_cmd->add_option("--n", spec.n, "Instances")->capture_default_str();
    synth_cmd->add_option("--classes", spec.c, "Classes")->capture_default_str();
    synth_cmd->add_option("--views", spec.n_v, "Views")->capture_default_str();
    synth_cmd
        ->add_option("--feature-dims", spec.m,
                     "Per-view feature dimensions, e.g. --feature-dims 30 40")
        ->expected(-1);
    synth_cmd->add_option("--k1", spec.dims.k1, "Common discriminative factors")
        ->capture_default_str();
    synth_cmd->add_option("--k2", spec.dims.k2, "Common non-discriminative factors")
        ->capture_default_str();
    synth_cmd->add_option("--k3", spec.dims.k3, "View-specific discriminative factors")
        ->capture_default_str();
    synth_cmd->add_option("--k4", spec.dims.k4, "View-specific non-discriminative factors")
        ->capture_default_str();
    synth_cmd->add_option("--sigma", spec.sigma, "Noise level")->capture_default_str();
    synth_cmd->add_option("--delta", spec.delta, "Class separation strength")
        ->capture_default_str();
    synth_cmd->add_option("--seed", spec.seed, "Random seed")->capture_default_str();

    // validate
    auto* validate_cmd =
        app.add_subcommand("validate", "Check a dataset (and optionally a model)");
    std::string validate_data, validate_model;
    validate_cmd->add_option("--data", validate_data, "Dataset manifest path")
        ->required();
    validate_cmd->add_option("--model", validate_model, "Model path to check too");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fit_cmd->parsed())
            return run_fit(fit_data, fit_out, fit_flags, fit_trace, fit_embeddings);
        if (predict_cmd->parsed())
            return run_predict(predict_model, predict_data, predict_out);
        if (eval_cmd->parsed())
            return run_eval(eval_data, eval_flags, eval_folds, eval_repeats, eval_jobs,
                            eval_grid, eval_baselines, eval_out);
        if (synth_cmd->parsed()) return run_synth(spec, synth_dir, synth_name);
        if (validate_cmd->parsed()) return run_validate(validate_data, validate_model);
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
