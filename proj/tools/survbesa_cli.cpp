// survbesa command-line tool: synthetic data, fitting, evaluation and benchmark harness.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "survbesa/experiment.hpp"

namespace {

using namespace survbesa;
using nlohmann::json;

/// Writes to `path`, or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct HyperFlags {
    Hyperparameters h;

    void add(CLI::App* app) {
        app->add_option("--tau", h.tau, "Beran kernel temperature");
        app->add_option("--learners", h.learners, "number of Beran estimators");
        app->add_option("--fraction", h.fraction, "subset size as a fraction of the training set");
        app->add_option("--step-size", h.step_size, "Adam learning rate / solver step");
        app->add_option("--epsilon", h.epsilon, "contamination weight");
        app->add_option("--phi", h.phi, "contamination softmax temperature");
        app->add_option("--lambda", h.lambda, "ridge weight of the contamination problem");
        app->add_option("--epochs", h.epochs, "Adam epochs");
        app->add_option("--solver-steps", h.solver_steps, "projected subgradient iterations");
    }
};

struct ExperimentFlags {
    std::string config_path;
    std::string data;
    std::optional<int> repetitions;
    std::optional<int> budget;
    std::vector<std::string> models;
    std::optional<Index> n;
    std::optional<double> p, c, k;
    std::uint64_t seed = 0;

    void add(CLI::App* app, bool seed_required) {
        app->add_option("--config", config_path, "JSON experiment configuration");
        app->add_option("--data", data, "dataset CSV (synthetic data when omitted)");
        app->add_option("--repetitions", repetitions, "number of repetitions");
        app->add_option("--budget", budget, "tuning trials per model and repetition");
        app->add_option("--models", models, "survbesa, survbesa-contam, bagging, single-beran");
        app->add_option("--n", n, "synthetic training size");
        app->add_option("--p", p, "synthetic probability of an uncensored record");
        app->add_option("--c", c, "synthetic mean-oscillation parameter");
        app->add_option("--k", k, "synthetic Weibull shape");
        auto* s = app->add_option("--seed", seed, "master seed");
        if (seed_required) s->required();
    }

    ExperimentConfig build() const {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + config_path + "'");
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
            }
        }
        ExperimentConfig cfg = ExperimentConfig::from_json(j);
        if (!data.empty()) cfg.data_path = data;
        if (repetitions) cfg.repetitions = *repetitions;
        else if (!j.contains("repetitions")) cfg.repetitions = cfg.data_path ? 100 : 25;
        if (budget) cfg.budget = *budget;
        if (!models.empty()) {
            cfg.models.clear();
            for (const auto& m : models) cfg.models.push_back(parse_model_kind(m));
        }
        if (n) cfg.synth.n = *n;
        if (p) cfg.synth.p = *p;
        if (c) cfg.synth.c = *c;
        if (k) cfg.synth.k = *k;
        cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

std::string format_json(const json& j) { return j.dump(2) + "\n"; }

int run(int argc, char** argv) {
    CLI::App app{"Ensembles of Beran estimators with self-attention aggregation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    SynthConfig sc;
    std::string synth_out, censoring = "label";
    int clusters = 1;
    synth->add_option("--n", sc.n, "number of records");
    synth->add_option("--p", sc.p, "probability of an uncensored record");
    synth->add_option("--c", sc.c, "mean-oscillation parameter");
    synth->add_option("--k", sc.k, "Weibull shape");
    synth->add_option("--seed", sc.seed, "seed")->required();
    synth->add_option("--censoring", censoring, "label | uniform")->check(CLI::IsMember({"label", "uniform"}));
    synth->add_option("--clusters", clusters, "1 (uniform box) or 2 (two separated clusters)")
        ->check(CLI::IsMember({1, 2}));
    synth->add_option("--out", synth_out, "output CSV (stdout by default)");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model on a training CSV and write a model file");
    std::string fit_data, fit_model_name = "survbesa", fit_out;
    std::uint64_t fit_seed = 0;
    HyperFlags fit_hyper;
    fit->add_option("--data", fit_data, "training CSV")->required();
    fit->add_option("--model", fit_model_name, "survbesa | survbesa-contam | bagging | single-beran");
    fit->add_option("--seed", fit_seed, "seed")->required();
    fit->add_option("--out", fit_out, "model file (JSON)")->required();
    fit_hyper.add(fit);

    // eval
    auto* eval = app.add_subcommand("eval", "score a model file on a CSV");
    std::string eval_model, eval_data, eval_pred;
    eval->add_option("--model-file", eval_model, "model file written by fit")->required();
    eval->add_option("--data", eval_data, "CSV to score")->required();
    eval->add_option("--predictions", eval_pred, "write per-record expected times to this CSV");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "repeated split / tune / test comparison");
    ExperimentFlags bench_flags;
    std::string bench_out, bench_summary;
    bench_flags.add(bench, true);
    bench->add_option("--out", bench_out, "per-repetition CSV (stdout by default)");
    bench->add_option("--summary", bench_summary, "summary JSON file");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "vary one parameter and report mean C-index");
    ExperimentFlags sweep_flags;
    std::string sweep_param, sweep_out;
    std::vector<double> sweep_values;
    sweep_flags.add(sweep, true);
    sweep->add_option("--param", sweep_param, "k | c | p | n | learners | fraction")->required();
    sweep->add_option("--values", sweep_values, "grid (defaults per parameter)")->delimiter(',');
    sweep->add_option("--out", sweep_out, "CSV (stdout by default)");

    // curve
    auto* curve = app.add_subcommand("curve", "training curve of one SurvBESA fit");
    ExperimentFlags curve_flags;
    HyperFlags curve_hyper;
    std::string curve_out;
    curve_flags.add(curve, true);
    curve_hyper.add(curve);
    curve->add_option("--out", curve_out, "CSV (stdout by default)");

    // sfdump
    auto* sfdump = app.add_subcommand("sfdump", "component SFs of one query before and after attention");
    ExperimentFlags dump_flags;
    HyperFlags dump_hyper;
    Index dump_query = 0;
    std::string dump_out;
    dump_flags.add(sfdump, true);
    dump_hyper.add(sfdump);
    sfdump->add_option("--query", dump_query, "index of the query record in the test split");
    sfdump->add_option("--out", dump_out, "CSV (stdout by default)");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "hyperparameter search on one train/validation split");
    ExperimentFlags tune_flags;
    std::string tune_model = "survbesa", tune_log, tune_out;
    tune_flags.add(tune_cmd, true);
    tune_cmd->add_option("--model", tune_model, "model to tune");
    tune_cmd->add_option("--log", tune_log, "trial log CSV");
    tune_cmd->add_option("--out", tune_out, "best configuration JSON (stdout by default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (*synth) {
        sc.censoring = censoring == "label" ? CensoringMode::LabelOnly : CensoringMode::UniformFraction;
        const Dataset d = clusters == 2 ? gen_two_cluster_dataset(sc) : gen_dataset(sc);
        Output out(synth_out);
        write_csv(out.stream(), d);
    } else if (*fit) {
        const Dataset raw = load_csv(fit_data);
        const Standardizer st = Standardizer::fit(raw);
        const Dataset train = st.apply(raw);
        const FittedModel fm = fit_model(parse_model_kind(fit_model_name), train, fit_hyper.h, fit_seed);
        Output out(fit_out);
        out.stream() << model_to_json(fm, train, st).dump() << '\n';
        std::cout << format_json({{"model", fit_model_name},
                                  {"train_c_index", c_index(predict_expected_times(fm, train), train)},
                                  {"learners", fm.ensemble.size()}});
    } else if (*eval) {
        std::ifstream in(eval_model);
        if (!in) throw Error(ErrorCode::ParseError, "cannot open model file '" + eval_model + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
        }
        Standardizer st;
        const FittedModel fm = model_from_json(j, st);
        const Dataset data = st.apply(load_csv(eval_data));
        const Vector<double> pred = predict_expected_times(fm, data);
        if (!eval_pred.empty()) {
            Output out(eval_pred);
            out.stream() << "index,expected_time\n" << std::setprecision(12);
            for (Index i = 0; i < pred.size(); ++i) out.stream() << i << ',' << pred[i] << '\n';
        }
        std::cout << format_json({{"model", std::string(to_string(fm.kind))},
                                  {"n", data.size()},
                                  {"c_index", c_index(pred, data)}});
    } else if (*bench) {
        const ExperimentConfig cfg = bench_flags.build();
        const BenchmarkResult r = run_benchmark(cfg);
        Output out(bench_out);
        write_benchmark_csv(out.stream(), r);
        const std::string summary = format_json(summary_json(cfg, r));
        if (!bench_summary.empty()) {
            Output s(bench_summary);
            s.stream() << summary;
        } else {
            std::cerr << summary;
        }
    } else if (*sweep) {
        const ExperimentConfig cfg = sweep_flags.build();
        const auto values = sweep_values.empty() ? default_sweep_values(sweep_param) : sweep_values;
        const auto rows = run_sweep(cfg, sweep_param, values);
        Output out(sweep_out);
        write_sweep_csv(out.stream(), sweep_param, rows);
    } else if (*curve) {
        const ExperimentConfig cfg = curve_flags.build();
        Output out(curve_out);
        write_curve_csv(out.stream(), run_curve(cfg, curve_hyper.h));
    } else if (*sfdump) {
        ExperimentConfig cfg = dump_flags.build();
        Split data;
        if (cfg.data_path) {
            data = repetition_data(cfg, 0, load_csv(*cfg.data_path));
        } else {
            SynthConfig s = cfg.synth;
            s.n = cfg.synth.n + cfg.synth_test;
            s.seed = cfg.seed;
            const Dataset all = gen_two_cluster_dataset(s);
            std::vector<Index> tr, te;
            for (Index i = 0; i < all.size(); ++i) (i < cfg.synth.n ? tr : te).push_back(i);
            data.standardizer = Standardizer::fit(all.subset(tr));
            data.train = data.standardizer.apply(all.subset(tr));
            data.test = data.standardizer.apply(all.subset(te));
        }
        const SfDump dump = run_sfdump(data.train, data.test, dump_query, dump_hyper.h, cfg.seed);
        Output out(dump_out);
        write_sfdump_csv(out.stream(), dump);
        std::cerr << format_json({{"max_pairwise_ks", dump.max_pairwise_ks}});
    } else if (*tune_cmd) {
        const ExperimentConfig cfg = tune_flags.build();
        std::optional<Dataset> real;
        if (cfg.data_path) real = load_csv(*cfg.data_path);
        const Split data = repetition_data(cfg, 0, real);
        const ModelKind kind = parse_model_kind(tune_model);
        const TuneResult t = tune(kind, data.train, data.validation, cfg.space, cfg.budget, cfg.seed);
        if (!tune_log.empty()) {
            Output log(tune_log);
            auto& os = log.stream();
            os << "trial,tau,learners,fraction,step_size,epsilon,phi,lambda,validation_c_index,failure\n"
               << std::setprecision(10);
            for (const auto& tr : t.trials) {
                const auto& h = tr.hyper;
                os << tr.trial << ',' << h.tau << ',' << h.learners << ',' << h.fraction << ',' << h.step_size << ','
                   << h.epsilon << ',' << h.phi << ',' << h.lambda << ',' << tr.validation_c_index << ",\""
                   << tr.failure << "\"\n";
            }
        }
        Output out(tune_out);
        out.stream() << format_json({{"model", tune_model},
                                     {"validation_c_index", t.best_c_index},
                                     {"hyper", hyper_to_json(t.best)},
                                     {"seed", t.best_seed}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const survbesa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return survbesa::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
