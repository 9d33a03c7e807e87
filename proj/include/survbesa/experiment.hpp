#pragma once

// Experiment orchestration behind the command-line tool: repeated
// split/tune/test benchmarks, one-parameter sweeps, training curves, SF dumps
// and model files.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "survbesa/io.hpp"
#include "survbesa/synth.hpp"
#include "survbesa/train.hpp"

namespace survbesa {

struct ExperimentConfig {
    std::optional<std::string> data_path;  ///< CSV dataset; synthetic data when absent
    SynthConfig synth;                     ///< synth.n is the training size
    Index synth_validation = 100;
    Index synth_test = 100;
    std::array<double, 3> fractions{0.6, 0.2, 0.2};
    int repetitions = 25;
    std::vector<ModelKind> models{ModelKind::SurvBESA, ModelKind::Bagging, ModelKind::SingleBeran};
    SearchSpace space;
    int budget = 50;
    std::uint64_t seed = 0;

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Train/validation/test data of one repetition, standardized on train.
Split repetition_data(const ExperimentConfig& cfg, int repetition, const std::optional<Dataset>& real);

struct RepetitionRow {
    int repetition = 0;
    ModelKind model = ModelKind::Bagging;
    double validation_c_index = 0.0;
    double test_c_index = 0.0;
    Hyperparameters hyper;
};

struct ModelSummary {
    double mean = 0.0;
    double std = 0.0;
    int runs = 0;
};

struct BenchmarkResult {
    std::vector<RepetitionRow> rows;  ///< sorted by repetition, then model order of the config
    std::map<std::string, ModelSummary> summary;
};

BenchmarkResult run_benchmark(const ExperimentConfig& cfg);

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& r);
nlohmann::json summary_json(const ExperimentConfig& cfg, const BenchmarkResult& r);

struct SweepRow {
    double value = 0.0;
    ModelKind model = ModelKind::Bagging;
    ModelSummary stats;
};

/// Parameters: k, c, p, n (synthetic generator), learners (fraction fixed at 0.4),
/// fraction (25 learners).
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                const std::vector<double>& values);
std::vector<double> default_sweep_values(const std::string& parameter);
void write_sweep_csv(std::ostream& out, const std::string& parameter, const std::vector<SweepRow>& rows);

/// Epoch-by-epoch surrogate and C-index of one SurvBESA fit (repetition 0 of cfg).
std::vector<EpochRecord> run_curve(const ExperimentConfig& cfg, const Hyperparameters& h);
void write_curve_csv(std::ostream& out, const std::vector<EpochRecord>& history);

struct SfDumpRow {
    std::string stage;  ///< raw, attention_initial, attention_trained
    Index learner = 0;
    double time = 0.0;
    double survival = 1.0;
};

struct SfDump {
    std::vector<SfDumpRow> rows;
    std::map<std::string, double> max_pairwise_ks;  ///< per stage
};

/// Component SFs of one query before attention, with neutral attention and after training.
SfDump run_sfdump(const Dataset& train, const Dataset& queries, Index query, const Hyperparameters& h,
                  std::uint64_t seed);
void write_sfdump_csv(std::ostream& out, const SfDump& dump);

/// Two-cluster synthetic data: records alternate between the lower and upper third of the box.
Dataset gen_two_cluster_dataset(const SynthConfig& cfg);

/// Model file: kind, hyperparameters, standardizer, training data, subsets and trained attention.
nlohmann::json model_to_json(const FittedModel& fm, const Dataset& train, const Standardizer& st);
FittedModel model_from_json(const nlohmann::json& j, Standardizer& st);

nlohmann::json hyper_to_json(const Hyperparameters& h);
Hyperparameters hyper_from_json(const nlohmann::json& j, Hyperparameters base = {});

}  // namespace survbesa
