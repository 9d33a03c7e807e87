#include "survbesa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "survbesa/parallel.hpp"

namespace survbesa {

using nlohmann::json;

namespace {

std::string censoring_name(CensoringMode m) {
    return m == CensoringMode::LabelOnly ? "label" : "uniform";
}

CensoringMode parse_censoring(const std::string& s) {
    if (s == "label") return CensoringMode::LabelOnly;
    if (s == "uniform") return CensoringMode::UniformFraction;
    throw Error(ErrorCode::InvalidConfig, "censoring must be 'label' or 'uniform'");
}

ModelSummary summarize(const std::vector<double>& v) {
    ModelSummary s;
    s.runs = static_cast<int>(v.size());
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

double max_pairwise_ks(const Matrix<double>& sfs) {
    return sfs.rows() < 2 ? 0.0 : ks_distance_matrix(sfs).maxCoeff();
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json hyper_to_json(const Hyperparameters& h) {
    return json{{"tau", h.tau},           {"learners", h.learners}, {"fraction", h.fraction},
                {"step_size", h.step_size}, {"epsilon", h.epsilon},   {"phi", h.phi},
                {"lambda", h.lambda},     {"epochs", h.epochs},     {"solver_steps", h.solver_steps}};
}

Hyperparameters hyper_from_json(const json& j, Hyperparameters h) {
    read_if(j, "tau", h.tau);
    read_if(j, "learners", h.learners);
    read_if(j, "fraction", h.fraction);
    read_if(j, "step_size", h.step_size);
    read_if(j, "epsilon", h.epsilon);
    read_if(j, "phi", h.phi);
    read_if(j, "lambda", h.lambda);
    read_if(j, "epochs", h.epochs);
    read_if(j, "solver_steps", h.solver_steps);
    return h;
}

void ExperimentConfig::validate() const {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw Error(ErrorCode::InvalidConfig, "split fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidConfig, "split fractions must sum to 1");
    if (repetitions < 1) throw Error(ErrorCode::InvalidConfig, "repetitions must be >= 1");
    if (budget < 1) throw Error(ErrorCode::InvalidConfig, "budget must be >= 1");
    if (models.empty()) throw Error(ErrorCode::InvalidConfig, "at least one model is required");
    if (!data_path) synth.validate();
    space.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("data") && !j.at("data").is_null()) c.data_path = j.at("data").get<std::string>();
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        read_if(s, "n", c.synth.n);
        read_if(s, "dim", c.synth.dim);
        read_if(s, "p", c.synth.p);
        read_if(s, "c", c.synth.c);
        read_if(s, "k", c.synth.k);
        if (s.contains("lower")) c.synth.lower = s.at("lower").get<std::vector<double>>();
        else c.synth.lower.assign(static_cast<std::size_t>(c.synth.dim), -2.0);
        if (s.contains("upper")) c.synth.upper = s.at("upper").get<std::vector<double>>();
        else c.synth.upper.assign(static_cast<std::size_t>(c.synth.dim), 5.0);
        if (s.contains("censoring")) c.synth.censoring = parse_censoring(s.at("censoring").get<std::string>());
        read_if(s, "validation", c.synth_validation);
        read_if(s, "test", c.synth_test);
    }
    if (j.contains("fractions")) {
        const auto f = j.at("fractions").get<std::vector<double>>();
        if (f.size() != 3) throw Error(ErrorCode::InvalidConfig, "fractions needs three entries");
        c.fractions = {f[0], f[1], f[2]};
    }
    read_if(j, "repetitions", c.repetitions);
    if (j.contains("models")) {
        c.models.clear();
        for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    if (j.contains("space")) {
        const auto& s = j.at("space");
        read_if(s, "tau", c.space.tau);
        read_if(s, "fraction_lo", c.space.fraction_lo);
        read_if(s, "fraction_hi", c.space.fraction_hi);
        read_if(s, "learners_lo", c.space.learners_lo);
        read_if(s, "learners_hi", c.space.learners_hi);
        read_if(s, "step_size", c.space.step_size);
        read_if(s, "epsilon_lo", c.space.epsilon_lo);
        read_if(s, "epsilon_hi", c.space.epsilon_hi);
        read_if(s, "phi", c.space.phi);
        read_if(s, "lambda", c.space.lambda);
        read_if(s, "epochs", c.space.epochs);
        read_if(s, "solver_steps", c.space.solver_steps);
    }
    read_if(j, "budget", c.budget);
    read_if(j, "seed", c.seed);
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const {
    json models_json = json::array();
    for (auto m : models) models_json.push_back(std::string(to_string(m)));
    return json{
        {"data", data_path ? json(*data_path) : json(nullptr)},
        {"synth",
         {{"n", synth.n},
          {"dim", synth.dim},
          {"p", synth.p},
          {"c", synth.c},
          {"k", synth.k},
          {"lower", synth.lower},
          {"upper", synth.upper},
          {"censoring", censoring_name(synth.censoring)},
          {"validation", synth_validation},
          {"test", synth_test}}},
        {"fractions", fractions},
        {"repetitions", repetitions},
        {"models", models_json},
        {"space",
         {{"tau", space.tau},
          {"fraction_lo", space.fraction_lo},
          {"fraction_hi", space.fraction_hi},
          {"learners_lo", space.learners_lo},
          {"learners_hi", space.learners_hi},
          {"step_size", space.step_size},
          {"epsilon_lo", space.epsilon_lo},
          {"epsilon_hi", space.epsilon_hi},
          {"phi", space.phi},
          {"lambda", space.lambda},
          {"epochs", space.epochs},
          {"solver_steps", space.solver_steps}}},
        {"budget", budget},
        {"seed", seed},
    };
}

Split repetition_data(const ExperimentConfig& cfg, int repetition, const std::optional<Dataset>& real) {
    const auto rep = static_cast<std::uint64_t>(repetition);
    if (real) return split_standardize(*real, cfg.fractions, derive_seed(cfg.seed, rep));
    auto make = [&](Index n, std::uint64_t stream) {
        SynthConfig s = cfg.synth;
        s.n = n;
        s.seed = derive_seed(cfg.seed, 3 * rep + stream);
        return gen_dataset(s);
    };
    const Dataset train = make(cfg.synth.n, 0);
    if (train.uncensored_count() == 0)
        throw Error(ErrorCode::DegenerateSplit, "synthetic training set has no uncensored records");
    Split s;
    s.standardizer = Standardizer::fit(train);
    s.train = s.standardizer.apply(train);
    s.validation = s.standardizer.apply(make(cfg.synth_validation, 1));
    s.test = s.standardizer.apply(make(cfg.synth_test, 2));
    return s;
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
    cfg.validate();
    std::optional<Dataset> real;
    if (cfg.data_path) real = load_csv(*cfg.data_path);

    std::vector<std::vector<RepetitionRow>> per_rep(static_cast<std::size_t>(cfg.repetitions));
    parallel_for(per_rep.size(), [&](std::size_t r) {
        const int rep = static_cast<int>(r);
        const Split data = repetition_data(cfg, rep, real);
        const std::uint64_t tune_seed = derive_seed(cfg.seed, 10'000ULL + r);
        for (ModelKind kind : cfg.models) {
            const TuneResult t = tune(kind, data.train, data.validation, cfg.space, cfg.budget, tune_seed);
            TrainConfig tc;
            tc.record_history = false;
            const FittedModel fm = fit_model(kind, data.train, t.best, t.best_seed, tc);
            RepetitionRow row;
            row.repetition = rep;
            row.model = kind;
            row.validation_c_index = t.best_c_index;
            row.test_c_index = c_index(predict_expected_times(fm, data.test), data.test);
            row.hyper = fm.hyper;
            per_rep[r].push_back(row);
        }
    });

    BenchmarkResult res;
    for (auto& rows : per_rep)
        for (auto& row : rows) res.rows.push_back(row);
    for (ModelKind kind : cfg.models) {
        std::vector<double> v;
        for (const auto& row : res.rows)
            if (row.model == kind) v.push_back(row.test_c_index);
        res.summary[std::string(to_string(kind))] = summarize(v);
    }
    return res;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& r) {
    out << "repetition,model,validation_c_index,test_c_index,tau,learners,fraction,step_size,epsilon,phi,lambda\n";
    out << std::setprecision(10);
    for (const auto& row : r.rows) {
        const auto& h = row.hyper;
        out << row.repetition << ',' << to_string(row.model) << ',' << row.validation_c_index << ','
            << row.test_c_index << ',' << h.tau << ',' << h.learners << ',' << h.fraction << ',' << h.step_size << ','
            << h.epsilon << ',' << h.phi << ',' << h.lambda << '\n';
    }
    for (const auto& [model, s] : r.summary)
        out << "summary," << model << ",," << s.mean << ",,,,,,,\n";
}

json summary_json(const ExperimentConfig& cfg, const BenchmarkResult& r) {
    json models = json::object();
    for (const auto& [model, s] : r.summary) models[model] = {{"mean", s.mean}, {"std", s.std}, {"runs", s.runs}};
    return json{{"config", cfg.to_json()}, {"models", models}};
}

std::vector<double> default_sweep_values(const std::string& parameter) {
    std::vector<double> v;
    if (parameter == "k") {
        for (int k = 1; k <= 19; k += 2) v.push_back(k);
    } else if (parameter == "c") {
        for (int i = 0; i < 10; ++i) v.push_back(1.5 + 0.5 * i);
    } else if (parameter == "p") {
        for (int i = 0; i < 10; ++i) v.push_back(0.1 + 0.8 * i / 9.0);
    } else if (parameter == "n") {
        v = {50, 100, 150, 200, 300, 400, 500};
    } else if (parameter == "learners") {
        for (int m = 1; m <= 31; m += 4) v.push_back(m);
    } else if (parameter == "fraction") {
        for (int i = 1; i <= 9; ++i) v.push_back(i / 10.0);
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown sweep parameter '" + parameter + "'");
    }
    return v;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& parameter,
                                const std::vector<double>& values) {
    std::vector<SweepRow> rows;
    for (double value : values) {
        ExperimentConfig cfg = base;
        if (parameter == "k") {
            cfg.synth.k = value;
        } else if (parameter == "c") {
            cfg.synth.c = value;
        } else if (parameter == "p") {
            cfg.synth.p = value;
        } else if (parameter == "n") {
            cfg.synth.n = static_cast<Index>(std::lround(value));
        } else if (parameter == "learners") {
            cfg.space.learners_lo = cfg.space.learners_hi = static_cast<Index>(std::lround(value));
            cfg.space.fraction_lo = cfg.space.fraction_hi = 0.4;
        } else if (parameter == "fraction") {
            cfg.space.fraction_lo = cfg.space.fraction_hi = value;
            cfg.space.learners_lo = cfg.space.learners_hi = 25;
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown sweep parameter '" + parameter + "'");
        }
        const BenchmarkResult r = run_benchmark(cfg);
        for (ModelKind kind : cfg.models) rows.push_back({value, kind, r.summary.at(std::string(to_string(kind)))});
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& parameter, const std::vector<SweepRow>& rows) {
    out << parameter << ",model,mean_c_index,std_c_index,runs\n" << std::setprecision(10);
    for (const auto& r : rows)
        out << r.value << ',' << to_string(r.model) << ',' << r.stats.mean << ',' << r.stats.std << ',' << r.stats.runs
            << '\n';
}

std::vector<EpochRecord> run_curve(const ExperimentConfig& cfg, const Hyperparameters& h) {
    cfg.validate();
    std::optional<Dataset> real;
    if (cfg.data_path) real = load_csv(*cfg.data_path);
    const Split data = repetition_data(cfg, 0, real);
    TrainConfig tc;
    tc.record_history = true;
    const FittedModel fm = fit_model(ModelKind::SurvBESA, data.train, h, derive_seed(cfg.seed, 20'000ULL), tc, &data.test);
    return fm.history;
}

void write_curve_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << "epoch,surrogate,train_c_index,test_c_index\n" << std::setprecision(12);
    for (const auto& r : history)
        out << r.epoch << ',' << r.surrogate << ',' << r.train_c_index << ',' << r.monitor_c_index << '\n';
}

SfDump run_sfdump(const Dataset& train, const Dataset& queries, Index query, const Hyperparameters& h,
                  std::uint64_t seed) {
    if (query < 0 || query >= queries.size()) throw Error(ErrorCode::InvalidConfig, "query index out of range");
    const auto ensemble = fit_ensemble(train, h.learners, h.fraction, h.tau, seed);
    if (ensemble.size() < 2) throw Error(ErrorCode::SingleLearner, "SF dump needs at least two learners");
    const auto ctx = build_context(ensemble, queries.x(query));
    TrainConfig tc;
    tc.epochs = h.epochs;
    tc.step_size = h.step_size;
    tc.record_history = false;
    const auto trained = train_general(ensemble, train, tc);

    const std::vector<std::pair<std::string, Matrix<double>>> stages{
        {"raw", ctx.sfs},
        {"attention_initial",
         adjusted_matrix(ctx.sfs, attention_matrix(ctx, AttentionParams<double>::neutral(ensemble.size())))},
        {"attention_trained", adjusted_matrix(ctx.sfs, attention_matrix(ctx, trained.params))},
    };
    SfDump dump;
    for (const auto& [stage, sfs] : stages) {
        dump.max_pairwise_ks[stage] = max_pairwise_ks(sfs);
        for (Index k = 0; k < sfs.rows(); ++k)
            for (Index l = 0; l < sfs.cols(); ++l) dump.rows.push_back({stage, k, ctx.grid[l], sfs(k, l)});
    }
    return dump;
}

void write_sfdump_csv(std::ostream& out, const SfDump& dump) {
    out << "stage,learner,time,survival\n" << std::setprecision(12);
    for (const auto& r : dump.rows) out << r.stage << ',' << r.learner << ',' << r.time << ',' << r.survival << '\n';
}

Dataset gen_two_cluster_dataset(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution observed(cfg.p);
    Matrix<double> f(cfg.n, cfg.dim);
    Vector<double> t(cfg.n);
    Eigen::VectorXi e(cfg.n);
    for (Index i = 0; i < cfg.n; ++i) {
        const bool upper = i % 2 == 1;
        for (Index j = 0; j < cfg.dim; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double width = (cfg.upper[jj] - cfg.lower[jj]) / 3.0;
            const double lo = upper ? cfg.upper[jj] - width : cfg.lower[jj];
            f(i, j) = lo + width * unit(rng);
        }
        e[i] = observed(rng) ? 1 : 0;
        double u = unit(rng);
        while (!(u > 0.0)) u = unit(rng);
        t[i] = gen_event_time(f.row(i), cfg.c, cfg.k, u);
    }
    return Dataset(std::move(f), std::move(t), std::move(e));
}

json model_to_json(const FittedModel& fm, const Dataset& train, const Standardizer& st) {
    json features = json::array();
    for (Index i = 0; i < train.size(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(train.dim()));
        for (Index j = 0; j < train.dim(); ++j) row[static_cast<std::size_t>(j)] = train.features()(i, j);
        features.push_back(row);
    }
    std::vector<double> times(train.times().data(), train.times().data() + train.size());
    std::vector<int> events(train.events().data(), train.events().data() + train.size());
    auto matrix_json = [](const Matrix<double>& m) {
        json rows = json::array();
        for (Index r = 0; r < m.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(m.cols()));
            for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
            rows.push_back(row);
        }
        return rows;
    };
    std::vector<double> taus;
    for (const auto& l : fm.ensemble.learners()) taus.push_back(l.tau());
    json j{
        {"kind", std::string(to_string(fm.kind))},
        {"hyper", hyper_to_json(fm.hyper)},
        {"seed", fm.seed},
        {"standardizer",
         {{"mean", std::vector<double>(st.mean.data(), st.mean.data() + st.mean.size())},
          {"scale", std::vector<double>(st.scale.data(), st.scale.data() + st.scale.size())}}},
        {"train", {{"features", features}, {"times", times}, {"events", events}}},
        {"subsets", fm.ensemble.subsets()},
        {"taus", taus},
    };
    if (fm.kind == ModelKind::SurvBESA && fm.uses_attention()) j["attention_raw"] = matrix_json(fm.attention.raw());
    if (fm.kind == ModelKind::SurvBESAContam && fm.uses_attention()) {
        j["contamination"] = {{"epsilon", fm.contamination.epsilon},
                              {"phi", fm.contamination.phi},
                              {"theta", matrix_json(fm.contamination.theta)}};
    }
    return j;
}

FittedModel model_from_json(const json& j, Standardizer& st) {
    auto matrix_from = [](const json& rows) {
        const auto n = static_cast<Index>(rows.size());
        const auto m = n == 0 ? Index{0} : static_cast<Index>(rows.at(0).size());
        Matrix<double> out(n, m);
        for (Index r = 0; r < n; ++r)
            for (Index c = 0; c < m; ++c) out(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
        return out;
    };
    auto vector_from = [](const json& v) {
        const auto raw = v.get<std::vector<double>>();
        return Vector<double>(Eigen::Map<const Vector<double>>(raw.data(), static_cast<Index>(raw.size())));
    };
    try {
        FittedModel fm;
        fm.kind = parse_model_kind(j.at("kind").get<std::string>());
        fm.hyper = hyper_from_json(j.at("hyper"));
        fm.seed = j.at("seed").get<std::uint64_t>();
        st.mean = vector_from(j.at("standardizer").at("mean"));
        st.scale = vector_from(j.at("standardizer").at("scale"));
        const auto& tr = j.at("train");
        const auto ev = tr.at("events").get<std::vector<int>>();
        const Dataset train(matrix_from(tr.at("features")), vector_from(tr.at("times")),
                            Eigen::Map<const Eigen::VectorXi>(ev.data(), static_cast<Index>(ev.size())));
        fm.ensemble = EnsembleModel<double>(train, j.at("subsets").get<std::vector<std::vector<Index>>>(),
                                            j.at("taus").get<std::vector<double>>(), fm.hyper.fraction);
        if (j.contains("attention_raw")) fm.attention = AttentionParams<double>(matrix_from(j.at("attention_raw")));
        if (j.contains("contamination")) {
            const auto& c = j.at("contamination");
            fm.contamination = {c.at("epsilon").get<double>(), c.at("phi").get<double>(), matrix_from(c.at("theta"))};
        }
        return fm;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
    }
}

}  // namespace survbesa
