#include "survbesa/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "survbesa/random.hpp"

namespace survbesa {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? std::string{} : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& column) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty())
        throw Error(ErrorCode::ParseError,
                    "row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + s + "'");
    return v;
}

}  // namespace

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing header row");
    const auto header = split_fields(line);
    std::vector<std::size_t> feature_cols;
    std::optional<std::size_t> time_col;
    std::optional<std::size_t> event_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "time") time_col = c;
        else if (header[c] == "event") event_col = c;
        else if (!header[c].empty() && header[c][0] == 'f') feature_cols.push_back(c);
    }
    if (!time_col) throw Error(ErrorCode::MissingColumn, "no 'time' column");
    if (!event_col) throw Error(ErrorCode::MissingColumn, "no 'event' column");

    std::vector<SurvivalRecord<double>> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": expected " +
                                                   std::to_string(header.size()) + " fields, found " +
                                                   std::to_string(fields.size()));
        SurvivalRecord<double> r;
        r.features.resize(static_cast<Index>(feature_cols.size()));
        for (std::size_t j = 0; j < feature_cols.size(); ++j)
            r.features[static_cast<Index>(j)] = parse_number(fields[feature_cols[j]], row, header[feature_cols[j]]);
        r.time = parse_number(fields[*time_col], row, "time");
        const double ev = parse_number(fields[*event_col], row, "event");
        if (ev != 0.0 && ev != 1.0)
            throw Error(ErrorCode::InvalidValue, "event at index " + std::to_string(row) + " must be 0 or 1");
        r.event = static_cast<int>(ev);
        records.push_back(std::move(r));
        ++row;
    }
    return validate_dataset<double>(records);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (Index j = 0; j < data.dim(); ++j) out << 'f' << j << ',';
    out << "time,event\n";
    out << std::setprecision(17);
    for (Index i = 0; i < data.size(); ++i) {
        for (Index j = 0; j < data.dim(); ++j) out << data.features()(i, j) << ',';
        out << data.time(i) << ',' << data.event(i) << '\n';
    }
}

void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
    write_csv(out, data);
}

Standardizer Standardizer::fit(const Dataset& train) {
    Standardizer s;
    const auto& f = train.features();
    s.mean = f.colwise().mean().transpose();
    s.scale = Vector<double>::Ones(f.cols());
    for (Index j = 0; j < f.cols(); ++j) {
        const double var = (f.col(j).array() - s.mean[j]).square().mean();
        if (var > 0.0) {
            s.scale[j] = std::sqrt(var);
        } else {
            s.mean[j] = 0.0;
        }
    }
    return s;
}

Dataset Standardizer::apply(const Dataset& data) const {
    if (data.dim() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer dimension differs");
    Matrix<double> f = (data.features().rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    return data.with_features(std::move(f));
}

std::array<Index, 3> split_sizes(Index n, const std::array<double, 3>& fractions) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw Error(ErrorCode::InvalidConfig, "split fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidConfig, "split fractions must sum to 1");
    std::array<Index, 3> sizes{};
    Index used = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        sizes[s] = static_cast<Index>(std::floor(fractions[s] * static_cast<double>(n) + 1e-9));
        used += sizes[s];
    }
    for (std::size_t s = 0; used < n; s = (s + 1) % 3, ++used) ++sizes[s];
    return sizes;
}

Split split_standardize(const Dataset& data, const std::array<double, 3>& fractions, std::uint64_t seed) {
    const auto sizes = split_sizes(data.size(), fractions);
    if (sizes[0] == 0 || sizes[1] == 0 || sizes[2] == 0)
        throw Error(ErrorCode::DegenerateSplit, "every split must be non-empty");
    Rng rng(seed);
    std::vector<Index> perm(static_cast<std::size_t>(data.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = perm.begin();
    const auto b = a + sizes[0];
    const auto c = b + sizes[1];
    const std::vector<Index> tr(a, b), va(b, c), te(c, perm.end());
    Dataset train = data.subset(tr);
    if (train.uncensored_count() == 0)
        throw Error(ErrorCode::DegenerateSplit, "training split has no uncensored records");
    Split s;
    s.standardizer = Standardizer::fit(train);
    s.train = s.standardizer.apply(train);
    s.validation = s.standardizer.apply(data.subset(va));
    s.test = s.standardizer.apply(data.subset(te));
    return s;
}

}  // namespace survbesa
