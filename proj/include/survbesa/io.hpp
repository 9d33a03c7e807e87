#pragma once

// Dataset CSV files (f0..f{d-1}, time, event), train/validation/test splitting
// and train-only feature standardization.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "survbesa/core.hpp"

namespace survbesa {

Dataset load_csv(const std::string& path);
Dataset read_csv(std::istream& in);

void write_csv(const std::string& path, const Dataset& data);
void write_csv(std::ostream& out, const Dataset& data);

/// Per-feature affine map fitted on training data. Zero-variance features are left unchanged.
struct Standardizer {
    Vector<double> mean;
    Vector<double> scale;

    static Standardizer fit(const Dataset& train);
    Dataset apply(const Dataset& data) const;
};

struct Split {
    Dataset train;
    Dataset validation;
    Dataset test;
    Standardizer standardizer;
};

/// Sizes floor(f_i * n), with the remainder handed out one each starting at train.
std::array<Index, 3> split_sizes(Index n, const std::array<double, 3>& fractions);

/// Uniform random split, then standardization fitted on the training part.
Split split_standardize(const Dataset& data, const std::array<double, 3>& fractions, std::uint64_t seed);

}  // namespace survbesa
