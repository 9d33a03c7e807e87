#include "survbesa/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>

namespace survbesa {

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "paired samples differ in length");
    if (a.size() < 2) throw Error(ErrorCode::InvalidConfig, "paired t-test needs at least two pairs");
    const auto n = static_cast<double>(a.size());
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : diff) ss += (d - mean) * (d - mean);
    const double var = ss / (n - 1.0);
    if (!(var > 0.0)) throw Error(ErrorCode::DegenerateVariance, "differences have zero sample variance");

    TTestResult r;
    r.dof = n - 1.0;
    r.t = mean / std::sqrt(var / n);
    const boost::math::students_t dist(r.dof);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

}  // namespace survbesa
