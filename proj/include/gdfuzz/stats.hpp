#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gdfuzz {

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MannWhitneyResult {
    double u = 0; // U statistic for the first sample (ties count 0.5)
    double z = 0; // normal approximation with tie correction
    double p = 1; // two-sided
};

/// Rank-sum Mann-Whitney U with midranks for ties. Samples must be
/// nonempty. U(a,b) + U(b,a) = |a| * |b|.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b);

/// Pearson correlation of midrank-transformed sequences. Requires
/// |x| = |y| >= 2; throws StatsError when either rank variance is zero.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

struct OddsRatioResult {
    double odds_ratio = 1; // infinity when the denominator vanishes
    double p = 1;          // Fisher's exact test, two-sided
};

/// table[0] = {n11, n12}, table[1] = {n21, n22}.
OddsRatioResult odds_ratio(const std::array<std::array<std::uint64_t, 2>, 2>& table);

} // namespace gdfuzz
