#include "gdfuzz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace gdfuzz {

namespace {

// Midranks of values within the combined pool they came from.
std::vector<double> midranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        double rank = 0.5 * static_cast<double>(i + 1 + j); // average of i+1..j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

double log_choose(std::uint64_t n, std::uint64_t k) {
    return std::lgamma(static_cast<double>(n) + 1) -
           std::lgamma(static_cast<double>(k) + 1) -
           std::lgamma(static_cast<double>(n - k) + 1);
}

} // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw StatsError("mann_whitney_u needs nonempty samples");
    const double m = static_cast<double>(a.size());
    const double n = static_cast<double>(b.size());

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> ranks = midranks(pooled);

    double rank_sum_a = 0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
    MannWhitneyResult res;
    res.u = rank_sum_a - m * (m + 1) / 2.0;

    // tie correction over pooled value multiplicities
    std::map<double, double> multiplicity;
    for (double v : pooled) multiplicity[v] += 1;
    double tie_term = 0;
    for (auto& [v, t] : multiplicity) tie_term += t * t * t - t;
    const double big_n = m + n;
    double variance = m * n / 12.0 *
                      ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (variance <= 0) {
        res.z = 0;
        res.p = 1;
        return res;
    }
    res.z = (res.u - m * n / 2.0) / std::sqrt(variance);
    res.p = normal_two_sided_p(res.z);
    return res;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw StatsError("spearman_rho needs two equal-length samples of size >= 2");
    std::vector<double> rx = midranks(x), ry = midranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (double v : rx) mx += v;
    for (double v : ry) my += v;
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0 || syy <= 0)
        throw StatsError("spearman_rho undefined: zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

OddsRatioResult odds_ratio(const std::array<std::array<std::uint64_t, 2>, 2>& table) {
    const std::uint64_t n11 = table[0][0], n12 = table[0][1];
    const std::uint64_t n21 = table[1][0], n22 = table[1][1];

    OddsRatioResult res;
    const double num = static_cast<double>(n11) * static_cast<double>(n22);
    const double den = static_cast<double>(n12) * static_cast<double>(n21);
    if (num == 0) res.odds_ratio = 0;
    else if (den == 0) res.odds_ratio = std::numeric_limits<double>::infinity();
    else res.odds_ratio = num / den;

    // Fisher's exact, two-sided: sum hypergeometric probabilities no more
    // likely than the observed table, margins fixed.
    const std::uint64_t row1 = n11 + n12, row2 = n21 + n22;
    const std::uint64_t col1 = n11 + n21;
    const std::uint64_t total = row1 + row2;
    if (total == 0) {
        res.p = 1;
        return res;
    }
    auto log_prob = [&](std::uint64_t k) {
        return log_choose(row1, k) + log_choose(row2, col1 - k) - log_choose(total, col1);
    };
    const std::uint64_t k_min = col1 > row2 ? col1 - row2 : 0;
    const std::uint64_t k_max = std::min(row1, col1);
    const double observed = log_prob(n11);
    double p = 0;
    for (std::uint64_t k = k_min; k <= k_max; ++k) {
        double lp = log_prob(k);
        if (lp <= observed + 1e-7) p += std::exp(lp);
    }
    res.p = std::min(1.0, p);
    return res;
}

} // namespace gdfuzz
