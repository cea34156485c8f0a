// SPDX-License-Identifier: Apache-2.0

#include "dgieti/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dgieti {

namespace {

// Newton iteration on P_n with Chebyshev starting guesses; nodes on (-1,1)
// are then mapped to [0,1].
QuadRule compute_rule(int n) {
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = 0.5 * (1.0 - x);  // descending cos order -> ascending node
        rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const QuadRule& gauss_rule(int npoints) {
    if (npoints < 1) throw std::invalid_argument("gauss_rule: need at least one point");
    static std::map<int, QuadRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(npoints);
    if (it == cache.end()) it = cache.emplace(npoints, compute_rule(npoints)).first;
    return it->second;
}

}  // namespace dgieti
