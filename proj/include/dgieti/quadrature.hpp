// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace dgieti {

/// Gauss-Legendre rule on [0,1]. Nodes/weights are cached per point count.
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const QuadRule& gauss_rule(int npoints);

}  // namespace dgieti
