// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/geometry.hpp"

#include <vector>

namespace dgieti::testing {

inline Patch make_square_patch(const Vec2& lo, const Vec2& hi, int degree, int nspans,
                               double alpha = 1.0) {
    TensorSplineSpace geom(KnotVector::single_span(1), KnotVector::single_span(1));
    std::vector<Vec2> cps = {{lo[0], lo[1]}, {hi[0], lo[1]}, {lo[0], hi[1]}, {hi[0], hi[1]}};
    TensorSplineSpace sol(KnotVector::uniform(degree, nspans), KnotVector::uniform(degree, nspans));
    return {geom, cps, std::move(sol), alpha};
}

/// Two unit squares [0,1]^2 and [1,2]x[0,1] coupled across x = 1.
/// dirichlet = "all": all outer sides; "west": only the x=0 side.
inline MultiPatch two_squares(int degree, int nspans0, int nspans1,
                              const std::string& dirichlet = "west",
                              double alpha0 = 1.0, double alpha1 = 1.0) {
    std::vector<Patch> patches;
    patches.push_back(make_square_patch({0, 0}, {1, 1}, degree, nspans0, alpha0));
    patches.push_back(make_square_patch({1, 0}, {2, 1}, degree, nspans1, alpha1));
    std::vector<Interface> ifaces = {{{0, SideId::east}, {1, SideId::west}, Orientation::same}};
    std::vector<Side> diri, neum;
    auto tag = [&](int k, SideId s, bool d) { (d ? diri : neum).push_back({k, s}); };
    const bool all = dirichlet == "all";
    tag(0, SideId::west, true);
    tag(0, SideId::south, all);
    tag(0, SideId::north, all);
    tag(1, SideId::south, all);
    tag(1, SideId::north, all);
    tag(1, SideId::east, all);
    return {std::move(patches), std::move(ifaces), std::move(diri), std::move(neum)};
}

inline Patch quarter_annulus_patch(double th0, double th1, int degree, int nspans) {
    const double thm = 0.5 * (th0 + th1);
    const double w = std::cos(0.5 * (th1 - th0));
    const Vec2 q[3] = {{std::cos(th0), std::sin(th0)},
                       {std::cos(thm) / w, std::sin(thm) / w},
                       {std::cos(th1), std::sin(th1)}};
    TensorSplineSpace geom(KnotVector::single_span(1), KnotVector::single_span(2));
    std::vector<Vec2> cps;
    for (int i2 = 0; i2 < 3; ++i2)
        for (int i1 = 0; i1 < 2; ++i1) cps.push_back((1.0 + i1) * q[i2]);
    TensorSplineSpace sol(KnotVector::uniform(degree, nspans), KnotVector::uniform(degree, nspans));
    return {geom, cps, std::move(sol)};
}

}  // namespace dgieti::testing
