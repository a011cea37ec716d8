#pragma once

#include <cmath>
#include <vector>

#include "hbv/field.hpp"

namespace hbv {

// Smoothing by convolution with the quartic bump (1 - r^2/R^2)^2 truncated at
// r = R and normalized discretely so the tap weights sum to one. The field is
// reflected (even) at the box walls; with a symmetric kernel this preserves
// both constants and total mass exactly.
inline ScalarField mollify(const ScalarField& f, double radius) {
    const Grid& g = f.grid;
    const double h = g.spacing;
    if (!(radius >= h)) throw Error("mollify: radius must be >= grid spacing");

    const int reach = static_cast<int>(std::floor(radius / h));
    struct Tap {
        std::array<int, 3> off;
        double w;
    };
    std::vector<Tap> taps;
    std::array<int, 3> o{0, 0, 0};
    const auto axis_reach = [&](int a) { return a < g.dim ? reach : 0; };
    for (o[0] = -axis_reach(0); o[0] <= axis_reach(0); ++o[0])
        for (o[1] = -axis_reach(1); o[1] <= axis_reach(1); ++o[1])
            for (o[2] = -axis_reach(2); o[2] <= axis_reach(2); ++o[2]) {
                double r2 = 0;
                for (int a = 0; a < g.dim; ++a) r2 += double(o[a]) * o[a];
                r2 *= h * h;
                if (r2 >= radius * radius) continue;
                const double t = 1.0 - r2 / (radius * radius);
                taps.push_back(Tap{o, t * t});
            }
    double wsum = pairwise_sum_index(taps.size(), [&](std::size_t i) { return taps[i].w; });
    for (auto& t : taps) t.w /= wsum;

    const auto reflect = [](int k, int n) {
        // even reflection across the half-cell walls; period 2n
        int m = k % (2 * n);
        if (m < 0) m += 2 * n;
        return m < n ? m : 2 * n - 1 - m;
    };

    ScalarField out(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto k = g.coords(i);
        double acc = pairwise_sum_index(taps.size(), [&](std::size_t ti) {
            const Tap& t = taps[ti];
            std::array<int, 3> kk{0, 0, 0};
            for (int a = 0; a < g.dim; ++a) kk[a] = reflect(k[a] + t.off[a], g.shape[a]);
            return t.w * f.v[g.index(kk)];
        });
        out.v[i] = acc;
    }
    return out;
}

}  // namespace hbv
