// Prints the smoothing schedule and one smoothed label for a quick look at
// how the mixing weight follows the grade ranges.

#include <cstdio>

#include "sals/labelgen.hpp"
#include "sals/scale.hpp"

int main() {
    const sals::GradingScale scale = sals::hayashi_scale(65);
    const sals::SmoothingParams params{3.0, 0.6};

    std::printf("count  grade        epsilon\n");
    for (int c : {1, 3, 5, 6, 13, 20, 21, 35, 50, 51, 58, 65}) {
        std::printf("%5d  %-11s  %.4f\n", c, scale.range(scale.grade_of(c)).label.c_str(),
                    sals::epsilon_schedule(c, scale, params.eps_min));
    }

    const int z = 13;
    const sals::CountLabelDistribution q = sals::smooth_label(z, scale, params);
    std::printf("\nsmoothed label for count %d (sigma=%.1f, eps_min=%.1f):\n", z, params.sigma,
                params.eps_min);
    for (int c = z - 5; c <= z + 5; ++c) {
        std::printf("  q'(%2d) = %.6f\n", c, q.at(c));
    }
    return 0;
}
