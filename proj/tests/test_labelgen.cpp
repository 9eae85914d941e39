#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "sals/labelgen.hpp"
#include "sals/rng.hpp"
#include "sals/scale.hpp"

using Catch::Approx;
using namespace sals;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a sals::Error");
    return ErrorCode::validation;
}

// Reference route for the truncated Gaussian label: evaluates the density
// prefactor and the normalization factor separately, exactly as written,
// instead of cancelling them. Stays independent of gaussian_ldl.
std::vector<double> gaussian_reference(int z, double sigma, int z_max) {
    const double prefactor = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
    double norm = 0.0;
    for (int c = 1; c <= z_max; ++c) {
        norm += std::exp(-(static_cast<double>(c - z) * (c - z)) / (2.0 * sigma * sigma));
    }
    norm *= prefactor;
    std::vector<double> out(static_cast<std::size_t>(z_max));
    for (int c = 1; c <= z_max; ++c) {
        out[static_cast<std::size_t>(c) - 1] =
            prefactor / norm *
            std::exp(-(static_cast<double>(c - z) * (c - z)) / (2.0 * sigma * sigma));
    }
    return out;
}

}  // namespace

TEST_CASE("gaussian_ldl matches the reference route") {
    const GradingScale scale = hayashi_scale(65);
    for (int z : {1, 2, 13, 30, 64, 65}) {
        for (double sigma : {1.0, 3.0, 5.0}) {
            const CountLabelDistribution d = gaussian_ldl(z, sigma, scale);
            const std::vector<double> ref = gaussian_reference(z, sigma, 65);
            for (std::size_t i = 0; i < ref.size(); ++i) {
                REQUIRE(std::abs(d.values[i] - ref[i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("gaussian_ldl normalizes and peaks at z") {
    const GradingScale scale = hayashi_scale(65);
    for (int z = 1; z <= 65; ++z) {
        const CountLabelDistribution d = gaussian_ldl(z, 3.0, scale);
        double sum = 0.0;
        for (double v : d.values) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE(sum == Approx(1.0).margin(1e-12));
        REQUIRE(d.argmax_count() == z);
    }

    SECTION("symmetry away from the truncation edges") {
        const CountLabelDistribution d = gaussian_ldl(30, 3.0, scale);
        REQUIRE(d.at(27) == d.at(33));
        REQUIRE(d.at(28) == d.at(32));
    }
    SECTION("frozen peak value at z=13, sigma=3") {
        const CountLabelDistribution d = gaussian_ldl(13, 3.0, scale);
        REQUIRE(d.at(13) == Approx(0.13298264931545842).epsilon(1e-13));
    }
    SECTION("input validation") {
        REQUIRE(code_of([&] { gaussian_ldl(0, 3.0, scale); }) == ErrorCode::out_of_range);
        REQUIRE(code_of([&] { gaussian_ldl(66, 3.0, scale); }) == ErrorCode::out_of_range);
        REQUIRE(code_of([&] { gaussian_ldl(13, 0.0, scale); }) == ErrorCode::invalid_argument);
        REQUIRE(code_of([&] { gaussian_ldl(13, -1.0, scale); }) == ErrorCode::invalid_argument);
    }
}

TEST_CASE("uniform_smooth spreads eps over all classes") {
    const std::vector<double> v = uniform_smooth(1, 4, 0.1);
    REQUIRE(v[0] == Approx(0.025).margin(1e-15));
    REQUIRE(v[1] == Approx(0.925).margin(1e-15));
    REQUIRE(v[2] == Approx(0.025).margin(1e-15));
    REQUIRE(v[3] == Approx(0.025).margin(1e-15));

    REQUIRE(uniform_smooth(2, 4, 0.0) == std::vector<double>{0.0, 0.0, 1.0, 0.0});
    for (double x : uniform_smooth(2, 4, 1.0)) REQUIRE(x == Approx(0.25).margin(1e-15));

    REQUIRE(code_of([] { uniform_smooth(4, 4, 0.1); }) == ErrorCode::out_of_range);
    REQUIRE(code_of([] { uniform_smooth(1, 4, 1.5); }) == ErrorCode::invalid_argument);
    REQUIRE(code_of([] { uniform_smooth(1, 4, -0.1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("epsilon_schedule is 1 at boundaries and eps_min at midpoints") {
    const GradingScale scale = hayashi_scale(65);

    REQUIRE(epsilon_schedule(21, scale, 0.6) == 1.0);
    REQUIRE(epsilon_schedule(13, scale, 0.6) == 0.6);
    REQUIRE(epsilon_schedule(35, scale, 0.6) == Approx(0.6137931034482759).margin(1e-15));

    SECTION("width-1 range pins epsilon to 1") {
        const GradingScale tight = hayashi_scale(51);
        REQUIRE(epsilon_schedule(51, tight, 0.6) == 1.0);
    }
    SECTION("eps_min extremes") {
        REQUIRE(epsilon_schedule(13, scale, 1.0) == 1.0);
        REQUIRE(epsilon_schedule(13, scale, 0.0) == 0.0);
    }
    SECTION("input validation") {
        REQUIRE(code_of([&] { epsilon_schedule(0, scale, 0.6); }) == ErrorCode::out_of_range);
        REQUIRE(code_of([&] { epsilon_schedule(66, scale, 0.6); }) == ErrorCode::out_of_range);
        REQUIRE(code_of([&] { epsilon_schedule(13, scale, 1.2); }) ==
                ErrorCode::invalid_argument);
    }
}

TEST_CASE("smooth_label mixes the one-hot label with its Gaussian") {
    const GradingScale scale = hayashi_scale(65);
    const SmoothingParams params{3.0, 0.6};

    SECTION("boundary count reduces to pure LDL") {
        const CountLabelDistribution q = smooth_label(21, scale, params);
        const CountLabelDistribution d = gaussian_ldl(21, 3.0, scale);
        for (std::size_t i = 0; i < q.values.size(); ++i) {
            REQUIRE(q.values[i] == Approx(d.values[i]).margin(1e-15));
        }
    }
    SECTION("midpoint with eps_min=0 is one-hot") {
        const CountLabelDistribution q = smooth_label(13, scale, {3.0, 0.0});
        for (int c = 1; c <= 65; ++c) {
            REQUIRE(q.at(c) == (c == 13 ? 1.0 : 0.0));
        }
    }
    SECTION("midpoint mass combines both terms") {
        const CountLabelDistribution q = smooth_label(13, scale, params);
        const CountLabelDistribution d = gaussian_ldl(13, 3.0, scale);
        REQUIRE(q.at(13) == Approx(0.4 + 0.6 * d.at(13)).margin(1e-15));
        REQUIRE(q.at(13) == Approx(0.4797895895892751).margin(1e-13));
        REQUIRE(q.at(12) == Approx(0.6 * d.at(12)).margin(1e-15));
    }
}

TEST_CASE("smooth_label stays on the simplex and keeps its peak") {
    const GradingScale scale = hayashi_scale(65);
    Rng rng(7);
    for (int rep = 0; rep < 1000; ++rep) {
        const int z = rng.uniform_int(1, 65);
        const double sigma = rng.uniform(0.5, 6.0);
        const double eps_min = rng.u01();
        const CountLabelDistribution q = smooth_label(z, scale, {sigma, eps_min});
        double sum = 0.0;
        for (double v : q.values) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE(std::abs(sum - 1.0) <= 1e-9);
        REQUIRE(q.argmax_count() == z);
    }
}

TEST_CASE("smoothing never raises the target entropy") {
    const GradingScale scale = hayashi_scale(65);
    for (int z = 1; z <= 65; ++z) {
        const CountLabelDistribution d = gaussian_ldl(z, 3.0, scale);
        const CountLabelDistribution q = smooth_label(z, scale, {3.0, 0.6});
        const double h_d = entropy(d.values);
        const double h_q = entropy(q.values);
        REQUIRE(h_q <= h_d + 1e-12);
        if (epsilon_schedule(z, scale, 0.6) == 1.0) {
            REQUIRE(h_q == Approx(h_d).margin(1e-12));
        } else {
            REQUIRE(h_q < h_d);
        }
    }
}
