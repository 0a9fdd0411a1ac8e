#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "strokeml/error.hpp"
#include "strokeml/rng.hpp"
#include "strokeml/simd/kernels.hpp"

using namespace strokeml;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
}

// Loose bound on the rounding difference between two summation orders.
double sum_tolerance(std::size_t n, double magnitude) { return 1e-14 * static_cast<double>(n + 1) * magnitude; }

}  // namespace

TEST(Simd, ScalarAlwaysAvailable) {
    EXPECT_TRUE(simd::available(simd::Isa::Scalar));
    const auto isas = simd::available_isas();
    ASSERT_FALSE(isas.empty());
    EXPECT_EQ(isas.front(), simd::Isa::Scalar);
}

TEST(Simd, ScalarKernelsMatchDefinition) {
    const auto& k = simd::scalar_kernels();
    const std::vector<double> a{1, 2, 3}, b{4, -5, 6}, w{0.5, 2, 1};
    EXPECT_DOUBLE_EQ(k.dot(a.data(), b.data(), 3), 4 - 10 + 18);
    EXPECT_DOUBLE_EQ(k.squared_distance(a.data(), b.data(), 3), 9 + 49 + 9);
    EXPECT_DOUBLE_EQ(k.weighted_squared_distance(a.data(), b.data(), w.data(), 3), 4.5 + 98 + 9);
    std::vector<double> y{1, 1, 1};
    k.axpy(2.0, a.data(), y.data(), 3);
    EXPECT_EQ(y, (std::vector<double>{3, 5, 7}));
}

TEST(Simd, UnavailableIsaThrows) {
    for (auto isa : {simd::Isa::Avx2, simd::Isa::Neon}) {
        if (!simd::available(isa)) {
            EXPECT_THROW(simd::kernels(isa), Error);
        }
    }
}

// Every compiled variant against the scalar reference, over lengths that
// exercise the vector body, the unrolled body and every tail length.
TEST(Simd, VariantsMatchScalarReference) {
    const auto& ref = simd::scalar_kernels();
    Rng rng(42);
    for (auto isa : simd::available_isas()) {
        const auto& k = simd::kernels(isa);
        SCOPED_TRACE(std::string(simd::to_string(isa)));
        for (std::size_t n = 0; n <= 67; ++n) {
            for (int rep = 0; rep < 5; ++rep) {
                const double scale = rep == 4 ? 1e6 : 10.0;
                const auto a = random_vector(rng, n, scale);
                const auto b = random_vector(rng, n, scale);
                auto w = random_vector(rng, n, 1.0);
                for (double& x : w) x = std::abs(x);
                const double mag = scale * scale;

                EXPECT_NEAR(k.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), sum_tolerance(n, mag));
                EXPECT_NEAR(k.squared_distance(a.data(), b.data(), n), ref.squared_distance(a.data(), b.data(), n),
                            sum_tolerance(n, 4 * mag));
                EXPECT_NEAR(k.weighted_squared_distance(a.data(), b.data(), w.data(), n),
                            ref.weighted_squared_distance(a.data(), b.data(), w.data(), n), sum_tolerance(n, 4 * mag));

                auto y1 = b, y2 = b;
                k.axpy(0.75, a.data(), y1.data(), n);
                ref.axpy(0.75, a.data(), y2.data(), n);
                for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15 * 2 * scale);
            }
        }
    }
}

TEST(Simd, SquaredDistanceIsNonNegativeAndZeroOnSelf) {
    Rng rng(7);
    for (auto isa : simd::available_isas()) {
        const auto& k = simd::kernels(isa);
        for (std::size_t n : {1u, 4u, 9u, 33u}) {
            const auto a = random_vector(rng, n, 3.0);
            EXPECT_EQ(k.squared_distance(a.data(), a.data(), n), 0.0);
            const auto b = random_vector(rng, n, 3.0);
            EXPECT_GE(k.squared_distance(a.data(), b.data(), n), 0.0);
        }
    }
}

TEST(Simd, ActiveIsBestAvailable) {
    const auto isas = simd::available_isas();
    EXPECT_EQ(simd::active().isa, isas.back());
}
