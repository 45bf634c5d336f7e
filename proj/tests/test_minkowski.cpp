#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nullfrenet/frame.hpp"
#include "nullfrenet/minkowski.hpp"

using namespace nullfrenet;

namespace {

// Independent permutation-sum oracle for the Levi-Civita contractions:
// enumerates index tuples, computes the parity by explicit inversion count,
// and applies eps_{0..} = -1 and the metric by hand.
int oracle_parity(const int* a, int n) {
    int s = 1;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (a[i] == a[j]) return 0;
            if (a[i] > a[j]) s = -s;
        }
    return s;
}

FourVector oracle_contract3(const FourVector& p, const FourVector& x) {
    FourVector lowered = FourVector::zero(3);
    for (int mu = 0; mu < 3; ++mu)
        for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 3; ++t) {
                const int idx[3] = {mu, r, t};
                lowered[mu] += -oracle_parity(idx, 3) * p[r] * x[t];
            }
    FourVector up = lowered;
    up[1] = -up[1];
    up[2] = -up[2];
    return up;
}

FourVector oracle_contract4(const FourVector& p, const BiVector& m) {
    FourVector lowered = FourVector::zero(4);
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu)
            for (int r = 0; r < 4; ++r)
                for (int t = 0; t < 4; ++t) {
                    const int idx[4] = {mu, nu, r, t};
                    lowered[mu] += -oracle_parity(idx, 4) * p[nu] * m(r, t);
                }
    FourVector up = lowered;
    for (int i = 1; i < 4; ++i) up[i] = -up[i];
    return up;
}

FourVector random_vec(std::mt19937& rng, int dim) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    FourVector v = FourVector::zero(dim);
    for (int i = 0; i < dim; ++i) v[i] = u(rng);
    return v;
}

double max_abs_diff(const FourVector& a, const FourVector& b) {
    double m = 0.0;
    for (int i = 0; i < a.dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("minkowski dot: signature and basic values") {
    REQUIRE(dot(FourVector(1, 0, 0, 0), FourVector(1, 0, 0, 0)) == 1.0);
    REQUIRE(dot(FourVector(1, 1, 0, 0), FourVector(1, 1, 0, 0)) == 0.0);

    const NullFrame f = NullFrame::standard(4);
    REQUIRE(dot(f.e_plus, f.e_minus) == Catch::Approx(1.0).margin(1e-15));

    REQUIRE_THROWS_AS(dot(FourVector(1, 0, 0), FourVector(1, 0, 0, 0)), DimensionMismatch);
}

TEST_CASE("gram table of the standard frame holds exactly") {
    for (int dim : {3, 4}) {
        const NullFrame f = NullFrame::standard(dim);
        REQUIRE(gram_residual(f) < 1e-15);
        REQUIRE(std::abs(dot(f.e_plus, f.e_plus)) < 1e-16);
        REQUIRE(std::abs(dot(f.e_minus, f.e_minus)) < 1e-16);
        REQUIRE(dot(f.e_plus, f.e_minus) == Catch::Approx(1.0).margin(1e-15));
        REQUIRE(dot(f.e1, f.e1) == -1.0);
        if (dim == 4) REQUIRE(dot(f.e2, f.e2) == -1.0);
    }
}

TEST_CASE("dot is symmetric and bilinear on random inputs") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int n = 0; n < 200; ++n) {
        const int dim = (n % 2 == 0) ? 4 : 3;
        const FourVector a = random_vec(rng, dim), b = random_vec(rng, dim), c = random_vec(rng, dim);
        const double s = u(rng), t = u(rng);
        REQUIRE(dot(a, b) == Catch::Approx(dot(b, a)).margin(1e-13));
        REQUIRE(dot(s * a + t * b, c) == Catch::Approx(s * dot(a, c) + t * dot(b, c)).margin(1e-12));
    }
}

TEST_CASE("wedge: antisymmetrization with weight 1/2") {
    std::mt19937 rng(99);
    const FourVector v = random_vec(rng, 4);
    const BiVector w = wedge(v, v);
    for (int i = 0; i < 6; ++i) REQUIRE(w.m[i] == 0.0);

    const BiVector e01 = wedge(FourVector(1, 0, 0, 0), FourVector(0, 1, 0, 0));
    REQUIRE(e01(0, 1) == 0.5);
    REQUIRE(e01(1, 0) == -0.5);

    const FourVector a = random_vec(rng, 4), b = random_vec(rng, 4);
    const BiVector ab = wedge(a, b), ba = wedge(b, a);
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) REQUIRE(ab(mu, nu) == Catch::Approx(-ba(mu, nu)).margin(1e-15));
}

TEST_CASE("levi_civita_contract3: convention and oracle agreement") {
    const NullFrame f = NullFrame::standard(3);
    REQUIRE(frame_orientation(f) == Catch::Approx(1.0).margin(1e-14));

    // Antisymmetry: P contracted with itself.
    const FourVector p(1.3, -0.2, 0.7);
    REQUIRE(max_abs_diff(levi_civita_contract3(p, p), FourVector::zero(3)) < 1e-15);

    // Spot value computed by the permutation-sum oracle.
    const FourVector spot = levi_civita_contract3(FourVector(1, 0, 0), FourVector(0, 1, 0));
    REQUIRE(max_abs_diff(spot, oracle_contract3(FourVector(1, 0, 0), FourVector(0, 1, 0))) < 1e-15);
    REQUIRE(spot[0] == 0.0);
    REQUIRE(spot[1] == 0.0);
    REQUIRE(spot[2] == 1.0);

    std::mt19937 rng(4242);
    for (int n = 0; n < 100; ++n) {
        const FourVector a = random_vec(rng, 3), b = random_vec(rng, 3);
        const FourVector got = levi_civita_contract3(a, b), want = oracle_contract3(a, b);
        double scale = 0.0;
        for (int i = 0; i < 3; ++i) scale = std::max(scale, std::abs(want[i]));
        REQUIRE(max_abs_diff(got, want) <= 1e-13 * std::max(1.0, scale));
    }

    REQUIRE_THROWS_AS(levi_civita_contract3(FourVector(1, 0, 0, 0), FourVector(0, 1, 0, 0)),
                      DimensionMismatch);
}

TEST_CASE("levi_civita_contract4: convention and oracle agreement") {
    const NullFrame f = NullFrame::standard(4);
    REQUIRE(frame_orientation(f) == Catch::Approx(1.0).margin(1e-14));

    std::mt19937 rng(777);
    // M built from P in one slot: contraction is orthogonal to P.
    const FourVector p = random_vec(rng, 4);
    const BiVector m = wedge(p, random_vec(rng, 4));
    const FourVector w = levi_civita_contract4(p, m);
    REQUIRE(std::abs(dot(w, p)) < 1e-13);

    for (int n = 0; n < 100; ++n) {
        const FourVector a = random_vec(rng, 4);
        const BiVector mm = wedge(random_vec(rng, 4), random_vec(rng, 4));
        const FourVector got = levi_civita_contract4(a, mm), want = oracle_contract4(a, mm);
        double scale = 0.0;
        for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(want[i]));
        REQUIRE(max_abs_diff(got, want) <= 1e-13 * std::max(1.0, scale));
    }

    REQUIRE_THROWS_AS(levi_civita_contract4(FourVector(1, 0, 0), BiVector::zero(4)), DimensionMismatch);
}
