#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cgl/errors.hpp"
#include "cgl/saturation.hpp"

using namespace cgl;

namespace {

FrequencySet freqs(int d, std::vector<Wavevector> v) { return {d, std::move(v)}; }

SubspaceBasis h0_1d() { return harmonic_basis(freqs(1, {{1}})); }

}  // namespace

TEST_CASE("is_generator: reference cases") {
    CHECK(is_generator(freqs(1, {{1}})));
    CHECK_FALSE(is_generator(freqs(1, {{2}})));
    CHECK(is_generator(freqs(3, {{1, 0, 0}, {0, 1, 0}, {1, 1, 1}})));
    CHECK_FALSE(is_generator(freqs(2, {{2, 0}, {0, 1}})));
    CHECK(is_generator(freqs(2, {{2, 1}, {1, 1}})));  // det = 1
    CHECK_FALSE(is_generator(freqs(2, {{1, 1}})));    // too few vectors
    CHECK(is_generator(freqs(1, {{2}, {3}})));        // gcd(2,3) = 1
}

TEST_CASE("is_generator agrees with an exact 3x3 determinant oracle on square sets") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> ui(-3, 3);
    int checked = 0;
    while (checked < 200) {
        std::vector<Wavevector> v(3, Wavevector(3));
        for (auto& k : v)
            for (auto& c : k) c = ui(rng);
        bool nonzero = true;
        for (const auto& k : v) nonzero = nonzero && !is_zero(k);
        if (!nonzero || v[0] == v[1] || v[0] == v[2] || v[1] == v[2]) continue;
        long long det = 0;
        det += static_cast<long long>(v[0][0]) * (static_cast<long long>(v[1][1]) * v[2][2] - static_cast<long long>(v[1][2]) * v[2][1]);
        det -= static_cast<long long>(v[0][1]) * (static_cast<long long>(v[1][0]) * v[2][2] - static_cast<long long>(v[1][2]) * v[2][0]);
        det += static_cast<long long>(v[0][2]) * (static_cast<long long>(v[1][0]) * v[2][1] - static_cast<long long>(v[1][1]) * v[2][0]);
        // For a square set the lattice is Z^3 iff |det| = 1.
        CHECK(is_generator(freqs(3, v)) == (std::llabs(det) == 1));
        ++checked;
    }
}

TEST_CASE("chain_condition: reference cases and witness validity") {
    // (l, l) pairs always succeed via self-chains
    auto rep = chain_condition(freqs(2, {{1, 1}}), 3);
    CHECK(rep.ok);

    CHECK_FALSE(chain_condition(freqs(2, {{1, 0}, {0, 1}}), 1).ok);
    auto rep2 = chain_condition(freqs(2, {{1, 0}, {0, 1}, {1, 1}}), 1);
    CHECK(rep2.ok);

    // every quoted witness has nonzero adjacent inner products, checked exactly
    for (const auto& w : rep2.pairs) {
        REQUIRE(w.ok);
        REQUIRE(w.chain.size() == 1);
        auto dot = [](const Wavevector& a, const Wavevector& b) {
            long long s = 0;
            for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long long>(a[i]) * b[i];
            return s;
        };
        CHECK(dot(w.l, w.chain.front()) != 0);
        CHECK(dot(w.chain.back(), w.m) != 0);
    }

    auto rep3 = chain_condition(freqs(2, {{1, 0}, {1, 1}}), 2);
    CHECK(rep3.ok);
    for (const auto& w : rep3.pairs) {
        auto dot = [](const Wavevector& a, const Wavevector& b) {
            long long s = 0;
            for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long long>(a[i]) * b[i];
            return s;
        };
        REQUIRE(w.chain.size() == 2);
        CHECK(dot(w.l, w.chain[0]) != 0);
        CHECK(dot(w.chain[0], w.chain[1]) != 0);
        CHECK(dot(w.chain[1], w.m) != 0);
    }
}

TEST_CASE("is_saturating: canonical sets") {
    for (int d : {1, 2, 3})
        for (int sigma : {1, 2}) CHECK(is_saturating(standard_frequency_set(d), sigma));
    CHECK_FALSE(is_saturating(freqs(2, {{1, 0}, {0, 1}}), 1));
    CHECK(is_saturating(freqs(1, {{1}}), 4));
    // (1,1)-(0,1) = (1,0), so the lattice is Z^2, and (1,1) bridges every pair
    CHECK(is_saturating(freqs(2, {{2, 0}, {0, 1}, {1, 1}}), 1));
    // without the bridge the pair ((2,0),(0,1)) has no sigma=1 chain
    CHECK(is_generator(freqs(2, {{2, 0}, {0, 1}, {1, 0}})));
    CHECK_FALSE(chain_condition(freqs(2, {{1, 0}, {0, 1}}), 1).ok);
}

TEST_CASE("standard frequency sets match the canonical example") {
    auto k1 = standard_frequency_set(1);
    REQUIRE(k1.vectors.size() == 1);
    CHECK(k1.vectors[0] == Wavevector{1});
    auto k2 = standard_frequency_set(2);
    REQUIRE(k2.vectors.size() == 2);
    CHECK(k2.vectors[0] == Wavevector{1, 0});
    CHECK(k2.vectors[1] == Wavevector{1, 1});
    auto k3 = standard_frequency_set(3);
    REQUIRE(k3.vectors.size() == 3);
    CHECK(k3.vectors[2] == Wavevector{1, 1, 1});
}

TEST_CASE("check_q_condition: reference cases") {
    auto K = freqs(1, {{1}});
    std::vector<TrigPolynomial> Q{constant_poly(1, 1.0), harmonic_sin({1}), harmonic_cos({1})};
    CHECK(check_q_condition(Q, K));

    std::vector<TrigPolynomial> no_const{harmonic_sin({1}), harmonic_cos({1})};
    CHECK_FALSE(check_q_condition(no_const, K));

    TrigPolynomial mixed = constant_poly(1, 2.0) + harmonic_sin({1});
    std::vector<TrigPolynomial> Q2{mixed, harmonic_sin({1}), harmonic_cos({1})};
    CHECK(check_q_condition(Q2, K));
}

TEST_CASE("grow: fixed point on constants; 1-d doubling; 2-d difference frequencies") {
    SubspaceBasis consts;
    consts.basis.push_back(constant_poly(1, 1.0));
    auto g = grow(consts);
    CHECK(g.dim() == 1);
    CHECK(projection_residual(constant_poly(1, 1.0), g) < 1e-12);

    auto h1 = grow(h0_1d());
    CHECK(h1.dim() == 5);
    for (const auto& target : {constant_poly(1, 1.0), harmonic_sin({1}), harmonic_cos({1}),
                               harmonic_sin({2}), harmonic_cos({2})})
        CHECK(projection_residual(target, h1) < 1e-10);

    // K = {(1,0),(1,1)}: one growth step contributes the sums/differences of
    // those two vectors; the difference frequency (1,-1) = (2,0)-(1,1) then
    // appears on the second step.
    auto h2d = grow(harmonic_basis(standard_frequency_set(2)));
    CHECK(projection_residual(harmonic_cos({0, 1}), h2d) < 1e-10);
    CHECK(projection_residual(harmonic_cos({2, 1}), h2d) < 1e-10);
    CHECK(projection_residual(harmonic_cos({1, -1}), grow(h2d)) < 1e-10);
}

TEST_CASE("grow is monotone and nesting holds along a chain") {
    auto chain = saturation_chain(h0_1d(), 3);
    REQUIRE(chain.levels.size() == 4);
    for (std::size_t j = 0; j + 1 < chain.levels.size(); ++j) {
        for (const auto& b : chain.levels[j].basis)
            CHECK(projection_residual(b, chain.levels[j + 1]) < 1e-10 * std::max(1.0, b.l2_norm()));
    }
    // degree bound: level j caps at 2^j * deg(H_0) in d = 1
    for (std::size_t j = 0; j < chain.levels.size(); ++j) {
        int deg = 0;
        for (const auto& b : chain.levels[j].basis) deg = std::max(deg, b.degree());
        CHECK(deg <= (1 << j));
    }
    // H_2 in d=1 is the full degree-<=4 trig space: dimension 9
    CHECK(chain.levels[2].dim() == 9);
    for (int k = 1; k <= 4; ++k) {
        CHECK(projection_residual(harmonic_sin({k}), chain.levels[2]) < 1e-9);
        CHECK(projection_residual(harmonic_cos({k}), chain.levels[2]) < 1e-9);
    }
}

TEST_CASE("saturation_chain: N = 0 and constant chains") {
    auto c0 = saturation_chain(h0_1d(), 0);
    CHECK(c0.levels.size() == 1);
    SubspaceBasis consts;
    consts.basis.push_back(constant_poly(2, 1.0));
    auto cc = saturation_chain(consts, 3);
    for (const auto& level : cc.levels) CHECK(level.dim() == 1);
}

TEST_CASE("decompose: trivial membership") {
    auto H = h0_1d();
    TrigPolynomial theta = constant_poly(1, 0.4) + 0.2 * harmonic_sin({1});
    auto dec = decompose(theta, H);
    CHECK(dec.parts.empty());
    CHECK(dec.residual < 1e-12);
    CHECK((dec.theta0 - theta).l2_norm() < 1e-12);
}

TEST_CASE("decompose: cos 2x = -1 + B(sqrt(2) sin x)") {
    auto dec = decompose(harmonic_cos({2}), h0_1d());
    REQUIRE(dec.parts.size() == 1);
    CHECK(dec.residual < 1e-10);
    CHECK(dec.theta0.term({0}).cos_coeff == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(dec.parts[0].term({1}).sin_coeff == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(std::abs(dec.parts[0].term({1}).cos_coeff) < 1e-9);
    // verify B(part) symbolically reproduces 1 + cos 2x
    auto b = squared_gradient(dec.parts[0]);
    CHECK(b.term({0}).cos_coeff == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b.term({2}).cos_coeff == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("decompose: sin 2x = -1 + B(sin x - cos x)") {
    auto dec = decompose(harmonic_sin({2}), h0_1d());
    REQUIRE(dec.parts.size() == 1);
    CHECK(dec.residual < 1e-10);
    CHECK(dec.theta0.term({0}).cos_coeff == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(dec.parts[0].term({1}).sin_coeff == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dec.parts[0].term({1}).cos_coeff == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("decompose: reported residual bounds the symbolic reconstruction error") {
    std::mt19937_64 rng(314);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto H = h0_1d();
    auto chain = saturation_chain(H, 1);
    for (int trial = 0; trial < 25; ++trial) {
        TrigPolynomial theta(1);
        for (const auto& b : chain.levels[1].basis) theta += nd(rng) * b;
        auto dec = decompose(theta, H);
        CHECK(dec.residual < 1e-8);
        TrigPolynomial rebuilt = dec.theta0;
        for (const auto& part : dec.parts) rebuilt += squared_gradient(part);
        CHECK((theta - rebuilt).l2_norm() <= dec.residual + 1e-12);
    }
}

TEST_CASE("decompose: failure raises DecompositionError") {
    // sin 3x is outside F(H_0) for H_0 = span{1, sin x, cos x}: B products
    // reach degree 2 only.
    auto H = h0_1d();
    DecomposeOptions opts;
    opts.restarts = 2;
    opts.max_iterations = 40;
    CHECK_THROWS_AS(decompose(harmonic_sin({3}), H, opts), DecompositionError);
}

TEST_CASE("basis validation flags rank deficiency") {
    SubspaceBasis bad;
    bad.basis.push_back(harmonic_sin({1}));
    bad.basis.push_back(2.0 * harmonic_sin({1}));
    CHECK_THROWS_AS(bad.validate(), InputError);

    FrequencySet dup{1, {{1}, {1}}};
    CHECK_THROWS_AS(dup.validate(), InputError);
    FrequencySet zero{2, {{0, 0}}};
    CHECK_THROWS_AS(zero.validate(), InputError);
}
