// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qpc/statevector.hpp"

using qpc::c64;
using qpc::StateVector;

namespace {

StateVector basis_state(std::size_t n, std::size_t index) {
    std::vector<c64> amps(std::size_t{1} << n, c64{0, 0});
    amps[index] = 1.0;
    return StateVector(n, std::move(amps));
}

StateVector random_state(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<c64> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& a : amps) {
        a = c64{u(rng), u(rng)};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : amps) a /= norm;
    return StateVector(n, std::move(amps));
}

}  // namespace

TEST_CASE("rx basics") {
    StateVector s(1);
    s.apply_rx(0, 0.0);
    CHECK(s.amplitudes()[0] == c64{1.0, 0.0});
    CHECK(s.amplitudes()[1] == c64{0.0, 0.0});

    StateVector t(1);
    t.apply_rx(0, std::numbers::pi);
    CHECK(std::abs(t.amplitudes()[0]) < 1e-15);
    CHECK(std::abs(t.amplitudes()[1] - c64{0.0, -1.0}) < 1e-15);

    CHECK_THROWS_AS(s.apply_rx(1, 0.3), std::out_of_range);
}

TEST_CASE("rx matches dense oracle on random angles") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-6.0, 6.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = angle(rng);
        StateVector s(1);
        s.apply_rx(0, theta);
        const auto expected = oracle::apply(oracle::rx(theta), {c64{1, 0}, c64{0, 0}});
        CHECK(std::abs(s.amplitudes()[0] - expected[0]) < 1e-14);
        CHECK(std::abs(s.amplitudes()[1] - expected[1]) < 1e-14);
    }
}

TEST_CASE("rz basics") {
    StateVector s(1);
    const double theta = 1.234;
    s.apply_rz(0, theta);
    CHECK(std::abs(s.amplitudes()[0] - std::polar(1.0, -theta / 2)) < 1e-15);
    CHECK(std::abs(std::abs(s.amplitudes()[0]) - 1.0) < 1e-15);

    const double inv = 1.0 / std::sqrt(2.0);
    StateVector h(1, {c64{inv, 0}, c64{inv, 0}});
    h.apply_rz(0, std::numbers::pi);
    CHECK(std::abs(h.amplitudes()[0] - inv * std::polar(1.0, -std::numbers::pi / 2)) < 1e-15);
    CHECK(std::abs(h.amplitudes()[1] - inv * std::polar(1.0, std::numbers::pi / 2)) < 1e-15);
}

TEST_CASE("rz matches dense oracle on a random 2-qubit state") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-6.0, 6.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double theta = angle(rng);
        const std::size_t q = trial % 2;
        StateVector s = random_state(2, rng);
        const auto expected = oracle::apply(oracle::lift(2, q, oracle::rz(theta)),
                                            s.amplitudes());
        s.apply_rz(q, theta);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(s.amplitudes()[i] - expected[i]) < 1e-14);
    }
}

TEST_CASE("cnot definition and bit ordering") {
    // |10> means qubit 0 (MSB) is 1.
    StateVector s = basis_state(2, 0b10);
    s.apply_cnot(0, 1);
    CHECK(std::abs(s.amplitudes()[0b11] - c64{1, 0}) < 1e-15);

    StateVector z = basis_state(2, 0b00);
    z.apply_cnot(0, 1);
    CHECK(std::abs(z.amplitudes()[0b00] - c64{1, 0}) < 1e-15);

    CHECK_THROWS_AS(s.apply_cnot(1, 1), std::invalid_argument);
}

TEST_CASE("cnot matches permutation-matrix oracle on random 3-qubit states") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t c = trial % 3;
        const std::size_t t = (c + 1 + trial % 2) % 3;
        StateVector s = random_state(3, rng);
        const auto expected = oracle::apply(oracle::cnot(3, c, t), s.amplitudes());
        s.apply_cnot(c, t);
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(std::abs(s.amplitudes()[i] - expected[i]) < 1e-14);
    }
}

TEST_CASE("cphase basics and oracle") {
    StateVector s = basis_state(2, 0b11);
    s.apply_cphase(0, 1, std::numbers::pi);
    CHECK(std::abs(s.amplitudes()[0b11] - c64{-1, 0}) < 1e-14);

    StateVector u = basis_state(2, 0b01);
    u.apply_cphase(0, 1, 0.77);
    CHECK(std::abs(u.amplitudes()[0b01] - c64{1, 0}) < 1e-15);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(-6.0, 6.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double phi = angle(rng);
        StateVector r = random_state(3, rng);
        const auto expected = oracle::apply(oracle::cphase(3, 0, 2, phi), r.amplitudes());
        r.apply_cphase(0, 2, phi);
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(std::abs(r.amplitudes()[i] - expected[i]) < 1e-14);
    }
}

TEST_CASE("expect_z eigenstates and rotation identity") {
    CHECK(basis_state(1, 0).expect_z(0) == 1.0);
    CHECK(basis_state(1, 1).expect_z(0) == -1.0);
    // Same convention as the CNOT test: qubit 0 of |10> reads -1.
    CHECK(basis_state(2, 0b10).expect_z(0) == -1.0);

    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> angle(-6.0, 6.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = angle(rng);
        StateVector s(1);
        s.apply_rx(0, theta);
        CHECK(s.expect_z(0) == Catch::Approx(std::cos(theta)).margin(1e-12));
    }
}

TEST_CASE("expect_z is invariant under global phase") {
    std::mt19937_64 rng(23);
    StateVector s = random_state(3, rng);
    StateVector t = s;
    const c64 phase = std::polar(1.0, 2.1317);
    for (auto& a : t.amplitudes()) a *= phase;
    for (std::size_t q = 0; q < 3; ++q)
        CHECK(std::abs(s.expect_z(q) - t.expect_z(q)) < 1e-12);
}

TEST_CASE("norm preserved over long random gate sequences") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> angle(-6.0, 6.0);
    StateVector s = random_state(3, rng);
    const int m = 200;
    for (int g = 0; g < m; ++g) {
        switch (g % 4) {
            case 0: s.apply_rx(g % 3, angle(rng)); break;
            case 1: s.apply_rz((g + 1) % 3, angle(rng)); break;
            case 2: s.apply_cnot(g % 3, (g + 1) % 3); break;
            case 3: s.apply_cphase(g % 3, (g + 2) % 3, angle(rng)); break;
        }
    }
    CHECK(std::abs(s.norm() - 1.0) < 1e-10 * m);
}
