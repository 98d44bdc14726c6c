// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>

#include <fedqt/qsim.hpp>
#include <fedqt/rng.hpp>

#include "oracles.hpp"

using fedqt::Rng;
using fedqt::qsim::StateVector;
using Eigen::Index;
using Eigen::VectorXcd;

namespace {

/// Random circuit description used by the property tests. op 0 = H,
/// 1 = Ry, 2 = CNOT.
struct GateStep {
    int op;
    int q0;
    int q1;
    double angle;
};

GateStep random_gate(Rng &rng, int n) {
    GateStep g{};
    g.op = static_cast<int>(rng.below(n > 1 ? 3 : 2));
    g.q0 = static_cast<int>(rng.below(n));
    if (g.op == 2) {
        do {
            g.q1 = static_cast<int>(rng.below(n));
        } while (g.q1 == g.q0);
    }
    g.angle = rng.uniform(-M_PI, M_PI);
    return g;
}

void apply_to_engine(StateVector<double> &s, const GateStep &g) {
    switch (g.op) {
    case 0: s.apply_hadamard(g.q0); break;
    case 1: s.apply_ry(g.q0, g.angle); break;
    default: s.apply_cnot(g.q0, g.q1); break;
    }
}

VectorXcd apply_to_oracle(const VectorXcd &v, const GateStep &g, int n) {
    switch (g.op) {
    case 0:
        return oracles::single_qubit_matrix(n, g.q0, oracles::hadamard2()) * v;
    case 1:
        return oracles::single_qubit_matrix(n, g.q0, oracles::ry2(g.angle)) *
               v;
    default: return oracles::cnot_matrix(n, g.q0, g.q1) * v;
    }
}

} // namespace

TEST_CASE("zero state has a single unit amplitude") {
    StateVector<double> one(1);
    CHECK(one.size() == 2);
    CHECK(one.amplitudes()[0] == std::complex<double>(1, 0));
    CHECK(one.amplitudes()[1] == std::complex<double>(0, 0));

    StateVector<double> two(2);
    CHECK(two.size() == 4);
    CHECK(two.amplitudes()[0] == std::complex<double>(1, 0));
    for (Index i = 1; i < 4; ++i) {
        CHECK(two.amplitudes()[i] == std::complex<double>(0, 0));
    }

    StateVector<double> eleven(11);
    CHECK(eleven.size() == 2048);
    CHECK(eleven.amplitudes()[0] == std::complex<double>(1, 0));
    CHECK(eleven.probabilities().sum() == doctest::Approx(1.0));
}

TEST_CASE("register size limits are enforced") {
    CHECK_THROWS_AS(StateVector<double>(0), std::invalid_argument);
    CHECK_THROWS_AS(StateVector<double>(-3), std::invalid_argument);
    CHECK_THROWS_AS(StateVector<double>(17), std::invalid_argument);
}

TEST_CASE("hadamard on |0> gives the even superposition") {
    StateVector<double> s(1);
    s.apply_hadamard(0);
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(s.amplitudes()[0].real() == doctest::Approx(inv).epsilon(1e-14));
    CHECK(s.amplitudes()[1].real() == doctest::Approx(inv).epsilon(1e-14));
}

TEST_CASE("hadamard is self-inverse on random states") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));
        StateVector<double> s(n);
        for (int k = 0; k < 12; ++k) apply_to_engine(s, random_gate(rng, n));
        const VectorXcd before = s.amplitudes();
        const int q = static_cast<int>(rng.below(n));
        s.apply_hadamard(q);
        s.apply_hadamard(q);
        CHECK((s.amplitudes() - before).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("hadamard on every qubit of |000> is uniform") {
    StateVector<double> s(3);
    for (int q = 0; q < 3; ++q) s.apply_hadamard(q);
    const double expected = 1.0 / std::sqrt(8.0);
    for (Index i = 0; i < 8; ++i) {
        CHECK(s.amplitudes()[i].real() ==
              doctest::Approx(expected).epsilon(1e-14));
        CHECK(s.amplitudes()[i].imag() == 0.0);
    }
}

TEST_CASE("ry special angles") {
    SUBCASE("zero angle is the identity") {
        Rng rng(3);
        StateVector<double> s(2);
        for (int k = 0; k < 8; ++k) apply_to_engine(s, random_gate(rng, 2));
        const VectorXcd before = s.amplitudes();
        s.apply_ry(1, 0.0);
        CHECK(s.amplitudes() == before);
    }
    SUBCASE("pi maps |0> to |1>") {
        StateVector<double> s(1);
        s.apply_ry(0, M_PI);
        CHECK(std::abs(s.amplitudes()[0]) < 1e-15);
        CHECK(s.amplitudes()[1].real() == doctest::Approx(1.0));
    }
    SUBCASE("pi/2 on |0>") {
        StateVector<double> s(1);
        s.apply_ry(0, M_PI / 2);
        const double half = std::sqrt(2.0) / 2.0;
        CHECK(s.amplitudes()[0].real() == doctest::Approx(half));
        CHECK(s.amplitudes()[1].real() == doctest::Approx(half));
    }
    SUBCASE("non-finite angles are rejected") {
        StateVector<double> s(1);
        CHECK_THROWS_AS(s.apply_ry(0, std::nan("")), std::invalid_argument);
        CHECK_THROWS_AS(s.apply_ry(0, INFINITY), std::invalid_argument);
    }
}

TEST_CASE("cnot basics") {
    SUBCASE("|10> becomes |11>") {
        StateVector<double> s(2);
        s.apply_ry(0, M_PI); // |10>
        s.apply_cnot(0, 1);
        CHECK(std::abs(s.amplitudes()[3]) == doctest::Approx(1.0));
    }
    SUBCASE("control 0 leaves the state alone") {
        StateVector<double> s(2);
        s.apply_ry(1, 0.7); // qubit 0 stays |0>
        const VectorXcd before = s.amplitudes();
        s.apply_cnot(0, 1);
        CHECK(s.amplitudes() == before);
    }
    SUBCASE("|++> is a cnot eigenstate (dense-matrix check)") {
        StateVector<double> s(2);
        s.apply_hadamard(0);
        s.apply_hadamard(1);
        const VectorXcd expected =
            oracles::cnot_matrix(2, 0, 1) * s.amplitudes();
        s.apply_cnot(0, 1);
        CHECK((s.amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-15);
        // and the eigenstate property itself
        StateVector<double> plus(2);
        plus.apply_hadamard(0);
        plus.apply_hadamard(1);
        CHECK((s.amplitudes() - plus.amplitudes()).cwiseAbs().maxCoeff() <
              1e-12);
    }
    SUBCASE("control equal to target is rejected") {
        StateVector<double> s(2);
        CHECK_THROWS_AS(s.apply_cnot(1, 1), std::invalid_argument);
    }
}

TEST_CASE("qubit index range checks") {
    StateVector<double> s(3);
    CHECK_THROWS_AS(s.apply_hadamard(3), std::out_of_range);
    CHECK_THROWS_AS(s.apply_hadamard(-1), std::out_of_range);
    CHECK_THROWS_AS(s.apply_ry(5, 0.1), std::out_of_range);
    CHECK_THROWS_AS(s.apply_cnot(0, 4), std::out_of_range);
    CHECK_THROWS_AS(s.z_expectation(3), std::out_of_range);
}

TEST_CASE("z expectation on basis and superposition states") {
    StateVector<double> s(1);
    CHECK(s.z_expectation(0) == doctest::Approx(1.0));
    s.apply_ry(0, M_PI); // |1>
    CHECK(s.z_expectation(0) == doctest::Approx(-1.0));

    StateVector<double> h(1);
    h.apply_hadamard(0);
    CHECK(std::abs(h.z_expectation(0)) < 1e-12);
}

TEST_CASE("probabilities of simple states") {
    StateVector<double> s(2);
    Eigen::VectorXd p = s.probabilities();
    CHECK(p[0] == 1.0);
    CHECK(p.tail(3).cwiseAbs().maxCoeff() == 0.0);

    s.apply_hadamard(0);
    s.apply_hadamard(1);
    p = s.probabilities();
    for (Index i = 0; i < 4; ++i) {
        CHECK(p[i] == doctest::Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("z expectation equals the signed probability sum exactly") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4));
        StateVector<double> s(n);
        for (int k = 0; k < 15; ++k) apply_to_engine(s, random_gate(rng, n));
        const Eigen::VectorXd p = s.probabilities();
        for (int q = 0; q < n; ++q) {
            double acc = 0;
            const Index bit = Index{1} << (n - 1 - q);
            for (Index i = 0; i < p.size(); ++i) {
                acc += (i & bit) ? -p[i] : p[i];
            }
            CHECK(s.z_expectation(q) == acc);
        }
    }
}

TEST_CASE("norm is preserved over 1000 random gate sequences") {
    Rng rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(5)); // 2..6
        StateVector<double> s(n);
        const int len = 10 + static_cast<int>(rng.below(30));
        for (int k = 0; k < len; ++k) apply_to_engine(s, random_gate(rng, n));
        worst = std::max(worst, std::abs(s.squared_norm() - 1.0));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("every gate matches the dense Kronecker oracle on <= 4 qubits") {
    Rng rng(99);
    double worst = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4)); // 1..4
        StateVector<double> s(n);
        VectorXcd ref = VectorXcd::Zero(Index{1} << n);
        ref[0] = 1.0;
        for (int k = 0; k < 25; ++k) {
            const GateStep g = random_gate(rng, n);
            apply_to_engine(s, g);
            ref = apply_to_oracle(ref, g, n);
            worst = std::max(worst,
                             (s.amplitudes() - ref).cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("single-precision instantiation works") {
    StateVector<float> s(2);
    s.apply_hadamard(0);
    s.apply_ry(1, 0.3F);
    s.apply_cnot(0, 1);
    CHECK(std::abs(s.squared_norm() - 1.0F) < 1e-5F);
}
