// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include <fedqt/rng.hpp>
#include <fedqt/vqc.hpp>

#include "oracles.hpp"

using fedqt::Rng;
using fedqt::vqc::VqcArchitecture;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

/// Dense-matrix replay of the whole circuit, independent of the engine:
/// explicit Kronecker-lifted gates multiplied onto the basis state.
VectorXcd dense_circuit_state(const VqcArchitecture &arch, const VectorXd *x,
                              const VectorXd &params) {
    const Index dim = Index{1} << arch.n_qubits;
    VectorXcd v = VectorXcd::Zero(dim);
    v[0] = 1.0;
    for (int q = 0; q < arch.n_qubits; ++q) {
        v = oracles::single_qubit_matrix(arch.n_qubits, q,
                                         oracles::hadamard2()) *
            v;
    }
    if (x != nullptr) {
        for (int q = 0; q < arch.n_qubits; ++q) {
            v = oracles::single_qubit_matrix(arch.n_qubits, q,
                                             oracles::ry2((*x)[q])) *
                v;
        }
    }
    for (int layer = 0; layer < arch.n_layers; ++layer) {
        for (int q = 0; q + 1 < arch.n_qubits; ++q) {
            v = oracles::cnot_matrix(arch.n_qubits, q, q + 1) * v;
        }
        for (int q = 0; q < arch.n_qubits; ++q) {
            v = oracles::single_qubit_matrix(
                    arch.n_qubits, q,
                    oracles::ry2(params[layer * arch.n_qubits + q])) *
                v;
        }
    }
    return v;
}

VectorXd dense_expectations(const VqcArchitecture &arch, const VectorXd &x,
                            const VectorXd &params) {
    const VectorXcd v = dense_circuit_state(arch, &x, params);
    VectorXd out(arch.n_qubits);
    for (int q = 0; q < arch.n_qubits; ++q) {
        const Index bit = Index{1} << (arch.n_qubits - 1 - q);
        double acc = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
            acc += ((i & bit) ? -1.0 : 1.0) * std::norm(v[i]);
        }
        out[q] = acc;
    }
    return out;
}

VectorXd random_angles(Rng &rng, Eigen::Index n) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = rng.uniform(-M_PI, M_PI);
    }
    return v;
}

/// Marginal probability that qubit q reads 1.
double one_marginal(const VectorXd &probs, int n_qubits, int q) {
    const Index bit = Index{1} << (n_qubits - 1 - q);
    double acc = 0.0;
    for (Index i = 0; i < probs.size(); ++i) {
        if (i & bit) acc += probs[i];
    }
    return acc;
}

} // namespace

TEST_CASE("encode: zero angles give the uniform superposition") {
    for (int n : {1, 2, 4}) {
        VqcArchitecture arch{n, 1, true};
        auto state = fedqt::vqc::encode(arch, VectorXd::Zero(n));
        const VectorXd probs = state.probabilities();
        for (Index i = 0; i < probs.size(); ++i) {
            CHECK(probs[i] == doctest::Approx(1.0 / (1 << n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("encode: one qubit at pi/2 lands exactly on |1>") {
    VqcArchitecture arch{1, 1, true};
    VectorXd x(1);
    x << M_PI / 2;
    auto state = fedqt::vqc::encode(arch, x);
    CHECK(std::abs(state.amplitudes()(0)) < 1e-15);
    CHECK(std::abs(state.amplitudes()(1) - 1.0) < 1e-15);
}

TEST_CASE("encode: perturbing one input leaves other marginals untouched") {
    Rng rng(11);
    VqcArchitecture arch{3, 1, true};
    VectorXd x = random_angles(rng, 3);
    VectorXd y = x;
    y[0] = rng.uniform(-M_PI, M_PI);
    const VectorXd px = fedqt::vqc::encode(arch, x).probabilities();
    const VectorXd py = fedqt::vqc::encode(arch, y).probabilities();
    for (int q = 1; q < 3; ++q) {
        CHECK(std::abs(one_marginal(px, 3, q) - one_marginal(py, 3, q)) <
              1e-12);
    }
}

TEST_CASE("encode: input validation") {
    VqcArchitecture arch{2, 1, true};
    CHECK_THROWS_AS(fedqt::vqc::encode(arch, VectorXd::Zero(3)),
                    std::invalid_argument);
    VqcArchitecture no_encoding{2, 1, false};
    CHECK_THROWS_AS(fedqt::vqc::encode(no_encoding, VectorXd::Zero(2)),
                    std::invalid_argument);
    VqcArchitecture too_big{17, 1, true};
    CHECK_THROWS_AS(fedqt::vqc::encode(too_big, VectorXd::Zero(17)),
                    std::invalid_argument);
}

TEST_CASE("apply_variational: zero angles fix |00> and the uniform state") {
    VqcArchitecture arch{2, 1, true};
    fedqt::vqc::State zeros(2);
    fedqt::vqc::apply_variational(zeros, arch, VectorXd::Zero(2));
    CHECK(std::abs(zeros.amplitudes()(0) - 1.0) < 1e-15);

    auto uniform = fedqt::vqc::encode(arch, VectorXd::Zero(2));
    fedqt::vqc::apply_variational(uniform, arch, VectorXd::Zero(2));
    const VectorXd probs = uniform.probabilities();
    for (Index i = 0; i < 4; ++i) {
        CHECK(probs[i] == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("apply_variational: matches the dense-matrix oracle") {
    Rng rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        VqcArchitecture arch{3, 2, true};
        const VectorXd x = random_angles(rng, 3);
        const VectorXd params = random_angles(rng, arch.param_count());
        auto state = fedqt::vqc::encode(arch, x);
        fedqt::vqc::apply_variational(state, arch, params);
        const VectorXcd ref = dense_circuit_state(arch, &x, params);
        for (Index i = 0; i < ref.size(); ++i) {
            CHECK(std::abs(state.amplitudes()(i) - ref[i]) < 1e-12);
        }
    }
}

TEST_CASE("apply_variational: parameter length and state size are checked") {
    VqcArchitecture arch{2, 2, true};
    fedqt::vqc::State state(2);
    CHECK_THROWS_AS(fedqt::vqc::apply_variational(state, arch,
                                                  VectorXd::Zero(3)),
                    std::invalid_argument);
    fedqt::vqc::State wrong(3);
    CHECK_THROWS_AS(fedqt::vqc::apply_variational(wrong, arch,
                                                  VectorXd::Zero(4)),
                    std::invalid_argument);
}

TEST_CASE("expectations: single-qubit closed form -sin(x + sum of angles)") {
    Rng rng(31);
    for (int layers : {1, 3}) {
        VqcArchitecture arch{1, layers, true};
        for (int rep = 0; rep < 20; ++rep) {
            VectorXd x = random_angles(rng, 1);
            VectorXd params = random_angles(rng, layers);
            const VectorXd out = fedqt::vqc::expectations(arch, x, params);
            CHECK(out[0] ==
                  doctest::Approx(-std::sin(x[0] + params.sum())).epsilon(
                      1e-12));
        }
    }
    // Spot value from the closed form: x=0, theta=pi/2 -> exactly -1.
    VqcArchitecture arch{1, 1, true};
    VectorXd x = VectorXd::Zero(1);
    VectorXd params(1);
    params << M_PI / 2;
    CHECK(fedqt::vqc::expectations(arch, x, params)[0] ==
          doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("expectations: zero angles and zero input give zero readout") {
    VqcArchitecture arch{3, 2, true};
    const VectorXd out = fedqt::vqc::expectations(arch, VectorXd::Zero(3),
                                                  VectorXd::Zero(6));
    for (int q = 0; q < 3; ++q) {
        CHECK(std::abs(out[q]) < 1e-12);
    }
}

TEST_CASE("expectations: agrees with the dense oracle on random circuits") {
    Rng rng(37);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(rng.below(3));
        const int layers = 1 + static_cast<int>(rng.below(3));
        VqcArchitecture arch{n, layers, true};
        const VectorXd x = random_angles(rng, n);
        const VectorXd params = random_angles(rng, arch.param_count());
        const VectorXd got = fedqt::vqc::expectations(arch, x, params);
        const VectorXd ref = dense_expectations(arch, x, params);
        for (int q = 0; q < n; ++q) {
            CHECK(std::abs(got[q] - ref[q]) < 1e-12);
        }
    }
}

TEST_CASE("expectations: outputs stay in [-1, 1] over many random configs") {
    Rng rng(41);
    for (int rep = 0; rep < 10000; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(3));
        VqcArchitecture arch{n, 1, true};
        const VectorXd out = fedqt::vqc::expectations(
            arch, random_angles(rng, n), random_angles(rng, n));
        for (int q = 0; q < n; ++q) {
            CHECK(out[q] >= -1.0);
            CHECK(out[q] <= 1.0);
        }
    }
}

TEST_CASE("expectations: 2pi-periodic in every angle") {
    Rng rng(43);
    VqcArchitecture arch{3, 2, true};
    const VectorXd x = random_angles(rng, 3);
    const VectorXd params = random_angles(rng, arch.param_count());
    const VectorXd base = fedqt::vqc::expectations(arch, x, params);
    for (Index k = 0; k < params.size(); ++k) {
        VectorXd shifted = params;
        shifted[k] += 2.0 * M_PI;
        const VectorXd out = fedqt::vqc::expectations(arch, x, shifted);
        CHECK((out - base).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("basis_probs: zero angles give the uniform distribution") {
    VqcArchitecture arch{3, 2, false};
    const VectorXd probs = fedqt::vqc::basis_probs(arch, VectorXd::Zero(6));
    for (Index i = 0; i < probs.size(); ++i) {
        CHECK(probs[i] == doctest::Approx(1.0 / 8).epsilon(1e-12));
    }
}

TEST_CASE("basis_probs: normalized, matches dense oracle, rejects encoding") {
    Rng rng(47);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const int layers = 1 + static_cast<int>(rng.below(3));
        VqcArchitecture arch{n, layers, false};
        const VectorXd params = random_angles(rng, arch.param_count());
        const VectorXd probs = fedqt::vqc::basis_probs(arch, params);
        CHECK(std::abs(probs.sum() - 1.0) < 1e-10);
        const VectorXcd ref = dense_circuit_state(arch, nullptr, params);
        for (Index i = 0; i < ref.size(); ++i) {
            CHECK(std::abs(probs[i] - std::norm(ref[i])) < 1e-12);
        }
    }

    VqcArchitecture two{2, 1, false};
    VectorXd theta(2);
    theta << M_PI, 0.0;
    const VectorXd got = fedqt::vqc::basis_probs(two, theta);
    const VectorXcd ref = dense_circuit_state(two, nullptr, theta);
    for (Index i = 0; i < 4; ++i) {
        CHECK(std::abs(got[i] - std::norm(ref[i])) < 1e-12);
    }

    VqcArchitecture encoding{2, 1, true};
    CHECK_THROWS_AS(fedqt::vqc::basis_probs(encoding, VectorXd::Zero(2)),
                    std::invalid_argument);
}

TEST_CASE("parameter-shift Jacobians match finite differences") {
    Rng rng(53);
    int checked = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const int layers = 1 + static_cast<int>(rng.below(3));
        VqcArchitecture arch{n, layers, true};
        const VectorXd x = random_angles(rng, n);
        const VectorXd params = random_angles(rng, arch.param_count());
        const MatrixXd jac =
            fedqt::vqc::expectations_jacobian(arch, x, params);
        const MatrixXd ref = oracles::fd_jacobian(
            [&](const VectorXd &p) {
                return fedqt::vqc::expectations(arch, x, p);
            },
            params, 1e-4);
        CHECK(oracles::gradients_agree(jac, ref, 1e-6, 1e-4));
        ++checked;
    }
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const int layers = 1 + static_cast<int>(rng.below(3));
        VqcArchitecture arch{n, layers, false};
        const VectorXd params = random_angles(rng, arch.param_count());
        const MatrixXd jac = fedqt::vqc::basis_probs_jacobian(arch, params);
        const MatrixXd ref = oracles::fd_jacobian(
            [&](const VectorXd &p) {
                return fedqt::vqc::basis_probs(arch, p);
            },
            params, 1e-4);
        CHECK(oracles::gradients_agree(jac, ref, 1e-6, 1e-4));
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("parameter-shift input Jacobian matches finite differences") {
    Rng rng(59);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const int layers = 1 + static_cast<int>(rng.below(2));
        VqcArchitecture arch{n, layers, true};
        const VectorXd x = random_angles(rng, n);
        const VectorXd params = random_angles(rng, arch.param_count());
        const MatrixXd jac =
            fedqt::vqc::expectations_input_jacobian(arch, x, params);
        const MatrixXd ref = oracles::fd_jacobian(
            [&](const VectorXd &xi) {
                return fedqt::vqc::expectations(arch, xi, params);
            },
            x, 1e-4);
        CHECK(oracles::gradients_agree(jac, ref, 1e-6, 1e-4));
    }
}

TEST_CASE("parameter-shift: last-layer rotations on other wires have zero "
          "gradient entries") {
    Rng rng(61);
    VqcArchitecture arch{3, 2, true};
    const VectorXd x = random_angles(rng, 3);
    const VectorXd params = random_angles(rng, arch.param_count());
    const MatrixXd jac = fedqt::vqc::expectations_jacobian(arch, x, params);
    const int base = (arch.n_layers - 1) * arch.n_qubits;
    for (int q = 0; q < 3; ++q) {
        for (int other = 0; other < 3; ++other) {
            if (other == q) continue;
            // A final Ry on a different wire commutes with measuring Z here,
            // so the readout is constant in that parameter.
            CHECK(std::abs(jac(q, base + other)) < 1e-12);
        }
    }
}

TEST_CASE("parameter-shift: basis-probability gradients sum to zero over "
          "outcomes") {
    Rng rng(67);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const int layers = 1 + static_cast<int>(rng.below(3));
        VqcArchitecture arch{n, layers, false};
        const VectorXd params = random_angles(rng, arch.param_count());
        const MatrixXd jac = fedqt::vqc::basis_probs_jacobian(arch, params);
        for (Index k = 0; k < jac.cols(); ++k) {
            CHECK(std::abs(jac.col(k).sum()) < 1e-10);
        }
    }
}

TEST_CASE("circuit evaluation counter tracks every readout") {
    VqcArchitecture enc{3, 2, true};
    VqcArchitecture plain{3, 2, false};
    const VectorXd x = VectorXd::Zero(3);
    const VectorXd params = VectorXd::Zero(6);

    fedqt::vqc::reset_circuit_eval_count();
    CHECK(fedqt::vqc::circuit_eval_count() == 0);

    fedqt::vqc::expectations(enc, x, params);
    CHECK(fedqt::vqc::circuit_eval_count() == 1);

    fedqt::vqc::basis_probs(plain, params);
    CHECK(fedqt::vqc::circuit_eval_count() == 2);

    fedqt::vqc::reset_circuit_eval_count();
    fedqt::vqc::expectations_jacobian(enc, x, params);
    CHECK(fedqt::vqc::circuit_eval_count() == 2 * 6);

    fedqt::vqc::reset_circuit_eval_count();
    fedqt::vqc::expectations_input_jacobian(enc, x, params);
    CHECK(fedqt::vqc::circuit_eval_count() == 2 * 3);

    fedqt::vqc::reset_circuit_eval_count();
    fedqt::vqc::basis_probs_jacobian(plain, params);
    CHECK(fedqt::vqc::circuit_eval_count() == 2 * 6);
    fedqt::vqc::reset_circuit_eval_count();
}

TEST_CASE("jacobian entry points validate their inputs") {
    VqcArchitecture enc{2, 1, true};
    VqcArchitecture plain{2, 1, false};
    CHECK_THROWS_AS(fedqt::vqc::expectations_jacobian(plain, VectorXd::Zero(2),
                                                      VectorXd::Zero(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fedqt::vqc::expectations_jacobian(enc, VectorXd::Zero(3),
                                                      VectorXd::Zero(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fedqt::vqc::expectations_jacobian(enc, VectorXd::Zero(2),
                                                      VectorXd::Zero(5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fedqt::vqc::basis_probs_jacobian(enc, VectorXd::Zero(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fedqt::vqc::basis_probs_jacobian(plain, VectorXd::Zero(3)),
                    std::invalid_argument);
}
