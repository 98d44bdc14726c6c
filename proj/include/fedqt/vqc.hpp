// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include <fedqt/qsim.hpp>

namespace fedqt::vqc {

using State = qsim::StateVector<double>;

/// Circuit family: n_qubits wires, n_layers variational blocks. With
/// data_encoding the circuit starts as Ry(x_i)H on every wire and is read
/// out as per-qubit <Z>; without it the circuit starts as plain H on every
/// wire and is read out as the full basis-probability vector.
struct VqcArchitecture {
    int n_qubits = 0;
    int n_layers = 1;
    bool data_encoding = true;

    int param_count() const { return n_qubits * n_layers; }
};

/// Ry(x_i)H on every wire. Angles are radians; params are layer-major
/// (all angles of block 1 first).
State encode(const VqcArchitecture &arch, const Eigen::VectorXd &x);

/// Applies the n_layers variational blocks in place. Each block is a
/// nearest-neighbour CNOT chain CNOT(q, q+1), q = 0..n-2, followed by one
/// trainable Ry per wire.
void apply_variational(State &state, const VqcArchitecture &arch,
                       const Eigen::VectorXd &params);

/// Full pipeline encode -> variational -> per-qubit <Z>. Requires
/// data_encoding.
Eigen::VectorXd expectations(const VqcArchitecture &arch,
                             const Eigen::VectorXd &x,
                             const Eigen::VectorXd &params);

/// Full pipeline H-layer -> variational -> basis probabilities. Requires
/// !data_encoding.
Eigen::VectorXd basis_probs(const VqcArchitecture &arch,
                            const Eigen::VectorXd &params);

/// Parameter-shift Jacobian d expectations / d params, shape
/// n_qubits x param_count. Exact for Ry generators:
/// df/dt = [f(t + pi/2) - f(t - pi/2)] / 2.
Eigen::MatrixXd expectations_jacobian(const VqcArchitecture &arch,
                                      const Eigen::VectorXd &x,
                                      const Eigen::VectorXd &params);

/// Parameter-shift Jacobian d expectations / d x (the encoding angles are
/// Ry rotations too), shape n_qubits x n_qubits.
Eigen::MatrixXd expectations_input_jacobian(const VqcArchitecture &arch,
                                            const Eigen::VectorXd &x,
                                            const Eigen::VectorXd &params);

/// Parameter-shift Jacobian d basis_probs / d params, shape
/// 2^n_qubits x param_count. Probabilities are projector expectations, so
/// the shift rule is exact here as well.
Eigen::MatrixXd basis_probs_jacobian(const VqcArchitecture &arch,
                                     const Eigen::VectorXd &params);

/// Number of circuit output extractions (one per simulated circuit run)
/// since the last reset. Used by tests to account for parameter-shift cost
/// and to show that classical prediction paths run no circuits.
std::uint64_t circuit_eval_count();
void reset_circuit_eval_count();

} // namespace fedqt::vqc
