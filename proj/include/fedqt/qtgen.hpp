// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include <fedqt/vqc.hpp>

namespace fedqt::qtgen {

/// Smallest register whose basis can index p target weights:
/// ceil(log2(p)). Rejects p < 2.
int required_qubits(std::int64_t p);

/// +/-1-coded big-endian bit pattern of a basis index (bit for qubit 0
/// first), the classical-feature half of the mapping-model input.
Eigen::VectorXd basis_signs(int n_qubits, std::int64_t index);

/// Single affine-plus-tanh mapping model: one weight per coded bit, one
/// weight for the scaled probability, one bias.
struct MappingParams {
    Eigen::VectorXd weights;
    double bias = 0.0;
};

/// Weight generator: an encoding-free circuit on required_qubits(p) wires
/// whose basis probabilities, combined with each basis index's bit
/// pattern, are mapped to one generated weight apiece.
struct QtModel {
    std::int64_t p = 0;
    int n_layers = 1;
    Eigen::VectorXd gamma;
    MappingParams beta;

    int n_qubits() const { return required_qubits(p); }
    vqc::VqcArchitecture arch() const {
        return {n_qubits(), n_layers, false};
    }
    int quantum_param_count() const { return n_qubits() * n_layers; }
    int mapping_param_count() const { return n_qubits() + 2; }
};

/// kappa_i = tanh(weights . [signs, 2^n * prob] + bias). The probability
/// is rescaled by 2^n so it is commensurate with the +/-1 bit features.
double mapping_forward(const Eigen::VectorXd &signs, double prob,
                       const MappingParams &beta);

/// Generated weight vector of length p: the mapping model applied to the
/// first p basis states (higher basis states only contribute through
/// normalization of the probability vector).
Eigen::VectorXd generate_weights(const QtModel &model);

struct QtGradients {
    Eigen::VectorXd gamma;
    Eigen::VectorXd mapping_weights;
    double mapping_bias = 0.0;
};

/// Chain rule from a loss gradient over the generated weights back to the
/// circuit angles (via the parameter-shift probability Jacobian) and the
/// mapping parameters. Accumulation order is fixed, so results are
/// bit-reproducible.
QtGradients qt_backward(const QtModel &model,
                        const Eigen::VectorXd &dL_dkappa);

} // namespace fedqt::qtgen
