// SPDX-License-Identifier: Apache-2.0
#include <fedqt/qtgen.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedqt::qtgen {

namespace {

void check_model(const QtModel &model) {
    const int n = required_qubits(model.p); // rejects p < 2
    if (model.n_layers < 1) {
        throw std::invalid_argument("generator layer count must be >= 1");
    }
    if (model.gamma.size() != Eigen::Index{n} * model.n_layers) {
        throw std::invalid_argument(
            "generator angle count " + std::to_string(model.gamma.size()) +
            " does not match " + std::to_string(n) + " qubits x " +
            std::to_string(model.n_layers) + " layers");
    }
    if (model.beta.weights.size() != n + 1) {
        throw std::invalid_argument(
            "mapping weight count " +
            std::to_string(model.beta.weights.size()) + " must be " +
            std::to_string(n + 1));
    }
}

} // namespace

int required_qubits(std::int64_t p) {
    if (p < 2) {
        throw std::invalid_argument(
            "weight generation needs at least 2 target parameters, got " +
            std::to_string(p));
    }
    int n = 1;
    while ((std::int64_t{1} << n) < p) {
        ++n;
    }
    return n;
}

Eigen::VectorXd basis_signs(int n_qubits, std::int64_t index) {
    if (n_qubits < 1) {
        throw std::invalid_argument("bit pattern needs at least 1 qubit");
    }
    if (index < 0 || index >= (std::int64_t{1} << n_qubits)) {
        throw std::out_of_range("basis index " + std::to_string(index) +
                                " outside register of " +
                                std::to_string(n_qubits) + " qubits");
    }
    Eigen::VectorXd signs(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        const std::int64_t bit = std::int64_t{1} << (n_qubits - 1 - q);
        signs[q] = (index & bit) ? 1.0 : -1.0;
    }
    return signs;
}

double mapping_forward(const Eigen::VectorXd &signs, double prob,
                       const MappingParams &beta) {
    const Eigen::Index n = signs.size();
    if (beta.weights.size() != n + 1) {
        throw std::invalid_argument(
            "mapping weight count does not match bit pattern length + 1");
    }
    const double scaled = std::ldexp(prob, static_cast<int>(n));
    double z = beta.bias;
    for (Eigen::Index j = 0; j < n; ++j) {
        z += beta.weights[j] * signs[j];
    }
    z += beta.weights[n] * scaled;
    return std::tanh(z);
}

Eigen::VectorXd generate_weights(const QtModel &model) {
    check_model(model);
    const int n = model.n_qubits();
    const Eigen::VectorXd probs = vqc::basis_probs(model.arch(), model.gamma);
    Eigen::VectorXd kappa(model.p);
    for (std::int64_t i = 0; i < model.p; ++i) {
        kappa[i] = mapping_forward(basis_signs(n, i), probs[i], model.beta);
    }
    return kappa;
}

QtGradients qt_backward(const QtModel &model,
                        const Eigen::VectorXd &dL_dkappa) {
    check_model(model);
    if (dL_dkappa.size() != model.p) {
        throw std::invalid_argument(
            "loss gradient length " + std::to_string(dL_dkappa.size()) +
            " does not match " + std::to_string(model.p) +
            " generated weights");
    }
    const int n = model.n_qubits();
    const Eigen::Index dim = Eigen::Index{1} << n;
    const Eigen::VectorXd probs = vqc::basis_probs(model.arch(), model.gamma);

    QtGradients grads;
    grads.mapping_weights = Eigen::VectorXd::Zero(n + 1);
    Eigen::VectorXd dL_dprob = Eigen::VectorXd::Zero(dim);
    const double prob_weight = model.beta.weights[n];
    for (std::int64_t i = 0; i < model.p; ++i) {
        const Eigen::VectorXd signs = basis_signs(n, i);
        const double scaled = std::ldexp(probs[i], n);
        const double kappa = mapping_forward(signs, probs[i], model.beta);
        const double g = dL_dkappa[i] * (1.0 - kappa * kappa);
        for (int j = 0; j < n; ++j) {
            grads.mapping_weights[j] += g * signs[j];
        }
        grads.mapping_weights[n] += g * scaled;
        grads.mapping_bias += g;
        dL_dprob[i] = g * prob_weight * std::ldexp(1.0, n);
    }

    const Eigen::MatrixXd jac =
        vqc::basis_probs_jacobian(model.arch(), model.gamma);
    grads.gamma = jac.transpose() * dL_dprob;
    return grads;
}

} // namespace fedqt::qtgen
