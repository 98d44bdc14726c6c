// SPDX-License-Identifier: Apache-2.0
#include <fedqt/vqc.hpp>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedqt::vqc {

namespace {

std::atomic<std::uint64_t> g_circuit_evals{0};

void check_arch(const VqcArchitecture &arch) {
    if (arch.n_qubits < 1 || arch.n_qubits > qsim::kMaxQubits) {
        throw std::invalid_argument("circuit qubit count out of range: " +
                                    std::to_string(arch.n_qubits));
    }
    if (arch.n_layers < 1) {
        throw std::invalid_argument("circuit layer count must be >= 1");
    }
}

void check_params(const VqcArchitecture &arch, const Eigen::VectorXd &params) {
    if (params.size() != arch.param_count()) {
        throw std::invalid_argument(
            "parameter vector length " + std::to_string(params.size()) +
            " does not match circuit with " +
            std::to_string(arch.param_count()) + " angles");
    }
}

/// One variational block: CNOT chain, then one Ry per wire.
void apply_block(State &state, const VqcArchitecture &arch,
                 const Eigen::VectorXd &params, int layer) {
    for (int q = 0; q + 1 < arch.n_qubits; ++q) {
        state.apply_cnot(q, q + 1);
    }
    const int base = layer * arch.n_qubits;
    for (int q = 0; q < arch.n_qubits; ++q) {
        state.apply_ry(q, params[base + q]);
    }
}

State prepared_state(const VqcArchitecture &arch, const Eigen::VectorXd *x) {
    if (arch.data_encoding) {
        return encode(arch, *x);
    }
    State state(arch.n_qubits);
    for (int q = 0; q < arch.n_qubits; ++q) {
        state.apply_hadamard(q);
    }
    return state;
}

Eigen::VectorXd measure_expectations(const State &state) {
    Eigen::VectorXd out(state.num_qubits());
    for (int q = 0; q < state.num_qubits(); ++q) {
        out[q] = state.z_expectation(q);
    }
    g_circuit_evals.fetch_add(1, std::memory_order_relaxed);
    return out;
}

Eigen::VectorXd measure_probs(const State &state) {
    g_circuit_evals.fetch_add(1, std::memory_order_relaxed);
    return state.probabilities();
}

/// Parameter-shift Jacobian over the variational angles for either readout.
/// States after each prefix of blocks are cached so a shifted evaluation
/// only replays the suffix.
template <typename MeasureFn>
Eigen::MatrixXd shift_jacobian(const VqcArchitecture &arch,
                               const Eigen::VectorXd *x,
                               const Eigen::VectorXd &params,
                               Eigen::Index out_dim, MeasureFn measure) {
    check_arch(arch);
    check_params(arch, params);

    std::vector<State> prefixes;
    prefixes.reserve(static_cast<std::size_t>(arch.n_layers));
    prefixes.push_back(prepared_state(arch, x));
    for (int layer = 0; layer + 1 < arch.n_layers; ++layer) {
        State next = prefixes.back();
        apply_block(next, arch, params, layer);
        prefixes.push_back(std::move(next));
    }

    Eigen::MatrixXd jac(out_dim, params.size());
    Eigen::VectorXd shifted = params;
    for (int layer = 0; layer < arch.n_layers; ++layer) {
        const int base = layer * arch.n_qubits;
        for (int q = 0; q < arch.n_qubits; ++q) {
            const int k = base + q;
            Eigen::VectorXd plus(out_dim);
            Eigen::VectorXd minus(out_dim);
            for (int sign = 0; sign < 2; ++sign) {
                shifted[k] = params[k] + (sign == 0 ? M_PI / 2 : -M_PI / 2);
                State state = prefixes[static_cast<std::size_t>(layer)];
                for (int j = layer; j < arch.n_layers; ++j) {
                    apply_block(state, arch, shifted, j);
                }
                (sign == 0 ? plus : minus) = measure(state);
            }
            shifted[k] = params[k];
            jac.col(k) = 0.5 * (plus - minus);
        }
    }
    return jac;
}

} // namespace

State encode(const VqcArchitecture &arch, const Eigen::VectorXd &x) {
    check_arch(arch);
    if (!arch.data_encoding) {
        throw std::invalid_argument(
            "encode requires a data-encoding circuit");
    }
    if (x.size() != arch.n_qubits) {
        throw std::invalid_argument("input length " + std::to_string(x.size()) +
                                    " does not match " +
                                    std::to_string(arch.n_qubits) + " qubits");
    }
    State state(arch.n_qubits);
    for (int q = 0; q < arch.n_qubits; ++q) {
        state.apply_hadamard(q);
        state.apply_ry(q, x[q]);
    }
    return state;
}

void apply_variational(State &state, const VqcArchitecture &arch,
                       const Eigen::VectorXd &params) {
    check_arch(arch);
    check_params(arch, params);
    if (state.num_qubits() != arch.n_qubits) {
        throw std::invalid_argument("state and circuit qubit counts differ");
    }
    for (int layer = 0; layer < arch.n_layers; ++layer) {
        apply_block(state, arch, params, layer);
    }
}

Eigen::VectorXd expectations(const VqcArchitecture &arch,
                             const Eigen::VectorXd &x,
                             const Eigen::VectorXd &params) {
    State state = encode(arch, x);
    apply_variational(state, arch, params);
    return measure_expectations(state);
}

Eigen::VectorXd basis_probs(const VqcArchitecture &arch,
                            const Eigen::VectorXd &params) {
    check_arch(arch);
    if (arch.data_encoding) {
        throw std::invalid_argument(
            "basis_probs requires an encoding-free circuit");
    }
    State state = prepared_state(arch, nullptr);
    apply_variational(state, arch, params);
    return measure_probs(state);
}

Eigen::MatrixXd expectations_jacobian(const VqcArchitecture &arch,
                                      const Eigen::VectorXd &x,
                                      const Eigen::VectorXd &params) {
    if (!arch.data_encoding) {
        throw std::invalid_argument(
            "expectations require a data-encoding circuit");
    }
    if (x.size() != arch.n_qubits) {
        throw std::invalid_argument("input length does not match qubit count");
    }
    return shift_jacobian(arch, &x, params, arch.n_qubits,
                          measure_expectations);
}

Eigen::MatrixXd expectations_input_jacobian(const VqcArchitecture &arch,
                                            const Eigen::VectorXd &x,
                                            const Eigen::VectorXd &params) {
    check_arch(arch);
    check_params(arch, params);
    if (x.size() != arch.n_qubits) {
        throw std::invalid_argument("input length does not match qubit count");
    }
    Eigen::MatrixXd jac(arch.n_qubits, arch.n_qubits);
    Eigen::VectorXd shifted = x;
    for (int k = 0; k < arch.n_qubits; ++k) {
        Eigen::VectorXd plus(arch.n_qubits);
        Eigen::VectorXd minus(arch.n_qubits);
        for (int sign = 0; sign < 2; ++sign) {
            shifted[k] = x[k] + (sign == 0 ? M_PI / 2 : -M_PI / 2);
            State state = encode(arch, shifted);
            apply_variational(state, arch, params);
            (sign == 0 ? plus : minus) = measure_expectations(state);
        }
        shifted[k] = x[k];
        jac.col(k) = 0.5 * (plus - minus);
    }
    return jac;
}

Eigen::MatrixXd basis_probs_jacobian(const VqcArchitecture &arch,
                                     const Eigen::VectorXd &params) {
    if (arch.data_encoding) {
        throw std::invalid_argument(
            "basis_probs requires an encoding-free circuit");
    }
    const Eigen::Index dim = Eigen::Index{1} << arch.n_qubits;
    return shift_jacobian(arch, nullptr, params, dim, measure_probs);
}

std::uint64_t circuit_eval_count() {
    return g_circuit_evals.load(std::memory_order_relaxed);
}

void reset_circuit_eval_count() {
    g_circuit_evals.store(0, std::memory_order_relaxed);
}

} // namespace fedqt::vqc
