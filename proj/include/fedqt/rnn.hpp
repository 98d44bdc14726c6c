// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include <fedqt/gwdata.hpp>
#include <fedqt/qtgen.hpp>
#include <fedqt/vqc.hpp>

namespace fedqt::rnn {

using Batch = std::vector<gwdata::Window>;

/// Classical LSTM shape. The flat weight vector kappa uses the frozen
/// layout, in order: W_f (hidden x (hidden+input), row-major), b_f, then
/// the same pair for the i, candidate and o gates, then the scalar output
/// head W_out (1 x hidden) and b_out. Gate inputs are v_t = [h_{t-1}, x_t]
/// (hidden entries first), matching the weight-column order.
struct LstmConfig {
    int input_size = 1;
    int hidden_size = 20;
    int lookback = 8;

    int gate_cols() const { return input_size + hidden_size; }
    Eigen::Index gate_block() const {
        return Eigen::Index{hidden_size} * gate_cols() + hidden_size;
    }
    Eigen::Index param_count() const {
        return 4 * gate_block() + hidden_size + 1;
    }
};

/// LSTM with all four gate networks replaced by data-encoding circuits on
/// hidden+input wires; gate values are the first hidden_size Z readouts.
/// Flat parameter layout: the four per-gate angle blocks (f, i, candidate,
/// o; each n_qubits x n_layers angles, layer-major), then the scalar
/// output head (hidden_size weights + bias).
struct QlstmConfig {
    int input_size = 1;
    int hidden_size = 4;
    int n_layers = 10;
    int lookback = 8;

    int n_qubits() const { return input_size + hidden_size; }
    int per_gate_params() const { return n_qubits() * n_layers; }
    Eigen::Index quantum_param_count() const {
        return Eigen::Index{4} * per_gate_params();
    }
    Eigen::Index classical_param_count() const { return hidden_size + 1; }
    Eigen::Index param_count() const {
        return quantum_param_count() + classical_param_count();
    }
    vqc::VqcArchitecture arch() const {
        return {n_qubits(), n_layers, true};
    }
};

struct CellState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/// One recurrence step of Eq.-style gating: f, i, o through the logistic
/// function, the candidate through tanh, c = f*c_prev + i*cand,
/// h = o*tanh(c). v is [h_{t-1}, x_t].
CellState lstm_cell_forward(const Eigen::VectorXd &v,
                            const Eigen::VectorXd &c_prev,
                            const Eigen::VectorXd &kappa,
                            const LstmConfig &config);
CellState qlstm_cell_forward(const Eigen::VectorXd &v,
                             const Eigen::VectorXd &c_prev,
                             const Eigen::VectorXd &params,
                             const QlstmConfig &config);

/// Rolls the cell over a window from h = c = 0 and projects the final
/// hidden state through the scalar output head.
double lstm_sequence_forward(const Eigen::VectorXd &window,
                             const Eigen::VectorXd &kappa,
                             const LstmConfig &config);
double qlstm_sequence_forward(const Eigen::VectorXd &window,
                              const Eigen::VectorXd &params,
                              const QlstmConfig &config);

/// Mean of squared residuals.
double mse_loss(const Eigen::VectorXd &predictions,
                const Eigen::VectorXd &targets);

/// Exact batch-MSE gradients (backpropagation through time), in the same
/// flat layouts as the corresponding parameter vectors. Batch samples are
/// accumulated in order, so results are bit-reproducible.
Eigen::VectorXd lstm_backward(const Batch &batch,
                              const Eigen::VectorXd &kappa,
                              const LstmConfig &config);
Eigen::VectorXd qlstm_backward(const Batch &batch,
                               const Eigen::VectorXd &params,
                               const QlstmConfig &config);

/// Chain rule through the weight generator: LSTM gradients over the
/// generated kappa pulled back to the generator's (gamma, beta). Returns
/// the flat [gamma, mapping weights, mapping bias] layout.
Eigen::VectorXd qtlstm_backward(const Batch &batch,
                                const qtgen::QtModel &qt_model,
                                const LstmConfig &config);

enum class ModelKind { kLstm, kQlstm, kQtLstm };

/// A trainable model as the federation sees it: a kind plus shape
/// configuration, exposing a flat parameter vector. For the generated-
/// weight model the flat layout is [gamma, mapping weights, mapping bias]
/// and the target network is the classical LSTM config.
struct ModelSpec {
    ModelKind kind = ModelKind::kQtLstm;
    LstmConfig lstm;
    QlstmConfig qlstm;
    int qt_layers = 10;

    Eigen::Index param_count() const;
    Eigen::Index quantum_param_count() const;
    Eigen::Index classical_param_count() const;

    /// Seeded starting point: plain-LSTM weights uniform in [-0.5, 0.5];
    /// circuit angles uniform in [0, pi]; generator mapping parameters and
    /// the circuit model's output head as documented in the implementation.
    Eigen::VectorXd init_params(std::uint64_t seed) const;

    /// Splits a flat generated-weight parameter vector into the generator
    /// model (only meaningful for kQtLstm).
    qtgen::QtModel qt_model(const Eigen::VectorXd &params) const;
};

/// Batch MSE of a model's predictions against the window targets. For the
/// generated-weight model the kappa vector is materialized once per call.
double dataset_loss(const ModelSpec &spec, const Eigen::VectorXd &params,
                    const Batch &batch);

/// Gradient of dataset_loss in the model's flat parameter layout.
Eigen::VectorXd loss_gradient(const ModelSpec &spec,
                              const Eigen::VectorXd &params,
                              const Batch &batch);

/// Inference-ready form of a trained model. Materialization performs any
/// weight generation up front; predict() on the two classical-at-inference
/// kinds then runs no circuits at all.
class Predictor {
  public:
    static Predictor materialize(const ModelSpec &spec,
                                 const Eigen::VectorXd &params);
    double predict(const Eigen::VectorXd &window) const;

  private:
    Predictor() = default;
    ModelKind kind_ = ModelKind::kLstm;
    LstmConfig lstm_;
    QlstmConfig qlstm_;
    Eigen::VectorXd weights_; // kappa for LSTM kinds, params for circuits
};

} // namespace fedqt::rnn
