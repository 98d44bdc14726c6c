// SPDX-License-Identifier: Apache-2.0
#include <fedqt/rnn.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fedqt/rng.hpp>

namespace fedqt::rnn {

namespace {

using Eigen::Index;
using Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixView = Eigen::Map<const RowMajorMatrix>;
using MatrixView = Eigen::Map<RowMajorMatrix>;
using ConstVectorView = Eigen::Map<const VectorXd>;
using VectorView = Eigen::Map<VectorXd>;

VectorXd logistic(const VectorXd &z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_kappa(const VectorXd &kappa, const LstmConfig &config) {
    if (kappa.size() != config.param_count()) {
        throw std::invalid_argument(
            "weight vector length " + std::to_string(kappa.size()) +
            " does not match the " + std::to_string(config.param_count()) +
            "-parameter layout");
    }
}

void check_qlstm_params(const VectorXd &params, const QlstmConfig &config) {
    if (params.size() != config.param_count()) {
        throw std::invalid_argument(
            "parameter vector length " + std::to_string(params.size()) +
            " does not match the " + std::to_string(config.param_count()) +
            "-parameter layout");
    }
}

void check_window(const VectorXd &window) {
    if (window.size() < 1) {
        throw std::invalid_argument("empty window");
    }
}

void check_batch(const Batch &batch) {
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
}

/// Read-only views into the flat kappa layout.
struct LstmViews {
    ConstMatrixView W[4];
    ConstVectorView b[4];
    ConstVectorView w_out;
    double b_out;
};

LstmViews lstm_views(const VectorXd &kappa, const LstmConfig &config) {
    const int h = config.hidden_size;
    const int cols = config.gate_cols();
    const Index block = config.gate_block();
    const double *base = kappa.data();
    return LstmViews{
        {ConstMatrixView(base + 0 * block, h, cols),
         ConstMatrixView(base + 1 * block, h, cols),
         ConstMatrixView(base + 2 * block, h, cols),
         ConstMatrixView(base + 3 * block, h, cols)},
        {ConstVectorView(base + 0 * block + Index{h} * cols, h),
         ConstVectorView(base + 1 * block + Index{h} * cols, h),
         ConstVectorView(base + 2 * block + Index{h} * cols, h),
         ConstVectorView(base + 3 * block + Index{h} * cols, h)},
        ConstVectorView(base + 4 * block, h),
        kappa[kappa.size() - 1],
    };
}

/// Mutable views into a gradient vector with the same layout.
struct LstmGradViews {
    MatrixView W[4];
    VectorView b[4];
    VectorView w_out;
    double *b_out;
};

LstmGradViews lstm_grad_views(VectorXd &grad, const LstmConfig &config) {
    const int h = config.hidden_size;
    const int cols = config.gate_cols();
    const Index block = config.gate_block();
    double *base = grad.data();
    return LstmGradViews{
        {MatrixView(base + 0 * block, h, cols),
         MatrixView(base + 1 * block, h, cols),
         MatrixView(base + 2 * block, h, cols),
         MatrixView(base + 3 * block, h, cols)},
        {VectorView(base + 0 * block + Index{h} * cols, h),
         VectorView(base + 1 * block + Index{h} * cols, h),
         VectorView(base + 2 * block + Index{h} * cols, h),
         VectorView(base + 3 * block + Index{h} * cols, h)},
        VectorView(base + 4 * block, h),
        base + (grad.size() - 1),
    };
}

struct CellStep {
    VectorXd v, f, i, cand, o, c, tanh_c;
};

struct SequenceTrace {
    std::vector<CellStep> steps;
    double prediction = 0.0;
};

CellStep lstm_step(const VectorXd &v, const VectorXd &c_prev,
                   const LstmViews &views) {
    CellStep s;
    s.v = v;
    s.f = logistic(views.W[0] * v + views.b[0]);
    s.i = logistic(views.W[1] * v + views.b[1]);
    s.cand = (views.W[2] * v + views.b[2]).array().tanh().matrix();
    s.o = logistic(views.W[3] * v + views.b[3]);
    s.c = (s.f.array() * c_prev.array() + s.i.array() * s.cand.array())
              .matrix();
    s.tanh_c = s.c.array().tanh().matrix();
    return s;
}

SequenceTrace lstm_trace(const VectorXd &window, const VectorXd &kappa,
                         const LstmConfig &config) {
    check_window(window);
    check_kappa(kappa, config);
    const LstmViews views = lstm_views(kappa, config);
    const int h = config.hidden_size;

    SequenceTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(window.size()));
    VectorXd h_prev = VectorXd::Zero(h);
    VectorXd c_prev = VectorXd::Zero(h);
    VectorXd v(config.gate_cols());
    for (Index t = 0; t < window.size(); ++t) {
        v << h_prev, window[t];
        CellStep s = lstm_step(v, c_prev, views);
        h_prev = (s.o.array() * s.tanh_c.array()).matrix();
        c_prev = s.c;
        trace.steps.push_back(std::move(s));
    }
    trace.prediction = views.w_out.dot(h_prev) + views.b_out;
    return trace;
}

/// Pulls one sample's loss gradient back through the recorded steps.
void lstm_backprop(const SequenceTrace &trace, double d_prediction,
                   const LstmViews &views, const LstmConfig &config,
                   LstmGradViews &grads) {
    const int h = config.hidden_size;
    const auto &steps = trace.steps;
    const auto &last = steps.back();
    const VectorXd h_final = (last.o.array() * last.tanh_c.array()).matrix();

    grads.w_out += d_prediction * h_final;
    *grads.b_out += d_prediction;

    VectorXd dh = d_prediction * VectorXd(views.w_out);
    VectorXd dc = VectorXd::Zero(h);
    for (Index t = static_cast<Index>(steps.size()) - 1; t >= 0; --t) {
        const CellStep &s = steps[static_cast<std::size_t>(t)];
        const VectorXd c_prev =
            t > 0 ? steps[static_cast<std::size_t>(t) - 1].c
                  : VectorXd::Zero(h);

        dc += (dh.array() * s.o.array() *
               (1.0 - s.tanh_c.array().square()))
                  .matrix();
        const VectorXd dpre_o = (dh.array() * s.tanh_c.array() *
                                 s.o.array() * (1.0 - s.o.array()))
                                    .matrix();
        const VectorXd dpre_f = (dc.array() * c_prev.array() * s.f.array() *
                                 (1.0 - s.f.array()))
                                    .matrix();
        const VectorXd dpre_i = (dc.array() * s.cand.array() * s.i.array() *
                                 (1.0 - s.i.array()))
                                    .matrix();
        const VectorXd dpre_c =
            (dc.array() * s.i.array() * (1.0 - s.cand.array().square()))
                .matrix();

        grads.W[0] += dpre_f * s.v.transpose();
        grads.W[1] += dpre_i * s.v.transpose();
        grads.W[2] += dpre_c * s.v.transpose();
        grads.W[3] += dpre_o * s.v.transpose();
        grads.b[0] += dpre_f;
        grads.b[1] += dpre_i;
        grads.b[2] += dpre_c;
        grads.b[3] += dpre_o;

        const VectorXd dv = views.W[0].transpose() * dpre_f +
                            views.W[1].transpose() * dpre_i +
                            views.W[2].transpose() * dpre_c +
                            views.W[3].transpose() * dpre_o;
        dh = dv.head(h);
        dc = (dc.array() * s.f.array()).matrix();
    }
}

struct QlstmTrace {
    std::vector<CellStep> steps;
    double prediction = 0.0;
};

QlstmTrace qlstm_trace(const VectorXd &window, const VectorXd &params,
                       const QlstmConfig &config) {
    check_window(window);
    check_qlstm_params(params, config);
    const int h = config.hidden_size;
    const int per_gate = config.per_gate_params();
    const auto arch = config.arch();

    QlstmTrace trace;
    VectorXd h_prev = VectorXd::Zero(h);
    VectorXd c_prev = VectorXd::Zero(h);
    VectorXd v(config.n_qubits());
    for (Index t = 0; t < window.size(); ++t) {
        v << h_prev, window[t];
        std::array<VectorXd, 4> raw;
        for (int g = 0; g < 4; ++g) {
            raw[g] = vqc::expectations(arch, v,
                                       params.segment(g * per_gate,
                                                      per_gate));
        }
        CellStep s;
        s.v = v;
        s.f = logistic(raw[0].head(h));
        s.i = logistic(raw[1].head(h));
        s.cand = raw[2].head(h).array().tanh().matrix();
        s.o = logistic(raw[3].head(h));
        s.c = (s.f.array() * c_prev.array() + s.i.array() * s.cand.array())
                  .matrix();
        s.tanh_c = s.c.array().tanh().matrix();
        h_prev = (s.o.array() * s.tanh_c.array()).matrix();
        c_prev = s.c;
        trace.steps.push_back(std::move(s));
    }
    const Index head = config.quantum_param_count();
    trace.prediction = params.segment(head, h).dot(h_prev) +
                       params[params.size() - 1];
    return trace;
}

} // namespace

CellState lstm_cell_forward(const VectorXd &v, const VectorXd &c_prev,
                            const VectorXd &kappa, const LstmConfig &config) {
    check_kappa(kappa, config);
    if (v.size() != config.gate_cols()) {
        throw std::invalid_argument("cell input length " +
                                    std::to_string(v.size()) + " must be " +
                                    std::to_string(config.gate_cols()));
    }
    if (c_prev.size() != config.hidden_size) {
        throw std::invalid_argument("cell state length mismatch");
    }
    const CellStep s = lstm_step(v, c_prev, lstm_views(kappa, config));
    return CellState{(s.o.array() * s.tanh_c.array()).matrix(), s.c};
}

CellState qlstm_cell_forward(const VectorXd &v, const VectorXd &c_prev,
                             const VectorXd &params,
                             const QlstmConfig &config) {
    check_qlstm_params(params, config);
    if (v.size() != config.n_qubits()) {
        throw std::invalid_argument("cell input length " +
                                    std::to_string(v.size()) + " must be " +
                                    std::to_string(config.n_qubits()));
    }
    if (c_prev.size() != config.hidden_size) {
        throw std::invalid_argument("cell state length mismatch");
    }
    const int h = config.hidden_size;
    const int per_gate = config.per_gate_params();
    const auto arch = config.arch();
    std::array<VectorXd, 4> raw;
    for (int g = 0; g < 4; ++g) {
        raw[g] = vqc::expectations(arch, v,
                                   params.segment(g * per_gate, per_gate));
    }
    const VectorXd f = logistic(raw[0].head(h));
    const VectorXd i = logistic(raw[1].head(h));
    const VectorXd cand = raw[2].head(h).array().tanh().matrix();
    const VectorXd o = logistic(raw[3].head(h));
    CellState out;
    out.c = (f.array() * c_prev.array() + i.array() * cand.array()).matrix();
    out.h = (o.array() * out.c.array().tanh()).matrix();
    return out;
}

double lstm_sequence_forward(const VectorXd &window, const VectorXd &kappa,
                             const LstmConfig &config) {
    return lstm_trace(window, kappa, config).prediction;
}

double qlstm_sequence_forward(const VectorXd &window, const VectorXd &params,
                              const QlstmConfig &config) {
    return qlstm_trace(window, params, config).prediction;
}

double mse_loss(const VectorXd &predictions, const VectorXd &targets) {
    if (predictions.size() != targets.size()) {
        throw std::invalid_argument("prediction/target length mismatch");
    }
    if (predictions.size() < 1) {
        throw std::invalid_argument("loss needs at least one sample");
    }
    return (predictions - targets).squaredNorm() /
           static_cast<double>(predictions.size());
}

VectorXd lstm_backward(const Batch &batch, const VectorXd &kappa,
                       const LstmConfig &config) {
    check_batch(batch);
    check_kappa(kappa, config);
    const LstmViews views = lstm_views(kappa, config);
    VectorXd grad = VectorXd::Zero(kappa.size());
    LstmGradViews grads = lstm_grad_views(grad, config);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto &sample : batch) {
        const SequenceTrace trace = lstm_trace(sample.inputs, kappa, config);
        const double dy = 2.0 * (trace.prediction - sample.target) * inv_n;
        lstm_backprop(trace, dy, views, config, grads);
    }
    return grad;
}

VectorXd qlstm_backward(const Batch &batch, const VectorXd &params,
                        const QlstmConfig &config) {
    check_batch(batch);
    check_qlstm_params(params, config);
    const int h = config.hidden_size;
    const int n = config.n_qubits();
    const int per_gate = config.per_gate_params();
    const Index head = config.quantum_param_count();
    const auto arch = config.arch();
    const ConstVectorView w_out(params.data() + head, h);

    VectorXd grad = VectorXd::Zero(params.size());
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto &sample : batch) {
        const QlstmTrace trace = qlstm_trace(sample.inputs, params, config);
        const double dy = 2.0 * (trace.prediction - sample.target) * inv_n;

        const auto &last = trace.steps.back();
        const VectorXd h_final =
            (last.o.array() * last.tanh_c.array()).matrix();
        grad.segment(head, h) += dy * h_final;
        grad[grad.size() - 1] += dy;

        VectorXd dh = dy * VectorXd(w_out);
        VectorXd dc = VectorXd::Zero(h);
        for (Index t = static_cast<Index>(trace.steps.size()) - 1; t >= 0;
             --t) {
            const CellStep &s = trace.steps[static_cast<std::size_t>(t)];
            const VectorXd c_prev =
                t > 0 ? trace.steps[static_cast<std::size_t>(t) - 1].c
                      : VectorXd::Zero(h);

            dc += (dh.array() * s.o.array() *
                   (1.0 - s.tanh_c.array().square()))
                      .matrix();
            const VectorXd dpre_o = (dh.array() * s.tanh_c.array() *
                                     s.o.array() * (1.0 - s.o.array()))
                                        .matrix();
            const VectorXd dpre_f = (dc.array() * c_prev.array() *
                                     s.f.array() * (1.0 - s.f.array()))
                                        .matrix();
            const VectorXd dpre_i = (dc.array() * s.cand.array() *
                                     s.i.array() * (1.0 - s.i.array()))
                                        .matrix();
            const VectorXd dpre_c = (dc.array() * s.i.array() *
                                     (1.0 - s.cand.array().square()))
                                        .matrix();

            // Loss gradient over each gate circuit's raw readout; wires
            // beyond hidden_size are unread, hence zero.
            std::array<VectorXd, 4> d_raw;
            for (int g = 0; g < 4; ++g) {
                d_raw[g] = VectorXd::Zero(n);
            }
            d_raw[0].head(h) = dpre_f;
            d_raw[1].head(h) = dpre_i;
            d_raw[2].head(h) = dpre_c;
            d_raw[3].head(h) = dpre_o;

            VectorXd dv = VectorXd::Zero(n);
            for (int g = 0; g < 4; ++g) {
                const auto theta = params.segment(g * per_gate, per_gate);
                grad.segment(g * per_gate, per_gate) +=
                    vqc::expectations_jacobian(arch, s.v, theta).transpose() *
                    d_raw[g];
                // The earliest step's v holds only constants (zero state
                // and the data sample), so its input gradient is unused.
                if (t > 0) {
                    dv += vqc::expectations_input_jacobian(arch, s.v, theta)
                              .transpose() *
                          d_raw[g];
                }
            }
            dh = dv.head(h);
            dc = (dc.array() * s.f.array()).matrix();
        }
    }
    return grad;
}

VectorXd qtlstm_backward(const Batch &batch, const qtgen::QtModel &qt_model,
                         const LstmConfig &config) {
    check_batch(batch);
    if (qt_model.p != config.param_count()) {
        throw std::invalid_argument(
            "generator target count " + std::to_string(qt_model.p) +
            " does not match the " + std::to_string(config.param_count()) +
            "-parameter network");
    }
    const VectorXd kappa = qtgen::generate_weights(qt_model);
    const VectorXd d_kappa = lstm_backward(batch, kappa, config);
    const qtgen::QtGradients g = qtgen::qt_backward(qt_model, d_kappa);
    VectorXd grad(g.gamma.size() + g.mapping_weights.size() + 1);
    grad << g.gamma, g.mapping_weights, g.mapping_bias;
    return grad;
}

Eigen::Index ModelSpec::param_count() const {
    switch (kind) {
    case ModelKind::kLstm:
        return lstm.param_count();
    case ModelKind::kQlstm:
        return qlstm.param_count();
    case ModelKind::kQtLstm:
        return quantum_param_count() + classical_param_count();
    }
    throw std::invalid_argument("unknown model kind");
}

Eigen::Index ModelSpec::quantum_param_count() const {
    switch (kind) {
    case ModelKind::kLstm:
        return 0;
    case ModelKind::kQlstm:
        return qlstm.quantum_param_count();
    case ModelKind::kQtLstm:
        return Eigen::Index{qtgen::required_qubits(lstm.param_count())} *
               qt_layers;
    }
    throw std::invalid_argument("unknown model kind");
}

Eigen::Index ModelSpec::classical_param_count() const {
    switch (kind) {
    case ModelKind::kLstm:
        return lstm.param_count();
    case ModelKind::kQlstm:
        return qlstm.classical_param_count();
    case ModelKind::kQtLstm:
        return qtgen::required_qubits(lstm.param_count()) + 2;
    }
    throw std::invalid_argument("unknown model kind");
}

VectorXd ModelSpec::init_params(std::uint64_t seed) const {
    Rng rng(seed);
    VectorXd params(param_count());
    switch (kind) {
    case ModelKind::kLstm:
        for (Index k = 0; k < params.size(); ++k) {
            params[k] = rng.uniform(-0.5, 0.5);
        }
        break;
    case ModelKind::kQlstm: {
        // Circuit angles start uniform over [0, pi]; the classical output
        // head uses the plain-network convention.
        const Index quantum = qlstm.quantum_param_count();
        for (Index k = 0; k < quantum; ++k) {
            params[k] = rng.uniform(0.0, M_PI);
        }
        for (Index k = quantum; k < params.size(); ++k) {
            params[k] = rng.uniform(-0.5, 0.5);
        }
        break;
    }
    case ModelKind::kQtLstm: {
        // Generator angles uniform over [0, pi]; mapping parameters start
        // near zero (0.1 x the plain-network range) so generated weights
        // begin small.
        const Index quantum = quantum_param_count();
        for (Index k = 0; k < quantum; ++k) {
            params[k] = rng.uniform(0.0, M_PI);
        }
        for (Index k = quantum; k < params.size(); ++k) {
            params[k] = 0.1 * rng.uniform(-0.5, 0.5);
        }
        break;
    }
    }
    return params;
}

qtgen::QtModel ModelSpec::qt_model(const VectorXd &params) const {
    if (kind != ModelKind::kQtLstm) {
        throw std::invalid_argument(
            "only the generated-weight model has a generator");
    }
    if (params.size() != param_count()) {
        throw std::invalid_argument("parameter vector length mismatch");
    }
    qtgen::QtModel model;
    model.p = lstm.param_count();
    model.n_layers = qt_layers;
    const int n = model.n_qubits();
    model.gamma = params.head(Eigen::Index{n} * qt_layers);
    model.beta.weights = params.segment(Eigen::Index{n} * qt_layers, n + 1);
    model.beta.bias = params[params.size() - 1];
    return model;
}

double dataset_loss(const ModelSpec &spec, const VectorXd &params,
                    const Batch &batch) {
    check_batch(batch);
    VectorXd predictions(static_cast<Index>(batch.size()));
    VectorXd targets(static_cast<Index>(batch.size()));
    const Predictor predictor = Predictor::materialize(spec, params);
    for (std::size_t s = 0; s < batch.size(); ++s) {
        predictions[static_cast<Index>(s)] =
            predictor.predict(batch[s].inputs);
        targets[static_cast<Index>(s)] = batch[s].target;
    }
    return mse_loss(predictions, targets);
}

VectorXd loss_gradient(const ModelSpec &spec, const VectorXd &params,
                       const Batch &batch) {
    switch (spec.kind) {
    case ModelKind::kLstm:
        return lstm_backward(batch, params, spec.lstm);
    case ModelKind::kQlstm:
        return qlstm_backward(batch, params, spec.qlstm);
    case ModelKind::kQtLstm:
        return qtlstm_backward(batch, spec.qt_model(params), spec.lstm);
    }
    throw std::invalid_argument("unknown model kind");
}

Predictor Predictor::materialize(const ModelSpec &spec,
                                 const VectorXd &params) {
    if (params.size() != spec.param_count()) {
        throw std::invalid_argument("parameter vector length mismatch");
    }
    Predictor p;
    p.kind_ = spec.kind;
    p.lstm_ = spec.lstm;
    p.qlstm_ = spec.qlstm;
    if (spec.kind == ModelKind::kQtLstm) {
        // All circuit work happens here; prediction is purely classical.
        p.weights_ = qtgen::generate_weights(spec.qt_model(params));
    } else {
        p.weights_ = params;
    }
    return p;
}

double Predictor::predict(const VectorXd &window) const {
    if (kind_ == ModelKind::kQlstm) {
        return qlstm_sequence_forward(window, weights_, qlstm_);
    }
    return lstm_sequence_forward(window, weights_, lstm_);
}

} // namespace fedqt::rnn
