// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fedqt::qsim {

/// Largest register the dense engine accepts (2^16 amplitudes).
inline constexpr int kMaxQubits = 16;

/// Dense statevector of an n-qubit register.
///
/// Basis labels are big-endian: qubit 0 is the most significant bit of the
/// amplitude index, so |q0 q1 ... q(n-1)> lives at index
/// q0*2^(n-1) + ... + q(n-1). Gate application mutates in place; the type
/// has value semantics (copying copies the amplitudes).
template <typename Scalar = double> class StateVector {
  public:
    using ComplexT = std::complex<Scalar>;
    using AmplitudeVector = Eigen::Matrix<ComplexT, Eigen::Dynamic, 1>;
    using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    /// Prepares |0...0>.
    explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw std::invalid_argument(
                "qubit count must be in [1, " + std::to_string(kMaxQubits) +
                "], got " + std::to_string(num_qubits));
        }
        amps_ = AmplitudeVector::Zero(Eigen::Index{1} << num_qubits);
        amps_[0] = ComplexT{1, 0};
    }

    int num_qubits() const { return num_qubits_; }
    Eigen::Index size() const { return amps_.size(); }
    const AmplitudeVector &amplitudes() const { return amps_; }

    void apply_hadamard(int qubit) {
        check_qubit(qubit);
        const Eigen::Index s = stride(qubit);
        const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
        ComplexT *a = amps_.data();
        for (Eigen::Index base = 0; base < size(); base += 2 * s) {
            for (Eigen::Index i = base; i < base + s; ++i) {
                const ComplexT a0 = a[i];
                const ComplexT a1 = a[i + s];
                a[i] = inv_sqrt2 * (a0 + a1);
                a[i + s] = inv_sqrt2 * (a0 - a1);
            }
        }
    }

    /// Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    void apply_ry(int qubit, Scalar theta) {
        check_qubit(qubit);
        if (!std::isfinite(theta)) {
            throw std::invalid_argument("rotation angle must be finite");
        }
        const Scalar c = std::cos(theta / 2);
        const Scalar sn = std::sin(theta / 2);
        const Eigen::Index s = stride(qubit);
        ComplexT *a = amps_.data();
        for (Eigen::Index base = 0; base < size(); base += 2 * s) {
            for (Eigen::Index i = base; i < base + s; ++i) {
                const ComplexT a0 = a[i];
                const ComplexT a1 = a[i + s];
                a[i] = c * a0 - sn * a1;
                a[i + s] = sn * a0 + c * a1;
            }
        }
    }

    void apply_cnot(int control, int target) {
        check_qubit(control);
        check_qubit(target);
        if (control == target) {
            throw std::invalid_argument(
                "cnot control and target must differ");
        }
        const Eigen::Index cs = stride(control);
        const Eigen::Index ts = stride(target);
        ComplexT *a = amps_.data();
        for (Eigen::Index i = 0; i < size(); ++i) {
            if ((i & cs) != 0 && (i & ts) == 0) {
                std::swap(a[i], a[i | ts]);
            }
        }
    }

    /// <Z> on one qubit: sum_i |a_i|^2 * (1 - 2*bit(i)), accumulated in
    /// ascending index order.
    Scalar z_expectation(int qubit) const {
        check_qubit(qubit);
        const Eigen::Index s = stride(qubit);
        Scalar acc = 0;
        const ComplexT *a = amps_.data();
        for (Eigen::Index i = 0; i < size(); ++i) {
            const Scalar p =
                a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
            acc += (i & s) ? -p : p;
        }
        return acc;
    }

    /// |a_i|^2 for every computational basis state.
    RealVector probabilities() const {
        RealVector p(size());
        const ComplexT *a = amps_.data();
        for (Eigen::Index i = 0; i < size(); ++i) {
            p[i] = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
        }
        return p;
    }

    Scalar squared_norm() const { return amps_.squaredNorm(); }

  private:
    Eigen::Index stride(int qubit) const {
        return Eigen::Index{1} << (num_qubits_ - 1 - qubit);
    }

    void check_qubit(int qubit) const {
        if (qubit < 0 || qubit >= num_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(qubit) +
                                    " out of range for " +
                                    std::to_string(num_qubits_) + " qubits");
        }
    }

    int num_qubits_;
    AmplitudeVector amps_;
};

} // namespace fedqt::qsim
