// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qpc {

using c64 = std::complex<double>;

/// Dense complex statevector of an n-qubit register.
///
/// Convention: qubit 0 is the most significant bit of the basis index,
/// so for n=2 the amplitudes are ordered |00>, |01>, |10>, |11>.
class StateVector {
  public:
    explicit StateVector(std::size_t n_qubits)
        : n_(n_qubits), amps_(std::size_t{1} << n_qubits, c64{0.0, 0.0}) {
        if (n_qubits == 0) throw std::invalid_argument("StateVector: n_qubits must be >= 1");
        amps_[0] = c64{1.0, 0.0};
    }

    StateVector(std::size_t n_qubits, std::vector<c64> amplitudes)
        : n_(n_qubits), amps_(std::move(amplitudes)) {
        if (n_qubits == 0) throw std::invalid_argument("StateVector: n_qubits must be >= 1");
        if (amps_.size() != (std::size_t{1} << n_qubits))
            throw std::invalid_argument("StateVector: amplitude length must be 2^n_qubits");
    }

    std::size_t n_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<c64>& amplitudes() const { return amps_; }
    std::vector<c64>& amplitudes() { return amps_; }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    // Generic single-qubit matrix application on strided amplitude pairs.
    void apply_one_qubit(std::size_t qubit, c64 m00, c64 m01, c64 m10, c64 m11) {
        const std::size_t stride = pair_stride(qubit);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const c64 a = amps_[i];
                const c64 b = amps_[i + stride];
                amps_[i] = m00 * a + m01 * b;
                amps_[i + stride] = m10 * a + m11 * b;
            }
        }
    }

    void apply_rx(std::size_t qubit, double theta) {
        const double c = std::cos(theta / 2.0);
        const double s = std::sin(theta / 2.0);
        apply_one_qubit(qubit, c64{c, 0.0}, c64{0.0, -s}, c64{0.0, -s}, c64{c, 0.0});
    }

    void apply_rz(std::size_t qubit, double theta) {
        const c64 p0 = std::polar(1.0, -theta / 2.0);
        const c64 p1 = std::polar(1.0, theta / 2.0);
        const std::size_t stride = pair_stride(qubit);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                amps_[i] *= p0;
                amps_[i + stride] *= p1;
            }
        }
    }

    void apply_cnot(std::size_t control, std::size_t target) {
        check_pair(control, target);
        const std::size_t cm = bit_mask(control);
        const std::size_t tm = bit_mask(target);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
        }
    }

    void apply_cphase(std::size_t control, std::size_t target, double phi) {
        check_pair(control, target);
        const std::size_t cm = bit_mask(control);
        const std::size_t tm = bit_mask(target);
        const c64 phase = std::polar(1.0, phi);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cm) && (i & tm)) amps_[i] *= phase;
        }
    }

    /// <Z_qubit> = sum of +-|a_i|^2, + where the qubit's bit is 0.
    double expect_z(std::size_t qubit) const {
        const std::size_t m = bit_mask(qubit);
        double e = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i)
            e += (i & m) ? -std::norm(amps_[i]) : std::norm(amps_[i]);
        return e;
    }

    std::size_t bit_mask(std::size_t qubit) const {
        check_qubit(qubit);
        return std::size_t{1} << (n_ - 1 - qubit);
    }

  private:
    std::size_t pair_stride(std::size_t qubit) const {
        check_qubit(qubit);
        return std::size_t{1} << (n_ - 1 - qubit);
    }

    void check_qubit(std::size_t qubit) const {
        if (qubit >= n_) throw std::out_of_range("qubit index out of range");
    }

    void check_pair(std::size_t control, std::size_t target) const {
        check_qubit(control);
        check_qubit(target);
        if (control == target)
            throw std::invalid_argument("control and target qubits must differ");
    }

    std::size_t n_;
    std::vector<c64> amps_;
};

}  // namespace qpc
