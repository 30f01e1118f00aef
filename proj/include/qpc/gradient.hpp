// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpc/circuit.hpp"
#include "qpc/encoding.hpp"
#include "qpc/statevector.hpp"

namespace qpc {

enum class GradEngine { Adjoint, ParamShift };

struct CircuitGradients {
    std::vector<double> param_grads;  // flat, CircuitParams indexing
    std::vector<double> input_grads;  // length of the raw channel vector
};

/// Parameter-shift derivative of <Z_qubit> with respect to one angle:
/// 1/2 (E(theta + pi/2) - E(theta - pi/2)). Exact for every gate here,
/// since each expectation is a degree-1 trigonometric polynomial in any
/// single angle.
inline double param_shift_grad(const CircuitParams& params, std::span<const double> x,
                               std::size_t qubit, std::size_t param_index) {
    if (param_index >= params.param_count())
        throw std::out_of_range("param_shift_grad: parameter index out of range");
    if (qubit >= params.n_qubits)
        throw std::out_of_range("param_shift_grad: qubit index out of range");
    constexpr double shift = std::numbers::pi / 2.0;
    CircuitParams shifted = params;
    shifted.param(param_index) += shift;
    const double ep = forward_expectations(shifted, x)[qubit];
    shifted.param(param_index) -= 2.0 * shift;
    const double em = forward_expectations(shifted, x)[qubit];
    return 0.5 * (ep - em);
}

namespace detail {

// O|phi> for O = sum_q upstream[q] * Z_q; diagonal in the basis.
inline StateVector apply_weighted_z(const StateVector& phi,
                                    std::span<const double> upstream) {
    const std::size_t n = phi.n_qubits();
    std::vector<c64> out(phi.dim());
    for (std::size_t i = 0; i < phi.dim(); ++i) {
        double coeff = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t m = std::size_t{1} << (n - 1 - q);
            coeff += (i & m) ? -upstream[q] : upstream[q];
        }
        out[i] = coeff * phi.amplitudes()[i];
    }
    return StateVector(n, std::move(out));
}

// d(gate)/d(angle) applied to a state that does not yet carry the gate.
inline StateVector apply_gate_derivative(const StateVector& ket, const GateOp& g) {
    StateVector d = ket;
    apply_gate(d, g);
    switch (g.kind) {
        case GateOp::Rx:
            // -i/2 X
            d.apply_one_qubit(g.q0, c64{0, 0}, c64{0, -0.5}, c64{0, -0.5}, c64{0, 0});
            break;
        case GateOp::Rz:
            // -i/2 Z
            d.apply_one_qubit(g.q0, c64{0, -0.5}, c64{0, 0}, c64{0, 0}, c64{0, 0.5});
            break;
        case GateOp::Cphase: {
            // i |11><11| on the control/target pair
            const std::size_t cm = d.bit_mask(g.q0);
            const std::size_t tm = d.bit_mask(g.q1);
            for (std::size_t i = 0; i < d.dim(); ++i) {
                if ((i & cm) && (i & tm))
                    d.amplitudes()[i] *= c64{0.0, 1.0};
                else
                    d.amplitudes()[i] = c64{0.0, 0.0};
            }
            break;
        }
        case GateOp::Cnot:
            throw std::logic_error("CNOT has no trainable parameter");
    }
    return d;
}

inline double re_inner(const StateVector& bra, const StateVector& ket) {
    double s = 0.0;
    for (std::size_t i = 0; i < bra.dim(); ++i)
        s += (std::conj(bra.amplitudes()[i]) * ket.amplitudes()[i]).real();
    return s;
}

}  // namespace detail

/// Reverse pass through the gate sequence for the scalar
/// f = sum_q upstream[q] <Z_q>. Returns d f / d theta for every circuit
/// parameter and d f / d x for the raw channel vector, matching the
/// parameter-shift result to floating-point accuracy at one forward-pass
/// cost instead of two evaluations per parameter.
inline CircuitGradients adjoint_backward(const CircuitParams& params,
                                         std::span<const double> x,
                                         std::span<const double> upstream) {
    if (upstream.size() != params.n_qubits)
        throw std::invalid_argument("backward: upstream length must equal n_qubits");
    const std::vector<GateOp> ops = gate_sequence(params);

    StateVector psi = amplitude_encode(x, params.n_qubits);
    StateVector ket = psi;
    for (const auto& g : ops) apply_gate(ket, g);
    StateVector bra = detail::apply_weighted_z(ket, upstream);

    CircuitGradients out;
    out.param_grads.assign(params.param_count(), 0.0);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        apply_gate_inverse(ket, *it);
        if (it->param_index >= 0) {
            const StateVector dket = detail::apply_gate_derivative(ket, *it);
            out.param_grads[static_cast<std::size_t>(it->param_index)] =
                2.0 * detail::re_inner(bra, dket);
        }
        apply_gate_inverse(bra, *it);
    }

    // bra now holds U^dag O U |psi>; for real psi the amplitude cotangent
    // is 2 Re of its entries.
    std::vector<double> amp_cotangent(bra.dim());
    for (std::size_t i = 0; i < bra.dim(); ++i)
        amp_cotangent[i] = 2.0 * bra.amplitudes()[i].real();
    out.input_grads = encode_gradient(x, params.n_qubits, amp_cotangent);
    return out;
}

/// upstream-weighted gradients via the exact two-point shift rule,
/// one pair of circuit evaluations per parameter. Input gradients reuse
/// the adjoint pass (the engines differ only in the parameter route).
inline CircuitGradients param_shift_backward(const CircuitParams& params,
                                             std::span<const double> x,
                                             std::span<const double> upstream) {
    if (upstream.size() != params.n_qubits)
        throw std::invalid_argument("backward: upstream length must equal n_qubits");
    constexpr double shift = std::numbers::pi / 2.0;
    CircuitGradients out;
    out.param_grads.assign(params.param_count(), 0.0);
    CircuitParams shifted = params;
    for (std::size_t p = 0; p < params.param_count(); ++p) {
        shifted.param(p) += shift;
        const std::vector<double> ep = forward_expectations(shifted, x);
        shifted.param(p) -= 2.0 * shift;
        const std::vector<double> em = forward_expectations(shifted, x);
        shifted.param(p) += shift;
        double g = 0.0;
        for (std::size_t q = 0; q < params.n_qubits; ++q)
            g += upstream[q] * 0.5 * (ep[q] - em[q]);
        out.param_grads[p] = g;
    }
    out.input_grads = adjoint_backward(params, x, upstream).input_grads;
    return out;
}

inline CircuitGradients backward(const CircuitParams& params, std::span<const double> x,
                                 std::span<const double> upstream,
                                 GradEngine engine = GradEngine::Adjoint) {
    return engine == GradEngine::Adjoint ? adjoint_backward(params, x, upstream)
                                         : param_shift_backward(params, x, upstream);
}

}  // namespace qpc
