// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpc/encoding.hpp"
#include "qpc/statevector.hpp"

namespace qpc {

enum class Entangler { Cnot, Cphase };

inline std::string to_string(Entangler e) {
    return e == Entangler::Cnot ? "cnot" : "cphase";
}

inline Entangler entangler_from_string(const std::string& s) {
    if (s == "cnot") return Entangler::Cnot;
    if (s == "cphase") return Entangler::Cphase;
    throw std::invalid_argument("unknown entangler kind: " + s);
}

/// One strongly entangling block: per-qubit Rz,Rx,Rz rotations followed by a
/// ring of entangling gates at a fixed control-to-target offset.
struct BlockParams {
    // rotations[q] = {mu1, mu2, mu3}, applied in that order.
    std::vector<std::array<double, 3>> rotations;
    std::size_t entangle_range = 1;
    // One trainable phase per qubit when the cphase entangler is selected.
    std::vector<double> phases;
};

struct CircuitParams {
    std::size_t n_qubits = 1;
    Entangler entangler = Entangler::Cnot;
    std::vector<BlockParams> blocks;

    std::size_t n_blocks() const { return blocks.size(); }

    // The entangler ring (and its phases) only exists for n_qubits >= 2.
    std::size_t params_per_block() const {
        return n_qubits * 3 +
               (entangler == Entangler::Cphase && n_qubits >= 2 ? n_qubits : 0);
    }

    std::size_t param_count() const { return blocks.size() * params_per_block(); }

    double& param(std::size_t flat) {
        const std::size_t per = params_per_block();
        BlockParams& b = blocks.at(flat / per);
        std::size_t r = flat % per;
        if (r < n_qubits * 3) return b.rotations[r / 3][r % 3];
        return b.phases[r - n_qubits * 3];
    }

    double param(std::size_t flat) const {
        return const_cast<CircuitParams*>(this)->param(flat);
    }

    void validate() const {
        if (blocks.empty()) throw std::invalid_argument("circuit needs at least one block");
        for (const auto& b : blocks) {
            if (b.rotations.size() != n_qubits)
                throw std::invalid_argument("block rotation shape must be n_qubits x 3");
            if (n_qubits >= 2 &&
                (b.entangle_range == 0 || b.entangle_range >= n_qubits))
                throw std::invalid_argument("entangle_range must be in [1, n_qubits)");
            if (entangler == Entangler::Cphase && n_qubits >= 2 &&
                b.phases.size() != n_qubits)
                throw std::invalid_argument("cphase entangler needs one phase per qubit");
        }
    }
};

/// Angles drawn i.i.d. uniform on [0, 2pi) from a seeded generator.
inline CircuitParams make_random_circuit(std::size_t n_qubits, std::size_t n_blocks,
                                         Entangler entangler, std::uint64_t seed,
                                         std::size_t entangle_range = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    CircuitParams p;
    p.n_qubits = n_qubits;
    p.entangler = entangler;
    p.blocks.resize(n_blocks);
    for (auto& b : p.blocks) {
        b.entangle_range = entangle_range;
        b.rotations.resize(n_qubits);
        for (auto& r : b.rotations) r = {angle(rng), angle(rng), angle(rng)};
        if (entangler == Entangler::Cphase && n_qubits >= 2) {
            b.phases.resize(n_qubits);
            for (auto& ph : b.phases) ph = angle(rng);
        }
    }
    p.validate();
    return p;
}

inline void apply_block(StateVector& state, const BlockParams& block,
                        Entangler entangler) {
    const std::size_t n = state.n_qubits();
    if (block.rotations.size() != n)
        throw std::invalid_argument("apply_block: qubit count mismatch");
    for (std::size_t q = 0; q < n; ++q) {
        state.apply_rz(q, block.rotations[q][0]);
        state.apply_rx(q, block.rotations[q][1]);
        state.apply_rz(q, block.rotations[q][2]);
    }
    if (n < 2) return;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t t = (k + block.entangle_range) % n;
        if (entangler == Entangler::Cnot)
            state.apply_cnot(k, t);
        else
            state.apply_cphase(k, t, block.phases[k]);
    }
}

inline StateVector run_circuit(const CircuitParams& params, StateVector state) {
    if (state.n_qubits() != params.n_qubits)
        throw std::invalid_argument("run_circuit: qubit count mismatch");
    for (const auto& b : params.blocks) apply_block(state, b, params.entangler);
    return state;
}

/// Encode x, run the ansatz, and measure <Z_q> on every qubit.
inline std::vector<double> forward_expectations(const CircuitParams& params,
                                                std::span<const double> x) {
    StateVector out = run_circuit(params, amplitude_encode(x, params.n_qubits));
    std::vector<double> e(params.n_qubits);
    for (std::size_t q = 0; q < params.n_qubits; ++q) e[q] = out.expect_z(q);
    return e;
}

// Flat gate sequence, used by the adjoint gradient pass.
struct GateOp {
    enum Kind { Rx, Rz, Cnot, Cphase } kind;
    std::size_t q0;               // rotation qubit, or entangler control
    std::size_t q1 = 0;           // entangler target
    double angle = 0.0;
    std::ptrdiff_t param_index = -1;  // -1 when not trainable
};

inline std::vector<GateOp> gate_sequence(const CircuitParams& params) {
    std::vector<GateOp> ops;
    const std::size_t n = params.n_qubits;
    const std::size_t per = params.params_per_block();
    for (std::size_t l = 0; l < params.blocks.size(); ++l) {
        const BlockParams& b = params.blocks[l];
        const std::size_t base = l * per;
        for (std::size_t q = 0; q < n; ++q) {
            ops.push_back({GateOp::Rz, q, 0, b.rotations[q][0],
                           static_cast<std::ptrdiff_t>(base + q * 3 + 0)});
            ops.push_back({GateOp::Rx, q, 0, b.rotations[q][1],
                           static_cast<std::ptrdiff_t>(base + q * 3 + 1)});
            ops.push_back({GateOp::Rz, q, 0, b.rotations[q][2],
                           static_cast<std::ptrdiff_t>(base + q * 3 + 2)});
        }
        if (n < 2) continue;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t t = (k + b.entangle_range) % n;
            if (params.entangler == Entangler::Cnot) {
                ops.push_back({GateOp::Cnot, k, t, 0.0, -1});
            } else {
                ops.push_back({GateOp::Cphase, k, t, b.phases[k],
                               static_cast<std::ptrdiff_t>(base + n * 3 + k)});
            }
        }
    }
    return ops;
}

inline void apply_gate(StateVector& s, const GateOp& g) {
    switch (g.kind) {
        case GateOp::Rx: s.apply_rx(g.q0, g.angle); break;
        case GateOp::Rz: s.apply_rz(g.q0, g.angle); break;
        case GateOp::Cnot: s.apply_cnot(g.q0, g.q1); break;
        case GateOp::Cphase: s.apply_cphase(g.q0, g.q1, g.angle); break;
    }
}

inline void apply_gate_inverse(StateVector& s, const GateOp& g) {
    switch (g.kind) {
        case GateOp::Rx: s.apply_rx(g.q0, -g.angle); break;
        case GateOp::Rz: s.apply_rz(g.q0, -g.angle); break;
        case GateOp::Cnot: s.apply_cnot(g.q0, g.q1); break;
        case GateOp::Cphase: s.apply_cphase(g.q0, g.q1, -g.angle); break;
    }
}

}  // namespace qpc
