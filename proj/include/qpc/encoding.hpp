// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpc/statevector.hpp"

namespace qpc {

// Inputs with a norm below this encode to |0...0> and get zero gradient;
// the normalization is undefined at the origin.
inline constexpr double kEncodeNormFloor = 1e-9;

/// Number of qubits needed to amplitude-encode c_in channels:
/// ceil(log2(max(c_in, 2))).
inline std::size_t required_qubits(std::size_t c_in) {
    if (c_in == 0) throw std::invalid_argument("required_qubits: c_in must be >= 1");
    std::size_t n = 1;
    while ((std::size_t{1} << n) < c_in) ++n;
    return n;
}

/// |phi(x)> = (1/||x||) sum_i x_i |i>, zero-padded to 2^n_qubits entries.
inline StateVector amplitude_encode(std::span<const double> x, std::size_t n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (x.size() > dim)
        throw std::invalid_argument("amplitude_encode: vector longer than 2^n_qubits");
    double sq = 0.0;
    for (double v : x) {
        if (!std::isfinite(v))
            throw std::invalid_argument("amplitude_encode: non-finite entry");
        sq += v * v;
    }
    std::vector<c64> amps(dim, c64{0.0, 0.0});
    const double nrm = std::sqrt(sq);
    if (nrm < kEncodeNormFloor) {
        amps[0] = c64{1.0, 0.0};
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) amps[i] = c64{x[i] / nrm, 0.0};
    }
    return StateVector(n_qubits, std::move(amps));
}

/// Pulls an upstream cotangent (w.r.t. the padded, normalized amplitudes)
/// back through the encoding:
///   d a_i / d x_j = delta_ij/||x|| - x_i x_j/||x||^3.
/// Degenerate inputs (||x|| below the floor) sit on the flat rule and
/// return a zero gradient.
inline std::vector<double> encode_gradient(std::span<const double> x,
                                           std::size_t n_qubits,
                                           std::span<const double> upstream) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (x.size() > dim)
        throw std::invalid_argument("encode_gradient: vector longer than 2^n_qubits");
    if (upstream.size() != dim)
        throw std::invalid_argument("encode_gradient: upstream length must be 2^n_qubits");
    std::vector<double> grad(x.size(), 0.0);
    double sq = 0.0;
    for (double v : x) sq += v * v;
    const double nrm = std::sqrt(sq);
    if (nrm < kEncodeNormFloor) return grad;
    double dot = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) dot += x[j] * upstream[j];
    const double inv = 1.0 / nrm;
    const double inv3 = inv * inv * inv;
    for (std::size_t j = 0; j < x.size(); ++j)
        grad[j] = upstream[j] * inv - x[j] * dot * inv3;
    return grad;
}

}  // namespace qpc
