// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles: a second, independently coded dense-matrix circuit
// simulator, finite-difference helpers, and dataset fixture writers.
// Nothing here touches the strided statevector kernels under test.

#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "qpc/circuit.hpp"
#include "qpc/qpconv.hpp"

namespace oracle {

using c64 = std::complex<double>;
using Mat = std::vector<std::vector<c64>>;

inline Mat eye(std::size_t d) {
    Mat m(d, std::vector<c64>(d, c64{0, 0}));
    for (std::size_t i = 0; i < d; ++i) m[i][i] = 1.0;
    return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat m(a.size() * b.size(), std::vector<c64>(a.size() * b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            for (std::size_t k = 0; k < b.size(); ++k)
                for (std::size_t l = 0; l < b.size(); ++l)
                    m[i * b.size() + k][j * b.size() + l] = a[i][j] * b[k][l];
    return m;
}

inline Mat mul(const Mat& a, const Mat& b) {
    Mat m(a.size(), std::vector<c64>(a.size(), c64{0, 0}));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a.size(); ++k)
            for (std::size_t j = 0; j < a.size(); ++j) m[i][j] += a[i][k] * b[k][j];
    return m;
}

inline std::vector<c64> apply(const Mat& m, const std::vector<c64>& v) {
    std::vector<c64> out(v.size(), c64{0, 0});
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

inline Mat rx(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {{c64{c, 0}, c64{0, -s}}, {c64{0, -s}, c64{c, 0}}};
}

inline Mat rz(double theta) {
    return {{std::polar(1.0, -theta / 2), c64{0, 0}},
            {c64{0, 0}, std::polar(1.0, theta / 2)}};
}

// Lift a single-qubit matrix to n qubits (qubit 0 = most significant bit).
inline Mat lift(std::size_t n, std::size_t q, const Mat& g) {
    Mat m = eye(1);
    for (std::size_t i = 0; i < n; ++i) m = kron(m, i == q ? g : eye(2));
    return m;
}

inline Mat cnot(std::size_t n, std::size_t control, std::size_t target) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t cm = std::size_t{1} << (n - 1 - control);
    const std::size_t tm = std::size_t{1} << (n - 1 - target);
    Mat m(dim, std::vector<c64>(dim, c64{0, 0}));
    for (std::size_t i = 0; i < dim; ++i) m[(i & cm) ? (i ^ tm) : i][i] = 1.0;
    return m;
}

inline Mat cphase(std::size_t n, std::size_t control, std::size_t target, double phi) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t cm = std::size_t{1} << (n - 1 - control);
    const std::size_t tm = std::size_t{1} << (n - 1 - target);
    Mat m = eye(dim);
    for (std::size_t i = 0; i < dim; ++i)
        if ((i & cm) && (i & tm)) m[i][i] = std::polar(1.0, phi);
    return m;
}

inline Mat block_matrix(const qpc::BlockParams& b, std::size_t n, qpc::Entangler ent) {
    Mat u = eye(std::size_t{1} << n);
    for (std::size_t q = 0; q < n; ++q) {
        u = mul(lift(n, q, rz(b.rotations[q][0])), u);
        u = mul(lift(n, q, rx(b.rotations[q][1])), u);
        u = mul(lift(n, q, rz(b.rotations[q][2])), u);
    }
    if (n >= 2)
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t t = (k + b.entangle_range) % n;
            u = mul(ent == qpc::Entangler::Cnot ? cnot(n, k, t)
                                                : cphase(n, k, t, b.phases[k]),
                    u);
        }
    return u;
}

inline Mat circuit_matrix(const qpc::CircuitParams& p) {
    Mat u = eye(std::size_t{1} << p.n_qubits);
    for (const auto& b : p.blocks) u = mul(block_matrix(b, p.n_qubits, p.entangler), u);
    return u;
}

// Naive simulator: normalize, pad, dense multiply, read off <Z_q>.
inline std::vector<double> naive_expectations(const qpc::CircuitParams& p,
                                              const std::vector<double>& x) {
    const std::size_t dim = std::size_t{1} << p.n_qubits;
    std::vector<c64> v(dim, c64{0, 0});
    double nrm = 0.0;
    for (double e : x) nrm += e * e;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-9) {
        v[0] = 1.0;
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] / nrm;
    }
    const auto out = oracle::apply(circuit_matrix(p), v);
    std::vector<double> e(p.n_qubits, 0.0);
    for (std::size_t q = 0; q < p.n_qubits; ++q) {
        const std::size_t m = std::size_t{1} << (p.n_qubits - 1 - q);
        for (std::size_t i = 0; i < dim; ++i)
            e[q] += ((i & m) ? -1.0 : 1.0) * std::norm(out[i]);
    }
    return e;
}

inline std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                      double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// ------------------------------------------------------ fixture writers

inline void write_idx_images(const std::string& path, std::size_t rows, std::size_t cols,
                             const std::vector<std::vector<std::uint8_t>>& images,
                             std::uint32_t magic = 0x00000803) {
    std::ofstream f(path, std::ios::binary);
    auto be = [&](std::uint32_t v) {
        const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                                   static_cast<std::uint8_t>(v >> 16),
                                   static_cast<std::uint8_t>(v >> 8),
                                   static_cast<std::uint8_t>(v)};
        f.write(reinterpret_cast<const char*>(b), 4);
    };
    be(magic);
    be(static_cast<std::uint32_t>(images.size()));
    be(static_cast<std::uint32_t>(rows));
    be(static_cast<std::uint32_t>(cols));
    for (const auto& img : images)
        f.write(reinterpret_cast<const char*>(img.data()),
                static_cast<std::streamsize>(img.size()));
}

inline void write_idx_labels(const std::string& path,
                             const std::vector<std::uint8_t>& labels,
                             std::uint32_t magic = 0x00000801) {
    std::ofstream f(path, std::ios::binary);
    auto be = [&](std::uint32_t v) {
        const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                                   static_cast<std::uint8_t>(v >> 16),
                                   static_cast<std::uint8_t>(v >> 8),
                                   static_cast<std::uint8_t>(v)};
        f.write(reinterpret_cast<const char*>(b), 4);
    };
    be(magic);
    be(static_cast<std::uint32_t>(labels.size()));
    f.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

// Records: 1 label byte + 3072 channel-planar pixel bytes.
inline void write_cifar10(const std::string& path,
                          const std::vector<std::uint8_t>& labels,
                          const std::vector<std::vector<std::uint8_t>>& planar_pixels) {
    std::ofstream f(path, std::ios::binary);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        f.put(static_cast<char>(labels[r]));
        f.write(reinterpret_cast<const char*>(planar_pixels[r].data()),
                static_cast<std::streamsize>(planar_pixels[r].size()));
    }
}

// A small two-class image set in the FashionMNIST container format:
// class 0 carries a bright center blob, class 1 bright vertical bars,
// both over pixel noise. Separable, but not linearly trivial after
// downsampling.
inline void write_synthetic_idx_pair(const std::string& images_path,
                                     const std::string& labels_path, std::size_t count,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> noise(0, 70);
    std::vector<std::vector<std::uint8_t>> images;
    std::vector<std::uint8_t> labels;
    for (std::size_t s = 0; s < count; ++s) {
        const std::uint8_t label = s % 2;
        std::vector<std::uint8_t> img(28 * 28);
        for (auto& p : img) p = static_cast<std::uint8_t>(noise(rng));
        if (label == 0) {
            for (int i = 8; i < 20; ++i)
                for (int j = 8; j < 20; ++j)
                    img[i * 28 + j] = static_cast<std::uint8_t>(180 + noise(rng));
        } else {
            for (int i = 2; i < 26; ++i)
                for (int j = 4; j < 26; j += 7)
                    for (int w = 0; w < 3; ++w)
                        img[i * 28 + j + w] = static_cast<std::uint8_t>(180 + noise(rng));
        }
        images.push_back(std::move(img));
        labels.push_back(label);
    }
    write_idx_images(images_path, 28, 28, images);
    write_idx_labels(labels_path, labels);
}

}  // namespace oracle
