// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "qpc/data.hpp"
#include "qpc/gradient.hpp"
#include "qpc/qpconv.hpp"

namespace qpc {

struct SuiteResult {
    std::string name;
    bool passed;
    std::string detail;
};

namespace verify_detail {

using Mat = std::vector<std::vector<c64>>;

inline Mat identity(std::size_t d) {
    Mat m(d, std::vector<c64>(d, c64{0, 0}));
    for (std::size_t i = 0; i < d; ++i) m[i][i] = c64{1, 0};
    return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
    const std::size_t ra = a.size(), rb = b.size();
    Mat m(ra * rb, std::vector<c64>(ra * rb));
    for (std::size_t i = 0; i < ra; ++i)
        for (std::size_t j = 0; j < ra; ++j)
            for (std::size_t k = 0; k < rb; ++k)
                for (std::size_t l = 0; l < rb; ++l)
                    m[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
    return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    const std::size_t d = a.size();
    Mat m(d, std::vector<c64>(d, c64{0, 0}));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j) m[i][j] += a[i][k] * b[k][j];
    return m;
}

inline std::vector<c64> matvec(const Mat& m, const std::vector<c64>& v) {
    std::vector<c64> out(v.size(), c64{0, 0});
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

// Full 2^n x 2^n matrix of one gate, qubit 0 as the most significant bit.
inline Mat gate_matrix(std::size_t n, const GateOp& g) {
    const std::size_t dim = std::size_t{1} << n;
    if (g.kind == GateOp::Rx || g.kind == GateOp::Rz) {
        Mat single;
        if (g.kind == GateOp::Rx) {
            const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
            single = {{c64{c, 0}, c64{0, -s}}, {c64{0, -s}, c64{c, 0}}};
        } else {
            single = {{std::polar(1.0, -g.angle / 2.0), c64{0, 0}},
                      {c64{0, 0}, std::polar(1.0, g.angle / 2.0)}};
        }
        Mat m = identity(1);
        for (std::size_t q = 0; q < n; ++q)
            m = kron(m, q == g.q0 ? single : identity(2));
        return m;
    }
    // Two-qubit gates written directly from bit logic.
    Mat m(dim, std::vector<c64>(dim, c64{0, 0}));
    const std::size_t cm = std::size_t{1} << (n - 1 - g.q0);
    const std::size_t tm = std::size_t{1} << (n - 1 - g.q1);
    for (std::size_t i = 0; i < dim; ++i) {
        if (g.kind == GateOp::Cnot) {
            m[(i & cm) ? (i ^ tm) : i][i] = c64{1, 0};
        } else {
            m[i][i] = ((i & cm) && (i & tm)) ? std::polar(1.0, g.angle) : c64{1, 0};
        }
    }
    return m;
}

inline Mat circuit_matrix(const CircuitParams& p) {
    Mat u = identity(std::size_t{1} << p.n_qubits);
    for (const auto& g : gate_sequence(p))
        u = matmul(gate_matrix(p.n_qubits, g), u);
    return u;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Forward expectations with an optional RX sign corruption; the hook lets
// cmd_verify demonstrate that the gradient suite catches a broken kernel.
inline std::vector<double> forward_hooked(const CircuitParams& p,
                                          std::span<const double> x, bool corrupt_rx) {
    StateVector s = amplitude_encode(x, p.n_qubits);
    for (const auto& g : gate_sequence(p)) {
        if (corrupt_rx && g.kind == GateOp::Rx) {
            const double c = std::cos(g.angle / 2.0), sn = std::sin(g.angle / 2.0);
            s.apply_one_qubit(g.q0, c64{c, 0}, c64{0, sn}, c64{0, sn}, c64{c, 0});
        } else {
            apply_gate(s, g);
        }
    }
    std::vector<double> e(p.n_qubits);
    for (std::size_t q = 0; q < p.n_qubits; ++q) e[q] = s.expect_z(q);
    return e;
}

}  // namespace verify_detail

/// Built-in oracle suites behind `verify`. Failures are reported, not
/// thrown. `corrupt_rx` is a mutation-test hook: it must make the
/// gradient suite fail.
inline std::vector<SuiteResult> run_verify(bool corrupt_rx = false) {
    namespace vd = verify_detail;
    std::vector<SuiteResult> results;

    {  // 1. unitarity / norm preservation
        std::mt19937_64 rng(1001);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + trial % 3;
            const std::size_t L = 1 + trial % 3;
            const Entangler ent = trial % 2 ? Entangler::Cphase : Entangler::Cnot;
            const auto p = make_random_circuit(n, L, ent, rng());
            const auto x = vd::random_vector(rng, std::size_t{1} << n);
            const StateVector out = run_circuit(p, amplitude_encode(x, n));
            worst = std::max(worst, std::abs(out.norm() - 1.0));
        }
        results.push_back({"unitarity", worst < 1e-10,
                           "max |norm-1| = " + std::to_string(worst)});
    }

    {  // 2. dense Kronecker-product matrix equivalence
        std::mt19937_64 rng(1002);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 1 + trial % 3;
            const std::size_t L = 1 + trial % 3;
            const Entangler ent = trial % 2 ? Entangler::Cphase : Entangler::Cnot;
            const auto p = make_random_circuit(n, L, ent, rng());
            const auto x = vd::random_vector(rng, std::size_t{1} << n);
            const StateVector enc = amplitude_encode(x, n);
            const StateVector fast = run_circuit(p, enc);
            const auto dense = vd::matvec(vd::circuit_matrix(p), enc.amplitudes());
            for (std::size_t i = 0; i < dense.size(); ++i)
                worst = std::max(worst, std::abs(dense[i] - fast.amplitudes()[i]));
        }
        results.push_back({"dense-matrix equivalence", worst < 1e-10,
                           "max elementwise error = " + std::to_string(worst)});
    }

    {  // 3. gradient engines vs finite differences
        std::mt19937_64 rng(1003);
        bool ok = true;
        double worst_rel = 0.0, worst_eng = 0.0;
        const double h = 1e-4;
        for (int trial = 0; trial < 10 && ok; ++trial) {
            const std::size_t n = 2 + trial % 3;
            const std::size_t L = 1 + trial % 2;
            const Entangler ent = trial % 2 ? Entangler::Cphase : Entangler::Cnot;
            const auto p = make_random_circuit(n, L, ent, rng());
            const auto x = vd::random_vector(rng, std::size_t{1} << n);
            const auto up = vd::random_vector(rng, n);
            const auto adj = adjoint_backward(p, x, up);
            for (std::size_t pi = 0; pi < p.param_count(); ++pi) {
                CircuitParams sp = p;
                sp.param(pi) += std::numbers::pi / 2.0;
                auto ep = vd::forward_hooked(sp, x, corrupt_rx);
                sp.param(pi) -= std::numbers::pi;
                auto em = vd::forward_hooked(sp, x, corrupt_rx);
                double shift = 0.0;
                for (std::size_t q = 0; q < n; ++q)
                    shift += up[q] * 0.5 * (ep[q] - em[q]);

                CircuitParams fp = p;
                fp.param(pi) += h;
                auto fdp = forward_expectations(fp, x);
                fp.param(pi) -= 2 * h;
                auto fdm = forward_expectations(fp, x);
                double fd = 0.0;
                for (std::size_t q = 0; q < n; ++q)
                    fd += up[q] * (fdp[q] - fdm[q]) / (2 * h);

                const double denom = std::max(std::abs(fd), 1e-2);
                worst_rel = std::max(worst_rel, std::abs(shift - fd) / denom);
                worst_eng = std::max(worst_eng, std::abs(adj.param_grads[pi] - shift));
            }
            ok = worst_rel < 1e-5 && worst_eng < 1e-8;
        }
        results.push_back({"gradient engines", ok,
                           "max rel FD error = " + std::to_string(worst_rel) +
                               ", max engine gap = " + std::to_string(worst_eng)});
    }

    {  // 4. encoding normalization + scale invariance + gradient
        std::mt19937_64 rng(1004);
        std::uniform_real_distribution<double> scale(0.1, 10.0);
        double worst = 0.0, worst_g = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 1 + trial % 3;
            auto x = vd::random_vector(rng, (std::size_t{1} << n) - trial % 2);
            double nx = 0;
            for (double v : x) nx += v * v;
            if (std::sqrt(nx) < 0.1) x[0] += 0.5;
            const auto enc = amplitude_encode(x, n);
            worst = std::max(worst, std::abs(enc.norm() - 1.0));
            auto sx = x;
            const double a = scale(rng);
            for (double& v : sx) v *= a;
            const auto enc2 = amplitude_encode(sx, n);
            for (std::size_t i = 0; i < enc.dim(); ++i)
                worst = std::max(worst,
                                 std::abs(enc.amplitudes()[i] - enc2.amplitudes()[i]));

            const auto up = vd::random_vector(rng, std::size_t{1} << n);
            const auto g = encode_gradient(x, n, up);
            const double h = 1e-5;
            for (std::size_t j = 0; j < x.size(); ++j) {
                auto xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                const auto ep = amplitude_encode(xp, n);
                const auto em = amplitude_encode(xm, n);
                double fd = 0.0;
                for (std::size_t i = 0; i < ep.dim(); ++i)
                    fd += up[i] * (ep.amplitudes()[i].real() - em.amplitudes()[i].real()) /
                          (2 * h);
                worst_g = std::max(worst_g,
                                   std::abs(g[j] - fd) / std::max(std::abs(fd), 1e-2));
            }
        }
        results.push_back({"encoding properties", worst < 1e-12 && worst_g < 1e-5,
                           "max norm/scale error = " + std::to_string(worst) +
                               ", max grad rel error = " + std::to_string(worst_g)});
    }

    {  // 5. shape and channel laws
        std::mt19937_64 rng(1005);
        bool ok = true;
        for (int trial = 0; trial < 20 && ok; ++trial) {
            const std::size_t nq = 1 + trial % 3;
            const std::size_t nc = 1 + trial % 4;
            const auto bank = make_kernel_bank(nc, nq, 1, Entangler::Cnot, rng());
            const std::size_t H = 1 + trial % 4, W = 1 + (trial / 2) % 4;
            FeatureTensor in(H, W, std::size_t{1} << nq);
            for (double& v : in.data) v = vd::random_vector(rng, 1)[0];
            const FeatureTensor out = qpconv_forward(bank, in);
            ok = bank.full_channels() == nc * nq && out.height == H && out.width == W &&
                 out.channels == nc * nq;
            for (double v : out.data)
                if (std::abs(v) > 1.0 + 1e-10) ok = false;
        }
        results.push_back({"shape/channel laws", ok,
                           "C_out = n_circuits * n_qubits, spatial dims preserved"});
    }

    {  // 6. IDX loader round trip
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "qpc_verify_idx";
        fs::create_directories(dir);
        const std::string ip = (dir / "img.idx").string();
        const std::string lp = (dir / "lab.idx").string();
        const std::vector<std::uint8_t> pix{0, 255, 128, 64, 7, 9, 11, 13};
        {
            std::ofstream f(ip, std::ios::binary);
            const std::uint8_t hdr[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2};
            f.write(reinterpret_cast<const char*>(hdr), 16);
            f.write(reinterpret_cast<const char*>(pix.data()),
                    static_cast<std::streamsize>(pix.size()));
        }
        {
            std::ofstream f(lp, std::ios::binary);
            const std::uint8_t hdr[] = {0, 0, 8, 1, 0, 0, 0, 2, 3, 7};
            f.write(reinterpret_cast<const char*>(hdr), 10);
        }
        bool ok = true;
        try {
            const Dataset ds = load_idx(ip, lp);
            ok = ds.images.size() == 2 && ds.labels[0] == 3 && ds.labels[1] == 7;
            for (std::size_t i = 0; i < 8 && ok; ++i)
                ok = std::abs(ds.images[i / 4].data[i % 4] - pix[i] / 255.0) == 0.0;
        } catch (const std::exception&) {
            ok = false;
        }
        results.push_back({"IDX loader round trip", ok, "2x2x2 fixture"});
    }

    return results;
}

inline bool print_verify_report(const std::vector<SuiteResult>& results) {
    bool all = true;
    for (const auto& r : results) {
        std::printf("%-28s %s  (%s)\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.detail.c_str());
        all = all && r.passed;
    }
    std::printf("verify: %s\n", all ? "all suites passed" : "FAILURES detected");
    return all;
}

}  // namespace qpc
