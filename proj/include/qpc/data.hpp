// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <zlib.h>

#include "qpc/qpconv.hpp"
#include "qpc/util.hpp"

namespace qpc {

struct Dataset {
    std::vector<FeatureTensor> images;
    std::vector<std::size_t> labels;
    std::size_t n_classes = 0;
    std::vector<std::string> class_names;
};

namespace detail {

inline bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

// Reads a whole file; .gz paths are transparently decompressed.
inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
    if (has_suffix(path, ".gz")) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw FormatError("cannot open " + path);
        std::vector<std::uint8_t> out;
        std::uint8_t buf[1 << 16];
        int n;
        while ((n = gzread(f, buf, sizeof buf)) > 0)
            out.insert(out.end(), buf, buf + n);
        const bool bad = n < 0;
        gzclose(f);
        if (bad) throw FormatError("gzip read error in " + path);
        return out;
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    if (off + 4 > b.size()) throw FormatError("truncated IDX header");
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// IDX image/label pair (the FashionMNIST distribution format). Pixels
/// are scaled by 1/255 into [0, 1].
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = detail::read_bytes(images_path);
    const auto lab = detail::read_bytes(labels_path);
    if (detail::be32(img, 0) != kIdxImagesMagic)
        throw FormatError("bad IDX image magic in " + images_path);
    if (detail::be32(lab, 0) != kIdxLabelsMagic)
        throw FormatError("bad IDX label magic in " + labels_path);
    const std::size_t count = detail::be32(img, 4);
    const std::size_t rows = detail::be32(img, 8);
    const std::size_t cols = detail::be32(img, 12);
    if (img.size() != 16 + count * rows * cols)
        throw FormatError("IDX image file length mismatch in " + images_path);
    if (lab.size() != 8 + detail::be32(lab, 4))
        throw FormatError("IDX label file length mismatch in " + labels_path);
    if (detail::be32(lab, 4) != count)
        throw FormatError("IDX image/label count mismatch");

    Dataset ds;
    ds.n_classes = 10;
    ds.images.reserve(count);
    ds.labels.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        FeatureTensor t(rows, cols, 1);
        for (std::size_t p = 0; p < rows * cols; ++p)
            t.data[p] = img[16 + s * rows * cols + p] / 255.0;
        ds.images.push_back(std::move(t));
        ds.labels.push_back(lab[8 + s]);
    }
    return ds;
}

/// CIFAR-10 binary batches: 3073-byte records, 1 label byte then 3072
/// channel-planar pixel bytes (R, G, B planes of 1024 each).
inline Dataset load_cifar10(const std::vector<std::string>& batch_paths) {
    constexpr std::size_t kRecord = 3073;
    Dataset ds;
    ds.n_classes = 10;
    for (const auto& path : batch_paths) {
        const auto bytes = detail::read_bytes(path);
        if (bytes.empty() || bytes.size() % kRecord != 0)
            throw FormatError("CIFAR-10 file length not a multiple of 3073: " + path);
        for (std::size_t r = 0; r < bytes.size(); r += kRecord) {
            const std::uint8_t label = bytes[r];
            if (label > 9) throw FormatError("CIFAR-10 label byte out of range");
            FeatureTensor t(32, 32, 3);
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t p = 0; p < 1024; ++p)
                    t.data[p * 3 + c] = bytes[r + 1 + c * 1024 + p] / 255.0;
            ds.images.push_back(std::move(t));
            ds.labels.push_back(label);
        }
    }
    return ds;
}

/// Exact area-overlap box averaging; a constant image stays constant at
/// any target size.
inline FeatureTensor resize_area(const FeatureTensor& src, std::size_t out_h,
                                 std::size_t out_w) {
    if (out_h == src.height && out_w == src.width) return src;
    FeatureTensor out(out_h, out_w, src.channels);
    const double sy = static_cast<double>(src.height) / static_cast<double>(out_h);
    const double sx = static_cast<double>(src.width) / static_cast<double>(out_w);
    for (std::size_t oi = 0; oi < out_h; ++oi) {
        const double y0 = oi * sy, y1 = (oi + 1) * sy;
        for (std::size_t oj = 0; oj < out_w; ++oj) {
            const double x0 = oj * sx, x1 = (oj + 1) * sx;
            for (std::size_t c = 0; c < src.channels; ++c) {
                double acc = 0.0;
                for (std::size_t i = static_cast<std::size_t>(y0);
                     i < src.height && i < y1; ++i) {
                    const double wy =
                        std::min<double>(y1, i + 1.0) - std::max<double>(y0, i);
                    if (wy <= 0.0) continue;
                    for (std::size_t j = static_cast<std::size_t>(x0);
                         j < src.width && j < x1; ++j) {
                        const double wx =
                            std::min<double>(x1, j + 1.0) - std::max<double>(x0, j);
                        if (wx <= 0.0) continue;
                        acc += wy * wx * src.at(i, j, c);
                    }
                }
                out.at(oi, oj, c) = acc / (sy * sx);
            }
        }
    }
    return out;
}

/// Deterministic per-class sampling plus area downsampling; labels are
/// remapped to positions in `classes`.
inline Dataset desk_subset(const Dataset& ds, const std::vector<std::size_t>& classes,
                           std::size_t per_class, std::size_t target_h,
                           std::size_t target_w, std::uint64_t seed) {
    Dataset out;
    out.n_classes = classes.size();
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        std::vector<std::size_t> candidates;
        for (std::size_t s = 0; s < ds.labels.size(); ++s)
            if (ds.labels[s] == classes[ci]) candidates.push_back(s);
        if (candidates.size() < per_class)
            throw std::invalid_argument("desk_subset: not enough samples for class " +
                                        std::to_string(classes[ci]));
        std::mt19937_64 rng(mix_seed(seed, classes[ci]));
        std::shuffle(candidates.begin(), candidates.end(), rng);
        for (std::size_t k = 0; k < per_class; ++k) {
            out.images.push_back(resize_area(ds.images[candidates[k]], target_h, target_w));
            out.labels.push_back(ci);
        }
    }
    return out;
}

/// Shuffled batch index stream; the permutation is a pure function of
/// (seed, epoch) and the final partial batch is kept.
inline std::vector<std::vector<std::size_t>> batches(std::size_t n_samples,
                                                     std::size_t batch_size,
                                                     std::uint64_t seed,
                                                     std::size_t epoch) {
    if (n_samples == 0) throw std::invalid_argument("batches: empty dataset");
    if (batch_size == 0) throw std::invalid_argument("batches: batch_size must be >= 1");
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 0x6261746368ull + epoch));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < n_samples; i += batch_size) {
        out.emplace_back(order.begin() + i,
                         order.begin() + std::min(n_samples, i + batch_size));
    }
    return out;
}

}  // namespace qpc
