// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/conv.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "voxfuse/errors.hpp"

namespace voxfuse {

std::int32_t conv_output_extent(std::int32_t n, int stride) {
    if (n < 1) throw ShapeError("spatial extent must be positive");
    return (n + 2 * kPadding - kKernelSize) / stride + 1;
}

Extent3 conv_output_shape(const Extent3& in, ConvMode mode, int stride) {
    if (mode == ConvMode::Submanifold) return in;
    return {conv_output_extent(in[0], stride), conv_output_extent(in[1], stride), conv_output_extent(in[2], stride)};
}

void ConvParams::validate() const {
    if (in_channels < 1 || out_channels < 1) throw InvalidArgument("channel counts must be positive");
    if (stride != 1 && stride != 2) throw InvalidArgument("stride must be 1 or 2");
    if (mode == ConvMode::Submanifold && stride != 1) throw InvalidArgument("submanifold convolution requires stride 1");
    if (weights.size() != static_cast<std::size_t>(kKernelVolume) * in_channels * out_channels)
        throw InvalidArgument("weight tensor has the wrong size");
    for (float w : weights)
        if (!std::isfinite(w)) throw InvalidArgument("non-finite convolution weight");
}

ConvParams identity_conv(int channels, ConvMode mode, int stride) {
    ConvParams p(channels, channels, mode, stride);
    for (int c = 0; c < channels; ++c) p.weight(kCenterTap, c, c) = 1.0f;
    return p;
}

std::size_t Rulebook::rule_count() const {
    std::size_t n = 0;
    for (const auto& v : pairs) n += v.size();
    return n;
}

std::vector<Rule> Rulebook::rules() const {
    std::vector<Rule> out;
    out.reserve(rule_count());
    for (int k = 0; k < kKernelVolume; ++k)
        for (auto [i, o] : pairs[k]) out.push_back({k, i, o});
    return out;
}

namespace {

// Open-addressing map from packed coordinate to row. Packed keys never set bit 63, so ~0 marks
// an empty slot.
class CoordIndex {
public:
    static constexpr std::int32_t kMissing = -1;

    explicit CoordIndex(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < expected * 2) cap <<= 1;
        reset(cap);
    }

    /// Returns false when the key was already present.
    bool insert(std::uint64_t key, std::int32_t value) {
        if (2 * (size_ + 1) > keys_.size()) grow();
        for (std::size_t i = slot(key);; i = (i + 1) & mask_) {
            if (keys_[i] == key) return false;
            if (keys_[i] == kEmpty) {
                keys_[i] = key;
                values_[i] = value;
                ++size_;
                return true;
            }
        }
    }

    std::int32_t find(std::uint64_t key) const {
        for (std::size_t i = slot(key);; i = (i + 1) & mask_) {
            if (keys_[i] == key) return values_[i];
            if (keys_[i] == kEmpty) return kMissing;
        }
    }

private:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

    void reset(std::size_t cap) {
        mask_ = cap - 1;
        size_ = 0;
        keys_.assign(cap, kEmpty);
        values_.assign(cap, kMissing);
    }
    void grow() {
        std::vector<std::uint64_t> keys = std::move(keys_);
        std::vector<std::int32_t> values = std::move(values_);
        reset(keys.size() * 2);
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (keys[i] != kEmpty) insert(keys[i], values[i]);
    }

    std::size_t slot(std::uint64_t key) const {
        key ^= key >> 31;
        key *= 0x7FB5D329728EA185ull;
        key ^= key >> 27;
        key *= 0x81DADEF4BC2DD44Dull;
        key ^= key >> 33;
        return static_cast<std::size_t>(key & mask_);
    }

    std::size_t mask_ = 15;
    std::size_t size_ = 0;
    std::vector<std::uint64_t> keys_;
    std::vector<std::int32_t> values_;
};

CoordIndex index_coords(std::span<const Coord> coords) {
    CoordIndex index(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) index.insert(pack_coord(coords[i]), static_cast<std::int32_t>(i));
    return index;
}

// Output positions along one axis reachable from input position i, with the kernel offset that
// connects them.
int axis_candidates(std::int32_t i, int stride, std::int32_t out_extent, std::array<std::int32_t, 3>& out,
                    std::array<int, 3>& offset) {
    int n = 0;
    for (int k = kKernelSize - 1; k >= 0; --k) {
        const std::int32_t num = i + kPadding - k;
        if (num < 0 || num % stride != 0) continue;
        const std::int32_t o = num / stride;
        if (o < out_extent) {
            out[n] = o;
            offset[n++] = k;
        }
    }
    return n;
}

struct Candidate {
    std::uint64_t out_key;
    std::int32_t input;
    std::int32_t tap;
};

// Enumerates every (input, tap, output) triple once, then numbers the distinct outputs in key order.
void build_strided(Rulebook& rb, std::span<const Coord> coords, int stride) {
    std::vector<Candidate> cands;
    cands.reserve(coords.size() * (stride == 1 ? 27 : 8));
    std::vector<std::uint64_t> keys;
    CoordIndex seen(coords.size() * (stride == 1 ? 8 : 2));
    std::array<std::array<std::int32_t, 3>, 3> cand{};
    std::array<std::array<int, 3>, 3> offs{};
    std::array<int, 3> n{};
    for (std::size_t i = 0; i < coords.size(); ++i) {
        for (int d = 0; d < 3; ++d) n[d] = axis_candidates(coords[i][d], stride, rb.out_shape[d], cand[d], offs[d]);
        for (int a = 0; a < n[0]; ++a)
            for (int b = 0; b < n[1]; ++b)
                for (int z = 0; z < n[2]; ++z) {
                    const std::uint64_t key = pack_coord({cand[0][a], cand[1][b], cand[2][z]});
                    if (seen.insert(key, 0)) keys.push_back(key);
                    cands.push_back({key, static_cast<std::int32_t>(i), tap_index(offs[0][a], offs[1][b], offs[2][z])});
                }
    }
    std::sort(keys.begin(), keys.end());
    rb.out_coords.resize(keys.size());
    std::transform(keys.begin(), keys.end(), rb.out_coords.begin(), unpack_coord);

    const CoordIndex out_index = index_coords(rb.out_coords);
    for (const Candidate& c : cands) rb.pairs[c.tap].emplace_back(c.input, out_index.find(c.out_key));
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < kKernelVolume; ++k)
        std::sort(rb.pairs[k].begin(), rb.pairs[k].end(), [](const auto& x, const auto& y) { return x.second < y.second; });
}

}  // namespace

Rulebook build_rulebook(std::span<const Coord> coords, const Extent3& shape, ConvMode mode, int stride) {
    if (stride != 1 && stride != 2) throw InvalidArgument("stride must be 1 or 2");
    if (mode == ConvMode::Submanifold && stride != 1) throw InvalidArgument("submanifold convolution requires stride 1");

    Rulebook rb;
    rb.out_shape = conv_output_shape(shape, mode, stride);
    if (mode == ConvMode::SparseStrided) {
        build_strided(rb, coords, stride);
        return rb;
    }

    rb.out_coords.assign(coords.begin(), coords.end());
    const CoordIndex index = index_coords(coords);
    const auto& outs = rb.out_coords;
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < kKernelVolume; ++k) {
        const Coord off = tap_offset(k);
        auto& list = rb.pairs[k];
        for (std::size_t o = 0; o < outs.size(); ++o) {
            Coord in{};
            for (int d = 0; d < 3; ++d) in[d] = outs[o][d] + off[d] - kPadding;
            if (!in_shape(shape, in)) continue;
            if (const std::int32_t row = index.find(pack_coord(in)); row != CoordIndex::kMissing)
                list.emplace_back(row, static_cast<std::int32_t>(o));
        }
    }
    return rb;
}

SparseTensor sparse_conv(const SparseTensor& t, const ConvParams& p) {
    if (static_cast<int>(t.channels()) != p.in_channels) throw ShapeError("input channels do not match convolution");
    return sparse_conv(t, p, build_rulebook(t, p));
}

SparseTensor sparse_conv(const SparseTensor& t, const ConvParams& p, const Rulebook& rb) {
    if (static_cast<int>(t.channels()) != p.in_channels) throw ShapeError("input channels do not match convolution");
    if (rb.out_shape != conv_output_shape(t.shape(), p.mode, p.stride))
        throw ShapeError("rulebook does not match convolution geometry");
    p.validate();

    const std::size_t cin = static_cast<std::size_t>(p.in_channels);
    const std::size_t cout = static_cast<std::size_t>(p.out_channels);
    FeatureMatrix out(rb.out_coords.size(), cout);
    const FeatureMatrix& in = t.features();
    constexpr std::size_t kTile = 128;

    // Taps run in a fixed order and each output appears once per tap, so every output row
    // accumulates the same sequence of partial products regardless of the thread schedule.
    for (int k = 0; k < kKernelVolume; ++k) {
        const auto& pairs = rb.pairs[k];
        if (pairs.empty()) continue;
        const float* w = p.tap(k).data();
        const auto tiles = static_cast<std::int64_t>((pairs.size() + kTile - 1) / kTile);
#pragma omp parallel
        {
            std::vector<float> gathered(kTile * cin);
            std::vector<float> product(kTile * cout);
#pragma omp for schedule(static)
            for (std::int64_t tile = 0; tile < tiles; ++tile) {
                const std::size_t begin = static_cast<std::size_t>(tile) * kTile;
                const std::size_t n = std::min(kTile, pairs.size() - begin);
                for (std::size_t r = 0; r < n; ++r) {
                    auto src = in.row(static_cast<std::size_t>(pairs[begin + r].first));
                    std::copy(src.begin(), src.end(), gathered.begin() + r * cin);
                }
                using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                Eigen::Map<const RowMajor> a(gathered.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cin));
                Eigen::Map<const RowMajor> b(w, static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(cout));
                Eigen::Map<RowMajor> c(product.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cout));
                c.noalias() = a * b;
                for (std::size_t r = 0; r < n; ++r) {
                    float* dst = out.data.data() + static_cast<std::size_t>(pairs[begin + r].second) * cout;
                    const float* src = product.data() + r * cout;
                    for (std::size_t co = 0; co < cout; ++co) dst[co] += src[co];
                }
            }
        }
    }
    return SparseTensor(rb.out_shape, rb.out_coords, std::move(out));
}

NormParams NormParams::identity(std::size_t channels) {
    NormParams n;
    n.gamma.assign(channels, 1.0f);
    n.beta.assign(channels, 0.0f);
    n.mean.assign(channels, 0.0f);
    n.var.assign(channels, 1.0f);
    return n;
}

void NormParams::validate() const {
    const std::size_t c = gamma.size();
    if (beta.size() != c || mean.size() != c || var.size() != c) throw InvalidArgument("norm parameter sizes differ");
    if (!(eps > 0.0f)) throw InvalidArgument("norm epsilon must be positive");
    for (float v : var)
        if (!(v >= 0.0f)) throw InvalidArgument("norm variance must be non-negative");
}

SparseTensor norm_relu(const SparseTensor& t, const NormParams& n) {
    n.validate();
    const std::size_t channels = t.channels();
    if (n.channels() != channels) throw ShapeError("norm channel count does not match tensor");

    std::vector<double> scale(channels);
    for (std::size_t c = 0; c < channels; ++c)
        scale[c] = static_cast<double>(n.gamma[c]) / std::sqrt(static_cast<double>(n.var[c]) + static_cast<double>(n.eps));

    FeatureMatrix out = t.features();
    const auto rows = static_cast<std::int64_t>(out.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
        float* row = out.data.data() + static_cast<std::size_t>(r) * channels;
        for (std::size_t c = 0; c < channels; ++c) {
            const double y = scale[c] * (static_cast<double>(row[c]) - n.mean[c]) + n.beta[c];
            row[c] = y > 0.0 ? static_cast<float>(y) : 0.0f;
        }
    }
    return SparseTensor(t.shape(), t.coords(), std::move(out));
}

}  // namespace voxfuse
