// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/scatter.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

#include "voxfuse/errors.hpp"

namespace voxfuse {

std::string_view to_string(Reduce r) {
    switch (r) {
        case Reduce::Max: return "max";
        case Reduce::Min: return "min";
        case Reduce::Sum: return "sum";
        case Reduce::Mean: return "mean";
        case Reduce::Mul: return "mul";
    }
    return "unknown";
}

namespace {

float min_commutative(float a, float b) {
    if (a < b) return a;
    if (b < a) return b;
    return std::signbit(a) ? a : b;
}

SparseTensor scatter_impl(std::span<const SparseTensor* const> tensors, Reduce reduce) {
    if (tensors.empty()) throw InvalidArgument("scatter needs at least one tensor");
    const Extent3 shape = tensors.front()->shape();
    const std::size_t channels = tensors.front()->channels();
    for (const SparseTensor* t : tensors)
        if (t->shape() != shape || t->channels() != channels)
            throw ShapeError("scatter inputs must share shape and channel count");
    if (tensors.size() == 1) return *tensors.front();

    // (site key, input index, row): grouping by key keeps the per-site fold in input order.
    std::vector<std::tuple<std::uint64_t, std::uint32_t, std::uint32_t>> entries;
    std::size_t total = 0;
    for (const SparseTensor* t : tensors) total += t->size();
    entries.reserve(total);
    for (std::uint32_t s = 0; s < tensors.size(); ++s)
        for (std::uint32_t i = 0; i < tensors[s]->size(); ++i)
            entries.emplace_back(pack_coord(tensors[s]->coords()[i]), s, i);
    std::sort(entries.begin(), entries.end());

    std::vector<Coord> coords;
    std::vector<float> data;
    coords.reserve(entries.size());
    data.reserve(entries.size() * channels);
    for (std::size_t begin = 0; begin < entries.size();) {
        const std::uint64_t key = std::get<0>(entries[begin]);
        const std::size_t base = data.size();
        auto first = tensors[std::get<1>(entries[begin])]->features().row(std::get<2>(entries[begin]));
        data.insert(data.end(), first.begin(), first.end());
        std::size_t end = begin + 1;
        for (; end < entries.size() && std::get<0>(entries[end]) == key; ++end) {
            auto row = tensors[std::get<1>(entries[end])]->features().row(std::get<2>(entries[end]));
            for (std::size_t c = 0; c < channels; ++c) {
                float& acc = data[base + c];
                switch (reduce) {
                    case Reduce::Max: acc = max_commutative(acc, row[c]); break;
                    case Reduce::Min: acc = min_commutative(acc, row[c]); break;
                    case Reduce::Sum:
                    case Reduce::Mean: acc += row[c]; break;
                    case Reduce::Mul: acc *= row[c]; break;
                }
            }
        }
        if (reduce == Reduce::Mean) {
            const auto n = static_cast<float>(end - begin);
            for (std::size_t c = 0; c < channels; ++c) data[base + c] /= n;
        }
        coords.push_back(unpack_coord(key));
        begin = end;
    }
    FeatureMatrix f;
    f.rows = coords.size();
    f.cols = channels;
    f.data = std::move(data);
    return SparseTensor(shape, std::move(coords), std::move(f));
}

}  // namespace

SparseTensor scatter(std::span<const SparseTensor> tensors, Reduce reduce) {
    std::vector<const SparseTensor*> ptrs;
    ptrs.reserve(tensors.size());
    for (const auto& t : tensors) ptrs.push_back(&t);
    return scatter_impl(ptrs, reduce);
}

SparseTensor scatter_max(std::initializer_list<const SparseTensor*> tensors) {
    return scatter_impl(std::span<const SparseTensor* const>(tensors.begin(), tensors.size()), Reduce::Max);
}

}  // namespace voxfuse
