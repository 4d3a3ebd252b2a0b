// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "voxfuse/sparse_tensor.hpp"

namespace voxfuse {

enum class Reduce : std::uint8_t { Max, Min, Sum, Mean, Mul };

std::string_view to_string(Reduce r);

/// Union of the active sets. A site present in several inputs gets the element-wise reduction of
/// those rows, taken in input order; Mean divides by the number of inputs holding the site.
/// Throws ShapeError on shape or channel mismatch, InvalidArgument on an empty list.
SparseTensor scatter(std::span<const SparseTensor> tensors, Reduce reduce);

/// scatter with Max over an explicit list.
SparseTensor scatter_max(std::initializer_list<const SparseTensor*> tensors);

}  // namespace voxfuse
