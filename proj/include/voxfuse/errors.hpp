// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace voxfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Extent is not an integer multiple of the voxel size.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Grids or assignments that must share a GridSpec do not.
class SpecMismatch : public Error {
public:
    using Error::Error;
};

/// Tensor shapes or channel counts are incompatible.
class ShapeError : public Error {
public:
    using Error::Error;
};

class EncodingOverflow : public Error {
public:
    using Error::Error;
};

/// Bad magic, version, flags or manifest.
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

class TruncatedMessage : public Error {
public:
    using Error::Error;
};

/// Structurally complete input whose contents violate an invariant.
class CorruptPayload : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace voxfuse
