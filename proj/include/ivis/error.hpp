#pragma once

#include <stdexcept>
#include <string>

namespace ivis {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or image dimensions that do not fit together.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf encountered in weights, activations or gradients.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Argument outside its documented domain (class index, factor, rectangle...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

enum class ModelFormatErrorKind {
    io,
    bad_magic,
    unsupported_version,
    manifest,
    length_mismatch,
    shape,
};

class ModelFormatError : public Error {
public:
    ModelFormatError(ModelFormatErrorKind kind, const std::string& what)
        : Error(what), kind_(kind) {}

    [[nodiscard]] ModelFormatErrorKind kind() const noexcept { return kind_; }

private:
    ModelFormatErrorKind kind_;
};

enum class PpmErrorKind {
    io,
    bad_magic,
    malformed_header,
    unsupported_depth,
    short_data,
};

class PpmError : public Error {
public:
    PpmError(PpmErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}

    [[nodiscard]] PpmErrorKind kind() const noexcept { return kind_; }

private:
    PpmErrorKind kind_;
};

}  // namespace ivis
