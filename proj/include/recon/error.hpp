#pragma once

#include <stdexcept>
#include <string>

namespace recon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A channel has no observed sample left to derive a fill value from.
class UnreconstructableChannel : public Error {
public:
    explicit UnreconstructableChannel(std::size_t channel);
    std::size_t channel() const noexcept { return channel_; }

private:
    std::size_t channel_;
};

/// A backward pass was handed a cache that does not belong to its parameters.
class InvalidState : public Error {
public:
    using Error::Error;
};

class NumericFailure : public Error {
public:
    using Error::Error;
};

class UndefinedMetric : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ModelLoadError : public Error {
public:
    enum class Reason { version_mismatch, corrupt_file, shape_mismatch };

    ModelLoadError(Reason reason, const std::string& what);
    Reason reason() const noexcept { return reason_; }

private:
    Reason reason_;
};

class VersionMismatch : public ModelLoadError {
public:
    explicit VersionMismatch(const std::string& what)
        : ModelLoadError(Reason::version_mismatch, what) {}
};

class CorruptFile : public ModelLoadError {
public:
    explicit CorruptFile(const std::string& what)
        : ModelLoadError(Reason::corrupt_file, what) {}
};

class ShapeMismatch : public ModelLoadError {
public:
    explicit ShapeMismatch(const std::string& what)
        : ModelLoadError(Reason::shape_mismatch, what) {}
};

}  // namespace recon
