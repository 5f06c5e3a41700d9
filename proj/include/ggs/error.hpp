#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ggs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible operand shapes, or a cache that no longer matches its parameters.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent dataset content. Carries the offending file and
/// line when known (line 0 means "whole file").
class DataError : public Error {
public:
    DataError(std::string file, std::size_t line, const std::string& message)
        : Error(format(file, line, message)), file_(std::move(file)), line_(line) {}

    explicit DataError(const std::string& message) : Error(message) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& file, std::size_t line, const std::string& message) {
        if (line == 0) return file + ": " + message;
        return file + ":" + std::to_string(line) + ": " + message;
    }

    std::string file_;
    std::size_t line_ = 0;
};

/// Invalid argument or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& stage, std::size_t epoch)
        : Error(stage + " diverged at epoch " + std::to_string(epoch) + " (non-finite loss)"),
          epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace ggs
