#pragma once

#include <fmt/format.h>

#include <stdexcept>
#include <string>

namespace emitron {

class RuntimeError : public std::runtime_error
{
public:
    explicit RuntimeError(const std::string& message)
    : std::runtime_error(message)
    {
    }

    template <typename... Args>
    RuntimeError(fmt::format_string<Args...> format, Args&&... args)
    : std::runtime_error(fmt::format(format, std::forward<Args>(args)...))
    {
    }
};

// A required input (file, column, config key) is missing. CLI exit code 2.
class InputError : public RuntimeError
{
public:
    using RuntimeError::RuntimeError;
};

// Input data is present but violates a contract. CLI exit code 3.
class ValidationError : public RuntimeError
{
public:
    using RuntimeError::RuntimeError;
};

// Inconsistent model configuration, e.g. an unresolvable coefficient lookup.
class ConfigurationError : public RuntimeError
{
public:
    using RuntimeError::RuntimeError;
};

}
