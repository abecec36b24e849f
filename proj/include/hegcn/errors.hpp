#pragma once

#include <stdexcept>
#include <string>

namespace hegcn {

/// Level budget violated (operation would consume a level the ciphertext no
/// longer has, or operands sit at different levels).
class LevelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension, layout or argument mismatch.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A model needs more multiplicative depth than the context provides.
class DepthBudgetError : public std::runtime_error {
public:
    DepthBudgetError(std::string layer, int needed, int available)
        : std::runtime_error("depth budget exceeded at layer '" + layer + "': needs " +
                             std::to_string(needed) + " levels, context has " +
                             std::to_string(available)),
          layer_(std::move(layer)) {}

    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

/// Malformed input files or configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No HE parameter set satisfies the requested levels and security target.
class ParamsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hegcn
