#pragma once

#include <stdexcept>
#include <string>

namespace probesense {

/// Input rejected by a type or module invariant. `field()` names the offending
/// field, e.g. "devices[2].itinerary[1].enter_s".
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Lookup of an id that does not exist (maps to 404 at the HTTP surface).
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace probesense
