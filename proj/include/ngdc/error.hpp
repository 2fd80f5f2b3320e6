#pragma once

#include <stdexcept>
#include <string>

namespace ngdc {

// Domain error for every failure the toolkit reports (bad files, contract
// violations, numeric preconditions). The CLI maps it to a nonzero exit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ngdc
