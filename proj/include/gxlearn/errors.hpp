#ifndef GXLEARN_ERRORS_HPP
#define GXLEARN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gxlearn {

/// Invalid or inconsistent input: bad files, contract violations, shape mismatches.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure inside a numerical routine: singular factorization, non-finite result.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gxlearn

#endif
