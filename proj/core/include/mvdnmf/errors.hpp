#pragma once

#include <stdexcept>
#include <string>

namespace mvdnmf {

// Invalid data, dimension mismatches, malformed or unreadable files.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization failures: stalled descent, singular solves.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvdnmf
