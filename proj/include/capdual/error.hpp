#pragma once

#include <stdexcept>
#include <string>

namespace capdual {

/// Raised for violated preconditions and unusable inputs across the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Resource guard tripped (lattice extent, enumeration budget).
class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what) : Error(what) {}
};

}  // namespace capdual
