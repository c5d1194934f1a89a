#ifndef RSEA_ERRORS_HPP
#define RSEA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rsea {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BalanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rsea

#endif // RSEA_ERRORS_HPP
