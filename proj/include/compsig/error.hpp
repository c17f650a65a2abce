#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace compsig {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { usage = 2, data = 3, internal = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error data_error(const std::string& what) { return {ErrorKind::data, what}; }
inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }

// Runs fn; any compsig::Error escaping it is rethrown with `context: ` prefixed.
template <class Fn>
decltype(auto) with_context(const std::string& context, Fn&& fn) {
    try {
        return std::forward<Fn>(fn)();
    } catch (const Error& e) {
        throw Error(e.kind(), context + ": " + e.what());
    }
}

} // namespace compsig
