#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

namespace tabench {

/// Minimal value-or-error type used across the library where failures are
/// data rather than exceptions (decode results, backend replies, move
/// application).
template <class T, class E>
class Result {
public:
    Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

    static Result ok(T value) { return Result(std::move(value)); }
    static Result err(E error) { return Result(std::move(error)); }

    bool has_value() const { return v_.index() == 0; }
    explicit operator bool() const { return has_value(); }

    T& value() {
        if (!has_value()) throw std::logic_error("Result::value() on error");
        return std::get<0>(v_);
    }
    const T& value() const {
        if (!has_value()) throw std::logic_error("Result::value() on error");
        return std::get<0>(v_);
    }

    E& error() {
        if (has_value()) throw std::logic_error("Result::error() on value");
        return std::get<1>(v_);
    }
    const E& error() const {
        if (has_value()) throw std::logic_error("Result::error() on value");
        return std::get<1>(v_);
    }

private:
    std::variant<T, E> v_;
};

} // namespace tabench
