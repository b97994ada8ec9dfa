#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>

namespace maslov {

// Exact half-integer arithmetic.  Maslov-type indices take values in (1/2)Z;
// they are stored as twice their value so that sums, differences and the
// endpoint weights 1/2 never touch floating point.
class HalfInteger {
public:
    constexpr HalfInteger() : twice_(0) {}

    static constexpr HalfInteger from_twice(std::int64_t twice) {
        HalfInteger h;
        h.twice_ = twice;
        return h;
    }
    static constexpr HalfInteger whole(std::int64_t k) { return from_twice(2 * k); }
    static constexpr HalfInteger half(std::int64_t numerator = 1) { return from_twice(numerator); }

    constexpr std::int64_t twice_value() const { return twice_; }

    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    // Throws unless the value is a whole integer.
    std::int64_t integer_value() const {
        if (!is_integer())
            throw std::domain_error("HalfInteger: " + to_string() + " is not an integer");
        return twice_ / 2;
    }

    double as_double() const { return 0.5 * static_cast<double>(twice_); }

    // Renders "k" for whole values and "k/2" otherwise.
    std::string to_string() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

    friend constexpr HalfInteger operator+(HalfInteger a, HalfInteger b) {
        return from_twice(a.twice_ + b.twice_);
    }
    friend constexpr HalfInteger operator-(HalfInteger a, HalfInteger b) {
        return from_twice(a.twice_ - b.twice_);
    }
    constexpr HalfInteger operator-() const { return from_twice(-twice_); }
    friend constexpr HalfInteger operator*(std::int64_t k, HalfInteger h) {
        return from_twice(k * h.twice_);
    }
    friend constexpr HalfInteger operator*(HalfInteger h, std::int64_t k) { return k * h; }
    HalfInteger& operator+=(HalfInteger o) { twice_ += o.twice_; return *this; }
    HalfInteger& operator-=(HalfInteger o) { twice_ -= o.twice_; return *this; }

    friend constexpr bool operator==(HalfInteger, HalfInteger) = default;
    friend constexpr auto operator<=>(HalfInteger a, HalfInteger b) {
        return a.twice_ <=> b.twice_;
    }

private:
    std::int64_t twice_;
};

}  // namespace maslov
