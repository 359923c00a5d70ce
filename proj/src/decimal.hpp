#pragma once

// Shortest round-trip decimal digits of a double, for text output that must
// be byte-stable.

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

namespace circsim::detail {

/// |value| == 0.d1d2d3... * 10^(exponent + 1), i.e. d1.d2d3... * 10^exponent.
struct Decimal {
    std::string digits;
    int exponent = 0;
};

inline Decimal decompose(double magnitude) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, magnitude, std::chars_format::scientific);
    const std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
    const auto e = text.find('e');
    Decimal d;
    for (char ch : text.substr(0, e)) {
        if (ch != '.') d.digits.push_back(ch);
    }
    d.exponent = std::atoi(std::string(text.substr(e + 1)).c_str());
    return d;
}

/// Rounds to `keep` leading digits, half away from zero. Returns true when a
/// carry produced an extra leading digit (the result then has keep + 1 digits).
inline bool round_digits(std::string& digits, int keep) {
    if (keep < 0) {
        digits.clear();
        return false;
    }
    const auto k = static_cast<std::size_t>(keep);
    if (digits.size() <= k) {
        digits.append(k - digits.size(), '0');
        return false;
    }
    const bool up = digits[k] >= '5';
    digits.resize(k);
    if (!up) return false;
    for (std::size_t i = k; i-- > 0;) {
        if (digits[i] == '9') {
            digits[i] = '0';
        } else {
            ++digits[i];
            return false;
        }
    }
    digits.insert(digits.begin(), '1');
    return true;
}

/// Shortest text that parses back to exactly `value`.
inline std::string shortest(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

}  // namespace circsim::detail
