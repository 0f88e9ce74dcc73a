#include "spdemil/exact.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace spdemil {

namespace {

BigInt parse_integer(std::string_view text) {
    if (text.empty()) {
        throw std::invalid_argument("empty integer literal");
    }
    bool negative = false;
    std::size_t pos = 0;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        pos = 1;
    }
    if (pos == text.size()) {
        throw std::invalid_argument("malformed integer literal: " + std::string(text));
    }
    BigInt value = 0;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw std::invalid_argument("malformed number: " + std::string(text));
        }
        value = value * 10 + (c - '0');
    }
    return negative ? BigInt(-value) : value;
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    return text;
}

BigInt ipow(const BigInt& base, const BigInt& exponent) {
    return boost::multiprecision::pow(base, static_cast<unsigned>(exponent));
}

}  // namespace

Rational parse_rational(std::string_view text) {
    text = trim(text);
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const BigInt num = parse_integer(trim(text.substr(0, slash)));
        const BigInt den = parse_integer(trim(text.substr(slash + 1)));
        if (den == 0) {
            throw std::invalid_argument("zero denominator: " + std::string(text));
        }
        return Rational(num, den);
    }
    if (const auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view whole = text.substr(0, dot);
        const std::string_view frac = text.substr(dot + 1);
        bool negative = false;
        if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) {
            negative = whole[0] == '-';
            whole.remove_prefix(1);
        }
        const BigInt int_part = whole.empty() ? BigInt(0) : parse_integer(whole);
        const BigInt frac_part = frac.empty() ? BigInt(0) : parse_integer(frac);
        if (frac.find_first_of("+-") != std::string_view::npos) {
            throw std::invalid_argument("malformed decimal: " + std::string(text));
        }
        const BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
        Rational value(int_part * scale + frac_part, scale);
        return negative ? Rational(-value) : value;
    }
    return Rational(parse_integer(text));
}

std::string to_string(const Rational& value) {
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    if (den == 1) {
        return num.str();
    }
    return num.str() + "/" + den.str();
}

double to_double(const Rational& value) {
    return value.convert_to<double>();
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw std::invalid_argument("zero denominator");
    }
    return Rational(BigInt(num), BigInt(den));
}

std::uint64_t ceil_power(std::uint64_t base, const Rational& exponent) {
    if (base == 0) {
        throw std::invalid_argument("ceil_power: base must be positive");
    }
    if (base == 1 || exponent <= 0) {
        return 1;
    }
    const BigInt num = boost::multiprecision::numerator(exponent);
    const BigInt den = boost::multiprecision::denominator(exponent);
    // c >= base^(num/den)  <=>  c^den >= base^num
    const BigInt target = ipow(BigInt(base), num);
    const double estimate = std::pow(static_cast<double>(base), to_double(exponent));
    if (!std::isfinite(estimate) || estimate > 1.8e19) {
        throw std::overflow_error("ceil_power: result exceeds 64-bit range");
    }
    std::uint64_t c = estimate > 3.0 ? static_cast<std::uint64_t>(estimate) - 2 : 1;
    while (ipow(BigInt(c), den) < target) {
        ++c;
    }
    while (c > 1 && ipow(BigInt(c - 1), den) >= target) {
        --c;
    }
    return c;
}

}  // namespace spdemil
