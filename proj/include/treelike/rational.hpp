#pragma once

#include <boost/rational.hpp>

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace treelike {

// Exact rational level indices. Desk-scale values only, so 64-bit
// components are plenty; boost::rational keeps them normalized
// (gcd 1, positive denominator).
using Rat = boost::rational<long long>;

inline Rat rat(long long num, long long den = 1) { return Rat(num, den); }

inline std::string format_rat(const Rat& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Accepts "p/q" or a bare integer "p".
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    const auto slash = s.find('/');
    char* end = nullptr;
    const std::string num_part = slash == std::string::npos ? s : s.substr(0, slash);
    long long num = std::strtoll(num_part.c_str(), &end, 10);
    if (end == num_part.c_str() || *end != '\0')
        throw std::invalid_argument("bad rational literal: " + s);
    long long den = 1;
    if (slash != std::string::npos) {
        const std::string den_part = s.substr(slash + 1);
        den = std::strtoll(den_part.c_str(), &end, 10);
        if (end == den_part.c_str() || *end != '\0' || den == 0)
            throw std::invalid_argument("bad rational literal: " + s);
    }
    return Rat(num, den);
}

inline Rat midpoint(const Rat& a, const Rat& b) { return (a + b) / 2; }

inline long long floor_rat(const Rat& r) {
    long long q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
    return q;
}

}  // namespace treelike
