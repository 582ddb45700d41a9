#include "ks/dd.hpp"

#include <array>
#include <cctype>
#include <limits>
#include <stdexcept>

namespace ks::dd {

namespace {

constexpr int kExpTerms = 25;  // Taylor degree 24 on |r| <= ln2/2
constexpr double kLn2Tail = 5.707708438416212066e-34;  // third word of ln 2

const std::array<DD, kExpTerms>& inverse_factorials() {
    static const std::array<DD, kExpTerms> table = [] {
        std::array<DD, kExpTerms> t{};
        t[0] = DD(1.0);
        for (int k = 1; k < kExpTerms; ++k) t[k] = div(t[k - 1], DD(static_cast<double>(k)));
        return t;
    }();
    return table;
}

DD nan_dd() { return {std::numeric_limits<double>::quiet_NaN(), 0.0}; }

DD pow_int(DD x, long long p) {
    bool neg = p < 0;
    unsigned long long e = static_cast<unsigned long long>(neg ? -p : p);
    DD result(1.0);
    DD base = x;
    while (e != 0) {
        if (e & 1ULL) result = mul(result, base);
        e >>= 1;
        if (e != 0) base = sqr(base);
    }
    return neg ? div(DD(1.0), result) : result;
}

}  // namespace

DD sqrt(DD x, Status& status) {
    if (x.hi < 0.0) {
        status |= Status::Domain;
        return nan_dd();
    }
    if (x.hi == 0.0) return {};
    if (std::isinf(x.hi)) {
        status |= Status::Overflow;
        return x;
    }
    double s = std::sqrt(x.hi);
    double e = sub(x, two_prod(s, s)).hi / (2.0 * s);
    return quick_two_sum(s, e);
}

DD sqrt(DD x) {
    Status ignored = Status::Ok;
    return sqrt(x, ignored);
}

DD exp(DD x, Status& status) {
    if (std::isnan(x.hi)) {
        status |= Status::Domain;
        return x;
    }
    if (x.hi > 709.78) {
        status |= Status::Overflow;
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    if (x.hi < -745.2) {
        status |= Status::Underflow;
        return {};
    }
    if (x.hi == 0.0 && x.lo == 0.0) return DD(1.0);
    // Below exp(-708) the low word is subnormal and the result loses precision.
    if (x.hi < -708.0) status |= Status::Underflow;

    double k = std::nearbyint(x.hi / kLn2.hi);
    // r = x - k ln2 with k*ln2 formed exactly from a three-word ln 2.
    DD r = sub(x, two_prod(k, kLn2.hi));
    r = sub(r, two_prod(k, kLn2.lo));
    r = add(r, -k * kLn2Tail);

    const auto& c = inverse_factorials();
    DD p = c[kExpTerms - 1];
    for (int j = kExpTerms - 2; j >= 0; --j) p = add(mul(p, r), c[j]);

    int ik = static_cast<int>(k);
    return {std::ldexp(p.hi, ik), std::ldexp(p.lo, ik)};
}

DD exp(DD x) {
    Status ignored = Status::Ok;
    return exp(x, ignored);
}

DD log(DD x) {
    if (x.hi < 0.0 || std::isnan(x.hi)) return nan_dd();
    if (x.hi == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
    DD y(std::log(x.hi));
    // y <- y + x exp(-y) - 1
    y = add(y, sub(mul(x, exp(neg(y))), DD(1.0)));
    return y;
}

DD pow(DD x, double p) {
    if (p == std::nearbyint(p) && std::fabs(p) <= 4096.0) return pow_int(x, static_cast<long long>(p));
    if (x.hi <= 0.0) return x.hi == 0.0 && p > 0.0 ? DD() : nan_dd();
    return exp(mul(log(x), p));
}

double log10(DD x) {
    if (!(x.hi > 0.0)) return x.hi == 0.0 ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::quiet_NaN();
    return std::log10(x.hi) + x.lo / (x.hi * 2.302585092994045684);
}

std::string to_string(DD x, int digits) {
    if (std::isnan(x.hi)) return "nan";
    if (std::isinf(x.hi)) return x.hi > 0 ? "inf" : "-inf";
    if (x.hi == 0.0) return "0";
    if (digits < 1) digits = 1;
    if (digits > 34) digits = 34;

    std::string out;
    if (x.hi < 0.0) {
        out.push_back('-');
        x = neg(x);
    }
    int e10 = static_cast<int>(std::floor(std::log10(x.hi)));
    DD y = e10 >= 0 ? div(x, pow_int(DD(10.0), e10)) : mul(x, pow_int(DD(10.0), -e10));
    while (y.hi >= 10.0) {
        y = div(y, DD(10.0));
        ++e10;
    }
    while (y.hi < 1.0) {
        y = mul(y, 10.0);
        --e10;
    }

    std::string mant;
    for (int i = 0; i <= digits; ++i) {
        double d = std::floor(y.hi);
        if (d > 9.0) d = 9.0;
        if (d < 0.0) d = 0.0;
        mant.push_back(static_cast<char>('0' + static_cast<int>(d)));
        y = mul(sub(y, DD(d)), 10.0);
    }
    // Round half up on the guard digit.
    bool carry = mant.back() >= '5';
    mant.pop_back();
    for (int i = static_cast<int>(mant.size()) - 1; i >= 0 && carry; --i) {
        if (mant[i] == '9') {
            mant[i] = '0';
        } else {
            ++mant[i];
            carry = false;
        }
    }
    if (carry) {
        mant.insert(mant.begin(), '1');
        mant.pop_back();
        ++e10;
    }
    out.push_back(mant[0]);
    if (mant.size() > 1) {
        out.push_back('.');
        out.append(mant, 1, std::string::npos);
    }
    out.push_back('e');
    out += std::to_string(e10);
    return out;
}

DD from_string(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    bool negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) negative = s[i++] == '-';

    DD value;
    int exponent = 0;
    bool seen_digit = false;
    bool after_point = false;
    for (; i < s.size(); ++i) {
        char ch = s[i];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            value = add(mul(value, 10.0), DD(static_cast<double>(ch - '0')));
            if (after_point) --exponent;
            seen_digit = true;
        } else if (ch == '.' && !after_point) {
            after_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw std::invalid_argument("not a number: '" + s + "'");
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t used = 0;
        exponent += std::stoi(s.substr(i + 1), &used);
        i += 1 + used;
    }
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i != s.size()) throw std::invalid_argument("trailing characters in number: '" + s + "'");

    if (exponent > 0) value = mul(value, pow_int(DD(10.0), exponent));
    if (exponent < 0) value = div(value, pow_int(DD(10.0), -exponent));
    return negative ? neg(value) : value;
}

}  // namespace ks::dd
