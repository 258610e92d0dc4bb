#include "ulamcert/rational.hpp"

#include "ulamcert/error.hpp"

#include <cctype>
#include <limits>

namespace ulamcert {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "invalid argument";
        case ErrorCode::kInvalidMap: return "invalid map";
        case ErrorCode::kDomainGap: return "domain gap";
        case ErrorCode::kNumericConsistency: return "numeric consistency";
        case ErrorCode::kAlignment: return "alignment";
        case ErrorCode::kParse: return "parse error";
        case ErrorCode::kIo: return "i/o error";
        case ErrorCode::kNoUnitEigenvalue: return "no unit eigenvalue";
        case ErrorCode::kResidual: return "residual";
        case ErrorCode::kDivergence: return "divergence";
        case ErrorCode::kSpectralStructure: return "spectral structure";
        case ErrorCode::kMode: return "mode";
        case ErrorCode::kDomain: return "domain";
        case ErrorCode::kPrecondition: return "precondition";
        case ErrorCode::kIterationCap: return "iteration cap";
        case ErrorCode::kNonConvergence: return "non-convergence";
    }
    return "unknown";
}

namespace {

BigInt parse_integer(std::string_view digits, std::string_view whole) {
    if (digits.empty()) {
        throw Error(ErrorCode::kParse, "expected digits in '" + std::string(whole) + "'");
    }
    BigInt value = 0;
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw Error(ErrorCode::kParse, "unexpected character in '" + std::string(whole) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

BigInt pow10(long exponent) {
    BigInt result = 1;
    for (long i = 0; i < exponent; ++i) result *= 10;
    return result;
}

Rational parse_decimal(std::string_view text, std::string_view whole) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_text = text.substr(e + 1);
        bool exp_negative = false;
        if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
            exp_negative = exp_text.front() == '-';
            exp_text.remove_prefix(1);
        }
        BigInt magnitude = parse_integer(exp_text, whole);
        if (magnitude > 4000) throw Error(ErrorCode::kParse, "exponent out of range in '" + std::string(whole) + "'");
        exponent = magnitude.convert_to<long>();
        if (exp_negative) exponent = -exponent;
        text = text.substr(0, e);
    }
    std::string_view int_part = text;
    std::string_view frac_part;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        int_part = text.substr(0, dot);
        frac_part = text.substr(dot + 1);
    }
    if (int_part.empty() && frac_part.empty()) {
        throw Error(ErrorCode::kParse, "empty number '" + std::string(whole) + "'");
    }
    BigInt mantissa = 0;
    if (!int_part.empty()) mantissa = parse_integer(int_part, whole);
    if (!frac_part.empty()) {
        mantissa = mantissa * pow10(static_cast<long>(frac_part.size())) + parse_integer(frac_part, whole);
    }
    exponent -= static_cast<long>(frac_part.size());
    Rational value = exponent >= 0 ? Rational(mantissa * pow10(exponent)) : Rational(mantissa, pow10(-exponent));
    return negative ? Rational(-value) : value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const std::string_view whole = text;
    text = trim(text);
    if (text.empty()) throw Error(ErrorCode::kParse, "empty rational");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Rational num = parse_decimal(trim(text.substr(0, slash)), whole);
        Rational den = parse_decimal(trim(text.substr(slash + 1)), whole);
        if (den == 0) throw Error(ErrorCode::kParse, "zero denominator in '" + std::string(whole) + "'");
        return num / den;
    }
    return parse_decimal(text, whole);
}

std::string format_rational(const Rational& value) {
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

Rational floor(const Rational& value) {
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    BigInt q = num / den;  // truncates toward zero
    if (num < 0 && q * den != num) q -= 1;
    return Rational(q);
}

Rational ceil(const Rational& value) { return -floor(-value); }

bool to_int64(const Rational& value, std::int64_t& out) {
    if (boost::multiprecision::denominator(value) != 1) return false;
    const BigInt num = boost::multiprecision::numerator(value);
    if (num > std::numeric_limits<std::int64_t>::max() || num < std::numeric_limits<std::int64_t>::min()) return false;
    out = num.convert_to<std::int64_t>();
    return true;
}

}  // namespace ulamcert
