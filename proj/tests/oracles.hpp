#pragma once

// Deliberately naive reference computations for the test suites. They work on
// '0'/'1' strings and use Boost.Math for the special functions so they share
// no code path with the library under test.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oracle {

inline double igamc(double a, double x) { return boost::math::gamma_q(a, x); }
inline double erfc(double x) { return boost::math::erfc(x); }
inline double phi(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

// Flip count of one column: number of neighbouring readouts that differ.
inline int column_transitions(const std::vector<int>& column) {
    int flips = 0;
    for (std::size_t i = 1; i < column.size(); ++i) {
        if (column[i] != column[i - 1]) {
            ++flips;
        }
    }
    return flips;
}

inline int ones(const std::string& s) {
    int n = 0;
    for (char c : s) {
        n += c == '1';
    }
    return n;
}

struct Stat {
    double statistic;
    double p;
};

inline Stat monobit(const std::string& s) {
    const double n = static_cast<double>(s.size());
    const double sum = 2.0 * ones(s) - n;
    const double sobs = std::fabs(sum) / std::sqrt(n);
    return {sobs, erfc(sobs / std::sqrt(2.0))};
}

inline Stat block_frequency(const std::string& s, std::size_t m) {
    const std::size_t blocks = s.size() / m;
    double chi2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const double pi = static_cast<double>(ones(s.substr(b * m, m))) / static_cast<double>(m);
        chi2 += 4.0 * static_cast<double>(m) * (pi - 0.5) * (pi - 0.5);
    }
    return {chi2, igamc(blocks / 2.0, chi2 / 2.0)};
}

inline Stat runs(const std::string& s) {
    const double n = static_cast<double>(s.size());
    int v = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 0 || s[i] != s[i - 1]) {
            ++v;  // a new run starts here
        }
    }
    const double pi = ones(s) / n;
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
        return {static_cast<double>(v), 0.0};
    }
    const double num = std::fabs(v - 2.0 * n * pi * (1 - pi));
    return {static_cast<double>(v), erfc(num / (2.0 * std::sqrt(2.0 * n) * pi * (1 - pi)))};
}

inline Stat longest_run(const std::string& s) {
    std::size_t m;
    std::vector<int> edges;  // category upper edges; last category is open
    std::vector<double> pi;
    if (s.size() < 6272) {
        m = 8;
        edges = {1, 2, 3};
        pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
    } else if (s.size() < 750000) {
        m = 128;
        edges = {4, 5, 6, 7, 8};
        pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
    } else {
        m = 10000;
        edges = {10, 11, 12, 13, 14, 15};
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    }
    const std::size_t blocks = s.size() / m;
    std::vector<int> nu(pi.size(), 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::string block = s.substr(b * m, m);
        int longest = 0;
        for (int len = 1; len <= static_cast<int>(m); ++len) {
            if (block.find(std::string(static_cast<std::size_t>(len), '1')) != std::string::npos) {
                longest = len;
            } else {
                break;
            }
        }
        std::size_t cat = edges.size();
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (longest <= edges[i]) {
                cat = i;
                break;
            }
        }
        ++nu[cat];
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        const double e = blocks * pi[i];
        chi2 += (nu[i] - e) * (nu[i] - e) / e;
    }
    return {chi2, igamc((pi.size() - 1) / 2.0, chi2 / 2.0)};
}

inline Stat cusum(const std::string& s, bool forward) {
    const long n = static_cast<long>(s.size());
    long sum = 0;
    long z = 0;
    for (long i = 0; i < n; ++i) {
        const char c = forward ? s[static_cast<std::size_t>(i)] : s[static_cast<std::size_t>(n - 1 - i)];
        sum += c == '1' ? 1 : -1;
        z = std::max(z, std::labs(sum));
    }
    const double zn = static_cast<double>(z);
    const double rn = std::sqrt(static_cast<double>(n));
    const double nz = static_cast<double>(n) / zn;
    double p = 1.0;
    for (long k = static_cast<long>(std::trunc((std::trunc(-nz) + 1) / 4)); k <= static_cast<long>(std::trunc((std::trunc(nz) - 1) / 4)); ++k) {
        p -= phi((4 * k + 1) * zn / rn) - phi((4 * k - 1) * zn / rn);
    }
    for (long k = static_cast<long>(std::trunc((std::trunc(-nz) - 3) / 4)); k <= static_cast<long>(std::trunc((std::trunc(nz) - 1) / 4)); ++k) {
        p += phi((4 * k + 3) * zn / rn) - phi((4 * k + 1) * zn / rn);
    }
    return {zn, std::min(1.0, std::max(0.0, p))};
}

// Frequencies of every wrapped m-bit substring.
inline std::map<std::string, int> wrapped_templates(const std::string& s, std::size_t m) {
    std::map<std::string, int> counts;
    const std::string ext = s + s.substr(0, m > 0 ? m - 1 : 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        ++counts[ext.substr(i, m)];
    }
    return counts;
}

inline double psi_sq(const std::string& s, std::size_t m) {
    if (m == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [t, c] : wrapped_templates(s, m)) {
        sum += static_cast<double>(c) * c;
    }
    const double n = static_cast<double>(s.size());
    return std::pow(2.0, static_cast<double>(m)) / n * sum - n;
}

struct SerialStat {
    double del1, del2, p1, p2;
};

// Integer sum of squared template counts; m = 0 is the empty template seen n times.
inline std::int64_t square_sum(const std::string& s, std::size_t m) {
    if (m == 0) {
        return static_cast<std::int64_t>(s.size() * s.size());
    }
    std::int64_t sum = 0;
    for (const auto& [t, c] : wrapped_templates(s, m)) {
        sum += static_cast<std::int64_t>(c) * c;
    }
    return sum;
}

inline SerialStat serial(const std::string& s, std::size_t m) {
    const std::int64_t a = square_sum(s, m) << m;
    const std::int64_t b = square_sum(s, m - 1) << (m - 1);
    const std::int64_t c = square_sum(s, m - 2) << (m - 2);
    const double n = static_cast<double>(s.size());
    const double d1 = static_cast<double>(a - b) / n;
    const double d2 = static_cast<double>(a - 2 * b + c) / n;
    return {d1, d2, igamc(std::pow(2.0, m - 2.0), d1 / 2), igamc(std::pow(2.0, m - 3.0), d2 / 2)};
}

inline double phi_m(const std::string& s, std::size_t m) {
    if (m == 0) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& [t, c] : wrapped_templates(s, m)) {
        const double p = static_cast<double>(c) / static_cast<double>(s.size());
        acc += p * std::log(p);
    }
    return acc;
}

inline Stat apen(const std::string& s, std::size_t m) {
    const double ap = phi_m(s, m) - phi_m(s, m + 1);
    const double chi2 = 2.0 * static_cast<double>(s.size()) * (std::log(2.0) - ap);
    return {ap, igamc(std::pow(2.0, m - 1.0), std::max(0.0, chi2) / 2)};
}

}  // namespace oracle
