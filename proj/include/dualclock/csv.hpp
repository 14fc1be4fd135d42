// Dataset CSV serialization. Header `i,t_m,t_s1,t_s2`, LF line endings,
// doubles written with 17 significant digits so round trips are bit-exact.
// The reference arrival instant is appended as `t_ref_arrival` only on
// request since estimators must never see it.
#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "protocol.hpp"

namespace dualclock {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("CSV: bad floating-point field '" + s + "'");
    return v;
}

inline void write_dataset_csv(std::ostream& os, const std::vector<SyncRecord>& records,
                              bool with_truth = false) {
    os << "i,t_m,t_s1,t_s2";
    if (with_truth) os << ",t_ref_arrival";
    os << '\n';
    for (const auto& r : records) {
        os << r.i << ',' << format_double(r.t_m_i) << ','
           << format_double(r.t_s1_i) << ',' << format_double(r.t_s2_i);
        if (with_truth) os << ',' << format_double(r.t_arrival);
        os << '\n';
    }
}

inline std::vector<SyncRecord> read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool with_truth = line == "i,t_m,t_s1,t_s2,t_ref_arrival";
    if (!with_truth && line != "i,t_m,t_s1,t_s2")
        throw std::invalid_argument("CSV: unexpected header '" + line + "'");

    std::vector<SyncRecord> out;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        const std::size_t expect = with_truth ? 5u : 4u;
        if (fields.size() != expect)
            throw std::invalid_argument("CSV: wrong field count in '" + line + "'");
        SyncRecord r{};
        r.i = std::stoi(fields[0]);
        r.t_m_i = parse_double(fields[1]);
        r.t_s1_i = parse_double(fields[2]);
        r.t_s2_i = parse_double(fields[3]);
        r.t_arrival = with_truth ? parse_double(fields[4]) : 0.0;
        out.push_back(r);
    }
    return out;
}

} // namespace dualclock
