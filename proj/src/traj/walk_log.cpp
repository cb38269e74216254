#include "chiloc/traj/walk_log.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chiloc {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_num(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("walk log line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

void write_walk_log(std::ostream& out, const std::vector<WalkStep>& steps) {
    out << kWalkLogHeader << '\n';
    for (const auto& s : steps) {
        out << num(s.timestamp) << ',' << num(s.reported.heading()) << ',' << num(s.reported.length()) << ',';
        for (std::size_t i = 0; i < s.scan.size(); ++i) {
            if (i) out << ';';
            out << s.scan[i].ap.to_mac() << ':' << num(s.scan[i].rss);
        }
        out << '\n';
    }
}

std::vector<WalkStep> read_walk_log(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw std::invalid_argument("walk log is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kWalkLogHeader) throw std::invalid_argument("walk log line 1: unexpected header '" + line + "'");
    std::vector<WalkStep> steps;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 4) {
            throw std::invalid_argument("walk log line " + std::to_string(lineno) + ": expected 4 columns");
        }
        WalkStep step;
        step.timestamp = parse_num(cols[0], lineno);
        try {
            step.reported = DisplacementVector(parse_num(cols[1], lineno), parse_num(cols[2], lineno));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("walk log line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!cols[3].empty()) {
            for (const auto& pair : split(cols[3], ';')) {
                const auto colon = pair.rfind(':');
                if (colon == std::string::npos) {
                    throw std::invalid_argument("walk log line " + std::to_string(lineno) + ": bad scan entry '" + pair + "'");
                }
                step.scan.push_back({ApId::parse(pair.substr(0, colon)), parse_num(pair.substr(colon + 1), lineno)});
            }
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

void save_walk_log(const std::string& path, const std::vector<WalkStep>& steps) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    write_walk_log(f, steps);
}

std::vector<WalkStep> load_walk_log(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return read_walk_log(f);
}

}  // namespace chiloc
