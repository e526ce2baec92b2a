#include "hiflow/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "hiflow/error.hpp"

namespace hiflow {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || end != begin + s.size())
        throw ConfigError("snapshot: bad number '" + s + "'");
    return v;
}

}  // namespace

std::string snapshot_to_string(const DiscreteCurve& c, double t) {
    std::string out = "N=" + std::to_string(c.size()) + " t=" + fmt17(t) + "\n";
    for (const Vec2& p : c.pts()) out += fmt17(p.x) + " " + fmt17(p.y) + "\n";
    return out;
}

Snapshot snapshot_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("snapshot: empty input");
    std::size_t n = 0;
    double t = 0.0;
    {
        std::istringstream hs(header);
        std::string ntok, ttok;
        if (!(hs >> ntok >> ttok) || ntok.rfind("N=", 0) != 0 || ttok.rfind("t=", 0) != 0)
            throw ConfigError("snapshot: malformed header '" + header + "'");
        std::string rest;
        if (hs >> rest) throw ConfigError("snapshot: trailing tokens in header");
        n = std::size_t(std::strtoull(ntok.c_str() + 2, nullptr, 10));
        t = parse_double(ttok.substr(2));
    }
    if (n == 0) throw ConfigError("snapshot: vertex count is zero");
    std::vector<Vec2> pts;
    pts.reserve(n);
    std::string line;
    while (pts.size() < n) {
        if (!std::getline(in, line))
            throw ConfigError("snapshot: expected " + std::to_string(n) + " vertices, got " +
                              std::to_string(pts.size()));
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string xs, ys, extra;
        if (!(ls >> xs >> ys) || (ls >> extra))
            throw ConfigError("snapshot: malformed vertex line '" + line + "'");
        pts.push_back({parse_double(xs), parse_double(ys)});
    }
    return Snapshot{DiscreteCurve(std::move(pts)), t};
}

void save_snapshot(const DiscreteCurve& c, double t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << snapshot_to_string(c, t);
    if (!out) throw NumericalError("short write: " + path);
}

Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open snapshot: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return snapshot_from_string(buf.str());
}

}  // namespace hiflow
