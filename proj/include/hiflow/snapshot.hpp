#pragma once

#include <string>

#include "hiflow/curve.hpp"

namespace hiflow {

struct Snapshot {
    DiscreteCurve curve;
    double t = 0.0;
};

// Format: header "N=<count> t=<time>", then one "x y" line per vertex,
// 17 significant digits everywhere. Round-trips doubles bit-exactly.
std::string snapshot_to_string(const DiscreteCurve& c, double t);
Snapshot snapshot_from_string(const std::string& text);

void save_snapshot(const DiscreteCurve& c, double t, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace hiflow
