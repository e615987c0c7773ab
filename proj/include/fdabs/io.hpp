#pragma once

// Text persistence for snapshots and rescaled profiles: '#'-prefixed
// key=value header lines followed by one "r value" (or "y value") pair per
// line. Numbers use the shortest representation that round-trips exactly.

#include "fdabs/field.hpp"
#include "fdabs/rescaler.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

namespace fdabs {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite).
std::string format_double(double x);
/// Strict parse of a whole token; throws FormatError.
double parse_double(const std::string& token);

using Header = std::map<std::string, std::string>;

/// Extra header entries (params, solver config) are written before the
/// built-in ones; keys must not contain '=' or whitespace.
void write_snapshot(std::ostream& os, const Snapshot& snap, const Header& extra = {});
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, const Header& extra = {});

struct LoadedSnapshot {
    Snapshot snapshot;
    Header header;
};

/// Rebuilds the grid from the recorded (N, R_max, n_cells, stretch) when the
/// centers match it exactly, otherwise from the centers alone.
LoadedSnapshot read_snapshot(std::istream& is);
LoadedSnapshot read_snapshot(const std::filesystem::path& path);

void write_profile(std::ostream& os, const RescaledProfile& profile, const Header& extra = {});

struct LoadedProfile {
    RescaledProfile profile;
    Header header;
};

/// The source grid of a loaded profile is left empty.
LoadedProfile read_profile(std::istream& is);

}  // namespace fdabs
