#pragma once

// JSON and CSV emission for reports, and JSON input for groups and bubble
// configurations. Doubles are written with 17 significant digits so they
// round-trip exactly.

#include <filesystem>
#include <json.hpp>
#include <string>

#include "critlab/annulus.hpp"
#include "critlab/bubbles.hpp"
#include "critlab/calibration.hpp"
#include "critlab/sobolev.hpp"
#include "critlab/symmetry.hpp"

namespace critlab {

using Json = nlohmann::ordered_json;

Json to_json(const SobolevReport& r);
Json to_json(const EnergyReport& r, bool with_history = true);
Json to_json(const OrbitReport& r);
Json to_json(const MCEstimate& e);
Json to_json(const AdditivityReport& r);
Json to_json(const QuantumReport& r);
Json to_json(const SmallHoleThreshold& t);

std::string method_name(Method m);

/// {"dim": N, "generators": [...]} with each generator either a list of N
/// rows or a flat row-major list of N*N numbers.
GroupSpec group_from_json(const Json& j);
Json to_json(const GroupSpec& g);

/// {"N", "p", "alpha"?, "bubbles": [{"center", "scale", "weight"?, "group"?}],
///  "base"?: {"file": csv path}}. Profiles are calibrated Talenti functions
/// with the given alpha (default 1); "group" defaults to the trivial group.
/// Relative base paths are resolved against `dir`.
BubbleConfig bubbles_from_json(const Json& j, const std::filesystem::path& dir = {});

/// Writes omega_i to dir/omega_<i>.csv (i = 1..m) and returns the manifest.
Json write_family(const CalibratedFamily& fam, const std::filesystem::path& dir);

/// %.17g.
std::string fmt_double(double x);

/// Writes j (indented) to path, creating parent directories.
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

}  // namespace critlab
