#pragma once

// Stable on-disk formats.
//
// CSV: comma separated, '.' decimal point, LF line endings, mandatory header row. Reals are
// written in the shortest form that parses back to the identical double.
//
// JSON documents carry a "schema" member naming the format and its version:
//   farpt.success_grid/1  SuccessGrid with ensemble and seed provenance
//   farpt.far_instance/1  FAR config + codes + scene + measurement, replayable
//   farpt.manifest/1      run manifest written next to CLI outputs

#include "farpt/farmodel.hpp"
#include "farpt/montecarlo.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace farpt {

inline constexpr const char* kGridSchema = "farpt.success_grid/1";
inline constexpr const char* kInstanceSchema = "farpt.far_instance/1";
inline constexpr const char* kManifestSchema = "farpt.manifest/1";

/// Shortest round-trip decimal form; "inf" / "-inf" / "nan" for non-finite values.
std::string format_double(double v);
/// Fixed notation with the given number of decimals.
std::string format_fixed(double v, int decimals);

void write_grid_csv(std::ostream& os, const SuccessGrid& grid);
nlohmann::json grid_to_json(const SuccessGrid& grid);
nlohmann::json ensemble_to_json(const Ensemble& e);

/// A FAR problem instance that can be replayed bit-exactly.
struct FarInstance {
  FarConfig config;
  CodeSequence codes;
  int K = 0;
  std::uint64_t scene_seed = 0;
  Scene scene;
  std::uint64_t row_seed = 0;
  MeasurementSet measurement;
};

/// Generates codes, Theta, scene and measurements from the given seeds.
FarInstance make_far_instance(const FarConfig& cfg, int K, std::uint64_t scene_seed, int n, std::uint64_t row_seed);

nlohmann::json instance_to_json(const FarInstance& inst);
/// Parses and regenerates; throws ShapeError if the stored arrays disagree with the regenerated ones.
FarInstance instance_from_json(const nlohmann::json& j);

nlohmann::json complex_to_json(const Eigen::VectorXcd& v);
Eigen::VectorXcd complex_from_json(const nlohmann::json& j);

} // namespace farpt
