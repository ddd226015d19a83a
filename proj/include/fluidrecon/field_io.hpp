#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluidrecon/forward.hpp"
#include "fluidrecon/grid.hpp"

namespace fluidrecon::io {

inline constexpr int kFormatVersion = 1;

/// Malformed, missing or inconsistent input data (exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure to create or write an output (exit code 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw little-endian IEEE-754 binary64, no header.
void write_f64(const std::filesystem::path& path, std::span<const double> values);
/// Throws DataError when the file is missing or its length is not 8 * expected.
std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected);

/// Writes manifest.json plus one .f64 per field into dir.
void write_bundle(const MeasurementBundle& bundle, const std::filesystem::path& dir);
MeasurementBundle read_bundle(const std::filesystem::path& dir);

/// A directory of named interior fields sharing one grid (truth, recovered).
struct FieldSet {
    GridPtr grid;
    std::map<std::string, ScalarField> fields;
};

void write_field_set(const FieldSet& set, const std::filesystem::path& dir);
FieldSet read_field_set(const std::filesystem::path& dir);

/// Grid declared by a manifest file (bundle or field set).
GridPtr read_manifest_grid(const std::filesystem::path& manifest);

FieldSet to_field_set(const FluidState& state);
/// Needs c, v1, v2, rho; zeta and alpha0 default to zero fields when absent.
FluidState to_fluid_state(const FieldSet& set);

}  // namespace fluidrecon::io
