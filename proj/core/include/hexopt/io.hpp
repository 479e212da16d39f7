#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexopt/mesh.hpp"
#include "hexopt/optimizer.hpp"
#include "hexopt/quality.hpp"

namespace hexopt::io {

// Wavefront OBJ: `v` and `f` records; polygons are fan-triangulated,
// normals/texture coordinates ignored. Throws ParseError with location.
TriSurface read_tri_obj(const std::filesystem::path& path);
TriSurface parse_tri_obj(std::string_view text, const std::string& source = "<obj>");
void write_tri_obj(const std::filesystem::path& path, const TriSurface& surface);

// Legacy ASCII VTK unstructured grid holding only hexahedra (cell type 12).
HexMesh read_hex_vtk(const std::filesystem::path& path);
HexMesh parse_hex_vtk(std::string_view text, const std::string& source = "<vtk>");
std::string format_hex_vtk(const HexMesh& mesh);
void write_hex_vtk(const std::filesystem::path& path, const HexMesh& mesh);

// Feature sidecar (grammar in docs/formats.md). Indices are validated
// against the surface and hex mesh when they are given.
FeatureBindings parse_features(std::string_view text, const std::string& source = "<features>");
FeatureBindings read_features(const std::filesystem::path& path, const TriSurface& surface, const HexMesh& mesh);
void validate_features(const FeatureBindings& bindings, const TriSurface& surface, const HexMesh& mesh,
                       const std::string& source = "<features>");
std::string format_features(const FeatureBindings& bindings);
void write_features(const std::filesystem::path& path, const FeatureBindings& bindings);

struct ReportRow {
  std::string stage;   // pre, post, report
  std::string status;  // ok, failed, n/a
  double theta = 0.0;
  QualityReport report;
};

std::string format_report(std::span<const ReportRow> rows);
std::vector<ReportRow> parse_report(std::string_view text, const std::string& source = "<report>");
void write_report(const std::filesystem::path& path, std::span<const ReportRow> rows);

std::string format_convergence(const ConvergenceLog& log, bool include_timing = false);
void write_convergence(const std::filesystem::path& path, const ConvergenceLog& log, bool include_timing = false);

// Shortest decimal rendering with 17 significant digits (exact round trip).
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace hexopt::io
