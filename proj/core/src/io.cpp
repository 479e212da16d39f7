#include "hexopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hexopt/error.hpp"

namespace hexopt::io {

namespace {

struct Token {
  std::string_view text;
  std::size_t line = 0;
  std::size_t column = 0;
};

std::vector<Token> split_line(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), line_no, start + 1});
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    fn(line, line_no);
    if (end == std::string_view::npos) break;
    pos = end + 1;
    ++line_no;
  }
}

double to_double(const Token& t, const std::string& source) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.text.empty()) {
    throw ParseError(source, t.line, t.column, "expected a number, found '" + std::string(t.text) + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const Token& t, const std::string& source) {
  std::uint64_t v = 0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.text.empty()) {
    throw ParseError(source, t.line, t.column,
                     "expected a non-negative integer, found '" + std::string(t.text) + "'");
  }
  return v;
}

Index to_index(const Token& t, const std::string& source) {
  const auto v = to_unsigned(t, source);
  if (v > std::numeric_limits<Index>::max()) throw ParseError(source, t.line, t.column, "index too large");
  return static_cast<Index>(v);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- OBJ

TriSurface parse_tri_obj(std::string_view text, const std::string& source) {
  static const std::set<std::string_view> kIgnored = {"vn", "vt", "vp", "o", "g", "s", "usemtl", "mtllib", "l"};
  TriSurface surface;
  struct PendingFace {
    std::vector<Token> refs;
  };
  std::vector<PendingFace> faces;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_line(line, line_no);
    if (tokens.empty()) return;
    const auto& key = tokens[0].text;
    if (key == "v") {
      if (tokens.size() != 4 && tokens.size() != 5) {
        throw ParseError(source, line_no, tokens[0].column, "vertex record needs 3 coordinates");
      }
      surface.vertices.push_back(
          {to_double(tokens[1], source), to_double(tokens[2], source), to_double(tokens[3], source)});
    } else if (key == "f") {
      if (tokens.size() < 4) {
        throw ParseError(source, line_no, tokens[0].column,
                         "face record needs at least 3 vertices, found " + std::to_string(tokens.size() - 1));
      }
      faces.push_back({{tokens.begin() + 1, tokens.end()}});
    } else if (!kIgnored.contains(key)) {
      throw ParseError(source, line_no, tokens[0].column, "unknown record '" + std::string(key) + "'");
    }
  });

  const auto n = surface.vertices.size();
  for (const auto& face : faces) {
    std::vector<Index> ids;
    for (const auto& ref : face.refs) {
      Token head = ref;
      head.text = ref.text.substr(0, ref.text.find('/'));
      const auto v = to_unsigned(head, source);
      if (v == 0 || v > n) {
        throw ParseError(source, ref.line, ref.column, "vertex reference " + std::string(head.text) + " out of range");
      }
      ids.push_back(static_cast<Index>(v - 1));
    }
    for (std::size_t i = 1; i + 1 < ids.size(); ++i) surface.triangles.push_back({ids[0], ids[i], ids[i + 1]});
  }
  return surface;
}

TriSurface read_tri_obj(const std::filesystem::path& path) { return parse_tri_obj(read_file(path), path.string()); }

void write_tri_obj(const std::filesystem::path& path, const TriSurface& surface) {
  std::string out;
  for (const auto& v : surface.vertices) {
    out += "v " + format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z) + "\n";
  }
  for (const auto& t : surface.triangles) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  write_file(path, out);
}

// ---------------------------------------------------------------- VTK

namespace {

class TokenStream {
 public:
  TokenStream(std::string_view text, std::string source) : source_(std::move(source)) {
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
      lines_.push_back(line);
      for (auto& t : split_line(line, line_no)) tokens_.push_back(t);
    });
  }

  bool done() const { return pos_ >= tokens_.size(); }

  const Token& next(const char* expected) {
    if (done()) {
      const std::size_t line = lines_.empty() ? 1 : lines_.size();
      throw ParseError(source_, line, 1, std::string("unexpected end of file, expected ") + expected);
    }
    return tokens_[pos_++];
  }

  const Token& peek() const { return tokens_[pos_]; }

  void expect(std::string_view keyword) {
    const auto& t = next(std::string(keyword).c_str());
    if (t.text != keyword) {
      throw ParseError(source_, t.line, t.column,
                       "expected '" + std::string(keyword) + "', found '" + std::string(t.text) + "'");
    }
  }

  // Skips the remainder of the line containing the last consumed token.
  void skip_line() {
    if (pos_ == 0) return;
    const auto line = tokens_[pos_ - 1].line;
    while (!done() && tokens_[pos_].line == line) ++pos_;
  }

  std::string_view line(std::size_t line_no) const { return lines_.at(line_no - 1); }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string_view> lines_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

HexMesh parse_hex_vtk(std::string_view text, const std::string& source) {
  // Header: version line and title line are free-form.
  std::size_t header_end = 0;
  for (int i = 0; i < 2; ++i) {
    const auto nl = text.find('\n', header_end);
    if (nl == std::string_view::npos) throw ParseError(source, static_cast<std::size_t>(i) + 1, 1, "truncated header");
    header_end = nl + 1;
  }
  if (text.substr(0, 22) != "# vtk DataFile Version") throw ParseError(source, 1, 1, "missing '# vtk DataFile Version' header");

  // Re-tokenize with line numbers intact, then skip the two header lines.
  TokenStream ts(text, source);
  while (!ts.done() && ts.peek().line <= 2) ts.next("header");

  ts.expect("ASCII");
  ts.expect("DATASET");
  ts.expect("UNSTRUCTURED_GRID");
  ts.expect("POINTS");
  const auto n_points = to_unsigned(ts.next("point count"), source);
  const auto& type = ts.next("point data type");
  if (type.text != "double" && type.text != "float") {
    throw ParseError(source, type.line, type.column, "unsupported point type '" + std::string(type.text) + "'");
  }
  HexMesh mesh;
  mesh.vertices.reserve(n_points);
  for (std::uint64_t i = 0; i < n_points; ++i) {
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
      const auto& t = ts.next("point coordinate");
      if (t.text == "CELLS") {
        throw ParseError(source, t.line, t.column,
                         "POINTS declares " + std::to_string(n_points) + " points but only " + std::to_string(i) +
                             " are present");
      }
      p[k] = to_double(t, source);
    }
    mesh.vertices.push_back(p);
  }

  ts.expect("CELLS");
  const auto n_cells = to_unsigned(ts.next("cell count"), source);
  const auto& size_tok = ts.next("cell list size");
  const auto list_size = to_unsigned(size_tok, source);
  if (list_size != 9 * n_cells) {
    throw ParseError(source, size_tok.line, size_tok.column,
                     "cell list size " + std::to_string(list_size) + " does not match " + std::to_string(n_cells) +
                         " hexahedra");
  }
  mesh.hexes.reserve(n_cells);
  for (std::uint64_t c = 0; c < n_cells; ++c) {
    const auto& count = ts.next("cell vertex count");
    if (count.text == "CELL_TYPES") {
      throw ParseError(source, count.line, count.column,
                       "CELLS declares " + std::to_string(n_cells) + " cells but only " + std::to_string(c) +
                           " are present");
    }
    if (to_unsigned(count, source) != 8) {
      throw ParseError(source, count.line, count.column, "only 8-vertex hexahedral cells are supported");
    }
    Hex hex;
    for (int k = 0; k < 8; ++k) {
      const auto& t = ts.next("cell vertex index");
      const auto v = to_unsigned(t, source);
      if (v >= n_points) {
        throw ParseError(source, t.line, t.column, "vertex index " + std::to_string(v) + " out of range");
      }
      hex[k] = static_cast<Index>(v);
    }
    mesh.hexes.push_back(hex);
  }

  ts.expect("CELL_TYPES");
  const auto& ntypes_tok = ts.next("cell type count");
  if (to_unsigned(ntypes_tok, source) != n_cells) {
    throw ParseError(source, ntypes_tok.line, ntypes_tok.column, "CELL_TYPES count does not match CELLS count");
  }
  for (std::uint64_t c = 0; c < n_cells; ++c) {
    const auto& t = ts.next("cell type");
    if (to_unsigned(t, source) != 12) {
      throw ParseError(source, t.line, t.column,
                       "cell type " + std::string(t.text) + " is not a hexahedron (12)");
    }
  }
  if (!ts.done()) {
    const auto& t = ts.peek();
    if (t.text != "POINT_DATA" && t.text != "CELL_DATA") {
      throw ParseError(source, t.line, t.column, "unexpected trailing data '" + std::string(t.text) + "'");
    }
  }
  try {
    mesh.validate();
  } catch (const MeshError& e) {
    throw ParseError(source, 1, 1, e.what());
  }
  return mesh;
}

HexMesh read_hex_vtk(const std::filesystem::path& path) { return parse_hex_vtk(read_file(path), path.string()); }

std::string format_hex_vtk(const HexMesh& mesh) {
  std::string out = "# vtk DataFile Version 3.0\nhexopt mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.vertices.size()) + " double\n";
  for (const auto& v : mesh.vertices) {
    out += format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z) + "\n";
  }
  out += "CELLS " + std::to_string(mesh.hexes.size()) + " " + std::to_string(9 * mesh.hexes.size()) + "\n";
  for (const auto& h : mesh.hexes) {
    out += "8";
    for (Index v : h) out += " " + std::to_string(v);
    out += "\n";
  }
  out += "CELL_TYPES " + std::to_string(mesh.hexes.size()) + "\n";
  for (std::size_t i = 0; i < mesh.hexes.size(); ++i) out += "12\n";
  return out;
}

void write_hex_vtk(const std::filesystem::path& path, const HexMesh& mesh) { write_file(path, format_hex_vtk(mesh)); }

// ---------------------------------------------------------------- features

FeatureBindings parse_features(std::string_view text, const std::string& source) {
  FeatureBindings out;
  std::map<Index, std::size_t> corner_line;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_line(line, line_no);
    if (tokens.empty()) return;
    const auto& key = tokens[0];
    if (key.text == "corner") {
      if (tokens.size() != 3) {
        throw ParseError(source, line_no, key.column, "corner record needs <surface-vertex> <hex-vertex>");
      }
      const Index s = to_index(tokens[1], source);
      const Index h = to_index(tokens[2], source);
      if (const auto it = corner_line.find(s); it != corner_line.end()) {
        throw ParseError(source, line_no, tokens[1].column,
                         "sharp corner " + std::to_string(s) + " is already bound on line " +
                             std::to_string(it->second));
      }
      corner_line[s] = line_no;
      out.corners.push_back({s, h});
    } else if (key.text == "curve") {
      CurveBinding curve;
      bool after_colon = false;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i].text == ":") {
          if (after_colon) throw ParseError(source, line_no, tokens[i].column, "second ':' in curve record");
          after_colon = true;
          continue;
        }
        (after_colon ? curve.hex_vertices : curve.chain).push_back(to_index(tokens[i], source));
      }
      if (!after_colon) throw ParseError(source, line_no, key.column, "curve record is missing ':'");
      if (curve.chain.size() < 2) {
        throw ParseError(source, line_no, key.column, "curve chain needs at least two surface vertices");
      }
      if (curve.hex_vertices.empty()) {
        throw ParseError(source, line_no, key.column, "curve has no bound hex vertices");
      }
      out.curves.push_back(std::move(curve));
    } else {
      throw ParseError(source, line_no, key.column, "unknown record '" + std::string(key.text) + "'");
    }
  });
  return out;
}

void validate_features(const FeatureBindings& bindings, const TriSurface& surface, const HexMesh& mesh,
                       const std::string& source) {
  auto check = [&](Index v, std::size_t limit, const std::string& what) {
    if (v >= limit) throw MeshError(source + ": " + what + " index " + std::to_string(v) + " out of range");
  };
  for (const auto& c : bindings.corners) {
    check(c.surface_vertex, surface.vertices.size(), "corner surface vertex");
    check(c.hex_vertex, mesh.vertices.size(), "corner hex vertex");
  }
  for (const auto& c : bindings.curves) {
    for (Index v : c.chain) check(v, surface.vertices.size(), "curve surface vertex");
    for (Index v : c.hex_vertices) check(v, mesh.vertices.size(), "curve hex vertex");
  }
}

FeatureBindings read_features(const std::filesystem::path& path, const TriSurface& surface, const HexMesh& mesh) {
  auto bindings = parse_features(read_file(path), path.string());
  validate_features(bindings, surface, mesh, path.string());
  return bindings;
}

std::string format_features(const FeatureBindings& bindings) {
  std::string out;
  for (const auto& c : bindings.corners) {
    out += "corner " + std::to_string(c.surface_vertex) + " " + std::to_string(c.hex_vertex) + "\n";
  }
  for (const auto& c : bindings.curves) {
    out += "curve";
    for (Index v : c.chain) out += " " + std::to_string(v);
    out += " :";
    for (Index v : c.hex_vertices) out += " " + std::to_string(v);
    out += "\n";
  }
  return out;
}

void write_features(const std::filesystem::path& path, const FeatureBindings& bindings) {
  write_file(path, format_features(bindings));
}

// ---------------------------------------------------------------- reports

namespace {

std::string report_header() {
  std::string h = "stage,status,theta,min_sj,max_sj,inverted,max_dist";
  for (int b = 0; b < kHistogramBins; ++b) {
    char name[16];
    std::snprintf(name, sizeof(name), ",bin_%02d", b);
    h += name;
  }
  return h + "\n";
}

std::vector<Token> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back({line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start), line_no,
                   start + 1});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_report(std::span<const ReportRow> rows) {
  std::string out = report_header();
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += row.stage + "," + row.status + "," + format_double(row.theta) + "," + format_double(r.min_scaled_jacobian) +
           "," + format_double(r.max_scaled_jacobian) + "," + std::to_string(r.inverted) + "," +
           format_double(r.max_dist);
    for (auto count : r.histogram) out += "," + std::to_string(count);
    out += "\n";
  }
  return out;
}

std::vector<ReportRow> parse_report(std::string_view text, const std::string& source) {
  std::vector<ReportRow> rows;
  const std::string header = report_header();
  if (text.substr(0, header.size()) != header) throw ParseError(source, 1, 1, "unexpected report header");
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line_no == 1 || line.empty()) return;
    const auto f = split_csv(line, line_no);
    if (f.size() != 7 + kHistogramBins) {
      throw ParseError(source, line_no, 1, "expected " + std::to_string(7 + kHistogramBins) + " fields");
    }
    ReportRow row;
    row.stage = std::string(f[0].text);
    row.status = std::string(f[1].text);
    row.theta = to_double(f[2], source);
    row.report.min_scaled_jacobian = to_double(f[3], source);
    row.report.max_scaled_jacobian = to_double(f[4], source);
    row.report.inverted = to_unsigned(f[5], source);
    row.report.max_dist = to_double(f[6], source);
    for (int b = 0; b < kHistogramBins; ++b) row.report.histogram[b] = to_unsigned(f[7 + b], source);
    rows.push_back(row);
  });
  return rows;
}

void write_report(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  write_file(path, format_report(rows));
}

std::string format_convergence(const ConvergenceLog& log, bool include_timing) {
  std::string out = "iteration,theta,rho,energy,min_sj,max_dist,step";
  out += include_timing ? ",wall_time\n" : "\n";
  for (const auto& r : log.records) {
    out += std::to_string(r.iteration) + "," + format_double(r.theta) + "," + format_double(r.rho) + "," +
           format_double(r.energy) + "," + format_double(r.min_scaled_jacobian) + "," + format_double(r.max_dist) +
           "," + format_double(r.step);
    if (include_timing) out += "," + format_double(r.wall_time);
    out += "\n";
  }
  return out;
}

void write_convergence(const std::filesystem::path& path, const ConvergenceLog& log, bool include_timing) {
  write_file(path, format_convergence(log, include_timing));
}

}  // namespace hexopt::io
