#include "graphspde/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "graphspde/errors.hpp"

namespace graphspde {

std::string to_string(SyntheticKind kind) { return kind == SyntheticKind::heat_line ? "heat-line" : "wave-line"; }

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  if (name == "heat-line" || name == "heat_line") return SyntheticKind::heat_line;
  if (name == "wave-line" || name == "wave_line") return SyntheticKind::wave_line;
  throw std::invalid_argument("unknown synthetic kind '" + name + "' (expected heat-line or wave-line)");
}

double heat_fundamental(double x, double t, double k) {
  return 5.0 / (4.0 * std::numbers::pi * k * t) * std::exp(-x * x / (4.0 * k * t));
}

namespace {

void check_line_spec(const SyntheticSpec& spec) {
  if (spec.n_nodes < 2) throw std::invalid_argument("line graph needs at least 2 nodes");
  if (spec.timestamps.empty()) throw std::invalid_argument("no timestamps given");
  for (std::size_t i = 1; i < spec.timestamps.size(); ++i) {
    if (!(spec.timestamps[i] > spec.timestamps[i - 1])) throw std::invalid_argument("timestamps must be ascending");
  }
  if (!(spec.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be non-negative");
}

template <class Field>
SyntheticData sample_line(const SyntheticSpec& spec, std::vector<double> coords, Field&& field) {
  SyntheticData out;
  out.dataset.graph = path_graph(spec.n_nodes, "x");
  out.coordinates = std::move(coords);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double t : spec.timestamps) {
    for (std::size_t v = 0; v < spec.n_nodes; ++v) {
      double y = field(out.coordinates[v], t);
      if (spec.noise_sd > 0.0) y += spec.noise_sd * noise(rng);
      out.dataset.observations.push_back({{v, t}, y});
    }
  }
  return out;
}

}  // namespace

SyntheticData gen_heat_line(const SyntheticSpec& spec) {
  check_line_spec(spec);
  if (!(spec.conductivity > 0.0)) throw std::invalid_argument("conductivity must be positive");
  for (double t : spec.timestamps) {
    if (!(t > 0.0)) throw DataError("heat fundamental solution is singular at t <= 0");
  }
  std::vector<double> coords(spec.n_nodes);
  const double centre = 0.5 * static_cast<double>(spec.n_nodes - 1);
  for (std::size_t v = 0; v < spec.n_nodes; ++v) coords[v] = static_cast<double>(v) - centre;
  return sample_line(spec, std::move(coords),
                     [k = spec.conductivity](double x, double t) { return heat_fundamental(x, t, k); });
}

SyntheticData gen_wave_line(const SyntheticSpec& spec) {
  check_line_spec(spec);
  const double length = static_cast<double>(spec.n_nodes - 1);
  const double omega = spec.wave_speed * std::numbers::pi / length;
  std::vector<double> coords(spec.n_nodes);
  for (std::size_t v = 0; v < spec.n_nodes; ++v) coords[v] = static_cast<double>(v);
  return sample_line(spec, std::move(coords), [=](double x, double t) {
    return std::cos(omega * t) * std::sin(std::numbers::pi * x / length);
  });
}

SyntheticData generate(const SyntheticSpec& spec) {
  return spec.kind == SyntheticKind::heat_line ? gen_heat_line(spec) : gen_wave_line(spec);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

double parse_field(const std::string& text, const std::filesystem::path& path, std::size_t line_no,
                   const char* column) {
  double v = 0.0;
  if (!parse_number(text, v)) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed " + column + " '" + text + "'");
  }
  if (!std::isfinite(v)) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-finite " + column);
  }
  return v;
}

/// Reads non-empty lines (CRLF tolerated) as (line number, fields); the first
/// is checked against the expected header columns.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv(const std::filesystem::path& path,
                                                                       const std::vector<std::string>& required,
                                                                       std::vector<std::string>* header_out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      for (std::size_t i = 0; i < required.size(); ++i) {
        if (i >= fields.size() || fields[i] != required[i]) {
          std::string expected;
          for (const auto& r : required) expected += (expected.empty() ? "" : ",") + r;
          throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected header starting with '" +
                          expected + "'");
        }
      }
      if (header_out) *header_out = fields;
      have_header = true;
      continue;
    }
    rows.emplace_back(line_no, std::move(fields));
  }
  if (!have_header) throw DataError(path.string() + ": empty file");
  return rows;
}

}  // namespace

std::vector<double> parse_time_grid(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    if (!parse_number(trim(s), v) || !std::isfinite(v)) throw std::invalid_argument("malformed time grid '" + text + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 2 && parts.size() != 3) throw std::invalid_argument("malformed time grid '" + text + "'");
    const double start = number(parts[0]);
    const double step = parts.size() == 3 ? number(parts[1]) : 1.0;
    const double stop = number(parts.back());
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("malformed time grid '" + text + "'");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    for (const auto& f : split_fields(text)) out.push_back(number(f));
  }
  if (out.empty()) throw std::invalid_argument("empty time grid");
  return out;
}

Graph load_graph_csv(const std::filesystem::path& path, bool directed) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, {"src", "dst"}, &header);
  const bool has_weight = header.size() >= 3 && header[2] == "weight";
  std::set<std::string> labels;
  std::vector<LabeledEdge> edges;
  for (const auto& [line_no, fields] : rows) {
    if (fields.size() < 2 || fields.size() > (has_weight ? 3u : 2u) || fields[0].empty() || fields[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed edge row");
    }
    double w = 1.0;
    if (has_weight && fields.size() == 3 && !fields[2].empty()) w = parse_field(fields[2], path, line_no, "weight");
    labels.insert(fields[0]);
    labels.insert(fields[1]);
    edges.push_back({fields[0], fields[1], w});
  }
  try {
    return build_graph({labels.begin(), labels.end()}, edges, directed);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SpatioTemporalDataset load_series_csv(const std::filesystem::path& path, const Graph& graph) {
  const auto rows = read_csv(path, {"node_id", "t", "y"}, nullptr);
  SpatioTemporalDataset data{graph, {}};
  std::set<std::pair<std::size_t, double>> seen;
  for (const auto& [line_no, fields] : rows) {
    if (fields.size() != 3) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    if (!graph.contains(fields[0])) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown node '" + fields[0] + "'");
    }
    const std::size_t v = graph.index_of(fields[0]);
    const double t = parse_field(fields[1], path, line_no, "t");
    const double y = parse_field(fields[2], path, line_no, "y");
    if (!seen.emplace(v, t).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate observation for node '" +
                      fields[0] + "' at t=" + fields[1]);
    }
    data.observations.push_back({{v, t}, y});
  }
  if (data.observations.empty()) throw DataError(path.string() + ": no observations");
  return data;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_graph_csv(const std::filesystem::path& path, const Graph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "src,dst,weight\n";
  for (const auto& e : graph.edges()) {
    out << graph.labels()[e.i] << ',' << graph.labels()[e.j] << ',' << format_double(e.weight) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_series_csv(const std::filesystem::path& path, const SpatioTemporalDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "node_id,t,y\n";
  for (const auto& o : data.observations) {
    out << data.graph.labels()[o.point.vertex] << ',' << format_double(o.point.time) << ',' << format_double(o.y)
        << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace graphspde
