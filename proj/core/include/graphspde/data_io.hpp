#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphspde/gp.hpp"
#include "graphspde/graph.hpp"

namespace graphspde {

enum class SyntheticKind { heat_line, wave_line };

std::string to_string(SyntheticKind kind);
SyntheticKind synthetic_kind_from_string(const std::string& name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::heat_line;
  std::size_t n_nodes = 21;
  double conductivity = 1.0;  ///< k of the heat fundamental solution
  double wave_speed = 1.0;
  std::vector<double> timestamps;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

/// Line graph, vertex coordinates (same order as graph vertices) and the
/// sampled field, ordered by time then vertex.
struct SyntheticData {
  SpatioTemporalDataset dataset;
  std::vector<double> coordinates;
};

/// Φ(x,t) = 5/(4πkt)·exp(-x²/(4kt)).
double heat_fundamental(double x, double t, double k);

/// Heat fundamental solution on a line graph with integer coordinates
/// centred at 0. Throws DataError for non-positive timestamps.
SyntheticData gen_heat_line(const SyntheticSpec& spec);

/// Standing wave cos(ωt)·sin(πx/X) on nodes x = 0..n-1, X = n-1,
/// ω = wave_speed·π/X.
SyntheticData gen_wave_line(const SyntheticSpec& spec);

SyntheticData generate(const SyntheticSpec& spec);

/// Parses "a:b" (integer steps), "a:step:b" or a comma-separated list.
std::vector<double> parse_time_grid(const std::string& text);

/// Edge list with header `src,dst[,weight]`; weight defaults to 1.
Graph load_graph_csv(const std::filesystem::path& path, bool directed = false);
/// Long-format series with header `node_id,t,y`.
SpatioTemporalDataset load_series_csv(const std::filesystem::path& path, const Graph& graph);

void write_graph_csv(const std::filesystem::path& path, const Graph& graph);
/// Values written with 17 significant digits so reloading is exact.
void write_series_csv(const std::filesystem::path& path, const SpatioTemporalDataset& data);

/// printf("%.17g") of a double.
std::string format_double(double v);

}  // namespace graphspde
