#pragma once

// Configuration snapshots as NDJSON: a header record followed by one record
// per occupied site. Doubles are written with round-trip precision.

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "aep/configuration.hpp"

namespace aep {

struct SnapshotHeader {
  int N = 0;
  std::uint64_t seed = 0;
  double time = 0.0;
};

inline void write_snapshot(std::ostream& os, const Configuration& c, const SnapshotHeader& header) {
  nlohmann::json h = {{"N", c.side()}, {"seed", header.seed}, {"time", header.time},
                      {"particles", c.particle_count()}};
  os << h.dump() << '\n';
  const auto& g = c.geometry();
  for (int s = 0; s < static_cast<int>(c.site_count()); ++s) {
    if (!c.occupied(s)) continue;
    const Site p = g.coords(s);
    nlohmann::json rec = {{"x", p.x}, {"y", p.y}, {"theta", c.angle(s)}};
    os << rec.dump() << '\n';
  }
}

inline Configuration read_snapshot(std::istream& is, SnapshotHeader* header_out = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("snapshot stream is empty");
  const auto h = nlohmann::json::parse(line);
  SnapshotHeader header{h.at("N").get<int>(), h.at("seed").get<std::uint64_t>(), h.at("time").get<double>()};
  Configuration c{TorusGeometry(header.N)};
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    const int x = rec.at("x").get<int>(), y = rec.at("y").get<int>();
    if (x < 0 || y < 0 || x >= header.N || y >= header.N)
      throw std::runtime_error("snapshot record outside the torus: " + line);
    c.place(c.geometry().index(x, y), rec.at("theta").get<double>());
  }
  if (h.contains("particles") && h["particles"].get<std::size_t>() != c.particle_count())
    throw std::runtime_error("snapshot particle count does not match its header");
  if (header_out) *header_out = header;
  return c;
}

}  // namespace aep
