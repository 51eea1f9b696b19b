#pragma once

// Field exports: NDJSON (one cell per record), float64 tensor with a JSON
// sidecar for trajectories, and CSV time series.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aep/observables.hpp"

namespace aep {

inline void write_field_ndjson(std::ostream& os, const FieldSnapshot& f) {
  nlohmann::json h = {{"time", f.time}, {"N", f.N},           {"grid", f.grid},
                      {"block", f.block}, {"epsilon", f.epsilon}, {"bins", f.bins.count()}};
  os << h.dump() << '\n';
  for (int cy = 0; cy < f.grid; ++cy)
    for (int cx = 0; cx < f.grid; ++cx) {
      const std::size_t cell = static_cast<std::size_t>(cx) + static_cast<std::size_t>(f.grid) * cy;
      std::vector<double> hist(f.hist.begin() + cell * f.bins.count(), f.hist.begin() + (cell + 1) * f.bins.count());
      nlohmann::json rec = {{"cx", cx}, {"cy", cy}, {"mass", f.mass[cell]}, {"hist", hist},
                            {"mag", {f.mag_x[cell], f.mag_y[cell]}}};
      os << rec.dump() << '\n';
    }
}

inline FieldSnapshot read_field_ndjson(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field stream is empty");
  const auto h = nlohmann::json::parse(line);
  FieldSnapshot f;
  f.time = h.at("time").get<double>();
  f.N = h.at("N").get<int>();
  f.grid = h.at("grid").get<int>();
  f.block = h.at("block").get<int>();
  f.epsilon = h.at("epsilon").get<double>();
  f.bins = AngleBins(h.at("bins").get<int>());
  f.allocate();
  std::size_t seen = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    const int cx = rec.at("cx").get<int>(), cy = rec.at("cy").get<int>();
    if (cx < 0 || cy < 0 || cx >= f.grid || cy >= f.grid) throw std::runtime_error("field record outside the grid");
    const std::size_t cell = static_cast<std::size_t>(cx) + static_cast<std::size_t>(f.grid) * cy;
    const auto hist = rec.at("hist").get<std::vector<double>>();
    if (static_cast<int>(hist.size()) != f.bins.count()) throw std::runtime_error("field record has wrong bin count");
    for (int k = 0; k < f.bins.count(); ++k) f.bin(cell, k) = hist[k];
    f.mass[cell] = rec.at("mass").get<double>();
    f.mag_x[cell] = rec.at("mag").at(0).get<double>();
    f.mag_y[cell] = rec.at("mag").at(1).get<double>();
    ++seen;
  }
  if (seen != f.cells()) throw std::runtime_error("field stream has " + std::to_string(seen) + " cells, expected " + std::to_string(f.cells()));
  return f;
}

/// Writes `<base>.bin` (float64, little endian, shape [T, grid, grid, M + 3],
/// channels mass, bins..., mag_x, mag_y) and `<base>.json`.
inline void write_field_tensor(const std::filesystem::path& base, std::span<const FieldSnapshot> frames,
                               const nlohmann::json& extra = nlohmann::json::object()) {
  if (frames.empty()) throw std::invalid_argument("no frames to write");
  const auto& first = frames.front();
  const int M = first.bins.count();
  std::ofstream bin(base.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + base.string() + ".bin");
  std::vector<double> times;
  for (const auto& f : frames) {
    if (f.grid != first.grid || !(f.bins == first.bins)) throw std::invalid_argument("frames live on different grids");
    times.push_back(f.time);
    for (int cy = 0; cy < f.grid; ++cy)
      for (int cx = 0; cx < f.grid; ++cx) {
        const std::size_t cell = static_cast<std::size_t>(cx) + static_cast<std::size_t>(f.grid) * cy;
        std::vector<double> rec;
        rec.push_back(f.mass[cell]);
        for (int k = 0; k < M; ++k) rec.push_back(f.bin(cell, k));
        rec.push_back(f.mag_x[cell]);
        rec.push_back(f.mag_y[cell]);
        static_assert(std::numeric_limits<double>::is_iec559);
        bin.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size() * sizeof(double)));
      }
  }
  nlohmann::json side = {{"shape", {frames.size(), first.grid, first.grid, M + 3}},
                         {"dtype", "float64"},
                         {"endianness", "little"},
                         {"layout", "frame, cy, cx, channel"},
                         {"channels", "mass, bin_0..bin_{M-1}, mag_x, mag_y"},
                         {"bins", M},
                         {"bin_centers", "2 pi k / M"},
                         {"times", times},
                         {"N", first.N},
                         {"block", first.block},
                         {"epsilon", first.epsilon}};
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  std::ofstream js(base.string() + ".json");
  js << side.dump(2) << '\n';
}

inline std::vector<FieldSnapshot> read_field_tensor(const std::filesystem::path& base) {
  std::ifstream js(base.string() + ".json");
  if (!js) throw std::runtime_error("cannot open " + base.string() + ".json");
  const auto side = nlohmann::json::parse(js);
  const auto shape = side.at("shape").get<std::vector<std::size_t>>();
  const int grid = static_cast<int>(shape.at(1));
  const int M = side.at("bins").get<int>();
  if (shape.at(3) != static_cast<std::size_t>(M + 3)) throw std::runtime_error("tensor sidecar channel count mismatch");
  const auto times = side.at("times").get<std::vector<double>>();
  std::ifstream bin(base.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + base.string() + ".bin");
  std::vector<FieldSnapshot> frames;
  std::vector<double> rec(M + 3);
  for (std::size_t t = 0; t < shape.at(0); ++t) {
    FieldSnapshot f;
    f.time = times.at(t);
    f.N = side.value("N", 0);
    f.grid = grid;
    f.block = side.value("block", 0);
    f.epsilon = side.value("epsilon", 0.0);
    f.bins = AngleBins(M);
    f.allocate();
    for (std::size_t cell = 0; cell < f.cells(); ++cell) {
      bin.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size() * sizeof(double)));
      if (!bin) throw std::runtime_error("tensor file is truncated");
      f.mass[cell] = rec[0];
      for (int k = 0; k < M; ++k) f.bin(cell, k) = rec[1 + k];
      f.mag_x[cell] = rec[M + 1];
      f.mag_y[cell] = rec[M + 2];
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n' << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

}  // namespace aep
