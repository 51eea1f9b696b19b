#pragma once

// Constructive paths between configurations of the closed box B_p with the
// same angle multiset and at least two holes.
//
// The sites are visited in snake order (consecutive sites are adjacent), and
// the source contents are bubble-sorted into the target order by adjacent
// transpositions. A transposition of two particles at u, v routes two holes
// to the far corners a, b of a 2 x 2 square {u, v, a, b}, rotates the square
// with four jumps and replays the routing backwards.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace aep::exact {

/// Site contents of a closed box of side `side`: 0 = hole, k > 0 = angle label k.
struct BoxConfig {
  int side = 0;
  std::vector<int> cell;  // index x + side * y

  int holes() const { return static_cast<int>(std::count(cell.begin(), cell.end(), 0)); }
  friend bool operator==(const BoxConfig&, const BoxConfig&) = default;
};

struct Jump {
  int from, to;
};

inline bool adjacent(int side, int a, int b) {
  const int ax = a % side, ay = a / side, bx = b % side, by = b / side;
  return std::abs(ax - bx) + std::abs(ay - by) == 1;
}

/// Applies jumps one by one; returns an error message on the first illicit jump.
inline std::optional<std::string> replay(BoxConfig c, const std::vector<Jump>& path, const BoxConfig& target) {
  const int V = static_cast<int>(c.cell.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto [f, t] = path[i];
    if (f < 0 || t < 0 || f >= V || t >= V) return "jump " + std::to_string(i) + " leaves the box";
    if (!adjacent(c.side, f, t)) return "jump " + std::to_string(i) + " is not between neighbours";
    if (c.cell[f] == 0) return "jump " + std::to_string(i) + " starts from a hole";
    if (c.cell[t] != 0) return "jump " + std::to_string(i) + " lands on a particle";
    std::swap(c.cell[f], c.cell[t]);
  }
  if (!(c == target)) return std::string("path does not end at the target");
  return std::nullopt;
}

namespace detail {

inline std::vector<int> snake_order(int side) {
  std::vector<int> order;
  for (int y = 0; y < side; ++y)
    for (int i = 0; i < side; ++i) order.push_back((y % 2 == 0 ? i : side - 1 - i) + side * y);
  return order;
}

inline std::vector<int> neighbours(int side, int s) {
  const int x = s % side, y = s / side;
  std::vector<int> out;
  if (x > 0) out.push_back(s - 1);
  if (x + 1 < side) out.push_back(s + 1);
  if (y > 0) out.push_back(s - side);
  if (y + 1 < side) out.push_back(s + side);
  return out;
}

class PathBuilder {
 public:
  explicit PathBuilder(BoxConfig c) : c_(std::move(c)) {}

  const BoxConfig& config() const { return c_; }
  std::vector<Jump>& path() { return path_; }

  void jump(int from, int to) {
    std::swap(c_.cell[from], c_.cell[to]);
    path_.push_back({from, to});
  }

  /// Moves some hole (not in `blocked`) to `dest` along a shortest route
  /// avoiding `blocked`; returns the jumps made.
  std::optional<std::vector<Jump>> bring_hole(int dest, const std::vector<int>& blocked) {
    if (c_.cell[dest] == 0) return std::vector<Jump>{};
    const int V = static_cast<int>(c_.cell.size());
    std::vector<int> prev(V, -2);
    std::deque<int> q{dest};
    prev[dest] = -1;
    int found = -1;
    while (!q.empty() && found < 0) {
      const int s = q.front();
      q.pop_front();
      for (int n : neighbours(c_.side, s)) {
        if (prev[n] != -2 || std::find(blocked.begin(), blocked.end(), n) != blocked.end()) continue;
        prev[n] = s;
        if (c_.cell[n] == 0) {
          found = n;
          break;
        }
        q.push_back(n);
      }
    }
    if (found < 0) return std::nullopt;
    // The hole walks found -> ... -> dest: each particle on the way steps back into it.
    std::vector<Jump> made;
    for (int h = found; h != dest; h = prev[h]) {
      const int next = prev[h];
      jump(next, h);
      made.push_back({next, h});
    }
    return made;
  }

  /// Exchanges the contents of adjacent sites u and v.
  void transpose(int u, int v) {
    const int pu = c_.cell[u], pv = c_.cell[v];
    if (pu == pv) return;
    if (pu == 0) return jump(v, u);
    if (pv == 0) return jump(u, v);
    const int side = c_.side;
    const int ux = u % side, uy = u / side, vx = v % side, vy = v / side;
    // Offsets perpendicular to the edge u-v, both orientations.
    const int px = vy - uy, py = vx - ux;
    for (int sgn : {1, -1}) {
      const int ax = ux + sgn * px, ay = uy + sgn * py, bx = vx + sgn * px, by = vy + sgn * py;
      if (ax < 0 || ay < 0 || bx < 0 || by < 0 || ax >= side || ay >= side || bx >= side || by >= side) continue;
      const int a = ax + side * ay, b = bx + side * by;
      // Either corner may be the one that is only reachable through the other.
      for (const bool a_first : {true, false}) {
        const int first = a_first ? a : b, second = a_first ? b : a;
        const std::size_t mark = path_.size();
        const BoxConfig saved = c_;
        auto r1 = bring_hole(first, {u, v});
        auto r2 = r1 ? bring_hole(second, {u, v, first}) : std::nullopt;
        if (!r2) {
          c_ = saved;
          path_.resize(mark);
          continue;
        }
        jump(u, a);  // P: u -> a
        jump(v, u);  // Q: v -> u
        jump(a, b);  // P: a -> b
        jump(b, v);  // P: b -> v
        for (auto it = r2->rbegin(); it != r2->rend(); ++it) jump(it->to, it->from);
        for (auto it = r1->rbegin(); it != r1->rend(); ++it) jump(it->to, it->from);
        return;
      }
    }
    throw std::logic_error("no routable 2x2 square for a transposition");
  }

 private:
  BoxConfig c_;
  std::vector<Jump> path_;
};

}  // namespace detail

/// Sequence of licit jumps turning A into B.
inline std::vector<Jump> irreducibility_path(const BoxConfig& A, const BoxConfig& B) {
  if (A.side != B.side || A.cell.size() != static_cast<std::size_t>(A.side * A.side) || B.cell.size() != A.cell.size())
    throw std::invalid_argument("irreducibility_path: configurations live on different boxes");
  auto ma = A.cell, mb = B.cell;
  std::sort(ma.begin(), ma.end());
  std::sort(mb.begin(), mb.end());
  if (ma != mb) throw std::invalid_argument("irreducibility_path: angle multisets differ");
  if (A.holes() < 2) throw std::invalid_argument("irreducibility_path: fewer than two empty sites, the exchange dynamics is not irreducible");
  const auto order = detail::snake_order(A.side);
  const std::size_t V = order.size();
  // Target rank of every item: the k-th occurrence of a label in A goes to its k-th occurrence in B.
  std::map<int, std::vector<int>> slots;
  for (std::size_t i = 0; i < V; ++i) slots[B.cell[order[i]]].push_back(static_cast<int>(i));
  std::map<int, std::size_t> used;
  std::vector<int> rank(V);
  for (std::size_t i = 0; i < V; ++i) {
    const int label = A.cell[order[i]];
    rank[i] = slots[label][used[label]++];
  }
  detail::PathBuilder pb(A);
  for (std::size_t pass = 0; pass < V; ++pass) {
    bool swapped = false;
    for (std::size_t i = 0; i + 1 < V; ++i) {
      if (rank[i] <= rank[i + 1]) continue;
      pb.transpose(order[i], order[i + 1]);
      std::swap(rank[i], rank[i + 1]);
      swapped = true;
    }
    if (!swapped) break;
  }
  return std::move(pb.path());
}

/// Breadth-first distance from A to B in the jump graph (small boxes only).
/// Returns -1 if B is unreachable.
inline long bfs_distance(const BoxConfig& A, const BoxConfig& B, std::size_t state_budget = 2000000) {
  auto key = [](const BoxConfig& c) {
    std::uint64_t k = 0;
    for (int v : c.cell) k = k * 8 + static_cast<std::uint64_t>(v);
    return k;
  };
  if (A.cell.size() > 21) throw std::invalid_argument("bfs_distance: box too large");
  const std::uint64_t goal = key(B);
  std::unordered_map<std::uint64_t, long> dist{{key(A), 0}};
  std::deque<BoxConfig> q{A};
  while (!q.empty()) {
    BoxConfig c = std::move(q.front());
    q.pop_front();
    const long d = dist[key(c)];
    if (key(c) == goal) return d;
    for (int s = 0; s < static_cast<int>(c.cell.size()); ++s) {
      if (c.cell[s] == 0) continue;
      for (int n : detail::neighbours(c.side, s)) {
        if (c.cell[n] != 0) continue;
        std::swap(c.cell[s], c.cell[n]);
        const auto k = key(c);
        if (dist.emplace(k, d + 1).second) {
          if (dist.size() > state_budget) throw std::runtime_error("bfs_distance: state budget exhausted");
          q.push_back(c);
        }
        std::swap(c.cell[s], c.cell[n]);
      }
    }
  }
  return -1;
}

}  // namespace aep::exact
