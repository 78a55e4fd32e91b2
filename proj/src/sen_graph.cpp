#include "sengraph/sen_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sengraph/fsio.hpp"
#include "sengraph/rng.hpp"

namespace sengraph {

namespace {

double dist2(Point a, Point b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Uniform-cell spatial index over node positions. Queries visit cells in
/// rings of growing Chebyshev distance so close witnesses are found first.
class Buckets {
 public:
  Buckets(const std::vector<SenNode>& nodes, double cell)
      : cell_(cell) {
    if (nodes.empty()) return;
    x0_ = nodes[0].pos.x;
    y0_ = nodes[0].pos.y;
    double x1 = x0_, y1 = y0_;
    for (const SenNode& n : nodes) {
      x0_ = std::min(x0_, n.pos.x);
      y0_ = std::min(y0_, n.pos.y);
      x1 = std::max(x1, n.pos.x);
      y1 = std::max(y1, n.pos.y);
    }
    nx_ = std::max(1, static_cast<int>((x1 - x0_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((y1 - y0_) / cell_) + 1);
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      cells_[cell_of(nodes[i].pos)].push_back(i);
  }

  /// Calls fn(node_index) for points in cells intersecting the disk around
  /// `c`; stops and returns true as soon as fn returns true.
  template <typename Fn>
  bool any_within(Point c, double radius, Fn&& fn) const {
    int ccx = col_of(c.x), ccy = row_of(c.y);
    int max_ring = static_cast<int>(radius / cell_) + 1;
    for (int ring = 0; ring <= max_ring; ++ring) {
      if (ring > 0 && (ring - 1) * cell_ > radius) break;
      bool any_cell = false;
      for (int dy = -ring; dy <= ring; ++dy)
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          int cx = ccx + dx, cy = ccy + dy;
          if (cx < 0 || cx >= nx_ || cy < 0 || cy >= ny_) continue;
          any_cell = true;
          for (std::size_t idx :
               cells_[static_cast<std::size_t>(cy) * nx_ + cx])
            if (fn(idx)) return true;
        }
      if (!any_cell && ring > 0 && ccx + ring >= nx_ && ccx - ring < 0 &&
          ccy + ring >= ny_ && ccy - ring < 0)
        break;  // rings have left the grid entirely
    }
    return false;
  }

 private:
  std::size_t cell_of(Point p) const {
    return static_cast<std::size_t>(row_of(p.y)) * nx_ + col_of(p.x);
  }
  int col_of(double x) const {
    int c = static_cast<int>((x - x0_) / cell_);
    return std::clamp(c, 0, nx_ - 1);
  }
  int row_of(double y) const {
    int r = static_cast<int>((y - y0_) / cell_);
    return std::clamp(r, 0, ny_ - 1);
  }

  double cell_ = 1.0;
  double x0_ = 0.0, y0_ = 0.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

double heuristic_cell(const std::vector<SenNode>& nodes) {
  double x0 = nodes[0].pos.x, y0 = nodes[0].pos.y, x1 = x0, y1 = y0;
  for (const SenNode& n : nodes) {
    x0 = std::min(x0, n.pos.x);
    y0 = std::min(y0, n.pos.y);
    x1 = std::max(x1, n.pos.x);
    y1 = std::max(y1, n.pos.y);
  }
  // Degenerate (collinear or clustered) layouts must not shrink the cell
  // toward zero, so size off the larger extent, not the enclosed area.
  double extent = std::max(x1 - x0, y1 - y0);
  if (!(extent > 0.0)) return 1.0;
  return std::max(extent / std::ceil(std::sqrt(
                               static_cast<double>(nodes.size()))),
                  extent * 1e-6);
}

void check_distinct_positions(const std::vector<SenNode>& nodes) {
  std::vector<Point> pts;
  pts.reserve(nodes.size());
  for (const SenNode& n : nodes) pts.push_back(n.pos);
  std::sort(pts.begin(), pts.end(), pos_less);
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pos_eq(pts[i - 1], pts[i]))
      throw std::invalid_argument("duplicate node positions at (" +
                                  fmt_double(pts[i].x) + ", " +
                                  fmt_double(pts[i].y) + ")");
}

/// Candidate pairs (indices into `nodes`) of the Gabriel graph.
std::vector<std::pair<std::size_t, std::size_t>> gabriel_pairs(
    const std::vector<SenNode>& nodes) {
  if (nodes.size() < 2)
    throw std::invalid_argument("need at least 2 nodes to connect");
  check_distinct_positions(nodes);
  Buckets idx(nodes, heuristic_cell(nodes));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      Point mid{(nodes[i].pos.x + nodes[j].pos.x) / 2.0,
                (nodes[i].pos.y + nodes[j].pos.y) / 2.0};
      double r2 = dist2(nodes[i].pos, nodes[j].pos) / 4.0;
      bool blocked = idx.any_within(mid, std::sqrt(r2), [&](std::size_t w) {
        return w != i && w != j && dist2(nodes[w].pos, mid) < r2;
      });
      if (!blocked) out.emplace_back(i, j);
    }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> rng_filter(
    const std::vector<SenNode>& nodes,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Buckets idx(nodes, heuristic_cell(nodes));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (auto [i, j] : pairs) {
    double d2 = dist2(nodes[i].pos, nodes[j].pos);
    Point mid{(nodes[i].pos.x + nodes[j].pos.x) / 2.0,
              (nodes[i].pos.y + nodes[j].pos.y) / 2.0};
    bool blocked = idx.any_within(mid, std::sqrt(d2), [&](std::size_t w) {
      return w != i && w != j && dist2(nodes[w].pos, nodes[i].pos) < d2 &&
             dist2(nodes[w].pos, nodes[j].pos) < d2;
    });
    if (!blocked) out.push_back({i, j});
  }
  return out;
}

SenGraph build_graph(const std::vector<SenNode>& nodes,
                     std::vector<std::pair<std::size_t, std::size_t>> pairs,
                     const Raster& r, const FeatureConfig& feat) {
  SenGraph g;
  g.feat = feat;
  g.feature_scale = feature_scale_of(r);
  g.nodes = nodes;
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const SenNode& a, const SenNode& b) { return a.id < b.id; });
  for (auto& [i, j] : pairs) {
    if (nodes[i].id > nodes[j].id) std::swap(i, j);
  }
  std::sort(pairs.begin(), pairs.end(),
            [&](const auto& a, const auto& b) {
              if (nodes[a.first].id != nodes[b.first].id)
                return nodes[a.first].id < nodes[b.first].id;
              return nodes[a.second].id < nodes[b.second].id;
            });
  g.edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    SenEdge e;
    e.u = nodes[i].id;
    e.v = nodes[j].id;
    e.edge_feat =
        derive_edge_feat(r, nodes[i].pos, nodes[j].pos, feat, g.feature_scale);
    g.edges.push_back(std::move(e));
  }
  return g;
}

double patch_stddev(const std::vector<double>& patch) {
  double mean = std::accumulate(patch.begin(), patch.end(), 0.0) /
                static_cast<double>(patch.size());
  double acc = 0.0;
  for (double v : patch) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(patch.size()));
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

std::size_t SenGraph::node_index(std::int64_t id) const {
  auto it = std::lower_bound(
      nodes.begin(), nodes.end(), id,
      [](const SenNode& n, std::int64_t key) { return n.id < key; });
  if (it == nodes.end() || it->id != id)
    throw std::invalid_argument("unknown node id " + std::to_string(id));
  return static_cast<std::size_t>(it - nodes.begin());
}

bool SenGraph::has_edge(std::int64_t u, std::int64_t v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{u, v},
                             [](const SenEdge& e, const std::pair<
                                    std::int64_t, std::int64_t>& key) {
                               return std::pair{e.u, e.v} < key;
                             });
  return it != edges.end() && it->u == u && it->v == v;
}

std::vector<std::vector<std::size_t>> SenGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const SenEdge& e : edges) {
    std::size_t iu = node_index(e.u), iv = node_index(e.v);
    adj[iu].push_back(iv);
    adj[iv].push_back(iu);
  }
  return adj;
}

double feature_scale_of(const Raster& r) {
  double hi = r.value_max();
  return hi > 0.0 ? hi : 1.0;
}

double derive_point_feat(const Raster& r, Point pos, double scale) {
  double v = sample_point(r, pos.x, pos.y);
  if (std::isnan(v))
    throw std::runtime_error("NODATA at node position (" + fmt_double(pos.x) +
                             ", " + fmt_double(pos.y) + ")");
  return v / scale;
}

std::vector<double> derive_region_feat(const Raster& r, Point pos,
                                       const FeatureConfig& feat,
                                       double scale) {
  double spacing = feat.grid_spacing > 0.0 ? feat.grid_spacing : r.cellsize;
  double h = 0.5 * (feat.grid_n - 1);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(feat.grid_n) * feat.grid_n);
  for (int i = 0; i < feat.grid_n; ++i) {
    double y = pos.y + (h - i) * spacing;
    y = std::clamp(y, r.yll, r.y_max());  // edge-extend beyond the footprint
    for (int j = 0; j < feat.grid_n; ++j) {
      double x = pos.x + (j - h) * spacing;
      x = std::clamp(x, r.xll, r.x_max());
      double v = sample_point(r, x, y);
      if (std::isnan(v))
        throw std::runtime_error("NODATA inside region patch at node (" +
                                 fmt_double(pos.x) + ", " + fmt_double(pos.y) +
                                 ")");
      out.push_back(v / scale);
    }
  }
  return out;
}

std::vector<double> derive_edge_feat(const Raster& r, Point a, Point b,
                                     const FeatureConfig& feat, double scale) {
  if (pos_less(b, a)) std::swap(a, b);  // direction-free canonical orientation
  std::vector<double> vals = sample_polyline(r, {a, b}, feat.edge_samples);
  for (double& v : vals) {
    if (std::isnan(v))
      throw std::runtime_error("NODATA along edge (" + fmt_double(a.x) + ", " +
                               fmt_double(a.y) + ")-(" + fmt_double(b.x) +
                               ", " + fmt_double(b.y) + ")");
    v /= scale;
  }
  return vals;
}

std::vector<SenNode> generate_nodes(const Raster& r, int n, double min_spacing,
                                    std::uint64_t seed,
                                    const FeatureConfig& feat) {
  if (n < 2) throw std::invalid_argument("generate_nodes: n must be >= 2");
  if (!(min_spacing > 0.0))
    throw std::invalid_argument("generate_nodes: min_spacing must be positive");
  double area = (r.x_max() - r.xll) * (r.y_max() - r.yll);
  if (static_cast<double>(n) * min_spacing * min_spacing >= area)
    throw std::invalid_argument(
        "generate_nodes: packing infeasible: n*spacing^2 exceeds raster area");

  Rng rng(seed);
  std::vector<Point> placed;
  // Occupancy grid with cell == min_spacing: conflicts are confined to the
  // 3x3 block around a candidate.
  int nx = std::max(1, static_cast<int>((r.x_max() - r.xll) / min_spacing) + 1);
  int ny = std::max(1, static_cast<int>((r.y_max() - r.yll) / min_spacing) + 1);
  std::vector<std::vector<std::size_t>> grid(
      static_cast<std::size_t>(nx) * ny);
  auto cell_x = [&](double x) {
    return std::clamp(static_cast<int>((x - r.xll) / min_spacing), 0, nx - 1);
  };
  auto cell_y = [&](double y) {
    return std::clamp(static_cast<int>((y - r.yll) / min_spacing), 0, ny - 1);
  };

  long attempts_left = 1000L * n;
  double ms2 = min_spacing * min_spacing;
  while (static_cast<int>(placed.size()) < n && attempts_left-- > 0) {
    Point p{rng.uniform(r.xll, r.x_max()), rng.uniform(r.yll, r.y_max())};
    if (std::isnan(sample_point(r, p.x, p.y))) continue;  // NODATA site
    int cx = cell_x(p.x), cy = cell_y(p.y);
    bool conflict = false;
    for (int dy = -1; dy <= 1 && !conflict; ++dy)
      for (int dx = -1; dx <= 1 && !conflict; ++dx) {
        int gx = cx + dx, gy = cy + dy;
        if (gx < 0 || gx >= nx || gy < 0 || gy >= ny) continue;
        for (std::size_t k : grid[static_cast<std::size_t>(gy) * nx + gx])
          if (dist2(placed[k], p) < ms2) {
            conflict = true;
            break;
          }
      }
    if (conflict) continue;
    grid[static_cast<std::size_t>(cy) * nx + cx].push_back(placed.size());
    placed.push_back(p);
  }
  if (static_cast<int>(placed.size()) < n)
    throw std::runtime_error(
        "generate_nodes: packing failed after retry budget; lower n or "
        "min_spacing");

  double scale = feature_scale_of(r);
  std::vector<SenNode> nodes;
  nodes.reserve(placed.size());
  for (std::size_t i = 0; i < placed.size(); ++i) {
    SenNode node;
    node.id = static_cast<std::int64_t>(i);
    node.pos = placed[i];
    node.point_feat = derive_point_feat(r, node.pos, scale);
    node.region_feat = derive_region_feat(r, node.pos, feat, scale);
    nodes.push_back(std::move(node));
  }
  return nodes;
}

SenGraph connect_gabriel(const std::vector<SenNode>& nodes, const Raster& r,
                         const FeatureConfig& feat) {
  return build_graph(nodes, gabriel_pairs(nodes), r, feat);
}

SenGraph connect_rng(const std::vector<SenNode>& nodes, const Raster& r,
                     const FeatureConfig& feat) {
  return build_graph(nodes, rng_filter(nodes, gabriel_pairs(nodes)), r, feat);
}

SenGraph connect_terrain_conditioned(const std::vector<SenNode>& nodes,
                                     const Raster& r, TerrainMode mode,
                                     const TerrainConnectParams& params,
                                     std::uint64_t seed,
                                     const FeatureConfig& feat) {
  auto pairs = gabriel_pairs(nodes);
  if (pairs.empty())
    throw std::runtime_error("terrain-conditioned generator: no candidates");
  if (params.climb_samples < 2)
    throw std::invalid_argument("climb_samples must be >= 2");

  // Canonical candidate order (by node ids) so the survival draws are
  // reproducible no matter how the pair list was produced.
  for (auto& [i, j] : pairs)
    if (nodes[i].id > nodes[j].id) std::swap(i, j);
  std::sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    if (nodes[a.first].id != nodes[b.first].id)
      return nodes[a.first].id < nodes[b.first].id;
    return nodes[a.second].id < nodes[b.second].id;
  });

  double total_len = 0.0;
  for (auto [i, j] : pairs) total_len += dist(nodes[i].pos, nodes[j].pos);
  double mean_len = total_len / static_cast<double>(pairs.size());
  double range = r.value_max() - r.value_min();
  double beta = params.beta.value_or(range > 0.0 ? 8.0 / range : 0.0);
  double gamma =
      params.gamma.value_or(mean_len > 0.0 ? 1.0 / (2.0 * mean_len) : 0.0);
  double scale = feature_scale_of(r);

  auto climb_of = [&](Point a, Point b) {
    if (pos_less(b, a)) std::swap(a, b);
    std::vector<Point> where =
        polyline_sample_points({a, b}, params.climb_samples);
    double climb = 0.0;
    double prev = sample_point(r, where[0].x, where[0].y);
    for (std::size_t k = 1; k < where.size(); ++k) {
      double cur = sample_point(r, where[k].x, where[k].y);
      climb += std::fabs(cur - prev);
      prev = cur;
    }
    return climb;
  };
  auto roughness_of = [&](const SenNode& n) {
    // Patches are stored divided by the raster max; undo that so the
    // survival term is in raw value units like climb.
    return patch_stddev(n.region_feat) * scale;
  };

  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> kept, dropped;
  for (auto [i, j] : pairs) {
    double d = dist(nodes[i].pos, nodes[j].pos);
    double s = 1.0;
    if (mode == TerrainMode::edge_driven || mode == TerrainMode::both)
      s *= sigmoid(params.alpha - beta * climb_of(nodes[i].pos, nodes[j].pos) -
                   gamma * d);
    if (mode == TerrainMode::node_driven || mode == TerrainMode::both)
      s *= sigmoid(params.alpha -
                   beta * std::fabs(roughness_of(nodes[i]) -
                                    roughness_of(nodes[j])) -
                   gamma * d);
    if (rng.uniform() < s)
      kept.push_back({i, j});
    else
      dropped.push_back({i, j});
  }

  // Re-add dropped candidates shortest-first until connected.
  UnionFind uf(nodes.size());
  for (auto [i, j] : kept) uf.unite(i, j);
  std::sort(dropped.begin(), dropped.end(), [&](const auto& a, const auto& b) {
    double la = dist(nodes[a.first].pos, nodes[a.second].pos);
    double lb = dist(nodes[b.first].pos, nodes[b.second].pos);
    if (la != lb) return la < lb;
    if (nodes[a.first].id != nodes[b.first].id)
      return nodes[a.first].id < nodes[b.first].id;
    return nodes[a.second].id < nodes[b.second].id;
  });
  for (auto [i, j] : dropped)
    if (uf.find(i) != uf.find(j)) {
      uf.unite(i, j);
      kept.push_back({i, j});
    }

  return build_graph(nodes, std::move(kept), r, feat);
}

DegreeStats degree_stats(const SenGraph& g) {
  if (g.nodes.empty()) throw std::invalid_argument("degree_stats: empty graph");
  std::vector<int> deg(g.nodes.size(), 0);
  for (const SenEdge& e : g.edges) {
    ++deg[g.node_index(e.u)];
    ++deg[g.node_index(e.v)];
  }
  DegreeStats s;
  s.min = deg[0];
  s.max = deg[0];
  long total = 0;
  for (int d : deg) {
    ++s.histogram[d];
    s.min = std::min(s.min, d);
    s.max = std::max(s.max, d);
    total += d;
  }
  s.mean = static_cast<double>(total) / static_cast<double>(deg.size());
  return s;
}

LengthStats edge_length_stats(const SenGraph& g) {
  LengthStats s;
  if (g.edges.empty()) return s;
  std::vector<double> len;
  len.reserve(g.edges.size());
  for (const SenEdge& e : g.edges)
    len.push_back(dist(g.node(e.u).pos, g.node(e.v).pos));
  std::sort(len.begin(), len.end());
  s.min = len.front();
  s.max = len.back();
  s.mean = std::accumulate(len.begin(), len.end(), 0.0) /
           static_cast<double>(len.size());
  auto quantile = [&](double p) {
    double idx = p * static_cast<double>(len.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, len.size() - 1);
    return std::lerp(len[lo], len[hi], idx - static_cast<double>(lo));
  };
  s.q25 = quantile(0.25);
  s.median = quantile(0.5);
  s.q75 = quantile(0.75);
  return s;
}

bool is_connected(const SenGraph& g) {
  if (g.nodes.size() <= 1) return true;
  auto adj = g.adjacency();
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    std::size_t cur = stack.back();
    stack.pop_back();
    for (std::size_t nb : adj[cur])
      if (!seen[nb]) {
        seen[nb] = 1;
        ++visited;
        stack.push_back(nb);
      }
  }
  return visited == g.nodes.size();
}

SenGraph parse_edgelist(std::string_view text, const std::string& origin,
                        const Raster& r, const FeatureConfig& feat) {
  SenGraph g;
  g.feat = feat;
  g.feature_scale = feature_scale_of(r);
  g.raster_ref = origin;

  enum class Section { none, nodes, edges };
  Section section = Section::none;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;

  std::size_t line_no = 0;
  std::size_t start = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " +
                             msg);
  };
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    bool last = end == text.size();
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::vector<std::string_view> tk;
    {
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() &&
               (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
          ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
               line[j] != '\r')
          ++j;
        if (j > i) tk.push_back(line.substr(i, j - i));
        i = j;
      }
    }
    if (tk.empty()) {
      if (last) break;
      continue;
    }
    if (tk.size() == 1 && tk[0] == "NODES") {
      section = Section::nodes;
    } else if (tk.size() == 1 && tk[0] == "EDGES") {
      if (section != Section::nodes) fail("EDGES before NODES");
      section = Section::edges;
    } else if (section == Section::nodes) {
      if (tk.size() != 3) fail("expected 'id x y'");
      SenNode n;
      try {
        n.id = parse_int(tk[0]);
        n.pos.x = parse_double(tk[1]);
        n.pos.y = parse_double(tk[2]);
      } catch (const std::runtime_error& e) {
        fail(e.what());
      }
      if (!r.contains(n.pos.x, n.pos.y))
        fail("node " + std::to_string(n.id) +
             " outside raster bounds: (" + fmt_double(n.pos.x) + ", " +
             fmt_double(n.pos.y) + ")");
      g.nodes.push_back(std::move(n));
    } else if (section == Section::edges) {
      if (tk.size() != 2) fail("expected 'u v'");
      std::int64_t u = 0, v = 0;
      try {
        u = parse_int(tk[0]);
        v = parse_int(tk[1]);
      } catch (const std::runtime_error& e) {
        fail(e.what());
      }
      if (u == v) fail("self-loop on node " + std::to_string(u));
      if (u > v) std::swap(u, v);
      pairs.push_back({u, v});
    } else {
      fail("content before NODES section");
    }
    if (last) break;
  }
  if (g.nodes.empty()) throw std::runtime_error(origin + ": no NODES section");

  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const SenNode& a, const SenNode& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (g.nodes[i - 1].id == g.nodes[i].id)
      throw std::runtime_error(origin + ": duplicate node id " +
                               std::to_string(g.nodes[i].id));

  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i - 1] == pairs[i])
      throw std::runtime_error(origin + ": duplicate edge " +
                               std::to_string(pairs[i].first) + " " +
                               std::to_string(pairs[i].second));

  for (SenNode& n : g.nodes) {
    n.point_feat = derive_point_feat(r, n.pos, g.feature_scale);
    n.region_feat = derive_region_feat(r, n.pos, feat, g.feature_scale);
  }
  g.edges.reserve(pairs.size());
  for (auto [u, v] : pairs) {
    SenEdge e;
    e.u = u;
    e.v = v;
    auto index_or_fail = [&](std::int64_t id) {
      try {
        return g.node_index(id);
      } catch (const std::invalid_argument&) {
        throw std::runtime_error(origin +
                                 ": edge references unknown node id " +
                                 std::to_string(id));
      }
    };
    std::size_t iu = index_or_fail(u);
    std::size_t iv = index_or_fail(v);
    e.edge_feat = derive_edge_feat(r, g.nodes[iu].pos, g.nodes[iv].pos, feat,
                                   g.feature_scale);
    g.edges.push_back(std::move(e));
  }
  return g;
}

SenGraph read_edgelist(const std::filesystem::path& path, const Raster& r,
                       const FeatureConfig& feat) {
  return parse_edgelist(read_text_file(path), path.string(), r, feat);
}

std::string serialize_edgelist(const SenGraph& g) {
  std::string out = "NODES\n";
  for (const SenNode& n : g.nodes)
    out += std::to_string(n.id) + " " + fmt_double(n.pos.x) + " " +
           fmt_double(n.pos.y) + "\n";
  out += "EDGES\n";
  for (const SenEdge& e : g.edges)
    out += std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
  return out;
}

void write_edgelist(const SenGraph& g, const std::filesystem::path& path) {
  atomic_write(path, serialize_edgelist(g));
}

}  // namespace sengraph
