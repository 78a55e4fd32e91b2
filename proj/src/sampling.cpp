#include "sengraph/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "sengraph/errors.hpp"
#include "sengraph/fsio.hpp"

namespace sengraph {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() &&
           (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != '\r')
      ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::size_t SampleGraph::node_index(std::int64_t id) const {
  auto it = std::lower_bound(
      nodes.begin(), nodes.end(), id,
      [](const SenNode& n, std::int64_t key) { return n.id < key; });
  if (it == nodes.end() || it->id != id)
    throw std::invalid_argument("sample has no node " + std::to_string(id));
  return static_cast<std::size_t>(it - nodes.begin());
}

std::size_t SampleGraph::real_edge_count() const {
  std::size_t n = 0;
  for (const CandidateEdge& c : candidates) n += c.label == 1;
  return n;
}

WindowSubgraph extract_window(const SenGraph& g, const SenNode& center,
                              double window) {
  if (!(window > 0.0))
    throw std::invalid_argument("extract_window: window must be positive");
  double half = window / 2.0;
  WindowSubgraph out;
  for (const SenNode& n : g.nodes)
    if (std::fabs(n.pos.x - center.pos.x) <= half &&
        std::fabs(n.pos.y - center.pos.y) <= half)
      out.node_ids.push_back(n.id);
  std::sort(out.node_ids.begin(), out.node_ids.end());
  auto inside = [&](std::int64_t id) {
    return std::binary_search(out.node_ids.begin(), out.node_ids.end(), id);
  };
  for (const SenEdge& e : g.edges)
    if (inside(e.u) && inside(e.v)) out.edges.push_back({e.u, e.v});
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

WindowSubgraph simplify(const WindowSubgraph& sub,
                        const std::set<std::int64_t>& keep) {
  std::map<std::int64_t, std::set<std::int64_t>> adj;
  for (std::int64_t id : sub.node_ids) adj[id];
  for (auto [u, v] : sub.edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = adj.begin(); it != adj.end();) {
      std::int64_t id = it->first;
      if (keep.count(id) != 0 || it->second.size() != 2) {
        ++it;
        continue;
      }
      auto nit = it->second.begin();
      std::int64_t a = *nit;
      std::int64_t b = *std::next(nit);
      // Merging must not create a self-loop or duplicate an existing edge.
      if (a == b || adj[a].count(b) != 0) {
        ++it;
        continue;
      }
      adj[a].erase(id);
      adj[b].erase(id);
      adj[a].insert(b);
      adj[b].insert(a);
      it = adj.erase(it);
      changed = true;
    }
  }
  WindowSubgraph out;
  out.node_ids.reserve(adj.size());
  for (const auto& [id, nbrs] : adj) {
    out.node_ids.push_back(id);
    for (std::int64_t nb : nbrs)
      if (id < nb) out.edges.push_back({id, nb});
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

bool to_sample(const WindowSubgraph& sub, const SenGraph& g, const Raster& r,
               const SamplingConfig& cfg, Point center,
               const std::string& graph_id, SampleGraph* out) {
  std::size_t n = sub.node_ids.size();
  if (n < 3 || sub.edges.size() < 2 ||
      n > static_cast<std::size_t>(cfg.max_sample_nodes))
    return false;

  SampleGraph s;
  s.graph_id = graph_id;
  s.center = center;
  s.window = cfg.window;
  s.nodes.reserve(n);
  for (std::int64_t id : sub.node_ids) {
    const SenNode& src = g.node(id);
    SenNode rel = src;
    rel.pos = {src.pos.x - center.x, src.pos.y - center.y};
    s.nodes.push_back(std::move(rel));
  }

  auto is_real = [&](std::int64_t u, std::int64_t v) {
    return std::binary_search(sub.edges.begin(), sub.edges.end(),
                              std::pair{u, v});
  };
  s.candidates.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      CandidateEdge c;
      c.u = sub.node_ids[i];
      c.v = sub.node_ids[j];
      c.label = is_real(c.u, c.v) ? 1 : 0;
      c.edge_feat = derive_edge_feat(r, g.node(c.u).pos, g.node(c.v).pos,
                                     g.feat, g.feature_scale);
      s.candidates.push_back(std::move(c));
    }
  *out = std::move(s);
  return true;
}

SampleSet sample_all(const SenGraph& g, const Raster& r,
                     const SamplingConfig& cfg, const std::string& graph_id) {
  SampleSet set;
  auto adj = g.adjacency();
  std::set<std::pair<std::int64_t, std::int64_t>> covered;
  for (std::size_t ci = 0; ci < g.nodes.size(); ++ci) {
    const SenNode& center = g.nodes[ci];
    WindowSubgraph win = extract_window(g, center, cfg.window);
    // The centre and its neighbors survive simplification so that every edge
    // incident to the centre stays a labelled candidate of this sample.
    std::set<std::int64_t> keep{center.id};
    for (std::size_t nb : adj[ci]) keep.insert(g.nodes[nb].id);
    WindowSubgraph simp = simplify(win, keep);
    if (simp.node_ids.size() > static_cast<std::size_t>(cfg.max_sample_nodes)) {
      ++set.rejected_oversize;
      continue;
    }
    SampleGraph s;
    if (!to_sample(simp, g, r, cfg, center.pos, graph_id, &s)) {
      ++set.rejected_small;
      continue;
    }
    s.center_node = center.id;
    for (const CandidateEdge& c : s.candidates)
      if (c.label == 1) covered.insert({c.u, c.v});
    set.samples.push_back(std::move(s));
  }
  if (set.samples.empty())
    throw std::runtime_error(
        "sampling produced no usable subgraphs; increase the window size");

  double half = cfg.window / 2.0;
  for (const SenEdge& e : g.edges) {
    Point a = g.node(e.u).pos, b = g.node(e.v).pos;
    if (std::fabs(a.x - b.x) <= half && std::fabs(a.y - b.y) <= half &&
        covered.count({e.u, e.v}) == 0)
      throw std::runtime_error(
          "edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
          " fits a window but was sampled nowhere; increase the window size "
          "or max_sample_nodes");
  }
  return set;
}

std::string serialize_sample(const SampleGraph& s) {
  std::string out;
  out += "#! graph " + s.graph_id + "\n";
  out += "#! center " + std::to_string(s.center_node) + "\n";
  out += "#! cx " + fmt_double(s.center.x) + " cy " + fmt_double(s.center.y) +
         "\n";
  out += "#! window " + fmt_double(s.window) + "\n";
  out += "NODES\n";
  for (const SenNode& n : s.nodes)
    out += std::to_string(n.id) + " " + fmt_double(n.pos.x) + " " +
           fmt_double(n.pos.y) + "\n";
  out += "EDGES\n";
  for (const CandidateEdge& c : s.candidates)
    if (c.label == 1)
      out += std::to_string(c.u) + " " + std::to_string(c.v) + "\n";
  out += "CANDIDATES\n";
  for (const CandidateEdge& c : s.candidates)
    out += std::to_string(c.u) + " " + std::to_string(c.v) + " " +
           std::to_string(c.label) + "\n";
  return out;
}

SampleGraph parse_sample(std::string_view text, const std::string& origin,
                         const Raster& r, const FeatureConfig& feat) {
  SampleGraph s;
  bool have_center = false, have_cx = false, have_window = false;
  enum class Section { none, nodes, edges, candidates };
  Section section = Section::none;
  std::vector<std::pair<std::int64_t, std::int64_t>> edge_pairs;

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

    if (line.rfind("#!", 0) == 0) {
      auto tk = split_ws(line.substr(2));
      try {
        if (tk.size() == 2 && tk[0] == "graph") {
          s.graph_id = std::string(tk[1]);
        } else if (tk.size() == 2 && tk[0] == "center") {
          s.center_node = parse_int(tk[1]);
          have_center = true;
        } else if (tk.size() == 4 && tk[0] == "cx" && tk[2] == "cy") {
          s.center.x = parse_double(tk[1]);
          s.center.y = parse_double(tk[3]);
          have_cx = true;
        } else if (tk.size() == 2 && tk[0] == "window") {
          s.window = parse_double(tk[1]);
          have_window = true;
        } else {
          fail("unrecognized provenance line");
        }
      } catch (const std::runtime_error& e) {
        fail(e.what());
      }
      if (last) break;
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    auto tk = split_ws(line);
    if (tk.empty()) {
      if (last) break;
      continue;
    }
    if (tk.size() == 1 && tk[0] == "NODES") {
      section = Section::nodes;
    } else if (tk.size() == 1 && tk[0] == "EDGES") {
      if (section != Section::nodes) fail("EDGES before NODES");
      section = Section::edges;
    } else if (tk.size() == 1 && tk[0] == "CANDIDATES") {
      if (section != Section::edges) fail("CANDIDATES before EDGES");
      section = Section::candidates;
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
      s.nodes.push_back(std::move(n));
    } else if (section == Section::edges) {
      if (tk.size() != 2) fail("expected 'u v'");
      try {
        edge_pairs.push_back({parse_int(tk[0]), parse_int(tk[1])});
      } catch (const std::runtime_error& e) {
        fail(e.what());
      }
    } else if (section == Section::candidates) {
      if (tk.size() != 3) fail("expected 'u v label'");
      CandidateEdge c;
      try {
        c.u = parse_int(tk[0]);
        c.v = parse_int(tk[1]);
        std::int64_t lab = parse_int(tk[2]);
        if (lab != 0 && lab != 1) fail("label must be 0 or 1");
        c.label = static_cast<int>(lab);
      } catch (const std::runtime_error& e) {
        fail(e.what());
      }
      if (c.u == c.v) fail("candidate pairs a node with itself");
      if (c.u > c.v) std::swap(c.u, c.v);
      s.candidates.push_back(std::move(c));
    } else {
      fail("content before NODES section");
    }
    if (last) break;
  }

  if (!have_center || !have_cx || !have_window)
    throw std::runtime_error(origin + ": missing provenance (#!) lines");
  if (s.nodes.size() < 3)
    throw std::runtime_error(origin + ": sample needs at least 3 nodes");

  std::sort(s.nodes.begin(), s.nodes.end(),
            [](const SenNode& a, const SenNode& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < s.nodes.size(); ++i)
    if (s.nodes[i - 1].id == s.nodes[i].id)
      throw std::runtime_error(origin + ": duplicate node id " +
                               std::to_string(s.nodes[i].id));
  (void)s.node_index(s.center_node);  // must exist

  std::sort(s.candidates.begin(), s.candidates.end(),
            [](const CandidateEdge& a, const CandidateEdge& b) {
              return std::pair{a.u, a.v} < std::pair{b.u, b.v};
            });
  std::size_t n = s.nodes.size();
  if (s.candidates.size() != n * (n - 1) / 2)
    throw std::runtime_error(origin + ": expected " +
                             std::to_string(n * (n - 1) / 2) +
                             " candidates, got " +
                             std::to_string(s.candidates.size()));
  for (std::size_t i = 1; i < s.candidates.size(); ++i)
    if (s.candidates[i - 1].u == s.candidates[i].u &&
        s.candidates[i - 1].v == s.candidates[i].v)
      throw std::runtime_error(origin + ": duplicate candidate pair");

  for (auto& [u, v] : edge_pairs)
    if (u > v) std::swap(u, v);
  std::sort(edge_pairs.begin(), edge_pairs.end());
  std::vector<std::pair<std::int64_t, std::int64_t>> labeled;
  for (const CandidateEdge& c : s.candidates)
    if (c.label == 1) labeled.push_back({c.u, c.v});
  if (labeled != edge_pairs)
    throw std::runtime_error(
        origin + ": EDGES section disagrees with label-1 candidates");
  if (labeled.size() < 2)
    throw std::runtime_error(origin + ": sample needs at least 2 real edges");

  double scale = feature_scale_of(r);
  std::vector<Point> world(s.nodes.size());
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    world[i] = {s.center.x + s.nodes[i].pos.x, s.center.y + s.nodes[i].pos.y};
    if (!r.contains(world[i].x, world[i].y))
      throw std::runtime_error(origin + ": node " +
                               std::to_string(s.nodes[i].id) +
                               " outside raster bounds");
    s.nodes[i].point_feat = derive_point_feat(r, world[i], scale);
    s.nodes[i].region_feat = derive_region_feat(r, world[i], feat, scale);
  }
  for (CandidateEdge& c : s.candidates)
    c.edge_feat = derive_edge_feat(r, world[s.node_index(c.u)],
                                   world[s.node_index(c.v)], feat, scale);
  return s;
}

void write_sample(const SampleGraph& s, const std::filesystem::path& path) {
  atomic_write(path, serialize_sample(s));
}

SampleGraph read_sample(const std::filesystem::path& path, const Raster& r,
                        const FeatureConfig& feat) {
  return parse_sample(read_text_file(path), path.string(), r, feat);
}

std::vector<std::filesystem::path> write_sample_dir(
    const std::vector<SampleGraph>& samples,
    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  paths.reserve(samples.size());
  char name[32];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::snprintf(name, sizeof(name), "sample_%05zu.txt", i);
    std::filesystem::path p = dir / name;
    write_sample(samples[i], p);
    paths.push_back(std::move(p));
  }
  return paths;
}

std::vector<SampleGraph> read_sample_dir(const std::filesystem::path& dir,
                                         const Raster& r,
                                         const FeatureConfig& feat) {
  if (!std::filesystem::is_directory(dir))
    throw MissingArtifactError("missing sample directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("sample_", 0) == 0 &&
        name.size() > 4 && name.substr(name.size() - 4) == ".txt")
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<SampleGraph> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(read_sample(p, r, feat));
  return out;
}

}  // namespace sengraph
