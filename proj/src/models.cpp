#include "sengraph/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sengraph/errors.hpp"
#include "sengraph/fsio.hpp"
#include "sengraph/rng.hpp"

namespace sengraph {

namespace {

using nlohmann::json;

/// Side length after running the conv stack over a grid_n x grid_n patch.
int conv_output_side(const ModelConfig& cfg, int grid_n) {
  int h = grid_n;
  for (int s = 0; s < cfg.conv_stages; ++s) {
    if (h < cfg.conv_kernel)
      throw std::invalid_argument(
          "region grid of side " + std::to_string(grid_n) +
          " is too small for " + std::to_string(cfg.conv_stages) +
          " conv stage(s) with kernel " + std::to_string(cfg.conv_kernel));
    h = (h - cfg.conv_kernel) / cfg.conv_stride + 1;
  }
  return h;
}

Tensor xavier(int rows, int cols, std::uint64_t seed) {
  double bound = std::sqrt(6.0 / (rows + cols));
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(rows) * cols);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return make_tensor(rows, cols, std::move(v), true);
}

Tensor const_row(std::vector<double> v) {
  int n = static_cast<int>(v.size());
  return make_tensor(1, n, std::move(v), false);
}

std::string layer_prefix(int i) { return "layer" + std::to_string(i) + "."; }

}  // namespace

bool uses_region(const ModelConfig& cfg) {
  return cfg.variant == "gmu" || cfg.variant == "rsgcn";
}

bool uses_point(const ModelConfig& cfg) {
  return cfg.variant == "gmu" || cfg.variant == "rsgcn";
}

bool uses_edge(const ModelConfig& cfg) {
  return cfg.variant == "esgcn" || (cfg.variant == "gmu" && cfg.fuse_edge);
}

void validate_model_config(const ModelConfig& cfg, const FeatureConfig& feat) {
  if (cfg.variant != "gmu" && cfg.variant != "rsgcn" &&
      cfg.variant != "esgcn" && cfg.variant != "graphsage")
    throw std::invalid_argument("unknown model variant '" + cfg.variant + "'");
  if (cfg.layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (cfg.d < 1) throw std::invalid_argument("d must be >= 1");
  if (cfg.head_hidden < 1)
    throw std::invalid_argument("head_hidden must be >= 1");
  if (!(cfg.leaky_slope >= 0.0 && cfg.leaky_slope < 1.0))
    throw std::invalid_argument("leaky_slope must lie in [0, 1)");
  if (uses_region(cfg)) {
    if (cfg.conv_kernel < 1 || cfg.conv_stride < 1 || cfg.conv_stages < 1)
      throw std::invalid_argument("conv kernel, stride and stages must be >= 1");
    conv_output_side(cfg, feat.grid_n);
  }
  if (uses_edge(cfg) && feat.edge_samples < 1)
    throw std::invalid_argument("edge_samples must be >= 1");
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < gmu_layers.size(); ++i) {
    const GmuLayerParams& lp = gmu_layers[i];
    std::string pre = layer_prefix(static_cast<int>(i));
    out.push_back({pre + "w_pos", lp.w_pos});
    if (lp.w_point) out.push_back({pre + "w_point", lp.w_point});
    for (std::size_t k = 0; k < lp.conv.size(); ++k)
      out.push_back({pre + "conv" + std::to_string(k), lp.conv[k].kernel});
    if (lp.region_fc) out.push_back({pre + "region_fc", lp.region_fc});
    if (lp.w_edge) out.push_back({pre + "w_edge", lp.w_edge});
  }
  for (std::size_t i = 0; i < sage_layers.size(); ++i) {
    std::string pre = layer_prefix(static_cast<int>(i));
    out.push_back({pre + "w_self", sage_layers[i].w_self});
    out.push_back({pre + "w_nb", sage_layers[i].w_nb});
  }
  out.push_back({"head.w1", head.w1});
  out.push_back({"head.b1", head.b1});
  out.push_back({"head.w2", head.w2});
  out.push_back({"head.b2", head.b2});
  return out;
}

void ModelParams::zero_grad() const {
  for (auto& [name, t] : named()) t->zero_grad();
}

ModelParams init_model(const ModelConfig& cfg, const FeatureConfig& feat,
                       std::uint64_t seed) {
  validate_model_config(cfg, feat);
  ModelParams p;
  p.config = cfg;
  p.feat = feat;
  auto draw = [&](const std::string& name, int rows, int cols) {
    return xavier(rows, cols, child_seed(seed, name));
  };
  if (cfg.variant == "graphsage") {
    for (int i = 0; i < cfg.layers; ++i) {
      int in = i == 0 ? 2 : cfg.d;
      std::string pre = layer_prefix(i);
      SageLayerParams lp;
      lp.w_self = draw(pre + "w_self", in, cfg.d);
      lp.w_nb = draw(pre + "w_nb", in, cfg.d);
      p.sage_layers.push_back(std::move(lp));
    }
  } else {
    int flat = conv_output_side(cfg, feat.grid_n);
    flat *= flat;
    for (int i = 0; i < cfg.layers; ++i) {
      std::string pre = layer_prefix(i);
      GmuLayerParams lp;
      lp.w_pos = draw(pre + "w_pos", 2, cfg.d);
      if (uses_point(cfg)) lp.w_point = draw(pre + "w_point", 1, cfg.d);
      if (uses_region(cfg)) {
        for (int k = 0; k < cfg.conv_stages; ++k)
          lp.conv.push_back({draw(pre + "conv" + std::to_string(k),
                                  cfg.conv_kernel, cfg.conv_kernel),
                             cfg.conv_stride});
        lp.region_fc = draw(pre + "region_fc", flat, cfg.d);
      }
      if (uses_edge(cfg))
        lp.w_edge = draw(pre + "w_edge", feat.edge_samples, cfg.d);
      p.gmu_layers.push_back(std::move(lp));
    }
  }
  p.head.w1 = draw("head.w1", 2 * cfg.d, cfg.head_hidden);
  p.head.b1 = zeros(1, cfg.head_hidden, true);
  p.head.w2 = draw("head.w2", cfg.head_hidden, 1);
  p.head.b2 = zeros(1, 1, true);
  return p;
}

Tensor embed_position(Point p_u, Point p_v, const Tensor& w_pos,
                      double slope) {
  Tensor diff = const_row({p_u.x - p_v.x, p_u.y - p_v.y});
  return leaky_relu(matmul(diff, w_pos), slope);
}

Tensor embed_edge(const Tensor& e_uv, const Tensor& w_edge, double slope) {
  return leaky_relu(matmul(e_uv, w_edge), slope);
}

Tensor embed_region(const Tensor& r_u, const Tensor& r_v,
                    const GmuLayerParams& lp, double slope) {
  Tensor x = sub(r_v, r_u);
  for (std::size_t k = 0; k < lp.conv.size(); ++k) {
    x = conv2d(x, lp.conv[k].kernel, lp.conv[k].stride);
    if (k + 1 < lp.conv.size()) x = leaky_relu(x, slope);
  }
  x = matmul(flatten_row(x), lp.region_fc);
  return leaky_relu(x, slope);
}

Tensor embed_point(double point_feat, const Tensor& w_point, double slope) {
  return leaky_relu(matmul(scalar_tensor(point_feat), w_point), slope);
}

Tensor fuse(const Tensor& pos, const Tensor& point, const Tensor& region,
            const Tensor& edge, const ModelConfig& cfg) {
  auto need = [&](const Tensor& t, const char* which) {
    if (!t)
      throw std::invalid_argument(std::string("fuse: variant '") +
                                  cfg.variant + "' needs the " + which +
                                  " embedding");
    return t;
  };
  if (cfg.variant == "esgcn") return mul(need(pos, "position"), need(edge, "edge"));
  Tensor m = mul(need(pos, "position"), need(point, "point"));
  m = mul(m, need(region, "region"));
  if (cfg.variant == "gmu" && cfg.fuse_edge) m = mul(m, need(edge, "edge"));
  return m;
}

namespace {

/// Incoming senders per node, ordered by sender position (ties by id) so the
/// message sum is independent of node labeling.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incoming(
    const SampleGraph& s) {
  std::size_t n = s.nodes.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> nbrs(n);
  for (std::size_t ci = 0; ci < s.candidates.size(); ++ci) {
    const CandidateEdge& c = s.candidates[ci];
    if (c.label != 1) continue;
    std::size_t iu = s.node_index(c.u);
    std::size_t iv = s.node_index(c.v);
    nbrs[iu].push_back({iv, ci});
    nbrs[iv].push_back({iu, ci});
  }
  for (auto& list : nbrs)
    std::sort(list.begin(), list.end(),
              [&](const auto& a, const auto& b) {
                const SenNode& na = s.nodes[a.first];
                const SenNode& nb = s.nodes[b.first];
                if (pos_less(na.pos, nb.pos)) return true;
                if (pos_less(nb.pos, na.pos)) return false;
                return na.id < nb.id;
              });
  return nbrs;
}

}  // namespace

std::vector<Tensor> node_representations(const SampleGraph& s,
                                         const ModelParams& p) {
  const ModelConfig& cfg = p.config;
  std::size_t n = s.nodes.size();
  if (n == 0) throw std::invalid_argument("sample has no nodes");
  double slope = cfg.leaky_slope;
  auto nbrs = incoming(s);

  if (cfg.variant == "graphsage") {
    if (!(s.window > 0.0))
      throw std::invalid_argument(
          "graphsage needs the sample window to normalize positions");
    double half = s.window / 2.0;
    std::vector<Tensor> h(n);
    for (std::size_t i = 0; i < n; ++i)
      h[i] = const_row({s.nodes[i].pos.x / half, s.nodes[i].pos.y / half});
    for (const SageLayerParams& lp : p.sage_layers) {
      std::vector<Tensor> next(n);
      for (std::size_t u = 0; u < n; ++u) {
        Tensor out = matmul(h[u], lp.w_self);
        if (!nbrs[u].empty()) {
          std::vector<Tensor> terms;
          for (const auto& vc : nbrs[u]) terms.push_back(h[vc.first]);
          Tensor mean = scale(add_n(terms), 1.0 / terms.size());
          out = add(out, matmul(mean, lp.w_nb));
        }
        next[u] = leaky_relu(out, slope);
      }
      h = std::move(next);
    }
    return h;
  }

  // Multimodal family: constants shared by every layer.
  std::vector<Tensor> edge_const(s.candidates.size());
  if (uses_edge(cfg)) {
    int want = p.feat.edge_samples;
    for (std::size_t ci = 0; ci < s.candidates.size(); ++ci) {
      const CandidateEdge& c = s.candidates[ci];
      if (c.label != 1) continue;
      if (static_cast<int>(c.edge_feat.size()) != want)
        throw std::invalid_argument(
            "candidate " + std::to_string(c.u) + "-" + std::to_string(c.v) +
            " has " + std::to_string(c.edge_feat.size()) +
            " chord samples, model expects " + std::to_string(want));
      edge_const[ci] = const_row(c.edge_feat);
    }
  }
  std::vector<Tensor> region_in(n);
  if (uses_region(cfg)) {
    int g = p.feat.grid_n;
    for (std::size_t i = 0; i < n; ++i) {
      const SenNode& node = s.nodes[i];
      if (static_cast<int>(node.region_feat.size()) != g * g)
        throw std::invalid_argument(
            "node " + std::to_string(node.id) + " has a region grid of " +
            std::to_string(node.region_feat.size()) + " cells, model expects " +
            std::to_string(g * g));
      std::vector<double> vals = node.region_feat;
      if (p.feat.region_normalized)
        for (double& v : vals) v -= node.point_feat;
      region_in[i] = make_tensor(g, g, std::move(vals), false);
    }
  }

  std::vector<Tensor> state(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (uses_point(cfg))
      state[i] =
          matmul(scalar_tensor(s.nodes[i].point_feat), p.gmu_layers[0].w_point);
    else
      state[i] = zeros(1, cfg.d);
  }

  for (const GmuLayerParams& lp : p.gmu_layers) {
    std::vector<Tensor> next(n);
    for (std::size_t u = 0; u < n; ++u) {
      std::vector<Tensor> terms{state[u]};
      for (auto [v, ci] : nbrs[u]) {
        Tensor pt = embed_position(s.nodes[u].pos, s.nodes[v].pos, lp.w_pos,
                                   slope);
        Tensor xt, rt, et;
        if (uses_point(cfg))
          xt = embed_point(s.nodes[v].point_feat, lp.w_point, slope);
        if (uses_region(cfg))
          rt = embed_region(region_in[u], region_in[v], lp, slope);
        if (uses_edge(cfg)) et = embed_edge(edge_const[ci], lp.w_edge, slope);
        terms.push_back(fuse(pt, xt, rt, et, cfg));
      }
      next[u] = leaky_relu(add_n(terms), slope);
    }
    state = std::move(next);
  }
  return state;
}

std::vector<Tensor> predict_edges(const SampleGraph& s, const ModelParams& p) {
  std::vector<Tensor> repr = node_representations(s, p);
  const HeadParams& h = p.head;
  double slope = p.config.leaky_slope;
  auto score = [&](const Tensor& a, const Tensor& b) {
    Tensor t = add(matmul(concat_cols(a, b), h.w1), h.b1);
    t = leaky_relu(t, slope);
    t = add(matmul(t, h.w2), h.b2);
    return logistic(t);
  };
  std::vector<Tensor> out;
  out.reserve(s.candidates.size());
  for (const CandidateEdge& c : s.candidates) {
    const Tensor& ru = repr[s.node_index(c.u)];
    const Tensor& rv = repr[s.node_index(c.v)];
    out.push_back(scale(add(score(ru, rv), score(rv, ru)), 0.5));
  }
  return out;
}

std::vector<double> predict_values(const SampleGraph& s,
                                   const ModelParams& p) {
  if (Tape::active())
    throw std::logic_error("predict_values must run outside a tape");
  std::vector<Tensor> probs = predict_edges(s, p);
  std::vector<double> out;
  out.reserve(probs.size());
  for (const Tensor& t : probs) out.push_back(scalar_value(t));
  return out;
}

std::string serialize_checkpoint(const ModelParams& p) {
  const ModelConfig& c = p.config;
  const FeatureConfig& f = p.feat;
  json j;
  j["format"] = "sengraph-checkpoint";
  j["version"] = 1;
  j["model"] = {{"variant", c.variant},
                {"layers", c.layers},
                {"d", c.d},
                {"leaky_slope", c.leaky_slope},
                {"head_hidden", c.head_hidden},
                {"fuse_edge", c.fuse_edge},
                {"conv_kernel", c.conv_kernel},
                {"conv_stride", c.conv_stride},
                {"conv_stages", c.conv_stages}};
  j["features"] = {{"edge_samples", f.edge_samples},
                   {"grid_n", f.grid_n},
                   {"grid_spacing", f.grid_spacing},
                   {"region_normalized", f.region_normalized}};
  json tensors = json::object();
  for (auto& [name, t] : p.named())
    tensors[name] = {{"rows", t->rows}, {"cols", t->cols}, {"values", t->v}};
  j["tensors"] = std::move(tensors);
  return j.dump(1) + "\n";
}

ModelParams parse_checkpoint(const std::string& text,
                             const std::string& origin) {
  auto fail = [&](const std::string& msg) -> void {
    throw std::runtime_error(origin + ": " + msg);
  };
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) !=
                              "sengraph-checkpoint")
      fail("not a sengraph checkpoint");
    if (j.value("version", -1) != 1) fail("unsupported checkpoint version");
    const json& m = j.at("model");
    ModelConfig c;
    c.variant = m.at("variant").get<std::string>();
    c.layers = m.at("layers").get<int>();
    c.d = m.at("d").get<int>();
    c.leaky_slope = m.at("leaky_slope").get<double>();
    c.head_hidden = m.at("head_hidden").get<int>();
    c.fuse_edge = m.at("fuse_edge").get<bool>();
    c.conv_kernel = m.at("conv_kernel").get<int>();
    c.conv_stride = m.at("conv_stride").get<int>();
    c.conv_stages = m.at("conv_stages").get<int>();
    const json& ff = j.at("features");
    FeatureConfig f;
    f.edge_samples = ff.at("edge_samples").get<int>();
    f.grid_n = ff.at("grid_n").get<int>();
    f.grid_spacing = ff.at("grid_spacing").get<double>();
    f.region_normalized = ff.at("region_normalized").get<bool>();

    ModelParams p = init_model(c, f, 0);
    const json& ts = j.at("tensors");
    if (!ts.is_object()) fail("tensors must be an object");
    auto named = p.named();
    if (ts.size() != named.size())
      fail("checkpoint holds " + std::to_string(ts.size()) +
           " tensors, model needs " + std::to_string(named.size()));
    for (auto& [name, t] : named) {
      if (!ts.contains(name)) fail("missing tensor '" + name + "'");
      const json& e = ts.at(name);
      int rows = e.at("rows").get<int>();
      int cols = e.at("cols").get<int>();
      if (rows != t->rows || cols != t->cols)
        fail("tensor '" + name + "' is " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", expected " + std::to_string(t->rows) +
             "x" + std::to_string(t->cols));
      std::vector<double> vals = e.at("values").get<std::vector<double>>();
      if (vals.size() != t->v.size())
        fail("tensor '" + name + "' value count mismatch");
      for (double x : vals)
        if (!std::isfinite(x)) fail("tensor '" + name + "' has non-finite values");
      t->v = std::move(vals);
    }
    return p;
  } catch (const json::exception& e) {
    fail(e.what());
  }
  throw std::logic_error("unreachable");
}

void save_checkpoint(const ModelParams& p, const std::filesystem::path& path) {
  atomic_write(path, serialize_checkpoint(p));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path), path.string());
}

}  // namespace sengraph
