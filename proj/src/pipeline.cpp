#include "sengraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <json.hpp>

#include "sengraph/errors.hpp"
#include "sengraph/fsio.hpp"
#include "sengraph/raster.hpp"
#include "sengraph/rng.hpp"

namespace sengraph {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || item.key() == a;
    if (!known)
      throw std::invalid_argument("unknown key '" + item.key() + "' in " +
                                  where);
  }
}

double as_num(const json& v, const std::string& what) {
  if (!v.is_number())
    throw std::invalid_argument(what + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& what) {
  if (!v.is_number_integer())
    throw std::invalid_argument(what + " must be an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& what) {
  if (!v.is_boolean())
    throw std::invalid_argument(what + " must be a boolean");
  return v.get<bool>();
}

std::string as_str(const json& v, const std::string& what) {
  if (!v.is_string())
    throw std::invalid_argument(what + " must be a string");
  return v.get<std::string>();
}

const json* object_section(const json& root, const char* name,
                           const std::string& origin) {
  if (!root.contains(name)) return nullptr;
  const json& s = root.at(name);
  if (!s.is_object())
    throw std::invalid_argument(origin + ": '" + std::string(name) +
                                "' must be an object");
  return &s;
}

void check_threshold_range(double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("threshold must lie strictly between 0 and 1");
}

TerrainMode terrain_mode_of(const std::string& mode) {
  if (mode == "edge_driven") return TerrainMode::edge_driven;
  if (mode == "node_driven") return TerrainMode::node_driven;
  if (mode == "both") return TerrainMode::both;
  throw std::invalid_argument("graph.mode '" + mode +
                              "' has no terrain-conditioned form");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  if (!root.is_object())
    throw std::invalid_argument(origin + ": config root must be an object");
  expect_keys(root, origin + " root",
              {"seed", "out_dir", "terrain", "graph", "ingest", "features",
               "sampling", "model", "training", "eval", "compare"});

  RunConfig cfg;
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
      throw std::invalid_argument("seed must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (root.contains("out_dir")) cfg.out_dir = as_str(root.at("out_dir"), "out_dir");

  if (const json* t = object_section(root, "terrain", origin)) {
    expect_keys(*t, "terrain", {"n", "roughness", "cellsize", "xll", "yll"});
    if (t->contains("n")) cfg.terrain.n = as_int(t->at("n"), "terrain.n");
    if (t->contains("roughness"))
      cfg.terrain.roughness = as_num(t->at("roughness"), "terrain.roughness");
    if (t->contains("cellsize"))
      cfg.terrain.cellsize = as_num(t->at("cellsize"), "terrain.cellsize");
    if (t->contains("xll")) cfg.terrain.xll = as_num(t->at("xll"), "terrain.xll");
    if (t->contains("yll")) cfg.terrain.yll = as_num(t->at("yll"), "terrain.yll");
    if (cfg.terrain.n < 3)
      throw std::invalid_argument("terrain.n must be at least 3");
    if (!(cfg.terrain.roughness > 0.0 && cfg.terrain.roughness <= 1.0))
      throw std::invalid_argument("terrain.roughness must lie in (0, 1]");
    if (!(cfg.terrain.cellsize > 0.0))
      throw std::invalid_argument("terrain.cellsize must be positive");
  }

  if (const json* g = object_section(root, "graph", origin)) {
    expect_keys(*g, "graph",
                {"mode", "nodes", "min_spacing", "alpha", "beta", "gamma",
                 "climb_samples"});
    if (g->contains("mode")) cfg.graph.mode = as_str(g->at("mode"), "graph.mode");
    static const std::set<std::string> kModes = {"gabriel", "rng", "edge_driven",
                                                 "node_driven", "both"};
    if (!kModes.count(cfg.graph.mode))
      throw std::invalid_argument("graph.mode '" + cfg.graph.mode +
                                  "' is not one of gabriel, rng, edge_driven, "
                                  "node_driven, both");
    if (g->contains("nodes")) cfg.graph.nodes = as_int(g->at("nodes"), "graph.nodes");
    if (cfg.graph.nodes < 3)
      throw std::invalid_argument("graph.nodes must be at least 3");
    if (g->contains("min_spacing"))
      cfg.graph.min_spacing = as_num(g->at("min_spacing"), "graph.min_spacing");
    if (!(cfg.graph.min_spacing > 0.0))
      throw std::invalid_argument("graph.min_spacing must be positive");
    if (g->contains("alpha"))
      cfg.graph.survival.alpha = as_num(g->at("alpha"), "graph.alpha");
    if (g->contains("beta"))
      cfg.graph.survival.beta = as_num(g->at("beta"), "graph.beta");
    if (g->contains("gamma"))
      cfg.graph.survival.gamma = as_num(g->at("gamma"), "graph.gamma");
    if (g->contains("climb_samples")) {
      cfg.graph.survival.climb_samples =
          as_int(g->at("climb_samples"), "graph.climb_samples");
      if (cfg.graph.survival.climb_samples < 2)
        throw std::invalid_argument("graph.climb_samples must be at least 2");
    }
  }

  if (const json* i = object_section(root, "ingest", origin)) {
    expect_keys(*i, "ingest", {"raster", "edges"});
    if (!i->contains("raster") || !i->contains("edges"))
      throw std::invalid_argument("ingest needs both 'raster' and 'edges'");
    IngestSpec spec;
    spec.raster = as_str(i->at("raster"), "ingest.raster");
    spec.edges = as_str(i->at("edges"), "ingest.edges");
    cfg.ingest = spec;
  }

  if (const json* f = object_section(root, "features", origin)) {
    expect_keys(*f, "features",
                {"edge_samples", "grid_n", "grid_spacing", "region_normalized"});
    if (f->contains("edge_samples"))
      cfg.features.edge_samples = as_int(f->at("edge_samples"), "features.edge_samples");
    if (f->contains("grid_n"))
      cfg.features.grid_n = as_int(f->at("grid_n"), "features.grid_n");
    if (f->contains("grid_spacing"))
      cfg.features.grid_spacing =
          as_num(f->at("grid_spacing"), "features.grid_spacing");
    if (f->contains("region_normalized"))
      cfg.features.region_normalized =
          as_bool(f->at("region_normalized"), "features.region_normalized");
    if (cfg.features.edge_samples < 2)
      throw std::invalid_argument("features.edge_samples must be at least 2");
    if (cfg.features.grid_n < 1)
      throw std::invalid_argument("features.grid_n must be at least 1");
    if (cfg.features.grid_spacing < 0.0)
      throw std::invalid_argument("features.grid_spacing must be >= 0");
  }

  if (const json* s = object_section(root, "sampling", origin)) {
    expect_keys(*s, "sampling", {"window", "max_sample_nodes"});
    if (s->contains("window"))
      cfg.sampling.window = as_num(s->at("window"), "sampling.window");
    if (s->contains("max_sample_nodes"))
      cfg.sampling.max_sample_nodes =
          as_int(s->at("max_sample_nodes"), "sampling.max_sample_nodes");
    if (cfg.sampling.max_sample_nodes < 3)
      throw std::invalid_argument("sampling.max_sample_nodes must be at least 3");
  }
  if (!(cfg.sampling.window > 0.0) && !root.contains("sampling"))
    cfg.sampling.window = 1200.0;
  if (!(cfg.sampling.window > 0.0))
    throw std::invalid_argument("sampling.window must be positive");

  if (const json* m = object_section(root, "model", origin)) {
    expect_keys(*m, "model",
                {"variant", "layers", "d", "leaky_slope", "head_hidden",
                 "fuse_edge", "conv_kernel", "conv_stride", "conv_stages"});
    if (m->contains("variant"))
      cfg.model.variant = as_str(m->at("variant"), "model.variant");
    if (m->contains("layers")) cfg.model.layers = as_int(m->at("layers"), "model.layers");
    if (m->contains("d")) cfg.model.d = as_int(m->at("d"), "model.d");
    if (m->contains("leaky_slope"))
      cfg.model.leaky_slope = as_num(m->at("leaky_slope"), "model.leaky_slope");
    if (m->contains("head_hidden"))
      cfg.model.head_hidden = as_int(m->at("head_hidden"), "model.head_hidden");
    if (m->contains("fuse_edge"))
      cfg.model.fuse_edge = as_bool(m->at("fuse_edge"), "model.fuse_edge");
    if (m->contains("conv_kernel"))
      cfg.model.conv_kernel = as_int(m->at("conv_kernel"), "model.conv_kernel");
    if (m->contains("conv_stride"))
      cfg.model.conv_stride = as_int(m->at("conv_stride"), "model.conv_stride");
    if (m->contains("conv_stages"))
      cfg.model.conv_stages = as_int(m->at("conv_stages"), "model.conv_stages");
  }
  validate_model_config(cfg.model, cfg.features);

  if (const json* t = object_section(root, "training", origin)) {
    expect_keys(*t, "training",
                {"epochs", "learning_rate", "optimizer", "adam_beta1",
                 "adam_beta2", "adam_eps", "pos_weight", "shuffle",
                 "early_stop_patience", "val_fraction"});
    if (t->contains("epochs"))
      cfg.training.epochs = as_int(t->at("epochs"), "training.epochs");
    if (cfg.training.epochs < 1)
      throw std::invalid_argument("training.epochs must be at least 1");
    if (t->contains("learning_rate"))
      cfg.training.learning_rate =
          as_num(t->at("learning_rate"), "training.learning_rate");
    if (t->contains("optimizer"))
      cfg.training.optimizer = as_str(t->at("optimizer"), "training.optimizer");
    if (t->contains("adam_beta1"))
      cfg.training.adam_beta1 = as_num(t->at("adam_beta1"), "training.adam_beta1");
    if (t->contains("adam_beta2"))
      cfg.training.adam_beta2 = as_num(t->at("adam_beta2"), "training.adam_beta2");
    if (t->contains("adam_eps"))
      cfg.training.adam_eps = as_num(t->at("adam_eps"), "training.adam_eps");
    if (t->contains("pos_weight")) {
      const json& w = t->at("pos_weight");
      if (w.is_string() && w.get<std::string>() == "auto") {
        cfg.training.pos_weight_auto = true;
      } else if (w.is_number()) {
        cfg.training.pos_weight_auto = false;
        cfg.training.pos_weight = w.get<double>();
        if (!(cfg.training.pos_weight > 0.0))
          throw std::invalid_argument("training.pos_weight must be positive");
      } else {
        throw std::invalid_argument(
            "training.pos_weight must be a number or \"auto\"");
      }
    }
    if (t->contains("shuffle"))
      cfg.training.shuffle = as_bool(t->at("shuffle"), "training.shuffle");
    if (t->contains("early_stop_patience"))
      cfg.training.early_stop_patience =
          as_int(t->at("early_stop_patience"), "training.early_stop_patience");
    if (cfg.training.early_stop_patience < 0)
      throw std::invalid_argument("training.early_stop_patience must be >= 0");
    if (t->contains("val_fraction")) {
      cfg.val_fraction = as_num(t->at("val_fraction"), "training.val_fraction");
      if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw std::invalid_argument(
            "training.val_fraction must lie strictly between 0 and 1");
    }
  }

  if (const json* e = object_section(root, "eval", origin)) {
    expect_keys(*e, "eval", {"threshold"});
    if (e->contains("threshold"))
      cfg.threshold = as_num(e->at("threshold"), "eval.threshold");
  }
  check_threshold_range(cfg.threshold);

  if (const json* c = object_section(root, "compare", origin)) {
    expect_keys(*c, "compare", {"variants"});
    if (c->contains("variants")) {
      const json& v = c->at("variants");
      if (!v.is_array())
        throw std::invalid_argument("compare.variants must be an array");
      cfg.compare_variants.clear();
      for (const json& item : v)
        cfg.compare_variants.push_back(as_str(item, "compare.variants entry"));
    }
  }
  for (const std::string& v : cfg.compare_variants) {
    ModelConfig probe = cfg.model;
    probe.variant = v;
    validate_model_config(probe, cfg.features);
  }

  return cfg;
}

RunConfig load_run_config(const fs::path& path, const CliOverrides& o) {
  RunConfig cfg = parse_run_config(read_text_file(path), path.string());
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.variant) {
    cfg.model.variant = *o.variant;
    validate_model_config(cfg.model, cfg.features);
  }
  if (o.threshold) {
    cfg.threshold = *o.threshold;
    check_threshold_range(cfg.threshold);
  }
  if (cfg.ingest) {
    if (!fs::exists(cfg.ingest->raster))
      throw std::invalid_argument("ingest.raster does not exist: " +
                                  cfg.ingest->raster.string());
    if (!fs::exists(cfg.ingest->edges))
      throw std::invalid_argument("ingest.edges does not exist: " +
                                  cfg.ingest->edges.string());
  }
  return cfg;
}

Verbosity verbosity_from_env(const char* value) {
  std::string v = value ? value : "";
  if (v.empty() || v == "info") return Verbosity::info;
  if (v == "quiet") return Verbosity::quiet;
  if (v == "debug") return Verbosity::debug;
  throw std::invalid_argument("SENGRAPH_LOG must be quiet, info or debug, got \"" +
                              v + "\"");
}

RunPaths run_paths(const RunConfig& cfg) {
  RunPaths p;
  const fs::path& d = cfg.out_dir;
  p.terrain = d / "terrain.asc";
  p.graph = d / "graph.txt";
  p.test_terrain = d / "test_terrain.asc";
  p.test_graph = d / "test_graph.txt";
  p.samples = d / "samples";
  p.test_samples = d / "test_samples";
  p.checkpoint = d / "checkpoint.json";
  p.train_log = d / "train_log.txt";
  p.predictions = d / "predictions";
  p.reconstructed = d / "reconstructed.txt";
  p.reconstructed_svg = d / "reconstructed.svg";
  p.eval_report = d / "eval.txt";
  p.eval_table = d / "eval_table.csv";
  p.compare_table = d / "compare.txt";
  p.compare_csv = d / "compare.csv";
  p.compare_svg = d / "compare.svg";
  return p;
}

namespace {

void print_graph_stats(std::ostream& out, const std::string& side,
                       const SenGraph& g) {
  const std::size_t n = g.nodes.size();
  const std::size_t complete = n * (n - 1) / 2;
  DegreeStats ds = degree_stats(g);
  LengthStats ls = edge_length_stats(g);
  out << "[" << side << "] nodes " << n << "  real_edges " << g.edges.size()
      << "  complete_pairs " << complete
      << (is_connected(g) ? "  connected" : "  disconnected") << "\n";
  out << "[" << side << "] degree   min " << ds.min << "  mean "
      << fmt_double(ds.mean) << "  max " << ds.max << "\n";
  out << "[" << side << "] edge_len min " << fmt_double(ls.min) << "  mean "
      << fmt_double(ls.mean) << "  max " << fmt_double(ls.max) << "\n";
}

SenGraph build_graph(const RunConfig& cfg, const Raster& r,
                     const std::string& side, std::uint64_t edge_seed) {
  std::vector<SenNode> nodes =
      generate_nodes(r, cfg.graph.nodes, cfg.graph.min_spacing,
                     child_seed(cfg.seed, "nodes." + side), cfg.features);
  if (cfg.graph.mode == "gabriel") return connect_gabriel(nodes, r, cfg.features);
  if (cfg.graph.mode == "rng") return connect_rng(nodes, r, cfg.features);
  return connect_terrain_conditioned(nodes, r, terrain_mode_of(cfg.graph.mode),
                                     cfg.graph.survival, edge_seed,
                                     cfg.features);
}

/// Raster backing a given side; ingest runs reuse one raster for both sides.
Raster side_raster(const RunConfig& cfg, const RunPaths& p, bool test_side) {
  if (cfg.ingest) return load_ascii_grid(cfg.ingest->raster);
  return load_ascii_grid(test_side ? p.test_terrain : p.terrain);
}

SenGraph side_graph(const RunConfig& cfg, const RunPaths& p, const Raster& r,
                    bool test_side) {
  if (cfg.ingest) return read_edgelist(cfg.ingest->edges, r, cfg.features);
  return read_edgelist(test_side ? p.test_graph : p.graph, r, cfg.features);
}

std::vector<std::vector<PairPrediction>> load_predictions(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw MissingArtifactError("prediction directory does not exist: " +
                               dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw MissingArtifactError("prediction directory is empty: " + dir.string());
  std::vector<std::vector<PairPrediction>> per_sample;
  per_sample.reserve(files.size());
  for (const fs::path& f : files) {
    std::istringstream in(read_text_file(f));
    std::vector<PairPrediction> preds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string a, b, c, extra;
      if (!(ls >> a >> b >> c) || (ls >> extra))
        throw std::runtime_error(f.string() + ":" + std::to_string(lineno) +
                                 ": expected 'u v prob'");
      preds.push_back({parse_int(a), parse_int(b), parse_double(c)});
    }
    per_sample.push_back(std::move(preds));
  }
  return per_sample;
}

std::vector<std::pair<std::int64_t, std::int64_t>> truth_pairs(
    const SenGraph& g) {
  std::vector<std::pair<std::int64_t, std::int64_t>> t;
  t.reserve(g.edges.size());
  for (const SenEdge& e : g.edges) t.emplace_back(e.u, e.v);
  return t;
}

std::string prediction_text(const SampleGraph& s,
                            const std::vector<double>& probs) {
  std::ostringstream out;
  out << "# graph " << s.graph_id << " center " << s.center_node << "\n";
  for (std::size_t i = 0; i < s.candidates.size(); ++i)
    out << s.candidates[i].u << " " << s.candidates[i].v << " "
        << fmt_double(probs[i]) << "\n";
  return out.str();
}

std::string zero_padded(std::size_t i) {
  std::string n = std::to_string(i);
  return std::string(n.size() >= 5 ? 0 : 5 - n.size(), '0') + n;
}

/// Training shared by `train` and `compare`: same child seeds regardless of
/// variant, so a comparison differs only in the model architecture.
ModelParams fit_model(const RunConfig& cfg, const std::string& variant,
                      const std::vector<SampleGraph>& samples,
                      std::ostream* log, TrainReport* report) {
  ModelConfig mc = cfg.model;
  mc.variant = variant;
  validate_model_config(mc, cfg.features);
  ModelParams model = init_model(mc, cfg.features, child_seed(cfg.seed, "init"));
  TrainConfig tc = cfg.training;
  tc.seed = child_seed(cfg.seed, "train");
  std::vector<SampleGraph> train_set = samples;
  std::vector<SampleGraph> val_set;
  if (tc.early_stop_patience > 0) {
    auto parts = split(samples, 1.0 - cfg.val_fraction,
                       child_seed(cfg.seed, "val_split"));
    train_set = std::move(parts.first);
    val_set = std::move(parts.second);
  }
  TrainReport r = train(model, train_set, val_set, tc, log);
  if (report) *report = r;
  return model;
}

}  // namespace

void cmd_generate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.ingest)
    throw std::invalid_argument(
        "generate does not apply to an ingest config; the raster and edge "
        "list already exist");
  RunPaths p = run_paths(cfg);
  fs::create_directories(cfg.out_dir);
  for (bool test_side : {false, true}) {
    const std::string side = test_side ? "test" : "train";
    Raster r = synth_terrain(cfg.terrain.n, cfg.terrain.roughness,
                             child_seed(cfg.seed, "terrain." + side),
                             cfg.terrain.xll, cfg.terrain.yll,
                             cfg.terrain.cellsize);
    SenGraph g = build_graph(cfg, r, side, child_seed(cfg.seed, "edges." + side));
    save_ascii_grid(r, test_side ? p.test_terrain : p.terrain);
    write_edgelist(g, test_side ? p.test_graph : p.graph);
    print_graph_stats(out, side, g);
  }
  out << "wrote " << p.terrain.string() << ", " << p.graph.string() << ", "
      << p.test_terrain.string() << ", " << p.test_graph.string() << "\n";
}

void cmd_sample(const RunConfig& cfg, std::ostream& out) {
  RunPaths p = run_paths(cfg);
  for (bool test_side : {false, true}) {
    const std::string side = test_side ? "test" : "train";
    Raster r = side_raster(cfg, p, test_side);
    SenGraph g = side_graph(cfg, p, r, test_side);
    SampleSet set = sample_all(g, r, cfg.sampling, side);
    const fs::path dir = test_side ? p.test_samples : p.samples;
    write_sample_dir(set.samples, dir);
    out << "[" << side << "] samples " << set.samples.size()
        << "  rejected_small " << set.rejected_small << "  rejected_oversize "
        << set.rejected_oversize << "  -> " << dir.string() << "\n";
  }
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  RunPaths p = run_paths(cfg);
  Raster r = side_raster(cfg, p, false);
  std::vector<SampleGraph> samples =
      read_sample_dir(p.samples, r, cfg.features);
  std::ostringstream log;
  TrainReport report;
  ModelParams model = fit_model(cfg, cfg.model.variant, samples, &log, &report);
  atomic_write(p.train_log, log.str());
  save_checkpoint(model, p.checkpoint);
  const EpochStats& last = report.epochs.back();
  out << "trained " << cfg.model.variant << " on " << samples.size()
      << " samples for " << report.epochs.size() << " epochs\n";
  out << "final loss " << fmt_double(last.loss) << "  f1 "
      << fmt_double(last.f1);
  if (last.val_f1 >= 0.0) out << "  val_f1 " << fmt_double(last.val_f1);
  if (report.best_epoch > 0) out << "  best_epoch " << report.best_epoch;
  out << "\n";
  out << "wrote " << p.checkpoint.string() << "\n";
}

void cmd_predict(const RunConfig& cfg, std::ostream& out) {
  RunPaths p = run_paths(cfg);
  ModelParams model = load_checkpoint(p.checkpoint);
  Raster r = side_raster(cfg, p, true);
  std::vector<SampleGraph> samples =
      read_sample_dir(p.test_samples, r, model.feat);
  fs::create_directories(p.predictions);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<double> probs = predict_values(samples[i], model);
    pairs += probs.size();
    atomic_write(p.predictions / ("pred_" + zero_padded(i) + ".txt"),
                 prediction_text(samples[i], probs));
  }
  out << "scored " << pairs << " candidate pairs across " << samples.size()
      << " samples -> " << p.predictions.string() << "\n";
}

void cmd_reconstruct(const RunConfig& cfg, std::ostream& out) {
  RunPaths p = run_paths(cfg);
  std::vector<EdgeVote> votes = aggregate(load_predictions(p.predictions));
  std::vector<std::pair<std::int64_t, std::int64_t>> edges =
      reassemble(votes, cfg.threshold);
  Raster r = side_raster(cfg, p, true);
  SenGraph truth = side_graph(cfg, p, r, true);
  SenGraph rebuilt;
  rebuilt.nodes = truth.nodes;
  rebuilt.edges.reserve(edges.size());
  for (auto [u, v] : edges) {
    SenEdge e;
    e.u = u;
    e.v = v;
    rebuilt.edges.push_back(std::move(e));
  }
  atomic_write(p.reconstructed, serialize_edgelist(rebuilt));
  atomic_write(p.reconstructed_svg, svg_network_map(truth, edges));
  out << "voted_pairs " << votes.size() << "  predicted_edges " << edges.size()
      << "  threshold " << fmt_double(cfg.threshold) << "\n";
  out << "wrote " << p.reconstructed.string() << " and "
      << p.reconstructed_svg.string() << "\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  RunPaths p = run_paths(cfg);
  std::vector<EdgeVote> votes = aggregate(load_predictions(p.predictions));
  Raster r = side_raster(cfg, p, true);
  SenGraph truth = side_graph(cfg, p, r, true);
  EvalReport report = confusion(votes, cfg.threshold, truth_pairs(truth));
  atomic_write(p.eval_report, serialize_eval_report(report));
  atomic_write(p.eval_table, eval_table_csv(report));
  out << "f1 " << fmt_double(report.f1) << "  accuracy "
      << fmt_double(report.accuracy) << "  (tp " << report.tp << " fp "
      << report.fp << " fn " << report.fn << " tn " << report.tn
      << ", threshold " << fmt_double(report.threshold) << ")\n";
  if (report.f1_degenerate)
    out << "warning: no predicted or truth edges; F1 reported as 0\n";
  out << "wrote " << p.eval_report.string() << " and " << p.eval_table.string()
      << "\n";
}

void cmd_compare(const RunConfig& cfg, std::ostream& out) {
  if (cfg.compare_variants.size() < 2)
    throw std::invalid_argument("compare needs at least two variants");
  RunPaths p = run_paths(cfg);
  Raster train_raster = side_raster(cfg, p, false);
  std::vector<SampleGraph> train_samples =
      read_sample_dir(p.samples, train_raster, cfg.features);
  Raster test_raster = side_raster(cfg, p, true);
  std::vector<SampleGraph> test_samples =
      read_sample_dir(p.test_samples, test_raster, cfg.features);
  SenGraph truth = side_graph(cfg, p, test_raster, true);
  auto truth_edges = truth_pairs(truth);

  std::vector<CompareRow> rows;
  for (const std::string& variant : cfg.compare_variants) {
    ModelParams model = fit_model(cfg, variant, train_samples, nullptr, nullptr);
    std::vector<std::vector<PairPrediction>> per_sample;
    per_sample.reserve(test_samples.size());
    for (const SampleGraph& s : test_samples) {
      std::vector<double> probs = predict_values(s, model);
      std::vector<PairPrediction> preds;
      preds.reserve(probs.size());
      for (std::size_t i = 0; i < probs.size(); ++i)
        preds.push_back({s.candidates[i].u, s.candidates[i].v, probs[i]});
      per_sample.push_back(std::move(preds));
    }
    EvalReport report =
        confusion(aggregate(per_sample), cfg.threshold, truth_edges);
    rows.push_back({variant, report.f1, report.accuracy});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CompareRow& a, const CompareRow& b) {
                     return a.f1 > b.f1;
                   });

  std::ostringstream table;
  table << "rank variant f1 accuracy\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    table << (i + 1) << " " << rows[i].variant << " " << fmt_double(rows[i].f1)
          << " " << fmt_double(rows[i].accuracy) << "\n";
  std::ostringstream csv;
  csv << "variant,f1,accuracy\n";
  for (const CompareRow& r : rows)
    csv << r.variant << "," << fmt_double(r.f1) << "," << fmt_double(r.accuracy)
        << "\n";
  std::vector<std::pair<std::string, double>> bars;
  for (const CompareRow& r : rows) bars.emplace_back(r.variant, r.f1);

  fs::create_directories(cfg.out_dir);
  atomic_write(p.compare_table, table.str());
  atomic_write(p.compare_csv, csv.str());
  atomic_write(p.compare_svg, svg_bar_chart("reconstruction F1 by variant", bars));
  out << table.str();
  out << "wrote " << p.compare_table.string() << ", " << p.compare_csv.string()
      << ", " << p.compare_svg.string() << "\n";
}

std::string svg_bar_chart(
    const std::string& title,
    const std::vector<std::pair<std::string, double>>& bars) {
  const int width = 480, height = 320;
  const int left = 50, right = 20, top = 40, bottom = 40;
  const int plot_w = width - left - right;
  const int plot_h = height - top - bottom;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
    << height << "\">\n";
  s << "<rect width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double y = top + plot_h * (1.0 - frac);
    s << "<line x1=\"" << left << "\" y1=\"" << fmt_double(y) << "\" x2=\""
      << (left + plot_w) << "\" y2=\"" << fmt_double(y)
      << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << (left - 6) << "\" y=\"" << fmt_double(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
      << fmt_double(frac) << "</text>\n";
  }
  const std::size_t n = bars.empty() ? 1 : bars.size();
  const double slot = static_cast<double>(plot_w) / static_cast<double>(n);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::clamp(bars[i].second, 0.0, 1.0);
    const double bw = slot * 0.6;
    const double x = left + slot * (static_cast<double>(i) + 0.2);
    const double h = plot_h * v;
    const double y = top + plot_h - h;
    s << "<rect x=\"" << fmt_double(x) << "\" y=\"" << fmt_double(y)
      << "\" width=\"" << fmt_double(bw) << "\" height=\"" << fmt_double(h)
      << "\" fill=\"#4878a8\"/>\n";
    s << "<text x=\"" << fmt_double(x + bw / 2) << "\" y=\"" << fmt_double(y - 4)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"10\">" << fmt_double(bars[i].second) << "</text>\n";
    s << "<text x=\"" << fmt_double(x + bw / 2) << "\" y=\""
      << (top + plot_h + 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << bars[i].first << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_network_map(
    const SenGraph& truth,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& predicted) {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x, max_x = -min_x, max_y = -min_x;
  for (const SenNode& n : truth.nodes) {
    min_x = std::min(min_x, n.pos.x);
    max_x = std::max(max_x, n.pos.x);
    min_y = std::min(min_y, n.pos.y);
    max_y = std::max(max_y, n.pos.y);
  }
  if (truth.nodes.empty()) min_x = min_y = 0.0, max_x = max_y = 1.0;
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const double size = 800.0, pad = 20.0;
  const double scale = (size - 2 * pad) / span;
  auto sx = [&](double x) { return pad + (x - min_x) * scale; };
  auto sy = [&](double y) { return size - pad - (y - min_y) * scale; };
  auto line = [&](Point a, Point b, const char* style) {
    std::ostringstream s;
    s << "<line x1=\"" << fmt_double(sx(a.x)) << "\" y1=\""
      << fmt_double(sy(a.y)) << "\" x2=\"" << fmt_double(sx(b.x))
      << "\" y2=\"" << fmt_double(sy(b.y)) << "\" " << style << "/>\n";
    return s.str();
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
    << "\" height=\"" << size << "\" viewBox=\"0 0 " << size << " " << size
    << "\">\n";
  s << "<rect width=\"" << size << "\" height=\"" << size
    << "\" fill=\"white\"/>\n";
  for (const SenEdge& e : truth.edges)
    s << line(truth.node(e.u).pos, truth.node(e.v).pos,
              "stroke=\"#c8c8c8\" stroke-width=\"2.5\"");
  for (auto [u, v] : predicted)
    s << line(truth.node(u).pos, truth.node(v).pos,
              "stroke=\"#c03028\" stroke-width=\"1\"");
  for (const SenNode& n : truth.nodes)
    s << "<circle cx=\"" << fmt_double(sx(n.pos.x)) << "\" cy=\""
      << fmt_double(sy(n.pos.y)) << "\" r=\"2\" fill=\"#202020\"/>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace sengraph
