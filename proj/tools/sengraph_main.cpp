#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <streambuf>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sengraph/errors.hpp"
#include "sengraph/pipeline.hpp"

namespace {

using sengraph::RunConfig;
using sengraph::Verbosity;

/// Stream that swallows everything, for SENGRAPH_LOG=quiet.
struct NullBuf : std::streambuf {
  int overflow(int c) override { return c; }
};

int dispatch(const std::string& command, const RunConfig& cfg,
             Verbosity level) {
  static const std::map<std::string,
                        std::function<void(const RunConfig&, std::ostream&)>>
      kStages = {
          {"generate", sengraph::cmd_generate},
          {"sample", sengraph::cmd_sample},
          {"train", sengraph::cmd_train},
          {"predict", sengraph::cmd_predict},
          {"reconstruct", sengraph::cmd_reconstruct},
          {"eval", sengraph::cmd_eval},
          {"compare", sengraph::cmd_compare},
      };
  NullBuf devnull;
  std::ostream quiet(&devnull);
  std::ostream& out = level == Verbosity::quiet ? quiet : std::cout;
  if (level == Verbosity::debug)
    out << command << ": seed " << cfg.seed << "  out " << cfg.out_dir.string()
        << "  variant " << cfg.model.variant << "  threshold "
        << cfg.threshold << "\n";
  kStages.at(command)(cfg, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatially embedded network reconstruction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> variant;
  std::optional<double> threshold;

  const char* names[] = {"generate",    "sample", "train",   "predict",
                         "reconstruct", "eval",   "compare"};
  const char* blurbs[] = {
      "synthesize terrain plus train/test networks",
      "cut both networks into window samples",
      "fit the configured model on the training samples",
      "score every candidate pair of the held-out samples",
      "vote the predictions into an edge list and a map",
      "score the reconstruction against the held-out network",
      "train several variants on identical data and rank them"};
  for (std::size_t i = 0; i < 7; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", config_path, "run config (JSON)")
        ->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--variant", variant, "override the model variant");
    sub->add_option("--threshold", threshold,
                    "override the reconstruction threshold");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    Verbosity level =
        sengraph::verbosity_from_env(std::getenv("SENGRAPH_LOG"));
    sengraph::CliOverrides overrides{seed, out_dir, variant, threshold};
    RunConfig cfg = sengraph::load_run_config(config_path, overrides);
    return dispatch(app.get_subcommands().front()->get_name(), cfg, level);
  } catch (const sengraph::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sengraph::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
