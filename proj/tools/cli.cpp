#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "plot.hpp"
#include "wmatch/adapter.hpp"
#include "wmatch/benchmark_gen.hpp"
#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/evaluate.hpp"
#include "wmatch/fmap_io.hpp"
#include "wmatch/handcrafted.hpp"
#include "wmatch/heatmap.hpp"
#include "wmatch/image_io.hpp"
#include "wmatch/index.hpp"
#include "wmatch/onnx_extractor.hpp"
#include "wmatch/preprocess.hpp"
#include "wmatch/retrieval.hpp"
#include "wmatch/synth.hpp"
#include "wmatch/training.hpp"
#include "wmatch/triplet_io.hpp"

namespace wmatch::cli {
namespace {

struct ExtractorOptions {
  std::string model;
  std::uint32_t stride = 16;

  void add(CLI::App* app) {
    app->add_option("--model", model, "ONNX backbone (sidecar at <model>.json); handcrafted features when omitted");
    app->add_option("--stride", stride, "Stride of the handcrafted extractor")->check(CLI::PositiveNumber);
  }

  std::unique_ptr<Extractor> make() const {
    if (model.empty()) return std::make_unique<HandcraftedExtractor>(stride);
    return std::make_unique<OnnxExtractor>(OnnxExtractor::load(model));
  }
};

std::optional<AdapterParams> load_optional_adapter(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_adapter(path);
}

std::optional<Rect> guide_from(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  require(v.size() == 4, ErrorCode::invalid_argument, "--guide needs x,y,w,h");
  return Rect{v[0], v[1], v[2], v[3]};
}

// "all" or a positive count.
std::optional<std::size_t> parse_rerank_n(const std::string& s) {
  if (s == "all" || s == "inf") return std::nullopt;
  std::size_t pos = 0;
  long long n = 0;
  try {
    n = std::stoll(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_argument, "--rerank-n expects a positive integer or 'all'");
  }
  require(pos == s.size() && n > 0, ErrorCode::invalid_argument, "--rerank-n must be positive or 'all'");
  return static_cast<std::size_t>(n);
}

Domain parse_domain_arg(const std::string& s) {
  try {
    return parse_domain(s);
  } catch (const Error& e) {
    fail(ErrorCode::invalid_argument, e.what());
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text << '\n';
    return;
  }
  io::write_file_atomically(path, [&](std::ostream& o) { o << text << '\n'; });
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return Exit::io;
    case ErrorCode::format: return Exit::format;
    case ErrorCode::fingerprint_mismatch: return Exit::fingerprint;
    case ErrorCode::invalid_argument:
    case ErrorCode::precondition:
    case ErrorCode::shape_mismatch:
    case ErrorCode::non_finite: return Exit::invalid;
    case ErrorCode::unsupported: return Exit::unsupported;
  }
  return Exit::other;
}

void report_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense local-feature matching for one-shot watermark recognition", "wmatch"};
  app.require_subcommand(1);
  std::function<int()> action;

  // extract ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("extract", "Extract a normalized feature map (FMAP) from an image");
    struct Opts {
      ExtractorOptions ex;
      std::string image, outp;
      std::uint32_t grid = 22, orientation = 0;
      std::vector<double> guide;
      bool baseline = false;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--image", o->image, "Input image")->required();
    cmd->add_option("--out", o->outp, "Output FMAP file")->required();
    cmd->add_option("--grid", o->grid, "Feature grid side")->check(CLI::PositiveNumber);
    cmd->add_option("--orientation", o->orientation, "Orientation id 0-7")->check(CLI::Range(0, 7));
    cmd->add_option("--guide", o->guide, "Guide rectangle x,y,w,h")->delimiter(',');
    cmd->add_flag("--baseline", o->baseline, "Use the 256 -> 224 baseline setting instead of --grid");
    cmd->callback([&action, o] {
      action = [o] {
        const auto extractor = o->ex.make();
        const Image canonical = preprocess(load_image(o->image), guide_from(o->guide));
        const OrientationId orientation(o->orientation);
        const FeatureMap map =
            o->baseline ? extract_baseline_map(canonical, *extractor, orientation)
                        : extract_at_grid(orient_image(canonical, orientation), *extractor, o->grid)
                              .with_labels(0, orientation);
        save_fmap(o->outp, map);
        return int{Exit::ok};
      };
    });
  }

  // synth --------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("synth", "Render a plain or randomized synthetic reference from a pattern");
    struct Opts {
      std::string pattern, outp, mode = "randomized";
      std::uint64_t seed = 0;
      std::optional<double> background;
      double offset = kDefaultStrokeOffset;
      SynthConfig cfg;
      bool flat = false, invert = false;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--pattern", o->pattern, "Pattern image; dark pixels are strokes")->required();
    cmd->add_option("--out", o->outp, "Output PNG")->required();
    cmd->add_option("--mode", o->mode, "plain | randomized")->check(CLI::IsMember({"plain", "randomized"}));
    cmd->add_option("--seed", o->seed, "Random seed");
    cmd->add_option("--background", o->background, "Background level (plain) / flat background (randomized)");
    cmd->add_option("--offset", o->offset, "Stroke offset for plain synthetics");
    cmd->add_option("--blur-sigma", o->cfg.blur_sigma, "Gaussian blur sigma in pixels");
    cmd->add_option("--noise-low", o->cfg.noise_low, "Lower bound of R");
    cmd->add_option("--noise-high", o->cfg.noise_high, "Upper bound of R");
    cmd->add_flag("--flat", o->flat, "Flat background instead of procedural paper");
    cmd->add_flag("--invert", o->invert, "Bright pixels are strokes");
    cmd->callback([&action, o] {
      action = [o] {
        const Image src = to_gray(load_image(o->pattern));
        BinaryPattern p(src.width, src.height);
        p.provenance = o->pattern;
        for (std::size_t i = 0; i < src.pixels.size(); ++i) {
          p.mask[i] = (o->invert ? src.pixels[i] >= 0.5f : src.pixels[i] < 0.5f) ? 1 : 0;
        }
        Image result;
        if (o->mode == "plain") {
          result = plain_synthetic(p, o->background, o->offset);
        } else {
          SynthConfig cfg = o->cfg;
          if (o->flat || o->background) {
            cfg.background = BackgroundSource::flat;
            if (o->background) cfg.flat_background = *o->background;
          }
          result = randomized_synthetic(p, cfg, o->seed);
        }
        save_png(o->outp, result);
        return int{Exit::ok};
      };
    });
  }

  // bench-gen ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("bench-gen", "Generate a procedural benchmark corpus with manifest.jsonl");
    struct Opts {
      BenchmarkConfig cfg;
      std::string outp, split = "test";
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--out", o->outp, "Output directory")->required();
    cmd->add_option("--classes", o->cfg.n_classes, "Number of classes")->check(CLI::Range(2u, 1000000u));
    cmd->add_option("--photos", o->cfg.photos_per_class, "Photographs per class");
    cmd->add_option("--side", o->cfg.image_side, "Image side in pixels");
    cmd->add_option("--seed", o->cfg.seed, "Random seed");
    cmd->add_option("--split", o->split, "Split label for all records")->check(CLI::IsMember({"train", "val", "test"}));
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        o->cfg.split = parse_split(o->split);
        const auto corpus = gen_benchmark(o->cfg, o->outp);
        out << nlohmann::json{{"manifest", (std::filesystem::path(o->outp) / "manifest.jsonl").string()},
                              {"records", corpus.manifest.records.size()},
                              {"classes", o->cfg.n_classes}}
                   .dump()
            << '\n';
        return int{Exit::ok};
      };
    });
  }

  // index-build --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("index-build", "Build a reference index from a manifest");
    struct Opts {
      ExtractorOptions ex;
      std::string manifest, outp, adapter, domain;
      IndexConfig cfg;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--manifest", o->manifest, "Dataset manifest (JSON lines)")->required();
    cmd->add_option("--out", o->outp, "Output index file")->required();
    cmd->add_option("--adapter", o->adapter, "ADPT adapter applied to all features");
    cmd->add_option("--domain", o->domain, "Only index references of this domain");
    cmd->add_option("--sigma-cells", o->cfg.sigma_cells, "Default sigma stored in the index")
        ->check(CLI::PositiveNumber);
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        if (!o->domain.empty()) o->cfg.domain = parse_domain_arg(o->domain);
        const auto ex = o->ex.make();
        const auto manifest = DatasetManifest::load(o->manifest);
        const auto adapter = load_optional_adapter(o->adapter);
        BuildReport report;
        const auto index = ReferenceIndex::build(manifest, *ex, adapter ? &*adapter : nullptr, o->cfg, &report);
        index.save(o->outp);
        out << nlohmann::json{{"index", o->outp},
                              {"entries", report.indexed},
                              {"classes", index.classes().size()},
                              {"skipped", report.skipped}}
                   .dump()
            << '\n';
        return report.skipped.empty() ? int{Exit::ok} : int{Exit::partial};
      };
    });
  }

  // query --------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("query", "Rank the index classes for one query image (JSON lines)");
    struct Opts {
      ExtractorOptions ex;
      std::string index, image, adapter, rerank_n = "all", similarity = "localsim";
      std::size_t topk = 10;
      std::optional<double> sigma;
      std::vector<double> guide;
      bool stage1_only = false;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--index", o->index, "Reference index")->required();
    cmd->add_option("--image", o->image, "Query image")->required();
    cmd->add_option("--topk", o->topk, "Rows to print")->check(CLI::PositiveNumber);
    cmd->add_option("--rerank-n", o->rerank_n, "Stage-2 candidates: positive count or 'all'");
    cmd->add_option("--sigma-cells", o->sigma, "Spatial tolerance in query cells")->check(CLI::PositiveNumber);
    cmd->add_option("--adapter", o->adapter, "ADPT adapter the index was built with");
    cmd->add_option("--guide", o->guide, "Guide rectangle x,y,w,h")->delimiter(',');
    cmd->add_option("--similarity", o->similarity, "Stage-1 similarity")
        ->check(CLI::IsMember({"localsim", "avgpool", "concat"}));
    cmd->add_flag("--stage1-only", o->stage1_only, "Skip the rerank");
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        QueryOptions qo;
        qo.rerank_n = parse_rerank_n(o->rerank_n);
        qo.sigma_cells = o->sigma;
        qo.stage1_only = o->stage1_only;
        qo.stage1 = parse_global_similarity(o->similarity);
        const auto ex = o->ex.make();
        const auto adapter = load_optional_adapter(o->adapter);
        const auto index = ReferenceIndex::load(o->index);
        Image canonical = preprocess(load_image(o->image), guide_from(o->guide), index.config.preprocess);
        canonical.provenance = o->image;
        const auto q = prepare_query(canonical, *ex, adapter ? &*adapter : nullptr, index);
        const auto res = run_query(q, index, qo);
        const std::size_t n = std::min(o->topk, res.ranking.size());
        for (std::size_t i = 0; i < n; ++i) out << ranked_entry_json(res.ranking[i], i + 1).dump() << '\n';
        return int{Exit::ok};
      };
    });
  }

  // eval ---------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("eval", "Accuracy@K, full curve and stage timings over query records");
    struct Opts {
      ExtractorOptions ex;
      std::string manifest, index, adapter, report, curve_png, rerank_n = "all", similarity = "localsim";
      std::vector<std::size_t> ks{1, 5, 10};
      std::optional<double> sigma;
      bool stage1_only = false;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--manifest", o->manifest, "Manifest with query records")->required();
    cmd->add_option("--index", o->index, "Reference index")->required();
    cmd->add_option("--rerank-n", o->rerank_n, "Stage-2 candidates: positive count or 'all'");
    cmd->add_option("--k", o->ks, "Comma separated K values")->delimiter(',');
    cmd->add_option("--sigma-cells", o->sigma, "Spatial tolerance in query cells")->check(CLI::PositiveNumber);
    cmd->add_option("--adapter", o->adapter, "ADPT adapter the index was built with");
    cmd->add_option("--report", o->report, "Report path (stdout when omitted)");
    cmd->add_option("--curve-png", o->curve_png, "Optional accuracy@K plot");
    cmd->add_option("--similarity", o->similarity, "Stage-1 similarity")
        ->check(CLI::IsMember({"localsim", "avgpool", "concat"}));
    cmd->add_flag("--stage1-only", o->stage1_only, "Skip the rerank");
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        EvalConfig cfg;
        cfg.ks = o->ks;
        cfg.query.rerank_n = parse_rerank_n(o->rerank_n);
        cfg.query.sigma_cells = o->sigma;
        cfg.query.stage1_only = o->stage1_only;
        cfg.query.stage1 = parse_global_similarity(o->similarity);
        const auto ex = o->ex.make();
        const auto adapter = load_optional_adapter(o->adapter);
        const auto index = ReferenceIndex::load(o->index);
        const auto manifest = DatasetManifest::load(o->manifest);
        const auto report = evaluate(manifest, index, *ex, adapter ? &*adapter : nullptr, cfg);
        write_text(o->report, report.to_json().dump(1), out);
        if (!o->curve_png.empty()) save_png(o->curve_png, plot_curve(report.curve));
        return report.missing_class == 0 ? int{Exit::ok} : int{Exit::partial};
      };
    });
  }

  // mine ---------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("mine", "Mine spatially verified triplets (TRIP) from a training manifest");
    struct Opts {
      ExtractorOptions ex;
      std::string manifest, outp, adapter, anchor_domain = "drawing";
      MiningConfig cfg;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--manifest", o->manifest, "Training manifest")->required();
    cmd->add_option("--out", o->outp, "Output TRIP file")->required();
    cmd->add_option("--tau-cells", o->cfg.tau_cells, "Positive threshold in query cells (inf allowed)");
    cmd->add_option("--lambda", o->cfg.lambda, "Triplet margin parameter");
    cmd->add_option("--adapter", o->adapter, "Mine on features adapted by this ADPT file");
    cmd->add_option("--anchor-domain", o->anchor_domain, "Domain of the anchor images");
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        const auto ex = o->ex.make();
        const auto manifest = DatasetManifest::load(o->manifest);
        const auto corpus = build_training_corpus(manifest, *ex, o->cfg.scales, parse_domain_arg(o->anchor_domain));
        const auto adapter = load_optional_adapter(o->adapter);
        const auto params = adapter ? *adapter : AdapterParams::identity(corpus.dim());
        const auto batch = mine_triplets(corpus, params, o->cfg);
        save_triplets(o->outp, batch);
        out << nlohmann::json{{"triplets", batch.size()}, {"tau_cells", o->cfg.tau_cells}, {"out", o->outp}}.dump()
            << '\n';
        return int{Exit::ok};
      };
    });
  }

  // train-adapter ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("train-adapter", "Train the affine feature adapter with the triplet loss");
    struct Opts {
      ExtractorOptions ex;
      std::string manifest, outp, curve, anchor_domain = "drawing";
      MiningConfig cfg;
      TrainConfig train;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--manifest", o->manifest, "Training manifest")->required();
    cmd->add_option("--out", o->outp, "Output ADPT file")->required();
    cmd->add_option("--curve", o->curve, "Loss curve JSON (stdout when omitted)");
    cmd->add_option("--epochs", o->train.epochs, "Epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", o->train.adam.lr, "Adam learning rate");
    cmd->add_option("--seed", o->train.seed, "Shuffle seed");
    cmd->add_option("--batch-size", o->train.batch_size, "Triplets per Adam step")->check(CLI::PositiveNumber);
    cmd->add_option("--tau-cells", o->cfg.tau_cells, "Positive threshold in query cells");
    cmd->add_option("--lambda", o->cfg.lambda, "Triplet margin parameter");
    cmd->add_option("--remine-every", o->cfg.remine_every, "Epochs between re-mining");
    cmd->add_option("--anchor-domain", o->anchor_domain, "Domain of the anchor images");
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        const auto ex = o->ex.make();
        const auto manifest = DatasetManifest::load(o->manifest);
        const auto result = train_adapter(manifest, *ex, o->cfg, o->train, parse_domain_arg(o->anchor_domain));
        save_adapter(o->outp, result.params);
        write_text(o->curve, loss_curve_json(result).dump(1), out);
        return int{Exit::ok};
      };
    });
  }

  // heatmap ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("heatmap", "Contribution heatmap (PNG + JSON records) for one image pair");
    struct Opts {
      ExtractorOptions ex;
      std::string query, reference, outp, adapter, target = "query";
      double sigma = kDefaultSigmaCells;
      std::uint32_t cell_px = 16;
    };
    auto o = std::make_shared<Opts>();
    o->ex.add(cmd);
    cmd->add_option("--query", o->query, "Query image")->required();
    cmd->add_option("--reference", o->reference, "Reference image")->required();
    cmd->add_option("--out", o->outp, "Output PNG; records go to <out>.json")->required();
    cmd->add_option("--target", o->target, "query | reference")->check(CLI::IsMember({"query", "reference"}));
    cmd->add_option("--sigma-cells", o->sigma, "Spatial tolerance in query cells")->check(CLI::PositiveNumber);
    cmd->add_option("--cell-px", o->cell_px, "Pixels per rendered cell")->check(CLI::PositiveNumber);
    cmd->add_option("--adapter", o->adapter, "ADPT adapter applied to both sides");
    cmd->callback([&action, o, &out] {
      action = [o, &out] {
        const auto ex = o->ex.make();
        const auto adapter = load_optional_adapter(o->adapter);
        const ScaleSet scales;
        FeatureMap q = extract_query_map(preprocess(load_image(o->query)), *ex, scales);
        const Image ref = preprocess(load_image(o->reference));
        std::vector<FeaturePyramid> pyramids;
        for (std::uint32_t i = 0; i < OrientationId::kCount; ++i) {
          pyramids.push_back(extract_pyramid(ref, *ex, scales, OrientationId(i)));
          if (adapter) {
            for (auto& m : pyramids.back().maps) m = apply_adapter(m, *adapter);
          }
        }
        if (adapter) q = apply_adapter(q, *adapter);
        const auto breakdown = score_oriented(q, pyramids, o->sigma);
        const auto target = o->target == "query" ? HeatmapTarget::query : HeatmapTarget::reference;
        export_heatmap(o->outp, breakdown, target, o->cell_px);
        out << nlohmann::json{{"total", breakdown.total}, {"orientation", breakdown.orientation.id()}}.dump() << '\n';
        return int{Exit::ok};
      };
    });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Exit::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Exit::ok;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return Exit::usage;
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    return exit_for(e.code());
  }
  if (!action) {
    report_error(err, "usage", "no subcommand");
    return Exit::usage;
  }
  try {
    return action();
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    return exit_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, "io", e.what());
    return Exit::io;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return Exit::other;
  }
}

}  // namespace wmatch::cli

int cli_run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return wmatch::cli::run(args, std::cout, std::cerr);
}
