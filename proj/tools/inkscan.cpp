// inkscan: ink-mismatch segmentation of hyperspectral document cubes.
//
//   inkscan bands    --input <cube> --bands 1,10,30 --out <dir>
//   inkscan spectra  --input <cube> --out spectra.csv [--sample N --seed S]
//   inkscan segment  --input <cube> --k 5 --out-render seg.ppm --out-labels labels.pgm
//   inkscan synth    --bands 33 --inks 5 --seed 7 --out <dir>
//   inkscan eval     <pred.pgm> <truth.pgm>
//
// Exit status: 0 success, 1 runtime/data failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "inkscan/inkscan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ForegroundFlags {
  int threshold = 40;
  std::string polarity = "above";
  bool otsu = false;
  std::string reference = "mean";
  std::string normalize = "none";

  inkscan::ForegroundOptions resolve() const {
    inkscan::ForegroundOptions o;
    o.threshold.value = threshold;
    o.threshold.polarity =
        polarity == "below" ? inkscan::Polarity::KeepBelow : inkscan::Polarity::KeepAtOrAbove;
    o.use_otsu = otsu;
    o.normalization = normalize == "unit" ? inkscan::Normalization::UnitLength : inkscan::Normalization::None;
    if (reference != "mean") {
      std::size_t band = 0;
      try {
        std::size_t used = 0;
        band = std::stoul(reference, &used);
        if (used != reference.size()) throw std::invalid_argument(reference);
      } catch (const std::exception&) {
        throw UsageError("--reference must be 'mean' or a 1-based band number, got '" + reference + "'");
      }
      o.reference = inkscan::ReferenceMode::single_band(band);
    }
    return o;
  }
};

void add_foreground_flags(CLI::App* cmd, ForegroundFlags& f) {
  cmd->add_option("--threshold", f.threshold, "Binary threshold on the reference image")
      ->check(CLI::Range(0, 255))
      ->capture_default_str();
  cmd->add_option("--polarity", f.polarity, "above: pixel >= t is ink; below: pixel < t is ink")
      ->check(CLI::IsMember({"above", "below"}))
      ->capture_default_str();
  cmd->add_flag("--otsu", f.otsu, "Pick the threshold with Otsu's method (falls back to --threshold)");
  cmd->add_option("--reference", f.reference, "Reference image: 'mean' or a 1-based band number")
      ->capture_default_str();
  cmd->add_option("--normalize", f.normalize, "Spectrum normalization")
      ->check(CLI::IsMember({"none", "unit"}))
      ->capture_default_str();
}

struct ClusterFlags {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string init = "kmeans++";
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t restarts = 1;
  std::size_t workers = 1;

  inkscan::KMeansParams resolve() const {
    inkscan::KMeansParams p;
    p.k = k;
    p.seed = seed;
    p.init = init == "random" ? inkscan::InitMethod::Random : inkscan::InitMethod::KMeansPlusPlus;
    p.max_iterations = max_iter;
    p.tolerance = tol;
    p.restarts = restarts;
    p.workers = workers;
    return p;
  }
};

std::vector<std::size_t> parse_band_list(const std::string& text) {
  std::vector<std::size_t> bands;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw UsageError("--bands expects a comma-separated list of band numbers, got '" + text + "'");
    bands.push_back(std::stoul(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return bands;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int run_bands(const std::string& input, const std::string& band_text, const fs::path& out_dir) {
  const auto bands = parse_band_list(band_text);
  const auto cube = inkscan::load_cube(input);
  for (auto b : bands) inkscan::band_image(cube, b);  // range-check all before writing any
  fs::create_directories(out_dir);
  for (auto b : bands) {
    const auto path = out_dir / ("band_" + std::to_string(b) + ".pgm");
    inkscan::write_gray_pgm(inkscan::band_image(cube, b), path);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int run_spectra(const std::string& input, const ForegroundFlags& fg, const fs::path& out,
                std::optional<std::size_t> sample, std::uint64_t seed, bool as_json) {
  const auto options = fg.resolve();
  const auto cube = inkscan::load_cube(input);
  const auto r = inkscan::extract_foreground(cube, options);
  if (r.otsu_fell_back) std::cerr << "warning: degenerate histogram, using --threshold " << r.threshold << '\n';
  inkscan::export_spectra_csv(r.spectra, out, sample, seed);
  if (as_json) {
    std::cout << json{{"pixels", r.spectra.count()}, {"bands", r.spectra.bands()}, {"threshold", r.threshold}}.dump()
              << '\n';
  } else {
    std::cout << "pixels=" << r.spectra.count() << " bands=" << r.spectra.bands() << '\n';
  }
  return 0;
}

int run_segment(const std::string& input, const ForegroundFlags& fg, const ClusterFlags& cf,
                const std::string& out_render, const std::string& out_labels, const std::string& out_csv,
                bool as_json) {
  const auto options = fg.resolve();
  const auto params = cf.resolve();
  params.validate();
  const auto cube = inkscan::load_cube(input);
  const auto r = inkscan::segment_document(cube, options, params);
  if (r.foreground.otsu_fell_back)
    std::cerr << "warning: degenerate histogram, using --threshold " << r.foreground.threshold << '\n';

  if (!out_render.empty())
    inkscan::write_rgb_ppm(inkscan::render_segmentation(r.map, inkscan::Palette::standard(params.k)), out_render);
  if (!out_labels.empty()) inkscan::write_label_pgm(r.map, out_labels);
  if (!out_csv.empty()) inkscan::export_spectra_csv(r.foreground.spectra, out_csv);

  if (as_json) {
    json j{{"pixels", r.foreground.spectra.count()},
           {"bands", r.foreground.spectra.bands()},
           {"threshold", r.foreground.threshold},
           {"k", params.k},
           {"cluster_sizes", r.cluster_sizes},
           {"inertia", r.model.inertia},
           {"iterations", r.model.iterations},
           {"converged", r.model.converged}};
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "pixels=" << r.foreground.spectra.count() << " bands=" << r.foreground.spectra.bands()
              << " threshold=" << r.foreground.threshold << '\n';
    for (std::size_t c = 0; c < r.cluster_sizes.size(); ++c)
      std::cout << "cluster " << c + 1 << ": " << r.cluster_sizes[c] << '\n';
    std::cout << "inertia=" << inkscan::format_shortest(r.model.inertia) << '\n'
              << "iterations=" << r.model.iterations << " converged=" << (r.model.converged ? "true" : "false")
              << '\n';
  }
  return 0;
}

int run_synth(const inkscan::SynthSpec& spec, const fs::path& out_dir, bool as_json) {
  spec.validate();
  const auto doc = inkscan::synth_document(spec);
  const auto band_dir = out_dir / "bands";
  fs::create_directories(band_dir);
  inkscan::CubeManifest manifest;
  for (std::size_t b = 1; b <= doc.cube.bands(); ++b) {
    const auto path = band_dir / ("band_" + std::to_string(b) + ".pgm");
    inkscan::write_gray_pgm(inkscan::band_image(doc.cube, b), path);
    manifest.entries.push_back({b, fs::path("bands") / path.filename()});
  }
  inkscan::write_manifest(manifest, out_dir / "manifest.txt");
  inkscan::write_label_pgm(doc.truth, out_dir / "truth.pgm");
  inkscan::write_synth_sidecar(spec, doc, out_dir / "synth.txt");

  std::size_t ink = 0;
  for (auto l : doc.truth.labels) ink += l != 0 ? 1 : 0;
  if (as_json) {
    std::cout << json{{"width", spec.width}, {"height", spec.height}, {"bands", spec.bands},
                      {"inks", spec.ink_count}, {"ink_pixels", ink}}
                     .dump()
              << '\n';
  } else {
    std::cout << "wrote " << doc.cube.bands() << " bands, truth and sidecar to " << out_dir.string() << '\n'
              << "ink_pixels=" << ink << '\n';
  }
  return 0;
}

int run_eval(const fs::path& pred_path, const fs::path& truth_path, bool as_json) {
  const auto pred = inkscan::read_label_pgm(pred_path);
  const auto truth = inkscan::read_label_pgm(truth_path);
  const auto report = inkscan::best_permutation_accuracy(pred, truth);
  const auto& cm = report.confusion;
  if (as_json) {
    std::vector<std::vector<std::uint64_t>> rows(cm.size);
    for (std::size_t t = 0; t < cm.size; ++t)
      for (std::size_t p = 0; p < cm.size; ++p) rows[t].push_back(cm(t, p));
    std::cout << json{{"accuracy", report.accuracy},
                      {"mapping", report.mapping},
                      {"matched", report.matched},
                      {"truth_ink", report.truth_ink},
                      {"confusion", rows}}
                     .dump()
              << '\n';
    return 0;
  }
  std::cout << "accuracy=" << fixed6(report.accuracy) << '\n' << "mapping:";
  for (std::size_t p = 1; p < report.mapping.size(); ++p) {
    std::cout << ' ' << p << "->";
    if (report.mapping[p] == 0)
      std::cout << '-';
    else
      std::cout << report.mapping[p];
  }
  std::cout << "\nconfusion (rows = truth, columns = prediction):\n";
  for (std::size_t t = 0; t < cm.size; ++t) {
    for (std::size_t p = 0; p < cm.size; ++p) std::cout << (p ? " " : "") << cm(t, p);
    std::cout << '\n';
  }
  return 0;
}

bool is_usage_error(inkscan::ErrorKind kind) {
  return kind == inkscan::ErrorKind::InvalidArgument || kind == inkscan::ErrorKind::InvalidSpec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ink-mismatch segmentation of hyperspectral document cubes"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Print a single-line JSON summary instead of text");

  std::function<int()> action;

  // bands
  std::string bands_input, band_list;
  std::string bands_out = ".";
  auto* bands = app.add_subcommand("bands", "Export selected bands as PGM images");
  bands->add_option("-i,--input", bands_input, "Band directory or manifest")->required();
  bands->add_option("--bands", band_list, "Comma-separated 1-based band numbers")->required();
  bands->add_option("-o,--out", bands_out, "Output directory")->capture_default_str();
  bands->callback([&] { action = [&] { return run_bands(bands_input, band_list, bands_out); }; });

  // spectra
  std::string spectra_input, spectra_out;
  ForegroundFlags spectra_fg;
  std::optional<std::size_t> spectra_sample;
  std::uint64_t spectra_seed = 0;
  auto* spectra = app.add_subcommand("spectra", "Export foreground pixel spectra as CSV");
  spectra->add_option("-i,--input", spectra_input, "Band directory or manifest")->required();
  spectra->add_option("-o,--out", spectra_out, "CSV output path")->required();
  add_foreground_flags(spectra, spectra_fg);
  spectra->add_option("--sample", spectra_sample, "Keep a seeded uniform sample of at most N rows");
  spectra->add_option("--seed", spectra_seed, "Sampling seed")->capture_default_str();
  spectra->callback([&] {
    action = [&] {
      return run_spectra(spectra_input, spectra_fg, spectra_out, spectra_sample, spectra_seed, as_json);
    };
  });

  // segment
  std::string seg_input, seg_render, seg_labels, seg_csv;
  ForegroundFlags seg_fg;
  ClusterFlags seg_cf;
  auto* segment = app.add_subcommand("segment", "Cluster ink spectra and write the segmentation");
  segment->add_option("-i,--input", seg_input, "Band directory or manifest")->required();
  add_foreground_flags(segment, seg_fg);
  segment->add_option("--k", seg_cf.k, "Number of ink clusters")->check(CLI::PositiveNumber)->capture_default_str();
  segment->add_option("--seed", seg_cf.seed, "Initialization seed")->capture_default_str();
  segment->add_option("--init", seg_cf.init, "Initialization method")
      ->check(CLI::IsMember({"kmeans++", "random"}))
      ->capture_default_str();
  segment->add_option("--max-iter", seg_cf.max_iter, "Lloyd iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  segment->add_option("--tol", seg_cf.tol, "Convergence tolerance on centroid displacement")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  segment->add_option("--restarts", seg_cf.restarts, "Seeded restarts; lowest inertia wins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  segment->add_option("--workers", seg_cf.workers, "Threads for the assignment step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  segment->add_option("--out-render", seg_render, "Colour-labelled PPM output");
  segment->add_option("--out-labels", seg_labels, "Label map PGM output (0 = background)");
  segment->add_option("--out-csv", seg_csv, "Foreground spectra CSV output");
  segment->callback([&] {
    action = [&] { return run_segment(seg_input, seg_fg, seg_cf, seg_render, seg_labels, seg_csv, as_json); };
  });

  // synth
  inkscan::SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-ink document with ground truth");
  synth->add_option("--width", synth_spec.width, "Page width")->capture_default_str();
  synth->add_option("--height", synth_spec.height, "Page height")->capture_default_str();
  synth->add_option("--bands", synth_spec.bands, "Number of spectral bands")->capture_default_str();
  synth->add_option("--inks", synth_spec.ink_count, "Number of inks")->capture_default_str();
  synth->add_option("--noise-sigma", synth_spec.noise_sigma, "Gaussian noise std-dev (intensity units)")
      ->capture_default_str();
  synth->add_option("--coverage", synth_spec.coverage, "Fraction of ink pixels")->capture_default_str();
  synth->add_option("--background", synth_spec.background_level, "Background intensity")->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "Generator seed")->capture_default_str();
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->callback([&] { action = [&] { return run_synth(synth_spec, synth_out, as_json); }; });

  // eval
  std::string eval_pred, eval_truth;
  auto* eval = app.add_subcommand("eval", "Score a label map against ground truth");
  eval->add_option("pred", eval_pred, "Predicted label PGM")->required();
  eval->add_option("truth", eval_truth, "Ground-truth label PGM")->required();
  eval->callback([&] { action = [&] { return run_eval(eval_pred, eval_truth, as_json); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const inkscan::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
