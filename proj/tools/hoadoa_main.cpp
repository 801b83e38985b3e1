// Copyright 2026 The hoadoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 numerical-contract failure. Progress goes to stderr (HOADOA_LOG:
// 0 quiet, 1 progress, 2 debug); machine-readable output goes to stdout and
// files. Every subcommand is deterministic given (config, seed).

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoadoa/baseline.hpp"
#include "hoadoa/dataset.hpp"
#include "hoadoa/dsp.hpp"
#include "hoadoa/features.hpp"
#include "hoadoa/metrics.hpp"
#include "hoadoa/nn.hpp"
#include "hoadoa/room.hpp"
#include "hoadoa/tensor_file.hpp"
#include "hoadoa/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kContractError = 3;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("HOADOA_LOG");
    if (env == nullptr) return 1;
    if (std::strcmp(env, "quiet") == 0) return 0;
    if (std::strcmp(env, "debug") == 0) return 2;
    return std::atoi(env);
  }();
  return level;
}

template <typename... Args>
void progress(int level, const char* format, Args... args) {
  if (log_level() >= level) {
    std::fprintf(stderr, format, args...);
    std::fprintf(stderr, "\n");
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

hoadoa::FeatureKind feature_from_name(const std::string& name) {
  if (name == "intensity") return hoadoa::FeatureKind::kIntensity;
  if (name == "magphase") return hoadoa::FeatureKind::kMagphase;
  throw std::invalid_argument("unknown feature kind: " + name);
}

double round4(double v) {
  return static_cast<double>(std::llround(v * 1e4)) / 1e4;
}

// FNV-1a over every regular file under root, visited in sorted relative
// path order, hashing the path and then the content bytes.
uint64_t tree_checksum(const fs::path& root) {
  uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](const char* bytes, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(bytes[i]);
      h *= 1099511628211ULL;
    }
  };
  if (!fs::exists(root)) return h;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end(), [&](const auto& a, const auto& b) {
    return a.lexically_relative(root) < b.lexically_relative(root);
  });
  std::vector<char> buffer(1 << 16);
  for (const fs::path& file : files) {
    const std::string rel = file.lexically_relative(root).generic_string();
    mix(rel.data(), rel.size());
    std::ifstream in(file, std::ios::binary);
    while (in) {
      in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      mix(buffer.data(), static_cast<size_t>(in.gcount()));
    }
  }
  return h;
}

void parallel_over(size_t count, int workers,
                   const std::function<void(size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> cursor{0};
  std::vector<std::thread> pool;
  const size_t n = std::min(static_cast<size_t>(workers), count);
  pool.reserve(n);
  for (size_t w = 0; w < n; ++w)
    pool.emplace_back([&] {
      for (size_t i = cursor.fetch_add(1); i < count;
           i = cursor.fetch_add(1))
        fn(i);
    });
  for (std::thread& t : pool) t.join();
}

// Keeps the leading channels and re-derives the implied order. The prefix
// of an ambiX signal is exactly its lower-order encoding.
hoadoa::HoaSignal truncate_channels(hoadoa::HoaSignal signal, size_t keep) {
  if (signal.channels.size() < keep)
    throw std::invalid_argument("signal carries " +
                                std::to_string(signal.channels.size()) +
                                " channels, need " + std::to_string(keep));
  signal.channels.resize(keep);
  signal.order =
      static_cast<int>(std::lround(std::sqrt(static_cast<double>(keep)))) - 1;
  return signal;
}

struct FlagOverrides {
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* order = nullptr;
  CLI::Option* feature = nullptr;
  CLI::Option* workers = nullptr;
  uint64_t seed_value = 0;
  std::string out_value;
  int order_value = 0;
  std::string feature_value;
  int workers_value = 1;
};

hoadoa::SceneBounds bounds_from_json(const json& j) {
  hoadoa::SceneBounds b;
  b.min_xy = j.value("min_xy", b.min_xy);
  b.max_xy = j.value("max_xy", b.max_xy);
  b.min_z = j.value("min_z", b.min_z);
  b.max_z = j.value("max_z", b.max_z);
  b.absorption_min = j.value("absorption_min", b.absorption_min);
  b.absorption_max = j.value("absorption_max", b.absorption_max);
  b.receiver_wall_margin = j.value("receiver_wall_margin",
                                   b.receiver_wall_margin);
  b.source_wall_margin = j.value("source_wall_margin", b.source_wall_margin);
  b.min_source_receiver_dist =
      j.value("min_source_receiver_dist", b.min_source_receiver_dist);
  b.snr_min = j.value("snr_min", b.snr_min);
  b.snr_max = j.value("snr_max", b.snr_max);
  return b;
}

hoadoa::SplitConfig split_config_from_json(const json& j,
                                           const FlagOverrides& flags) {
  hoadoa::SplitConfig cfg;
  cfg.split = hoadoa::split_from_name(j.value("split", "train"));
  cfg.room_count = j.value("room_count", cfg.room_count);
  cfg.sources_per_room = j.value("sources_per_room", cfg.sources_per_room);
  cfg.segment_seconds = j.value("segment_seconds", cfg.segment_seconds);
  cfg.order = j.value("order", cfg.order);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.speech_seconds = j.value("speech_seconds", cfg.speech_seconds);
  cfg.babble_seconds = j.value("babble_seconds", cfg.babble_seconds);
  cfg.write_srir = j.value("write_srir", cfg.write_srir);
  cfg.write_features = j.value("write_features", cfg.write_features);
  cfg.debug_components = j.value("debug_components", cfg.debug_components);
  if (j.contains("feature"))
    cfg.feature_kind = feature_from_name(j["feature"].get<std::string>());
  if (j.contains("bounds")) cfg.bounds = bounds_from_json(j["bounds"]);

  if (flags.seed->count() > 0) cfg.master_seed = flags.seed_value;
  if (flags.out->count() > 0) cfg.out_dir = flags.out_value;
  if (flags.order->count() > 0) cfg.order = flags.order_value;
  if (flags.feature->count() > 0)
    cfg.feature_kind = feature_from_name(flags.feature_value);
  if (flags.workers->count() > 0) cfg.workers = flags.workers_value;
  if (cfg.out_dir.empty())
    throw std::invalid_argument("no output directory (config out_dir or --out)");
  return cfg;
}

int cmd_synth(const std::string& config_path, const FlagOverrides& flags) {
  const hoadoa::SplitConfig cfg =
      split_config_from_json(load_json(config_path), flags);
  progress(1, "synth: %zu rooms x %zu sources -> %s", cfg.room_count,
           cfg.sources_per_room, cfg.out_dir.c_str());

  const bool existed = fs::exists(cfg.out_dir);
  const uint64_t before = existed ? tree_checksum(cfg.out_dir) : 0;
  const hoadoa::SynthReport report = hoadoa::synth_split(cfg);
  const uint64_t after = tree_checksum(cfg.out_dir);

  const std::string manifest_path =
      (fs::path(cfg.out_dir) / "manifest.json").string();
  std::printf("manifest %s\n", manifest_path.c_str());
  std::printf("scenes %zu\n", report.manifest.scenes.size());
  if (existed && before == after) std::printf("no changes\n");

  if (!report.errors.empty()) {
    for (const std::string& e : report.errors)
      std::fprintf(stderr, "error: %s\n", e.c_str());
    return kDataError;
  }
  progress(1, "synth: done, %zu scenes", report.manifest.scenes.size());
  return kOk;
}

int cmd_features(const std::string& manifest_path,
                 const FlagOverrides& flags) {
  hoadoa::Manifest manifest = hoadoa::read_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  const hoadoa::FeatureKind kind =
      flags.feature->count() > 0 ? feature_from_name(flags.feature_value)
                                 : hoadoa::FeatureKind::kIntensity;
  const int order =
      flags.order->count() > 0 ? flags.order_value : manifest.order;
  const int workers = flags.workers->count() > 0 ? flags.workers_value : 1;
  const size_t keep = kind == hoadoa::FeatureKind::kIntensity
                          ? 4
                          : static_cast<size_t>((order + 1) * (order + 1));
  if (static_cast<size_t>((manifest.order + 1) * (manifest.order + 1)) < keep)
    throw std::invalid_argument("split order " +
                                std::to_string(manifest.order) +
                                " cannot serve feature order " +
                                std::to_string(order));
  fs::create_directories(base / "features");

  std::vector<std::vector<std::string>> scene_errors(manifest.scenes.size());
  std::atomic<size_t> written{0};
  parallel_over(manifest.scenes.size(), workers, [&](size_t s) {
    hoadoa::SceneSpec& scene = manifest.scenes[s];
    scene.feature_files.clear();
    for (const std::string& seq : scene.sequence_files) {
      const fs::path wav_path = base / seq;
      if (!fs::exists(wav_path)) {
        scene_errors[s].push_back("missing " + seq);
        continue;
      }
      try {
        const hoadoa::HoaSignal audio =
            truncate_channels(hoadoa::read_wav_hoa(wav_path.string()), keep);
        const hoadoa::ComplexSpectrogram spec =
            hoadoa::stft(audio, hoadoa::StftConfig{});
        const hoadoa::FeatureTensor tensor =
            kind == hoadoa::FeatureKind::kIntensity
                ? hoadoa::intensity_features(spec)
                : hoadoa::magphase_features(spec, order);
        const std::string rel =
            (fs::path("features") / (wav_path.stem().string() + ".hoat"))
                .generic_string();
        hoadoa::write_tensor((base / rel).string(), tensor);
        scene.feature_files.push_back(rel);
        written.fetch_add(1);
      } catch (const std::exception& e) {
        scene_errors[s].push_back(seq + ": " + e.what());
      }
    }
    progress(2, "features: %s done", scene.scene_id.c_str());
  });

  hoadoa::write_manifest(manifest_path, manifest);
  std::printf("tensors %zu\n", written.load());

  bool failed = false;
  for (const auto& errors : scene_errors)
    for (const std::string& e : errors) {
      std::fprintf(stderr, "error: %s\n", e.c_str());
      failed = true;
    }
  progress(1, "features: wrote %zu tensors", written.load());
  return failed ? kDataError : kOk;
}

int cmd_eval(const std::string& manifest_path, const std::string& estimator,
             const FlagOverrides& flags) {
  const hoadoa::Manifest manifest = hoadoa::read_manifest(manifest_path);
  if (manifest.scenes.empty())
    throw std::invalid_argument("manifest lists no scenes");
  const fs::path base = fs::path(manifest_path).parent_path();
  const int order =
      flags.order->count() > 0 ? flags.order_value : manifest.order;
  const int workers = flags.workers->count() > 0 ? flags.workers_value : 1;
  if (order > manifest.order)
    throw std::invalid_argument("split order " +
                                std::to_string(manifest.order) +
                                " cannot serve estimator order " +
                                std::to_string(order));
  const fs::path out_dir = flags.out->count() > 0
                               ? fs::path(flags.out_value)
                               : base / ("eval-" + estimator);
  const std::vector<hoadoa::Direction> grid =
      estimator == "srp" ? hoadoa::fibonacci_grid(1002)
                         : std::vector<hoadoa::Direction>{};

  std::vector<std::vector<hoadoa::EvalRecord>> per_scene(
      manifest.scenes.size());
  std::vector<std::vector<std::string>> scene_errors(manifest.scenes.size());
  parallel_over(manifest.scenes.size(), workers, [&](size_t s) {
    const hoadoa::SceneSpec& scene = manifest.scenes[s];
    for (const std::string& seq : scene.sequence_files) {
      const fs::path wav_path = base / seq;
      if (!fs::exists(wav_path)) {
        scene_errors[s].push_back("missing " + seq);
        continue;
      }
      try {
        hoadoa::HoaSignal audio = hoadoa::read_wav_hoa(wav_path.string());
        if (estimator == "srp")
          audio = truncate_channels(
              audio, static_cast<size_t>((order + 1) * (order + 1)));
        const hoadoa::ComplexSpectrogram spec =
            hoadoa::stft(audio, hoadoa::StftConfig{});
        const hoadoa::Direction predicted =
            estimator == "srp"
                ? hoadoa::srp_doa(
                      hoadoa::steered_power_map(spec, order, grid))
                : hoadoa::pseudo_intensity_doa(spec);
        per_scene[s].push_back(hoadoa::make_eval_record(
            wav_path.stem().string(), predicted, scene.doa_label,
            scene.snr_db));
      } catch (const std::exception& e) {
        scene_errors[s].push_back(seq + ": " + e.what());
      }
    }
    progress(2, "eval: %s done", scene.scene_id.c_str());
  });

  std::vector<hoadoa::EvalRecord> records;
  bool failed = false;
  for (size_t s = 0; s < per_scene.size(); ++s) {
    records.insert(records.end(), per_scene[s].begin(), per_scene[s].end());
    for (const std::string& e : scene_errors[s]) {
      std::fprintf(stderr, "error: %s\n", e.c_str());
      failed = true;
    }
  }
  if (records.empty()) throw std::invalid_argument("no sequences evaluated");

  double lo = records[0].snr_db, hi = records[0].snr_db;
  std::vector<double> errors;
  for (const hoadoa::EvalRecord& r : records) {
    lo = std::min(lo, r.snr_db);
    hi = std::max(hi, r.snr_db);
    errors.push_back(r.angular_error_deg);
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1.0;
  std::vector<double> snr_edges;
  for (int i = 0; i <= 5; ++i)
    snr_edges.push_back(lo + (hi - lo) * i / 5.0);
  snr_edges.back() += 1e-4;

  std::vector<double> tolerances;
  for (double t = 0.0; t <= 180.0; t += 0.5) tolerances.push_back(t);

  fs::create_directories(out_dir);
  hoadoa::write_eval_csv((out_dir / "eval.csv").string(), records);
  hoadoa::write_accuracy_csv((out_dir / "accuracy.csv").string(), tolerances,
                             hoadoa::accuracy_curve(errors, tolerances));
  hoadoa::write_summary_json((out_dir / "summary.json").string(), estimator,
                             records, snr_edges);
  std::printf("summary %s\n", (out_dir / "summary.json").string().c_str());
  std::printf("records %zu\n", records.size());
  std::printf("median_deg %.4f\n", hoadoa::box_stats(errors).median);
  progress(1, "eval: %zu records -> %s", records.size(),
           out_dir.string().c_str());
  return failed ? kDataError : kOk;
}

int cmd_nn_check(uint64_t seed, bool inject_bad_pool) {
  struct ConfigCase {
    const char* label;
    hoadoa::FeatureKind feature;
    int order;
    size_t n_filter;
  };
  const ConfigCase cases[] = {
      {"magphase-1", hoadoa::FeatureKind::kMagphase, 1, 256},
      {"magphase-2", hoadoa::FeatureKind::kMagphase, 2, 256},
      {"magphase-3", hoadoa::FeatureKind::kMagphase, 3, 512},
      {"magphase-4", hoadoa::FeatureKind::kMagphase, 4, 512},
      {"intensity", hoadoa::FeatureKind::kIntensity, 1, 512},
  };
  bool all_ok = true;
  for (size_t k = 0; k < 5; ++k) {
    const ConfigCase& c = cases[k];
    hoadoa::nn::NNConfig cfg;
    cfg.feature = c.feature;
    cfg.order = c.order;
    cfg.n_filter = c.n_filter;
    bool ok = false;
    std::string detail;
    try {
      hoadoa::nn::LayerStack stack = hoadoa::nn::build_crnn(cfg, seed);
      if (inject_bad_pool && k == 0)
        stack.layers[3] = std::make_unique<hoadoa::nn::MaxPoolFreq>(2);
      const auto table = stack.shape_table();
      const size_t nf = cfg.n_filter;
      using hoadoa::nn::Shape;
      ok = table == hoadoa::nn::plan_crnn(cfg) &&
           table[0].second == Shape{50, 512, cfg.dim_in()} &&
           table[4].second == Shape{50, 64, nf} &&
           table[9].second == Shape{50, 8, nf} &&
           table[14].second == Shape{50, 2, nf} &&
           table[16].second == Shape{50, 2 * nf} &&
           table.back().second == Shape{50, 3};
      if (!ok) detail = "shape table mismatch";
    } catch (const std::exception& e) {
      detail = e.what();
    }
    std::printf("shape %s: %s%s%s\n", c.label, ok ? "pass" : "FAIL",
                detail.empty() ? "" : " ", detail.c_str());
    all_ok = all_ok && ok;
  }

  using hoadoa::nn::Tensor;
  const auto random_point = [](hoadoa::nn::Shape shape, uint64_t rng_seed) {
    Tensor t(std::move(shape));
    hoadoa::Rng rng(rng_seed);
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
  };
  hoadoa::Rng init_rng(hoadoa::mix_seed(seed, 99));
  double worst = 0.0;
  const auto report = [&](const char* label, hoadoa::nn::Layer& layer,
                          const Tensor& point) {
    const double err = hoadoa::nn::grad_check(layer, point);
    worst = std::max(worst, err);
    std::printf("grad %s: %.3e %s\n", label, err,
                err < 1e-4 ? "pass" : "FAIL");
  };
  hoadoa::nn::Conv2D conv(3, 4);
  conv.init_params(init_rng);
  report("conv2d", conv, random_point({4, 6, 3}, 1));
  hoadoa::nn::BatchNorm bn(5);
  bn.observe(random_point({6, 4, 5}, 2));
  report("batchnorm", bn, random_point({3, 4, 5}, 3));
  hoadoa::nn::Elu elu;
  report("elu", elu, random_point({6, 9}, 4));
  hoadoa::nn::MaxPoolFreq pool(4);
  report("maxpool", pool, random_point({3, 8, 2}, 5));
  hoadoa::nn::FreqAveragePool avg;
  report("freqpool", avg, random_point({4, 10, 3}, 6));
  hoadoa::nn::BiLstm lstm(3, 2);
  lstm.init_params(init_rng);
  report("bilstm", lstm, random_point({5, 3}, 9));
  hoadoa::nn::TimeDistributedDense dense(6, 5,
                                         hoadoa::nn::Activation::kElu);
  dense.init_params(init_rng);
  report("dense", dense, random_point({7, 6}, 7));
  hoadoa::nn::UnitNorm unit;
  Tensor at_two = random_point({3, 3}, 8);
  for (size_t t = 0; t < 3; ++t) {
    double* row = &at_two.data[t * 3];
    const double r =
        std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
    for (int a = 0; a < 3; ++a) row[a] *= 2.0 / r;
  }
  report("unitnorm", unit, at_two);
  std::printf("grad max: %.3e\n", worst);
  all_ok = all_ok && worst < 1e-4;

  std::printf("nn-check: %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? kOk : kContractError;
}

int cmd_simulate_srir(const std::string& config_path, const std::string& out,
                      const FlagOverrides& flags) {
  const json j = load_json(config_path);
  hoadoa::SrirRequest req;
  const json& room = j.at("room");
  const auto dims = room.at("dims").get<std::vector<double>>();
  if (dims.size() != 3)
    throw std::invalid_argument("room.dims must hold 3 values");
  req.room.dims = {dims[0], dims[1], dims[2]};
  const json& alpha = room.at("absorption");
  if (alpha.is_number()) {
    req.room.absorption.fill(alpha.get<double>());
  } else {
    const auto walls = alpha.get<std::vector<double>>();
    if (walls.size() != 6)
      throw std::invalid_argument("absorption must be scalar or 6 values");
    std::copy(walls.begin(), walls.end(), req.room.absorption.begin());
  }
  req.room.speed_of_sound = room.value("speed_of_sound", 343.0);
  const auto src = j.at("source").get<std::vector<double>>();
  const auto rcv = j.at("receiver").get<std::vector<double>>();
  if (src.size() != 3 || rcv.size() != 3)
    throw std::invalid_argument("source/receiver must hold 3 values");
  req.source = {src[0], src[1], src[2]};
  req.receiver = {rcv[0], rcv[1], rcv[2]};
  req.sample_rate = j.value("sample_rate", 48000.0);
  req.max_reflection_order = j.value("max_reflection_order", 20);
  req.ambisonics_order = flags.order->count() > 0 ? flags.order_value
                                                  : j.value("order", 4);
  const double t60 = hoadoa::sabine_t60(req.room);
  const double seconds = j.value("seconds", std::min(t60, 1.25) + 0.05);
  req.length = static_cast<size_t>(std::llround(seconds * req.sample_rate));

  progress(1, "simulate-srir: %zu samples at %.0f Hz", req.length,
           req.sample_rate);
  const hoadoa::HoaSrir srir = hoadoa::image_source_srir(req);
  fs::create_directories(fs::path(out).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(out).parent_path());
  hoadoa::write_wav(out, srir.hoa);

  ordered_json result;
  result["out"] = out;
  result["azimuth_deg"] =
      round4(srir.doa_label.azimuth() * 180.0 / hoadoa::kPi);
  result["elevation_deg"] =
      round4(srir.doa_label.elevation() * 180.0 / hoadoa::kPi);
  result["distance_m"] = round4(srir.distance);
  result["t60_s"] = round4(t60);
  result["samples"] = req.length;
  std::printf("%s\n", result.dump().c_str());
  return kOk;
}

int cmd_beamwidth(int order) {
  std::printf("order,beamwidth_deg\n");
  if (order > 0) {
    std::printf("%d,%.4f\n", order, hoadoa::beamwidth(order));
  } else {
    for (int k = 1; k <= 4; ++k)
      std::printf("%d,%.4f\n", k, hoadoa::beamwidth(k));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hoadoa: Ambisonics DOA dataset and estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  std::string estimator = "pseudo-intensity";
  std::string srir_out;
  uint64_t nn_seed = 0;
  bool inject_bad_pool = false;
  // Each subcommand binds its own option set; sharing one would leave the
  // stored pointers aimed at whichever subcommand registered last.
  FlagOverrides synth_flags;
  FlagOverrides features_flags;
  FlagOverrides eval_flags;
  FlagOverrides simulate_flags;
  FlagOverrides beam_flags;

  const auto add_common = [](CLI::App* sub, FlagOverrides& flags) {
    flags.seed = sub->add_option("--seed", flags.seed_value, "Master seed");
    flags.out = sub->add_option("--out", flags.out_value, "Output directory");
    flags.order = sub->add_option("--order", flags.order_value,
                                  "Ambisonics order")
                      ->check(CLI::Range(1, 4));
    flags.feature = sub->add_option("--feature", flags.feature_value,
                                    "Feature kind")
                        ->check(CLI::IsMember({"magphase", "intensity"}));
    flags.workers = sub->add_option("--workers", flags.workers_value,
                                    "Worker threads")
                        ->check(CLI::PositiveNumber);
  };

  CLI::App* synth = app.add_subcommand("synth", "Render a dataset split");
  synth->add_option("--config", config_path, "Split configuration JSON")
      ->required();
  add_common(synth, synth_flags);

  CLI::App* features =
      app.add_subcommand("features", "Extract network input tensors");
  features->add_option("--manifest", manifest_path, "Split manifest path")
      ->required();
  add_common(features, features_flags);

  CLI::App* eval = app.add_subcommand("eval", "Run a DOA estimator");
  eval->add_option("--manifest", manifest_path, "Split manifest path")
      ->required();
  eval->add_option("--estimator", estimator, "Estimator")
      ->check(CLI::IsMember({"pseudo-intensity", "srp"}));
  add_common(eval, eval_flags);

  CLI::App* nn_check =
      app.add_subcommand("nn-check", "Verify network shape and gradients");
  nn_check->add_option("--seed", nn_seed, "Parameter seed");
  nn_check->add_flag("--inject-bad-pool", inject_bad_pool)->group("");

  CLI::App* simulate =
      app.add_subcommand("simulate-srir", "Render a single room response");
  simulate->add_option("--config", config_path, "Room configuration JSON")
      ->required();
  simulate->add_option("--wav", srir_out, "Output WAV path")->required();
  add_common(simulate, simulate_flags);

  CLI::App* beam =
      app.add_subcommand("beamwidth", "Print half-power beamwidths");
  add_common(beam, beam_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, synth_flags);
    if (features->parsed()) return cmd_features(manifest_path, features_flags);
    if (eval->parsed()) return cmd_eval(manifest_path, estimator, eval_flags);
    if (nn_check->parsed()) return cmd_nn_check(nn_seed, inject_bad_pool);
    if (simulate->parsed())
      return cmd_simulate_srir(config_path, srir_out, simulate_flags);
    if (beam->parsed())
      return cmd_beamwidth(beam_flags.order->count() > 0
                               ? beam_flags.order_value
                               : 0);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataError;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kContractError;
  }
  return kUsage;
}
