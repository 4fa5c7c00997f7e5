// Command-line front end for the collaborative procedure alignment library.
// Talks to the core exclusively through the public C API.

#include <cpa/cpa.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(cpa_status status) {
  if (status != CPA_OK) {
    throw CliError(std::string(cpa_status_name(status)) + ": " + cpa_last_error());
  }
}

template <typename T, void (*Destroy)(T*)>
class Handle {
 public:
  Handle() = default;
  explicit Handle(T* ptr) : ptr_(ptr) {}
  Handle(Handle&& other) noexcept : ptr_(other.ptr_) { other.ptr_ = nullptr; }
  Handle& operator=(Handle&& other) noexcept {
    if (this != &other) {
      reset();
      ptr_ = other.ptr_;
      other.ptr_ = nullptr;
    }
    return *this;
  }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { reset(); }

  T** out() {
    reset();
    return &ptr_;
  }
  T* get() const { return ptr_; }
  operator T*() const { return ptr_; }

 private:
  void reset() {
    if (ptr_ != nullptr) Destroy(ptr_);
    ptr_ = nullptr;
  }
  T* ptr_ = nullptr;
};

using SequenceHandle = Handle<cpa_sequence, cpa_sequence_destroy>;
using MatrixHandle = Handle<cpa_matrix, cpa_matrix_destroy>;
using PartitionHandle = Handle<cpa_partition, cpa_partition_destroy>;
using StepsHandle = Handle<cpa_steps, cpa_steps_destroy>;
using DatasetHandle = Handle<cpa_dataset, cpa_dataset_destroy>;
using EncoderHandle = Handle<cpa_encoder, cpa_encoder_destroy>;

// Flags shared by the analysis commands.
struct CommonOptions {
  int64_t k = 4;
  std::string policy = "midpoint";
  std::string boundary = "semantic";
  uint64_t seed = 0;
  int64_t max_frames = 256;
};

cpa_sample_policy parse_policy(const std::string& name) {
  if (name == "midpoint") return CPA_POLICY_MIDPOINT;
  if (name == "random") return CPA_POLICY_SEEDED_RANDOM;
  if (name == "mean") return CPA_POLICY_MEAN;
  throw CliError("unknown policy: " + name);
}

cpa_boundary_mode parse_boundary(const std::string& name) {
  if (name == "semantic") return CPA_BOUNDARY_SEMANTIC;
  if (name == "literal") return CPA_BOUNDARY_LITERAL;
  throw CliError("unknown boundary mode: " + name);
}

SequenceHandle load_sequence(const std::string& path, int64_t max_frames) {
  SequenceHandle seq;
  check(cpa_sequence_load_csv(path.c_str(), seq.out()));
  if (cpa_sequence_frames(seq) > max_frames) {
    throw CliError(path + ": " + std::to_string(cpa_sequence_frames(seq)) +
                   " frames exceeds the --max-frames guard of " + std::to_string(max_frames));
  }
  return seq;
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out.good()) throw CliError("cannot write " + path);
  out << doc.dump(2) << "\n";
  if (!out.good()) throw CliError("write failed: " + path);
}

void print_or_write(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_json(doc, out_path);
  }
}

json common_config(const std::string& command, const CommonOptions& options) {
  return json{{"command", command},
              {"k", options.k},
              {"policy", options.policy},
              {"boundary", options.boundary},
              {"seed", options.seed},
              {"max_frames", options.max_frames}};
}

struct ManifestEntry {
  std::string a;
  std::string b;
  int32_t label = 0;
};

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw CliError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw CliError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry entry;
    entry.a = (base / record.at("a").get<std::string>()).string();
    entry.b = (base / record.at("b").get<std::string>()).string();
    const std::string label = record.at("label").get<std::string>();
    if (label != "positive" && label != "negative") {
      throw CliError(path + ":" + std::to_string(line_no) + ": unknown label '" + label + "'");
    }
    entry.label = label == "positive" ? 1 : 0;
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw CliError(path + ": empty manifest");
  return entries;
}

// Loads every distinct path once.
class SequenceCache {
 public:
  explicit SequenceCache(int64_t max_frames) : max_frames_(max_frames) {}

  const cpa_sequence* get(const std::string& path) {
    auto it = cache_.find(path);
    if (it == cache_.end()) {
      it = cache_.emplace(path, load_sequence(path, max_frames_)).first;
    }
    return it->second.get();
  }

 private:
  int64_t max_frames_;
  std::map<std::string, SequenceHandle> cache_;
};

/* ---------------- gen ---------------- */

struct GenOptions {
  std::string spec_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_given = false;
};

std::string sequence_name(int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seq_%04lld.csv", static_cast<long long>(index));
  return buf;
}

int cmd_gen(const GenOptions& options) {
  std::ifstream in(options.spec_path);
  if (!in.good()) throw CliError("cannot open spec " + options.spec_path);
  json spec;
  try {
    spec = json::parse(in);
  } catch (const json::exception& e) {
    throw CliError(options.spec_path + ": " + e.what());
  }

  cpa_gen_config config = {};
  config.procedures = spec.at("procedures").get<int64_t>();
  config.steps = spec.at("steps").get<int64_t>();
  config.dim = spec.at("dim").get<int64_t>();
  config.frames = spec.at("frames").get<int64_t>();
  config.min_duration = spec.at("min_duration").get<int64_t>();
  config.max_duration = spec.at("max_duration").get<int64_t>();
  config.noise_sigma = spec.at("noise_sigma").get<double>();
  const json& pairs = spec.at("pairs");
  config.n_positive = pairs.at("positive").get<int64_t>();
  config.n_negative = pairs.at("negative").get<int64_t>();
  const std::string mode = pairs.value("negative_mode", "step_permutation");
  if (mode == "step_permutation") {
    config.negative_mode = CPA_NEGATIVE_STEP_PERMUTATION;
  } else if (mode == "different_procedure") {
    config.negative_mode = CPA_NEGATIVE_DIFFERENT_PROCEDURE;
  } else {
    throw CliError("unknown negative_mode: " + mode);
  }
  config.seed = options.seed_given ? options.seed : spec.value("seed", 0ULL);

  DatasetHandle dataset;
  check(cpa_dataset_generate(&config, dataset.out()));

  fs::create_directories(options.out_dir);
  const fs::path out_dir(options.out_dir);

  json gt_sequences = json::array();
  for (int64_t i = 0; i < cpa_dataset_sequence_count(dataset); ++i) {
    const std::string name = sequence_name(i);
    check(cpa_sequence_save_csv(cpa_dataset_sequence(dataset, i), (out_dir / name).c_str()));

    std::vector<int64_t> bounds(static_cast<size_t>(cpa_dataset_step_count(dataset, i)));
    check(cpa_dataset_boundaries(dataset, i, bounds.data()));
    gt_sequences.push_back(json{{"path", name},
                                {"boundaries", bounds},
                                {"class", cpa_dataset_class_id(dataset, i)}});
  }

  std::ofstream manifest(out_dir / "manifest.jsonl");
  if (!manifest.good()) throw CliError("cannot write manifest");
  for (int64_t i = 0; i < cpa_dataset_pair_count(dataset); ++i) {
    int64_t a = 0, b = 0;
    int32_t label = 0;
    check(cpa_dataset_pair(dataset, i, &a, &b, &label));
    manifest << json{{"a", sequence_name(a)},
                     {"b", sequence_name(b)},
                     {"label", label == 1 ? "positive" : "negative"}}
                    .dump()
             << "\n";
  }
  manifest.close();

  const json config_echo{{"command", "gen"},
                         {"spec", options.spec_path},
                         {"procedures", config.procedures},
                         {"steps", config.steps},
                         {"dim", config.dim},
                         {"frames", config.frames},
                         {"min_duration", config.min_duration},
                         {"max_duration", config.max_duration},
                         {"noise_sigma", config.noise_sigma},
                         {"positive", config.n_positive},
                         {"negative", config.n_negative},
                         {"negative_mode", mode},
                         {"seed", config.seed}};
  write_json(json{{"config", config_echo}, {"sequences", gt_sequences}},
             (out_dir / "gt.json").string());
  write_json(json{{"config", config_echo},
                  {"sequence_count", cpa_dataset_sequence_count(dataset)},
                  {"pair_count", cpa_dataset_pair_count(dataset)}},
             (out_dir / "gen_report.json").string());
  std::cout << "wrote " << cpa_dataset_sequence_count(dataset) << " sequences and "
            << cpa_dataset_pair_count(dataset) << " pairs to " << options.out_dir << "\n";
  return 0;
}

/* ---------------- segment ---------------- */

struct SegmentOptions {
  std::string path_a;
  std::string path_b;
  CommonOptions common;
  std::string out_path;
  std::string heatmap_path;
};

int cmd_segment(const SegmentOptions& options) {
  const SequenceHandle a = load_sequence(options.path_a, options.common.max_frames);
  const SequenceHandle b = load_sequence(options.path_b, options.common.max_frames);

  PartitionHandle partition;
  check(cpa_mine_steps(a, b, options.common.k, parse_policy(options.common.policy),
                       options.common.seed, partition.out(), nullptr, nullptr));

  json boundaries = json::array();
  for (int64_t i = 0; i < cpa_partition_step_count(partition); ++i) {
    int64_t ba = 0, bb = 0, bx = 0, by = 0;
    check(cpa_partition_block(partition, i, &ba, &bb, &bx, &by));
    boundaries.push_back(json::array({bx, by}));
  }

  json config = common_config("segment", options.common);
  config["a"] = options.path_a;
  config["b"] = options.path_b;
  const json report{{"config", config},
                    {"k", cpa_partition_step_count(partition)},
                    {"boundaries", boundaries},
                    {"score", cpa_partition_score(partition)}};
  print_or_write(report, options.out_path);

  if (!options.heatmap_path.empty()) {
    MatrixHandle matrix;
    check(cpa_relational_matrix(a, b, 1, matrix.out()));
    check(cpa_matrix_save_pgm(matrix, options.heatmap_path.c_str()));
  }
  return 0;
}

/* ---------------- align ---------------- */

struct AlignOptions {
  std::string path_a;
  std::string path_b;
  CommonOptions common;
  std::string out_path;
  std::string heatmap_path;
};

int cmd_align(const AlignOptions& options) {
  const SequenceHandle a = load_sequence(options.path_a, options.common.max_frames);
  const SequenceHandle b = load_sequence(options.path_b, options.common.max_frames);

  StepsHandle steps_a;
  StepsHandle steps_b;
  check(cpa_mine_steps(a, b, options.common.k, parse_policy(options.common.policy),
                       options.common.seed, nullptr, steps_a.out(), steps_b.out()));

  cpa_align_result result = {};
  check(cpa_alignment_distance(a, b, steps_a, steps_b, parse_boundary(options.common.boundary),
                               &result));

  json config = common_config("align", options.common);
  config["a"] = options.path_a;
  config["b"] = options.path_b;
  const json report{{"config", config},
                    {"d_align", result.d_align},
                    {"log_prob_1to2", result.log_prob_1to2},
                    {"log_prob_2to1", result.log_prob_2to1}};
  print_or_write(report, options.out_path);

  if (!options.heatmap_path.empty()) {
    MatrixHandle posteriors;
    check(cpa_alignment_posteriors(a, steps_b, posteriors.out()));
    check(cpa_matrix_save_pgm(posteriors, options.heatmap_path.c_str()));
  }
  return 0;
}

/* ---------------- verify ---------------- */

struct VerifyOptions {
  std::string manifest_path;
  std::string method = "cpa";
  CommonOptions common;
  std::string out_path;
};

int cmd_verify(const VerifyOptions& options) {
  const std::vector<ManifestEntry> entries = load_manifest(options.manifest_path);
  SequenceCache cache(options.common.max_frames);

  cpa_verify_options verify = {};
  if (options.method == "cpa") {
    verify.method = CPA_METHOD_CPA;
  } else if (options.method == "mean-l2") {
    verify.method = CPA_METHOD_MEAN_L2;
  } else {
    throw CliError("unknown method: " + options.method);
  }
  verify.k = options.common.k;
  verify.policy = parse_policy(options.common.policy);
  verify.boundary = parse_boundary(options.common.boundary);
  verify.seed = options.common.seed;

  std::vector<double> distances;
  std::vector<int32_t> labels;
  json rows = json::array();
  for (const ManifestEntry& entry : entries) {
    double distance = 0.0;
    check(cpa_pair_distance(cache.get(entry.a), cache.get(entry.b), &verify, &distance));
    distances.push_back(distance);
    labels.push_back(entry.label);
    rows.push_back(json{{"a", entry.a},
                        {"b", entry.b},
                        {"label", entry.label == 1 ? "positive" : "negative"},
                        {"distance", distance}});
  }

  double auc = 0.0;
  check(cpa_auc(distances.data(), labels.data(), static_cast<int64_t>(distances.size()), &auc));

  json config = common_config("verify", options.common);
  config["manifest"] = options.manifest_path;
  config["method"] = options.method;
  print_or_write(json{{"config", config}, {"pairs", rows}, {"auc", auc}}, options.out_path);
  return 0;
}

/* ---------------- train-demo ---------------- */

struct TrainOptions {
  std::string manifest_path;
  CommonOptions common;
  int64_t epochs = 10;
  int64_t out_dim = 8;
  double learning_rate = 0.05;
  std::string out_dir = ".";
};

double encoded_auc(const cpa_encoder* encoder, const std::vector<ManifestEntry>& entries,
                   SequenceCache& cache, const cpa_verify_options& verify) {
  std::vector<double> distances;
  std::vector<int32_t> labels;
  for (const ManifestEntry& entry : entries) {
    SequenceHandle ea;
    SequenceHandle eb;
    check(cpa_encoder_apply(encoder, cache.get(entry.a), ea.out()));
    check(cpa_encoder_apply(encoder, cache.get(entry.b), eb.out()));
    double distance = 0.0;
    check(cpa_pair_distance(ea, eb, &verify, &distance));
    distances.push_back(distance);
    labels.push_back(entry.label);
  }
  double auc = 0.0;
  check(cpa_auc(distances.data(), labels.data(), static_cast<int64_t>(distances.size()), &auc));
  return auc;
}

int cmd_train_demo(const TrainOptions& options) {
  const std::vector<ManifestEntry> entries = load_manifest(options.manifest_path);
  SequenceCache cache(options.common.max_frames);

  // index the distinct sequences
  std::map<std::string, int64_t> index;
  std::vector<const cpa_sequence*> sequences;
  auto intern = [&](const std::string& path) {
    auto it = index.find(path);
    if (it == index.end()) {
      it = index.emplace(path, static_cast<int64_t>(sequences.size())).first;
      sequences.push_back(cache.get(path));
    }
    return it->second;
  };

  std::vector<int64_t> pair_a, pair_b;
  std::vector<int32_t> labels;
  for (const ManifestEntry& entry : entries) {
    pair_a.push_back(intern(entry.a));
    pair_b.push_back(intern(entry.b));
    labels.push_back(entry.label);
  }

  cpa_train_config config = {};
  config.k = options.common.k;
  config.epochs = options.epochs;
  config.out_dim = options.out_dim;
  config.learning_rate = options.learning_rate;
  config.seed = options.common.seed;
  config.policy = parse_policy(options.common.policy);
  config.step_weight = 1.0;
  config.align_weight = 1.0;
  config.task_weight = 1.0;
  config.task = CPA_TASK_NONE;

  cpa_verify_options verify = {};
  verify.method = CPA_METHOD_CPA;
  verify.k = options.common.k;
  verify.policy = parse_policy(options.common.policy);
  verify.boundary = parse_boundary(options.common.boundary);
  verify.seed = options.common.seed;

  const int64_t in_dim = cpa_sequence_dim(sequences.front());
  EncoderHandle initial;
  check(cpa_encoder_init(in_dim, options.out_dim, options.common.seed, initial.out()));
  const double auc_before = encoded_auc(initial, entries, cache, verify);

  std::vector<double> totals(static_cast<size_t>(options.epochs));
  std::vector<double> step_losses(static_cast<size_t>(options.epochs));
  std::vector<double> align_losses(static_cast<size_t>(options.epochs));
  std::vector<double> task_losses(static_cast<size_t>(options.epochs));
  EncoderHandle trained;
  check(cpa_train_linear_encoder(sequences.data(), static_cast<int64_t>(sequences.size()),
                                 pair_a.data(), pair_b.data(), labels.data(),
                                 static_cast<int64_t>(pair_a.size()), nullptr, &config,
                                 trained.out(), totals.data(), step_losses.data(),
                                 align_losses.data(), task_losses.data()));
  const double auc_after = encoded_auc(trained, entries, cache, verify);

  fs::create_directories(options.out_dir);
  const fs::path out_dir(options.out_dir);

  {
    std::ofstream curve(out_dir / "loss_curve.csv");
    if (!curve.good()) throw CliError("cannot write loss_curve.csv");
    curve << "epoch,total,step,align,task\n";
    char buf[64];
    for (int64_t e = 0; e < options.epochs; ++e) {
      curve << (e + 1);
      for (double v : {totals[static_cast<size_t>(e)], step_losses[static_cast<size_t>(e)],
                       align_losses[static_cast<size_t>(e)], task_losses[static_cast<size_t>(e)]}) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        curve << buf;
      }
      curve << "\n";
    }
  }

  {
    std::ofstream weights(out_dir / "weights.csv");
    if (!weights.good()) throw CliError("cannot write weights.csv");
    std::vector<double> w(static_cast<size_t>(in_dim * options.out_dim));
    check(cpa_encoder_copy_weights(trained, w.data()));
    char buf[64];
    for (int64_t i = 0; i < in_dim; ++i) {
      for (int64_t j = 0; j < options.out_dim; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g",
                      w[static_cast<size_t>(i * options.out_dim + j)]);
        weights << buf << (j + 1 < options.out_dim ? "," : "\n");
      }
    }
  }

  json config_echo = common_config("train-demo", options.common);
  config_echo["manifest"] = options.manifest_path;
  config_echo["epochs"] = options.epochs;
  config_echo["out_dim"] = options.out_dim;
  config_echo["learning_rate"] = options.learning_rate;
  write_json(json{{"config", config_echo},
                  {"auc_before", auc_before},
                  {"auc_after", auc_after},
                  {"final_loss", totals.back()},
                  {"first_loss", totals.front()}},
             (out_dir / "train_report.json").string());
  std::cout << "auc before " << auc_before << ", after " << auc_after << "\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& options, bool with_boundary = true) {
  cmd->add_option("--k", options.k, "number of steps")->check(CLI::PositiveNumber);
  cmd->add_option("--policy", options.policy, "step sampling policy")
      ->check(CLI::IsMember({"midpoint", "random", "mean"}));
  if (with_boundary) {
    cmd->add_option("--boundary", options.boundary, "alignment boundary mode")
        ->check(CLI::IsMember({"semantic", "literal"}));
  }
  cmd->add_option("--seed", options.seed, "random seed");
  cmd->add_option("--max-frames", options.max_frames, "input length guard")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collaborative procedure alignment for feature sequences"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic benchmark");
  gen_cmd->add_option("--spec", gen.spec_path, "generation spec (json)")->required();
  gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "override the spec seed");

  SegmentOptions segment;
  CLI::App* segment_cmd = app.add_subcommand("segment", "mine joint step boundaries of a pair");
  segment_cmd->add_option("--a", segment.path_a, "first sequence (fseq-csv)")->required();
  segment_cmd->add_option("--b", segment.path_b, "second sequence (fseq-csv)")->required();
  add_common(segment_cmd, segment.common, /*with_boundary=*/false);
  segment_cmd->add_option("--out", segment.out_path, "report path (stdout if omitted)");
  segment_cmd->add_option("--heatmap", segment.heatmap_path, "similarity heatmap (pgm)");

  AlignOptions align;
  CLI::App* align_cmd = app.add_subcommand("align", "score a pair by frame-to-step alignment");
  align_cmd->add_option("--a", align.path_a, "first sequence (fseq-csv)")->required();
  align_cmd->add_option("--b", align.path_b, "second sequence (fseq-csv)")->required();
  add_common(align_cmd, align.common);
  align_cmd->add_option("--out", align.out_path, "report path (stdout if omitted)");
  align_cmd->add_option("--heatmap", align.heatmap_path, "posterior heatmap (pgm)");

  VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "batch verification over a manifest");
  verify_cmd->add_option("--manifest", verify.manifest_path, "pair manifest (jsonl)")->required();
  verify_cmd->add_option("--method", verify.method, "distance method")
      ->check(CLI::IsMember({"cpa", "mean-l2"}));
  add_common(verify_cmd, verify.common);
  verify_cmd->add_option("--out", verify.out_path, "report path (stdout if omitted)");

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train-demo", "fit a linear encoder on positives");
  train_cmd->add_option("--manifest", train.manifest_path, "pair manifest (jsonl)")->required();
  add_common(train_cmd, train.common);
  train_cmd->add_option("--epochs", train.epochs, "training epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--out-dim", train.out_dim, "encoder output dimension")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train.learning_rate, "learning rate");
  train_cmd->add_option("--out", train.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      gen.seed_given = gen_cmd->count("--seed") > 0;
      return cmd_gen(gen);
    }
    if (segment_cmd->parsed()) return cmd_segment(segment);
    if (align_cmd->parsed()) return cmd_align(align);
    if (verify_cmd->parsed()) return cmd_verify(verify);
    if (train_cmd->parsed()) return cmd_train_demo(train);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
