#include "cli/commands.hpp"

#include "semvol/ablation.hpp"
#include "semvol/encoder.hpp"
#include "semvol/error.hpp"
#include "semvol/io_formats.hpp"
#include "semvol/log.hpp"
#include "semvol/loss.hpp"
#include "semvol/pca.hpp"
#include "semvol/presets.hpp"
#include "semvol/random.hpp"
#include "semvol/vocabulary.hpp"
#include "semvol/volume.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace semvol::cli {

namespace fs = std::filesystem;

namespace {

struct ReduceOptions {
  std::string vectors;
  std::vector<std::string> seeds;
  std::string expansion;
  std::size_t vocab_size = 100;
  std::string method = "encoder";
  std::size_t dim = 16;
  double ring_weight = 0.1;
  double ring_radius = 1.0;
  double learning_rate = 1e-3;
  std::size_t epochs = 2000;
  std::string normalization = "ring_loss";
  std::size_t early_stop_window = 50;
  double early_stop_delta = 1e-6;
  std::size_t pca_remove = 2;
  std::uint64_t seed = 0;
  bool merge_case_variants = false;
  std::string out_dir = ".";
};

struct EncodeOptions {
  std::vector<std::string> keypoints;
  std::string mode = "semantic";
  std::string table;
  std::string classes;
  std::size_t height = 56;
  std::size_t width = 56;
  std::size_t frames = 48;
  double sigma = 0.6;
  double threshold = 0.1;
  double tau = 1e-4;
  std::string aggregation = "addition";
  std::string combine = "max";
  std::string dtype = "f32";
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t jobs = 1;
};

struct SimilarityOptions {
  std::string table;
  std::string terms_file;
  std::vector<std::string> terms;
  std::string compare;
  std::string out;
};

struct AblateOptions {
  std::string kind;
  std::vector<std::string> names;
  std::string table;
  std::string joints;
  std::string objects;
  std::string pairing;
  std::size_t dim = 16;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

std::string shortest(double v) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, ptr);
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw DataError(what + " not found: " + path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw DataError("cannot create output directory " + dir);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// --- reduce -----------------------------------------------------------------

int cmd_reduce(const ReduceOptions& o, std::ostream& out) {
  require_file(o.vectors, "vector file");
  for (const auto& s : o.seeds) require_file(s, "seed file");
  if (!o.expansion.empty()) require_file(o.expansion, "expansion file");
  if (o.method != "encoder" && o.method != "pca") {
    throw DataError("unknown reduction method '" + o.method + "'");
  }
  ensure_dir(o.out_dir);

  std::vector<CompoundTerm> seeds;
  for (const auto& s : o.seeds) {
    auto terms = load_term_list(s);
    seeds.insert(seeds.end(), terms.begin(), terms.end());
  }
  std::vector<std::string> expansion;
  if (!o.expansion.empty()) expansion = load_word_list(o.expansion);

  std::unordered_set<std::string> keep(expansion.begin(), expansion.end());
  for (const auto& s : seeds) {
    keep.insert(s.key());
    keep.insert(s.components().begin(), s.components().end());
  }
  VecReadOptions read_options;
  read_options.keep = &keep;
  read_options.merge_case_variants = o.merge_case_variants;
  const EmbeddingTable original = load_vec_table(o.vectors, read_options);
  log()->info("loaded {} of the needed terms ({}-d)", original.size(), original.dimension());

  const Vocabulary vocab = build_vocabulary(seeds, expansion, o.vocab_size, original);
  {
    auto vocab_out = open_out(fs::path(o.out_dir) / "vocabulary.txt");
    for (const auto& e : vocab.entries()) vocab_out << e.display() << '\n';
  }

  EmbeddingTable reduced(o.dim);
  if (o.method == "pca") {
    reduced = pca_reduce(original, vocab, o.dim, o.pca_remove);
  } else {
    TrainConfig cfg;
    cfg.output_dim = o.dim;
    cfg.ring_loss_weight = o.ring_weight;
    cfg.ring_radius = o.ring_radius;
    cfg.learning_rate = o.learning_rate;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    cfg.normalization = parse_normalization(o.normalization);
    cfg.early_stop_window = o.early_stop_window;
    cfg.early_stop_delta = o.early_stop_delta;
    TrainResult result = train_encoder(original, vocab, cfg, [](const EpochLoss& e) {
      if (e.epoch % 100 == 0) {
        log()->info("epoch {} pair {:.6f} ring {:.6f}", e.epoch, e.pair_loss, e.ring_penalty);
      }
    });
    save_checkpoint(fs::path(o.out_dir) / "encoder.ckpt", result.model, cfg);
    auto log_out = open_out(fs::path(o.out_dir) / "train_log.csv");
    write_training_log(log_out, result.report);
    out << "epochs=" << result.report.history.size() << '\n'
        << "token_pair_loss=" << shortest(result.report.final_pair_loss) << '\n'
        << "ring_penalty=" << shortest(result.report.final_ring_penalty) << '\n';
    reduced = std::move(result.reduced);
  }
  save_vec_table(fs::path(o.out_dir) / "reduced.vec", reduced);
  out << "vocabulary=" << vocab.size() << '\n'
      << "tokens=" << reduced.size() << '\n'
      << "dimension=" << reduced.dimension() << '\n'
      << "vocabulary_pair_loss=" << shortest(pairwise_cosine_loss(original, reduced, vocab))
      << '\n';
  return kOk;
}

// --- encode -----------------------------------------------------------------

std::vector<CompoundTerm> resolve_classes(const std::string& source) {
  if (auto preset = presets::class_list(source)) return *preset;
  require_file(source, "class list");
  return load_term_list(source);
}

int cmd_encode(const EncodeOptions& o, std::ostream& out) {
  VolumeConfig cfg;
  cfg.height = o.height;
  cfg.width = o.width;
  cfg.frames = o.frames;
  cfg.sigma = o.sigma;
  cfg.score_threshold = o.threshold;
  cfg.influence_epsilon = o.tau;
  cfg.mode = parse_volume_mode(o.mode);
  cfg.aggregation = parse_aggregation(o.aggregation);
  cfg.instance_combine = parse_instance_combine(o.combine);
  cfg.validate();
  if (o.dtype != "f32" && o.dtype != "f64") throw DataError("dtype must be f32 or f64");
  const DType dtype = o.dtype == "f32" ? DType::F32 : DType::F64;

  std::optional<EmbeddingTable> table;
  std::vector<CompoundTerm> classes;
  if (cfg.mode == VolumeMode::Semantic) {
    if (o.table.empty()) throw DataError("semantic mode needs --table");
    require_file(o.table, "embedding table");
    table = load_vec_table(o.table);
  } else {
    if (o.classes.empty()) throw DataError("onehot mode needs --classes");
    classes = resolve_classes(o.classes);
  }

  std::vector<KeypointSequence> sequences;
  std::set<std::string> stems;
  for (const auto& path : o.keypoints) {
    require_file(path, "keypoint file");
    sequences.push_back(load_keypoints_jsonl(path));
    if (sequences.back().frames.empty()) throw DataError("keypoint file has no frames: " + path);
    if (!stems.insert(fs::path(path).stem().string()).second) {
      throw DataError("two keypoint files share the output name " + fs::path(path).stem().string());
    }
  }

  // Every unresolvable name across all inputs, reported in one go.
  std::set<std::string> class_keys;
  for (const auto& c : classes) class_keys.insert(c.key());
  std::map<std::string, std::set<std::string>> missing;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    for (const auto& frame : sequences[i].frames) {
      for (const auto& k : frame) {
        bool ok = true;
        if (table) {
          try {
            compose_compound(*table, k.name);
          } catch (const DataError&) {
            ok = false;
          }
        } else {
          ok = class_keys.contains(k.name.key());
        }
        if (!ok) missing[k.name.display()].insert(o.keypoints[i]);
      }
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " unresolvable keypoint name(s):";
    for (const auto& [name, files] : missing) {
      msg << "\n  '" << name << "' in";
      for (const auto& f : files) msg << ' ' << f;
    }
    throw DataError(msg.str());
  }

  ensure_dir(o.out_dir);
  std::vector<std::string> outputs(sequences.size());
  std::vector<std::exception_ptr> errors(sequences.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < sequences.size();) {
      try {
        const std::string stem = fs::path(o.keypoints[i]).stem().string();
        std::optional<std::uint64_t> seed;
        if (o.seed) seed = derive_seed(*o.seed, "frames/" + stem);
        const KeypointSequence prepared = prepare_sequence(sequences[i], cfg, seed);
        const Volume volume = table ? build_semantic_volume(prepared, *table, cfg)
                                    : build_onehot_volume(prepared, classes, cfg);
        const fs::path target = fs::path(o.out_dir) / (stem + ".svol");
        save_volume(target, volume, dtype);
        std::ostringstream line;
        line << target.string() << " channels=" << volume.channels()
             << " frames=" << volume.frames() << " height=" << volume.height()
             << " width=" << volume.width();
        outputs[i] = line.str();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(o.jobs, 1, sequences.size());
  std::vector<std::jthread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& line : outputs) out << line << '\n';
  return kOk;
}

// --- similarity -------------------------------------------------------------

int cmd_similarity(const SimilarityOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.table, "embedding table");
  std::vector<CompoundTerm> terms;
  if (!o.terms_file.empty()) {
    require_file(o.terms_file, "term list");
    terms = load_term_list(o.terms_file);
  }
  for (const auto& t : o.terms) terms.push_back(CompoundTerm::parse(t));
  if (terms.empty()) throw DataError("no terms given (use --terms-file or --term)");
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (!seen.insert(t.key()).second) throw DataError("duplicate term '" + t.display() + "'");
  }

  const EmbeddingTable table = load_vec_table(o.table);
  const Matrix matrix = pairwise_cosine_matrix(table, terms);
  std::vector<std::string> labels;
  for (const auto& t : terms) labels.push_back(t.display());
  const std::string csv = export_similarity_csv(matrix, labels);
  if (o.out.empty()) {
    out << csv;
  } else {
    auto file = open_out(o.out);
    file << csv;
  }

  if (!o.compare.empty()) {
    require_file(o.compare, "comparison table");
    const EmbeddingTable reference = load_vec_table(o.compare);
    const double loss =
        pairwise_cosine_loss(pairwise_cosine_matrix(reference, terms), matrix);
    // Keep stdout pure CSV when the matrix goes there.
    std::ostream& report = o.out.empty() ? err : out;
    report << "mean_squared_cosine_difference=" << shortest(loss) << '\n';
  }
  return kOk;
}

// --- ablate -----------------------------------------------------------------

std::vector<CompoundTerm> load_names(const std::vector<std::string>& files) {
  std::vector<CompoundTerm> names;
  for (const auto& f : files) {
    require_file(f, "name list");
    auto part = load_term_list(f);
    names.insert(names.end(), part.begin(), part.end());
  }
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n.key()).second) throw DataError("duplicate name '" + n.display() + "'");
  }
  return names;
}

int cmd_ablate(const AblateOptions& o, std::ostream& out) {
  const std::string manifest_path = o.manifest.empty() ? o.out + ".manifest.txt" : o.manifest;
  std::ostringstream manifest;
  manifest << "# kind=" << o.kind << '\n';
  EmbeddingTable result(o.dim > 0 ? o.dim : 1);

  if (o.kind == "random") {
    const auto names = load_names(o.names);
    result = generate_random_table(names, o.dim, o.seed);
    manifest << "# seed=" << o.seed << " dim=" << o.dim << '\n';
    for (const auto& n : names) manifest << n.display() << "\trandom\n";
  } else if (o.kind == "permutate") {
    if (o.table.empty()) throw DataError("permutate needs --table");
    require_file(o.table, "embedding table");
    const auto names = load_names(o.names);
    const EmbeddingTable reduced = load_vec_table(o.table);
    PermutationResult perm = permutate_table(reduced, names, o.seed);
    manifest << "# seed=" << o.seed << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
      manifest << names[i].display() << '\t' << names[perm.source[i]].display() << '\n';
    }
    result = std::move(perm.table);
  } else if (o.kind == "switch") {
    if (o.pairing.empty()) throw DataError("switch needs --pairing");
    require_file(o.pairing, "pairing file");
    if (o.table.empty()) throw DataError("switch needs --table");
    require_file(o.table, "embedding table");
    if (o.joints.empty() || o.objects.empty()) throw DataError("switch needs --joints and --objects");
    const auto joints = load_names({o.joints});
    const auto objects = load_names({o.objects});
    const Pairing pairing = load_pairing(o.pairing);
    result = switch_table(load_vec_table(o.table), joints, objects, pairing);
    if (pairing.cyclic) manifest << "# cyclic\n";
    std::map<std::string, std::string> first_joint;
    for (const auto& [j, obj] : pairing.pairs) {
      manifest << j.display() << '\t' << obj.display() << '\n';
      first_joint.emplace(obj.key(), j.display());
    }
    for (const auto& obj : objects) {
      manifest << obj.display() << '\t' << first_joint.at(obj.key()) << '\n';
    }
  } else {
    throw DataError("unknown ablation kind '" + o.kind + "' (random, permutate, switch)");
  }

  save_vec_table(o.out, result);
  auto m = open_out(manifest_path);
  m << manifest.str();
  out << o.out << " entries=" << result.size() << " manifest=" << manifest_path << '\n';
  return kOk;
}

// --- configuration ------------------------------------------------------------

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string{};
      return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

bool given_on_command_line(const std::vector<std::string>& args, const CLI::Option* opt) {
  for (const auto& name : opt->get_lnames()) {
    const std::string flag = "--" + name;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
  }
  for (const auto& name : opt->get_snames()) {
    for (const auto& a : args) {
      if (a == "-" + name) return true;
    }
  }
  return false;
}

/// Splices config-file values in front of the subcommand's own arguments for
/// every option not given on the command line, so flags win over the file and
/// the file wins over built-in defaults.
std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::size_t sub_pos = 0;
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size() && !sub; ++i) {
    for (CLI::App* candidate : app.get_subcommands({})) {
      if (candidate->check_name(args[i])) {
        sub = candidate;
        sub_pos = i;
        break;
      }
    }
  }
  if (!sub) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config_path)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw CLI::ValidationError("config", "unknown key '" + key + "' for " + sub->get_name());
    if (given_on_command_line(args, opt)) continue;
    if (opt->get_expected_max() == 0) {
      injected.push_back("--" + key + "=" + value);
      continue;
    }
    std::stringstream values(value);
    for (std::string item; std::getline(values, item, ',');) {
      injected.push_back("--" + key);
      injected.push_back(item);
    }
  }
  std::vector<std::string> merged(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
  return merged;
}

void print_config(const CLI::App& sub, std::ostream& out) {
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "print-config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
      if (opt->get_expected_max() == 0) value = "true";
    } else {
      value = opt->get_default_str();
      if (opt->get_expected_max() == 0 && value.empty()) value = "false";
    }
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    out << key << '=' << value << '\n';
  }
}

void add_common(CLI::App* sub, std::string& config, bool& print) {
  sub->add_option("--config", config, "key=value configuration file (flags take precedence)");
  sub->add_flag("--print-config", print, "Print the resolved configuration and exit");
}

void add_reduce_options(CLI::App* sub, ReduceOptions& o, bool pca_alias) {
  sub->add_option("--vectors", o.vectors, "Pretrained text vector file (N D header)")->required();
  sub->add_option("--seeds", o.seeds, "Seed term list(s), one compound term per line")->required();
  sub->add_option("--expansion", o.expansion, "Expansion word list, one token per line");
  sub->add_option("--vocab-size", o.vocab_size, "Vocabulary size target");
  if (!pca_alias) sub->add_option("--method", o.method, "encoder or pca");
  sub->add_option("--dim", o.dim, "Output dimension");
  sub->add_option("--ring-weight", o.ring_weight, "Ring Loss weight");
  sub->add_option("--ring-radius", o.ring_radius, "Ring Loss target radius");
  sub->add_option("--lr", o.learning_rate, "Adam learning rate");
  sub->add_option("--epochs", o.epochs, "Maximum epochs");
  sub->add_option("--normalization", o.normalization, "ring_loss, post_hoc_unit or none");
  sub->add_option("--early-stop-window", o.early_stop_window, "Early stop window (0 disables)");
  sub->add_option("--early-stop-delta", o.early_stop_delta, "Minimum improvement per window");
  sub->add_option("--pca-remove", o.pca_remove, "Dominant directions removed by PCA post-processing");
  sub->add_option("--seed", o.seed, "Master random seed");
  sub->add_flag("--merge-case-variants", o.merge_case_variants,
                "Keep the first of rows that collide after lowercasing");
  sub->add_option("--out-dir", o.out_dir, "Output directory");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic heatmap volumes from keypoint sequences and word vectors", "semvol"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  std::string config;
  bool print = false;

  ReduceOptions reduce;
  auto* reduce_cmd = app.add_subcommand("reduce", "Learn low-dimensional word vectors");
  add_common(reduce_cmd, config, print);
  add_reduce_options(reduce_cmd, reduce, false);

  auto* pca_cmd = app.add_subcommand("pca", "Alias for reduce --method pca");
  add_common(pca_cmd, config, print);
  add_reduce_options(pca_cmd, reduce, true);

  EncodeOptions encode;
  std::uint64_t encode_seed = 0;
  auto* encode_cmd = app.add_subcommand("encode", "Render keypoint sequences into volumes");
  add_common(encode_cmd, config, print);
  encode_cmd->add_option("--keypoints", encode.keypoints, "Keypoint JSON Lines file(s)")->required();
  encode_cmd->add_option("--mode", encode.mode, "semantic or onehot");
  encode_cmd->add_option("--table", encode.table, "Reduced vector table (semantic mode)");
  encode_cmd->add_option("--classes", encode.classes,
                         "Class list file or preset 17, 32, 17+7, 32+12 (onehot mode)");
  encode_cmd->add_option("--height", encode.height, "Grid height");
  encode_cmd->add_option("--width", encode.width, "Grid width");
  encode_cmd->add_option("--frames", encode.frames, "Output frame count T");
  encode_cmd->add_option("--sigma", encode.sigma, "Gaussian standard deviation (grid units)");
  encode_cmd->add_option("--threshold", encode.threshold, "Keypoint score threshold (kept if >=)");
  encode_cmd->add_option("--tau", encode.tau, "Kernel influence cutoff (0 = exact)");
  encode_cmd->add_option("--aggregation", encode.aggregation,
                         "addition, normalized_sum or weighted_norm");
  encode_cmd->add_option("--combine", encode.combine, "One-hot instance combination: max or sum");
  encode_cmd->add_option("--dtype", encode.dtype, "f32 or f64");
  auto* encode_seed_opt =
      encode_cmd->add_option("--seed", encode_seed, "Jitter frame sampling with this seed");
  encode_cmd->add_option("--out-dir", encode.out_dir, "Output directory");
  encode_cmd->add_option("--jobs", encode.jobs, "Sequences rendered in parallel");

  SimilarityOptions similarity;
  auto* similarity_cmd = app.add_subcommand("similarity", "Cosine similarity matrix as CSV");
  add_common(similarity_cmd, config, print);
  similarity_cmd->add_option("--table", similarity.table, "Vector table")->required();
  similarity_cmd->add_option("--terms-file", similarity.terms_file, "Term list file");
  similarity_cmd->add_option("--term", similarity.terms, "Term (repeatable)");
  similarity_cmd->add_option("--compare", similarity.compare,
                             "Reference table; prints the mean squared cosine difference");
  similarity_cmd->add_option("--out", similarity.out, "CSV output (default stdout)");

  AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Write a random, permuted or switched table");
  add_common(ablate_cmd, config, print);
  ablate_cmd->add_option("--kind", ablate.kind, "random, permutate or switch")->required();
  ablate_cmd->add_option("--names", ablate.names, "Name list file(s) (random, permutate)");
  ablate_cmd->add_option("--table", ablate.table, "Reduced table (permutate, switch)");
  ablate_cmd->add_option("--joints", ablate.joints, "Joint name list (switch)");
  ablate_cmd->add_option("--objects", ablate.objects, "Object name list (switch)");
  ablate_cmd->add_option("--pairing", ablate.pairing, "Joint = object pairing file (switch)");
  ablate_cmd->add_option("--dim", ablate.dim, "Dimension (random)");
  ablate_cmd->add_option("--seed", ablate.seed, "Random seed");
  ablate_cmd->add_option("--out", ablate.out, "Output .vec file")->required();
  ablate_cmd->add_option("--manifest", ablate.manifest, "Manifest path (default <out>.manifest.txt)");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    const std::vector<std::string> args = apply_config(raw_args, app);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "semvol: " << e.what() << '\n';
    return kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  if (print) {
    out << "command=" << active->get_name() << '\n';
    print_config(*active, out);
    return kOk;
  }
  if (encode_seed_opt->count() > 0) encode.seed = encode_seed;

  try {
    if (active == reduce_cmd) return cmd_reduce(reduce, out);
    if (active == pca_cmd) {
      reduce.method = "pca";
      return cmd_reduce(reduce, out);
    }
    if (active == encode_cmd) return cmd_encode(encode, out);
    if (active == similarity_cmd) return cmd_similarity(similarity, out, err);
    if (active == ablate_cmd) return cmd_ablate(ablate, out);
  } catch (const NumericError& e) {
    err << "semvol: numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "semvol: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace semvol::cli
