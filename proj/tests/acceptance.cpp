// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
#include "cli/commands.hpp"
#include "synthetic/synthetic.hpp"

#include "semvol/ablation.hpp"
#include "semvol/encoder.hpp"
#include "semvol/io_formats.hpp"
#include "semvol/loss.hpp"
#include "semvol/pca.hpp"
#include "semvol/presets.hpp"
#include "semvol/vocabulary.hpp"
#include "semvol/volume.hpp"

#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace semvol;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

const std::string kData = SEMVOL_DATA_DIR;

struct Task {
  EmbeddingTable original{300};
  Vocabulary vocab;
};

const Task& task() {
  static const Task t = [] {
    Task out;
    out.original =
        synthetic::make_table(synthetic::load_categories(kData + "/vocab/categories.txt"));
    auto seeds = load_term_list(kData + "/seeds/joints32.txt");
    const auto objects = load_term_list(kData + "/seeds/objects12.txt");
    seeds.insert(seeds.end(), objects.begin(), objects.end());
    out.vocab = build_vocabulary(seeds, load_word_list(kData + "/vocab/expansion.txt"), 100,
                                 out.original);
    return out;
  }();
  return t;
}

struct Trained {
  TrainResult result;
  double vocab_loss = 0.0;
  double seconds = 0.0;
};

const Trained& trained() {
  static const Trained t = [] {
    TrainConfig cfg;
    const auto start = std::chrono::steady_clock::now();
    Trained out{train_encoder(task().original, task().vocab, cfg), 0.0, 0.0};
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.vocab_loss = pairwise_cosine_loss(task().original, out.result.reduced, task().vocab);
    return out;
  }();
  return t;
}

Outcome embedding_preservation() {
  const auto& t = trained();
  double norm_sum = 0.0;
  for (std::size_t i = 0; i < t.result.reduced.size(); ++i) norm_sum += t.result.reduced.vector(i).norm();
  const double mean_norm = norm_sum / static_cast<double>(t.result.reduced.size());
  const bool pass = t.vocab_loss <= 0.02 && t.seconds <= 300.0 && mean_norm >= 0.9 &&
                    mean_norm <= 1.1;
  return {pass, "vocabulary=" + std::to_string(task().vocab.size()) +
                    " loss=" + fmt(t.vocab_loss) + " (<= 0.02) mean_norm=" + fmt(mean_norm) +
                    " epochs=" + std::to_string(t.result.report.history.size()) +
                    " time=" + fmt(t.seconds, 3) + "s (<= 300s)"};
}

Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  const auto tokens = flatten_tokens(task().vocab);
  const std::size_t n = 24;
  Matrix inputs(300, static_cast<Eigen::Index>(n));
  std::vector<Vector> cols;
  for (std::size_t j = 0; j < n; ++j) {
    cols.push_back(task().original.at(tokens[j]));
    inputs.col(static_cast<Eigen::Index>(j)) = cols.back();
  }
  const Matrix target = cosine_matrix(cols);
  auto model = EncoderModel::he_uniform({300, 200, 150, 16}, 17);
  for (auto& layer : model.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.05 * rng.normal();
  }
  const double ring_weight = 0.1;
  EncoderModel grad;
  evaluate_objective(model, inputs, target, ring_weight, 1.0, &grad);

  double worst = 0.0;
  std::size_t checked = 0;
  const std::size_t per_layer = 120;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& layer = model.layers()[l];
    for (std::size_t s = 0; s < per_layer; ++s) {
      testing::ParameterRef p{l, false, 0, 0};
      // Roughly one in ten samples is a bias.
      p.is_bias = rng.below(10) == 0;
      p.row = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(layer.weight.rows())));
      p.col = p.is_bias ? 0
                        : static_cast<Eigen::Index>(
                              rng.below(static_cast<std::uint64_t>(layer.weight.cols())));
      const double numeric =
          testing::central_difference(model, p, inputs, target, ring_weight, 1.0, 1e-5);
      const double analytic = testing::parameter(grad, p);
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-4, "parameters=" + std::to_string(checked) + " (" +
                             std::to_string(per_layer) + " per layer) max_rel_err=" + fmt(worst) +
                             " (<= 1e-4) time=" + fmt(seconds, 3) + "s"};
}

Outcome pca_ordering() {
  const double encoder = trained().vocab_loss;
  const double pca = pairwise_cosine_loss(task().original,
                                          pca_reduce(task().original, task().vocab, 16, 2),
                                          task().vocab);
  return {pca > encoder, "pca_loss=" + fmt(pca) + " encoder_loss=" + fmt(encoder)};
}

Outcome kernel_exactness() {
  const double at_sigma = gaussian_weight(0.6, 0.0, 0.0, 0.0, 0.6, 1.0);
  const double centre = gaussian_weight(10, 20, 10, 20, 0.6, 0.6);
  const double expected = 0.60653065971263342;  // exp(-1/2)
  const bool pass = std::abs(at_sigma - expected) <= 1e-8 && centre == 0.6;
  return {pass, "at_sigma=" + fmt(at_sigma, 17) + " centre_score_0.6=" + fmt(centre, 17)};
}

const std::vector<CompoundTerm>& random_names() {
  static const std::vector<CompoundTerm> names = {
      CompoundTerm::parse("left thumb"), CompoundTerm::parse("spine navel"),
      CompoundTerm::parse("cabinet foot"), CompoundTerm::parse("pelvis"),
      CompoundTerm::parse("table top")};
  return names;
}

Outcome renderer_oracle() {
  Rng rng(505);
  double worst = 0.0;
  std::size_t volumes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 1 + rng.below(8);
    const std::size_t w = 1 + rng.below(8);
    const std::size_t dim = 1 + rng.below(6);
    EmbeddingTable table(dim);
    std::map<std::string, Vector> vectors;
    for (const auto& n : random_names()) {
      vectors[n.key()] = testing::random_vector(rng, dim);
      table.add(n.key(), vectors[n.key()]);
    }
    const auto seq = testing::random_sequence(rng, random_names(), 1 + rng.below(3), 5, h, w);
    VolumeConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.influence_epsilon = 0.0;
    for (auto agg : {Aggregation::Addition, Aggregation::NormalizedSum, Aggregation::WeightedNorm}) {
      cfg.aggregation = agg;
      worst = std::max(worst, testing::max_abs_diff(build_semantic_volume(seq, table, cfg),
                                                    testing::naive_semantic(seq, vectors, dim, cfg)));
      ++volumes;
    }
    for (auto comb : {InstanceCombine::Max, InstanceCombine::Sum}) {
      cfg.instance_combine = comb;
      worst = std::max(worst, testing::max_abs_diff(build_onehot_volume(seq, random_names(), cfg),
                                                    testing::naive_onehot(seq, random_names(), cfg)));
      ++volumes;
    }
  }
  return {worst <= 1e-9, "instances=200 volumes=" + std::to_string(volumes) +
                             " max_abs_diff=" + fmt(worst) + " (<= 1e-9)"};
}

Outcome structural_equivalence() {
  Rng rng(606);
  const std::size_t c = random_names().size();
  EmbeddingTable basis(c);
  for (std::size_t i = 0; i < c; ++i) {
    basis.add(random_names()[i].key(),
              Vector::Unit(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)));
  }
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 1 + rng.below(8);
    const std::size_t w = 1 + rng.below(8);
    const auto seq = testing::random_sequence(rng, random_names(), 1 + rng.below(3), 5, h, w);
    VolumeConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.aggregation = Aggregation::Addition;
    cfg.instance_combine = InstanceCombine::Sum;
    worst = std::max(worst, testing::max_abs_diff(build_semantic_volume(seq, basis, cfg),
                                                  build_onehot_volume(seq, random_names(), cfg)));
  }
  return {worst <= 1e-12, "instances=100 max_abs_diff=" + fmt(worst) + " (<= 1e-12)"};
}

Outcome shape_contract() {
  Rng rng(707);
  const auto all = *presets::class_list("32+12");
  const auto all17 = *presets::class_list("17+7");
  EmbeddingTable table(16);
  for (const auto& list : {all, all17}) {
    for (const auto& n : list) {
      if (!table.contains(n.key())) table.add(n.key(), testing::random_vector(rng, 16));
    }
  }
  VolumeConfig cfg;
  cfg.frames = 4;
  bool pass = true;
  std::string detail;
  for (const char* preset : {"17", "32", "17+7", "32+12"}) {
    const auto classes = *presets::class_list(preset);
    KeypointSequence seq;
    for (std::size_t t = 0; t < cfg.frames; ++t) {
      Frame f;
      for (const auto& n : classes) {
        Keypoint k;
        k.name = n;
        k.x = rng.uniform(0, 56);
        k.y = rng.uniform(0, 56);
        k.score = rng.uniform(0.1, 1);
        f.push_back(k);
      }
      seq.frames.push_back(f);
    }
    const auto onehot = build_onehot_volume(seq, classes, cfg).shape();
    const auto semantic = build_semantic_volume(seq, table, cfg).shape();
    const bool ok = onehot == std::array<std::size_t, 4>{classes.size(), 4, 56, 56} &&
                    semantic == std::array<std::size_t, 4>{16, 4, 56, 56};
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : " ") + preset + ":onehot=" +
              std::to_string(onehot[0]) + ",semantic=" + std::to_string(semantic[0]);
  }
  return {pass, detail};
}

std::vector<std::vector<double>> sorted_rows(const std::vector<Vector>& vs) {
  std::vector<std::vector<double>> rows;
  for (const auto& v : vs) rows.emplace_back(v.data(), v.data() + v.size());
  std::sort(rows.begin(), rows.end());
  return rows;
}

Outcome ablation_contracts() {
  const EmbeddingTable shipped = load_vec_table(kData + "/embeddings/reduced16.vec");
  const auto joints = presets::joints32();
  const auto objects = presets::objects12();
  std::vector<CompoundTerm> names = joints;
  names.insert(names.end(), objects.begin(), objects.end());

  double worst_norm = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = generate_random_table(names, 16, seed);
    for (std::size_t i = 0; i < r.size(); ++i) {
      worst_norm = std::max(worst_norm, std::abs(r.vector(i).norm() - 1.0));
    }
  }

  std::vector<Vector> composed;
  for (const auto& n : names) composed.push_back(compose_compound(shipped, n));
  bool permute_ok = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = permutate_table(shipped, names, seed);
    std::vector<Vector> after;
    for (const auto& n : names) after.push_back(p.table.at(n.key()));
    permute_ok = permute_ok && sorted_rows(after) == sorted_rows(composed);
  }

  // Bijective pairing on the 12 objects and their first 12 joints.
  const std::vector<CompoundTerm> paired_joints(joints.begin(), joints.begin() + 12);
  Pairing pairing;
  for (std::size_t i = 0; i < 12; ++i) pairing.pairs.emplace_back(paired_joints[i], objects[(i * 5) % 12]);
  const auto sw = switch_table(shipped, paired_joints, objects, pairing);
  std::vector<Vector> before;
  std::vector<Vector> after;
  for (const auto& n : paired_joints) before.push_back(compose_compound(shipped, n));
  for (const auto& n : objects) before.push_back(compose_compound(shipped, n));
  for (std::size_t i = 0; i < sw.size(); ++i) after.push_back(sw.vector(i));
  const bool switch_ok = sorted_rows(before) == sorted_rows(after);

  // Thumb cell with an occluded (score 0.6) cabinet foot one cell away.
  KeypointSequence seq;
  Keypoint thumb;
  thumb.name = CompoundTerm::parse("left thumb");
  thumb.x = 10;
  thumb.y = 10;
  Keypoint foot;
  foot.name = CompoundTerm::parse("cabinet foot");
  foot.kind = KeypointKind::Object;
  foot.x = 11;
  foot.y = 10;
  foot.score = 0.6;
  seq.frames.push_back({thumb, foot});
  const Vector v_thumb = compose_compound(shipped, thumb.name);
  const Vector v_foot = compose_compound(shipped, foot.name);
  bool direction_ok = true;
  std::string direction;
  for (auto agg : {Aggregation::Addition, Aggregation::NormalizedSum, Aggregation::WeightedNorm}) {
    VolumeConfig cfg;
    cfg.aggregation = agg;
    const Volume vol = build_semantic_volume(seq, shipped, cfg);
    Vector cell(16);
    for (std::size_t c = 0; c < 16; ++c) cell[static_cast<Eigen::Index>(c)] = vol.at(c, 0, 10, 10);
    const double ct = cosine(cell, v_thumb);
    const double cf = cosine(cell, v_foot);
    direction_ok = direction_ok && ct > cf;
    direction += " " + std::string(to_string(agg)) + ":cos_thumb=" + fmt(ct, 4) +
                 ",cos_foot=" + fmt(cf, 4);
  }
  const bool pass = worst_norm <= 1e-9 && permute_ok && switch_ok && direction_ok;
  return {pass, "random_norm_err=" + fmt(worst_norm) + " permutate_multiset=" +
                    (permute_ok ? "ok" : "broken") + " switch_multiset=" +
                    (switch_ok ? "ok" : "broken") + direction};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Every regular file below `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome determinism_and_round_trips() {
  const fs::path base = fs::temp_directory_path() / ("semvol_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::string failures;

  // Each CLI command run twice into separate directories; outputs must match byte for byte.
  const auto vectors = (base / "vectors.vec").string();
  fs::create_directories(base);
  save_vec_table(vectors, task().original);
  const std::string seeds = kData + "/seeds/joints17.txt";
  const std::string objects = kData + "/seeds/objects7.txt";
  const std::string shipped = kData + "/embeddings/reduced16.vec";
  const std::string keypoints = kData + "/examples/assembly_clip.jsonl";
  const std::string pairing = kData + "/examples/pairing_17_7.txt";

  using Args = std::vector<std::string>;
  const std::vector<std::pair<std::string, std::function<Args(const std::string&)>>> commands = {
      {"reduce", [&](const std::string& d) {
         return Args{"reduce", "--vectors", vectors, "--seeds", seeds, objects, "--expansion",
                     kData + "/vocab/expansion.txt", "--vocab-size", "60", "--epochs", "150",
                     "--seed", "11", "--out-dir", d};
       }},
      {"pca", [&](const std::string& d) {
         return Args{"pca", "--vectors", vectors, "--seeds", seeds, objects, "--expansion",
                     kData + "/vocab/expansion.txt", "--out-dir", d};
       }},
      {"encode", [&](const std::string& d) {
         return Args{"encode", "--keypoints", keypoints, "--table", shipped, "--seed", "3",
                     "--aggregation", "weighted_norm", "--out-dir", d};
       }},
      {"encode-onehot", [&](const std::string& d) {
         return Args{"encode", "--keypoints", keypoints, "--mode", "onehot", "--classes", "17+7",
                     "--out-dir", d};
       }},
      {"similarity", [&](const std::string& d) {
         return Args{"similarity", "--table", shipped, "--terms-file", seeds, "--out",
                     d + "/similarity.csv"};
       }},
      {"ablate-random", [&](const std::string& d) {
         return Args{"ablate", "--kind", "random", "--names", seeds, objects, "--seed", "5",
                     "--out", d + "/random.vec"};
       }},
      {"ablate-permutate", [&](const std::string& d) {
         return Args{"ablate", "--kind", "permutate", "--names", seeds, objects, "--table",
                     shipped, "--seed", "5", "--out", d + "/permutate.vec"};
       }},
      {"ablate-switch", [&](const std::string& d) {
         return Args{"ablate", "--kind", "switch", "--table", shipped, "--joints", seeds,
                     "--objects", objects, "--pairing", pairing, "--out", d + "/switch.vec"};
       }},
  };
  std::size_t reproducible = 0;
  for (const auto& [name, make] : commands) {
    std::map<std::string, std::string> runs[2];
    std::string outs[2];
    bool ok = true;
    for (int r = 0; r < 2; ++r) {
      const fs::path dir = base / (name + "_" + std::to_string(r));
      fs::create_directories(dir);
      Args args = make(dir.string());
      args.insert(args.begin(), "semvol");
      std::ostringstream out;
      std::ostringstream err;
      ok = ok && cli::run(args, out, err) == cli::kOk;
      if (!ok) failures += " " + name + ":" + err.str();
      // Paths differ between the runs; compare stdout with them stripped.
      std::string text = out.str();
      for (std::size_t pos; (pos = text.find(dir.string())) != std::string::npos;) {
        text.erase(pos, dir.string().size());
      }
      outs[r] = text;
      runs[r] = snapshot(dir);
    }
    if (ok && runs[0] == runs[1] && outs[0] == outs[1] && !runs[0].empty()) {
      ++reproducible;
    } else if (ok) {
      failures += " " + name + ":differs";
    }
  }

  // Round-trips on 1000 random objects of each kind.
  Rng rng(909);
  std::size_t tensor_ok = 0;
  std::size_t table_ok = 0;
  std::size_t checkpoint_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    Volume v(1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(4));
    for (double& d : v.data()) d = rng.normal() * std::pow(10.0, rng.uniform(-100, 100));
    tensor_ok += read_volume(tensor_bytes(v, DType::F64)) == v;

    const std::size_t dim = 1 + rng.below(8);
    EmbeddingTable t(dim);
    for (std::size_t k = 0, n = rng.below(6); k < n; ++k) {
      t.add("w" + std::to_string(k), testing::random_vector(rng, dim, std::pow(10.0, rng.uniform(-50, 50))));
    }
    std::stringstream ts;
    write_vec_table(ts, t);
    table_ok += parse_vec_table(ts) == t;

    std::vector<std::size_t> dims{1 + rng.below(5), 1 + rng.below(5), 1 + rng.below(5)};
    auto model = EncoderModel::he_uniform(dims, rng.below(1u << 30));
    for (auto& layer : model.layers()) {
      for (Eigen::Index k = 0; k < layer.bias.size(); ++k) layer.bias[k] = rng.normal();
    }
    TrainConfig cfg;
    cfg.output_dim = dims.back();
    cfg.hidden_dims = {dims[1]};
    cfg.seed = rng.below(1u << 30);
    cfg.learning_rate = rng.uniform(1e-4, 1e-2);
    std::stringstream cs;
    write_checkpoint(cs, model, cfg);
    const std::string first = cs.str();
    const Checkpoint back = read_checkpoint(cs);
    std::ostringstream again;
    write_checkpoint(again, back.model, back.config);
    checkpoint_ok += back.model == model && again.str() == first;
  }
  fs::remove_all(base);

  const bool pass = reproducible == commands.size() && tensor_ok == 1000 && table_ok == 1000 &&
                    checkpoint_ok == 1000;
  return {pass, "cli_reproducible=" + std::to_string(reproducible) + "/" +
                    std::to_string(commands.size()) + " tensor=" + std::to_string(tensor_ok) +
                    "/1000 table=" + std::to_string(table_ok) + "/1000 checkpoint=" +
                    std::to_string(checkpoint_ok) + "/1000" + failures};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"embedding preservation", embedding_preservation},
      {"gradient correctness", gradient_correctness},
      {"pca ordering", pca_ordering},
      {"kernel exactness", kernel_exactness},
      {"renderer oracle", renderer_oracle},
      {"structural equivalence", structural_equivalence},
      {"shape contract", shape_contract},
      {"ablation tables", ablation_contracts},
      {"determinism and round-trips", determinism_and_round_trips},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
