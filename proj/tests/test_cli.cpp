#include "cli/commands.hpp"

#include "semvol/embeddings.hpp"
#include "semvol/io_formats.hpp"
#include "semvol/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace semvol;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "semvol");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class Workspace {
 public:
  Workspace() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() /
           ("semvol_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

/// Small stand-in for a pretrained table covering the joint and object words.
void write_vectors(const std::string& path, std::size_t dim) {
  const std::vector<std::string> words{
      "left", "right", "elbow", "thumb", "hand", "knee", "hip", "pelvis", "spine", "navel",
      "cabinet", "foot", "table", "top", "drawer", "arm", "leg", "wood", "screw", "shelf",
      "head", "neck", "chair", "nose", "ankle", "wrist", "shoulder", "chest", "eye", "ear"};
  Rng rng(99);
  EmbeddingTable t(dim);
  for (const auto& w : words) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal() + 0.3;
    t.add(w, v);
  }
  save_vec_table(path, t);
}

void write_keypoints(const std::string& path, int frames) {
  std::ofstream out(path);
  out << R"({"meta": {"width": 320, "height": 240, "skeleton": "test"}})" << '\n';
  for (int f = 0; f < frames; ++f) {
    out << R"({"frame": )" << f << R"(, "name": "left elbow", "x": )" << 100 + 3 * f
        << R"(, "y": 80, "score": 0.9})" << '\n';
    out << R"({"frame": )" << f << R"(, "name": "pelvis", "x": 160, "y": 120, "score": 0.05})"
        << '\n';
    out << R"({"frame": )" << f
        << R"(, "name": "cabinet foot", "x": 200, "y": 200, "score": 0.6, "kind": "object"})"
        << '\n';
  }
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"similarity"}).code == cli::kUsage);
  CHECK(run({"encode", "--keypoints", "x.jsonl", "--dim", "3"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("reduce is bitwise reproducible and writes every artefact") {
  Workspace ws;
  write_vectors(ws / "vectors.vec", 40);
  spit(ws / "seeds.txt", "left elbow\nleft thumb\ncabinet foot\n");
  spit(ws / "expansion.txt", "hand\nknee\nmissing\nhip\narm\ntable\nleg\n");

  auto reduce = [&](const std::string& out_dir, const std::string& method) {
    return run({"reduce", "--vectors", ws / "vectors.vec", "--seeds", ws / "seeds.txt",
                "--expansion", ws / "expansion.txt", "--vocab-size", "8", "--dim", "4",
                "--epochs", "40", "--seed", "3", "--method", method, "--out-dir", out_dir});
  };
  const Result a = reduce(ws / "a", "encoder");
  REQUIRE_MESSAGE(a.code == cli::kOk, a.err);
  const Result b = reduce(ws / "b", "encoder");
  REQUIRE(b.code == cli::kOk);
  CHECK(a.out == b.out);
  CHECK(a.out.find("vocabulary_pair_loss=") != std::string::npos);
  for (const char* f : {"vocabulary.txt", "reduced.vec", "encoder.ckpt", "train_log.csv"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(ws / ("a/" + std::string(f))));
    CHECK(slurp(ws / ("a/" + std::string(f))) == slurp(ws / ("b/" + std::string(f))));
  }
  const auto table = load_vec_table(ws / "a/reduced.vec");
  CHECK(table.dimension() == 4);
  CHECK(table.contains("thumb"));
  const auto ck = load_checkpoint(ws / "a/encoder.ckpt");
  CHECK(ck.model.output_dim() == 4);
  CHECK(ck.config.seed == 3);

  const Result pca = reduce(ws / "p", "pca");
  REQUIRE_MESSAGE(pca.code == cli::kOk, pca.err);
  CHECK(fs::exists(ws / "p/reduced.vec"));
  CHECK_FALSE(fs::exists(ws / "p/encoder.ckpt"));
  CHECK(run({"pca", "--vectors", ws / "vectors.vec", "--seeds", ws / "seeds.txt", "--expansion",
             ws / "expansion.txt", "--vocab-size", "8", "--dim", "4", "--out-dir", ws / "q"})
            .out == pca.out);

  SUBCASE("data and numeric failures map to exit codes") {
    spit(ws / "bad_seeds.txt", "left wrist\n");
    CHECK(run({"reduce", "--vectors", ws / "vectors.vec", "--seeds", ws / "bad_seeds.txt",
               "--out-dir", ws / "c"})
              .code == cli::kDataError);
    CHECK(run({"reduce", "--vectors", ws / "nope.vec", "--seeds", ws / "seeds.txt", "--out-dir",
               ws / "c"})
              .code == cli::kDataError);
    CHECK(run({"reduce", "--vectors", ws / "vectors.vec", "--seeds", ws / "seeds.txt",
               "--expansion", ws / "expansion.txt", "--vocab-size", "8", "--dim", "4",
               "--epochs", "5", "--lr", "1e300", "--out-dir", ws / "c"})
              .code == cli::kNumericError);
  }
}

TEST_CASE("config file values sit between flags and defaults") {
  Workspace ws;
  spit(ws / "run.cfg", "# defaults for this run\ndim = 8\nepochs=7\nmerge_case_variants=true\n");
  const Result r = run({"reduce", "--config", ws / "run.cfg", "--epochs", "9", "--vectors", "v",
                        "--seeds", "s", "--print-config"});
  REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
  CHECK(r.out.rfind("command=reduce\n", 0) == 0);
  CHECK(r.out.find("\ndim=8\n") != std::string::npos);
  CHECK(r.out.find("\nepochs=9\n") != std::string::npos);
  CHECK(r.out.find("\nmerge_case_variants=true\n") != std::string::npos);
  CHECK(r.out.find("\nvocab_size=100\n") != std::string::npos);

  // Printed configuration reads back as a config file.
  std::string printed = r.out.substr(r.out.find('\n') + 1);
  spit(ws / "printed.cfg", printed);
  const Result again = run({"reduce", "--config", ws / "printed.cfg", "--print-config"});
  REQUIRE_MESSAGE(again.code == cli::kOk, again.err);
  CHECK(again.out == r.out);

  spit(ws / "typo.cfg", "dimm=8\n");
  CHECK(run({"reduce", "--config", ws / "typo.cfg", "--vectors", "v", "--seeds", "s"}).code ==
        cli::kUsage);
}

TEST_CASE("encode, similarity and ablate") {
  Workspace ws;
  write_keypoints(ws / "clip.jsonl", 6);
  write_keypoints(ws / "other.jsonl", 3);
  spit(ws / "names.txt", "left elbow\npelvis\ncabinet foot\nleft thumb\n");

  const auto ablate_random = [&](const std::string& out) {
    return run({"ablate", "--kind", "random", "--names", ws / "names.txt", "--dim", "5", "--seed",
                "8", "--out", out});
  };
  REQUIRE(ablate_random(ws / "random.vec").code == cli::kOk);
  REQUIRE(ablate_random(ws / "random2.vec").code == cli::kOk);
  CHECK(slurp(ws / "random.vec") == slurp(ws / "random2.vec"));
  CHECK(fs::exists(ws / "random.vec.manifest.txt"));
  const auto random = load_vec_table(ws / "random.vec");
  CHECK(random.size() == 4);
  CHECK(random.dimension() == 5);

  SUBCASE("semantic encode") {
    auto encode = [&](const std::string& out_dir, const std::string& jobs) {
      return run({"encode", "--keypoints", ws / "clip.jsonl", ws / "other.jsonl", "--table",
                  ws / "random.vec", "--frames", "4", "--height", "12", "--width", "16",
                  "--seed", "5", "--jobs", jobs, "--out-dir", out_dir});
    };
    const Result a = encode(ws / "ea", "1");
    REQUIRE_MESSAGE(a.code == cli::kOk, a.err);
    REQUIRE(encode(ws / "eb", "2").code == cli::kOk);
    for (const char* f : {"clip.svol", "other.svol"}) {
      CHECK(slurp(ws / ("ea/" + std::string(f))) == slurp(ws / ("eb/" + std::string(f))));
    }
    const Volume v = load_volume(ws / "ea/clip.svol");
    CHECK(v.shape() == std::array<std::size_t, 4>{5, 4, 12, 16});
  }
  SUBCASE("one-hot encode with a preset class list") {
    const Result r = run({"encode", "--keypoints", ws / "clip.jsonl", "--mode", "onehot",
                          "--classes", "32+12", "--frames", "3", "--dtype", "f64", "--out-dir",
                          ws / "oh"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    const Volume v = load_volume(ws / "oh/clip.svol");
    CHECK(v.shape() == std::array<std::size_t, 4>{44, 3, 56, 56});
  }
  SUBCASE("unresolvable names are all listed") {
    spit(ws / "partial.txt", "left thumb\n");
    REQUIRE(run({"ablate", "--kind", "random", "--names", ws / "partial.txt", "--out",
                 ws / "partial.vec"})
                .code == cli::kOk);
    const Result r = run({"encode", "--keypoints", ws / "clip.jsonl", "--table",
                          ws / "partial.vec", "--out-dir", ws / "bad"});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("left elbow") != std::string::npos);
    CHECK(r.err.find("cabinet foot") != std::string::npos);
  }
  SUBCASE("similarity") {
    const Result r = run({"similarity", "--table", ws / "random.vec", "--term", "left elbow",
                          "--term", "pelvis"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(r.out.rfind("term,left elbow,pelvis\nleft elbow,1.000000,", 0) == 0);
    CHECK(run({"similarity", "--table", ws / "random.vec", "--term", "pelvis", "--term",
               "Pelvis"})
              .code == cli::kDataError);
    const Result cmp = run({"similarity", "--table", ws / "random.vec", "--terms-file",
                            ws / "names.txt", "--compare", ws / "random.vec"});
    REQUIRE(cmp.code == cli::kOk);
    CHECK(cmp.err == "mean_squared_cosine_difference=0\n");
  }
  SUBCASE("permutate and switch") {
    const auto permute = [&](const std::string& out) {
      return run({"ablate", "--kind", "permutate", "--names", ws / "names.txt", "--table",
                  ws / "random.vec", "--seed", "2", "--out", out});
    };
    REQUIRE(permute(ws / "perm.vec").code == cli::kOk);
    REQUIRE(permute(ws / "perm2.vec").code == cli::kOk);
    CHECK(slurp(ws / "perm.vec") == slurp(ws / "perm2.vec"));
    CHECK(slurp(ws / "perm.vec.manifest.txt") == slurp(ws / "perm2.vec.manifest.txt"));

    spit(ws / "joints.txt", "left elbow\nleft thumb\n");
    spit(ws / "objects.txt", "cabinet foot\npelvis\n");
    spit(ws / "pairs.txt", "left elbow = cabinet foot\nleft thumb = pelvis\n");
    const Result sw = run({"ablate", "--kind", "switch", "--table", ws / "random.vec",
                           "--joints", ws / "joints.txt", "--objects", ws / "objects.txt",
                           "--pairing", ws / "pairs.txt", "--out", ws / "switch.vec"});
    REQUIRE_MESSAGE(sw.code == cli::kOk, sw.err);
    const auto switched = load_vec_table(ws / "switch.vec");
    CHECK(switched.at("left_elbow") == random.at("cabinet_foot"));
    CHECK(switched.at("pelvis") == random.at("left_thumb"));

    CHECK(run({"ablate", "--kind", "switch", "--table", ws / "random.vec", "--joints",
               ws / "joints.txt", "--objects", ws / "objects.txt", "--out", ws / "x.vec"})
              .code != cli::kOk);
    CHECK(run({"ablate", "--kind", "shuffle", "--names", ws / "names.txt", "--out",
               ws / "x.vec"})
              .code != cli::kOk);
  }
}
