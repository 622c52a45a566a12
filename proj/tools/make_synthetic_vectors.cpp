// Writes a deterministic 300-d stand-in for a pretrained vector file, built
// from a categorised word list. Used by the tests and the demo pipeline when no
// real pretrained vectors are at hand.
#include "synthetic/synthetic.hpp"

#include "semvol/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic pretrained-like vector table", "make_synthetic_vectors"};
  std::string categories;
  std::string out;
  semvol::synthetic::SyntheticParams params;
  app.add_option("--categories", categories, "Category word file")->required();
  app.add_option("--out", out, "Output .vec path")->required();
  app.add_option("--dim", params.dimension, "Vector dimension")->capture_default_str();
  app.add_option("--seed", params.seed, "Random seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto words = semvol::synthetic::load_categories(categories);
    semvol::save_vec_table(out, semvol::synthetic::make_table(words, params));
    std::cout << out << " words=" << words.words.size() << " dim=" << params.dimension << '\n';
  } catch (const std::exception& e) {
    std::cerr << "make_synthetic_vectors: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
