#include "semvol/ablation.hpp"

#include "semvol/error.hpp"
#include "semvol/random.hpp"

#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_map>

namespace semvol {

EmbeddingTable generate_random_table(std::span<const CompoundTerm> names,
                                     std::size_t dimension, std::uint64_t seed) {
  if (dimension < 1) throw DataError("random table dimension must be at least 1");
  EmbeddingTable table(dimension);
  Rng rng(derive_seed(seed, "ablation.random"));
  for (const auto& name : names) {
    Vector v(static_cast<Eigen::Index>(dimension));
    double norm = 0.0;
    // Isotropic Gaussian direction; redraw the (measure-zero) zero vector.
    do {
      for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.normal();
      norm = v.norm();
    } while (norm == 0.0);
    table.add(name.key(), v / norm);
  }
  return table;
}

PermutationResult permutate_table(const EmbeddingTable& reduced,
                                  std::span<const CompoundTerm> names, std::uint64_t seed) {
  std::vector<Vector> vectors;
  vectors.reserve(names.size());
  for (const auto& name : names) vectors.push_back(compose_compound(reduced, name));

  std::vector<std::size_t> source(names.size());
  std::iota(source.begin(), source.end(), std::size_t{0});
  if (names.size() > 1) {
    Rng rng(derive_seed(seed, "ablation.permutate"));
    auto is_identity = [&] {
      for (std::size_t i = 0; i < source.size(); ++i) {
        if (source[i] != i) return false;
      }
      return true;
    };
    do {
      // Fisher-Yates.
      for (std::size_t i = source.size() - 1; i > 0; --i) {
        std::swap(source[i], source[rng.below(i + 1)]);
      }
    } while (is_identity());
  }

  EmbeddingTable table(reduced.dimension());
  for (std::size_t i = 0; i < names.size(); ++i) table.add(names[i].key(), vectors[source[i]]);
  return {std::move(table), std::move(source)};
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

Pairing read_pairing(std::istream& in) {
  Pairing pairing;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "@cyclic") {
      pairing.cyclic = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("pairing line " + std::to_string(line_no) +
                      ": expected 'joint name = object name'");
    }
    pairing.pairs.emplace_back(CompoundTerm::parse(trim(line.substr(0, eq))),
                               CompoundTerm::parse(trim(line.substr(eq + 1))));
  }
  return pairing;
}

Pairing load_pairing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairing file " + path.string());
  return read_pairing(in);
}

EmbeddingTable switch_table(const EmbeddingTable& reduced,
                            std::span<const CompoundTerm> joint_names,
                            std::span<const CompoundTerm> object_names,
                            const Pairing& pairing) {
  std::unordered_map<std::string, std::size_t> joint_index;
  std::unordered_map<std::string, std::size_t> object_index;
  for (std::size_t i = 0; i < joint_names.size(); ++i) {
    if (!joint_index.emplace(joint_names[i].key(), i).second) {
      throw DataError("duplicate joint name '" + joint_names[i].display() + "'");
    }
  }
  for (std::size_t i = 0; i < object_names.size(); ++i) {
    if (!object_index.emplace(object_names[i].key(), i).second) {
      throw DataError("duplicate object name '" + object_names[i].display() + "'");
    }
    if (joint_index.contains(object_names[i].key())) {
      throw DataError("'" + object_names[i].display() + "' is both a joint and an object");
    }
  }

  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> joint_partner(joint_names.size(), unset);
  std::vector<std::size_t> object_partner(object_names.size(), unset);
  for (const auto& [joint, object] : pairing.pairs) {
    auto j = joint_index.find(joint.key());
    if (j == joint_index.end()) {
      throw DataError("pairing names unknown joint '" + joint.display() + "'");
    }
    auto o = object_index.find(object.key());
    if (o == object_index.end()) {
      throw DataError("pairing names unknown object '" + object.display() + "'");
    }
    if (joint_partner[j->second] != unset) {
      throw DataError("joint '" + joint.display() + "' is paired more than once");
    }
    joint_partner[j->second] = o->second;
    if (object_partner[o->second] == unset) {
      object_partner[o->second] = j->second;
    } else if (!pairing.cyclic) {
      throw DataError("object '" + object.display() +
                      "' is paired more than once; add '@cyclic' to allow reuse");
    }
  }
  for (std::size_t i = 0; i < joint_names.size(); ++i) {
    if (joint_partner[i] == unset) {
      throw DataError("joint '" + joint_names[i].display() + "' has no pairing");
    }
  }
  for (std::size_t i = 0; i < object_names.size(); ++i) {
    if (object_partner[i] == unset) {
      throw DataError("object '" + object_names[i].display() + "' has no pairing");
    }
  }

  std::vector<Vector> joints;
  std::vector<Vector> objects;
  for (const auto& n : joint_names) joints.push_back(compose_compound(reduced, n));
  for (const auto& n : object_names) objects.push_back(compose_compound(reduced, n));

  EmbeddingTable table(reduced.dimension());
  for (std::size_t i = 0; i < joint_names.size(); ++i) {
    table.add(joint_names[i].key(), objects[joint_partner[i]]);
  }
  for (std::size_t i = 0; i < object_names.size(); ++i) {
    table.add(object_names[i].key(), joints[object_partner[i]]);
  }
  return table;
}

}  // namespace semvol
