#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semvol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Lowercases ASCII letters; other bytes pass through unchanged.
std::string to_lower(std::string_view s);

/// True for a non-empty string without whitespace.
bool is_valid_token(std::string_view s);

/// A multi-token name such as "left elbow", embedded as the mean of its parts.
class CompoundTerm {
 public:
  CompoundTerm() = default;
  explicit CompoundTerm(std::vector<std::string> components);

  /// Splits on whitespace and underscores, lowercasing every component.
  static CompoundTerm parse(std::string_view text);

  const std::vector<std::string>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  /// Components joined by a single space ("left elbow").
  std::string display() const;
  /// Components joined by underscores ("left_elbow"); usable as a table term.
  std::string key() const;

  friend bool operator==(const CompoundTerm&, const CompoundTerm&) = default;

 private:
  std::vector<std::string> components_;
};

/// Named word vectors of a fixed dimension, in insertion order.
///
/// Terms are lowercased on insertion and lookup. A fully built table is only
/// read from, so concurrent lookups are safe.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Throws DataError on an invalid or duplicate term, wrong dimension, or
  /// non-finite components.
  void add(std::string_view term, Vector vector);

  bool contains(std::string_view term) const;
  /// nullptr when absent.
  const Vector* find(std::string_view term) const;
  /// Throws DataError when absent.
  const Vector& at(std::string_view term) const;

  const std::vector<std::string>& terms() const { return terms_; }
  const Vector& vector(std::size_t index) const { return vectors_[index]; }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b);

 private:
  std::size_t dimension_;
  std::vector<std::string> terms_;
  std::vector<Vector> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct VecReadOptions {
  /// When set, only these (lowercase) terms are stored; every row is still
  /// checked for arity so a malformed file is rejected either way.
  const std::unordered_set<std::string>* keep = nullptr;
  /// Keep the first of several rows that collide after lowercasing ("The",
  /// "the") instead of failing. Pretrained distributions are cased.
  bool merge_case_variants = false;
};

/// Reads the plain-text vector format: a "N D" header, then N rows of
/// "term v1 ... vD". Throws DataError on a malformed header, a row arity other
/// than D+1, a non-finite value, a duplicate term, or a row count other than N.
EmbeddingTable parse_vec_table(std::istream& in, const VecReadOptions& options = {});
EmbeddingTable load_vec_table(const std::filesystem::path& path,
                              const VecReadOptions& options = {});

/// Writes the same format with shortest round-trip decimal representations,
/// so parse_vec_table(write_vec_table(t)) == t bitwise.
void write_vec_table(std::ostream& out, const EmbeddingTable& table);
void save_vec_table(const std::filesystem::path& path, const EmbeddingTable& table);

/// Cosine similarity. Throws NumericError on a zero-norm input and DataError
/// on a dimension mismatch.
double cosine(const Vector& a, const Vector& b);

/// Mean of the component vectors. A table entry spelled as the joined key
/// ("left_elbow") takes precedence over composition.
Vector compose_compound(const EmbeddingTable& table, const CompoundTerm& term);

/// Composes every term and returns the symmetric cosine matrix.
Matrix pairwise_cosine_matrix(const EmbeddingTable& table,
                              std::span<const CompoundTerm> terms);

/// Cosine matrix of the rows of `vectors`; the diagonal is set to exactly 1.
Matrix cosine_matrix(std::span<const Vector> vectors);

}  // namespace semvol
