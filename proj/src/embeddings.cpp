#include "semvol/embeddings.hpp"

#include "semvol/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace semvol {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool is_valid_token(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  });
}

CompoundTerm::CompoundTerm(std::vector<std::string> components) {
  if (components.empty()) throw DataError("compound term needs at least one component");
  for (auto& c : components) {
    if (!is_valid_token(c)) throw DataError("invalid term component '" + c + "'");
    c = to_lower(c);
  }
  components_ = std::move(components);
}

CompoundTerm CompoundTerm::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  if (parts.empty()) throw DataError("empty term '" + std::string(text) + "'");
  return CompoundTerm(std::move(parts));
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string CompoundTerm::display() const { return join(components_, ' '); }
std::string CompoundTerm::key() const { return join(components_, '_'); }

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw DataError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string_view term, Vector vector) {
  if (!is_valid_token(term)) throw DataError("invalid term '" + std::string(term) + "'");
  if (static_cast<std::size_t>(vector.size()) != dimension_) {
    throw DataError("vector for '" + std::string(term) + "' has " +
                    std::to_string(vector.size()) + " components, expected " +
                    std::to_string(dimension_));
  }
  if (!vector.allFinite()) {
    throw DataError("non-finite value in vector for '" + std::string(term) + "'");
  }
  std::string key = to_lower(term);
  if (index_.contains(key)) throw DataError("duplicate term '" + key + "'");
  index_.emplace(key, terms_.size());
  terms_.push_back(std::move(key));
  vectors_.push_back(std::move(vector));
}

bool EmbeddingTable::contains(std::string_view term) const {
  return find(term) != nullptr;
}

const Vector* EmbeddingTable::find(std::string_view term) const {
  auto it = index_.find(to_lower(term));
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

const Vector& EmbeddingTable::at(std::string_view term) const {
  const Vector* v = find(term);
  if (!v) throw DataError("term '" + std::string(term) + "' not in embedding table");
  return *v;
}

bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
  if (a.dimension_ != b.dimension_ || a.terms_ != b.terms_) return false;
  for (std::size_t i = 0; i < a.vectors_.size(); ++i) {
    // Bitwise comparison via exact equality; tables never hold NaN.
    if (a.vectors_[i] != b.vectors_[i]) return false;
  }
  return true;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

EmbeddingTable parse_vec_table(std::istream& in, const VecReadOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("vector file: missing header line");
  strip_cr(line);
  const auto header = split_fields(line);
  std::size_t rows = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], rows) ||
      !parse_number(header[1], dim) || dim == 0) {
    throw DataError("vector file: malformed header '" + line + "', expected 'N D'");
  }

  EmbeddingTable table(dim);
  std::size_t seen = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    ++seen;
    if (fields.size() != dim + 1) {
      throw DataError("vector file line " + std::to_string(line_no) + ": " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(dim + 1));
    }
    std::string term = to_lower(fields[0]);
    if (options.keep && !options.keep->contains(term)) continue;
    if (table.contains(term)) {
      if (options.merge_case_variants) continue;
      throw DataError("vector file line " + std::to_string(line_no) + ": duplicate term '" +
                      term + "'");
    }
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      double value = 0.0;
      if (!parse_number(fields[k + 1], value) || !std::isfinite(value)) {
        throw DataError("vector file line " + std::to_string(line_no) + ": bad value '" +
                        std::string(fields[k + 1]) + "'");
      }
      v[static_cast<Eigen::Index>(k)] = value;
    }
    table.add(term, std::move(v));
  }
  if (seen != rows) {
    throw DataError("vector file: header declares " + std::to_string(rows) +
                    " rows but found " + std::to_string(seen));
  }
  return table;
}

EmbeddingTable load_vec_table(const std::filesystem::path& path,
                              const VecReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vector file " + path.string());
  return parse_vec_table(in, options);
}

void write_vec_table(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dimension() << '\n';
  char buffer[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.terms()[i];
    const Vector& v = table.vector(i);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v[k]);
      out << ' ' << std::string_view(buffer, static_cast<std::size_t>(ptr - buffer));
    }
    out << '\n';
  }
}

void save_vec_table(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vector file " + path.string());
  write_vec_table(out, table);
  if (!out) throw DataError("failed writing vector file " + path.string());
}

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DataError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine: zero-norm vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Vector compose_compound(const EmbeddingTable& table, const CompoundTerm& term) {
  if (term.size() == 0) throw DataError("cannot compose an empty term");
  if (const Vector* phrase = table.find(term.key())) return *phrase;
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(table.dimension()));
  for (const auto& component : term.components()) {
    const Vector* v = table.find(component);
    if (!v) {
      throw DataError("cannot compose '" + term.display() + "': component '" + component +
                      "' not in embedding table");
    }
    sum += *v;
  }
  return sum / static_cast<double>(term.size());
}

Matrix cosine_matrix(std::span<const Vector> vectors) {
  const auto n = static_cast<Eigen::Index>(vectors.size());
  std::vector<double> norms(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    norms[i] = vectors[i].norm();
    if (norms[i] == 0.0) throw NumericError("cosine: zero-norm vector");
  }
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (vectors[ui].size() != vectors[uj].size()) {
        throw DataError("cosine: dimension mismatch");
      }
      const double c =
          std::clamp(vectors[ui].dot(vectors[uj]) / (norms[ui] * norms[uj]), -1.0, 1.0);
      m(i, j) = c;
      m(j, i) = c;
    }
  }
  return m;
}

Matrix pairwise_cosine_matrix(const EmbeddingTable& table,
                              std::span<const CompoundTerm> terms) {
  std::vector<Vector> composed;
  composed.reserve(terms.size());
  for (const auto& t : terms) composed.push_back(compose_compound(table, t));
  return cosine_matrix(composed);
}

}  // namespace semvol
