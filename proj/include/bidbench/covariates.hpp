#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bidbench/csv.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/linalg.hpp"
#include "bidbench/rng.hpp"

namespace bidbench {

enum class ColumnKind { continuous, dummy };

/// Standardized customer-feature matrix (row-major). Continuous columns are
/// bell-shaped, dummy columns binary; after standardization every column has
/// sample mean 0 and sample sd 1 (n-1 denominator).
struct CovariateMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<ColumnKind> column_kinds;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// In-place column standardization to sample mean 0 / sd 1. `names` (optional)
/// improves error messages on zero-variance columns.
inline void standardize_columns(CovariateMatrix& m,
                                const std::vector<std::string>* names = nullptr) {
  if (m.rows < 2) throw ArgumentError("standardization needs at least two rows");
  std::vector<double> col(m.rows);
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t i = 0; i < m.rows; ++i) col[i] = m.values[i * m.cols + j];
    const double mu = mean(col);
    const double sd = sample_sd(col);
    if (sd == 0.0) {
      const std::string name = names ? (*names)[j] : ("#" + std::to_string(j));
      throw IngestionError("zero variance column '" + name + "'");
    }
    for (std::size_t i = 0; i < m.rows; ++i) m.values[i * m.cols + j] = (col[i] - mu) / sd;
  }
}

/// Draw an n x d stand-in for the confidential loan-offer features:
/// (d - n_dummy) standard-normal columns followed by n_dummy Bernoulli(q)
/// columns with per-column q ~ U[0.1, 0.9]; everything standardized.
inline CovariateMatrix synthesize_covariates(std::size_t n, std::size_t d, std::size_t n_dummy,
                                             std::uint64_t seed) {
  if (n < 10) throw ArgumentError("synthesize_covariates: n must be >= 10");
  if (d == 0 || n_dummy >= d)
    throw ArgumentError("synthesize_covariates: need 0 <= n_dummy < d and d >= 1");

  CovariateMatrix m;
  m.rows = n;
  m.cols = d;
  m.values.assign(n * d, 0.0);
  m.column_kinds.assign(d, ColumnKind::continuous);

  const Rng root(seed);
  const std::size_t n_cont = d - n_dummy;
  for (std::size_t j = 0; j < d; ++j) {
    Rng col = root.fork(j);
    if (j < n_cont) {
      for (std::size_t i = 0; i < n; ++i) m.values[i * d + j] = col.normal();
      continue;
    }
    m.column_kinds[j] = ColumnKind::dummy;
    const double q = col.uniform(0.1, 0.9);
    // A constant draw cannot be standardized; redraw from the same stream.
    // Practically impossible at protocol scale, relevant only for tiny n.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      bool any0 = false, any1 = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = col.uniform() < q ? 1.0 : 0.0;
        m.values[i * d + j] = v;
        (v == 0.0 ? any0 : any1) = true;
      }
      if (any0 && any1) break;
      if (attempt == 999)
        throw DegenerateDataError("dummy column stayed constant after 1000 redraws");
    }
  }
  standardize_columns(m);
  return m;
}

/// Ingest covariates from a headered CSV. Dummy-tagged columns must be binary
/// {0,1} before standardization.
inline CovariateMatrix load_covariates(const std::string& path,
                                       const std::vector<ColumnKind>& schema) {
  const NumericCsv csv = read_numeric_csv(path);
  if (schema.size() != csv.columns.size())
    throw ArgumentError("load_covariates: schema lists " + std::to_string(schema.size()) +
                        " columns, file '" + path + "' has " +
                        std::to_string(csv.columns.size()));
  if (csv.rows < 2) throw IngestionError("'" + path + "': need at least two data rows");

  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j] != ColumnKind::dummy) continue;
    for (std::size_t i = 0; i < csv.rows; ++i) {
      const double v = csv.at(i, j);
      if (v != 0.0 && v != 1.0)
        throw ArgumentError("dummy column '" + csv.columns[j] + "' is not binary (row " +
                            std::to_string(i + 1) + " holds " + std::to_string(v) + ")");
    }
  }

  CovariateMatrix m;
  m.rows = csv.rows;
  m.cols = csv.columns.size();
  m.values = csv.data;
  m.column_kinds = schema;
  standardize_columns(m, &csv.columns);
  return m;
}

}  // namespace bidbench
