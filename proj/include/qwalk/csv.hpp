#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/lattice.hpp"
#include "qwalk/limit.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

/// 17 significant digits: enough to round-trip an IEEE double exactly.
inline std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

struct CsvSchema {
  std::vector<std::string> columns;
};

/// Writes records under a fixed header; newline '\n', UTF-8, deterministic.
/// Optional trailing comment lines start with '#'.
inline void emit_csv(const std::string& path, const CsvSchema& schema,
                     const std::vector<std::vector<std::string>>& records,
                     const std::vector<std::string>& trailing_comments = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  for (std::size_t i = 0; i < schema.columns.size(); ++i)
    out << (i ? "," : "") << schema.columns[i];
  out << "\n";
  for (const auto& record : records) {
    if (record.size() != schema.columns.size())
      throw std::runtime_error("emit_csv: record width does not match schema in " + path);
    for (std::size_t i = 0; i < record.size(); ++i) out << (i ? "," : "") << record[i];
    out << "\n";
  }
  for (const auto& comment : trailing_comments) out << "# " << comment << "\n";
}

inline CsvSchema distribution_schema(int d) {
  CsvSchema schema{{"t"}};
  for (int i = 1; i <= d; ++i) schema.columns.push_back("v" + std::to_string(i));
  schema.columns.push_back("mass");
  return schema;
}

inline void write_distribution_csv(const std::string& path,
                                   const ScaledDistribution& dist) {
  std::vector<std::vector<std::string>> records;
  for (const auto& [site, mass] : dist.atoms()) {
    std::vector<std::string> row{std::to_string(dist.time())};
    for (int i = 0; i < dist.dimension(); ++i)
      row.push_back(fmt17(static_cast<double>(site[i]) / dist.time()));
    row.push_back(fmt17(mass));
    records.push_back(std::move(row));
  }
  emit_csv(path, distribution_schema(dist.dimension()), records);
}

inline CsvSchema field_schema(int d) {
  CsvSchema schema;
  for (int i = 1; i <= d; ++i) schema.columns.push_back("k" + std::to_string(i));
  schema.columns.push_back("band_or_entry");
  schema.columns.push_back("value_re");
  schema.columns.push_back("value_im");
  return schema;
}

/// Eigenvalues per band, row label "band<j>"; flagged points are skipped.
inline void write_spectrum_csv(const std::string& path, const SpectralGrid& spectral) {
  const int d = spectral.grid.dimension();
  std::vector<std::vector<std::string>> records;
  for (std::size_t idx = 0; idx < spectral.grid.size(); ++idx) {
    if (spectral.flagged[idx]) continue;
    std::vector<double> k = spectral.grid.point(idx);
    for (int j = 0; j < spectral.coin_size; ++j) {
      std::vector<std::string> row;
      for (int i = 0; i < d; ++i) row.push_back(fmt17(k[i]));
      row.push_back("band" + std::to_string(j));
      row.push_back(fmt17(spectral.eigenvalues[idx](j).real()));
      row.push_back(fmt17(spectral.eigenvalues[idx](j).imag()));
      records.push_back(std::move(row));
    }
  }
  emit_csv(path, field_schema(d), records,
           {"flagged_fraction=" + fmt17(spectral.flagged_fraction())});
}

/// Matrix entries row label "e<row><col>"; excluded points are skipped.
inline void write_operator_field_csv(const std::string& path, const OperatorField& field) {
  const int d = field.grid.dimension();
  std::vector<std::vector<std::string>> records;
  for (std::size_t idx = 0; idx < field.grid.size(); ++idx) {
    if (field.excluded[idx]) continue;
    std::vector<double> k = field.grid.point(idx);
    const Matrix& m = field.value[idx];
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) {
        std::vector<std::string> row;
        for (int i = 0; i < d; ++i) row.push_back(fmt17(k[i]));
        row.push_back("e" + std::to_string(r) + std::to_string(c));
        row.push_back(fmt17(m(r, c).real()));
        row.push_back(fmt17(m(r, c).imag()));
        records.push_back(std::move(row));
      }
  }
  emit_csv(path, field_schema(d), records);
}

inline void write_convergence_csv(const std::string& path,
                                  const std::vector<ConvergenceRecord>& records) {
  CsvSchema schema{{"t", "pointwise_err", "sup_err", "excluded_fraction"}};
  std::vector<std::vector<std::string>> rows;
  for (const auto& rec : records)
    rows.push_back({std::to_string(rec.t), fmt17(rec.pointwise_err), fmt17(rec.sup_err),
                    fmt17(rec.excluded_fraction)});
  emit_csv(path, schema, rows);
}

inline void write_measure_csv(const std::string& path, const VelocityMeasure& measure) {
  CsvSchema schema;
  for (int i = 1; i <= measure.dimension; ++i)
    schema.columns.push_back("v" + std::to_string(i));
  schema.columns.push_back("weight");
  std::vector<std::vector<std::string>> records;
  for (const auto& [v, weight] : measure.atoms) {
    std::vector<std::string> row;
    for (double vi : v) row.push_back(fmt17(vi));
    row.push_back(fmt17(weight));
    records.push_back(std::move(row));
  }
  emit_csv(path, schema, records,
           {"unresolved_mass=" + fmt17(measure.unresolved_mass)});
}

}  // namespace qwalk
