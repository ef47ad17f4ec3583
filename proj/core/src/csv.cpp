#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cate/data.hpp"
#include "cate/error.hpp"

namespace cate {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t row, std::string_view column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("csv: cannot parse '" + std::string(field) + "' in column '" +
                          std::string(column) + "' at data row " + std::to_string(row));
  }
  if (!std::isfinite(value)) {
    throw ValidationError("csv: non-finite value in column '" + std::string(column) +
                          "' at data row " + std::to_string(row));
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("csv: failed to format value");
  return std::string(buf, ptr);
}

}  // namespace

LoadedDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path.string());

  std::string header_line;
  if (!std::getline(in, header_line)) throw SchemaError("csv: missing header in " + path.string());
  if (header_line.size() >= 3 && header_line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    header_line.erase(0, 3);
  }
  const auto header_views = split_fields(header_line);
  std::map<std::string, std::size_t, std::less<>> column_of;
  std::vector<std::string> header;
  for (std::size_t c = 0; c < header_views.size(); ++c) {
    header.emplace_back(header_views[c]);
    if (!column_of.emplace(header.back(), c).second) {
      throw SchemaError("csv: duplicate column '" + header.back() + "'");
    }
  }

  auto require = [&](const std::string& name) {
    const auto it = column_of.find(name);
    if (it == column_of.end()) throw SchemaError("csv: missing required column '" + name + "'");
    return it->second;
  };
  const std::size_t t_col = require(schema.treatment);
  const std::size_t y_col = require(schema.outcome);
  const auto mu0_it = column_of.find(schema.mu0);
  const auto mu1_it = column_of.find(schema.mu1);
  const bool has_truth = mu0_it != column_of.end() && mu1_it != column_of.end();
  if ((mu0_it != column_of.end()) != (mu1_it != column_of.end())) {
    throw SchemaError("csv: columns '" + schema.mu0 + "' and '" + schema.mu1 +
                      "' must appear together");
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (!schema.features.empty()) {
    for (const auto& f : schema.features) {
      feature_cols.push_back(require(f));
      feature_names.push_back(f);
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& name = header[c];
      if (name == schema.treatment || name == schema.outcome || name == schema.mu0 ||
          name == schema.mu1) {
        continue;
      }
      feature_cols.push_back(c);
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw SchemaError("csv: no feature columns in " + path.string());

  std::vector<double> xs, ts, ys, m0s, m1s;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ValidationError("csv: data row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    for (const auto c : feature_cols) xs.push_back(parse_double(fields[c], row, header[c]));
    const double t = parse_double(fields[t_col], row, schema.treatment);
    if (t != 0.0 && t != 1.0) {
      throw ValidationError("csv: treatment value '" + std::string(fields[t_col]) +
                            "' at data row " + std::to_string(row) + " is not 0 or 1");
    }
    ts.push_back(t);
    ys.push_back(parse_double(fields[y_col], row, schema.outcome));
    if (has_truth) {
      m0s.push_back(parse_double(fields[mu0_it->second], row, schema.mu0));
      m1s.push_back(parse_double(fields[mu1_it->second], row, schema.mu1));
    }
    ++row;
  }

  const auto n = static_cast<Index>(row);
  const auto d = static_cast<Index>(feature_cols.size());
  LoadedDataset out;
  out.data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, d);
  out.data.t = Eigen::Map<const Vector>(ts.data(), n);
  out.data.y = Eigen::Map<const Vector>(ys.data(), n);
  out.data.validate();
  if (has_truth) {
    out.truth = GroundTruth::from_potential_outcomes(Eigen::Map<const Vector>(m0s.data(), n),
                                                     Eigen::Map<const Vector>(m1s.data(), n));
  }
  out.feature_names = std::move(feature_names);
  return out;
}

CovariateTable load_covariates_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("csv: missing header in " + path.string());
  CovariateTable out;
  for (const auto f : split_fields(line)) out.names.emplace_back(f);
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != out.names.size()) {
      throw ValidationError("csv: data row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(out.names.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      values.push_back(parse_double(fields[c], row, out.names[c]));
    }
    ++row;
  }
  out.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Index>(row), static_cast<Index>(out.names.size()));
  return out;
}

void save_csv(const std::filesystem::path& path, const ObservationalDataset& data,
              const GroundTruth* truth, std::span<const std::string> feature_names,
              std::span<const ExtraColumn> extra) {
  const auto defaults = default_feature_names(data.dim());
  const std::span<const std::string> names =
      feature_names.empty() ? std::span<const std::string>(defaults) : feature_names;
  if (static_cast<Index>(names.size()) != data.dim()) {
    throw DimensionError("csv: feature name count does not match dataset columns");
  }
  if (truth && truth->size() != data.size()) throw DimensionError("csv: truth length mismatch");
  for (const auto& [name, col] : extra) {
    if (col.size() != data.size()) throw DimensionError("csv: column '" + name + "' length mismatch");
  }

  std::ostringstream out;
  for (const auto& n : names) out << n << ',';
  out << "t,y";
  if (truth) out << ",mu0,mu1";
  for (const auto& [name, col] : extra) out << ',' << name;
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) out << format_double(data.x(i, j)) << ',';
    out << (data.t[i] > 0.5 ? '1' : '0') << ',' << format_double(data.y[i]);
    if (truth) out << ',' << format_double(truth->mu0[i]) << ',' << format_double(truth->mu1[i]);
    for (const auto& [name, col] : extra) out << ',' << format_double(col[i]);
    out << '\n';
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("csv: cannot write " + path.string());
  const auto text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw IoError("csv: write failed for " + path.string());
}

}  // namespace cate
