#ifndef DAGPOST_IO_HPP
#define DAGPOST_IO_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dagpost/sem.hpp"

namespace dagpost::io {

/// Lossless shortest-round-trip formatting ("%.17g").
std::string format_double(double v);

enum class Format { csv, json };
Format parse_format(const std::string& name);

using Cell = std::variant<std::int64_t, double, std::string>;

/// Columnar output with a one-line JSON config echo.  CSV renders the config
/// (and optional timestamp) as "#"-prefixed comment lines before the header;
/// JSON renders an object with config, optional timestamp, and row objects.
struct Table {
  nlohmann::json config;
  std::optional<std::string> timestamp;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_table(const Table& table, std::ostream& os, Format format);

/// Dataset as CSV: header "x1,...,xd", one observation per line.
void write_dataset_csv(const Eigen::MatrixXd& samples, std::ostream& os);
Eigen::MatrixXd read_dataset_csv(std::istream& is);

/// Dataset in the binary columnar format: magic "SEMD", little-endian u32
/// observation count, u32 dimension, then f64 values column by column.
void write_dataset_semd(const Eigen::MatrixXd& samples, std::ostream& os);
Eigen::MatrixXd read_dataset_semd(std::istream& is);

/// Reads a dataset file in either format (binary when semd is set).
Dataset load_dataset(const std::string& path, bool semd);
void save_dataset(const Eigen::MatrixXd& samples, const std::string& path, bool semd);

/// Current time as ISO-8601, for the suppressible output header line.
std::string iso8601_now();

}  // namespace dagpost::io

#endif  // DAGPOST_IO_HPP
