#include "dagpost/io.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dagpost::io {

namespace {

void write_u32_le(std::ostream& os, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xFF),
                                  static_cast<unsigned char>((v >> 8) & 0xFF),
                                  static_cast<unsigned char>((v >> 16) & 0xFF),
                                  static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32_le(std::istream& is) {
  unsigned char bytes[4];
  is.read(reinterpret_cast<char*>(bytes), 4);
  if (!is) throw std::runtime_error("truncated binary dataset");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f64_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  if (!is) throw std::runtime_error("truncated binary dataset");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string cell_to_string(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::get<std::string>(cell);
}

nlohmann::json cell_to_json(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return std::get<std::string>(cell);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw std::invalid_argument("unknown format: " + name + " (expected csv or json)");
}

void write_table(const Table& table, std::ostream& os, Format format) {
  if (format == Format::json) {
    nlohmann::json out;
    out["config"] = table.config;
    if (table.timestamp) out["generated"] = *table.timestamp;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json obj;
      for (std::size_t c = 0; c < table.columns.size(); ++c) obj[table.columns[c]] = cell_to_json(row[c]);
      rows.push_back(std::move(obj));
    }
    out["rows"] = std::move(rows);
    os << out.dump(2) << '\n';
    return;
  }
  os << "# config " << table.config.dump() << '\n';
  if (table.timestamp) os << "# generated " << *table.timestamp << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    os << table.columns[c] << (c + 1 < table.columns.size() ? "," : "\n");
  }
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << cell_to_string(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
  }
}

void write_dataset_csv(const Eigen::MatrixXd& samples, std::ostream& os) {
  const Eigen::Index d = samples.cols();
  for (Eigen::Index j = 0; j < d; ++j) os << 'x' << (j + 1) << (j + 1 < d ? "," : "\n");
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      os << format_double(samples(i, j)) << (j + 1 < d ? "," : "\n");
    }
  }
}

Eigen::MatrixXd read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty dataset file");
  Eigen::Index d = 1;
  for (const char c : line) {
    if (c == ',') ++d;
  }
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    Eigen::Index count = 0;
    while (std::getline(row, field, ',')) {
      std::size_t used = 0;
      values.push_back(std::stod(field, &used));
      ++count;
    }
    if (count != d) throw std::runtime_error("ragged dataset row");
  }
  if (values.empty()) throw std::runtime_error("dataset file has no observations");
  const Eigen::Index n = static_cast<Eigen::Index>(values.size()) / d;
  Eigen::MatrixXd samples(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) samples(i, j) = values[static_cast<std::size_t>(i * d + j)];
  return samples;
}

void write_dataset_semd(const Eigen::MatrixXd& samples, std::ostream& os) {
  os.write("SEMD", 4);
  write_u32_le(os, static_cast<std::uint32_t>(samples.rows()));
  write_u32_le(os, static_cast<std::uint32_t>(samples.cols()));
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) write_f64_le(os, samples(i, j));
  }
}

Eigen::MatrixXd read_dataset_semd(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SEMD", 4) != 0) {
    throw std::runtime_error("not a SEMD dataset (bad magic)");
  }
  const std::uint32_t n = read_u32_le(is);
  const std::uint32_t d = read_u32_le(is);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint32_t j = 0; j < d; ++j) {
    for (std::uint32_t i = 0; i < n; ++i) {
      samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_f64_le(is);
    }
  }
  return samples;
}

Dataset load_dataset(const std::string& path, bool semd) {
  std::ifstream file(path, semd ? std::ios::binary : std::ios::in);
  if (!file) throw std::runtime_error("cannot open dataset file: " + path);
  return Dataset(semd ? read_dataset_semd(file) : read_dataset_csv(file));
}

void save_dataset(const Eigen::MatrixXd& samples, const std::string& path, bool semd) {
  std::ofstream file(path, semd ? std::ios::binary : std::ios::out);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  if (semd) {
    write_dataset_semd(samples, file);
  } else {
    write_dataset_csv(samples, file);
  }
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace dagpost::io
