#include "dynnet/dataio/csv_import.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dynnet/core/error.hpp"

namespace dynnet::data {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

DataError bad(const std::filesystem::path& file, std::size_t line, const std::string& msg) {
  return DataError(DataErrorCode::invalid_argument,
                   file.string() + ":" + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw bad(file, line, "not a number: '" + s + "'");
  return v;
}

std::vector<std::vector<float>> read_matrix(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(DataErrorCode::io, "cannot open " + file.string());
  std::vector<std::vector<float>> rows;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    std::vector<float> row;
    for (const auto& cell : split(line)) row.push_back(parse_number<float>(cell, file, no));
    if (!rows.empty() && row.size() != rows.front().size()) throw bad(file, no, "ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw bad(file, no, "empty trial matrix");
  return rows;
}

Session parse_session(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  if (s == "train" || s == "0") return Session::train;
  if (s == "test" || s == "1") return Session::test;
  throw bad(file, line, "session must be train/test or 0/1, got '" + s + "'");
}

}  // namespace

TrialSet import_csv_manifest(const std::filesystem::path& manifest, double fs) {
  std::ifstream in(manifest);
  if (!in) throw DataError(DataErrorCode::io, "cannot open " + manifest.string());
  const auto base = manifest.parent_path();
  std::string line;
  std::size_t no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++no;
    if (!trim(line).empty()) header = split(line);
  }
  if (header != std::vector<std::string>{"file", "label", "subject", "session"}) {
    throw bad(manifest, no, "header must be file,label,subject,session");
  }

  TrialSet set;
  set.fs = fs;
  std::vector<float> samples;
  std::size_t channels = 0, length = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 4) throw bad(manifest, no, "expected 4 fields");
    std::filesystem::path file = cells[0];
    if (file.is_relative()) file = base / file;
    const auto rows = read_matrix(file);
    if (set.labels.empty()) {
      channels = rows.size();
      length = rows.front().size();
    } else if (rows.size() != channels || rows.front().size() != length) {
      throw bad(manifest, no, "trial shape differs from the first trial");
    }
    for (const auto& r : rows) samples.insert(samples.end(), r.begin(), r.end());
    set.labels.push_back(parse_number<int>(cells[1], manifest, no));
    set.subjects.push_back(parse_number<int>(cells[2], manifest, no));
    set.sessions.push_back(parse_session(cells[3], manifest, no));
  }
  if (set.labels.empty()) throw bad(manifest, no, "manifest lists no trials");
  set.data = nn::Tensor<float>(nn::Shape{set.labels.size(), channels, length}, std::move(samples));
  set.validate();
  return set;
}

}  // namespace dynnet::data
