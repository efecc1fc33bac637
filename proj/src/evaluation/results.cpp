#include "dynnet/evaluation/results.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include "dynnet/core/bytes.hpp"
#include "dynnet/core/error.hpp"
#include "dynnet/evaluation/stats.hpp"

namespace dynnet::eval {

double ResultColumn::subject_mean(std::size_t s) const { return mean(accuracy.at(s)); }

double ResultColumn::subject_std(std::size_t s) const { return sample_std(accuracy.at(s)); }

double ResultColumn::average() const {
  std::vector<double> means;
  for (std::size_t s = 0; s < subjects.size(); ++s) means.push_back(subject_mean(s));
  return mean(means);
}

double ResultColumn::average_std() const {
  if (accuracy.empty()) return 0.0;
  const std::size_t reps = accuracy.front().size();
  std::vector<double> per_rep(reps, 0.0);
  for (const auto& row : accuracy) {
    if (row.size() != reps) throw ConfigError("column " + name + " has ragged repetitions");
    for (std::size_t r = 0; r < reps; ++r) per_rep[r] += row[r] / static_cast<double>(accuracy.size());
  }
  return sample_std(per_rep);
}

void mark_significance(ResultsTable& table, std::size_t a, std::size_t b) {
  const ResultColumn& x = table.columns.at(a);
  const ResultColumn& y = table.columns.at(b);
  if (x.subjects != y.subjects) {
    throw ConfigError("cannot pair " + x.name + " with " + y.name + ": subjects differ");
  }
  std::vector<double> ma, mb;
  for (std::size_t s = 0; s < x.subjects.size(); ++s) {
    ma.push_back(x.subject_mean(s));
    mb.push_back(y.subject_mean(s));
  }
  const TTest t = paired_t_test(ma, mb);
  table.columns[a].p_value = t.p;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s vs %s: paired t = %.4f, df = %.0f, p = %.6g%s", x.name.c_str(),
                y.name.c_str(), t.t, t.df, t.p, t.degenerate ? " (degenerate)" : "");
  table.notes.emplace_back(buf);
}

std::string format_cell(double mean, double std, bool mark) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f%s", mean, std, mark ? "*" : "");
  return buf;
}

std::string emit_table(const ResultsTable& table, TableFormat format) {
  if (table.columns.empty()) throw ConfigError("results table has no columns");
  std::set<int> all;
  for (const auto& c : table.columns) all.insert(c.subjects.begin(), c.subjects.end());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"subject"};
  for (const auto& c : table.columns) header.push_back(c.name);
  for (int s : all) {
    std::vector<std::string> row{std::to_string(s)};
    for (const auto& c : table.columns) {
      const auto it = std::find(c.subjects.begin(), c.subjects.end(), s);
      if (it == c.subjects.end()) {
        row.emplace_back();
      } else {
        const auto k = static_cast<std::size_t>(it - c.subjects.begin());
        row.push_back(format_cell(c.subject_mean(k), c.subject_std(k)));
      }
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> avg{"AVG"};
  for (const auto& c : table.columns) {
    const bool mark = c.p_value && *c.p_value < kSignificance;
    avg.push_back(format_cell(c.average(), c.average_std(), mark));
  }
  rows.push_back(std::move(avg));

  std::string out;
  if (format == TableFormat::csv) {
    const auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    out += '|';
    for (const auto& c : cells) out += ' ' + c + " |";
    out += '\n';
  };
  line(header);
  out += '|';
  for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& r : rows) line(r);
  out += "\nAccuracy in percent, mean±std over repetitions; AVG std is taken over the "
         "per-repetition subject averages. * marks p < 0.005.\n";
  for (const auto& n : table.notes) out += "\n" + n + "\n";
  return out;
}

namespace {

constexpr char kMagic[5] = "RSLT";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string serialize(const ResultsTable& table) {
  ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(table.columns.size()));
  for (const auto& c : table.columns) {
    w.str(c.name);
    w.u32(static_cast<std::uint32_t>(c.subjects.size()));
    for (std::size_t s = 0; s < c.subjects.size(); ++s) {
      w.u32(static_cast<std::uint32_t>(c.subjects[s]));
      w.u32(static_cast<std::uint32_t>(c.accuracy.at(s).size()));
      for (double a : c.accuracy[s]) w.f64(a);
    }
    w.u8(c.p_value ? 1 : 0);
    w.f64(c.p_value.value_or(0.0));
  }
  w.u32(static_cast<std::uint32_t>(table.notes.size()));
  for (const auto& n : table.notes) w.str(n);
  return w.bytes();
}

ResultsTable deserialize_results(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kMagic, "results file");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw DataError(DataErrorCode::bad_version, "unsupported results version " + std::to_string(version));
  ResultsTable table;
  const std::uint32_t cols = r.u32();
  for (std::uint32_t c = 0; c < cols; ++c) {
    ResultColumn col;
    col.name = r.str();
    const std::uint32_t subjects = r.u32();
    for (std::uint32_t s = 0; s < subjects; ++s) {
      col.subjects.push_back(static_cast<int>(r.u32()));
      std::vector<double> acc(r.u32());
      for (double& a : acc) a = r.f64();
      col.accuracy.push_back(std::move(acc));
    }
    const bool has_p = r.u8() != 0;
    const double p = r.f64();
    if (has_p) col.p_value = p;
    table.columns.push_back(std::move(col));
  }
  const std::uint32_t notes = r.u32();
  for (std::uint32_t i = 0; i < notes; ++i) table.notes.push_back(r.str());
  if (!r.done()) throw DataError(DataErrorCode::invalid_argument, "trailing bytes after results");
  return table;
}

void save(const ResultsTable& table, const std::filesystem::path& path) {
  const std::string bytes = serialize(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataErrorCode::io, "cannot write " + path.string());
}

ResultsTable load_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorCode::io, "cannot open " + path.string());
  return deserialize_results(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

}  // namespace dynnet::eval
