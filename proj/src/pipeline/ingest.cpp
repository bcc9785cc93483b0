#include "divcomb/pipeline/ingest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace divcomb::pipeline {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

Error unparsable(std::size_t row, std::size_t col, std::string_view cell) {
  return Error(ErrorKind::unparsable_value,
               fmt::format("row {}, column {}: cannot parse '{}'", row, col, cell));
}

struct WideRow {
  std::string id;
  std::vector<double> values;
};

// Rows of a wide file, header skipped. Row numbers are 1-based file lines.
std::vector<WideRow> read_wide(std::istream& in) {
  std::vector<WideRow> rows;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    while (cells.size() > 1 && is_missing(cells.back())) cells.pop_back();
    WideRow row;
    row.id = std::string(trim(cells[0]));
    if (row.id.empty()) throw unparsable(line_no, 1, cells[0]);
    if (!seen.insert(row.id).second) throw Error(ErrorKind::duplicate_id, "duplicate series id '" + row.id + "'");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) throw unparsable(line_no, c + 1, cells[c]);
      row.values.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void admit(IngestResult& out, std::string id, const Frequency& frequency, std::vector<double> values,
           std::optional<int> horizon) {
  try {
    out.series.emplace_back(id, frequency, std::move(values), horizon);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::series_too_short) throw;
    out.rejected.push_back({id, std::string(error_kind_name(e.kind())), e.what()});
  }
}

void sort_series(IngestResult& out) {
  std::sort(out.series.begin(), out.series.end(),
            [](const TimeSeries& a, const TimeSeries& b) { return a.id() < b.id(); });
}

}  // namespace

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

IngestResult ingest_m4(std::istream& train, std::istream* test, const Frequency& frequency,
                       std::optional<int> horizon) {
  IngestResult out;
  const auto train_rows = read_wide(train);
  std::map<std::string, std::vector<double>> test_rows;
  if (test != nullptr) {
    for (auto& row : read_wide(*test)) test_rows.emplace(row.id, std::move(row.values));
  }
  for (const auto& row : train_rows) {
    if (test != nullptr) {
      const auto it = test_rows.find(row.id);
      if (it == test_rows.end()) throw Error(ErrorKind::missing_test_row, "no test row for '" + row.id + "'");
      out.actuals[row.id] = it->second;
    }
    admit(out, row.id, frequency, row.values, horizon);
  }
  sort_series(out);
  return out;
}

IngestResult ingest_m4_files(const std::filesystem::path& train,
                             const std::optional<std::filesystem::path>& test,
                             const Frequency& frequency, std::optional<int> horizon) {
  std::ifstream tin(train, std::ios::binary);
  if (!tin) throw Error(ErrorKind::io, "cannot read " + train.string());
  std::ifstream sin;
  if (test) {
    sin.open(*test, std::ios::binary);
    if (!sin) throw Error(ErrorKind::io, "cannot read " + test->string());
  }
  return ingest_m4(tin, test ? &sin : nullptr, frequency, horizon);
}

namespace {

struct LongCell {
  long long index;
  std::optional<double> value;
  std::size_t line;
};

std::map<std::string, std::vector<LongCell>> read_long(std::istream& in) {
  std::map<std::string, std::vector<LongCell>> groups;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < 3) throw unparsable(line_no, cells.size() + 1, "");
    const auto id = std::string(trim(cells[0]));
    const auto idx_text = trim(cells[1]);
    long long idx = 0;
    const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    if (ec != std::errc() || ptr != idx_text.data() + idx_text.size()) throw unparsable(line_no, 2, cells[1]);
    std::optional<double> value;
    if (!is_missing(cells[2])) {
      value = parse_number(cells[2]);
      if (!value) throw unparsable(line_no, 3, cells[2]);
    }
    groups[id].push_back({idx, value, line_no});
  }
  for (auto& [id, cells] : groups) {
    std::stable_sort(cells.begin(), cells.end(), [](const LongCell& a, const LongCell& b) { return a.index < b.index; });
    for (std::size_t k = 1; k < cells.size(); ++k) {
      if (cells[k].index != cells[k - 1].index + 1) {
        throw Error(ErrorKind::non_contiguous_index,
                    fmt::format("series '{}': index jumps from {} to {}", id, cells[k - 1].index, cells[k].index));
      }
    }
  }
  return groups;
}

}  // namespace

IngestResult ingest_long(std::istream& in, const Frequency& frequency, std::optional<int> horizon) {
  IngestResult out;
  for (auto& [id, cells] : read_long(in)) {
    std::size_t first = 0;
    while (first < cells.size() && !cells[first].value) ++first;
    std::vector<double> values;
    for (std::size_t k = first; k < cells.size(); ++k) {
      if (!cells[k].value) throw unparsable(cells[k].line, 3, "missing value inside the series");
      values.push_back(*cells[k].value);
    }
    admit(out, id, frequency, std::move(values), horizon);
  }
  sort_series(out);
  return out;
}

std::map<std::string, std::vector<double>> ingest_long_actuals(std::istream& in) {
  std::map<std::string, std::vector<double>> out;
  for (auto& [id, cells] : read_long(in)) {
    auto& v = out[id];
    for (const auto& c : cells) {
      if (!c.value) throw unparsable(c.line, 3, "missing test value");
      v.push_back(*c.value);
    }
  }
  return out;
}

}  // namespace divcomb::pipeline
