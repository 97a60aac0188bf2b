#include "decisive/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "decisive/error.hpp"

namespace decisive {

namespace {

constexpr std::size_t kIoBufferSize = 1 << 20;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Minimal scanner for the fixed JSONL record schema.
class JsonCursor {
 public:
  explicit JsonCursor(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r' || s_[i_] == '\n'))
      ++i_;
  }
  bool eat(char c) {
    skip_ws();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  bool at_end() {
    skip_ws();
    return i_ == s_.size();
  }
  std::optional<std::string_view> string() {
    if (!eat('"')) return std::nullopt;
    const auto start = i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') return std::nullopt;  // keys never need escapes
      ++i_;
    }
    if (i_ == s_.size()) return std::nullopt;
    return s_.substr(start, i_++ - start);
  }
  std::optional<double> number() {
    skip_ws();
    const auto start = i_;
    if (i_ < s_.size() && s_[i_] == '-') ++i_;
    if (i_ == s_.size() || s_[i_] < '0' || s_[i_] > '9') return std::nullopt;
    while (i_ < s_.size() && ((s_[i_] >= '0' && s_[i_] <= '9') || s_[i_] == '.' || s_[i_] == 'e' ||
                              s_[i_] == 'E' || s_[i_] == '+' || s_[i_] == '-'))
      ++i_;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + i_, v);
    if (ec != std::errc() || ptr != s_.data() + i_) return std::nullopt;
    return v;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

void append_double(std::string& buf, double v) {
  char tmp[32];
  const auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, ptr);
}

}  // namespace

DataFormat parse_format(std::string_view name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "jsonl") return DataFormat::jsonl;
  throw UsageError("unknown format '" + std::string(name) + "' (expected csv or jsonl)");
}

std::string_view to_string(DataFormat f) { return f == DataFormat::csv ? "csv" : "jsonl"; }

DataFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" ? DataFormat::jsonl : DataFormat::csv;
}

PredictionReader::PredictionReader(std::istream& in, DataFormat format, const EvalConfig& config,
                                   bool strict)
    : in_(in), format_(format), config_(config), strict_(strict) {
  config_.validate();
}

void PredictionReader::reject(std::string_view reason, const std::string& detail) {
  if (strict_) throw ValidationError(std::string(reason), line_no_, detail);
  ++summary_.n_rejected;
  ++summary_.rejection_reasons[std::string(reason)];
}

bool PredictionReader::read_header() {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (line_no_ == 1 && line_.starts_with("\xEF\xBB\xBF")) line_.erase(0, 3);
    const std::string_view line = trim(line_);
    if (line.empty() || line.front() == '#') continue;
    if (format_ == DataFormat::jsonl) {
      // No header: this line is the first data row.
      header_done_ = true;
      return true;
    }
    std::size_t column = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto field = trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      const std::string expected = column == 0 ? "label" : "p" + std::to_string(column - 1);
      if (field != expected)
        throw ValidationError("bad-header", line_no_,
                              "expected '" + expected + "', found '" + std::string(field) + "'");
      ++column;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    classes_ = column - 1;
    summary_.n_classes = *classes_;
    header_done_ = true;
    return false;
  }
  if (format_ == DataFormat::csv) throw ValidationError("missing-header", 0, "no CSV header line");
  header_done_ = true;
  return false;
}

bool PredictionReader::validate(PredictionRecord& rec) {
  if (rec.label >= rec.probs.size()) {
    reject(reject::label_out_of_range, "label " + std::to_string(rec.label) + " with " +
                                            std::to_string(rec.probs.size()) + " classes");
    return false;
  }
  CompensatedSum sum;
  for (std::size_t c = 0; c < rec.probs.size(); ++c) {
    const double p = rec.probs[c];
    if (!(p >= 0.0 && p <= 1.0)) {
      reject(reject::prob_out_of_range, "p" + std::to_string(c));
      return false;
    }
    sum.add(p);
  }
  const double total = sum.value();
  if (!(std::fabs(total - 1.0) <= config_.prob_sum_tolerance)) {
    reject(reject::sum_out_of_tolerance, "sum " + std::to_string(total));
    return false;
  }
  if (total != 1.0)
    for (auto& p : rec.probs) p /= total;
  return true;
}

bool PredictionReader::parse_csv_row(std::string_view line, PredictionRecord& out) {
  out.probs.clear();
  std::size_t start = 0;
  std::size_t column = 0;
  bool parse_ok = true;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
    if (column == 0) {
      const auto label = parse_int(field);
      if (!label) parse_ok = false;
      else if (*label < 0) {
        // Any negative label is out of range; keep scanning for column count.
        out.label = static_cast<std::size_t>(-1);
      } else {
        out.label = static_cast<std::size_t>(*label);
      }
    } else {
      const auto p = parse_double(field);
      if (!p) parse_ok = false;
      out.probs.push_back(p.value_or(0.0));
    }
    ++column;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (column != *classes_ + 1) {
    reject(reject::column_count, std::to_string(column) + " columns, expected " +
                                     std::to_string(*classes_ + 1));
    return false;
  }
  if (!parse_ok) {
    reject(reject::parse_error, "non-numeric field");
    return false;
  }
  return validate(out);
}

bool PredictionReader::parse_jsonl_row(std::string_view line, PredictionRecord& out) {
  out.probs.clear();
  JsonCursor cur(line);
  std::optional<double> label;
  bool have_probs = false;
  const auto fail = [&](const std::string& detail) {
    reject(reject::parse_error, detail);
    return false;
  };

  if (!cur.eat('{')) return fail("expected '{'");
  if (cur.eat('}')) return fail("empty object");
  while (true) {
    const auto key = cur.string();
    if (!key) return fail("expected a key");
    if (!cur.eat(':')) return fail("expected ':'");
    if (*key == "label") {
      if (label) return fail("duplicate key 'label'");
      label = cur.number();
      if (!label) return fail("label is not a number");
    } else if (*key == "probs") {
      if (have_probs) return fail("duplicate key 'probs'");
      have_probs = true;
      if (!cur.eat('[')) return fail("probs is not an array");
      if (!cur.eat(']')) {
        while (true) {
          const auto p = cur.number();
          if (!p) return fail("non-numeric probability");
          out.probs.push_back(*p);
          if (cur.eat(',')) continue;
          if (cur.eat(']')) break;
          return fail("expected ',' or ']'");
        }
      }
    } else {
      return fail("unexpected key '" + std::string(*key) + "'");
    }
    if (cur.eat(',')) continue;
    if (cur.eat('}')) break;
    return fail("expected ',' or '}'");
  }
  if (!cur.at_end()) return fail("trailing characters after object");
  if (!label || !have_probs) return fail(label ? "missing key 'probs'" : "missing key 'label'");
  if (*label != std::floor(*label)) return fail("label is not an integer");

  if (classes_ && out.probs.size() != *classes_) {
    reject(reject::class_count_mismatch, std::to_string(out.probs.size()) + " classes, expected " +
                                             std::to_string(*classes_));
    return false;
  }
  out.label = *label < 0 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(*label);
  if (!validate(out)) return false;
  if (!classes_) {
    classes_ = out.probs.size();
    summary_.n_classes = *classes_;
  }
  return true;
}

bool PredictionReader::next(PredictionRecord& out) {
  if (!header_done_) pending_row_ = read_header();
  while (true) {
    if (pending_row_) {
      pending_row_ = false;
    } else {
      if (!std::getline(in_, line_)) break;
      ++line_no_;
    }
    const std::string_view row = trim(line_);
    if (row.empty()) continue;
    const bool ok = format_ == DataFormat::csv ? parse_csv_row(row, out) : parse_jsonl_row(row, out);
    if (ok) {
      ++summary_.n_records;
      return true;
    }
  }
  if (in_.bad()) throw IoError("read failure at line " + std::to_string(line_no_));
  return false;
}

ReadResult read_predictions(std::istream& in, DataFormat format, const EvalConfig& config,
                            bool strict) {
  PredictionReader reader(in, format, config, strict);
  ReadResult result;
  PredictionRecord rec;
  while (reader.next(rec)) result.records.push_back(rec);
  result.summary = reader.summary();
  return result;
}

ReadResult read_predictions(const std::filesystem::path& path, DataFormat format,
                            const EvalConfig& config, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  auto result = read_predictions(in, format, config, strict);
  result.summary.name = path.filename().string();
  return result;
}

PredictionWriter::PredictionWriter(std::ostream& out, DataFormat format, std::size_t n_classes)
    : out_(out), format_(format), n_classes_(n_classes) {
  if (format_ == DataFormat::csv) {
    buf_ = "label";
    for (std::size_t c = 0; c < n_classes_; ++c) buf_ += ",p" + std::to_string(c);
    buf_ += '\n';
    out_ << buf_;
    if (!out_) throw IoError("write failure");
  }
}

void PredictionWriter::write(const PredictionRecord& record) {
  if (record.probs.size() != n_classes_)
    throw UsageError("record has " + std::to_string(record.probs.size()) + " classes, writer expects " +
                     std::to_string(n_classes_));
  buf_.clear();
  if (format_ == DataFormat::csv) {
    buf_ += std::to_string(record.label);
    for (double p : record.probs) {
      buf_ += ',';
      append_double(buf_, p);
    }
  } else {
    buf_ += "{\"label\":";
    buf_ += std::to_string(record.label);
    buf_ += ",\"probs\":[";
    for (std::size_t c = 0; c < record.probs.size(); ++c) {
      if (c) buf_ += ',';
      append_double(buf_, record.probs[c]);
    }
    buf_ += "]}";
  }
  buf_ += '\n';
  out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (!out_) throw IoError("write failure");
  ++count_;
}

std::size_t write_predictions(std::span<const PredictionRecord> records, std::ostream& out,
                              DataFormat format) {
  const std::size_t k = records.empty() ? 0 : records.front().probs.size();
  PredictionWriter writer(out, format, k);
  for (const auto& r : records) writer.write(r);
  out.flush();
  if (!out) throw IoError("write failure");
  return writer.count();
}

SpanSource::SpanSource(std::span<const PredictionRecord> records, std::string name)
    : records_(records), name_(std::move(name)) {}

void SpanSource::scan(std::size_t window, const Visitor& visit) const {
  window = std::max<std::size_t>(window, 1);
  for (std::size_t i = 0; i < records_.size(); i += window)
    visit(records_.subspan(i, std::min(window, records_.size() - i)));
}

DatasetSummary SpanSource::summary() const {
  DatasetSummary s;
  s.name = name_;
  s.n_records = records_.size();
  s.n_classes = records_.empty() ? 0 : records_.front().probs.size();
  return s;
}

FileSource::FileSource(std::filesystem::path path, DataFormat format, EvalConfig config, bool strict)
    : path_(std::move(path)), format_(format), config_(config), strict_(strict) {}

void FileSource::scan(std::size_t window, const Visitor& visit) const {
  window = std::max<std::size_t>(window, 1);
  std::vector<char> iobuf(kIoBufferSize);
  std::ifstream in;
  in.rdbuf()->pubsetbuf(iobuf.data(), static_cast<std::streamsize>(iobuf.size()));
  in.open(path_, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path_.string() + "' for reading");

  PredictionReader reader(in, format_, config_, strict_);
  std::vector<PredictionRecord> buffer(window);
  std::size_t filled = 0;
  while (reader.next(buffer[filled])) {
    if (++filled == window) {
      visit(std::span<const PredictionRecord>(buffer.data(), filled));
      filled = 0;
    }
  }
  if (filled > 0) visit(std::span<const PredictionRecord>(buffer.data(), filled));
  auto s = reader.summary();
  s.name = path_.filename().string();
  summary_ = std::move(s);
}

DatasetSummary FileSource::summary() const {
  if (!summary_) throw UsageError("FileSource::summary() called before any scan");
  return *summary_;
}

}  // namespace decisive
