#include "commsense/capture_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <vector>

#include "commsense/errors.hpp"

namespace commsense {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCaptureMagic = "COMMSENSE-CAPTURE";
constexpr std::string_view kModelMagic = "COMMSENSE-MODEL";
constexpr std::array<char, 4> kIqMagic = {'C', 'S', 'I', 'Q'};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

// Splits text into lines while remembering each line's byte offset.
class LineReader {
 public:
  LineReader(const std::string& text, fs::path path) : text_(text), path_(std::move(path)) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    line_offset_ = pos_;
    const std::size_t nl = text_.find('\n', pos_);
    const std::size_t end = nl == std::string::npos ? text_.size() : nl;
    line = std::string_view(text_).substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl == std::string::npos ? text_.size() : nl + 1;
    return true;
  }

  std::size_t offset() const noexcept { return line_offset_; }
  std::size_t end_offset() const noexcept { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_.string() + ": byte offset " + std::to_string(line_offset_) + ": " + what);
  }

 private:
  const std::string& text_;
  fs::path path_;
  std::size_t pos_ = 0;
  std::size_t line_offset_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

template <class T>
T number_or_fail(const LineReader& lr, std::string_view s, const char* what) {
  T v{};
  if (!parse_number(s, v)) lr.fail(std::string("malformed ") + what + " '" + std::string(s) + "'");
  return v;
}

// "key value..." -> (key, rest)
std::pair<std::string_view, std::string_view> split_key(std::string_view line) {
  const std::size_t sp = line.find(' ');
  if (sp == std::string_view::npos) return {line, {}};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

void check_magic(LineReader& lr, std::string_view magic, int supported) {
  std::string_view line;
  if (!lr.next(line)) lr.fail("empty file");
  const auto [key, rest] = split_key(line);
  if (key != magic) lr.fail("not a " + std::string(magic) + " file");
  const int version = number_or_fail<int>(lr, rest, "format version");
  if (version != supported) {
    throw UnsupportedVersion("unsupported " + std::string(magic) + " version " +
                             std::to_string(version) + " (supported: " + std::to_string(supported) + ")");
  }
}

// --- little-endian helpers -------------------------------------------------------

template <class T>
void put_le(std::string& out, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

void put_f32(std::string& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
 public:
  ByteReader(const std::string& data, fs::path path) : data_(data), path_(std::move(path)) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_.string() + ": byte offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail("truncated header (need " + std::to_string(n) + " more bytes)");
  }
  const std::string& data_;
  fs::path path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string utc_timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

// --- capture ---------------------------------------------------------------------

void write_capture(const fs::path& path, const CaptureDataset& d) {
  if (d.empty()) throw InvalidArgument("refusing to write an empty capture dataset");
  if (d.cir_length == 0) throw InvalidArgument("capture CIR length must be >= 1");
  for (const auto& r : d.records) {
    if (r.taps.size() != d.cir_length) {
      throw InvalidArgument("record for burst " + std::to_string(r.burst_index) + " has " +
                            std::to_string(r.taps.size()) + " taps, expected " +
                            std::to_string(d.cir_length));
    }
  }
  const CaptureMetadata& m = d.meta;
  std::string out;
  out += std::string(kCaptureMagic) + " " + std::to_string(kCaptureFormatVersion) + "\n";
  out += "label " + m.label + "\n";
  out += "method " + m.method + "\n";
  out += "tsc " + std::to_string(m.tsc) + "\n";
  out += "window " + std::to_string(m.window) + "\n";
  out += "oversample " + std::to_string(m.oversample) + "\n";
  out += "snr_db " + (m.snr_db ? format_double(*m.snr_db) : std::string("none")) + "\n";
  out += "scenario " + m.scenario + "\n";
  out += "created " + (m.created.empty() ? utc_timestamp_now() : m.created) + "\n";
  out += "cir_length " + std::to_string(d.cir_length) + "\n";
  out += "bursts " + std::to_string(d.records.size()) + "\n";
  out += "records\n";
  for (const auto& r : d.records) {
    out += std::to_string(r.burst_index) + " " + std::to_string(r.start_sample);
    for (const cplx& t : r.taps) out += " " + format_double(t.real()) + " " + format_double(t.imag());
    out += "\n";
  }
  write_file(path, out);
}

CaptureDataset read_capture(const fs::path& path) {
  const std::string text = read_file(path);
  LineReader lr(text, path);
  check_magic(lr, kCaptureMagic, kCaptureFormatVersion);

  CaptureDataset d;
  std::size_t declared = 0;
  bool have_cl = false;
  bool have_count = false;
  std::string_view line;
  bool in_records = false;
  while (lr.next(line)) {
    if (line == "records") {
      in_records = true;
      break;
    }
    const auto [key, value] = split_key(line);
    const std::string v(value);
    if (key == "label") d.meta.label = v;
    else if (key == "method") d.meta.method = v;
    else if (key == "tsc") d.meta.tsc = number_or_fail<int>(lr, value, "tsc");
    else if (key == "window") d.meta.window = number_or_fail<int>(lr, value, "window");
    else if (key == "oversample") d.meta.oversample = number_or_fail<int>(lr, value, "oversample");
    else if (key == "snr_db") {
      if (value == "none") d.meta.snr_db.reset();
      else d.meta.snr_db = number_or_fail<double>(lr, value, "snr_db");
    } else if (key == "scenario") d.meta.scenario = v;
    else if (key == "created") d.meta.created = v;
    else if (key == "cir_length") {
      d.cir_length = number_or_fail<std::size_t>(lr, value, "cir_length");
      have_cl = true;
    } else if (key == "bursts") {
      declared = number_or_fail<std::size_t>(lr, value, "burst count");
      have_count = true;
    } else {
      lr.fail("unknown header field '" + std::string(key) + "'");
    }
  }
  if (!in_records) lr.fail("missing 'records' marker (truncated header)");
  if (!have_cl || d.cir_length == 0) lr.fail("header lacks a positive cir_length");
  if (!have_count) lr.fail("header lacks the burst count");

  const std::size_t fields = 2 + 2 * d.cir_length;
  while (lr.next(line)) {
    if (line.empty()) continue;
    const auto tok = split_ws(line);
    if (tok.size() != fields) {
      lr.fail("record has " + std::to_string(tok.size()) + " fields, expected " + std::to_string(fields));
    }
    CaptureRecord r;
    r.burst_index = number_or_fail<std::size_t>(lr, tok[0], "burst index");
    r.start_sample = number_or_fail<std::size_t>(lr, tok[1], "start sample");
    r.taps.resize(d.cir_length);
    for (std::size_t k = 0; k < d.cir_length; ++k) {
      r.taps[k] = {number_or_fail<double>(lr, tok[2 + 2 * k], "tap value"),
                   number_or_fail<double>(lr, tok[3 + 2 * k], "tap value")};
    }
    d.records.push_back(std::move(r));
  }
  if (d.records.size() != declared) {
    throw FormatError(path.string() + ": byte offset " + std::to_string(lr.end_offset()) +
                      ": header declares " + std::to_string(declared) + " bursts, body has " +
                      std::to_string(d.records.size()));
  }
  if (d.records.empty()) throw FormatError(path.string() + ": capture holds no records");
  return d;
}

// --- IQ ----------------------------------------------------------------------------

void write_iq(const fs::path& path, const IQStream& s) {
  if (s.oversample < 1) throw InvalidArgument("IQ stream oversample must be >= 1");
  std::string out(kIqMagic.begin(), kIqMagic.end());
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(kIqFormatVersion));
  put_le<std::uint16_t>(out, 0);
  put_f64(out, s.sample_rate_hz);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.oversample));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.scenario_id.size()));
  out += s.scenario_id;
  put_le<std::uint64_t>(out, s.samples.size());
  out.reserve(out.size() + 8 * s.samples.size());
  for (const cplx& v : s.samples) {
    put_f32(out, static_cast<float>(v.real()));
    put_f32(out, static_cast<float>(v.imag()));
  }
  write_file(path, out);
}

IQStream read_iq(const fs::path& path) {
  const std::string data = read_file(path);
  ByteReader br(data, path);
  if (data.size() < 4 || !std::equal(kIqMagic.begin(), kIqMagic.end(), data.begin())) {
    br.fail("not a CSIQ file (bad magic)");
  }
  (void)br.get_bytes(4);
  const auto version = br.get<std::uint16_t>();
  if (version != kIqFormatVersion) {
    throw UnsupportedVersion("unsupported CSIQ version " + std::to_string(version));
  }
  (void)br.get<std::uint16_t>();

  IQStream s;
  s.sample_rate_hz = br.get_f64();
  s.oversample = static_cast<int>(br.get<std::uint32_t>());
  const auto id_len = br.get<std::uint32_t>();
  s.scenario_id = br.get_bytes(id_len);
  const auto count = br.get<std::uint64_t>();
  if (s.oversample < 1) br.fail("oversample must be >= 1");

  const std::size_t body = br.remaining();
  if (body % 4 != 0) br.fail("body is not a whole number of float32 values");
  if ((body / 4) % 2 != 0) br.fail("odd float count in body (I/Q pairs incomplete)");
  if (body / 8 != count) {
    br.fail("header declares " + std::to_string(count) + " samples, body holds " +
            std::to_string(body / 8));
  }
  s.samples.resize(count);
  for (auto& v : s.samples) {
    const float re = br.get_f32();
    const float im = br.get_f32();
    v = {re, im};
  }
  return s;
}

// --- classifier model --------------------------------------------------------------

void write_classifier(const fs::path& path, const CentroidClassifier& c) {
  const PCAModel& m = c.model;
  std::string out = std::string(kModelMagic) + " " + std::to_string(kModelFormatVersion) + "\n";
  out += "features " + std::to_string(m.features()) + "\n";
  out += "components " + std::to_string(m.num_components()) + "\n";
  out += "dims " + std::to_string(c.dims) + "\n";
  out += "labels " + std::to_string(c.labels.size()) + "\n";
  for (const auto& l : c.labels) out += "label " + l + "\n";
  auto vec_line = [&](const char* key, const Eigen::VectorXd& v) {
    out += key;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += " " + format_double(v(i));
    out += "\n";
  };
  vec_line("means", m.column_means);
  vec_line("scales", m.column_scales);
  out += "zero_variance";
  for (std::size_t z : m.zero_variance_columns) out += " " + std::to_string(z);
  out += "\n";
  vec_line("singular_values", m.singular_values);
  for (Eigen::Index r = 0; r < m.components.rows(); ++r) {
    vec_line("component_row", m.components.row(r).transpose());
  }
  for (Eigen::Index r = 0; r < c.centroids.rows(); ++r) {
    vec_line("centroid", c.centroids.row(r).transpose());
  }
  write_file(path, out);
}

CentroidClassifier read_classifier(const fs::path& path) {
  const std::string text = read_file(path);
  LineReader lr(text, path);
  check_magic(lr, kModelMagic, kModelFormatVersion);

  std::string_view line;
  auto expect = [&](std::string_view key) {
    if (!lr.next(line)) lr.fail("truncated model file, expected '" + std::string(key) + "'");
    const auto [k, rest] = split_key(line);
    if (k != key) lr.fail("expected '" + std::string(key) + "', found '" + std::string(k) + "'");
    return rest;
  };
  auto count = [&](std::string_view key) {
    return number_or_fail<std::size_t>(lr, expect(key), key.data());
  };
  auto vector = [&](std::string_view key, std::size_t n) {
    const auto tok = split_ws(expect(key));
    if (tok.size() != n) lr.fail(std::string(key) + " has " + std::to_string(tok.size()) +
                                 " values, expected " + std::to_string(n));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = number_or_fail<double>(lr, tok[i], "value");
    return v;
  };

  CentroidClassifier c;
  const std::size_t k = count("features");
  const std::size_t l = count("components");
  c.dims = static_cast<int>(count("dims"));
  const std::size_t nlabels = count("labels");
  if (k == 0 || l == 0 || c.dims < 1 || static_cast<std::size_t>(c.dims) > l || nlabels < 2) {
    lr.fail("inconsistent model dimensions");
  }
  for (std::size_t i = 0; i < nlabels; ++i) c.labels.emplace_back(expect("label"));
  c.model.column_means = vector("means", k);
  c.model.column_scales = vector("scales", k);
  for (auto tok : split_ws(expect("zero_variance"))) {
    c.model.zero_variance_columns.push_back(number_or_fail<std::size_t>(lr, tok, "column index"));
  }
  c.model.singular_values = vector("singular_values", l);
  c.model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  for (std::size_t r = 0; r < k; ++r) {
    c.model.components.row(static_cast<Eigen::Index>(r)) = vector("component_row", l).transpose();
  }
  c.centroids.resize(static_cast<Eigen::Index>(nlabels), c.dims);
  for (std::size_t r = 0; r < nlabels; ++r) {
    c.centroids.row(static_cast<Eigen::Index>(r)) =
        vector("centroid", static_cast<std::size_t>(c.dims)).transpose();
  }
  return c;
}

}  // namespace commsense
