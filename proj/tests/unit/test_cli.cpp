#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "commsense/capture_io.hpp"
#include "commsense/random.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace commsense;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const char* kSingleBurst =
    "bursts = 1\n"
    "tsc = 0\n"
    "snr_db = 20\n"
    "seed = 5\n"
    "oversample = 1\n"
    "cir = 1,0 0.5,0.2 0.2,-0.1 0.1 0.05,0.02\n"
    "label = bench\n";

std::string scene_config(const std::string& label, std::uint64_t template_seed, int delay, std::uint64_t seed,
                         std::size_t bursts) {
  std::string cir = "cir =";
  for (const auto& t : oracle::scene_template(template_seed, delay)) {
    cir += " " + std::to_string(t.real()) + "," + std::to_string(t.imag());
  }
  return "bursts = " + std::to_string(bursts) + "\ntsc = 0\nsnr_db = 20\nseed = " + std::to_string(seed) +
         "\noversample = 1\nspread = 0.03\nlabel = " + label + "\n" + cir + "\n";
}

/// One-tap capture whose magnitudes are the given values.
void write_magnitudes(const std::filesystem::path& p, const std::vector<double>& mags, const std::string& label) {
  CaptureDataset d;
  d.cir_length = 1;
  d.meta.label = label;
  d.meta.created = "2026-01-01T00:00:00Z";
  for (std::size_t i = 0; i < mags.size(); ++i) d.records.push_back({i, 156 * i + 8, {cplx(0.0, mags[i])}});
  write_capture(p, d);
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--help"}).out.find("simulate") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"estimate", "--in", "x.iq"}).code == 2);
  CHECK(run({"estimate", "--in", "x.iq", "--out", "y.cap", "--window", "20"}).code == 2);
}

TEST_CASE("simulate writes a single burst") {
  TempDir dir("cli");
  spit(dir / "one.cfg", kSingleBurst);
  const auto r = run({"simulate", "--config", (dir / "one.cfg").string(), "--out-iq", (dir / "a.iq").string(),
                      "--out-truth", (dir / "a.truth").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("simulate: bursts=1 ") != std::string::npos);
  CHECK(r.out.find("cir_length=5") != std::string::npos);
  const auto truth = read_capture(dir / "a.truth");
  CHECK(truth.meta.method == "truth");
  REQUIRE(truth.size() == 1);
  CHECK(truth.records[0].start_sample == 8);
  CHECK(truth.records[0].taps[1] == cplx(0.5, 0.2));
  CHECK(read_iq(dir / "a.iq").size() == 8 + 148 + 8 + 4);
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
  TempDir dir("cli");
  spit(dir / "s.cfg", scene_config("A", 1, 2, 3, 20));
  for (const char* tag : {"1", "2"}) {
    REQUIRE(run({"simulate", "--config", (dir / "s.cfg").string(), "--out-iq", (dir / (std::string(tag) + ".iq")).string(),
                 "--out-truth", (dir / (std::string(tag) + ".truth")).string(), "--timestamp", "2026-01-01T00:00:00Z"})
                .code == 0);
  }
  CHECK(slurp(dir / "1.iq") == slurp(dir / "2.iq"));
  CHECK(slurp(dir / "1.truth") == slurp(dir / "2.truth"));
}

TEST_CASE("simulate config errors exit 2 and name the field") {
  TempDir dir("cli");
  spit(dir / "bad.cfg", "bursts = 1\ntsc = 0\nseed = 1\noversample = 1\ncir = 1\n");
  const auto r = run({"simulate", "--config", (dir / "bad.cfg").string(), "--out-iq", (dir / "a.iq").string(),
                      "--out-truth", (dir / "a.truth").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("snr_db") != std::string::npos);
  CHECK(run({"simulate", "--config", (dir / "none.cfg").string(), "--out-iq", "a", "--out-truth", "b"}).code == 2);
}

TEST_CASE("estimate on a noiseless stream accepts every burst and reports NMSE") {
  TempDir dir("cli");
  std::string cfg = kSingleBurst;
  cfg.replace(cfg.find("bursts = 1"), 10, "bursts = 12");
  cfg.replace(cfg.find("snr_db = 20"), 11, "snr_db = none");
  spit(dir / "s.cfg", cfg);
  REQUIRE(run({"simulate", "--config", (dir / "s.cfg").string(), "--out-iq", (dir / "a.iq").string(), "--out-truth",
               (dir / "a.truth").string()})
              .code == 0);
  const auto r = run({"estimate", "--in", (dir / "a.iq").string(), "--out", (dir / "a.cap").string(), "--method", "ls",
                      "--cir-length", "5", "--truth", (dir / "a.truth").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("estimate: accepted=12 ") != std::string::npos);
  CHECK(r.out.find("nmse_db: matched=12 ") != std::string::npos);
  const auto cap = read_capture(dir / "a.cap");
  CHECK(cap.size() == 12);
  CHECK(cap.cir_length == 5);
  CHECK(cap.meta.label == "bench");
  CHECK(cap.meta.method == "ls");
}

TEST_CASE("estimate exit codes") {
  TempDir dir("cli");
  spit(dir / "s.cfg", kSingleBurst);
  REQUIRE(run({"simulate", "--config", (dir / "s.cfg").string(), "--out-iq", (dir / "a.iq").string(), "--out-truth",
               (dir / "a.truth").string()})
              .code == 0);
  // More taps than training symbols.
  CHECK(run({"estimate", "--in", (dir / "a.iq").string(), "--out", (dir / "x.cap").string(), "--method", "ls",
             "--window", "16", "--cir-length", "17"})
            .code == 2);
  // A stream with no guard periods yields nothing.
  IQStream flat;
  flat.samples.assign(4000, cplx(1.0, 0.0));
  write_iq(dir / "flat.iq", flat);
  const auto empty = run({"estimate", "--in", (dir / "flat.iq").string(), "--out", (dir / "x.cap").string()});
  CHECK(empty.code == 3);
  CHECK(!std::filesystem::exists(dir / "x.cap"));
  CHECK(run({"estimate", "--in", (dir / "missing.iq").string(), "--out", (dir / "x.cap").string()}).code == 2);
  CHECK(run({"estimate", "--in", (dir / "a.iq").string(), "--out", (dir / "x.cap").string(), "--method", "mmse"}).code == 2);
}

TEST_CASE("estimate removes a known or measured carrier offset") {
  TempDir dir("cli");
  std::string cfg = kSingleBurst;
  cfg.replace(cfg.find("bursts = 1"), 10, "bursts = 20");
  spit(dir / "s.cfg", cfg + "freq_offset_hz = 400\n");
  REQUIRE(run({"simulate", "--config", (dir / "s.cfg").string(), "--out-iq", (dir / "a.iq").string(), "--out-truth",
               (dir / "a.truth").string()})
              .code == 0);
  IQStream tone;
  for (int k = 0; k < 5000; ++k) tone.samples.push_back(std::polar(1.0, 2.0 * std::numbers::pi * 400.0 * k / kSymbolRateHz));
  write_iq(dir / "fcch.iq", tone);
  const auto fixed = run({"estimate", "--in", (dir / "a.iq").string(), "--out", (dir / "b.cap").string(), "--method",
                          "ls", "--cir-length", "5", "--fcch", (dir / "fcch.iq").string(), "--truth", (dir / "a.truth").string()});
  REQUIRE(fixed.code == 0);
  CHECK(fixed.out.find("freq_offset_hz: 400") != std::string::npos);
  const auto known = run({"estimate", "--in", (dir / "a.iq").string(), "--out", (dir / "c.cap").string(), "--method",
                          "ls", "--cir-length", "5", "--freq-offset", "400"});
  REQUIRE(known.code == 0);
  // The measured offset differs from 400 Hz only by estimator round-off.
  const auto measured = read_capture(dir / "b.cap");
  const auto given = read_capture(dir / "c.cap");
  REQUIRE(measured.size() == given.size());
  for (std::size_t i = 0; i < given.size(); ++i) {
    CHECK(measured.records[i].start_sample == given.records[i].start_sample);
    for (std::size_t k = 0; k < given.cir_length; ++k) {
      CHECK(std::abs(measured.records[i].taps[k] - given.records[i].taps[k]) < 1e-6);
    }
  }
  CHECK(run({"estimate", "--in", (dir / "a.iq").string(), "--out", (dir / "d.cap").string(), "--freq-offset", "1",
             "--fcch", (dir / "fcch.iq").string()})
            .code == 2);
}

TEST_CASE("fit prints the moment table and a 101-row pdf") {
  TempDir dir("cli");
  Rng rng(3);
  std::vector<double> mags(500);
  for (auto& m : mags) m = std::abs(rng.complex_normal(1.0));
  write_magnitudes(dir / "m.cap", mags, "hall");
  const auto r = run({"fit", "--in", (dir / "m.cap").string(), "--index", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("family shape_lognormal shape_gamma mean variance skew kurtosis log_likelihood parameters\n") != std::string::npos);
  for (const char* f : {"\nrayleigh ", "\nnormal ", "\nlognormal ", "\ngamma "}) CHECK(r.out.find(f) != std::string::npos);
  const auto pdf = r.out.substr(r.out.find("pdf:\n") + 5);
  CHECK(pdf.rfind("bin_center,density\n", 0) == 0);
  CHECK(count_lines(pdf) == 102);

  const auto pooled = run({"fit", "--in", (dir / "m.cap").string(), "--pooled", "--families", "gamma",
                           "--pdf-out", (dir / "pdf.csv").string()});
  REQUIRE(pooled.code == 0);
  CHECK(count_lines(slurp(dir / "pdf.csv")) == 102);
  CHECK(pooled.out.find("\nnormal ") == std::string::npos);
  CHECK(run({"fit", "--in", (dir / "m.cap").string(), "--index", "1"}).code == 2);
  CHECK(run({"fit", "--in", (dir / "m.cap").string()}).code == 2);
  CHECK(run({"fit", "--in", (dir / "m.cap").string(), "--index", "0", "--pooled"}).code == 2);
}

TEST_CASE("fit on a constant column is a degenerate input") {
  TempDir dir("cli");
  write_magnitudes(dir / "c.cap", std::vector<double>(50, 0.7), "flat");
  const auto r = run({"fit", "--in", (dir / "c.cap").string(), "--index", "0", "--families", "gamma"});
  CHECK(r.code == 4);
  CHECK(r.err.find("degenerate") != std::string::npos);
}

TEST_CASE("chisq reports statistic, dof and p-value") {
  TempDir dir("cli");
  Rng rng(4);
  std::vector<double> mags(2000);
  for (auto& m : mags) m = std::abs(rng.complex_normal(1.0));
  write_magnitudes(dir / "m.cap", mags, "hall");
  const auto r = run({"chisq", "--in", (dir / "m.cap").string(), "--index", "0", "--family", "rayleigh"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("family statistic dof p_value\nrayleigh ") != std::string::npos);
  CHECK(r.out.find(" 100 ") != std::string::npos);
  const auto counts = run({"chisq", "--in", (dir / "m.cap").string(), "--pooled", "--family", "rayleigh", "--bins", "21",
                           "--mode", "counts"});
  REQUIRE(counts.code == 0);
  CHECK(counts.out.find(" 20 ") != std::string::npos);
  CHECK(run({"chisq", "--in", (dir / "m.cap").string(), "--index", "0", "--family", "weibull"}).code == 2);
  CHECK(run({"chisq", "--in", (dir / "m.cap").string(), "--index", "0", "--family", "normal", "--mode", "x"}).code == 2);
}

TEST_CASE("chisq flags floored expected bins") {
  TempDir dir("cli");
  Rng rng(5);
  std::vector<double> mags(300);
  for (auto& m : mags) m = 1.0 + 0.02 * rng.normal();
  mags.push_back(40.0);
  write_magnitudes(dir / "o.cap", mags, "spiky");
  const auto r = run({"chisq", "--in", (dir / "o.cap").string(), "--index", "0", "--family", "lognormal"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("note: ") != std::string::npos);
}

TEST_CASE("pca and classify end to end") {
  TempDir dir("cli");
  for (const auto& [label, tseed, delay, seed] :
       {std::tuple{"A", 500u, 2, 11u}, std::tuple{"B", 700u, 4, 12u}}) {
    const std::string l = label;
    spit(dir / (l + ".cfg"), scene_config(l, tseed, delay, seed, 80));
    REQUIRE(run({"simulate", "--config", (dir / (l + ".cfg")).string(), "--out-iq", (dir / (l + ".iq")).string(),
                 "--out-truth", (dir / (l + ".truth")).string()})
                .code == 0);
    REQUIRE(run({"estimate", "--in", (dir / (l + ".iq")).string(), "--out", (dir / (l + ".cap")).string(),
                 "--timestamp", "2026-01-01T00:00:00Z"})
                .code == 0);
  }
  const auto a = (dir / "A.cap").string();
  const auto b = (dir / "B.cap").string();
  const auto p = run({"pca", "--in", a, "--in", b, "--model-out", (dir / "m.model").string(), "--svg", (dir / "s.svg").string()});
  REQUIRE(p.code == 0);
  CHECK(p.out.rfind("explained_variance: ", 0) == 0);
  CHECK(p.out.find("label,pc1,pc2\n") != std::string::npos);
  CHECK(p.out.find("\nA,") != std::string::npos);
  CHECK(p.out.find("\nB,") != std::string::npos);
  CHECK(p.out.find("centroid A ") != std::string::npos);
  CHECK(slurp(dir / "s.svg").find("<svg") != std::string::npos);

  const auto again = run({"pca", "--in", a, "--in", b, "--model-out", (dir / "m2.model").string()});
  CHECK(slurp(dir / "m.model") == slurp(dir / "m2.model"));

  const auto c = run({"classify", "--model", (dir / "m.model").string(), "--in", a});
  REQUIRE(c.code == 0);
  CHECK(c.out.rfind("burst_index label dist_A dist_B\n", 0) == 0);
  CHECK(c.out.find("summary: ") != std::string::npos);
  CHECK(c.out.find("accuracy=1") != std::string::npos);

  CHECK(run({"pca", "--in", a}).code == 2);
  CHECK(run({"pca", "--in", a, "--in", a}).code == 2);
  CHECK(run({"pca", "--in", a, "--in", b, "--dims", "500"}).code == 2);
}

TEST_CASE("classify rejects a capture of the wrong width") {
  TempDir dir("cli");
  Rng rng(6);
  std::vector<double> m1(40);
  std::vector<double> m2(40);
  for (std::size_t i = 0; i < 40; ++i) {
    m1[i] = 1.0 + 0.1 * rng.normal();
    m2[i] = 2.0 + 0.1 * rng.normal();
  }
  // Two-tap captures.
  auto two_tap = [&](const std::filesystem::path& path, const std::vector<double>& v, const std::string& label) {
    CaptureDataset d;
    d.cir_length = 2;
    d.meta.label = label;
    for (std::size_t i = 0; i < v.size(); ++i) d.records.push_back({i, 0, {cplx(v[i], 0.0), cplx(0.0, v[(i + 1) % v.size()])}});
    write_capture(path, d);
  };
  two_tap(dir / "a.cap", m1, "a");
  two_tap(dir / "b.cap", m2, "b");
  REQUIRE(run({"pca", "--in", (dir / "a.cap").string(), "--in", (dir / "b.cap").string(), "--model-out",
               (dir / "m.model").string()})
              .code == 0);
  write_magnitudes(dir / "one.cap", m1, "a");
  CHECK(run({"classify", "--model", (dir / "m.model").string(), "--in", (dir / "one.cap").string()}).code == 2);
  const auto ok = run({"classify", "--model", (dir / "m.model").string(), "--in", (dir / "b.cap").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("accuracy=1") != std::string::npos);
}
