#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commsense/capture_io.hpp"
#include "commsense/channel_sim.hpp"
#include "commsense/errors.hpp"
#include "commsense/estimator.hpp"
#include "commsense/pca_classify.hpp"
#include "commsense/statfit.hpp"
#include "commsense/sync.hpp"
#include "config.hpp"

namespace commsense::cli {

namespace {

namespace fs = std::filesystem;

struct SampleSelection {
  std::optional<std::size_t> index;
  bool pooled = false;
};

std::vector<double> select_samples(const CaptureDataset& d, const SampleSelection& sel,
                                   std::string& description) {
  if (sel.pooled == sel.index.has_value()) {
    throw InvalidArgument("choose exactly one of --index or --pooled");
  }
  if (sel.pooled) {
    description = "pooled";
    return d.pooled_magnitudes();
  }
  description = "index " + std::to_string(*sel.index);
  return d.magnitude_column(*sel.index);
}

std::string fmt_num(double v) { return fmt::format("{:.6g}", v); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string describe_params(const DistributionParams& p) {
  struct Visitor {
    std::string operator()(const RayleighParams& r) const { return "sigma=" + fmt_num(r.sigma); }
    std::string operator()(const NormalParams& n) const {
      return "mean=" + fmt_num(n.mean) + " sigma=" + fmt_num(n.sigma);
    }
    std::string operator()(const LognormalParams& l) const {
      return "mu=" + fmt_num(l.mu) + " sigma=" + fmt_num(l.sigma) + " median=" + fmt_num(l.median);
    }
    std::string operator()(const GammaParams& g) const {
      return "shape=" + fmt_num(g.shape) + " scale=" + fmt_num(g.scale) +
             " iterations=" + std::to_string(g.iterations);
    }
  };
  return std::visit(Visitor{}, p);
}

// --- simulate ------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_iq;
  std::string out_truth;
  std::string timestamp;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ScenarioConfig sc = scenario_from_config(KeyValueConfig::load(a.config));
  SimulatedCapture sim = simulate_capture(sc.spec);
  if (sc.freq_offset_hz != 0.0) {
    sim.stream.samples =
        apply_freq_correction(sim.stream.samples, -sc.freq_offset_hz, sim.stream.sample_rate_hz);
  }
  write_iq(a.out_iq, sim.stream);

  CaptureDataset truth;
  truth.meta.label = sc.spec.label;
  truth.meta.method = "truth";
  truth.meta.tsc = sc.spec.tsc;
  truth.meta.oversample = sc.spec.oversample;
  truth.meta.snr_db = sc.spec.snr_db;
  truth.meta.scenario = sc.spec.label;
  truth.meta.created = a.timestamp.empty() ? utc_timestamp_now() : a.timestamp;
  truth.cir_length = sc.spec.cir_template.size();
  for (std::size_t i = 0; i < sim.ground_truth.size(); ++i) {
    truth.records.push_back({slot_index(sim.burst_starts[i], sc.spec.oversample), sim.burst_starts[i],
                             sim.ground_truth[i].taps});
  }
  write_capture(a.out_truth, truth);

  out << "simulate: bursts=" << sim.ground_truth.size() << " samples=" << sim.stream.size()
      << " oversample=" << sc.spec.oversample
      << " snr_db=" << (sc.spec.snr_db ? fmt_num(*sc.spec.snr_db) : std::string("none"))
      << " cir_length=" << truth.cir_length << " label=" << sc.spec.label << "\n";
  return kExitOk;
}

// --- estimate ------------------------------------------------------------------------

struct EstimateArgs {
  std::string in;
  std::string out;
  std::string method = "corr";
  int window = 26;
  int cir_length = 40;
  int tsc = 0;
  double threshold = 0.2;
  std::string label;
  std::optional<double> freq_offset;
  std::string fcch;
  std::string truth;
  std::string timestamp;
};

void report_nmse(const CaptureDataset& est, const fs::path& truth_path, std::ostream& out) {
  const CaptureDataset truth = read_capture(truth_path);
  std::map<std::size_t, const CaptureRecord*> by_index;
  for (const auto& r : truth.records) by_index[r.burst_index] = &r;
  std::vector<double> values;
  for (const auto& r : est.records) {
    const auto it = by_index.find(r.burst_index);
    if (it == by_index.end()) continue;
    // Compare on a common length, zero-extending the shorter vector.
    const std::size_t n = std::max(r.taps.size(), it->second->taps.size());
    std::vector<cplx> e(n), t(n);
    std::copy(r.taps.begin(), r.taps.end(), e.begin());
    std::copy(it->second->taps.begin(), it->second->taps.end(), t.begin());
    values.push_back(nmse_db(e, t));
  }
  if (values.empty()) {
    out << "nmse: no estimated burst matches a truth record\n";
    return;
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  out << "nmse_db: matched=" << m << " mean=" << fmt_num(mean) << " median=" << fmt_num(median)
      << "\n";
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  IQStream stream = read_iq(a.in);

  EstimatorConfig cfg;
  cfg.method = parse_method(a.method);
  if (a.window != 26 && a.window != 16) throw InvalidArgument("--window must be 26 or 16");
  cfg.window = a.window == 26 ? TrainingWindow::full26 : TrainingWindow::central16;
  cfg.cir_length = a.cir_length;
  cfg.tsc = a.tsc;
  cfg.oversample = stream.oversample;
  cfg.power_threshold = a.threshold;

  if (a.freq_offset && !a.fcch.empty()) throw InvalidArgument("use either --freq-offset or --fcch");
  std::optional<double> offset = a.freq_offset;
  if (!a.fcch.empty()) {
    const IQStream tone = read_iq(a.fcch);
    offset = estimate_freq_offset(tone.samples, tone.sample_rate_hz).offset_hz;
  }
  if (offset) {
    stream.samples = apply_freq_correction(stream.samples, *offset, stream.sample_rate_hz);
    out << "freq_offset_hz: " << fmt_num(*offset) << "\n";
  }

  StreamEstimate est = estimate_stream(stream, cfg);
  CaptureMetadata& m = est.dataset.meta;
  m.label = !a.label.empty() ? a.label : (stream.scenario_id.empty() ? "unlabeled" : stream.scenario_id);
  m.method = to_string(cfg.method);
  m.tsc = cfg.tsc;
  m.window = a.window;
  m.oversample = stream.oversample;
  m.scenario = stream.scenario_id;
  m.created = a.timestamp.empty() ? utc_timestamp_now() : a.timestamp;
  write_capture(a.out, est.dataset);

  out << "estimate: accepted=" << est.accepted << " rejected=" << est.rejected
      << " method=" << m.method << " window=" << a.window << " cir_length=" << cfg.cir_length << "\n";
  if (!a.truth.empty()) report_nmse(est.dataset, a.truth, out);
  return kExitOk;
}

// --- fit -----------------------------------------------------------------------------

struct FitArgs {
  std::string in;
  SampleSelection sel;
  std::string families = "rayleigh,normal,lognormal,gamma";
  int bins = kDefaultBins;
  std::string pdf_out;
};

std::vector<Family> parse_families(const std::string& list) {
  std::vector<Family> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_family(item));
  }
  if (out.empty()) throw InvalidArgument("no distribution family selected");
  return out;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const CaptureDataset d = read_capture(a.in);
  std::string source;
  const std::vector<double> samples = select_samples(d, a.sel, source);
  const std::vector<Family> families = parse_families(a.families);
  const EmpiricalPDF pdf = empirical_pdf(samples, a.bins);

  out << "fit: label=" << d.meta.label << " source=" << source << " samples=" << samples.size()
      << " bins=" << pdf.bins() << "\n";
  out << "family shape_lognormal shape_gamma mean variance skew kurtosis log_likelihood parameters\n";
  for (Family f : families) {
    const DistributionFit r = fit(f, samples);
    const Moments& mo = r.moments;
    std::string shape_ln = "-";
    std::string shape_g = "-";
    if (const auto* l = std::get_if<LognormalParams>(&r.params)) shape_ln = fmt_num(l->sigma);
    if (const auto* g = std::get_if<GammaParams>(&r.params)) shape_g = fmt_num(g->shape);
    out << to_string(f) << " " << shape_ln << " " << shape_g << " " << fmt_num(mo.mean) << " "
        << fmt_num(mo.variance) << " " << fmt_num(mo.skew) << " " << fmt_num(mo.kurtosis) << " "
        << fmt_num(log_likelihood(r, samples)) << " " << describe_params(r.params) << "\n";
  }

  std::string csv = "bin_center,density\n";
  const std::vector<double> centers = pdf.bin_centers();
  for (std::size_t i = 0; i < pdf.bins(); ++i) {
    csv += fmt::format("{:.10g},{:.10g}\n", centers[i], pdf.density[i]);
  }
  if (a.pdf_out.empty()) {
    out << "pdf:\n" << csv;
  } else {
    write_text(a.pdf_out, csv);
    out << "pdf: " << pdf.bins() << " rows written to " << a.pdf_out << "\n";
  }
  return kExitOk;
}

// --- chisq ---------------------------------------------------------------------------

struct ChisqArgs {
  std::string in;
  SampleSelection sel;
  std::string family;
  int bins = kDefaultBins;
  std::string mode = "density";
};

int cmd_chisq(const ChisqArgs& a, std::ostream& out) {
  const CaptureDataset d = read_capture(a.in);
  std::string source;
  const std::vector<double> samples = select_samples(d, a.sel, source);
  const Family family = parse_family(a.family);
  const EmpiricalPDF pdf = empirical_pdf(samples, a.bins);
  const DistributionFit f = fit(family, samples);
  GoodnessOfFit g;
  if (a.mode == "density") {
    g = goodness_of_fit(pdf, f);
  } else if (a.mode == "counts") {
    g = goodness_of_fit_counts(pdf, f);
  } else {
    throw InvalidArgument("--mode must be 'density' or 'counts'");
  }
  out << "chisq: label=" << d.meta.label << " source=" << source << " samples=" << samples.size()
      << " mode=" << a.mode << "\n";
  out << "family statistic dof p_value\n";
  out << to_string(family) << " " << fmt_num(g.result.statistic) << " " << g.result.dof << " "
      << fmt_num(g.result.p_value) << "\n";
  if (!g.floored_bins.empty()) {
    out << "note: " << g.floored_bins.size() << " bin(s) had expected value below "
        << fmt_num(kExpectedFloor) << " and were floored\n";
  }
  return kExitOk;
}

// --- pca -----------------------------------------------------------------------------

struct PcaArgs {
  std::vector<std::string> inputs;
  int dims = 2;
  std::string scores_out;
  std::string model_out;
  std::string svg;
};

std::string scatter_svg(const std::vector<ProjectedDataset>& sets) {
  constexpr double kSize = 480.0;
  constexpr double kPad = 40.0;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& s : sets) {
    for (Eigen::Index r = 0; r < s.scores.rows(); ++r) {
      const double x = s.scores(r, 0);
      const double y = s.scores.cols() > 1 ? s.scores(r, 1) : 0.0;
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const double xs = xmax > xmin ? (kSize - 2 * kPad) / (xmax - xmin) : 1.0;
  const double ys = ymax > ymin ? (kSize - 2 * kPad) / (ymax - ymin) : 1.0;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{1}\" y=\"{2}\" font-size=\"12\">PC1</text>\n"
      "<text x=\"4\" y=\"{1}\" font-size=\"12\">PC2</text>\n",
      kSize, kSize / 2, kSize - 8);
  std::map<std::string, std::size_t> color_of;
  for (const auto& s : sets) color_of.emplace(s.label, color_of.size());
  for (const auto& s : sets) {
    const char* color = kColors[color_of[s.label] % std::size(kColors)];
    for (Eigen::Index r = 0; r < s.scores.rows(); ++r) {
      const double x = kPad + (s.scores(r, 0) - xmin) * xs;
      const double y = kSize - kPad - ((s.scores.cols() > 1 ? s.scores(r, 1) : 0.0) - ymin) * ys;
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", x, y, color);
    }
  }
  double ly = 16;
  for (const auto& [label, idx] : color_of) {
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>\n", kSize - 120,
                       ly, kColors[idx % std::size(kColors)], label);
    ly += 14;
  }
  svg += "</svg>\n";
  return svg;
}

int cmd_pca(const PcaArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<LabeledDataset> sets;
  for (const auto& path : a.inputs) {
    const CaptureDataset d = read_capture(path);
    sets.push_back({d.magnitudes(), d.meta.label});
  }
  const CentroidClassifier c = train_classifier(sets, a.dims);
  for (const auto& w : c.warnings) err << "warning: " << w << "\n";

  std::vector<ProjectedDataset> projected;
  for (const auto& s : sets) {
    ProjectedDataset p = project(c.model, s.rows, s.label);
    p.scores = p.scores.leftCols(a.dims).eval();
    projected.push_back(std::move(p));
  }

  const Eigen::VectorXd ratio = c.model.explained_variance_ratio();
  out << "explained_variance:";
  double cumulative = 0.0;
  for (int i = 0; i < a.dims; ++i) {
    out << " " << fmt_num(ratio(i));
    cumulative += ratio(i);
  }
  out << " cumulative=" << fmt_num(cumulative) << "\n";

  std::string csv = "label";
  for (int i = 0; i < a.dims; ++i) csv += ",pc" + std::to_string(i + 1);
  csv += "\n";
  for (const auto& p : projected) {
    for (Eigen::Index r = 0; r < p.scores.rows(); ++r) {
      csv += p.label;
      for (Eigen::Index k = 0; k < p.scores.cols(); ++k) csv += fmt::format(",{:.10g}", p.scores(r, k));
      csv += "\n";
    }
  }
  if (a.scores_out.empty()) {
    out << csv;
  } else {
    write_text(a.scores_out, csv);
    out << "scores: written to " << a.scores_out << "\n";
  }
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    out << "centroid " << c.labels[i];
    for (int k = 0; k < a.dims; ++k) out << " " << fmt_num(c.centroids(static_cast<Eigen::Index>(i), k));
    out << "\n";
  }
  if (!a.model_out.empty()) write_classifier(a.model_out, c);
  if (!a.svg.empty()) write_text(a.svg, scatter_svg(projected));
  return kExitOk;
}

// --- classify ------------------------------------------------------------------------

struct ClassifyArgs {
  std::string model;
  std::string in;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const CentroidClassifier c = read_classifier(a.model);
  const CaptureDataset d = read_capture(a.in);
  const Eigen::MatrixXd rows = d.magnitudes();
  if (rows.cols() != c.model.features()) {
    throw InvalidArgument("capture has CIR length " + std::to_string(rows.cols()) +
                          ", model was trained on " + std::to_string(c.model.features()));
  }
  out << "burst_index label";
  for (const auto& l : c.labels) out << " dist_" << l;
  out << "\n";
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const Classification cl = classify(c, Eigen::RowVectorXd(rows.row(r)));
    out << d.records[static_cast<std::size_t>(r)].burst_index << " " << cl.label;
    for (double dist : cl.distances) out << " " << fmt_num(dist);
    out << "\n";
    correct += cl.label == d.meta.label;
  }
  const bool known = std::find(c.labels.begin(), c.labels.end(), d.meta.label) != c.labels.end();
  if (known) {
    out << "summary: bursts=" << rows.rows() << " truth=" << d.meta.label << " correct=" << correct
        << " accuracy=" << fmt_num(static_cast<double>(correct) / static_cast<double>(rows.rows()))
        << "\n";
  } else {
    out << "summary: bursts=" << rows.rows() << " (capture label '" << d.meta.label
        << "' is not a model label; no accuracy)\n";
  }
  return kExitOk;
}

void add_selection(CLI::App* cmd, SampleSelection& sel) {
  auto* idx = cmd->add_option("--index", sel.index, "CIR tap index (0-based) to analyse");
  auto* pooled = cmd->add_flag("--pooled", sel.pooled, "Pool all tap magnitudes");
  idx->excludes(pooled);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Channel-impulse-response sensing toolkit", "commsense"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a ground-truthed IQ capture from a scenario config");
  s->add_option("--config", sim.config, "Scenario config (key = value)")->required();
  s->add_option("--out-iq", sim.out_iq, "Output IQ file")->required();
  s->add_option("--out-truth", sim.out_truth, "Output ground-truth capture")->required();
  s->add_option("--timestamp", sim.timestamp, "Override the 'created' field");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Detect bursts and estimate one CIR per burst");
  e->add_option("--in", est.in, "Input IQ file")->required();
  e->add_option("--out", est.out, "Output capture file")->required();
  e->add_option("--method", est.method, "ls or corr")->capture_default_str();
  e->add_option("--window", est.window, "Training window: 26 or 16")->capture_default_str();
  e->add_option("--cir-length", est.cir_length, "Taps per CIR")->capture_default_str();
  e->add_option("--tsc", est.tsc, "Training sequence code 0..7")->capture_default_str();
  e->add_option("--threshold", est.threshold, "Guard power threshold")->capture_default_str();
  e->add_option("--label", est.label, "Dataset label (default: scenario id)");
  auto* fo = e->add_option("--freq-offset", est.freq_offset, "Known carrier offset to remove, Hz");
  auto* fc = e->add_option("--fcch", est.fcch, "IQ file of a tone burst to estimate the offset from");
  fo->excludes(fc);
  e->add_option("--truth", est.truth, "Ground-truth capture; prints NMSE");
  e->add_option("--timestamp", est.timestamp, "Override the 'created' field");

  FitArgs fitp;
  auto* f = app.add_subcommand("fit", "Fit distribution families to CIR magnitudes");
  f->add_option("--in", fitp.in, "Capture file")->required();
  add_selection(f, fitp.sel);
  f->add_option("--families", fitp.families, "Comma-separated families")->capture_default_str();
  f->add_option("--bins", fitp.bins, "Histogram bins")->capture_default_str();
  f->add_option("--pdf-out", fitp.pdf_out, "Write the empirical PDF as CSV");

  ChisqArgs chi;
  auto* c = app.add_subcommand("chisq", "Chi-square goodness of fit of one family");
  c->add_option("--in", chi.in, "Capture file")->required();
  add_selection(c, chi.sel);
  c->add_option("--family", chi.family, "Distribution family")->required();
  c->add_option("--bins", chi.bins, "Histogram bins")->capture_default_str();
  c->add_option("--mode", chi.mode, "density or counts")->capture_default_str();

  PcaArgs pca;
  auto* p = app.add_subcommand("pca", "Project labelled captures onto principal components");
  p->add_option("--in", pca.inputs, "Capture files (labels taken from each file)")->required();
  p->add_option("--dims", pca.dims, "Components to keep")->capture_default_str();
  p->add_option("--scores-out", pca.scores_out, "Write scores CSV here instead of stdout");
  p->add_option("--model-out", pca.model_out, "Save the nearest-centroid model");
  p->add_option("--svg", pca.svg, "Write a PC1/PC2 scatter plot");

  ClassifyArgs cls;
  auto* k = app.add_subcommand("classify", "Label each burst of a capture with a saved model");
  k->add_option("--model", cls.model, "Model file from 'pca --model-out'")->required();
  k->add_option("--in", cls.in, "Capture file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "commsense: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim, out);
    if (e->parsed()) return cmd_estimate(est, out);
    if (f->parsed()) return cmd_fit(fitp, out);
    if (c->parsed()) return cmd_chisq(chi, out);
    if (p->parsed()) return cmd_pca(pca, out, err);
    if (k->parsed()) return cmd_classify(cls, out);
  } catch (const EmptyDataset& ex) {
    err << "commsense: no result: " << ex.what() << "\n";
    return kExitEmpty;
  } catch (const InsufficientData& ex) {
    err << "commsense: no result: " << ex.what() << "\n";
    return kExitEmpty;
  } catch (const DegenerateInput& ex) {
    err << "commsense: degenerate input: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalFailure& ex) {
    err << "commsense: numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const SingularSystem& ex) {
    err << "commsense: numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& ex) {
    err << "commsense: numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const Error& ex) {
    // InvalidArgument, config, I/O and format problems.
    err << "commsense: error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace commsense::cli
