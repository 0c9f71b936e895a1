#include "mcr2/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

#include "mcr2/diagnostics.hpp"
#include "mcr2/objective.hpp"
#include "mcr2/optima.hpp"

namespace mcr2 {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

bool filesystem_safe(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return name != "." && name != "..";
}

const std::vector<std::string>& known_outputs() {
  static const std::vector<std::string> v = {"heatmap", "spectra", "convergence",
                                             "report"};
  return v;
}

std::string now_iso8601_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson config_json(const ExperimentConfig& c) {
  ojson j;
  j["name"] = c.name;
  j["d"] = c.d;
  j["class_sizes"] = c.class_sizes;
  j["epsilon"] = c.epsilon;
  j["lambda"] = c.lambda;
  j["step_size"] = c.solver.step_size;
  j["max_iters"] = c.solver.max_iters;
  j["grad_tol"] = c.solver.grad_tol;
  j["seed"] = c.solver.seed;
  j["trace_every"] = c.solver.trace_every;
  j["outputs"] = c.outputs;
  j["out_dir"] = c.out_dir;
  return j;
}

ojson manifest_json(const RunManifest& m) {
  ojson j;
  j["config"] = config_json(m.config);
  j["library_version"] = m.library_version;
  j["timestamp"] = m.timestamp;
  j["seed"] = m.seed;
  ojson s;
  s["value"] = m.summary.value;
  s["optimum"] = m.summary.optimum;
  s["gap"] = m.summary.gap;
  s["residual"] = m.summary.residual;
  s["stable_ranks"] = m.summary.stable_ranks;
  s["discrimination"] = m.summary.discrimination;
  s["max_sigma_deviation"] = m.summary.max_sigma_deviation;
  s["iterations"] = m.summary.iterations;
  s["stop_reason"] = m.summary.stop_reason;
  s["failed"] = m.summary.failed;
  s["failure"] = m.summary.failure;
  j["summary"] = std::move(s);
  ojson files = ojson::array();
  for (const FileRecord& f : m.files) {
    ojson fj;
    fj["path"] = f.path;
    fj["sha256"] = f.sha256;
    files.push_back(std::move(fj));
  }
  j["files"] = std::move(files);
  return j;
}

bool wants(const ExperimentConfig& c, const char* what) {
  return std::find(c.outputs.begin(), c.outputs.end(), what) != c.outputs.end();
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config JSON is malformed: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config JSON must be an object");
  for (const char* key : {"name", "d", "class_sizes", "epsilon", "lambda"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("config is missing \"") + key + "\"");
    }
  }
  ExperimentConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    c.d = j.at("d").get<int>();
    c.class_sizes = j.at("class_sizes").get<std::vector<int>>();
    c.epsilon = j.at("epsilon").get<double>();
    c.lambda = j.at("lambda").get<double>();
    if (j.contains("step_size")) c.solver.step_size = j.at("step_size").get<double>();
    if (j.contains("max_iters")) c.solver.max_iters = j.at("max_iters").get<long>();
    if (j.contains("grad_tol")) c.solver.grad_tol = j.at("grad_tol").get<double>();
    if (j.contains("seed")) c.solver.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trace_every")) c.solver.trace_every = j.at("trace_every").get<long>();
    if (j.contains("outputs")) c.outputs = j.at("outputs").get<std::vector<std::string>>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config field has the wrong type: ") + e.what());
  }
  if (!filesystem_safe(c.name)) {
    throw ValidationError("config name \"" + c.name +
                          "\" is not filesystem-safe; use [A-Za-z0-9._-]");
  }
  for (const std::string& o : c.outputs) {
    if (std::find(known_outputs().begin(), known_outputs().end(), o) ==
        known_outputs().end()) {
      throw ValidationError("unknown output kind \"" + o +
                            "\"; expected heatmap, spectra, convergence, report");
    }
  }
  return c;
}

std::string config_to_json_text(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

ProblemParams params_from_config(const ExperimentConfig& config) {
  try {
    return ProblemParams(config.d, ClassPartition(config.class_sizes),
                         config.epsilon, config.lambda);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("config does not define a valid problem: ") +
                          e.what());
  }
}

ExperimentConfig builtin_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.epsilon = 0.5;
  c.lambda = 0.1;
  c.solver.step_size = 0.1;
  if (name == "exp-main") {
    c.d = 100;
    c.class_sizes = {30, 70, 40, 60};
  } else if (name == "exp-1") {
    c.d = 100;
    c.class_sizes = {50, 50, 50, 50};
  } else if (name == "exp-2") {
    c.d = 100;
    c.class_sizes = {50, 40, 30, 20, 30, 40, 40, 50};
  } else if (name == "exp-3") {
    c.d = 300;
    c.class_sizes = {50, 50, 40, 60};
    c.epsilon = 5.0;
    c.lambda = 0.01;
    c.solver.step_size = 1.0;
  } else {
    throw ValidationError("unknown builtin config \"" + name +
                          "\"; available: exp-main, exp-1, exp-2, exp-3");
  }
  return c;
}

std::vector<std::string> builtin_config_names() {
  return {"exp-main", "exp-1", "exp-2", "exp-3"};
}

std::pair<ExperimentConfig, std::pair<SweepAxis, std::vector<int>>> builtin_sweep(
    const std::string& name) {
  ExperimentConfig base;
  base.epsilon = 0.5;
  base.lambda = 0.1;
  base.solver.step_size = 0.1;
  base.solver.trace_every = 1;
  base.outputs = {"convergence", "report"};
  if (name == "fig3-d") {
    base.name = "fig3-d";
    base.d = 40;
    base.class_sizes = {50, 50, 50, 50};
    return {base, {SweepAxis::VaryD, {40, 80, 120}}};
  }
  if (name == "fig3-m") {
    base.name = "fig3-m";
    base.d = 50;
    base.class_sizes = {50, 50, 50, 50};
    return {base, {SweepAxis::VaryM, {100, 200, 400}}};
  }
  throw ValidationError("unknown builtin sweep \"" + name +
                        "\"; available: fig3-d, fig3-m");
}

std::vector<TheoryRow> table1_rows() {
  // Standard feature budgets: balanced classes, 250 samples each,
  // epsilon = 0.5, lambda = 0.001, at d = 32 and d = 128.
  const std::vector<std::pair<int, int>> shapes = {{1000, 4}, {1500, 6}, {2000, 8},
                                                   {2500, 10}};
  std::vector<TheoryRow> rows;
  for (int d : {32, 128}) {
    for (const auto& [m, K] : shapes) {
      TheoryRow r;
      r.label = (d == 32 ? "d32-m" : "d128-m") + std::to_string(m) + "-K" +
                std::to_string(K);
      r.d = d;
      r.num_classes = K;
      r.per_class = m / K;
      r.epsilon = 0.5;
      r.lambda = 0.001;
      const ClassPartition part(std::vector<int>(static_cast<std::size_t>(K), m / K));
      const ValidatedParams vp =
          require_valid(ProblemParams(d, part, r.epsilon, r.lambda));
      r.value = optimal_value(vp, allocate_global_ranks(vp).ranks);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string table1_csv() {
  std::string out = "label,d,K,per_class,epsilon,lambda,F_star\n";
  for (const TheoryRow& r : table1_rows()) {
    out += r.label + "," + std::to_string(r.d) + "," + std::to_string(r.num_classes) +
           "," + std::to_string(r.per_class) + "," + fmt17(r.epsilon) + "," +
           fmt17(r.lambda) + "," + fmt17(r.value) + "\n";
  }
  return out;
}

void atomic_write_file(const fs::path& path, const std::string& content) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw std::runtime_error("atomic_write_file: cannot open " + tmp.string());
    }
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f.good()) {
      throw std::runtime_error("atomic_write_file: write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string sha256_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256_bytes: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("sha256_file: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return sha256_bytes(ss.str());
}

std::string matrix_to_csv(const Eigen::MatrixXd& M) {
  std::string out = std::to_string(M.rows()) + "," + std::to_string(M.cols()) + "\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out += ",";
      out += fmt17(M(i, j));
    }
    out += "\n";
  }
  return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("matrix_from_csv: empty input");
  }
  long rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "%ld,%ld", &rows, &cols) != 2 || rows < 0 || cols < 0) {
    throw std::invalid_argument("matrix_from_csv: header must be \"rows,cols\"");
  }
  Eigen::MatrixXd M(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("matrix_from_csv: expected " + std::to_string(rows) +
                                  " rows, found " + std::to_string(i));
    }
    std::istringstream ls(line);
    std::string cell;
    for (long j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ',')) {
        throw std::invalid_argument("matrix_from_csv: row " + std::to_string(i) +
                                    " has fewer than " + std::to_string(cols) +
                                    " columns");
      }
      try {
        M(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw std::invalid_argument("matrix_from_csv: cannot parse \"" + cell + "\"");
      }
    }
  }
  return M;
}

std::string trace_to_csv(const RunTrace& trace) {
  std::string out = "iter,F,grad_norm\n";
  for (const TracePoint& p : trace.points) {
    out += std::to_string(p.iter) + "," + fmt17(p.value) + "," + fmt17(p.grad_norm) +
           "\n";
  }
  return out;
}

std::string heatmap_svg(const Eigen::MatrixXd& M) {
  const Eigen::Index rows = M.rows();
  const Eigen::Index cols = M.cols();
  const int cell = std::max<int>(
      2, static_cast<int>(512 / std::max<Eigen::Index>(1, std::max(rows, cols))));
  const long width = static_cast<long>(cols) * cell;
  const long height = static_cast<long>(rows) * cell;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<title>|value| heatmap, 0 (white) to 1 (dark blue)</title>\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double v = std::clamp(std::abs(M(i, j)), 0.0, 1.0);
      const int r = static_cast<int>(std::lround(247.0 + (8.0 - 247.0) * v));
      const int g = static_cast<int>(std::lround(251.0 + (48.0 - 251.0) * v));
      const int b = static_cast<int>(std::lround(255.0 + (107.0 - 255.0) * v));
      svg += "<rect x=\"" + std::to_string(j * cell) + "\" y=\"" +
             std::to_string(i * cell) + "\" width=\"" + std::to_string(cell) +
             "\" height=\"" + std::to_string(cell) + "\" fill=\"rgb(" +
             std::to_string(r) + "," + std::to_string(g) + "," + std::to_string(b) +
             ")\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string spectrum_svg(const std::vector<Eigen::VectorXd>& spectra,
                         const std::vector<double>& theory_sigma) {
  const int K = static_cast<int>(spectra.size());
  const int panel_w = 180;
  const int panel_h = 160;
  const int margin = 24;
  const int width = std::max(1, K) * (panel_w + margin) + margin;
  const int height = panel_h + 2 * margin;
  double ymax = 1.0;
  for (const auto& sv : spectra) {
    if (sv.size() > 0) ymax = std::max(ymax, sv.maxCoeff());
  }
  for (double t : theory_sigma) ymax = std::max(ymax, t);
  ymax *= 1.05;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<title>per-class singular values (dots) with closed-form sigma_high "
         "(line)</title>\n";
  for (int k = 0; k < K; ++k) {
    const int x0 = margin + k * (panel_w + margin);
    const int y0 = margin;
    svg += "<rect x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y0) +
           "\" width=\"" + std::to_string(panel_w) + "\" height=\"" +
           std::to_string(panel_h) +
           "\" fill=\"none\" stroke=\"rgb(90,90,90)\" stroke-width=\"1\"/>\n";
    const Eigen::VectorXd& sv = spectra[static_cast<std::size_t>(k)];
    const Eigen::Index n = sv.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double fx = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1)
                              : 0.5;
      const double cx = x0 + 10 + fx * (panel_w - 20);
      const double cy = y0 + panel_h - (sv(i) / ymax) * panel_h;
      svg += "<circle cx=\"" + fmt6(cx) + "\" cy=\"" + fmt6(cy) +
             "\" r=\"2.5\" fill=\"rgb(30,80,160)\"/>\n";
    }
    if (k < static_cast<int>(theory_sigma.size())) {
      const double ty =
          y0 + panel_h - (theory_sigma[static_cast<std::size_t>(k)] / ymax) * panel_h;
      svg += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + fmt6(ty) + "\" x2=\"" +
             std::to_string(x0 + panel_w) + "\" y2=\"" + fmt6(ty) +
             "\" stroke=\"rgb(200,30,30)\" stroke-width=\"1.5\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string convergence_svg(const RunTrace& trace, double optimum) {
  const int width = 480;
  const int height = 320;
  const int margin = 32;
  bool clamped = false;
  std::vector<std::pair<double, double>> pts;  // (iter, log10 gap)
  for (const TracePoint& p : trace.points) {
    double gap = optimum - p.value;
    if (!(gap > 0.0)) {
      gap = 1e-16;
      clamped = true;
    }
    pts.emplace_back(static_cast<double>(p.iter), std::log10(gap));
  }
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += std::string("<title>log10 optimality gap vs iteration") +
         (clamped ? "; non-positive gaps clamped to 1e-16" : "") + "</title>\n";
  svg += "<rect x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(margin) +
         "\" width=\"" + std::to_string(width - 2 * margin) + "\" height=\"" +
         std::to_string(height - 2 * margin) +
         "\" fill=\"none\" stroke=\"rgb(90,90,90)\" stroke-width=\"1\"/>\n";
  if (!pts.empty()) {
    double xmax = 1.0, ymin = pts[0].second, ymax = pts[0].second;
    for (const auto& [x, y] : pts) {
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
    std::string poly;
    for (const auto& [x, y] : pts) {
      const double px = margin + (x / xmax) * (width - 2 * margin);
      const double py = margin + (ymax - y) / (ymax - ymin) * (height - 2 * margin);
      if (!poly.empty()) poly += " ";
      poly += fmt6(px) + "," + fmt6(py);
    }
    svg += "<polyline fill=\"none\" stroke=\"rgb(30,80,160)\" stroke-width=\"1.5\" "
           "points=\"" +
           poly + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string manifest_to_json_text(const RunManifest& manifest) {
  return manifest_json(manifest).dump(2) + "\n";
}

std::string manifest_fingerprint(const RunManifest& manifest) {
  ojson j = manifest_json(manifest);
  j["timestamp"] = "";
  return sha256_bytes(j.dump(2));
}

RunManifest run_experiment(const ExperimentConfig& config, bool write_svg) {
  if (!filesystem_safe(config.name)) {
    throw ValidationError("config name \"" + config.name + "\" is not filesystem-safe");
  }
  for (const std::string& o : config.outputs) {
    if (std::find(known_outputs().begin(), known_outputs().end(), o) ==
        known_outputs().end()) {
      throw ValidationError("unknown output kind \"" + o + "\"");
    }
  }
  const ProblemParams params = params_from_config(config);
  ValidationResult vr = validate(params);
  if (!vr.ok()) {
    std::string joined = "config violates the analytical hypotheses: ";
    for (std::size_t i = 0; i < vr.violations.size(); ++i) {
      if (i) joined += "; ";
      joined += vr.violations[i];
    }
    throw ValidationError(joined);
  }
  const ValidatedParams& vp = *vr.valid;

  // Configuration is valid; from here on files may be written.
  const fs::path dir = fs::path(config.out_dir) / config.name;
  fs::create_directories(dir);

  RunManifest man;
  man.config = config;
  man.library_version = kVersion;
  man.timestamp = now_iso8601_utc();
  man.seed = config.solver.seed;

  Rng rng(config.solver.seed);
  const FeatureMatrix Z0 = random_init(params.d(), params.partition(), rng);

  auto add_file = [&](const std::string& rel, const std::string& content) {
    atomic_write_file(dir / rel, content);
    man.files.push_back({rel, sha256_bytes(content)});
  };

  RunTrace trace;
  FeatureMatrix Zf = Z0;
  try {
    auto result = gradient_ascent(Z0, params, config.solver);
    Zf = std::move(result.first);
    trace = std::move(result.second);
  } catch (const SolverDivergence& e) {
    man.summary.failed = true;
    man.summary.failure = e.what();
    man.summary.iterations = e.iter;
    man.summary.stop_reason = "Diverged";
    add_file("trace.csv", trace_to_csv(e.trace));
    atomic_write_file(dir / "manifest.json", manifest_to_json_text(man));
    return man;
  }

  const std::vector<SpectrumPair> theory = stationary_spectra(vp);
  const SpectralSummary summary = spectral_summary(Zf, params, &theory);
  const RankAllocation alloc = allocate_global_ranks(vp);
  const double f_star = optimal_value(vp, alloc.ranks);
  const ObjectiveBreakdown bd = evaluate(Zf, params);

  man.summary.value = bd.value;
  man.summary.optimum = f_star;
  man.summary.gap = f_star - bd.value;
  man.summary.residual =
      trace.points.empty() ? 0.0 : trace.points.back().grad_norm;
  man.summary.stable_ranks = summary.stable_ranks;
  man.summary.discrimination = summary.discrimination;
  man.summary.max_sigma_deviation = summary.max_sigma_deviation;
  man.summary.iterations = trace.iterations;
  man.summary.stop_reason = to_string(trace.reason);

  add_file("trace.csv", trace_to_csv(trace));

  std::string spectra_csv = "class,index,value\n";
  for (int k = 0; k < params.num_classes(); ++k) {
    const Eigen::VectorXd& sv = summary.spectra[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      spectra_csv += std::to_string(k) + "," + std::to_string(i) + "," +
                     fmt17(sv(i)) + "\n";
    }
  }
  add_file("spectra.csv", spectra_csv);

  const Eigen::MatrixXd sim = cosine_similarity_matrix(Zf);
  add_file("similarity.csv", matrix_to_csv(sim));

  if (write_svg) {
    if (wants(config, "heatmap")) add_file("heatmap.svg", heatmap_svg(sim));
    if (wants(config, "spectra")) {
      std::vector<double> ts;
      for (const SpectrumPair& sp : theory) ts.push_back(sp.sigma_high);
      add_file("spectra.svg", spectrum_svg(summary.spectra, ts));
    }
    if (wants(config, "convergence")) {
      add_file("convergence.svg", convergence_svg(trace, f_star));
    }
  }

  atomic_write_file(dir / "manifest.json", manifest_to_json_text(man));
  return man;
}

std::vector<RunManifest> run_convergence_sweep(const ExperimentConfig& base,
                                               SweepAxis axis,
                                               const std::vector<int>& values,
                                               bool write_svg) {
  if (values.empty()) {
    throw ValidationError("sweep requires at least one value");
  }
  if (axis == SweepAxis::VaryM) {
    for (std::size_t k = 1; k < base.class_sizes.size(); ++k) {
      if (base.class_sizes[k] != base.class_sizes[0]) {
        throw ValidationError("m-sweep requires balanced class sizes");
      }
    }
  }

  // Build and validate every member before any run starts.
  std::vector<ExperimentConfig> members;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = base;
    c.solver.seed = base.solver.seed + i;
    if (axis == SweepAxis::VaryD) {
      c.d = values[i];
      c.name = base.name + "-d" + std::to_string(values[i]);
    } else {
      const int m_new = values[i];
      const int K = static_cast<int>(base.class_sizes.size());
      if (m_new <= 0 || m_new % K != 0) {
        throw ValidationError("m-sweep value " + std::to_string(m_new) +
                              " cannot be split into " + std::to_string(K) +
                              " equal classes");
      }
      c.class_sizes.assign(static_cast<std::size_t>(K), m_new / K);
      c.name = base.name + "-m" + std::to_string(m_new);
    }
    const ProblemParams p = params_from_config(c);
    ValidationResult vr = validate(p);
    if (!vr.ok()) {
      throw ValidationError("sweep member " + c.name + " is invalid: " +
                            vr.violations.front());
    }
    members.push_back(std::move(c));
  }

  std::vector<std::future<RunManifest>> futures;
  futures.reserve(members.size());
  for (const ExperimentConfig& c : members) {
    futures.push_back(std::async(std::launch::async, [c, write_svg]() {
      return run_experiment(c, write_svg);
    }));
  }
  std::vector<RunManifest> manifests;
  manifests.reserve(members.size());
  for (auto& f : futures) manifests.push_back(f.get());

  // Combined gap series, one block per member in sweep order.
  std::string combined = "config,iter,gap\n";
  for (std::size_t i = 0; i < members.size(); ++i) {
    const fs::path trace_path =
        fs::path(members[i].out_dir) / members[i].name / "trace.csv";
    std::ifstream f(trace_path);
    if (!f) continue;  // failed run wrote no trace rows worth plotting
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      long it = 0;
      double value = 0.0, gn = 0.0;
      if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &it, &value, &gn) != 3) continue;
      combined += members[i].name + "," + std::to_string(it) + "," +
                  fmt17(manifests[i].summary.optimum - value) + "\n";
    }
  }
  atomic_write_file(fs::path(base.out_dir) / (base.name + "-gap.csv"), combined);
  return manifests;
}

}  // namespace mcr2
