#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fsml/error.hpp"
#include "fsml/io.hpp"
#include "fsml/pipeline.hpp"

namespace fsml::pipeline {
namespace {

namespace fs = std::filesystem;
using io::format_double;

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + format_double(v[i]);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + std::to_string(v[i]);
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto semi = text.find(';', start);
    out.push_back(text.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> out;
  for (Eigen::Index c = 1; c <= count; ++c) out.push_back(prefix + std::to_string(c));
  return out;
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m) {
  auto out = io::open_output(path.string());
  const auto header = numbered("c", m.cols());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

class Manifest {
 public:
  void set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
    lookup_[key] = value;
  }

  const std::string& get(const std::string& key) const {
    const auto it = lookup_.find(key);
    if (it == lookup_.end()) throw ParseError("bundle section 'manifest' is truncated: missing key '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return lookup_.count(key) != 0; }
  double number(const std::string& key) const { return io::parse_double(get(key), "manifest key '" + key + "'"); }
  long long integer(const std::string& key) const { return io::parse_int(get(key), "manifest key '" + key + "'"); }
  std::size_t count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ParseError("manifest key '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key) const { return integer(key) != 0; }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split_list(get(key))) out.push_back(io::parse_double(s, "manifest key '" + key + "'"));
    return out;
  }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  }

  static Manifest read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("bundle section 'manifest' is missing (" + path.string() + ")");
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("bundle section 'manifest': malformed line '" + line + "'");
      m.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::string> lookup_;
};

/// Reads a bundle CSV and checks its shape; problems name the section.
io::CsvTable read_section(const fs::path& dir, const std::string& section, std::size_t rows, std::size_t cols) {
  const fs::path path = dir / (section + ".csv");
  if (!fs::exists(path)) throw ParseError("bundle section '" + section + "' is missing");
  io::CsvTable table;
  try {
    table = io::read_csv_file(path.string());
  } catch (const ParseError& e) {
    throw ParseError("bundle section '" + section + "' is truncated or malformed: " + e.what());
  }
  if (table.rows.size() != rows)
    throw ParseError("bundle section '" + section + "' is truncated: expected " + std::to_string(rows) +
                     " rows, found " + std::to_string(table.rows.size()));
  if (table.header.size() != cols)
    throw ParseError("bundle section '" + section + "': expected " + std::to_string(cols) + " columns, found " +
                     std::to_string(table.header.size()));
  return table;
}

Eigen::MatrixXd read_matrix(const fs::path& dir, const std::string& section, std::size_t rows, std::size_t cols,
                            std::size_t first_col = 0) {
  const io::CsvTable t = read_section(dir, section, rows, cols + first_col);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          io::parse_double(t.rows[r][c + first_col], "bundle section '" + section + "'");
  return m;
}

std::vector<double> column_vector(const Eigen::MatrixXd& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace

void save(const FsmlModel& model, const std::string& directory) {
  const fs::path dir(directory);
  fs::create_directories(dir);
  const std::size_t n = model.size();
  const auto G = model.grid()->size();

  Manifest m;
  m.set("format_version", std::to_string(FsmlModel::kFormatVersion));
  m.set("n", std::to_string(n));
  m.set("grid_points", std::to_string(G));
  m.set("kernel", model.kernel.name());
  m.set("bandwidth_rule", model.bandwidth_rule == fda::BandwidthRule::plugin ? "plugin" : "loocv");
  m.set("class_count", std::to_string(model.class_count));
  m.set("label_values", join(model.label_values));
  m.set("d", std::to_string(model.d));
  m.set("d_estimated", model.d_estimated ? "1" : "0");
  m.set("d_raw", format_double(model.d_raw));
  m.set("k_pca", std::to_string(model.k_pca));
  m.set("k_graph", std::to_string(model.k_graph));
  m.set("graph_edges", std::to_string(model.graph_edges));
  m.set("xi", format_double(model.xi));
  m.set("xi_tuned", model.xi_tuned ? "1" : "0");
  m.set("h_reg", format_double(model.h_reg()));
  m.set("h_tuned", model.h_tuned ? "1" : "0");
  m.set("ridge", format_double(model.ridge()));
  m.set("head", model.head.spec().name());
  m.set("epsilon_mds", format_double(model.embedding.epsilon_mds));
  m.set("clipped_mass", format_double(model.embedding.clipped_mass));
  m.set("seed", std::to_string(model.seed));
  m.set("folds", std::to_string(model.folds));
  m.set("stratify", model.stratify ? "1" : "0");
  m.set("cv", model.cv ? "1" : "0");
  if (model.cv) {
    m.set("cv_xi_grid", join(model.cv->xi_grid));
    m.set("cv_h_grid", join(model.cv->h_grid));
    m.set("cv_cells", std::to_string(model.cv->cells.size()));
    m.set("cv_evaluated", std::to_string(model.cv->evaluated));
    m.set("cv_xi", format_double(model.cv->xi));
    m.set("cv_h_reg", format_double(model.cv->h_reg));
  }
  m.set("timings", std::to_string(model.timings.size()));

  {
    auto out = io::open_output((dir / "grid.csv").string());
    out << "t\n";
    for (double t : model.grid()->points()) out << format_double(t) << '\n';
  }
  {
    auto out = io::open_output((dir / "curves.csv").string());
    auto header = numbered("g", static_cast<Eigen::Index>(G));
    header.insert(header.begin(), "curve_id");
    io::write_id_matrix(out, header, model.ids, model.curves().values);
  }
  {
    auto out = io::open_output((dir / "embedding.csv").string());
    out << "curve_id";
    for (std::size_t k = 1; k <= model.d; ++k) out << ",z" << k;
    out << ",label\n";
    for (std::size_t i = 0; i < n; ++i) {
      out << model.ids[i];
      for (std::size_t k = 0; k < model.d; ++k)
        out << ',' << format_double(model.embedding.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
      out << ',' << model.labels[i] << '\n';
    }
  }
  write_matrix(dir / "eigenvalues.csv", model.embedding.eigenvalues);

  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, classify::KnnState>) {
          m.set("head_state", "knn");
        } else if constexpr (std::is_same_v<S, classify::LdaState>) {
          m.set("head_state", "lda");
          write_matrix(dir / "lda_means.csv", s.means);
          write_matrix(dir / "lda_weights.csv", s.weights);
          write_matrix(dir / "lda_offsets.csv", s.offsets);
          write_matrix(dir / "lda_priors.csv", s.priors);
          write_matrix(dir / "lda_covariance.csv", s.pooled_covariance);
        } else if constexpr (std::is_same_v<S, classify::SvmState>) {
          m.set("head_state", "svm");
          m.set("svm_rows", std::to_string(s.weights.rows()));
          write_matrix(dir / "svm_weights.csv", s.weights);
          write_matrix(dir / "svm_biases.csv", s.biases);
        } else {
          throw StateError("cannot save a model without a fitted head");
        }
      },
      model.head.state());

  if (model.cv) {
    auto out = io::open_output((dir / "cv.csv").string());
    out << "xi,fold,misclassifications,h_inner\n";
    for (const auto& c : model.cv->cells)
      out << format_double(c.xi) << ',' << c.fold << ',' << c.misclassifications << ',' << format_double(c.h_inner)
          << '\n';
    auto inner = io::open_output((dir / "cv_inner.csv").string());
    inner << "xi,fold,h,loss\n";
    for (const auto& c : model.cv->cells)
      for (std::size_t h = 0; h < c.inner_losses.size(); ++h)
        inner << format_double(c.xi) << ',' << c.fold << ',' << format_double(model.cv->h_grid[h]) << ','
              << format_double(c.inner_losses[h]) << '\n';
  }
  {
    auto out = io::open_output((dir / "timings.csv").string());
    out << "stage,seconds\n";
    for (const auto& t : model.timings) out << t.stage << ',' << format_double(t.seconds) << '\n';
  }
  // Written last so an interrupted save leaves no manifest.
  auto out = io::open_output((dir / "manifest.txt").string());
  m.write(out);
}

FsmlModel load(const std::string& directory) {
  const fs::path dir(directory);
  const Manifest m = Manifest::read(dir / "manifest.txt");
  const long long version = m.integer("format_version");
  if (version > FsmlModel::kFormatVersion || version < 1)
    throw IncompatibleVersionError("bundle format version " + std::to_string(version) +
                                   " is not supported (this build reads version " +
                                   std::to_string(FsmlModel::kFormatVersion) + ")");
  FsmlModel model;
  const std::size_t n = m.count("n");
  const std::size_t G = m.count("grid_points");
  model.kernel = fda::Kernel::parse(m.get("kernel"));
  const std::string rule = m.get("bandwidth_rule");
  if (rule != "plugin" && rule != "loocv") throw ParseError("manifest: unknown bandwidth rule '" + rule + "'");
  model.bandwidth_rule = rule == "plugin" ? fda::BandwidthRule::plugin : fda::BandwidthRule::loocv;
  model.class_count = static_cast<int>(m.integer("class_count"));
  for (const auto& s : split_list(m.get("label_values")))
    model.label_values.push_back(static_cast<int>(io::parse_int(s, "manifest key 'label_values'")));
  if (model.label_values.size() != static_cast<std::size_t>(model.class_count))
    throw ParseError("manifest: label_values does not match class_count");
  model.d = m.count("d");
  model.d_estimated = m.flag("d_estimated");
  model.d_raw = m.number("d_raw");
  model.k_pca = m.count("k_pca");
  model.k_graph = m.count("k_graph");
  model.graph_edges = m.count("graph_edges");
  model.xi = m.number("xi");
  model.xi_tuned = m.flag("xi_tuned");
  model.h_tuned = m.flag("h_tuned");
  model.seed = static_cast<std::uint64_t>(std::stoull(m.get("seed")));
  model.folds = m.count("folds");
  model.stratify = m.flag("stratify");
  model.embedding.epsilon_mds = m.number("epsilon_mds");
  model.embedding.clipped_mass = m.number("clipped_mass");
  const auto head_spec = classify::HeadSpec::parse(m.get("head"));

  const Eigen::MatrixXd grid_points = read_matrix(dir, "grid", G, 1);
  const auto grid = std::make_shared<const fda::Grid>(column_vector(grid_points));

  const io::CsvTable curves = read_section(dir, "curves", n, G + 1);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(G));
  for (std::size_t i = 0; i < n; ++i) {
    model.ids.push_back(curves.rows[i][0]);
    for (std::size_t g = 0; g < G; ++g)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) =
          io::parse_double(curves.rows[i][g + 1], "bundle section 'curves'");
  }

  const io::CsvTable emb = read_section(dir, "embedding", n, model.d + 2);
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.d));
  for (std::size_t i = 0; i < n; ++i) {
    if (emb.rows[i][0] != model.ids[i]) throw ParseError("bundle section 'embedding': curve ids out of order");
    for (std::size_t k = 0; k < model.d; ++k)
      coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          io::parse_double(emb.rows[i][k + 1], "bundle section 'embedding'");
    model.labels.push_back(static_cast<int>(io::parse_int(emb.rows[i][model.d + 1], "bundle section 'embedding'")));
  }
  model.embedding.coords = coords;
  model.embedding.eigenvalues = read_matrix(dir, "eigenvalues", n, 1);

  model.map = interp::make_coordinate_map(fda::CurveSet{grid, values}, coords, model.kernel, m.number("h_reg"),
                                          model.k_pca, m.number("ridge"));

  const std::string state = m.get("head_state");
  const auto M = static_cast<std::size_t>(model.class_count);
  classify::ClassifierHead::State head_state;
  if (state == "knn") {
    head_state = classify::KnnState{head_spec.k, coords, model.labels};
  } else if (state == "lda") {
    classify::LdaState s;
    s.means = read_matrix(dir, "lda_means", M, model.d);
    s.weights = read_matrix(dir, "lda_weights", M, model.d);
    s.offsets = read_matrix(dir, "lda_offsets", M, 1);
    s.priors = read_matrix(dir, "lda_priors", M, 1);
    s.pooled_covariance = read_matrix(dir, "lda_covariance", model.d, model.d);
    head_state = std::move(s);
  } else if (state == "svm") {
    const std::size_t rows = m.count("svm_rows");
    classify::SvmState s;
    s.weights = read_matrix(dir, "svm_weights", rows, model.d);
    s.biases = read_matrix(dir, "svm_biases", rows, 1);
    head_state = std::move(s);
  } else {
    throw ParseError("manifest: unknown head state '" + state + "'");
  }
  model.head = classify::ClassifierHead::from_state(head_spec, model.class_count, model.d, std::move(head_state));

  if (m.flag("cv")) {
    tuning::CvResult cv;
    cv.xi_grid = m.numbers("cv_xi_grid");
    cv.h_grid = m.numbers("cv_h_grid");
    cv.xi = m.number("cv_xi");
    cv.h_reg = m.number("cv_h_reg");
    cv.evaluated = m.count("cv_evaluated");
    const std::size_t cells = m.count("cv_cells");
    const io::CsvTable t = read_section(dir, "cv", cells, 4);
    const io::CsvTable inner = read_section(dir, "cv_inner", cells * cv.h_grid.size(), 4);
    const std::size_t folds = cv.xi_grid.empty() ? 0 : cells / cv.xi_grid.size();
    cv.xi_losses.assign(cv.xi_grid.size(), 0);
    for (std::size_t c = 0; c < cells; ++c) {
      tuning::CvCell cell;
      cell.xi = io::parse_double(t.rows[c][0], "bundle section 'cv'");
      cell.fold = static_cast<std::size_t>(io::parse_int(t.rows[c][1], "bundle section 'cv'"));
      cell.misclassifications = static_cast<std::size_t>(io::parse_int(t.rows[c][2], "bundle section 'cv'"));
      cell.h_inner = io::parse_double(t.rows[c][3], "bundle section 'cv'");
      for (std::size_t h = 0; h < cv.h_grid.size(); ++h)
        cell.inner_losses.push_back(io::parse_double(inner.rows[c * cv.h_grid.size() + h][3], "bundle section 'cv_inner'"));
      if (folds) cv.xi_losses[c / folds] += cell.misclassifications;
      cv.cells.push_back(std::move(cell));
    }
    model.cv = std::move(cv);
  }

  const io::CsvTable timings = read_section(dir, "timings", m.count("timings"), 2);
  for (const auto& row : timings.rows)
    model.timings.push_back({row[0], io::parse_double(row[1], "bundle section 'timings'")});
  return model;
}

}  // namespace fsml::pipeline
