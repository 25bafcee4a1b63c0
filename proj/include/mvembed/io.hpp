#pragma once

#include "mvembed/dataset.hpp"
#include "mvembed/deep.hpp"
#include "mvembed/kernel.hpp"
#include "mvembed/linear.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

namespace mvembed {

using Json = nlohmann::json;

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw LoadError("failed while writing " + path.string());
}

// Shortest decimal form that parses back to the same bits.
inline void append_double(std::string& s, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, res.ptr);
}

inline double parse_double(const std::string& token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw LoadError(where + ": '" + token + "' is not a number");
  return v;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

inline void save_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::string text;
  text.reserve(std::size_t(m.size()) * 12);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) text.push_back(',');
      detail::append_double(text, m(r, c));
    }
    text.push_back('\n');
  }
  detail::write_file(path, text);
}

inline Matrix load_matrix_csv(const std::filesystem::path& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  if (lines.empty()) throw LoadError(path.string() + ": file holds no rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::vector<double> row;
    std::size_t start = 0;
    const std::string& line = lines[r];
    while (true) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      row.push_back(detail::parse_double(
          line.substr(start, end - start),
          path.string() + ": row " + std::to_string(r + 1) + " column " +
              std::to_string(row.size() + 1)));
      if (end == line.size()) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw LoadError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(row.size()) + " values, expected " +
                      std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  Matrix m(Index(rows.size()), Index(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows[std::size_t(r)][std::size_t(c)];
  return m;
}

namespace detail {

// Reads one integer label per line, then remaps the sorted distinct values
// onto 1..C, remembering the original value for each class.
inline void load_labels_file(const std::filesystem::path& path, std::vector<int>& labels,
                             std::vector<long long>& label_values) {
  const auto lines = split_lines(read_file(path));
  if (lines.empty()) throw LoadError(path.string() + ": file holds no labels");
  std::vector<long long> raw;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    long long v = 0;
    const char* first = lines[i].data();
    const char* last = first + lines[i].size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
      throw LoadError(path.string() + ": line " + std::to_string(i + 1) + ": '" + lines[i] +
                      "' is not an integer label");
    raw.push_back(v);
  }
  label_values = raw;
  std::sort(label_values.begin(), label_values.end());
  label_values.erase(std::unique(label_values.begin(), label_values.end()), label_values.end());
  labels.clear();
  for (long long v : raw) {
    const auto it = std::lower_bound(label_values.begin(), label_values.end(), v);
    labels.push_back(int(it - label_values.begin()) + 1);
  }
}

inline const Json& need(const Json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) throw LoadError(ctx + ": missing field '" + key + "'");
  return *it;
}

template <class T>
T get_as(const Json& j, const char* key, const std::string& ctx) {
  try {
    return need(j, key, ctx).get<T>();
  } catch (const LoadError&) {
    throw;
  } catch (const Json::exception&) {
    throw LoadError(ctx + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

// Loads the dataset a manifest describes. View paths are resolved relative
// to the manifest; shapes are checked against the manifest before use, and
// every failure names the file (and field) at fault.
inline Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const std::string ctx = manifest_path.string();
  Json j;
  try {
    j = Json::parse(detail::read_file(manifest_path));
  } catch (const Json::exception& e) {
    throw LoadError(ctx + ": " + e.what());
  }
  if (!j.is_object()) throw LoadError(ctx + ": manifest must be a JSON object");
  const auto version = detail::get_as<long long>(j, "version", ctx);
  if (version != 1)
    throw LoadError(ctx + ": unsupported manifest version " + std::to_string(version));
  const Json& views = detail::need(j, "views", ctx);
  if (!views.is_array() || views.size() < 2)
    throw LoadError(ctx + ": field 'views' must list at least two views");

  const std::filesystem::path dir = manifest_path.parent_path();
  Dataset data;
  for (const Json& entry : views) {
    const std::string name = detail::get_as<std::string>(entry, "name", ctx);
    const std::string vctx = ctx + ": view '" + name + "'";
    const auto rel = detail::get_as<std::string>(entry, "path", vctx);
    const auto rows = detail::get_as<Index>(entry, "rows", vctx);
    const auto cols = detail::get_as<Index>(entry, "cols", vctx);
    const std::filesystem::path file = dir / rel;
    const Matrix m = load_matrix_csv(file);
    if (m.rows() != rows || m.cols() != cols)
      throw LoadError(file.string() + ": manifest fields rows/cols promise " +
                      std::to_string(rows) + "x" + std::to_string(cols) + ", file holds " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (!data.views.empty() && m.cols() != data.num_samples())
      throw LoadError(ctx + ": view '" + data.view_names.front() + "' has " +
                      std::to_string(data.num_samples()) + " samples but view '" + name +
                      "' has " + std::to_string(m.cols()));
    data.view_names.push_back(name);
    data.views.push_back(m);
  }
  if (j.contains("labels_path")) {
    const auto rel = detail::get_as<std::string>(j, "labels_path", ctx);
    const std::filesystem::path file = dir / rel;
    detail::load_labels_file(file, data.labels, data.label_values);
    if (Index(data.labels.size()) != data.num_samples())
      throw LoadError(file.string() + ": " + std::to_string(data.labels.size()) +
                      " labels for " + std::to_string(data.num_samples()) + " samples");
  }
  data.validate();
  return data;
}

// Writes per-view CSVs, labels when present, and a manifest into dir;
// returns the manifest path. Labels are written back as their original
// values so a reload reproduces the same classes.
inline std::filesystem::path save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  data.validate();
  std::filesystem::create_directories(dir);
  Json views = Json::array();
  for (int v = 0; v < data.num_views(); ++v) {
    const std::string name =
        data.view_names.empty() ? "view" + std::to_string(v) : data.view_names[std::size_t(v)];
    const std::string file = name + ".csv";
    save_matrix_csv(dir / file, data.views[std::size_t(v)]);
    views.push_back({{"name", name},
                     {"path", file},
                     {"rows", data.views[std::size_t(v)].rows()},
                     {"cols", data.views[std::size_t(v)].cols()}});
  }
  Json manifest;
  manifest["version"] = 1;
  manifest["views"] = std::move(views);
  if (data.has_labels()) {
    std::string text;
    for (int l : data.labels) {
      const long long value =
          data.label_values.empty() ? l : data.label_values[std::size_t(l - 1)];
      text += std::to_string(value);
      text.push_back('\n');
    }
    detail::write_file(dir / "labels.csv", text);
    manifest["labels_path"] = "labels.csv";
  }
  detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir / "manifest.json";
}

namespace detail {

inline Json mat_json(const Matrix& m) {
  Json data = Json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix json_mat(const Json& j, const std::string& ctx) {
  const auto rows = get_as<Index>(j, "rows", ctx);
  const auto cols = get_as<Index>(j, "cols", ctx);
  const auto data = get_as<std::vector<double>>(j, "data", ctx);
  if (rows < 0 || cols < 0 || Index(data.size()) != rows * cols)
    throw LoadError(ctx + ": matrix payload size does not match its shape");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  return m;
}

inline Json vec_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector json_vec(const Json& j, const char* key, const std::string& ctx) {
  const auto data = get_as<std::vector<double>>(j, key, ctx);
  return Eigen::Map<const Vector>(data.data(), Index(data.size()));
}

inline Json solution_json(const EigenSolution& s) {
  return Json{{"vectors", mat_json(s.vectors)},
              {"values", vec_json(s.values)},
              {"view_offsets", s.view_offsets},
              {"rho", s.rho}};
}

inline EigenSolution json_solution(const Json& j, const std::string& ctx) {
  EigenSolution s;
  s.vectors = json_mat(need(j, "vectors", ctx), ctx + ": vectors");
  s.values = json_vec(j, "values", ctx);
  s.view_offsets = get_as<std::vector<Index>>(j, "view_offsets", ctx);
  s.rho = get_as<double>(j, "rho", ctx);
  return s;
}

inline Json spec_json(const MethodSpec& s) {
  Json j{{"method", method_name(s.method)}, {"d", s.d}, {"delta", s.delta}};
  if (s.pca_dims.has_value())
    j["pca_dims"] = *s.pca_dims;
  else
    j["pca_dims"] = nullptr;
  return j;
}

inline MethodSpec json_spec(const Json& j, const std::string& ctx) {
  MethodSpec s;
  const auto name = get_as<std::string>(j, "method", ctx);
  const auto method = method_from_name(name);
  if (!method.has_value()) throw LoadError(ctx + ": unknown method '" + name + "'");
  s.method = *method;
  s.d = get_as<int>(j, "d", ctx);
  s.delta = get_as<double>(j, "delta", ctx);
  const Json& pd = need(j, "pca_dims", ctx);
  if (!pd.is_null()) s.pca_dims = pd.get<int>();
  return s;
}

inline Json pca_json(const std::optional<PcaModel>& p) {
  if (!p.has_value()) return Json(nullptr);
  return Json{{"mean", vec_json(p->mean)},
              {"basis", mat_json(p->basis)},
              {"explained", vec_json(p->explained)}};
}

inline std::optional<PcaModel> json_pca(const Json& j, const std::string& ctx) {
  if (j.is_null()) return std::nullopt;
  PcaModel p;
  p.mean = json_vec(j, "mean", ctx);
  p.basis = json_mat(need(j, "basis", ctx), ctx + ": basis");
  p.explained = json_vec(j, "explained", ctx);
  return p;
}

inline Json linear_json(const LinearModel& m) {
  Json means = Json::array(), pca = Json::array();
  for (const Vector& v : m.means) means.push_back(vec_json(v));
  for (const auto& p : m.pca) pca.push_back(pca_json(p));
  return Json{{"spec", spec_json(m.spec)}, {"view_names", m.view_names},
              {"input_dims", m.input_dims}, {"means", std::move(means)},
              {"pca", std::move(pca)},      {"solution", solution_json(m.solution)}};
}

inline LinearModel json_linear(const Json& j, const std::string& ctx) {
  LinearModel m;
  m.spec = json_spec(need(j, "spec", ctx), ctx + ": spec");
  m.view_names = get_as<std::vector<std::string>>(j, "view_names", ctx);
  m.input_dims = get_as<std::vector<Index>>(j, "input_dims", ctx);
  for (const Json& v : need(j, "means", ctx)) {
    const auto data = v.get<std::vector<double>>();
    m.means.push_back(Eigen::Map<const Vector>(data.data(), Index(data.size())));
  }
  for (const Json& p : need(j, "pca", ctx)) m.pca.push_back(json_pca(p, ctx + ": pca"));
  m.solution = json_solution(need(j, "solution", ctx), ctx + ": solution");
  if (m.means.size() != m.input_dims.size() || m.pca.size() != m.means.size())
    throw LoadError(ctx + ": per-view field lengths disagree");
  return m;
}

inline Json kernel_model_json(const KernelModel& m) {
  Json trains = Json::array(), centerers = Json::array();
  Json means = Json::array(), pca = Json::array();
  for (const Vector& v : m.means) means.push_back(vec_json(v));
  for (const auto& p : m.pca) pca.push_back(pca_json(p));
  for (const Matrix& t : m.train_features) trains.push_back(mat_json(t));
  for (const GramCenterer& c : m.centerers)
    centerers.push_back(Json{{"row_means", vec_json(c.row_means)}, {"grand_mean", c.grand_mean}});
  return Json{{"spec", spec_json(m.spec)},
              {"kernel", Json{{"kind", kernel_name(m.kernel.kind)}, {"sigma", m.kernel.sigma}}},
              {"view_names", m.view_names},
              {"input_dims", m.input_dims},
              {"means", std::move(means)},
              {"pca", std::move(pca)},
              {"train_features", std::move(trains)},
              {"centerers", std::move(centerers)},
              {"solution", solution_json(m.solution)}};
}

inline KernelModel json_kernel_model(const Json& j, const std::string& ctx) {
  KernelModel m;
  m.spec = json_spec(need(j, "spec", ctx), ctx + ": spec");
  const Json& kj = need(j, "kernel", ctx);
  const auto kind = kernel_from_name(get_as<std::string>(kj, "kind", ctx + ": kernel"));
  if (!kind.has_value()) throw LoadError(ctx + ": unknown kernel kind");
  m.kernel.kind = *kind;
  m.kernel.sigma = get_as<double>(kj, "sigma", ctx + ": kernel");
  m.view_names = get_as<std::vector<std::string>>(j, "view_names", ctx);
  m.input_dims = get_as<std::vector<Index>>(j, "input_dims", ctx);
  for (const Json& v : need(j, "means", ctx)) {
    const auto data = v.get<std::vector<double>>();
    m.means.push_back(Eigen::Map<const Vector>(data.data(), Index(data.size())));
  }
  for (const Json& p : need(j, "pca", ctx)) m.pca.push_back(json_pca(p, ctx + ": pca"));
  for (const Json& t : need(j, "train_features", ctx))
    m.train_features.push_back(json_mat(t, ctx + ": train_features"));
  for (const Json& c : need(j, "centerers", ctx))
    m.centerers.push_back(
        {json_vec(c, "row_means", ctx + ": centerers"), get_as<double>(c, "grand_mean", ctx)});
  m.solution = json_solution(need(j, "solution", ctx), ctx + ": solution");
  if (m.train_features.size() != m.means.size() || m.centerers.size() != m.means.size())
    throw LoadError(ctx + ": per-view field lengths disagree");
  return m;
}

inline Json rff_json(const RffModel& m) {
  Json maps = Json::array();
  for (const RffMap& map : m.maps)
    maps.push_back(Json{{"sigma", map.sigma},
                        {"freqs", mat_json(map.freqs)},
                        {"phases", vec_json(map.phases)}});
  return Json{{"sigma", m.sigma},
              {"seed", m.seed},
              {"maps", std::move(maps)},
              {"base", linear_json(m.base)}};
}

inline RffModel json_rff(const Json& j, const std::string& ctx) {
  RffModel m;
  m.sigma = get_as<double>(j, "sigma", ctx);
  m.seed = get_as<std::uint64_t>(j, "seed", ctx);
  for (const Json& mj : need(j, "maps", ctx)) {
    RffMap map;
    map.sigma = get_as<double>(mj, "sigma", ctx + ": maps");
    map.freqs = json_mat(need(mj, "freqs", ctx + ": maps"), ctx + ": maps");
    map.phases = json_vec(mj, "phases", ctx + ": maps");
    m.maps.push_back(std::move(map));
  }
  m.base = json_linear(need(j, "base", ctx), ctx + ": base");
  return m;
}

inline Json deep_json(const DeepModel& m) {
  Json nets = Json::array();
  for (const Mlp& net : m.nets) {
    Json weights = Json::array(), biases = Json::array();
    for (const Matrix& w : net.weights) weights.push_back(mat_json(w));
    for (const Vector& b : net.biases) biases.push_back(vec_json(b));
    nets.push_back(Json{{"weights", std::move(weights)}, {"biases", std::move(biases)}});
  }
  return Json{{"config", Json{{"method", method_name(m.config.method)},
                              {"d", m.config.d},
                              {"delta", m.config.delta},
                              {"hidden", m.config.hidden},
                              {"output_dim", m.config.output_dim},
                              {"epochs", m.config.epochs},
                              {"batch", m.config.batch},
                              {"lr", m.config.lr},
                              {"seed", m.config.seed}}},
              {"view_names", m.view_names},
              {"input_dims", m.input_dims},
              {"nets", std::move(nets)},
              {"solution", solution_json(m.solution)},
              {"objective_log", m.objective_log}};
}

inline DeepModel json_deep(const Json& j, const std::string& ctx) {
  DeepModel m;
  const Json& cj = need(j, "config", ctx);
  const std::string cctx = ctx + ": config";
  const auto method = method_from_name(get_as<std::string>(cj, "method", cctx));
  if (!method.has_value()) throw LoadError(cctx + ": unknown method");
  m.config.method = *method;
  m.config.d = get_as<int>(cj, "d", cctx);
  m.config.delta = get_as<double>(cj, "delta", cctx);
  m.config.hidden = get_as<std::vector<Index>>(cj, "hidden", cctx);
  m.config.output_dim = get_as<Index>(cj, "output_dim", cctx);
  m.config.epochs = get_as<int>(cj, "epochs", cctx);
  m.config.batch = get_as<Index>(cj, "batch", cctx);
  m.config.lr = get_as<double>(cj, "lr", cctx);
  m.config.seed = get_as<std::uint64_t>(cj, "seed", cctx);
  m.view_names = get_as<std::vector<std::string>>(j, "view_names", ctx);
  m.input_dims = get_as<std::vector<Index>>(j, "input_dims", ctx);
  for (const Json& nj : need(j, "nets", ctx)) {
    Mlp net;
    for (const Json& w : need(nj, "weights", ctx + ": nets"))
      net.weights.push_back(json_mat(w, ctx + ": nets"));
    for (const Json& b : need(nj, "biases", ctx + ": nets")) {
      const auto data = b.get<std::vector<double>>();
      net.biases.push_back(Eigen::Map<const Vector>(data.data(), Index(data.size())));
    }
    if (net.weights.size() != net.biases.size())
      throw LoadError(ctx + ": nets: layer counts disagree");
    m.nets.push_back(std::move(net));
  }
  m.solution = json_solution(need(j, "solution", ctx), ctx + ": solution");
  m.objective_log = get_as<std::vector<double>>(j, "objective_log", ctx);
  return m;
}

}  // namespace detail

using AnyModel = std::variant<LinearModel, KernelModel, RffModel, DeepModel>;

inline const char* model_family(const AnyModel& m) {
  switch (m.index()) {
    case 0: return "linear";
    case 1: return "kernel";
    case 2: return "rff";
    default: return "deep";
  }
}

inline const EigenSolution& model_solution(const AnyModel& m) {
  if (const auto* p = std::get_if<LinearModel>(&m)) return p->solution;
  if (const auto* p = std::get_if<KernelModel>(&m)) return p->solution;
  if (const auto* p = std::get_if<RffModel>(&m)) return p->base.solution;
  return std::get<DeepModel>(m).solution;
}

inline const std::vector<std::string>& model_view_names(const AnyModel& m) {
  if (const auto* p = std::get_if<LinearModel>(&m)) return p->view_names;
  if (const auto* p = std::get_if<KernelModel>(&m)) return p->view_names;
  if (const auto* p = std::get_if<RffModel>(&m)) return p->base.view_names;
  return std::get<DeepModel>(m).view_names;
}

inline std::vector<Matrix> project_any(const AnyModel& m, const std::vector<Matrix>& views) {
  if (const auto* p = std::get_if<LinearModel>(&m)) return project(*p, views);
  if (const auto* p = std::get_if<KernelModel>(&m)) return project_kernel(*p, views);
  if (const auto* p = std::get_if<RffModel>(&m)) return project_rff(*p, views);
  return project_deep(std::get<DeepModel>(m), views);
}

// Model files carry a format tag, a version, and the family under which the
// payload is decoded. Numbers are written in shortest round-trip form, so a
// reloaded model projects to bit-identical embeddings.
inline void save_model(const AnyModel& model, const std::filesystem::path& path) {
  Json j;
  j["format"] = "mvembed-model";
  j["version"] = 1;
  j["family"] = model_family(model);
  if (const auto* p = std::get_if<LinearModel>(&model))
    j["model"] = detail::linear_json(*p);
  else if (const auto* p = std::get_if<KernelModel>(&model))
    j["model"] = detail::kernel_model_json(*p);
  else if (const auto* p = std::get_if<RffModel>(&model))
    j["model"] = detail::rff_json(*p);
  else
    j["model"] = detail::deep_json(std::get<DeepModel>(model));
  detail::write_file(path, j.dump(2) + "\n");
}

inline AnyModel load_model(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  Json j;
  try {
    j = Json::parse(detail::read_file(path));
  } catch (const Json::exception& e) {
    throw LoadError(ctx + ": " + e.what());
  }
  if (!j.is_object() || detail::get_as<std::string>(j, "format", ctx) != "mvembed-model")
    throw LoadError(ctx + ": not a model file");
  const auto version = detail::get_as<long long>(j, "version", ctx);
  if (version != 1)
    throw LoadError(ctx + ": unsupported model version " + std::to_string(version));
  const auto family = detail::get_as<std::string>(j, "family", ctx);
  const Json& body = detail::need(j, "model", ctx);
  try {
    if (family == "linear") return detail::json_linear(body, ctx);
    if (family == "kernel") return detail::json_kernel_model(body, ctx);
    if (family == "rff") return detail::json_rff(body, ctx);
    if (family == "deep") return detail::json_deep(body, ctx);
  } catch (const LoadError&) {
    throw;
  } catch (const Json::exception& e) {
    throw LoadError(ctx + ": " + e.what());
  }
  throw LoadError(ctx + ": unknown model family '" + family + "'");
}

}  // namespace mvembed
