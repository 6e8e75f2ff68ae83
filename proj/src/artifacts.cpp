#include "cmdp/artifacts.hpp"

#include <json.hpp>

#include <cstring>
#include <sstream>

namespace cmdp {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'C', 'M', 'D', 'P', 'F', 'M', '1', '\0'};

void put_i64(std::ostream& os, std::int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
std::int64_t get_i64(std::istream& is) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
void put_vec(std::ostream& os, const Vector& v) {
  put_i64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), v.size() * 8);
}
Vector get_vec(std::istream& is) {
  Vector v(get_i64(is));
  is.read(reinterpret_cast<char*>(v.data()), v.size() * 8);
  return v;
}
void put_mat(std::ostream& os, const Matrix& m) {
  put_i64(os, m.rows());
  put_i64(os, m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    os.write(reinterpret_cast<const char*>(Vector(m.row(i)).data()), m.cols() * 8);
}
Matrix get_mat(std::istream& is) {
  const auto r = get_i64(is), c = get_i64(is);
  Matrix m(r, c);
  Vector row(c);
  for (Eigen::Index i = 0; i < r; ++i) {
    is.read(reinterpret_cast<char*>(row.data()), c * 8);
    m.row(i) = row.transpose();
  }
  return m;
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix mat_from_json(const json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

json vec_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vec_from_json(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

}  // namespace

void save_finite_model(const FiniteCMDP& fm, const std::string& path, bool binary) {
  if (binary) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write finite model: " + path);
    os.write(kMagic, 8);
    put_i64(os, fm.n_states);
    put_i64(os, fm.n_actions);
    put_i64(os, fm.q());
    put_i64(os, fm.phi.size() > 0 ? 1 : 0);
    for (const auto& pa : fm.p) put_mat(os, pa);
    put_mat(os, fm.c);
    for (const auto& dl : fm.d) put_mat(os, dl);
    put_vec(os, fm.gamma);
    put_vec(os, fm.k);
    os.write(reinterpret_cast<const char*>(&fm.beta), 8);
    os.write(reinterpret_cast<const char*>(&fm.alpha_min), 8);
    os.write(reinterpret_cast<const char*>(&fm.quad_defect), 8);
    if (fm.phi.size() > 0) {
      put_mat(os, fm.phi);
      put_vec(os, fm.lambda);
    }
    return;
  }
  json j;
  j["n_states"] = fm.n_states;
  j["n_actions"] = fm.n_actions;
  j["beta"] = fm.beta;
  j["alpha_min"] = fm.alpha_min;
  j["quad_defect"] = fm.quad_defect;
  json ps = json::array();
  for (const auto& pa : fm.p) ps.push_back(mat_to_json(pa));
  j["p"] = std::move(ps);
  j["c"] = mat_to_json(fm.c);
  json ds = json::array();
  for (const auto& dl : fm.d) ds.push_back(mat_to_json(dl));
  j["d"] = std::move(ds);
  j["gamma"] = vec_to_json(fm.gamma);
  j["k"] = vec_to_json(fm.k);
  if (fm.phi.size() > 0) {
    j["phi"] = mat_to_json(fm.phi);
    j["lambda"] = vec_to_json(fm.lambda);
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write finite model: " + path);
  os << j.dump() << "\n";
}

FiniteCMDP load_finite_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open finite model: " + path);
  char magic[8];
  is.read(magic, 8);
  FiniteCMDP fm;
  if (std::memcmp(magic, kMagic, 8) == 0) {
    fm.n_states = static_cast<int>(get_i64(is));
    fm.n_actions = static_cast<int>(get_i64(is));
    const int q = static_cast<int>(get_i64(is));
    const bool with_min = get_i64(is) != 0;
    fm.p.resize(fm.n_actions);
    for (auto& pa : fm.p) pa = get_mat(is);
    fm.c = get_mat(is);
    fm.d.resize(q);
    for (auto& dl : fm.d) dl = get_mat(is);
    fm.gamma = get_vec(is);
    fm.k = get_vec(is);
    is.read(reinterpret_cast<char*>(&fm.beta), 8);
    is.read(reinterpret_cast<char*>(&fm.alpha_min), 8);
    is.read(reinterpret_cast<char*>(&fm.quad_defect), 8);
    if (with_min) {
      fm.phi = get_mat(is);
      fm.lambda = get_vec(is);
    }
    if (!is) throw std::runtime_error("finite model artifact truncated: " + path);
  } else {
    is.seekg(0);
    std::ostringstream ss;
    ss << is.rdbuf();
    json j = json::parse(ss.str());
    fm.n_states = j.at("n_states").get<int>();
    fm.n_actions = j.at("n_actions").get<int>();
    fm.beta = j.at("beta").get<double>();
    fm.alpha_min = j.value("alpha_min", 0.0);
    fm.quad_defect = j.value("quad_defect", 0.0);
    for (const auto& pa : j.at("p")) fm.p.push_back(mat_from_json(pa));
    fm.c = mat_from_json(j.at("c"));
    for (const auto& dl : j.at("d")) fm.d.push_back(mat_from_json(dl));
    fm.gamma = vec_from_json(j.at("gamma"));
    fm.k = vec_from_json(j.at("k"));
    if (j.contains("phi")) {
      fm.phi = mat_from_json(j.at("phi"));
      fm.lambda = vec_from_json(j.at("lambda"));
    }
  }
  fm.validate();
  return fm;
}

void save_solution(const SolutionArtifact& art, const std::string& path) {
  json j;
  j["criterion"] = to_string(art.criterion);
  j["value"] = art.value;
  j["zeta"] = mat_to_json(art.zeta);
  j["policy"] = mat_to_json(art.policy);
  j["delta"] = vec_to_json(art.delta);
  j["u"] = vec_to_json(art.u);
  j["dual_objective"] = art.dual_objective;
  j["mass_residual"] = art.mass_residual;
  j["balance_residual"] = art.balance_residual;
  j["duality_gap"] = art.duality_gap;
  j["model_digest"] = art.model_digest;
  j["grid_digest"] = art.grid_digest;
  j["version"] = kVersion;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write solution: " + path);
  os << j.dump(2) << "\n";
}

SolutionArtifact load_solution(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open solution: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  json j = json::parse(ss.str());
  SolutionArtifact art;
  art.criterion =
      j.at("criterion").get<std::string>() == "average" ? Criterion::average : Criterion::discounted;
  art.value = j.at("value").get<double>();
  art.zeta = mat_from_json(j.at("zeta"));
  art.policy = mat_from_json(j.at("policy"));
  art.delta = vec_from_json(j.at("delta"));
  art.u = vec_from_json(j.at("u"));
  art.dual_objective = j.value("dual_objective", 0.0);
  art.mass_residual = j.value("mass_residual", 0.0);
  art.balance_residual = j.value("balance_residual", 0.0);
  art.duality_gap = j.value("duality_gap", 0.0);
  art.model_digest = j.value("model_digest", 0ULL);
  art.grid_digest = j.value("grid_digest", 0ULL);
  return art;
}

void save_extended_policy(const ExtendedPolicy& pol, const std::string& path) {
  json j;
  j["grid_digest"] = pol.grid.digest();
  j["box_lower"] = vec_to_json(pol.grid.space.lower);
  j["box_upper"] = vec_to_json(pol.grid.space.upper);
  json res = json::array();
  for (int ax = 0; ax < pol.grid.resolution.size(); ++ax) res.push_back(pol.grid.resolution[ax]);
  j["resolution"] = std::move(res);
  j["policy"] = mat_to_json(pol.base.prob);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write policy: " + path);
  os << j.dump() << "\n";
}

ExtendedPolicy load_extended_policy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open policy: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  json j = json::parse(ss.str());
  StateSpace space{vec_from_json(j.at("box_lower")), vec_from_json(j.at("box_upper"))};
  const auto res_json = j.at("resolution");
  IVector res(static_cast<Eigen::Index>(res_json.size()));
  for (Eigen::Index ax = 0; ax < res.size(); ++ax) res[ax] = res_json[ax].get<int>();
  const Grid grid = build_grid(space, res, 2);
  StationaryPolicy base{mat_from_json(j.at("policy"))};
  return extend_policy(base, grid);
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns)
    : out_(path), n_cols_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot write csv: " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_) throw std::invalid_argument("csv row arity mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
  out_ << "\n";
}

}  // namespace cmdp
