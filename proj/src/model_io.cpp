#include "cmdp/model_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cmdp {

namespace {

using nlohmann::json;

MixGauss1dParams mix_gauss_params_from_json(const json& j) {
  MixGauss1dParams p;
  p.lo = j.value("lo", p.lo);
  p.hi = j.value("hi", p.hi);
  if (j.contains("actions")) p.actions = j.at("actions").get<std::vector<double>>();
  p.drift0 = j.value("drift0", p.drift0);
  p.drift_x = j.value("drift_x", p.drift_x);
  p.drift_a = j.value("drift_a", p.drift_a);
  p.sigma = j.value("sigma", p.sigma);
  p.mix = j.value("mix", p.mix);
  p.beta = j.value("beta", p.beta);
  p.c0 = j.value("c0", p.c0);
  p.c_x = j.value("c_x", p.c_x);
  p.c_a = j.value("c_a", p.c_a);
  if (j.contains("d0")) p.d0 = j.at("d0").get<std::vector<double>>();
  if (j.contains("d_x")) p.d_x = j.at("d_x").get<std::vector<double>>();
  if (j.contains("d_a")) p.d_a = j.at("d_a").get<std::vector<double>>();
  if (j.contains("k")) p.k = j.at("k").get<std::vector<double>>();
  p.gamma_lo = j.value("gamma_lo", p.gamma_lo);
  p.gamma_hi = j.value("gamma_hi", p.gamma_hi);
  p.K_p = j.value("K_p", p.K_p);
  p.G_p = j.value("G_p", p.G_p);
  if (j.contains("alpha_slater"))
    p.alpha_slater = j.at("alpha_slater").get<std::vector<double>>();
  p.witness_action = j.value("witness_action", p.witness_action);
  return p;
}

}  // namespace

ContinuousCMDP load_model_json(const std::string& json_text) {
  json j = json::parse(json_text);
  const std::string family = j.at("family").get<std::string>();
  const json params = j.value("params", json::object());
  if (family == "mix_gauss_1d" || family == "inv1") {
    MixGauss1dParams p = mix_gauss_params_from_json(params);
    ContinuousCMDP model = make_mix_gauss_1d(p);
    if (family == "inv1") model.family = "inv1";
    return model;
  }
  throw std::invalid_argument("unknown model family: " + family);
}

ContinuousCMDP load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model_json(ss.str());
}

std::string save_model_json(const ContinuousCMDP& model) {
  if (model.family.empty())
    throw std::invalid_argument("save_model: ad hoc models have no file form");
  json j;
  j["family"] = model.family;
  j["params"] = json::parse(model.params_json);
  return j.dump(2);
}

void save_model(const ContinuousCMDP& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << save_model_json(model) << "\n";
}

std::vector<std::string> builtin_families() { return {"mix_gauss_1d", "inv1"}; }

}  // namespace cmdp
