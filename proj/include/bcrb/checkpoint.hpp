#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bcrb/score_net.hpp"

namespace bcrb {

// Checkpoint layout: {dims, activations, weights (row-major nested arrays),
// seed, train_meta}. nlohmann/json emits shortest round-trip decimals, so
// weights survive save/load exactly.
inline nlohmann::json net_to_json(const MlpScoreNetd& net, std::uint64_t seed,
                                  nlohmann::json train_meta = {}) {
  nlohmann::json j;
  j["dims"] = net.dims();
  nlohmann::json acts = nlohmann::json::array();
  for (Activation a : net.activations) acts.push_back(to_string(a));
  j["activations"] = acts;
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : net.weights) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
  }
  j["weights"] = std::move(weights);
  j["seed"] = seed;
  j["train_meta"] = std::move(train_meta);
  return j;
}

inline MlpScoreNetd net_from_json(const nlohmann::json& j) {
  const auto dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() < 2) throw std::invalid_argument("checkpoint: bad dims");
  MlpScoreNetd net;
  for (const auto& name : j.at("activations"))
    net.activations.push_back(activation_from_string(name.get<std::string>()));
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto& rows = j.at("weights").at(l);
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    net.weights.push_back(std::move(w));
  }
  net.validate();
  return net;
}

inline void save_checkpoint(const std::string& path, const MlpScoreNetd& net,
                            std::uint64_t seed, nlohmann::json train_meta = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << net_to_json(net, seed, std::move(train_meta)).dump(2) << '\n';
}

inline MlpScoreNetd load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  return net_from_json(j);
}

}  // namespace bcrb
