#include "roadbeh/param_store.hpp"

#include <algorithm>
#include <stdexcept>

namespace roadbeh {

void ParamStore::add(const std::string& name, Tensor value) {
  value.set_node(std::nullopt);
  if (!params_.emplace(name, std::move(value)).second) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
}

const Tensor& ParamStore::get(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::set(const std::string& name, const Tensor& value) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  if (!it->second.same_shape(value)) {
    throw ShapeError("parameter '" + name + "' is " + it->second.shape_string() +
                     ", cannot assign " + value.shape_string());
  }
  std::copy(value.data().begin(), value.data().end(), it->second.data().begin());
}

std::span<double> ParamStore::values(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second.data();
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const auto& [name, t] : params_) out.add(name, Tensor(t.rows(), t.cols()));
  return out;
}

nlohmann::json to_json(const ParamStore& store) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, t] : store) {
    params[name] = {{"rows", t.rows()},
                    {"cols", t.cols()},
                    {"data", std::vector<double>(t.data().begin(), t.data().end())}};
  }
  return {{"version", 1}, {"params", std::move(params)}};
}

ParamStore param_store_from_json(const nlohmann::json& doc) {
  if (doc.value("version", 0) != 1) throw std::runtime_error("param store: unsupported version");
  ParamStore store;
  for (const auto& [name, entry] : doc.at("params").items()) {
    const auto rows = entry.at("rows").get<std::size_t>();
    const auto cols = entry.at("cols").get<std::size_t>();
    auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) {
      throw std::runtime_error("param store: '" + name + "' has " + std::to_string(data.size()) +
                               " values for shape " + std::to_string(rows) + "x" +
                               std::to_string(cols));
    }
    store.add(name, Tensor(rows, cols, std::move(data)));
  }
  return store;
}

}  // namespace roadbeh
