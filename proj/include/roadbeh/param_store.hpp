#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "roadbeh/tensor.hpp"

namespace roadbeh {

/// Named parameter tensors, iterated in lexicographic name order.
/// Names are unique and a tensor's shape is fixed once added.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  const Tensor& get(const std::string& name) const;
  /// Replaces values in place; the shape must match the registered one.
  void set(const std::string& name, const Tensor& value);
  std::span<double> values(const std::string& name);

  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// Same names with zero-filled tensors.
  ParamStore zeros_like() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.params_ == b.params_; }

 private:
  std::map<std::string, Tensor> params_;
};

/// {"version":1,"params":{name:{"rows","cols","data"}}}
nlohmann::json to_json(const ParamStore& store);
ParamStore param_store_from_json(const nlohmann::json& doc);

}  // namespace roadbeh
