#pragma once

#include <map>
#include <string>

#include "objects.hpp"

namespace quarry::pdf::detail {

/// All indirect objects of a file, indexed by object number.
class ObjectStore {
 public:
  void put(int num, Object obj) { objects_[num] = std::move(obj); }
  bool has(int num) const { return objects_.count(num) != 0; }
  const std::map<int, Object>& all() const { return objects_; }

  const Object& resolve(const Object& obj) const;
  const Dict* dict(const Object& obj) const { return resolve(obj).dict(); }
  const Array* array(const Object& obj) const { return resolve(obj).array(); }

  const Object* get(const Dict& d, const std::string& key) const;
  const Dict* get_dict(const Dict& d, const std::string& key) const;
  const Array* get_array(const Dict& d, const std::string& key) const;
  double get_number(const Dict& d, const std::string& key, double fallback) const;
  std::string get_name(const Dict& d, const std::string& key) const;

 private:
  std::map<int, Object> objects_;
};

}  // namespace quarry::pdf::detail
