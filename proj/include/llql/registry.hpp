#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "llql/dict.hpp"

namespace llql {

// Name -> factory registry for dictionary implementations.  The four
// built-ins (robin_hood, chained_hash, sorted_array, btree) are registered on
// first use; additional implementations can be registered at startup and are
// then visible to the interpreter, profiler and synthesizer.
class DictRegistry {
 public:
  using Factory = std::function<std::unique_ptr<DictBase>()>;

  static DictRegistry& instance();

  // Throws UsageError when the name is already taken.
  void register_impl(const std::string& name, Factory f);
  bool contains(const std::string& name) const;
  std::unique_ptr<DictBase> make(const std::string& name) const;
  // Registration order; the first entry is the default implementation.
  std::vector<std::string> names() const;
  bool is_ordered(const std::string& name) const;

 private:
  DictRegistry();
  std::vector<std::pair<std::string, Factory>> entries_;
};

const std::string& default_hash_impl();    // target of the @ht alias
const std::string& default_sorted_impl();  // target of the @st alias

}  // namespace llql
