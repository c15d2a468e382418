#ifndef CONLAB_CATALOG_HPP
#define CONLAB_CATALOG_HPP

#include <map>
#include <string>
#include <vector>

namespace conlab {

/// A named analytic example: a metric file plus associated field/solution
/// files, each carrying its derivation as comments so failed checks can be
/// debugged against closed forms. `expected` maps field file names to the
/// classification the checks must reproduce.
struct CatalogEntry {
  std::string name;
  std::string metric_text;
  std::map<std::string, std::string> fields; // file name -> content
  std::string sidecar_json;                  // non-empty for cone entries
  std::string note;
  std::map<std::string, std::string> expected;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(const std::string& name); // throws std::out_of_range

} // namespace conlab

#endif
