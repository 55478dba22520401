#include <mutex>
#include <system_error>
#include <unordered_set>

#include "attnflow/enumeration.hpp"
#include "attnflow/search.hpp"

namespace attnflow {

TemplateLibrary TemplateLibrary::build() {
  TemplateLibrary lib;
  for (int rc = 0; rc < 2; ++rc) {
    std::vector<DominanceKey> keys;
    for (const auto& [s, t] : structural_templates_of_class(rc != 0)) {
      lib.classes[rc].push_back(encode_template(t, make_template_id(s, t.stationary)));
      keys.push_back(dominance_key(lib.classes[rc].back()));
    }
    lib.retained[rc] = prune_rows(keys, &lib.stats[rc]);
  }
  return lib;
}

std::vector<GroupCache> TemplateLibrary::to_groups() const {
  std::vector<GroupCache> out;
  for (int rc = 0; rc < 2; ++rc)
    for (int st = 0; st < kNumStationaryPairs; ++st) {
      const StationaryPair pair = StationaryPair::from_index(st);
      GroupCache g;
      g.group_id = group_id(rc != 0, pair);
      g.retained = retained[rc];
      for (const EncodedTemplate& row : classes[rc]) {
        MappingTemplate t = row.tmpl;
        t.stationary = pair;
        g.rows.push_back(encode_template(t, make_template_id(structural_index_of(row.template_id), pair)));
      }
      out.push_back(std::move(g));
    }
  return out;
}

TemplateLibrary TemplateLibrary::from_groups(const std::vector<GroupCache>& groups) {
  if (groups.size() != size_t(kNumGroups)) throw std::runtime_error("template cache needs 18 groups");
  TemplateLibrary lib;
  for (const GroupCache& g : groups) {
    if (g.group_id >= uint32_t(kNumGroups)) throw std::runtime_error("template cache has a bad group id");
    const int rc = int(g.group_id / kNumStationaryPairs);
    const int st = int(g.group_id % kNumStationaryPairs);
    for (const EncodedTemplate& row : g.rows)
      if (row.tmpl.recompute != (rc != 0) || row.tmpl.stationary.index() != st ||
          row.template_id % kNumStationaryPairs != uint32_t(st))
        throw std::runtime_error("template cache row does not belong to its group");
    if (st != 0) continue;
    lib.classes[rc] = g.rows;
    lib.retained[rc] = g.retained;
  }
  for (int rc = 0; rc < 2; ++rc) {
    for (const GroupCache& g : groups)
      if (int(g.group_id / kNumStationaryPairs) == rc && g.rows.size() != lib.classes[rc].size())
        throw std::runtime_error("template cache groups disagree on row count");
    PruneStats& s = lib.stats[rc];
    s.rows = lib.classes[rc].size();
    s.retained_rows = 0;
    for (bool r : lib.retained[rc]) s.retained_rows += r;
    std::unordered_set<std::string> all, kept;
    for (size_t r = 0; r < lib.classes[rc].size(); ++r) {
      const auto& row = lib.classes[rc][r];
      std::string key = row[Query::BS_P].to_string() + '|' + row[Query::BS_C].to_string() + '|' +
                        row[Query::DA].to_string();
      if (lib.retained[rc][r]) kept.insert(key);
      all.insert(std::move(key));
    }
    s.unique_keys = all.size();
    s.retained_unique = kept.size();
  }
  lib.from_cache = true;
  return lib;
}

TemplateLibrary TemplateLibrary::load_or_build(const std::filesystem::path& dir) {
  std::vector<GroupCache> groups;
  try {
    for (uint32_t g = 0; g < uint32_t(kNumGroups); ++g) groups.push_back(read_group_cache(group_cache_path(dir, g)));
    return from_groups(groups);
  } catch (const std::runtime_error&) {
    // Missing or stale cache: rebuild below.
  }
  TemplateLibrary lib = build();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  for (const GroupCache& g : lib.to_groups()) write_group_cache(group_cache_path(dir, g.group_id), g);
  return lib;
}

std::vector<const EncodedTemplate*> TemplateLibrary::search_rows(bool recompute, bool prune) const {
  const int rc = recompute ? 1 : 0;
  std::vector<const EncodedTemplate*> out;
  std::vector<DominanceKey> seen;
  for (size_t r = 0; r < classes[rc].size(); ++r) {
    const EncodedTemplate& row = classes[rc][r];
    if (prune) {
      if (!retained[rc][r]) continue;
      const DominanceKey key = dominance_key(row);
      bool dup = false;
      for (const DominanceKey& k : seen)
        if (k == key) {
          dup = true;
          break;
        }
      if (dup) continue;
      seen.push_back(key);
    }
    out.push_back(&row);
  }
  return out;
}

const TemplateLibrary& default_library() {
  static std::once_flag once;
  static TemplateLibrary lib;
  std::call_once(once, [] { lib = TemplateLibrary::build(); });
  return lib;
}

}  // namespace attnflow
