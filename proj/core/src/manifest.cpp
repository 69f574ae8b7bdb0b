#include "gazeattn/manifest.hpp"

#include <set>

#include <json.hpp>

#include "gazeattn/error.hpp"
#include "gazeattn/io.hpp"

namespace gazeattn {

using nlohmann::ordered_json;

std::filesystem::path Manifest::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

const ManifestEntry* Manifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

void Manifest::validate(bool check_files) const {
  if (version != kManifestVersion) throw ValidationError("unsupported manifest version '" + version + "'");
  if (settings.rows == 0 || settings.cols == 0) throw ValidationError("manifest settings need rows and cols > 0");
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (e.id.empty()) throw ValidationError("manifest entry with an empty id");
    if (!ids.insert(e.id).second) throw ValidationError("duplicate manifest id '" + e.id + "'");
    const bool has_map = e.saliency_map_path || !e.attention_map_paths.empty();
    const bool scorable = (has_map && (e.gt_mask_path || e.fixation_path)) || (e.image_path && e.label);
    if (!scorable) throw ValidationError("entry '" + e.id + "' is not scorable by any metric");
    if (e.label && (*e.label < 0 || (settings.classes && static_cast<std::size_t>(*e.label) >= settings.classes))) {
      throw ValidationError("entry '" + e.id + "' has label " + std::to_string(*e.label) + " outside 0.." +
                            std::to_string(settings.classes ? settings.classes - 1 : 0));
    }
    if (e.image_path && settings.channels == 0) {
      throw ValidationError("entry '" + e.id + "' has an image but settings.channels is 0");
    }
    if (e.split && *e.split != "train" && *e.split != "test") {
      throw ValidationError("entry '" + e.id + "' has split '" + *e.split + "' (expected train or test)");
    }
    if (!check_files) continue;
    auto need = [&](const std::optional<std::string>& p, const char* what) {
      if (p && !std::filesystem::exists(resolve(*p))) {
        throw ValidationError("entry '" + e.id + "': " + what + " '" + resolve(*p).string() + "' does not exist");
      }
    };
    need(e.image_path, "image");
    need(e.saliency_map_path, "saliency map");
    need(e.fixation_path, "fixations");
    need(e.density_path, "density");
    need(e.gt_mask_path, "mask");
    for (const auto& [name, path] : e.attention_map_paths) need(path, ("attention map " + name).c_str());
  }
}

namespace {

template <class T>
void read_opt(const ordered_json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir, const std::string& source,
                        bool check_files) {
  Manifest m;
  m.base_dir = base_dir;
  try {
    const auto j = ordered_json::parse(json_text);
    m.version = j.at("version").get<std::string>();
    const auto& s = j.at("settings");
    m.settings.rows = s.at("rows").get<std::size_t>();
    m.settings.cols = s.at("cols").get<std::size_t>();
    m.settings.channels = s.value("channels", std::size_t{0});
    m.settings.classes = s.value("classes", std::size_t{0});
    m.settings.seed = s.value("seed", std::uint64_t{0});
    m.settings.beta_sq = s.value("beta_sq", 0.3);
    m.settings.ig_epsilon = s.value("ig_epsilon", 1e-9);
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      read_opt(je, "image_path", e.image_path);
      read_opt(je, "saliency_map_path", e.saliency_map_path);
      if (je.contains("attention_map_paths")) {
        e.attention_map_paths = je.at("attention_map_paths").get<std::map<std::string, std::string>>();
      }
      read_opt(je, "fixation_path", e.fixation_path);
      read_opt(je, "density_path", e.density_path);
      read_opt(je, "gt_mask_path", e.gt_mask_path);
      read_opt(je, "label", e.label);
      read_opt(je, "split", e.split);
      if (je.contains("task_scores")) e.task_scores = je.at("task_scores").get<std::map<std::string, double>>();
      if (je.contains("correct")) e.correct = je.at("correct").get<std::map<std::string, bool>>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, std::string("bad manifest structure: ") + e.what());
  }
  m.validate(check_files);
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, bool check_files) {
  return parse_manifest(read_text_file(path), path.parent_path(), path.string(), check_files);
}

std::string serialize_manifest(const Manifest& m) {
  ordered_json j;
  j["version"] = m.version;
  auto& s = j["settings"];
  s["rows"] = m.settings.rows;
  s["cols"] = m.settings.cols;
  s["channels"] = m.settings.channels;
  s["classes"] = m.settings.classes;
  s["seed"] = m.settings.seed;
  s["beta_sq"] = m.settings.beta_sq;
  s["ig_epsilon"] = m.settings.ig_epsilon;
  s["coordinates"] = "(row, col), 0-indexed";
  auto& entries = j["entries"] = ordered_json::array();
  for (const auto& e : m.entries) {
    ordered_json je;
    je["id"] = e.id;
    auto put = [&](const char* key, const auto& opt) {
      if (opt) je[key] = *opt;
    };
    put("image_path", e.image_path);
    put("saliency_map_path", e.saliency_map_path);
    if (!e.attention_map_paths.empty()) je["attention_map_paths"] = e.attention_map_paths;
    put("fixation_path", e.fixation_path);
    put("density_path", e.density_path);
    put("gt_mask_path", e.gt_mask_path);
    put("label", e.label);
    put("split", e.split);
    if (!e.task_scores.empty()) je["task_scores"] = e.task_scores;
    if (!e.correct.empty()) je["correct"] = e.correct;
    entries.push_back(std::move(je));
  }
  return j.dump(2) + '\n';
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  write_text_file(path, serialize_manifest(manifest));
}

}  // namespace gazeattn
