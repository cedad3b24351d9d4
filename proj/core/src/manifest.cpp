#include "wmatch/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/image_io.hpp"

namespace wmatch {

const char* to_string(Domain d) {
  switch (d) {
    case Domain::drawing: return "drawing";
    case Domain::synthetic: return "synthetic";
    case Domain::photograph: return "photograph";
  }
  return "?";
}

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

const char* to_string(Role r) { return r == Role::reference ? "reference" : "query"; }

Domain parse_domain(std::string_view s) {
  if (s == "drawing") return Domain::drawing;
  if (s == "synthetic") return Domain::synthetic;
  if (s == "photograph") return Domain::photograph;
  fail(ErrorCode::format, "unknown domain '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  fail(ErrorCode::format, "unknown split '" + std::string(s) + "'");
}

Role parse_role(std::string_view s) {
  if (s == "reference") return Role::reference;
  if (s == "query") return Role::query;
  fail(ErrorCode::format, "unknown role '" + std::string(s) + "'");
}

bool operator==(const ManifestRecord& a, const ManifestRecord& b) {
  auto rect_eq = [](const std::optional<Rect>& x, const std::optional<Rect>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->x == y->x && x->y == y->y && x->width == y->width && x->height == y->height);
  };
  return a.image_path == b.image_path && a.class_id == b.class_id && a.domain == b.domain && a.split == b.split &&
         a.role == b.role && rect_eq(a.guide_rect, b.guide_rect);
}

DatasetManifest DatasetManifest::parse(std::string_view text, std::filesystem::path base_dir) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestRecord r;
      r.image_path = j.at("image_path").get<std::string>();
      const auto& cid = j.at("class_id");
      r.class_id = cid.is_string() ? cid.get<std::string>() : cid.dump();
      r.domain = parse_domain(j.at("domain").get<std::string>());
      r.split = parse_split(j.value("split", "test"));
      r.role = parse_role(j.at("role").get<std::string>());
      if (j.contains("guide_rect") && !j["guide_rect"].is_null()) {
        const auto v = j["guide_rect"].get<std::vector<double>>();
        require(v.size() == 4, ErrorCode::format, where + ": guide_rect needs [x, y, w, h]");
        r.guide_rect = Rect{v[0], v[1], v[2], v[3]};
      }
      m.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::format, where + ": " + e.what());
    } catch (const Error& e) {
      fail(e.code(), where + ": " + e.what());
    }
  }
  m.validate();
  return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

std::string DatasetManifest::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j{{"image_path", r.image_path},
                             {"class_id", r.class_id},
                             {"domain", to_string(r.domain)},
                             {"split", to_string(r.split)},
                             {"role", to_string(r.role)}};
    if (r.guide_rect) j["guide_rect"] = {r.guide_rect->x, r.guide_rect->y, r.guide_rect->width, r.guide_rect->height};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  const std::string text = to_jsonl();
  io::write_file_atomically(path, [&](std::ostream& out) { out << text; });
}

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& r : records) {
    require(!r.image_path.empty() && !r.class_id.empty(), ErrorCode::format, "manifest record with empty path or class");
    require(seen.insert(r.image_path).second, ErrorCode::format, "duplicate manifest path " + r.image_path);
    if (r.guide_rect) {
      require(r.guide_rect->width > 0 && r.guide_rect->height > 0, ErrorCode::format,
              "degenerate guide_rect for " + r.image_path);
    }
  }
}

std::filesystem::path DatasetManifest::resolve(const ManifestRecord& r) const {
  const std::filesystem::path p(r.image_path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::vector<ManifestRecord> DatasetManifest::with_role(Role role) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (r.role == role) out.push_back(r);
  }
  return out;
}

Image load_canonical(const DatasetManifest& manifest, const ManifestRecord& record, const PreprocessConfig& cfg) {
  return preprocess(load_image(manifest.resolve(record)), record.guide_rect, cfg);
}

}  // namespace wmatch
