#include "wmatch/index.hpp"

#include <tbb/parallel_for.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/fmap_io.hpp"

namespace wmatch {
namespace {

nlohmann::json config_to_json(const IndexConfig& c) {
  nlohmann::json j{{"grid_sizes", c.scales.grid_sizes},
                   {"query_grid", c.scales.query_grid},
                   {"sigma_cells", c.sigma_cells},
                   {"guide_side", c.preprocess.guide_side},
                   {"crop_side", c.preprocess.crop_side},
                   {"baseline_resize", c.baseline_resize},
                   {"baseline_crop", c.baseline_crop}};
  j["domain"] = c.domain ? nlohmann::json(to_string(*c.domain)) : nlohmann::json(nullptr);
  return j;
}

IndexConfig config_from_json(const nlohmann::json& j) {
  IndexConfig c;
  c.scales.grid_sizes = j.at("grid_sizes").get<std::vector<std::uint32_t>>();
  c.scales.query_grid = j.at("query_grid").get<std::uint32_t>();
  c.sigma_cells = j.at("sigma_cells").get<double>();
  c.preprocess.guide_side = j.at("guide_side").get<std::uint32_t>();
  c.preprocess.crop_side = j.at("crop_side").get<std::uint32_t>();
  c.baseline_resize = j.at("baseline_resize").get<std::uint32_t>();
  c.baseline_crop = j.at("baseline_crop").get<std::uint32_t>();
  if (!j.at("domain").is_null()) c.domain = parse_domain(j.at("domain").get<std::string>());
  return c;
}

}  // namespace

void IndexConfig::validate() const {
  scales.validate();
  require(sigma_cells > 0.0, ErrorCode::invalid_argument, "sigma_cells must be positive");
  require(baseline_crop > 0 && baseline_crop <= baseline_resize, ErrorCode::invalid_argument,
          "baseline crop must fit inside the baseline resize");
}

void ReferenceIndex::finalize() {
  classes_.clear();
  class_entries_.clear();
  class_lookup_.clear();
  for (std::uint32_t e = 0; e < entries.size(); ++e) {
    const auto [it, inserted] =
        class_lookup_.try_emplace(entries[e].class_id, static_cast<std::uint32_t>(classes_.size()));
    if (inserted) {
      classes_.push_back(entries[e].class_id);
      class_entries_.emplace_back();
    }
    class_entries_[it->second].push_back(e);
  }
}

std::optional<std::uint32_t> ReferenceIndex::class_index(const std::string& class_id) const {
  const auto it = class_lookup_.find(class_id);
  if (it == class_lookup_.end()) return std::nullopt;
  return it->second;
}

ReferenceIndex ReferenceIndex::build(const DatasetManifest& manifest, const Extractor& ex,
                                     const AdapterParams* adapter, const IndexConfig& cfg, BuildReport* report) {
  cfg.validate();
  if (adapter) {
    require(adapter->dim == ex.dim(), ErrorCode::shape_mismatch, "adapter dim differs from extractor dim");
  }
  ReferenceIndex index;
  index.fingerprint = ex.fingerprint();
  index.adapter_id = adapter ? adapter->id() : "none";
  index.config = cfg;

  std::vector<const ManifestRecord*> refs;
  for (const auto& r : manifest.records) {
    if (r.role != Role::reference) continue;
    if (cfg.domain && r.domain != *cfg.domain) continue;
    refs.push_back(&r);
  }

  std::vector<std::optional<ReferenceEntry>> built(refs.size());
  std::vector<std::string> errors(refs.size());
  tbb::parallel_for(std::size_t{0}, refs.size(), [&](std::size_t i) {
    const ManifestRecord& r = *refs[i];
    Image canonical;
    try {
      canonical = load_canonical(manifest, r, cfg.preprocess);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::io && e.code() != ErrorCode::format) throw;
      errors[i] = r.image_path + ": " + e.what();
      return;
    }
    ReferenceEntry entry;
    entry.class_id = r.class_id;
    entry.image_path = r.image_path;
    entry.domain = r.domain;
    for (std::uint32_t o = 0; o < OrientationId::kCount; ++o) {
      FeaturePyramid p = extract_pyramid(canonical, ex, cfg.scales, OrientationId(o));
      FeatureMap b = extract_baseline_map(canonical, ex, OrientationId(o), cfg.baseline_resize, cfg.baseline_crop);
      if (adapter) {
        for (auto& m : p.maps) m = apply_adapter(m, *adapter);
        b = apply_adapter(b, *adapter);
      }
      p.image_ref = r.image_path;
      entry.pyramids.push_back(std::move(p));
      entry.baseline.push_back(std::move(b));
    }
    built[i] = std::move(entry);
  });

  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (built[i]) {
      index.entries.push_back(std::move(*built[i]));
    } else if (report) {
      report->skipped.push_back(errors[i]);
    }
  }
  if (report) report->indexed = index.entries.size();
  index.finalize();
  return index;
}

void ReferenceIndex::write(std::ostream& out) const {
  nlohmann::json header{{"fingerprint", fingerprint}, {"adapter_id", adapter_id}, {"config", config_to_json(config)}};
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& e : entries) {
    meta.push_back({{"class_id", e.class_id}, {"image_path", e.image_path}, {"domain", to_string(e.domain)}});
  }
  header["entries"] = std::move(meta);
  io::write_magic(out, "RIDX");
  io::write_u32(out, kRidxVersion);
  io::write_string(out, header.dump());
  for (const auto& e : entries) {
    require(e.pyramids.size() == OrientationId::kCount && e.baseline.size() == OrientationId::kCount,
            ErrorCode::shape_mismatch, "index entry without 8 orientations");
    for (const auto& p : e.pyramids) {
      io::write_u32(out, static_cast<std::uint32_t>(p.maps.size()));
      for (const auto& m : p.maps) write_fmap(out, m);
    }
    for (const auto& b : e.baseline) write_fmap(out, b);
  }
}

ReferenceIndex ReferenceIndex::read(std::istream& in) {
  io::expect_magic(in, "RIDX", "reference index");
  const auto version = io::read_u32(in);
  require(version == kRidxVersion, ErrorCode::format, "unsupported RIDX version " + std::to_string(version));
  ReferenceIndex index;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(io::read_string(in, 1u << 30));
    index.fingerprint = header.at("fingerprint").get<std::string>();
    index.adapter_id = header.at("adapter_id").get<std::string>();
    index.config = config_from_json(header.at("config"));
    for (const auto& m : header.at("entries")) {
      ReferenceEntry e;
      e.class_id = m.at("class_id").get<std::string>();
      e.image_path = m.at("image_path").get<std::string>();
      e.domain = parse_domain(m.at("domain").get<std::string>());
      index.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("index header: ") + e.what());
  }
  index.config.validate();
  const std::size_t n_scales = index.config.scales.grid_sizes.size();
  for (auto& e : index.entries) {
    for (std::uint32_t o = 0; o < OrientationId::kCount; ++o) {
      FeaturePyramid p;
      p.orientation = OrientationId(o);
      p.image_ref = e.image_path;
      const auto n = io::read_u32(in);
      require(n == n_scales, ErrorCode::format, "index pyramid does not match the scale set");
      for (std::uint32_t s = 0; s < n; ++s) {
        FeatureMap m = read_fmap(in);
        const auto g = index.config.scales.grid_sizes[s];
        require(m.height() == g && m.width() == g && m.scale_id() == s && m.orientation() == p.orientation,
                ErrorCode::format, "index pyramid map has unexpected shape or labels");
        p.maps.push_back(std::move(m));
      }
      e.pyramids.push_back(std::move(p));
    }
    for (std::uint32_t o = 0; o < OrientationId::kCount; ++o) {
      FeatureMap b = read_fmap(in);
      require(b.orientation().id() == o, ErrorCode::format, "index baseline map out of orientation order");
      e.baseline.push_back(std::move(b));
    }
  }
  index.finalize();
  return index;
}

void ReferenceIndex::save(const std::filesystem::path& path) const {
  io::write_file_atomically(path, [&](std::ostream& out) { write(out); });
}

ReferenceIndex ReferenceIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open index " + path.string());
  return read(in);
}

}  // namespace wmatch
