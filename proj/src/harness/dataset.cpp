#include <algorithm>
#include <cstdio>

#include "lup/btf.hpp"
#include "lup/harness.hpp"

namespace lup {

std::vector<ImageTensor> make_synthetic_dataset(const SyntheticDatasetSpec& spec) {
  if (spec.count == 0) throw ConfigError("dataset count must be at least 1");
  const double mid = 0.5 * (spec.range.lo + spec.range.hi);
  const double span = spec.range.hi - spec.range.lo;
  const double rms = 0.15 * span;
  const auto lo = static_cast<float>(spec.range.lo + 0.05 * span);
  const auto hi = static_cast<float>(spec.range.hi - 0.05 * span);

  std::vector<ImageTensor> images;
  images.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    RngStream rng(spec.seed, 0xda7a0000ULL + i);
    const auto field = low_frequency_field(spec.dims, rng);
    std::vector<float> px(field.size());
    for (std::size_t k = 0; k < px.size(); ++k) {
      px[k] = std::clamp(static_cast<float>(mid + rms * field[k]), lo, hi);
    }
    images.emplace_back(spec.dims, std::move(px), spec.range);
  }
  return images;
}

std::vector<ImageTensor> load_dataset_dir(const std::filesystem::path& dir, ValueRange range,
                                          std::vector<std::string>* ids) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("dataset directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".btf") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("dataset directory " + dir.string() + " has no .btf files");
  std::vector<ImageTensor> images;
  for (const auto& f : files) {
    images.push_back(btf::read_file(f, range));
    if (ids) ids->push_back(f.stem().string());
  }
  return images;
}

void write_dataset_dir(const std::filesystem::path& dir, std::span<const ImageTensor> images) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof(name), "image_%04zu.btf", i);
    btf::write_file(dir / name, images[i]);
  }
}

}  // namespace lup
