#include "cage/benchmark/reference_set.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/text.hpp"

namespace cage::benchmark {

namespace fs = std::filesystem;
using nlohmann::json;

ReferenceSet load_reference_set(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("reference directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    if (text::fold(ext) == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("reference set " + dir.string() + " contains zero images");

  std::map<std::string, std::string> indexed;
  const fs::path index_path = dir / kReferenceIndexName;
  const bool have_index = fs::exists(index_path);
  if (have_index) {
    try {
      const json idx = json::parse(codec::read_text_file(index_path.string()));
      for (const auto& e : idx.at("images")) indexed[e.at("file").get<std::string>()] = e.at("crc32").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(index_path.string() + ": " + e.what());
    }
  }

  ReferenceSet set;
  set.root = dir;
  for (const auto& f : files) {
    std::vector<std::uint8_t> bytes;
    try {
      bytes = codec::read_file(f.string());
    } catch (const IoError&) {
      throw IoError("unreadable reference image: " + f.string());
    }
    try {
      (void)imaging::decode_png(bytes);
    } catch (const ParseError& e) {
      throw ParseError("corrupt reference image " + f.string() + ": " + e.what());
    }
    ReferenceEntry entry{f.stem().string(), f, codec::crc32_hex(bytes)};
    const std::string name = f.filename().string();
    if (have_index && indexed.contains(name) && indexed.at(name) != entry.checksum) {
      throw ValidationError("checksum mismatch for " + f.string() + ": index " + indexed.at(name) + ", file " +
                            entry.checksum);
    }
    set.entries.push_back(std::move(entry));
  }

  bool rewrite = !have_index || indexed.size() != set.entries.size();
  for (const auto& e : set.entries) rewrite = rewrite || !indexed.contains(e.path.filename().string());
  if (rewrite) {
    json images = json::array();
    for (const auto& e : set.entries) images.push_back({{"file", e.path.filename().string()}, {"crc32", e.checksum}});
    codec::write_file(index_path.string(), json{{"images", images}}.dump(2) + "\n");
  }
  return set;
}

}  // namespace cage::benchmark
