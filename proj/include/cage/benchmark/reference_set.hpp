#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cage::benchmark {

struct ReferenceEntry {
  std::string id;  // file stem
  std::filesystem::path path;
  std::string checksum;  // crc32, hex
};

struct ReferenceSet {
  std::filesystem::path root;
  std::vector<ReferenceEntry> entries;  // sorted by file name

  std::size_t size() const { return entries.size(); }
};

inline constexpr const char* kReferenceIndexName = "index.json";

// Indexes every PNG in `dir` (non-recursive). Each file must decode. Writes
// `index.json` with checksums when absent; when present, files whose checksum
// disagrees with the index are an error. Throws IoError for an empty or
// missing directory and ParseError naming the first undecodable file.
ReferenceSet load_reference_set(const std::filesystem::path& dir);

}  // namespace cage::benchmark
