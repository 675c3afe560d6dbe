#pragma once

#include "dualview/data/candidate_set.h"

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dualview::data {

// JSONL record, one per line:
//   {"query_id": str, "query_embedding": [f32...],
//    "candidates": [{"doc_id": str, "embedding": [f32...], "label": 0|1}...]}
// Blank lines are ignored. Errors carry the 1-based line number.
class JsonlReader {
 public:
  JsonlReader(std::istream& in, ValidationLimits limits, std::string source = "<stream>");

  std::optional<CandidateSet> next();
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  ValidationLimits limits_;
  std::string source_;
  std::size_t line_ = 0;
};

Dataset read_jsonl(std::istream& in, const ValidationLimits& limits, const std::string& source = "<stream>");
Dataset load_dataset(const std::string& path, const ValidationLimits& limits = {});

// Floats are written in shortest round-trip form, so write -> read -> write is
// byte-stable.
void write_jsonl_record(std::ostream& out, const CandidateSet& set);
void write_jsonl(std::ostream& out, const Dataset& data);
void save_dataset(const std::string& path, const Dataset& data);

// Packed binary cache: "DVRK1", u32 embed_dim, u64 record count, then per
// record: u32 len + query_id, f32[embed_dim] query, u32 n, and per candidate
// u32 len + doc_id, u8 label, f32[embed_dim]. Little-endian throughout.
inline constexpr const char* kBinaryMagic = "DVRK1";
void write_binary(std::ostream& out, const Dataset& data);
Dataset read_binary(std::istream& in, const ValidationLimits& limits);
void save_binary(const std::string& path, const Dataset& data);
Dataset load_binary(const std::string& path, const ValidationLimits& limits = {});

// Dispatches on the leading magic bytes: binary cache or JSONL.
Dataset load_any(const std::string& path, const ValidationLimits& limits = {});

// Seeded proportional interleave of several sources: every output position
// draws from source s with probability proportional to its remaining records,
// preserving each source's internal order.
Dataset stratified_mix(const std::vector<Dataset>& sources, std::uint64_t seed = 42);

}  // namespace dualview::data
