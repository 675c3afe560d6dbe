#include "dualview/data/dataset_io.h"

#include "dualview/errors.h"

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <istream>
#include <ostream>
#include <random>

namespace dualview::data {
namespace {

using nlohmann::json;

EmbeddingVector parse_embedding(const json& j, const char* field) {
  if (!j.is_array()) throw InputError(std::string("field '") + field + "' must be an array of numbers");
  EmbeddingVector out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw InputError(std::string("field '") + field + "' holds a non-numeric entry");
    out.push_back(x.get<float>());
  }
  return out;
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(std::string("missing field '") + key + "'");
  return *it;
}

CandidateSet parse_record(const json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  CandidateSet set;
  const auto& qid = require(j, "query_id");
  if (!qid.is_string()) throw InputError("field 'query_id' must be a string");
  set.query_id = qid.get<std::string>();
  set.query_embedding = parse_embedding(require(j, "query_embedding"), "query_embedding");
  const auto& cands = require(j, "candidates");
  if (!cands.is_array()) throw InputError("field 'candidates' must be an array");
  for (const auto& c : cands) {
    if (!c.is_object()) throw InputError("candidate is not a JSON object");
    Candidate cand;
    const auto& did = require(c, "doc_id");
    if (!did.is_string()) throw InputError("field 'doc_id' must be a string");
    cand.doc_id = did.get<std::string>();
    cand.embedding = parse_embedding(require(c, "embedding"), "embedding");
    const auto& label = require(c, "label");
    if (!label.is_number_integer()) throw InputError("field 'label' must be 0 or 1");
    cand.label = label.get<int>();
    set.candidates.push_back(std::move(cand));
  }
  return set;
}

void write_float(std::ostream& out, float v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ptr - buf.data());
}

void write_embedding(std::ostream& out, const EmbeddingVector& e) {
  out << '[';
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i) out << ',';
    write_float(out, e[i]);
  }
  out << ']';
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xffu), static_cast<char>((v >> 8) & 0xffu),
                              static_cast<char>((v >> 16) & 0xffu), static_cast<char>((v >> 24) & 0xffu)};
  out.write(b.data(), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw LoadError("binary dataset truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  std::string s(get_u32(in), '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) throw LoadError("binary dataset truncated");
  return s;
}

void put_floats(std::ostream& out, const EmbeddingVector& v) {
  for (float x : v) put_u32(out, std::bit_cast<std::uint32_t>(x));
}

EmbeddingVector get_floats(std::istream& in, std::size_t n) {
  EmbeddingVector v(n);
  for (auto& x : v) x = std::bit_cast<float>(get_u32(in));
  return v;
}

}  // namespace

JsonlReader::JsonlReader(std::istream& in, ValidationLimits limits, std::string source)
    : in_(in), limits_(limits), source_(std::move(source)) {}

std::optional<CandidateSet> JsonlReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      CandidateSet set = parse_record(json::parse(text));
      validate(set, limits_);
      if (limits_.embed_dim == 0) limits_.embed_dim = set.embed_dim();
      return set;
    } catch (const json::exception& e) {
      throw LoadError(source_ + ":" + std::to_string(line_) + ": malformed JSON: " + e.what());
    } catch (const InputError& e) {
      throw LoadError(source_ + ":" + std::to_string(line_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

Dataset read_jsonl(std::istream& in, const ValidationLimits& limits, const std::string& source) {
  JsonlReader reader(in, limits, source);
  Dataset out;
  while (auto set = reader.next()) out.push_back(std::move(*set));
  return out;
}

Dataset load_dataset(const std::string& path, const ValidationLimits& limits) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dataset '" + path + "'");
  return read_jsonl(in, limits, path);
}

void write_jsonl_record(std::ostream& out, const CandidateSet& set) {
  out << "{\"query_id\":" << json(set.query_id).dump() << ",\"query_embedding\":";
  write_embedding(out, set.query_embedding);
  out << ",\"candidates\":[";
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    const auto& c = set.candidates[i];
    if (i) out << ',';
    out << "{\"doc_id\":" << json(c.doc_id).dump() << ",\"embedding\":";
    write_embedding(out, c.embedding);
    out << ",\"label\":" << c.label << '}';
  }
  out << "]}\n";
}

void write_jsonl(std::ostream& out, const Dataset& data) {
  for (const auto& set : data) write_jsonl_record(out, set);
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_jsonl(out, data);
  if (!out) throw Error("failed writing '" + path + "'");
}

void write_binary(std::ostream& out, const Dataset& data) {
  out.write(kBinaryMagic, 5);
  const std::size_t dim = data.empty() ? 0 : data.front().embed_dim();
  put_u32(out, static_cast<std::uint32_t>(dim));
  put_u64(out, data.size());
  for (const auto& set : data) {
    if (set.embed_dim() != dim) throw InputError("binary cache requires a uniform embedding width");
    put_string(out, set.query_id);
    put_floats(out, set.query_embedding);
    put_u32(out, static_cast<std::uint32_t>(set.candidates.size()));
    for (const auto& c : set.candidates) {
      if (c.embedding.size() != dim) throw InputError("binary cache requires a uniform embedding width");
      put_string(out, c.doc_id);
      out.put(static_cast<char>(c.label));
      put_floats(out, c.embedding);
    }
  }
}

Dataset read_binary(std::istream& in, const ValidationLimits& limits) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), 5) || std::string(magic.data(), 5) != kBinaryMagic) {
    throw LoadError("not a binary dataset: missing DVRK1 magic");
  }
  const std::size_t dim = get_u32(in);
  const std::uint64_t count = get_u64(in);
  Dataset out;
  for (std::uint64_t r = 0; r < count; ++r) {
    CandidateSet set;
    set.query_id = get_string(in);
    set.query_embedding = get_floats(in, dim);
    const std::uint32_t n = get_u32(in);
    for (std::uint32_t i = 0; i < n; ++i) {
      Candidate c;
      c.doc_id = get_string(in);
      const int label = in.get();
      if (label == std::char_traits<char>::eof()) throw LoadError("binary dataset truncated");
      c.label = label;
      c.embedding = get_floats(in, dim);
      set.candidates.push_back(std::move(c));
    }
    try {
      validate(set, limits);
    } catch (const InputError& e) {
      throw LoadError("binary record " + std::to_string(r) + ": " + e.what());
    }
    out.push_back(std::move(set));
  }
  return out;
}

void save_binary(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_binary(out, data);
}

Dataset load_binary(const std::string& path, const ValidationLimits& limits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open dataset '" + path + "'");
  return read_binary(in, limits);
}

Dataset load_any(const std::string& path, const ValidationLimits& limits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open dataset '" + path + "'");
  std::array<char, 5> head{};
  in.read(head.data(), 5);
  const bool binary = in.gcount() == 5 && std::string(head.data(), 5) == kBinaryMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in, limits) : read_jsonl(in, limits, path);
}

Dataset stratified_mix(const std::vector<Dataset>& sources, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> cursor(sources.size(), 0);
  std::size_t remaining = 0;
  for (const auto& s : sources) remaining += s.size();
  Dataset out;
  out.reserve(remaining);
  while (remaining > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
    std::size_t r = pick(rng);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const std::size_t left = sources[s].size() - cursor[s];
      if (r < left) {
        out.push_back(sources[s][cursor[s]++]);
        break;
      }
      r -= left;
    }
    --remaining;
  }
  return out;
}

}  // namespace dualview::data
