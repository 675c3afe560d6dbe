#include "dualview/nn/checkpoint.h"

#include "dualview/errors.h"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

namespace dualview::nn {
namespace {

constexpr const char* kMagic = "DVCKPT";

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xffu), static_cast<char>((v >> 8) & 0xffu),
                                  static_cast<char>((v >> 16) & 0xffu), static_cast<char>((v >> 24) & 0xffu)};
  out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw LoadError("checkpoint truncated while reading " + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

std::optional<std::string> Checkpoint::get(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void write_checkpoint(std::ostream& out, const KeyValues& header, const ParameterRegistry<float>& params) {
  out << kMagic << '\n' << "version=" << kCheckpointVersion << '\n';
  for (const auto& [k, v] : header) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos || v.find('\n') != std::string::npos) {
      throw ConfigError("checkpoint header entry '" + k + "' contains a reserved character");
    }
    out << k << '=' << v << '\n';
  }
  out << "params=" << params.size() << "\n\n";
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p->name().size()));
    out.write(p->name().data(), static_cast<std::streamsize>(p->name().size()));
    put_u32(out, static_cast<std::uint32_t>(p->value().rows()));
    put_u32(out, static_cast<std::uint32_t>(p->value().cols()));
    const float* data = p->value().data();
    for (Eigen::Index i = 0; i < p->value().size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(data[i]));
  }
  if (!out) throw Error("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, const KeyValues& header, const ParameterRegistry<float>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_checkpoint(out, header, params);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw LoadError("not a checkpoint: missing DVCKPT magic");

  Checkpoint ckpt;
  bool saw_version = false;
  std::optional<std::size_t> count;
  while (true) {
    if (!std::getline(in, line)) throw LoadError("checkpoint header not terminated");
    if (line.empty()) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError("malformed checkpoint header line '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      if (key == "version") {
        ckpt.version = static_cast<std::uint32_t>(std::stoul(value));
        saw_version = true;
        continue;
      }
      if (key == "params") {
        count = std::stoul(value);
        continue;
      }
    } catch (const std::logic_error&) {
      throw LoadError("malformed checkpoint header value '" + line + "'");
    }
    ckpt.header.emplace_back(std::move(key), std::move(value));
  }
  if (!saw_version || ckpt.version != kCheckpointVersion) {
    throw LoadError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  if (!count) throw LoadError("checkpoint header lacks params count");

  for (std::size_t i = 0; i < *count; ++i) {
    NamedTensor t;
    const std::uint32_t name_len = get_u32(in, "name length");
    t.name.resize(name_len);
    if (!in.read(t.name.data(), name_len)) throw LoadError("checkpoint truncated in parameter name");
    const std::uint32_t rows = get_u32(in, t.name + " rows");
    const std::uint32_t cols = get_u32(in, t.name + " cols");
    t.value.resize(rows, cols);
    for (Eigen::Index j = 0; j < t.value.size(); ++j) {
      t.value.data()[j] = std::bit_cast<float>(get_u32(in, t.name + " data"));
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw LoadError("trailing bytes after checkpoint parameters");
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

void assign_checkpoint(const Checkpoint& ckpt, ParameterRegistry<float>& params) {
  if (ckpt.tensors.size() != params.size()) {
    throw LoadError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " parameters, model expects " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = ckpt.tensors[i];
    auto& p = params[i];
    if (t.name != p.name() || t.value.rows() != p.value().rows() || t.value.cols() != p.value().cols()) {
      throw LoadError("checkpoint parameter '" + t.name + "' " + shape_string(t.value) + " does not match '" +
                      p.name() + "' " + shape_string(p.value()));
    }
    p.value() = t.value;
  }
}

}  // namespace dualview::nn
