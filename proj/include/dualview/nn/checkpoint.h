#pragma once

#include "dualview/nn/matrix.h"
#include "dualview/nn/parameter.h"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualview::nn {

// Checkpoint file layout:
//
//   DVCKPT\n
//   version=1\n
//   <key>=<value>\n        ... model configuration, in writer order
//   params=<count>\n
//   \n                     blank line ends the text header
//   then per parameter, in registry order:
//     u32 name_length, name bytes, u32 rows, u32 cols, rows*cols f32
//   all integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct NamedTensor {
  std::string name;
  Matrix<float> value;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  KeyValues header;
  std::vector<NamedTensor> tensors;

  std::optional<std::string> get(const std::string& key) const;
};

void write_checkpoint(std::ostream& out, const KeyValues& header, const ParameterRegistry<float>& params);
void save_checkpoint(const std::string& path, const KeyValues& header, const ParameterRegistry<float>& params);

// Throws LoadError on malformed or truncated input.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

// Copies tensors into `params`; names, order and shapes must match exactly.
void assign_checkpoint(const Checkpoint& ckpt, ParameterRegistry<float>& params);

}  // namespace dualview::nn
