#include "kdi/checkpoint.hpp"

#include <sstream>

#include "kdi/error.hpp"

namespace kdi {

namespace {
constexpr const char* kMagic = "kdi-checkpoint 1";
}

const Tensor& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw ValidationError("checkpoint: no tensor named '" + name + "'");
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  std::string out = kMagic;
  out += '\n';
  const auto& entries = checkpoint.meta.entries();
  out += "meta " + std::to_string(entries.size()) + "\n";
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  out += "tensors " + std::to_string(checkpoint.tensors.size()) + "\n";
  for (const auto& t : checkpoint.tensors) {
    require(!t.name.empty() && t.name.find_first_of(" \n") == std::string::npos,
            "checkpoint: tensor names must be non-empty without whitespace");
    out += "tensor " + t.name + " " + std::to_string(t.value.rank());
    for (auto d : t.value.shape()) out += " " + std::to_string(d);
    out += '\n';
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      if (i) out += ' ';
      out += format_exact(t.value[i]);
    }
    out += '\n';
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ValidationError("checkpoint: unexpected end of file");
    return line;
  };
  require(next_line() == kMagic, "checkpoint: bad header (expected '" + std::string(kMagic) + "')");

  Checkpoint cp;
  std::string word;
  std::size_t count = 0;
  {
    std::istringstream ls(next_line());
    require(static_cast<bool>(ls >> word >> count) && word == "meta", "checkpoint: expected meta count");
  }
  std::string meta_text;
  for (std::size_t i = 0; i < count; ++i) meta_text += next_line() + "\n";
  cp.meta = KeyValue::parse(meta_text);

  {
    std::istringstream ls(next_line());
    require(static_cast<bool>(ls >> word >> count) && word == "tensors", "checkpoint: expected tensor count");
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream ls(next_line());
    NamedTensor nt;
    std::size_t rank = 0;
    require(static_cast<bool>(ls >> word >> nt.name >> rank) && word == "tensor",
            "checkpoint: malformed tensor header");
    Shape shape(rank);
    for (auto& d : shape) require(static_cast<bool>(ls >> d), "checkpoint: malformed shape");
    std::istringstream vs(next_line());
    std::vector<double> values;
    values.reserve(shape_size(shape));
    while (vs >> word) values.push_back(parse_double(word));
    require(values.size() == shape_size(shape),
            "checkpoint: tensor " + nt.name + " has wrong number of values");
    nt.value = Tensor(std::move(shape), std::move(values));
    cp.tensors.push_back(std::move(nt));
  }
  return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_text_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace kdi
