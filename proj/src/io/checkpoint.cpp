#include "ofm/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ofm {

namespace {

constexpr char kMagic[4] = {'O', 'F', 'M', '1'};

void require_little_endian() {
  static_assert(sizeof(double) == 8, "float64 container needs 8-byte doubles");
  if constexpr (std::endian::native != std::endian::little)
    throw std::runtime_error("checkpoint: container is little-endian only");
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint: truncated file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

const Eigen::MatrixXd& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.data;
  throw std::out_of_range("checkpoint: no tensor named '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  require_little_endian();

  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ck.tensors) {
    manifest.push_back({{"name", t.name},
                        {"shape", {t.data.rows(), t.data.cols()}},
                        {"dtype", "f64"},
                        {"offset", offset}});
    offset += std::uint64_t(t.data.size()) * sizeof(double);
  }
  nlohmann::json header = {{"version", ck.version},
                           {"config", ck.config_echo},
                           {"loss_tail", ck.loss_tail},
                           {"layout", "col_major"},
                           {"tensors", manifest}};
  std::string head = header.dump();

  std::string blob;
  blob.reserve(16 + head.size() + offset);
  blob.append(kMagic, 4);
  put<std::uint32_t>(blob, ck.version);
  put<std::uint64_t>(blob, std::uint64_t(head.size()));
  blob += head;
  for (const auto& t : ck.tensors)
    blob.append(reinterpret_cast<const char*>(t.data.data()),
                size_t(t.data.size()) * sizeof(double));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  out.write(blob.data(), std::streamsize(blob.size()));
  if (!out) throw std::runtime_error("checkpoint: short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  require_little_endian();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  size_t pos = 0;
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  pos = 4;
  Checkpoint ck;
  ck.version = take<std::uint32_t>(blob, pos);
  if (ck.version != 1)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(ck.version));
  std::uint64_t head_len = take<std::uint64_t>(blob, pos);
  if (pos + head_len > blob.size()) throw std::runtime_error("checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(pos, size_t(head_len)));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("checkpoint: corrupt header json: ") + e.what());
  }
  pos += size_t(head_len);
  const size_t payload_size = blob.size() - pos;

  ck.config_echo = header.value("config", std::string());
  ck.loss_tail = header.value("loss_tail", std::vector<double>());

  std::uint64_t expect_offset = 0;
  for (const auto& entry : header.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    auto shape = entry.at("shape");
    if (!shape.is_array() || shape.size() != 2)
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' has a malformed shape");
    long rows = shape[0].get<long>(), cols = shape[1].get<long>();
    if (rows < 0 || cols < 0)
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' has a negative extent");
    if (entry.at("dtype").get<std::string>() != "f64")
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' has unsupported dtype");
    std::uint64_t off = entry.at("offset").get<std::uint64_t>();
    std::uint64_t bytes = std::uint64_t(rows) * std::uint64_t(cols) * sizeof(double);
    if (off != expect_offset)
      throw std::runtime_error("checkpoint: manifest offsets must be contiguous and monotone");
    if (off + bytes > payload_size)
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' runs past end of file");
    t.data.resize(rows, cols);
    std::memcpy(t.data.data(), blob.data() + pos + off, size_t(bytes));
    expect_offset = off + bytes;
    ck.tensors.push_back(std::move(t));
  }
  if (expect_offset != payload_size)
    throw std::runtime_error("checkpoint: payload has trailing bytes");
  return ck;
}

}  // namespace ofm
