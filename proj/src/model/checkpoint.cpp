#include "trajformer/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace trajformer::model {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'J', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::string& out, const std::string& s) {
  put_le(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  std::string get_raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }
  void seek(std::size_t p) { pos_ = p; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& metadata,
                     const ParamStore& params) {
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kCheckpointVersion);
  put_string(out, metadata);
  put_le(out, static_cast<std::uint32_t>(params.entries().size()));
  std::uint64_t offset = 0;
  for (const auto& e : params.entries()) {
    put_string(out, e.name);
    const auto& shape = e.tensor.shape();
    put_le(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_le(out, static_cast<std::uint64_t>(d));
    put_le(out, offset);
    offset += e.tensor.numel();
  }
  for (const auto& e : params.entries())
    for (double v : e.tensor.data()) put_f64(out, v);

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot write checkpoint " + tmp.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(f), {}));
  if (r.get_raw(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw CheckpointError(path.string() + " is not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.metadata = r.get_string();
  const auto count = r.get<std::uint32_t>();
  std::vector<std::uint64_t> offsets;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.get_string();
    const auto rank = r.get<std::uint32_t>();
    for (std::uint32_t d = 0; d < rank; ++d) a.shape.push_back(r.get<std::uint64_t>());
    offsets.push_back(r.get<std::uint64_t>());
    ck.arrays.push_back(std::move(a));
  }
  const std::size_t data_start = r.position();
  for (std::size_t i = 0; i < ck.arrays.size(); ++i) {
    auto& a = ck.arrays[i];
    r.seek(data_start + offsets[i] * sizeof(double));
    a.values.resize(nn::shape_numel(a.shape));
    for (auto& v : a.values) v = r.get_f64();
  }
  return ck;
}

void assign_parameters(ParamStore& params, const Checkpoint& checkpoint) {
  if (checkpoint.arrays.size() != params.entries().size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(checkpoint.arrays.size()) +
                          " arrays but the model has " + std::to_string(params.entries().size()) +
                          " parameters");
  }
  for (std::size_t i = 0; i < checkpoint.arrays.size(); ++i) {
    const auto& a = checkpoint.arrays[i];
    auto& e = params.entries()[i];
    if (a.name != e.name) {
      throw CheckpointError("checkpoint array '" + a.name + "' where the model expects '" +
                            e.name + "'");
    }
    if (a.shape != e.tensor.shape()) {
      throw CheckpointError("parameter '" + e.name + "' has shape " +
                            nn::shape_to_string(e.tensor.shape()) + " but the checkpoint stores " +
                            nn::shape_to_string(a.shape));
    }
    auto dst = e.tensor.mutable_data();
    std::copy(a.values.begin(), a.values.end(), dst.begin());
  }
}

}  // namespace trajformer::model
