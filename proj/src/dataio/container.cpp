#include "dynnet/dataio/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dynnet/core/error.hpp"

namespace dynnet::data {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw DataError(DataErrorCode::truncated,
                      std::string("container ends inside ") + what + " (offset " +
                          std::to_string(pos_) + ")");
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes_[pos_++]); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw DataError(DataErrorCode::invalid_argument, std::string(what) + " too large");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode_container(const TrialSet& set) {
  set.validate();
  std::string out(kContainerMagic, 4);
  put_u32(out, kContainerVersion);
  put_u32(out, checked_u32(set.n_trials(), "n_trials"));
  put_u32(out, checked_u32(set.n_channels(), "n_channels"));
  put_u32(out, checked_u32(set.n_samples(), "n_samples"));
  put_f32(out, static_cast<float>(set.fs));
  for (int l : set.labels) out.push_back(static_cast<char>(l));
  for (int s : set.subjects) out.push_back(static_cast<char>(s));
  for (Session s : set.sessions) out.push_back(static_cast<char>(s));
  out.reserve(out.size() + 4 * set.data.size());
  for (float v : set.data.data()) put_f32(out, v);
  return out;
}

TrialSet decode_container(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw DataError(DataErrorCode::bad_magic, "not an EEGT container");
  }
  Reader in(bytes);
  in.need(4, "magic");
  (void)in.u32("magic");
  const std::uint32_t version = in.u32("version");
  if (version != kContainerVersion) {
    throw DataError(DataErrorCode::bad_version, "unsupported container version " + std::to_string(version));
  }
  const std::size_t n = in.u32("header");
  const std::size_t channels = in.u32("header");
  const std::size_t samples = in.u32("header");
  TrialSet set;
  set.fs = in.f32("header");
  const std::size_t values = n * channels * samples;
  in.need(3 * n, "trial metadata");
  if (in.remaining() - 3 * n < 4 * values) {
    throw DataError(DataErrorCode::truncated, "container holds fewer samples than its header declares");
  }
  set.labels.resize(n);
  set.subjects.resize(n);
  set.sessions.resize(n);
  for (auto& l : set.labels) l = in.u8();
  for (auto& s : set.subjects) s = in.u8();
  for (auto& s : set.sessions) s = static_cast<Session>(in.u8());
  set.data = nn::Tensor<float>(nn::Shape{n, channels, samples});
  for (auto& v : set.data.data()) v = in.f32("samples");
  if (in.remaining() != 0) {
    throw DataError(DataErrorCode::invalid_argument,
                    std::to_string(in.remaining()) + " trailing bytes after samples");
  }
  set.validate();
  return set;
}

void write_container(const TrialSet& set, const std::filesystem::path& path) {
  const std::string bytes = encode_container(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataErrorCode::io, "write failed for " + path.string());
}

TrialSet read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorCode::io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace dynnet::data
