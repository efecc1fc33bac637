#include "dynnet/builder/weights.hpp"

#include <fstream>
#include <iterator>

#include "dynnet/builder/spec_format.hpp"
#include "dynnet/core/bytes.hpp"
#include "dynnet/core/error.hpp"

namespace dynnet::builder {

namespace {

constexpr char kMagic[5] = "DNNW";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string serialize_weights(const ModelSpec& spec, const nn::Model<float>& model) {
  ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.str(format_spec(spec_to_document(spec)));
  const auto state = model.state();
  w.u64(state.values.size());
  for (float v : state.values) w.f32(v);
  return w.bytes();
}

LoadedModel deserialize_weights(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kMagic, "weights file");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError(DataErrorCode::bad_version, "unsupported weights version " + std::to_string(version));
  }
  ModelSpec spec = parse_model_spec(r.str());
  nn::ModelState<float> state;
  state.values.resize(r.u64());
  for (float& v : state.values) v = r.f32();
  if (!r.done()) throw DataError(DataErrorCode::invalid_argument, "trailing bytes after weights");
  auto built = build_model<float>(spec, 0);
  built.model.load_state(state);
  built.model.set_mode(nn::Mode::eval);
  return {std::move(spec), std::move(built.model)};
}

void save_weights(const ModelSpec& spec, const nn::Model<float>& model,
                  const std::filesystem::path& path) {
  const std::string bytes = serialize_weights(spec, model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataErrorCode::io, "cannot write " + path.string());
}

LoadedModel load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorCode::io, "cannot open " + path.string());
  return deserialize_weights(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

}  // namespace dynnet::builder
