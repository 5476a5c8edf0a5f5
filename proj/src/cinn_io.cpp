#include "aberrasim/io/cinn_io.hpp"

#include <array>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "aberrasim/io/binary.hpp"
#include "aberrasim/io/io_error.hpp"

namespace aberrasim {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'C', 'I', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

/// Walks every weight tensor of the net in the canonical container order:
/// per block the mixing matrix then the four coupling subnets (psi, phi,
/// rho, eta; each head, rb1a, rb1b, rb2a, rb2b, projection; weight then
/// bias), followed by the two feature extractors.
template <typename Net, typename FnConv, typename FnMat>
void walk_weights(Net& net, FnConv&& on_conv, FnMat&& on_mat) {
  auto walk_subnet = [&](const std::string& prefix, auto& sn) {
    std::array<std::pair<const char*, decltype(&sn.head)>, 6> layers{
        {{"head", &sn.head},
         {"rb1a", &sn.rb1a},
         {"rb1b", &sn.rb1b},
         {"rb2a", &sn.rb2a},
         {"rb2b", &sn.rb2b},
         {"projection", &sn.projection}}};
    for (auto& [name, layer] : layers)
      on_conv(prefix + "." + name, *layer);
  };
  for (size_t b = 0; b < net.blocks.size(); ++b) {
    auto& block = net.blocks[b];
    const std::string prefix = "block" + std::to_string(b);
    on_mat(prefix + ".mixing", block);
    walk_subnet(prefix + ".psi", block.coupling.psi);
    walk_subnet(prefix + ".phi", block.coupling.phi);
    walk_subnet(prefix + ".rho", block.coupling.rho);
    walk_subnet(prefix + ".eta", block.coupling.eta);
  }
  auto walk_extractor = [&](const std::string& prefix, auto& ex) {
    std::array<std::pair<const char*, decltype(&ex.head)>, 12> layers{
        {{"head", &ex.head},
         {"rb1a", &ex.rb1a},
         {"rb1b", &ex.rb1b},
         {"rb2a", &ex.rb2a},
         {"rb2b", &ex.rb2b},
         {"down", &ex.down},
         {"rb3a", &ex.rb3a},
         {"rb3b", &ex.rb3b},
         {"rb4a", &ex.rb4a},
         {"rb4b", &ex.rb4b},
         {"up", &ex.up},
         {"projection", &ex.projection}}};
    for (auto& [name, layer] : layers)
      on_conv(prefix + "." + name, *layer);
  };
  walk_extractor("forward_extractor", net.forward_extractor);
  walk_extractor("reverse_extractor", net.reverse_extractor);
}

}  // namespace

void save_inn(const ConditionalINN<float>& net, const std::string& path) {
  json blobs = json::array();
  walk_weights(
      net,
      [&](const std::string& name, const ConvLayer<float>& layer) {
        blobs.push_back({{"name", name + ".weight"},
                         {"shape",
                          {layer.out_channels, layer.in_channels,
                           layer.kernel, layer.kernel}}});
        blobs.push_back(
            {{"name", name + ".bias"}, {"shape", {layer.out_channels}}});
      },
      [&](const std::string& name, const InvBlock<float>& block) {
        blobs.push_back(
            {{"name", name},
             {"shape",
              {static_cast<int>(block.W.rows()),
               static_cast<int>(block.W.cols())}}});
      });

  json header;
  header["format"] = "conditional-inn-weights";
  header["k"] = static_cast<int>(net.blocks.size());
  header["image_channels"] = net.image_channels;
  header["mixed_channels"] = net.image_channels * 4;
  header["condition_bits"] = 7;
  header["subnet"] = {{"coupling_hidden", CouplingSubnet<float>::kHidden},
                      {"extractor_hidden", FeatureExtractor<float>::kHidden}};
  header["seed"] = net.seed;
  header["blobs"] = blobs;
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_inn: cannot open " + path);
  out.write(kMagic, 4);
  detail::write_u16(out, kVersion);
  detail::write_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  walk_weights(
      net,
      [&](const std::string&, const ConvLayer<float>& layer) {
        for (float w : layer.weight) detail::write_f32(out, w);
        for (float b : layer.bias) detail::write_f32(out, b);
      },
      [&](const std::string&, const InvBlock<float>& block) {
        for (Eigen::Index r = 0; r < block.W.rows(); ++r)
          for (Eigen::Index c = 0; c < block.W.cols(); ++c)
            detail::write_f32(out, block.W(r, c));
      });
  if (!out) throw IoError("save_inn: write failed: " + path);
}

ConditionalINN<float> load_inn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_inn: cannot open " + path);
  char magic[4];
  detail::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kMagic))
    throw IoError("load_inn: bad magic in " + path);
  const std::uint16_t version = detail::read_u16(in, "version");
  if (version != kVersion)
    throw IoError("load_inn: unsupported version " +
                             std::to_string(version));
  const std::uint32_t header_len = detail::read_u32(in, "header length");
  if (header_len == 0 || header_len > (1u << 24))
    throw IoError("load_inn: implausible header length");
  std::string header_text(header_len, '\0');
  detail::read_exact(in, header_text.data(), header_len, "header");

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("load_inn: bad header JSON: ") +
                             e.what());
  }
  if (header.value("format", "") != "conditional-inn-weights")
    throw IoError("load_inn: unknown container format");
  const int k = header.at("k").get<int>();
  const int image_channels = header.at("image_channels").get<int>();
  if (k < 1 || k > 256 || image_channels < 1 || image_channels > 64)
    throw IoError("load_inn: implausible network dims");

  ConditionalINN<float> net;
  net.image_channels = image_channels;
  net.seed = header.value("seed", std::uint64_t(0));
  net.forward_extractor = FeatureExtractor<float>::make(image_channels);
  net.reverse_extractor = FeatureExtractor<float>::make(image_channels);
  const int mixed = image_channels * 4;
  net.blocks.resize(k);
  for (auto& block : net.blocks)
    block.coupling = CouplingParams<float>::make(mixed);

  const json& blobs = header.at("blobs");
  size_t cursor = 0;
  auto next_blob = [&](const std::string& name, size_t count) {
    if (cursor >= blobs.size())
      throw IoError("load_inn: blob list exhausted at " + name);
    const json& b = blobs[cursor++];
    if (b.at("name").get<std::string>() != name)
      throw IoError("load_inn: blob order mismatch, expected " +
                               name + " got " +
                               b.at("name").get<std::string>());
    size_t declared = 1;
    for (const auto& d : b.at("shape")) declared *= d.get<size_t>();
    if (declared != count)
      throw IoError("load_inn: blob size mismatch for " + name);
  };
  walk_weights(
      net,
      [&](const std::string& name, ConvLayer<float>& layer) {
        next_blob(name + ".weight", layer.weight.size());
        for (float& w : layer.weight) w = detail::read_f32(in, "weights");
        next_blob(name + ".bias", layer.bias.size());
        for (float& b : layer.bias) b = detail::read_f32(in, "weights");
      },
      [&](const std::string& name, InvBlock<float>& block) {
        next_blob(name, static_cast<size_t>(mixed) * mixed);
        Eigen::MatrixXf W(mixed, mixed);
        for (int r = 0; r < mixed; ++r)
          for (int c = 0; c < mixed; ++c)
            W(r, c) = detail::read_f32(in, "weights");
        block.set_mixing(W);
      });
  if (cursor != blobs.size())
    throw IoError("load_inn: unread blobs remain in header");
  return net;
}

}  // namespace aberrasim
