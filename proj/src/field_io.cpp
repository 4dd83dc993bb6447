#include <cmath>
#include <limits>
#include <string>

#include "nfd/bytes.hpp"
#include "nfd/errors.hpp"
#include "nfd/field.hpp"

namespace nfd {

std::string bundle_to_bytes(const SyntheticDataset& ds) {
  ds.validate();
  if (ds.fields.empty()) throw InvalidArgument("cannot store an empty bundle");
  const FieldConfig& cfg = ds.fields[0].config;
  for (const auto& f : ds.fields)
    if (!(f.config == cfg)) throw InvalidArgument("NFB1 stores one shared field config");
  if (cfg.input_dim > 255 || cfg.hidden_layers() > 255) throw InvalidArgument("NFB1 n and L must fit in u8");
  if (cfg.output_dim > 0xffff) throw InvalidArgument("NFB1 m must fit in u16");
  const double fixed = cfg.omega0 * 256.0;
  if (fixed != std::floor(fixed) || fixed < 1.0 || fixed > 65535.0)
    throw InvalidArgument("NFB1 needs omega0*256 to be an integer in [1, 65535]");
  if (ds.fields.size() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("NFB1 field count must fit in u32");

  ByteWriter w;
  w.bytes("NFB1");
  w.u32(static_cast<std::uint32_t>(ds.fields.size()));
  w.u8(static_cast<std::uint8_t>(cfg.input_dim));
  w.u8(static_cast<std::uint8_t>(cfg.hidden_layers()));
  w.u16(static_cast<std::uint16_t>(cfg.output_dim));
  w.u16(static_cast<std::uint16_t>(fixed));
  for (auto width : cfg.widths) {
    if (width > 0xffff) throw InvalidArgument("NFB1 widths must fit in u16");
    w.u16(static_cast<std::uint16_t>(width));
  }
  for (std::size_t i = 0; i < ds.fields.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(ds.labels[i]));
    for (double v : ds.fields[i].flatten()) w.f32(static_cast<float>(v));
  }
  if (!ds.decode_dims.empty()) {
    w.bytes("NFBD");
    w.u32(static_cast<std::uint32_t>(ds.class_count));
    for (auto d : ds.decode_dims) w.u32(static_cast<std::uint32_t>(d));
  }
  return w.take();
}

SyntheticDataset bundle_from_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("NFB1");
  const std::size_t count = r.u32();
  const std::size_t at_n = r.offset();
  FieldConfig cfg;
  cfg.input_dim = r.u8();
  const std::size_t layers = r.u8();
  cfg.output_dim = r.u16();
  const std::size_t at_omega = r.offset();
  const std::uint16_t fixed = r.u16();
  if (cfg.input_dim == 0) throw FormatError("NFB1 input dimension must be >= 1", at_n);
  if (layers == 0) throw FormatError("NFB1 needs at least one hidden layer", at_n + 1);
  if (cfg.output_dim == 0) throw FormatError("NFB1 output dimension must be >= 1", at_n + 2);
  if (fixed == 0) throw FormatError("NFB1 omega0 must be positive", at_omega);
  cfg.omega0 = fixed / 256.0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t at = r.offset();
    cfg.widths.push_back(r.u16());
    if (cfg.widths.back() == 0) throw FormatError("NFB1 width must be >= 1", at);
  }
  const std::size_t per_field = param_count(cfg);
  r.require(count, 4 * (per_field + 1), "NFB1 field payload");

  SyntheticDataset ds;
  ds.channels = cfg.output_dim;
  ds.fields.reserve(count);
  std::vector<double> flat(per_field);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    ds.labels.push_back(r.u32());
    max_label = std::max(max_label, ds.labels.back());
    for (auto& v : flat) v = r.f32();
    NeuralField f = make_field(cfg);
    f.assign(flat);
    ds.fields.push_back(std::move(f));
  }
  ds.class_count = count == 0 ? 0 : max_label + 1;
  if (!r.at_end()) {
    r.expect_magic("NFBD");
    const std::size_t at_c = r.offset();
    ds.class_count = r.u32();
    if (count != 0 && max_label >= ds.class_count) throw FormatError("NFB1 label exceeds class count", at_c);
    for (std::size_t k = 0; k < cfg.input_dim; ++k) {
      const std::size_t at = r.offset();
      ds.decode_dims.push_back(r.u32());
      if (ds.decode_dims.back() == 0) throw FormatError("NFB1 decode dim must be positive", at);
    }
    if (!r.at_end()) throw FormatError("trailing bytes after NFB1 bundle", r.offset());
  }
  return ds;
}

void save_bundle(const std::string& path, const SyntheticDataset& ds) { write_file(path, bundle_to_bytes(ds)); }
SyntheticDataset load_bundle(const std::string& path) { return bundle_from_bytes(read_file(path)); }

}  // namespace nfd
