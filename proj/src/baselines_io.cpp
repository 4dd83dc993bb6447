#include <limits>
#include <string>

#include "nfd/baselines.hpp"
#include "nfd/bytes.hpp"
#include "nfd/errors.hpp"

namespace nfd {

std::string fred_to_bytes(const FredDataset& ds) {
  const std::size_t n = ds.mask.dims.size();
  if (n == 0 || n > 255) throw InvalidArgument("FRD1 rank must be in 1..255");
  if (ds.channels == 0 || ds.channels > 0xffff) throw InvalidArgument("FRD1 channels must be in 1..65535");
  if (ds.mask.bits.size() != product(ds.mask.dims)) throw InvalidArgument("FRD1 mask size does not match dims");
  if (ds.labels.size() != ds.instances.size()) throw InvalidArgument("FRD1 labels and instances differ in length");
  const std::size_t pop = ds.mask.popcount();
  ByteWriter w;
  w.bytes("FRD1");
  w.u8(static_cast<std::uint8_t>(n));
  w.u8(0);
  w.u16(static_cast<std::uint16_t>(ds.channels));
  for (auto d : ds.mask.dims) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("FRD1 dim must fit in u32");
    w.u32(static_cast<std::uint32_t>(d));
  }
  w.u32(static_cast<std::uint32_t>(ds.instances.size()));
  w.u32(static_cast<std::uint32_t>(pop));
  for (std::size_t byte = 0; byte < (ds.mask.bits.size() + 7) / 8; ++byte) {
    std::uint8_t v = 0;
    for (std::size_t bit = 0; bit < 8 && byte * 8 + bit < ds.mask.bits.size(); ++bit)
      if (ds.mask.bits[byte * 8 + bit]) v |= static_cast<std::uint8_t>(1u << bit);
    w.u8(v);
  }
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& c = ds.instances[i];
    if (c.channels != ds.channels || c.values.size() != pop * ds.channels)
      throw InvalidArgument("FRD1 instance coefficient count does not match the mask");
    w.u32(static_cast<std::uint32_t>(ds.labels[i]));
    for (double v : c.values) w.f32(static_cast<float>(v));
  }
  return w.take();
}

FredDataset fred_from_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("FRD1");
  const std::size_t at_n = r.offset();
  const std::size_t n = r.u8();
  r.u8();
  FredDataset ds;
  ds.channels = r.u16();
  if (n == 0) throw FormatError("FRD1 rank must be >= 1", at_n);
  if (ds.channels == 0) throw FormatError("FRD1 channels must be >= 1", at_n + 2);
  std::size_t points = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t at = r.offset();
    const std::size_t d = r.u32();
    if (d == 0) throw FormatError("FRD1 dim must be positive", at);
    if (points > std::numeric_limits<std::size_t>::max() / d) throw FormatError("FRD1 dim overflow", at);
    points *= d;
    ds.mask.dims.push_back(d);
  }
  const std::size_t count = r.u32();
  const std::size_t at_pop = r.offset();
  const std::size_t pop = r.u32();
  r.require((points + 7) / 8, 1, "FRD1 mask bitmap");
  const std::string_view bitmap = r.take((points + 7) / 8);
  ds.mask.bits.assign(points, 0);
  for (std::size_t i = 0; i < points; ++i)
    ds.mask.bits[i] = (static_cast<unsigned char>(bitmap[i / 8]) >> (i % 8)) & 1u;
  if (ds.mask.popcount() != pop) throw FormatError("FRD1 popcount disagrees with the mask bitmap", at_pop);
  r.require(count, 4 * (1 + pop * ds.channels), "FRD1 coefficient payload");
  for (std::size_t i = 0; i < count; ++i) {
    ds.labels.push_back(r.u32());
    FredCoefficients c;
    c.channels = ds.channels;
    c.values.resize(pop * ds.channels);
    for (auto& v : c.values) v = r.f32();
    ds.instances.push_back(std::move(c));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after FRD1 payload", r.offset());
  return ds;
}

void write_fred(const std::string& path, const FredDataset& ds) { write_file(path, fred_to_bytes(ds)); }
FredDataset read_fred(const std::string& path) { return fred_from_bytes(read_file(path)); }

}  // namespace nfd
