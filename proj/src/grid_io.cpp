#include "nfd/grid_io.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "nfd/errors.hpp"

namespace nfd {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("short write to '" + path + "'");
}

void encode_grid(ByteWriter& w, const GridTensor& g) {
  if (g.rank() > 255) throw InvalidArgument("GRD1 rank must fit in u8");
  if (g.channels() > 0xffff) throw InvalidArgument("GRD1 channels must fit in u16");
  w.bytes("GRD1");
  w.u8(static_cast<std::uint8_t>(g.rank()));
  w.u8(0);
  w.u16(static_cast<std::uint16_t>(g.channels()));
  for (auto d : g.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("GRD1 dim must fit in u32");
    w.u32(static_cast<std::uint32_t>(d));
  }
  for (double v : g.values()) w.f32(static_cast<float>(v));
}

GridTensor decode_grid(ByteReader& r) {
  r.expect_magic("GRD1");
  const std::size_t at_rank = r.offset();
  const std::size_t n = r.u8();
  r.u8();
  const std::size_t m = r.u16();
  if (n == 0) throw FormatError("GRD1 rank must be >= 1", at_rank);
  if (m == 0) throw FormatError("GRD1 channel count must be >= 1", at_rank + 2);
  Dims dims(n);
  std::size_t count = m;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t at = r.offset();
    dims[k] = r.u32();
    if (dims[k] == 0) throw FormatError("GRD1 dim must be positive", at);
    if (count > std::numeric_limits<std::size_t>::max() / dims[k]) throw FormatError("GRD1 dim overflow", at);
    count *= dims[k];
  }
  r.require(count, 4, "GRD1 payload");
  std::vector<double> values(count);
  for (auto& v : values) v = r.f32();
  return GridTensor(m, std::move(dims), std::move(values));
}

std::string grid_to_bytes(const GridTensor& g) {
  ByteWriter w;
  encode_grid(w, g);
  return w.take();
}

GridTensor grid_from_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  return decode_grid(r);
}

void write_grid(const std::string& path, const GridTensor& g) { write_file(path, grid_to_bytes(g)); }
GridTensor read_grid(const std::string& path) { return grid_from_bytes(read_file(path)); }

std::string dataset_to_bytes(const LabeledDataset& ds) {
  ds.validate();
  ByteWriter w;
  w.bytes("LDS1");
  w.u32(static_cast<std::uint32_t>(ds.class_count));
  w.u32(static_cast<std::uint32_t>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(ds.labels[i]));
    encode_grid(w, ds.instances[i]);
  }
  return w.take();
}

LabeledDataset dataset_from_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("LDS1");
  LabeledDataset ds;
  ds.class_count = r.u32();
  const std::size_t count = r.u32();
  // every record holds at least label + GRD1 header
  r.require(count, 4 + 12, "LDS1 record table");
  ds.instances.reserve(count);
  ds.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const std::size_t label = r.u32();
    if (label >= ds.class_count) throw FormatError("LDS1 label out of range", at);
    ds.labels.push_back(label);
    ds.instances.push_back(decode_grid(r));
    if (ds.instances.back().shape() != ds.instances.front().shape() ||
        ds.instances.back().channels() != ds.instances.front().channels())
      throw FormatError("LDS1 instances must share shape", at);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after LDS1 records", r.offset());
  return ds;
}

void write_dataset(const std::string& path, const LabeledDataset& ds) { write_file(path, dataset_to_bytes(ds)); }
LabeledDataset read_dataset(const std::string& path) { return dataset_from_bytes(read_file(path)); }

LabeledDataset cifar10_from_bytes(std::string_view bytes) {
  constexpr std::size_t record = 1 + 3 * 32 * 32;
  if (bytes.empty() || bytes.size() % record != 0)
    throw FormatError("CIFAR-10 file size is not a multiple of 3073", bytes.size() - bytes.size() % record);
  LabeledDataset ds;
  ds.class_count = 10;
  ByteReader r(bytes);
  while (!r.at_end()) {
    const std::size_t at = r.offset();
    const std::size_t label = r.u8();
    if (label >= 10) throw FormatError("CIFAR-10 label out of range", at);
    auto px = r.take(3 * 32 * 32);
    std::vector<double> values(px.size());
    std::transform(px.begin(), px.end(), values.begin(),
                   [](char c) { return static_cast<unsigned char>(c) / 255.0; });
    ds.labels.push_back(label);
    ds.instances.emplace_back(3, Dims{32, 32}, std::move(values));
  }
  return ds;
}

LabeledDataset load_cifar10(const std::string& path) { return cifar10_from_bytes(read_file(path)); }

LabeledDataset idx_from_bytes(std::string_view images, std::string_view labels) {
  ByteReader r(images);
  const std::uint32_t magic = r.u32_be();
  if ((magic >> 8) != 0x08) throw FormatError("IDX images must be unsigned-byte (type 0x08)", 0);
  const std::size_t ndim = magic & 0xff;
  if (ndim < 2) throw FormatError("IDX image file needs at least 2 dims", 3);
  const std::size_t count = r.u32_be();
  Dims dims(ndim - 1);
  std::size_t pts = 1;
  for (auto& d : dims) {
    const std::size_t at = r.offset();
    d = r.u32_be();
    if (d == 0) throw FormatError("IDX dim must be positive", at);
    if (pts > std::numeric_limits<std::size_t>::max() / d) throw FormatError("IDX dim overflow", at);
    pts *= d;
  }
  if (pts != 0 && count > r.remaining() / pts) throw FormatError("IDX payload truncated", r.offset());

  LabeledDataset ds;
  ds.labels.assign(count, 0);
  if (!labels.empty()) {
    ByteReader lr(labels);
    if (lr.u32_be() != 0x00000801) throw FormatError("IDX label magic must be 0x00000801", 0);
    const std::size_t lcount = lr.u32_be();
    if (lcount != count) throw FormatError("IDX label count differs from image count", 4);
    auto lb = lr.take(lcount);
    for (std::size_t i = 0; i < count; ++i) ds.labels[i] = static_cast<unsigned char>(lb[i]);
  }
  std::size_t max_label = 0;
  for (auto l : ds.labels) max_label = std::max(max_label, l);
  ds.class_count = max_label + 1;
  for (std::size_t i = 0; i < count; ++i) {
    auto px = r.take(pts);
    std::vector<double> values(pts);
    std::transform(px.begin(), px.end(), values.begin(),
                   [](char c) { return static_cast<unsigned char>(c) / 255.0; });
    ds.instances.emplace_back(1, dims, std::move(values));
  }
  return ds;
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const std::string images = read_file(images_path);
  const std::string labels = labels_path.empty() ? std::string() : read_file(labels_path);
  return idx_from_bytes(images, labels);
}

LabeledDataset load_external(const std::string& path, const std::string& format) {
  if (format == "lds") return read_dataset(path);
  if (format == "cifar10" || format == "cifar") return load_cifar10(path);
  if (format == "idx") {
    const auto comma = path.find(',');
    if (comma == std::string::npos) return load_idx(path);
    return load_idx(path.substr(0, comma), path.substr(comma + 1));
  }
  throw InvalidArgument("unknown dataset format '" + format + "'");
}

}  // namespace nfd
