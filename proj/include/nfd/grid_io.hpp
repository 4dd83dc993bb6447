#pragma once

#include <string>

#include "nfd/bytes.hpp"
#include "nfd/grid.hpp"

namespace nfd {

// GRD1: "GRD1", u8 n, u8 reserved, u16 m, n x u32 dims, f32 payload (all LE).
void encode_grid(ByteWriter& w, const GridTensor& g);
GridTensor decode_grid(ByteReader& r);
std::string grid_to_bytes(const GridTensor& g);
GridTensor grid_from_bytes(std::string_view bytes);
void write_grid(const std::string& path, const GridTensor& g);
GridTensor read_grid(const std::string& path);

// LDS1: "LDS1", u32 C, u32 count, then per instance u32 label + GRD1 block.
std::string dataset_to_bytes(const LabeledDataset& ds);
LabeledDataset dataset_from_bytes(std::string_view bytes);
void write_dataset(const std::string& path, const LabeledDataset& ds);
LabeledDataset read_dataset(const std::string& path);

/// CIFAR-10 binary batch: 3073-byte records (label, then 3x32x32 channel-major
/// pixels), scaled to [0,1].
LabeledDataset cifar10_from_bytes(std::string_view bytes);
LabeledDataset load_cifar10(const std::string& path);

/// IDX unsigned-byte images (magic 0x00000803) with an optional IDX label file
/// (magic 0x00000801). Without labels every instance gets label 0.
LabeledDataset idx_from_bytes(std::string_view images, std::string_view labels);
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path = {});

/// Dispatch on format name: "lds", "cifar10", "idx" (path may be
/// "images.idx[,labels.idx]").
LabeledDataset load_external(const std::string& path, const std::string& format);

}  // namespace nfd
