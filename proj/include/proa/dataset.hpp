#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proa/image.hpp"
#include "proa/verifier.hpp"

namespace proa::dataset {

/// Name of the index inside a dataset directory: one "file<TAB>label" per line.
inline constexpr const char* kLabelsFile = "labels.tsv";

/// .imt container (little endian):
///   "PIMT" | u8 version=1 | u32 H W C | f32[H*W*C] row-major | u32 CRC-32.
/// Decoding rejects intensities outside [0,1].
std::vector<unsigned char> encode_imt(const ImageTensor& image);
ImageTensor decode_imt(std::span<const unsigned char> bytes);
void save_image(const ImageTensor& image, const std::filesystem::path& path);
ImageTensor load_image(const std::filesystem::path& path);

struct LoadIssue {
  std::string file;  // index entry or tensor file the issue refers to
  std::size_t line = 0;  // 1-based line in the index, 0 when not applicable
  std::string message;
};

struct LoadResult {
  std::vector<LabeledImage> items;
  std::vector<LoadIssue> issues;  // skipped rows, never fatal on their own
};

struct Expectations {
  std::optional<Shape> shape;
  std::size_t num_classes = 0;  // 0 disables the label range check
};

/// Loads every indexed tensor; rows that fail are skipped and reported.
/// Throws DatasetError if the index is unreadable or nothing loads.
LoadResult load_dataset(const std::filesystem::path& dir, const Expectations& expect = {});

/// Writes tensors and the index; ids become file names.
void save_dataset(const std::filesystem::path& dir, std::span<const LabeledImage> items);

}  // namespace proa::dataset
