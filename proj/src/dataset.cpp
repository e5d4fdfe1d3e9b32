#include "proa/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "binary_io.hpp"
#include "proa/errors.hpp"

namespace proa::dataset {

namespace {

constexpr char kImtMagic[5] = "PIMT";
constexpr std::uint8_t kImtVersion = 1;
constexpr std::uint32_t kMaxSide = 1u << 15;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

std::vector<unsigned char> encode_imt(const ImageTensor& image) {
  detail::ByteWriter w;
  w.bytes(kImtMagic, 4);
  w.u8(kImtVersion);
  w.u32(static_cast<std::uint32_t>(image.height()));
  w.u32(static_cast<std::uint32_t>(image.width()));
  w.u32(static_cast<std::uint32_t>(image.channels()));
  for (double v : image.data()) w.f32(static_cast<float>(v));
  w.checksum();
  return w.take();
}

ImageTensor decode_imt(std::span<const unsigned char> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kImtMagic, "imt");
  const auto version = r.u8("version");
  if (version != kImtVersion) throw ParseError("unsupported imt version " + std::to_string(version), 4);
  const std::size_t at = r.offset();
  Shape s;
  s.height = r.u32("header (height)");
  s.width = r.u32("header (width)");
  s.channels = r.u32("header (channels)");
  if (s.height == 0 || s.width == 0 || s.height > kMaxSide || s.width > kMaxSide ||
      (s.channels != 1 && s.channels != 3)) {
    throw ParseError("invalid image shape " + to_string(s), at);
  }
  r.need(s.size() * sizeof(float), "pixel payload");
  std::vector<double> data(s.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t pos = r.offset();
    const float v = r.f32("pixel payload");
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ParseError("intensity " + std::to_string(v) + " outside [0,1]", pos);
    }
    data[i] = v;
  }
  r.verify_checksum("imt");
  return ImageTensor(s, std::move(data));
}

void save_image(const ImageTensor& image, const std::filesystem::path& path) {
  detail::write_file(path.string(), encode_imt(image));
}

ImageTensor load_image(const std::filesystem::path& path) {
  return decode_imt(detail::read_file(path.string()));
}

LoadResult load_dataset(const std::filesystem::path& dir, const Expectations& expect) {
  const auto index_path = dir / kLabelsFile;
  std::ifstream index(index_path);
  if (!index) throw DatasetError("cannot open dataset index " + index_path.string());

  LoadResult result;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(index, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      result.issues.push_back({line, line_no, "expected 'file<TAB>label'"});
      continue;
    }
    const std::string file = trim(line.substr(0, tab));
    const std::string label_text = trim(line.substr(tab + 1));
    std::size_t label = 0;
    const auto [end, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc() || end != label_text.data() + label_text.size()) {
      result.issues.push_back({file, line_no, "label '" + label_text + "' is not a nonnegative integer"});
      continue;
    }
    if (expect.num_classes != 0 && label >= expect.num_classes) {
      result.issues.push_back({file, line_no,
                               "label " + std::to_string(label) + " outside [0, " +
                                   std::to_string(expect.num_classes) + ")"});
      continue;
    }
    const auto path = dir / file;
    if (!std::filesystem::exists(path)) {
      result.issues.push_back({file, line_no, "tensor file not found"});
      continue;
    }
    try {
      ImageTensor image = load_image(path);
      if (expect.shape && image.shape() != *expect.shape) {
        result.issues.push_back({file, line_no,
                                 "shape " + to_string(image.shape()) + " does not match model input " +
                                     to_string(*expect.shape)});
        continue;
      }
      result.items.push_back({file, std::move(image), label});
    } catch (const std::exception& e) {
      result.issues.push_back({file, line_no, e.what()});
    }
  }
  if (result.items.empty()) {
    std::string msg = "no images loaded from " + dir.string();
    if (!result.issues.empty()) {
      msg += " (" + std::to_string(result.issues.size()) + " problem(s), first: " +
             result.issues.front().file + ": " + result.issues.front().message + ")";
    }
    throw DatasetError(msg);
  }
  return result;
}

void save_dataset(const std::filesystem::path& dir, std::span<const LabeledImage> items) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / kLabelsFile, std::ios::trunc);
  if (!index) throw DatasetError("cannot write index in " + dir.string());
  for (const auto& item : items) {
    if (item.id.empty() || item.id.find_first_of("\t\n/") != std::string::npos) {
      throw DatasetError("invalid image id '" + item.id + "'");
    }
    save_image(item.image, dir / item.id);
    index << item.id << '\t' << item.label << '\n';
  }
}

}  // namespace proa::dataset
