#include "xmodal/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "xmodal/errors.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

namespace {

constexpr std::array<char, 4> kMagic{'X', 'M', 'F', '1'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw FormatError(std::string("save_features: ") + what + " exceeds 2^32-1");
  return static_cast<std::uint32_t>(v);
}

double to_float_precision(double v) { return static_cast<double>(static_cast<float>(v)); }

void fill_split_tags(std::vector<Split>& splits, Rng rng) {
  const std::size_t n = splits.size();
  const SplitCounts counts = split_counts(n);
  const auto order = rng.permutation(n);
  for (std::size_t k = 0; k < n; ++k) {
    Split s = Split::test;
    if (k < counts.train) s = Split::train;
    else if (k < counts.train + counts.val) s = Split::val;
    splits[order[k]] = s;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  if (b != e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (cell.empty() || ec != std::errc{} || ptr != e)
    throw FormatError("CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

std::vector<std::size_t> FeaturePairSet::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split) out.push_back(i);
  return out;
}

std::size_t FeaturePairSet::count(Split split) const {
  return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), split));
}

FeaturePairSet FeaturePairSet::subset(Split split) const {
  const auto idx = indices(split);
  FeaturePairSet out;
  out.visual = visual.gather_rows(idx);
  out.text = text.gather_rows(idx);
  out.splits.assign(idx.size(), split);
  if (has_classes()) {
    for (std::size_t i : idx) out.classes.push_back(classes[i]);
  }
  return out;
}

void FeaturePairSet::validate() const {
  if (visual.rows() != text.rows())
    throw FormatError("feature set: " + std::to_string(visual.rows()) + " visual rows vs " +
                      std::to_string(text.rows()) + " text rows");
  if (splits.size() != visual.rows())
    throw FormatError("feature set: split tag count does not match row count");
  if (!classes.empty() && classes.size() != visual.rows())
    throw FormatError("feature set: class id count does not match row count");
  if (!visual.all_finite() || !text.all_finite())
    throw FormatError("feature set: non-finite feature value");
  for (Split s : splits)
    if (static_cast<std::uint8_t>(s) > 2) throw FormatError("feature set: invalid split tag");
}

void validate(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (spec.pairs_per_class < 1) throw ConfigError("synthetic data needs at least 1 pair per class");
  if (spec.latent_dim < 1 || spec.visual_dim < 1 || spec.text_dim < 1)
    throw ConfigError("synthetic data dimensions must be positive");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
    throw ConfigError("synthetic noise sigma must be >= 0");
}

SplitCounts split_counts(std::size_t n) noexcept {
  SplitCounts c{n * 8 / 10, n / 10, n / 10};
  std::size_t remainder = n - c.train - c.val - c.test;
  if (remainder > 0) {
    ++c.train;
    --remainder;
  }
  c.val += remainder;
  return c;
}

FeaturePairSet generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const Rng root(spec.seed);
  Rng proto_rng = root.split(1);
  Rng map_rng = root.split(2);
  Rng sample_rng = root.split(3);
  Rng shuffle_rng = root.split(4);

  const std::size_t latent = spec.latent_dim;
  Matrix prototypes(spec.num_classes, latent);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    auto row = prototypes.row(c);
    double sq = 0.0;
    do {
      sq = 0.0;
      for (double& x : row) {
        x = proto_rng.normal();
        sq += x * x;
      }
    } while (sq == 0.0);
    const double norm = std::sqrt(sq);
    for (double& x : row) x /= norm;
  }

  const double map_scale = 1.0 / std::sqrt(static_cast<double>(latent));
  Matrix visual_map(latent, spec.visual_dim);
  Matrix text_map(latent, spec.text_dim);
  for (double& x : visual_map.values()) x = map_rng.normal() * map_scale;
  for (double& x : text_map.values()) x = map_rng.normal() * map_scale;

  // The latent jitter has covariance sigma * I; the text observation noise
  // has standard deviation sigma.
  const double jitter = std::sqrt(spec.noise_sigma);
  const std::size_t n = spec.num_classes * spec.pairs_per_class;
  Matrix latents(n, latent);
  std::vector<std::uint32_t> classes(n);
  for (std::size_t c = 0, r = 0; c < spec.num_classes; ++c) {
    for (std::size_t p = 0; p < spec.pairs_per_class; ++p, ++r) {
      classes[r] = static_cast<std::uint32_t>(c);
      auto z = latents.row(r);
      auto proto = prototypes.row(c);
      for (std::size_t k = 0; k < latent; ++k) z[k] = proto[k] + jitter * sample_rng.normal();
    }
  }

  Matrix visual = matmul(latents, visual_map);
  Matrix text = matmul(latents, text_map);
  for (double& x : text.values()) x += spec.noise_sigma * sample_rng.normal();

  const auto order = shuffle_rng.permutation(n);
  FeaturePairSet set;
  set.visual = visual.gather_rows(order);
  set.text = text.gather_rows(order);
  for (double& x : set.visual.values()) x = to_float_precision(x);
  for (double& x : set.text.values()) x = to_float_precision(x);
  set.classes.resize(n);
  for (std::size_t k = 0; k < n; ++k) set.classes[k] = classes[order[k]];
  set.splits.assign(n, Split::train);
  fill_split_tags(set.splits, shuffle_rng.split(1));
  return set;
}

std::size_t xmf_file_size(std::size_t n, std::size_t d1, std::size_t d2) noexcept {
  return kHeaderBytes + n * (d1 + d2) * 4 + n + n * 4;
}

void save_features(const FeaturePairSet& set, const std::filesystem::path& path) {
  set.validate();
  std::string bytes;
  bytes.reserve(xmf_file_size(set.size(), set.visual_dim(), set.text_dim()));
  bytes.append(kMagic.data(), kMagic.size());
  put_u32(bytes, checked_u32(set.size(), "row count"));
  put_u32(bytes, checked_u32(set.visual_dim(), "visual dimension"));
  put_u32(bytes, checked_u32(set.text_dim(), "text dimension"));
  for (const Matrix* m : {&set.visual, &set.text})
    for (double v : m->values()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  for (Split s : set.splits) bytes.push_back(static_cast<char>(s));
  for (std::size_t i = 0; i < set.size(); ++i) put_u32(bytes, set.has_classes() ? set.classes[i] : kNoClass);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

FeaturePairSet load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open feature file '" + path.string() + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw FormatError("'" + path.string() + "' is not an XMF1 file (bad magic)");
  if (bytes.size() < kHeaderBytes) throw FormatError("'" + path.string() + "': truncated header");

  const std::size_t n = get_u32(&bytes[4]);
  const std::size_t d1 = get_u32(&bytes[8]);
  const std::size_t d2 = get_u32(&bytes[12]);
  const std::size_t expected = xmf_file_size(n, d1, d2);
  if (bytes.size() != expected) {
    throw FormatError("'" + path.string() + "': shape " + std::to_string(n) + "x(" +
                      std::to_string(d1) + "+" + std::to_string(d2) + ") needs " +
                      std::to_string(expected) + " bytes, file has " + std::to_string(bytes.size()));
  }

  std::size_t offset = kHeaderBytes;
  auto read_matrix = [&](std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.values()) {
      v = static_cast<double>(std::bit_cast<float>(get_u32(&bytes[offset])));
      offset += 4;
    }
    return m;
  };

  FeaturePairSet set;
  set.visual = read_matrix(n, d1);
  set.text = read_matrix(n, d2);
  set.splits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char tag = bytes[offset++];
    if (tag > 2) throw FormatError("'" + path.string() + "': invalid split tag " + std::to_string(tag));
    set.splits[i] = static_cast<Split>(tag);
  }
  std::vector<std::uint32_t> classes(n);
  for (auto& c : classes) {
    c = get_u32(&bytes[offset]);
    offset += 4;
  }
  if (std::any_of(classes.begin(), classes.end(), [](std::uint32_t c) { return c != kNoClass; }))
    set.classes = std::move(classes);

  if (!set.visual.all_finite() || !set.text.all_finite())
    throw FormatError("'" + path.string() + "': non-finite feature value");
  return set;
}

FeaturePairSet load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open CSV file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("'" + path.string() + "': empty CSV file");

  const auto header = split_csv_line(line);
  std::size_t d1 = 0, d2 = 0, col = 0;
  while (col < header.size() && header[col] == "v_" + std::to_string(d1)) ++d1, ++col;
  while (col < header.size() && header[col] == "t_" + std::to_string(d2)) ++d2, ++col;
  std::ptrdiff_t split_col = -1, class_col = -1;
  for (; col < header.size(); ++col) {
    if (header[col] == "split" && split_col < 0) split_col = static_cast<std::ptrdiff_t>(col);
    else if (header[col] == "class" && class_col < 0) class_col = static_cast<std::ptrdiff_t>(col);
    else throw FormatError("'" + path.string() + "': unexpected CSV column '" + header[col] + "'");
  }
  if (d1 == 0 || d2 == 0)
    throw FormatError("'" + path.string() + "': header needs v_0.. and t_0.. columns");

  std::vector<double> visual, text;
  FeaturePairSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < d1; ++c) visual.push_back(parse_number(cells[c], line_no));
    for (std::size_t c = 0; c < d2; ++c) text.push_back(parse_number(cells[d1 + c], line_no));
    set.splits.push_back(split_col < 0 ? Split::train : parse_split(cells[static_cast<std::size_t>(split_col)]));
    if (class_col >= 0) {
      const double id = parse_number(cells[static_cast<std::size_t>(class_col)], line_no);
      if (id < 0 || id != std::floor(id) || id >= 4294967295.0)
        throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": bad class id");
      set.classes.push_back(static_cast<std::uint32_t>(id));
    }
  }
  const std::size_t n = set.splits.size();
  set.visual = Matrix(n, d1, std::move(visual));
  set.text = Matrix(n, d2, std::move(text));
  set.validate();
  return set;
}

FeaturePairSet load_dataset(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? load_features_csv(path) : load_features(path);
}

}  // namespace xmodal
