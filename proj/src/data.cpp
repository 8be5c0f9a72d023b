#include "kappatune/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kappatune/errors.hpp"
#include "kappatune/rng.hpp"

namespace kappatune {

namespace {

constexpr std::uint8_t kUnsignedByteType = 0x08;

std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxData parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) {
    throw FormatError("idx: file shorter than the 4-byte magic (offset 0)");
  }
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw FormatError("idx: magic padding bytes are non-zero (offset 0)");
  }
  if (bytes[2] != kUnsignedByteType) {
    std::ostringstream os;
    os << "idx: type code 0x" << std::hex << static_cast<int>(bytes[2])
       << " is not unsigned byte 0x08 (offset 2)";
    throw FormatError(os.str());
  }
  const std::size_t dim_count = bytes[3];
  if (dim_count == 0) {
    throw FormatError("idx: dimension count is zero (offset 3)");
  }
  const std::size_t header_size = 4 + 4 * dim_count;
  if (bytes.size() < header_size) {
    throw FormatError("idx: truncated header, need " + std::to_string(header_size) +
                      " bytes for " + std::to_string(dim_count) + " dims, have " +
                      std::to_string(bytes.size()) + " (offset " + std::to_string(bytes.size()) +
                      ")");
  }
  IdxData out;
  out.dims.reserve(dim_count);
  std::size_t expected = 1;
  for (std::size_t d = 0; d < dim_count; ++d) {
    const std::uint32_t dim = read_be32(bytes.data() + 4 + 4 * d);
    out.dims.push_back(dim);
    expected *= dim;
  }
  if (bytes.size() != header_size + expected) {
    throw FormatError("idx: payload length " + std::to_string(bytes.size() - header_size) +
                      " does not match dims product " + std::to_string(expected) + " (offset " +
                      std::to_string(header_size) + ")");
  }
  out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header_size), bytes.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx(const std::vector<std::uint32_t>& dims,
                                        const std::vector<std::uint8_t>& payload) {
  if (dims.empty() || dims.size() > 255) {
    throw FormatError("idx: dimension count must be in [1, 255]");
  }
  std::size_t expected = 1;
  for (std::uint32_t d : dims) {
    expected *= d;
  }
  if (payload.size() != expected) {
    throw FormatError("idx: payload length " + std::to_string(payload.size()) +
                      " does not match dims product " + std::to_string(expected));
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * dims.size() + payload.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(kUnsignedByteType);
  out.push_back(static_cast<std::uint8_t>(dims.size()));
  for (std::uint32_t d : dims) {
    write_be32(out, d);
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

double normalize_pixel(std::uint8_t v) { return static_cast<double>(v) / 127.5 - 1.0; }

std::vector<double> normalize(const std::vector<std::uint8_t>& raw) {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = normalize_pixel(raw[i]);
  }
  return out;
}

void Dataset::validate() const {
  if (train_inputs.rows == 0) {
    throw DataError("dataset '" + name + "': empty train split");
  }
  if (num_classes == 0 || feature_dim == 0) {
    throw DataError("dataset '" + name + "': num_classes and feature_dim must be positive");
  }
  if (train_inputs.cols != feature_dim || eval_inputs.cols != feature_dim) {
    throw DataError("dataset '" + name + "': input width does not match feature_dim");
  }
  if (train_inputs.rows != train_labels.size() || eval_inputs.rows != eval_labels.size()) {
    throw DataError("dataset '" + name + "': label count does not match input rows");
  }
  auto check = [&](const Matrix2D& m, const std::vector<int>& labels, const char* split) {
    for (double v : m.values) {
      if (!(v >= -1.0 && v <= 1.0)) {
        throw DataError("dataset '" + name + "': " + split + " feature outside [-1, 1]");
      }
    }
    for (int l : labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= num_classes) {
        throw DataError("dataset '" + name + "': " + split + " label out of range");
      }
    }
  };
  check(train_inputs, train_labels, "train");
  check(eval_inputs, eval_labels, "eval");
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes == 0 || spec.per_class_count == 0 || spec.feature_dim == 0) {
    throw ConfigError("synthetic: num_classes, per_class_count and feature_dim must be positive");
  }
  if (spec.cluster_separation < 0.0 || spec.noise_scale < 0.0) {
    throw ConfigError("synthetic: cluster_separation and noise_scale must be non-negative");
  }

  Rng rng(mix64(spec.seed, 0x646174));  // data stream

  // Class means: separation-scaled directions, deterministic in (seed, class).
  std::vector<std::vector<double>> means(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    means[c].resize(spec.feature_dim);
    for (std::size_t d = 0; d < spec.feature_dim; ++d) {
      means[c][d] = spec.cluster_separation * rng.uniform(-1.0, 1.0);
    }
  }

  const std::size_t total = spec.num_classes * spec.per_class_count;
  std::vector<std::vector<double>> train_rows, eval_rows;
  std::vector<int> train_labels, eval_labels;
  train_rows.reserve(total);

  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t c = k % spec.num_classes;
    std::vector<double> row(spec.feature_dim);
    for (std::size_t d = 0; d < spec.feature_dim; ++d) {
      const double v = means[c][d] + spec.noise_scale * rng.normal();
      row[d] = std::clamp(v, -1.0, 1.0);
    }
    if (k % 5 == 4) {  // every 5th example held out
      eval_rows.push_back(std::move(row));
      eval_labels.push_back(static_cast<int>(c));
    } else {
      train_rows.push_back(std::move(row));
      train_labels.push_back(static_cast<int>(c));
    }
  }

  auto pack = [&](const std::vector<std::vector<double>>& rows) {
    Matrix2D m(rows.size(), spec.feature_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(rows[i].begin(), rows[i].end(), m.row(i));
    }
    return m;
  };

  Dataset ds;
  ds.name = "synthetic";
  ds.train_inputs = pack(train_rows);
  ds.train_labels = std::move(train_labels);
  ds.eval_inputs = pack(eval_rows);
  ds.eval_labels = std::move(eval_labels);
  ds.num_classes = spec.num_classes;
  ds.feature_dim = spec.feature_dim;
  ds.validate();
  return ds;
}

Dataset take_subset(const Dataset& dataset, std::size_t n) {
  if (n < 1 || n > dataset.train_size()) {
    throw ConfigError("take_subset: n = " + std::to_string(n) + " outside [1, " +
                      std::to_string(dataset.train_size()) + "]");
  }
  Dataset out;
  out.name = dataset.name;
  out.train_inputs = Matrix2D(n, dataset.feature_dim);
  std::copy(dataset.train_inputs.values.begin(),
            dataset.train_inputs.values.begin() +
                static_cast<std::ptrdiff_t>(n * dataset.feature_dim),
            out.train_inputs.values.begin());
  out.train_labels.assign(dataset.train_labels.begin(),
                          dataset.train_labels.begin() + static_cast<std::ptrdiff_t>(n));
  out.eval_inputs = dataset.eval_inputs;
  out.eval_labels = dataset.eval_labels;
  out.num_classes = dataset.num_classes;
  out.feature_dim = dataset.feature_dim;
  return out;
}

namespace {

const char* kMnistFiles[4] = {
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) {
    throw DataError("failed reading " + path.string());
  }
  return bytes;
}

}  // namespace

std::string mnist_fetch_instructions(const std::string& dir) {
  std::ostringstream os;
  os << "MNIST files not found under '" << dir << "'.\n"
     << "Fetch the four IDX files (and gunzip them) into that directory:\n";
  for (const char* f : kMnistFiles) {
    os << "  curl -LO https://storage.googleapis.com/cvdf-datasets/mnist/" << f << ".gz\n";
  }
  os << "  gunzip *.gz\n";
  return os.str();
}

Dataset load_mnist(const std::string& dir) {
  const std::filesystem::path base(dir);
  std::string missing;
  for (const char* f : kMnistFiles) {
    if (!std::filesystem::exists(base / f)) {
      missing += missing.empty() ? f : std::string(", ") + f;
    }
  }
  if (!missing.empty()) {
    throw DataError("missing MNIST files: " + missing + "\n" + mnist_fetch_instructions(dir));
  }

  auto load_split = [&](const char* image_file, const char* label_file, Matrix2D& inputs,
                        std::vector<int>& labels) {
    const IdxData images = parse_idx(read_file(base / image_file));
    const IdxData lab = parse_idx(read_file(base / label_file));
    if (images.dims.size() != 3) {
      throw FormatError(std::string(image_file) + ": expected 3 dims (count, rows, cols)");
    }
    if (lab.dims.size() != 1) {
      throw FormatError(std::string(label_file) + ": expected 1 dim (count)");
    }
    const std::size_t count = images.dims[0];
    const std::size_t pixels = static_cast<std::size_t>(images.dims[1]) * images.dims[2];
    if (lab.dims[0] != count) {
      throw FormatError(std::string(label_file) + ": label count does not match image count");
    }
    inputs = Matrix2D(count, pixels);
    for (std::size_t i = 0; i < count * pixels; ++i) {
      inputs.values[i] = normalize_pixel(images.payload[i]);
    }
    labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      labels[i] = lab.payload[i];
    }
  };

  Dataset ds;
  ds.name = "mnist";
  load_split(kMnistFiles[0], kMnistFiles[1], ds.train_inputs, ds.train_labels);
  load_split(kMnistFiles[2], kMnistFiles[3], ds.eval_inputs, ds.eval_labels);
  ds.num_classes = 10;
  ds.feature_dim = ds.train_inputs.cols;
  ds.validate();
  return ds;
}

}  // namespace kappatune
